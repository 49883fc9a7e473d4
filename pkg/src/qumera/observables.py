"""Expectation values and correlators of homogeneous MERA states."""

import warnings
from dataclasses import dataclass

import numpy as np

from . import oracle
from .channels import (
    NumericRefusal,
    apply,
    channels_LR,
    power,
    require_mixing,
    spectral_data,
    averaged_transfer_matrix,
    vectorize,
)
from .cones import _arc_order, build_graph, cone_path
from .model import StructuralError, hat_densities, require_valid

SUSPECT_IMAG = 1e-8
HERMITIAN_TOL = 1e-12
COEFF_TOL = 1e-10


class RealValue(float):
    """Real part of an expectation, carrying the discarded imaginary residue."""

    def __new__(cls, z):
        z = complex(z)
        obj = super().__new__(cls, z.real)
        obj.imag_residue = z.imag
        return obj

    @property
    def suspect(self):
        return abs(self.imag_residue) > SUSPECT_IMAG


def _is_hermitian(A, tol=HERMITIAN_TOL):
    A = np.asarray(A)
    return A.shape[0] == A.shape[1] and np.linalg.norm(A - A.conj().T) <= tol * max(1.0, np.linalg.norm(A))


def _check_triple_op(A, d, name="A"):
    A = np.asarray(A, dtype=complex)
    if A.shape != (d**3, d**3):
        raise ValueError(f"{name} must be {d**3}x{d**3}, got {A.shape}")
    return A


def _result(z, hermitian):
    if hermitian:
        return RealValue(z)
    warnings.warn("observable is not Hermitian; returning the complex value", stacklevel=3)
    return complex(z)


def _trace_with(rho, A):
    return np.trace(rho @ A)


def triple_density(spec, N, k, _cache=None):
    """Reduced state of triple ``k`` from the Schrodinger channels along its cone."""
    require_valid(spec)
    graph = build_graph(N)
    path = cone_path(graph, k)
    if _cache is None:
        _cache = _channel_cache(spec)
    phi, rho_j = _cache
    rho = rho_j[path.hat_leg - 1]
    # a_m acts first (next to the hat), a_1 last (next to the sites)
    for a in reversed(path.modalities):
        rho = apply(phi[a], rho)
    return rho


def _channel_cache(spec):
    L, R = channels_LR(spec, "schrodinger")
    return {"L": L, "R": R}, hat_densities(spec).rho_j


def local_expectation(spec, N, k, A):
    A = _check_triple_op(A, spec.d)
    return _result(_trace_with(triple_density(spec, N, k), A), _is_hermitian(A))


def symmetric_state(spec, N):
    """``Phi^m(rho_C)`` with ``m = log2 N - 2``, via transfer-matrix powers."""
    graph = build_graph(N)
    E = averaged_transfer_matrix(spec)
    rho_c = hat_densities(spec).rho_avg
    D = spec.d**3
    return (power(E, graph.m) @ vectorize(rho_c)).reshape(D, D)


def symmetric_expectation(spec, N, A):
    A = _check_triple_op(A, spec.d)
    return _result(_trace_with(symmetric_state(spec, N), A), _is_hermitian(A))


@dataclass(frozen=True)
class HamiltonianTerms:
    H3: np.ndarray
    H2: np.ndarray
    H1: np.ndarray

    @classmethod
    def from_parts(cls, d, H3=None, H2=None, H1=None):
        H3 = np.zeros((d**3, d**3)) if H3 is None else np.asarray(H3, dtype=complex)
        H2 = np.zeros((d**2, d**2)) if H2 is None else np.asarray(H2, dtype=complex)
        H1 = np.zeros((d, d)) if H1 is None else np.asarray(H1, dtype=complex)
        for name, H, n in (("H3", H3, 3), ("H2", H2, 2), ("H1", H1, 1)):
            if H.shape != (d**n, d**n):
                raise ValueError(f"{name} must be {d**n}x{d**n}, got {H.shape}")
            if not _is_hermitian(H):
                raise ValueError(f"{name} is not Hermitian")
        return cls(H3=H3, H2=H2, H1=H1)

    def triple_term(self):
        d = self.H1.shape[0]
        I1 = np.eye(d)
        h = self.H3.copy()
        h = h + (np.kron(self.H2, I1) + np.kron(I1, self.H2)) / 2
        h = h + (np.kron(np.kron(self.H1, I1), I1) + np.kron(np.kron(I1, self.H1), I1)
                 + np.kron(np.kron(I1, I1), self.H1)) / 3
        return h


def energy_density(spec, N, terms):
    return symmetric_expectation(spec, N, terms.triple_term())


# -- six-qudit states above a pair of neighbouring shadows -------------------

class _Density:
    """Density tensor whose ket and bra legs are labelled by hashable keys."""

    def __init__(self, array, keys, d):
        self.a = array
        self.keys = list(keys)
        self.d = d

    def _labels(self, extra=()):
        ids = {}
        for k in list(self.keys) + list(extra):
            ids.setdefault(k, len(ids))
        n = len(ids) + 1
        return ids, n

    def apply(self, op, in_keys, out_keys):
        ids, n = self._labels(out_keys)
        ket = [ids[k] for k in self.keys]
        bra = [ids[k] + n for k in self.keys]
        op_k = [ids[k] for k in in_keys] + [ids[k] for k in out_keys]
        op_b = [ids[k] + n for k in in_keys] + [ids[k] + n for k in out_keys]
        new_keys = [k for k in self.keys if k not in in_keys] + list(out_keys)
        out = [ids[k] for k in new_keys] + [ids[k] + n for k in new_keys]
        self.a = np.einsum(self.a, ket + bra, op, op_k, np.conj(op), op_b, out, optimize=True)
        self.keys = new_keys

    def trace(self, keys):
        keys = [k for k in keys if k in self.keys]
        if not keys:
            return
        ids, n = self._labels()
        ket = [ids[k] for k in self.keys]
        bra = [ids[k] + (0 if k in keys else n) for k in self.keys]
        kept = [k for k in self.keys if k not in keys]
        out = [ids[k] for k in kept] + [ids[k] + n for k in kept]
        self.a = np.einsum(self.a, ket + bra, out)
        self.keys = kept

    def matrix(self, order):
        pos = [self.keys.index(k) for k in order]
        w = len(self.keys)
        t = np.transpose(self.a, pos + [p + w for p in pos])
        D = self.d ** len(order)
        return t.reshape(D, D)


def _upper_window(level, n_up, lower_sites):
    n_low = 2 * n_up
    mids = set()
    for p in lower_sites:
        q = ((p - 1) % n_low) // 2
        mids.update({(2 * q + 1) % n_low, (2 * q + 2) % n_low})
    return _arc_order({x // 2 for x in mids}, n_up)


def _descend_window(spec, rho, level, n_up, up_sites, targets):
    """Push a reduced state on ``up_sites`` one layer down onto ``targets``."""
    n_low = 2 * n_up
    pairs = {}
    for p in targets:
        q = ((p - 1) % n_low) // 2
        pairs[q] = ((2 * q + 1) % n_low, (2 * q + 2) % n_low)
    needed_mids = {x for pr in pairs.values() for x in pr}
    wanted = set(targets)
    done = set()
    for i in up_sites:
        outs = [("m", 2 * i), ("m", (2 * i + 1) % n_low)]
        rho.apply(spec.lam, [("u", i)], outs)
        rho.trace([o for o in outs if o[1] not in needed_mids])
        have = {k[1] for k in rho.keys if k[0] == "m"}
        for q, (a, b) in pairs.items():
            if q in done or a not in have or b not in have:
                continue
            rho.apply(spec.chi, [("m", a), ("m", b)], [("f", a), ("f", b)])
            rho.trace([("f", x) for x in (a, b) if x not in wanted])
            done.add(q)
    rho.keys = [("u", k[1]) if k[0] == "f" else k for k in rho.keys]
    return rho


def window_density(spec, N, level, sites):
    """Reduced state of consecutive ``sites`` (0-based) at ``level``, contracted from the hat.

    Only the tensors of the merged causal cone above ``level`` enter.
    """
    require_valid(spec)
    graph = build_graph(N)
    if not 0 <= level <= graph.m:
        raise ValueError(f"level {level} outside 0..{graph.m}")
    windows = {level: list(sites)}
    for l in range(level + 1, graph.m + 1):
        windows[l] = _upper_window(l, graph.sites(l), windows[l - 1])
    top = windows[graph.m]
    rest = [s for s in range(4) if s not in top]
    t = np.transpose(spec.hat, top + rest).reshape(spec.d ** len(top), -1)
    rho = (t @ t.conj().T).reshape((spec.d,) * (2 * len(top)))
    dens = _Density(rho, [("u", s) for s in top], spec.d)
    for l in range(graph.m, level, -1):
        dens = _descend_window(spec, dens, l, graph.sites(l), windows[l], windows[l - 1])
    return dens.matrix([("u", s) for s in sites])


def shadow_geometry(N, k_A, depth):
    """Level-``depth`` sites under the two first-neighbour shadows starting at ``k_A``.

    ``k_A`` is the leftmost physical index (1-based) of the left shadow; it
    must sit at a shadow boundary, ``k_A = 0 mod 2**depth``.
    """
    graph = build_graph(N)
    if not 1 <= depth < graph.m:
        raise StructuralError(f"depth {depth} needs 1 <= depth < m = {graph.m}")
    if k_A % (1 << depth):
        raise StructuralError(f"k_A={k_A} is not a shadow boundary at depth {depth}")
    n = graph.sites(depth)
    t = (k_A >> depth) % n
    sites = [(t - 1 + s) % n for s in range(6)]
    centres_A = [((t << depth) + s) % N + 1 for s in range(1 << depth)]
    centres_B = [(((t + 3) << depth) + s) % N + 1 for s in range(1 << depth)]
    return sites, centres_A, centres_B


def shadow_placements(N, depth):
    """All admissible ``k_A`` (1-based, in 1..N) for first-neighbour shadow pairs."""
    return [((t << depth) - 1) % N + 1 for t in range(N >> depth)]


def sigma_top(spec, N, k_A, depth):
    sites, _, _ = shadow_geometry(N, k_A, depth)
    return window_density(spec, N, depth, sites)


def sigma_avg(spec, N, depth):
    ks = shadow_placements(N, depth)
    return sum(sigma_top(spec, N, k, depth) for k in ks) / len(ks)


def two_triple_value(E_pow, sigma, A, B):
    """``Tr[(A kron B) (Phi^m kron Phi^m)(sigma)]`` in Liouville form."""
    D = A.shape[0]
    S = np.asarray(sigma).reshape(D, D, D, D).transpose(0, 2, 1, 3).reshape(D * D, D * D)
    S = E_pow @ S @ E_pow.T
    return vectorize(A.T) @ S @ vectorize(B.T)


def _correlate(spec, sigma, A, B, depth):
    A = _check_triple_op(A, spec.d, "A")
    B = _check_triple_op(B, spec.d, "B")
    E = power(averaged_transfer_matrix(spec), depth)
    return _result(two_triple_value(E, sigma, A, B), _is_hermitian(A) and _is_hermitian(B))


def shadow_correlator(spec, N, k_A, depth, A, B):
    return _correlate(spec, sigma_top(spec, N, k_A, depth), A, B, depth)


def symmetric_correlator(spec, N, A, B, depth):
    return _correlate(spec, sigma_avg(spec, N, depth), A, B, depth)


def correlator_with_sigma(spec, sigma, A, B, depth):
    return _correlate(spec, sigma, A, B, depth)


# -- thermodynamic limit ---------------------------------------------------------

def thermo_expectation(spec, A, sd=None):
    A = _check_triple_op(A, spec.d)
    sd = require_mixing(sd or spectral_data(spec))
    return _result(_trace_with(sd.fixed_point, A), _is_hermitian(A))


def centred(A, rho_f):
    """``A - Tr[rho_f A] * I``."""
    return A - np.trace(rho_f @ A) * np.eye(A.shape[0])


def connected_correlator(spec, A, B, depth, sigma, sd=None):
    A = _check_triple_op(A, spec.d, "A")
    B = _check_triple_op(B, spec.d, "B")
    sd = require_mixing(sd or spectral_data(spec))
    dA, dB = centred(A, sd.fixed_point), centred(B, sd.fixed_point)
    E = power(sd.matrix, depth)
    return _result(two_triple_value(E, sigma, dA, dB), _is_hermitian(A) and _is_hermitian(B))


def scaling_exponents(spec, count, sd=None, zero_tol=1e-12):
    """``log2 |eta_j eta_j'|`` over non-unit eigenvalue pairs, descending, deduplicated."""
    sd = require_mixing(sd or spectral_data(spec))
    mods = sorted((abs(x) for x in sd.nonunit_eigenvalues() if abs(x) > zero_tol), reverse=True)
    logs = np.log2(mods)
    vals = sorted({logs[i] + logs[j] for i in range(len(logs)) for j in range(i, len(logs))},
                  reverse=True)
    out = []
    for v in vals:
        if not out or out[-1] - v > 1e-9:
            out.append(float(v))
        if len(out) == count:
            break
    return out


def pair_coefficients(spec, A, B, sigma, sd=None):
    """Eigenvalue pairs ``(eta_j, eta_j')`` with their expansion coefficients.

    Uses the eigenvector basis of the transfer matrix; the unit eigenvalue is
    excluded. Returns ``(etas, C)`` with ``C[j, j']`` the coefficient of
    ``(eta_j eta_j')**m``.
    """
    sd = require_mixing(sd or spectral_data(spec))
    dA, dB = centred(A, sd.fixed_point), centred(B, sd.fixed_point)
    V = sd.right
    Vinv = np.linalg.inv(V)
    D = dA.shape[0]
    S = np.asarray(sigma).reshape(D, D, D, D).transpose(0, 2, 1, 3).reshape(D * D, D * D)
    W = Vinv @ S @ Vinv.T
    a = V.T @ vectorize(dA.T)
    b = V.T @ vectorize(dB.T)
    C = a[:, None] * W * b[None, :]
    keep = [i for i in range(len(sd.eigenvalues)) if i not in sd.unity[:1]]
    return sd.eigenvalues[keep], C[np.ix_(keep, keep)]


def dominant_exponent(spec, A, B, sigma, sd=None, tol=COEFF_TOL):
    """``log2 |eta_j eta_j'|`` of the largest pair with a coefficient above ``tol``."""
    etas, C = pair_coefficients(spec, A, B, sigma, sd)
    best = None
    for j in range(len(etas)):
        for jj in range(len(etas)):
            if abs(C[j, jj]) > tol:
                v = abs(etas[j] * etas[jj])
                if best is None or v > best:
                    best = v
    if best is None or best == 0:
        raise NumericRefusal("no eigenvalue pair contributes to this correlator", verdict="vanishing")
    return float(np.log2(best))


@dataclass(frozen=True)
class DensityCheck:
    lemma_residual: float
    hat_independence: float


def avg_triple_density_check(spec, N, other_hat=None, seed=0):
    """Channel average triple state against the oracle average, plus hat independence of ``rho_f``."""
    from .model import random_hat

    state = oracle.build_state(spec, N)
    avg = sum(oracle.triple_density(state, k) for k in range(1, N + 1)) / N
    lemma = float(np.linalg.norm(symmetric_state(spec, N) - avg))
    if other_hat is None:
        other_hat = random_hat(spec.d, seed)
    sd1 = spectral_data(spec)
    sd2 = spectral_data(spec.replace(hat=other_hat))
    if not (sd1.ergodic and sd2.ergodic):
        raise NumericRefusal("fixed point undefined (channel not ergodic)", verdict=sd1.verdict)
    return DensityCheck(lemma, float(np.linalg.norm(sd1.fixed_point - sd2.fixed_point)))

