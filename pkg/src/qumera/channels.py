"""QuMERA channels, their Liouville transfer matrix and its spectrum.

Vectorization is row-major: ``|A>> = A.reshape(-1)``, so that
``|A B C>> = (A kron C^T) |B>>`` and ``Tr[A^dag B] = <<A|B>>``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cones import build_M, kraus, swap13
from .model import require_valid

UNIT_TOL = 1e-8
BAND_TOL = 1e-6


class NumericRefusal(RuntimeError):
    """A computation was refused on numerical or resource grounds."""

    def __init__(self, message, verdict=None):
        self.verdict = verdict
        super().__init__(message)


class NotMixingError(NumericRefusal):
    pass


@dataclass(frozen=True)
class Channel:
    """Weighted Kraus families acting on three qudits."""

    picture: str
    families: tuple  # ((weight, ops), ...) with ops (n, D, D)
    d: int

    @property
    def dim(self):
        return self.d**3

    def kraus_ops(self):
        """Flattened Kraus list with weights folded in as square roots."""
        return np.concatenate([np.sqrt(w) * ops for w, ops in self.families])


def qumera_channel(spec, modality="avg", picture="schrodinger"):
    """``Phi^(L)``, ``Phi^(R)`` or their equal mixture, in either picture."""
    require_valid(spec)
    M = build_M(spec)
    mods = ("L", "R") if modality == "avg" else (modality,)
    w = 1.0 / len(mods)
    fams = tuple((w, kraus(spec, a, picture, M=M).ops) for a in mods)
    return Channel(picture=picture, families=fams, d=spec.d)


def channels_LR(spec, picture="schrodinger"):
    return qumera_channel(spec, "L", picture), qumera_channel(spec, "R", picture)


def apply(ch, X):
    """Weighted Kraus sum ``sum_s w_s K_s X K_s^dag``."""
    X = np.asarray(X)
    if X.shape != (ch.dim, ch.dim):
        raise ValueError(f"operator shape {X.shape} does not match {ch.dim}x{ch.dim}")
    out = np.zeros((ch.dim, ch.dim), dtype=complex)
    for w, ops in ch.families:
        out += w * np.einsum("rij,jk,rlk->il", ops, X, ops.conj())
    return out


def vectorize(X):
    return np.asarray(X).reshape(-1)


def devectorize(v):
    v = np.asarray(v)
    D = int(round(np.sqrt(v.size)))
    if D * D != v.size:
        raise ValueError(f"vector of length {v.size} is not a square operator")
    return v.reshape(D, D)


def transfer_matrix(ch):
    """``E = sum_s w_s K_s kron conj(K_s)`` so that ``|Phi(X)>> = E |X>>``."""
    D = ch.dim
    E = np.zeros((D * D, D * D), dtype=complex)
    for w, ops in ch.families:
        E += w * np.einsum("rij,rkl->ikjl", ops, ops.conj()).reshape(D * D, D * D)
    return E


def averaged_transfer_matrix(spec):
    return transfer_matrix(qumera_channel(spec, "avg", "schrodinger"))


def liouville_swap(D):
    """``S`` with ``S (A kron B) S = B kron A`` on ``C^D kron C^D``."""
    S = np.zeros((D * D, D * D))
    i, j = np.meshgrid(np.arange(D), np.arange(D), indexing="ij")
    S[(j * D + i).ravel(), (i * D + j).ravel()] = 1.0
    return S


def pi_superop(ch_ops, d):
    """Conjugate every Kraus operator by the first/third qudit swap."""
    P = swap13(d)
    return np.einsum("ij,rjk,kl->ril", P, ch_ops, P)


@dataclass
class SpectralData:
    eigenvalues: np.ndarray  # descending modulus
    right: np.ndarray  # columns are right eigenvectors
    left: np.ndarray  # columns are left eigenvectors
    unity: list  # indices within tol of 1
    unit_circle: list  # indices on the unit circle but away from 1
    ambiguous: list  # indices in the band near |eta| = 1
    geometric_multiplicity: int
    verdict: str  # "mixing", "non-mixing" or "indeterminate"
    ergodic: bool
    self_adjoint: bool
    fixed_point: np.ndarray = None
    fixed_point_residual: float = None
    tol: float = UNIT_TOL
    matrix: np.ndarray = field(default=None, repr=False)

    @property
    def mixing(self):
        return self.verdict == "mixing"

    @property
    def subleading(self):
        """``|eta_1|``: largest modulus once the unit eigenvalue is removed."""
        rest = [abs(x) for i, x in enumerate(self.eigenvalues) if i not in self.unity[:1]]
        return max(rest) if rest else 0.0

    def nonunit_eigenvalues(self):
        skip = set(self.unity[:1])
        return np.array([x for i, x in enumerate(self.eigenvalues) if i not in skip])


def _fixed_point(E, tol):
    D = int(round(np.sqrt(E.shape[0])))
    _, s, vh = np.linalg.svd(E - np.eye(E.shape[0]))
    rho = devectorize(vh[-1].conj())
    tr = np.trace(rho)
    if abs(tr) < tol:
        raise NumericRefusal("fixed-point eigenvector is traceless", verdict="degenerate")
    rho = rho / tr
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise NumericRefusal("fixed point is not positive semidefinite", verdict="numerical")
    residual = float(np.linalg.norm(E @ vectorize(rho) - vectorize(rho)))
    return rho.reshape(D, D), residual


def spectrum(E, tol=UNIT_TOL, band=BAND_TOL):
    """Eigen-analysis of a transfer matrix with mixing/ergodicity verdicts.

    Eigenvalues within ``tol`` of 1 form the unit cluster; an eigenvalue within
    ``tol`` of the unit circle elsewhere makes the channel non-mixing; one that
    sits in the band ``tol < 1 - |eta| <= band`` gives an indeterminate verdict.
    """
    E = np.asarray(E)
    try:
        w, vl, vr = scipy.linalg.eig(E, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericRefusal(f"eigen-solver failed: {exc}", verdict="solver") from exc
    order = np.lexsort((-w.real, -np.round(np.abs(w), 12)))
    w, vl, vr = w[order], vl[:, order], vr[:, order]
    unity = [i for i, x in enumerate(w) if abs(x - 1) <= tol]
    unity.sort(key=lambda i: abs(w[i] - 1))
    circle, ambiguous = [], []
    for i, x in enumerate(w):
        if i in unity:
            continue
        gap = 1 - abs(x)
        if gap <= tol:
            circle.append(i)
        elif gap <= band:
            ambiguous.append(i)
    sv = np.linalg.svd(E - np.eye(E.shape[0]), compute_uv=False)
    geo = int(np.sum(sv <= tol * max(1.0, sv[0])))
    ergodic = len(unity) == 1 and geo == 1
    if circle or not ergodic:
        verdict = "non-mixing"
    elif ambiguous:
        verdict = "indeterminate"
    else:
        verdict = "mixing"
    self_adjoint = bool(np.linalg.norm(E - E.conj().T) <= tol * max(1.0, np.linalg.norm(E)))
    data = SpectralData(
        eigenvalues=w, right=vr, left=vl, unity=unity, unit_circle=circle,
        ambiguous=ambiguous, geometric_multiplicity=geo, verdict=verdict,
        ergodic=ergodic, self_adjoint=self_adjoint, tol=tol, matrix=E,
    )
    if ergodic:
        data.fixed_point, data.fixed_point_residual = _fixed_point(E, tol)
    return data


def spectral_data(spec, tol=UNIT_TOL):
    return spectrum(averaged_transfer_matrix(spec), tol=tol)


def require_mixing(sd):
    if not sd.mixing:
        raise NotMixingError(f"averaged channel is {sd.verdict}", verdict=sd.verdict)
    return sd


def power(E, m):
    if m < 0:
        raise ValueError("matrix power must be non-negative")
    return np.linalg.matrix_power(np.asarray(E), int(m))


def asymptote(sd):
    """Rank-one limit ``|rho_f>> <<I|`` of the powers of a mixing transfer matrix."""
    require_mixing(sd)
    D = sd.fixed_point.shape[0]
    return np.outer(vectorize(sd.fixed_point), vectorize(np.eye(D)))


def deviation_power(sd, m):
    """``E^m - asymptote`` computed as ``(E - P)^m`` (valid for ``m >= 1``).

    ``P = |rho_f>><<I|`` commutes with ``E`` and ``EP = PE = P = P^2``, so the
    deflated power equals the difference without the cancellation that would
    otherwise floor it at machine precision once ``|eta_1|^m < 1e-16``.
    """
    if m < 1:
        raise ValueError("deviation power needs m >= 1")
    return power(sd.matrix - asymptote(sd), m)
