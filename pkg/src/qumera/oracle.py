"""Brute-force state-vector reference.

Builds the full ``d**N`` amplitude vector by descending the hat through every
layer and answers questions by literal sandwiches and partial traces. Shares
nothing with the cone/channel code beyond the raw tensors.
"""

from dataclasses import dataclass

import numpy as np

from .channels import NumericRefusal
from .model import require_valid

MAX_AMPLITUDES = 2**24


class ResourceGuardError(NumericRefusal):
    pass


@dataclass(frozen=True)
class FullState:
    N: int
    d: int
    amplitudes: np.ndarray

    @property
    def tensor(self):
        return self.amplitudes.reshape((self.d,) * self.N)


def _descend_layer(psi, lam, chi):
    """One layer top-down: every site through ``lam``, then ``chi`` on odd-even pairs."""
    n = psi.ndim
    for i in reversed(range(n)):
        # site i -> legs (2i, 2i+1); processing right to left keeps earlier axes fixed
        psi = np.tensordot(psi, lam, axes=([i], [0]))
        psi = np.moveaxis(psi, [-2, -1], [i, i + 1])
    n2 = 2 * n
    for q in range(n):
        a, b = (2 * q + 1) % n2, (2 * q + 2) % n2
        psi = np.tensordot(psi, chi, axes=([a, b], [0, 1]))
        psi = np.moveaxis(psi, [-2, -1], [a, b])
    return psi


def build_state(spec, N):
    require_valid(spec)
    n = int(N).bit_length() - 1
    if N < 8 or 2**n != N:
        raise ValueError(f"site count must be a power of two >= 8, got {N}")
    if spec.d**N > MAX_AMPLITUDES:
        raise ResourceGuardError(
            f"d**N = {spec.d}**{N} exceeds the oracle bound of 2**24 amplitudes",
            verdict="resource-guard",
        )
    psi = np.array(spec.hat)
    for _ in range(n - 2):
        psi = _descend_layer(psi, spec.lam, spec.chi)
    return FullState(N=N, d=spec.d, amplitudes=psi.reshape(-1))


def ascend_layer(state, spec):
    """Undo the lowest layer with ``chi^dag`` and ``lam^dag`` (exact for isometries)."""
    psi = state.tensor
    N, d = state.N, state.d
    cd = spec.chi.conj()
    for q in range(N // 2):
        a, b = (2 * q + 1) % N, (2 * q + 2) % N
        psi = np.tensordot(psi, cd, axes=([a, b], [2, 3]))
        psi = np.moveaxis(psi, [-2, -1], [a, b])
    ld = spec.lam.conj()
    for i in range(N // 2):
        psi = np.tensordot(psi, ld, axes=([i, i + 1], [1, 2]))
        psi = np.moveaxis(psi, -1, i)
    return FullState(N=N // 2, d=d, amplitudes=psi.reshape(-1))


def triple_sites(N, k):
    """0-based sites ``k-1, k, k+1`` of the triple centred at 1-based site ``k``."""
    if not 1 <= k <= N:
        raise ValueError(f"site {k} outside 1..{N}")
    c = k - 1
    return [(c - 1) % N, c, (c + 1) % N]


def apply_local(state_tensor, op, sites, d):
    """Apply ``op`` (matrix on ``sites`` in that order) to a state tensor."""
    w = len(sites)
    if len(set(sites)) != w:
        raise ValueError(f"repeated site in {sites}")
    t = np.asarray(op).reshape((d,) * (2 * w))
    out = np.tensordot(t, state_tensor, axes=(list(range(w, 2 * w)), list(sites)))
    return np.moveaxis(out, list(range(w)), list(sites))


def direct_expectation(state, k, A):
    psi = state.tensor
    phi = apply_local(psi, A, triple_sites(state.N, k), state.d)
    return complex(np.vdot(psi, phi))


def direct_correlator(state, k, k2, A, B):
    """``<Psi| A_k B_k2 |Psi>`` (operator product when the triples overlap)."""
    psi = state.tensor
    phi = apply_local(psi, B, triple_sites(state.N, k2), state.d)
    phi = apply_local(phi, A, triple_sites(state.N, k), state.d)
    return complex(np.vdot(psi, phi))


def reduced_density(state, sites):
    """Reduced density matrix on ``sites`` (0-based, kept in the given order)."""
    sites = list(sites)
    if any(not 0 <= s < state.N for s in sites) or len(set(sites)) != len(sites):
        raise ValueError(f"invalid site list {sites} for N={state.N}")
    rest = [s for s in range(state.N) if s not in sites]
    t = np.transpose(state.tensor, sites + rest).reshape(state.d ** len(sites), -1)
    return t @ t.conj().T


def triple_density(state, k):
    return reduced_density(state, triple_sites(state.N, k))


def hamiltonian_expectation(state, H3=None, H2=None, H1=None):
    """``<Psi|H|Psi>`` for a periodic chain of 3-, 2- and 1-site terms."""
    psi = state.tensor
    N, d = state.N, state.d
    total = 0j
    for i in range(N):
        for op, sites in ((H3, [(i - 1) % N, i, (i + 1) % N]), (H2, [i, (i + 1) % N]), (H1, [i])):
            if op is not None:
                total += np.vdot(psi, apply_local(psi, op, sites, d))
    return total
