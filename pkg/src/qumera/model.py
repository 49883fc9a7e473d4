"""Homogeneous MERA families and their top-level (hat) data.

Leg conventions, frozen for the whole package:

* ``chi[u1, u2, l1, l2]``: disentangler. Upper legs face the hat, lower legs
  face the physical sites. As a matrix (rows ``u``, cols ``l``) it is unitary.
* ``lam[u, l1, l2]``: isometry from one upper qudit to two lower ones.
  ``V[(l1, l2), u] = lam[u, l1, l2]`` satisfies ``V^dag V = I``.
* ``hat[l1, l2, l3, l4]``: the four-leg top tensor, read as a state vector.

A physical amplitude is the plain contraction of these tensors (no
conjugation anywhere on the ket side).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .tensor import TensorError, as_tensor, matrix_view

DEFAULT_TOL = 1e-10


class StructuralError(TensorError):
    """Tensor shapes do not describe a homogeneous MERA."""


class InvalidSpecError(ValueError):
    """The spec fails the isometric constraints at the requested tolerance."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"spec fails validation: {report.residuals}")


@dataclass(frozen=True, eq=False)
class MeraSpec:
    d: int
    chi: np.ndarray
    lam: np.ndarray
    hat: np.ndarray

    def __post_init__(self):
        d = int(self.d)
        if d < 2:
            raise StructuralError(f"local dimension must be >= 2, got {d}")
        shapes = {"chi": (d,) * 4, "lam": (d,) * 3, "hat": (d,) * 4}
        for name, shape in shapes.items():
            arr = np.asarray(getattr(self, name))
            if arr.shape != shape:
                raise StructuralError(f"{name} has shape {arr.shape}, expected {shape}")
            try:
                object.__setattr__(self, name, as_tensor(arr))
            except TensorError as exc:
                raise StructuralError(f"{name}: {exc}") from None
        object.__setattr__(self, "d", d)

    @property
    def chi_matrix(self):
        return matrix_view(self.chi, [0, 1], [2, 3])

    @property
    def isometry(self):
        """``V`` with ``V[(l1, l2), u] = lam[u, l1, l2]``."""
        return matrix_view(self.lam, [1, 2], [0])

    @property
    def hat_state(self):
        return self.hat.reshape(-1)

    @cached_property
    def report(self):
        return validate(self)

    def replace(self, **kw):
        fields = dict(d=self.d, chi=self.chi, lam=self.lam, hat=self.hat)
        fields.update(kw)
        return MeraSpec(**fields)


@dataclass(frozen=True)
class ValidationReport:
    residuals: dict
    tol: float

    @property
    def passed(self):
        return all(r <= self.tol for r in self.residuals.values())


def validate(spec, tol=DEFAULT_TOL):
    """Residual norms (Frobenius) of the disentangler/isometry/hat constraints."""
    U = spec.chi_matrix
    V = spec.isometry
    eye2 = np.eye(spec.d**2)
    residuals = {
        "chi_dag_chi": float(np.linalg.norm(U.conj().T @ U - eye2)),
        "chi_chi_dag": float(np.linalg.norm(U @ U.conj().T - eye2)),
        "lam_dag_lam": float(np.linalg.norm(V.conj().T @ V - np.eye(spec.d))),
        "hat_norm": float(abs(np.linalg.norm(spec.hat_state) - 1.0)),
    }
    return ValidationReport(residuals=residuals, tol=float(tol))


def require_valid(spec, tol=DEFAULT_TOL):
    report = spec.report if tol == DEFAULT_TOL else validate(spec, tol)
    if not report.passed:
        raise InvalidSpecError(report)
    return spec


@dataclass(frozen=True)
class HatDensities:
    rho_j: tuple
    rho_avg: np.ndarray


def hat_triple_legs(j):
    """Hat legs (0-based) left after tracing leg ``j`` (1-based), cyclically after ``j``."""
    return tuple((j + s) % 4 for s in range(3))


def hat_densities(spec):
    """Three-qudit reduced states of the hat, one per traced leg.

    The kept legs are ordered cyclically starting after the traced one, so
    ``rho_j[1]`` (j=2) lives on hat legs (3, 4, 1). This is the ordering seen
    by a causal cone that reaches the hat across the periodic seam.
    """
    require_valid(spec)
    psi = spec.hat
    rhos = []
    for j in range(1, 5):
        kept = hat_triple_legs(j)
        t = np.transpose(psi, (j - 1,) + kept).reshape(spec.d, -1)
        rhos.append(t.T @ t.conj())
    rho_avg = (rhos[0] + rhos[1] + rhos[2] + rhos[3]) / 4
    return HatDensities(rho_j=tuple(rhos), rho_avg=rho_avg)


def haar_unitary(dim, rng):
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_spec(d, seed):
    """Haar-like disentangler and isometry with a Gaussian hat, deterministic in ``seed``."""
    if d < 2:
        raise StructuralError(f"local dimension must be >= 2, got {d}")
    rng = np.random.default_rng(seed)
    chi = haar_unitary(d * d, rng).reshape(d, d, d, d)
    V = haar_unitary(d * d, rng)[:, :d]
    lam = V.T.reshape(d, d, d)
    hat = rng.standard_normal(d**4) + 1j * rng.standard_normal(d**4)
    hat = (hat / np.linalg.norm(hat)).reshape(d, d, d, d)
    return MeraSpec(d=d, chi=chi, lam=lam, hat=hat)


def random_hat(d, seed):
    rng = np.random.default_rng(seed)
    hat = rng.standard_normal(d**4) + 1j * rng.standard_normal(d**4)
    return (hat / np.linalg.norm(hat)).reshape(d, d, d, d)


def embedding_spec(d=2, hat=None):
    """Trivial family: identity disentangler, ``|u> -> |u>|0>`` isometry, ``|0000>`` hat."""
    chi = np.eye(d * d).reshape(d, d, d, d)
    lam = np.zeros((d, d, d))
    for u in range(d):
        lam[u, u, 0] = 1.0
    if hat is None:
        hat = np.zeros((d,) * 4)
        hat[0, 0, 0, 0] = 1.0
    return MeraSpec(d=d, chi=chi, lam=lam, hat=hat)


def reflection_symmetric_spec(d, seed):
    """Random spec that is invariant under mirroring the chain.

    ``chi`` commutes with the swap of its two legs and ``lam`` outputs only
    symmetric two-qudit states, so the one-layer tensor is reflection invariant.
    """
    rng = np.random.default_rng(seed)
    swap = np.eye(d * d).reshape(d, d, d, d).transpose(1, 0, 2, 3).reshape(d * d, d * d)
    h = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
    h = h + h.conj().T
    h = (h + swap @ h @ swap) / 2
    w, v = np.linalg.eigh(h)
    chi = (v * np.exp(1j * w)) @ v.conj().T
    sym = np.linalg.eigh(swap)[1][:, np.linalg.eigvalsh(swap) > 0]  # symmetric subspace
    coeffs = haar_unitary(sym.shape[1], rng)[:, :d]
    V = sym @ coeffs
    hat = random_hat(d, seed + 1)
    return MeraSpec(d=d, chi=chi.reshape(d, d, d, d), lam=V.T.reshape(d, d, d), hat=hat)
