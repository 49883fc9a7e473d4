"""Dense complex tensors with ordered legs.

Tensors are plain ``numpy`` arrays of dtype ``complex128`` stored row-major
(last leg fastest). :func:`as_tensor` is the single entry point that
normalizes dtype, checks finiteness and freezes the buffer.
"""

import numpy as np


class TensorError(ValueError):
    """Malformed tensor or inconsistent leg bookkeeping."""


class ContractionError(TensorError):
    pass


def as_tensor(data, shape=None):
    """Return a read-only complex128 copy of ``data``, optionally reshaped."""
    t = np.array(data, dtype=np.complex128, order="C")
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s < 1 for s in shape):
            raise TensorError(f"leg dimensions must be >= 1, got {shape}")
        if int(np.prod(shape)) != t.size:
            raise TensorError(f"cannot view {t.size} entries as shape {shape}")
        t = t.reshape(shape)
    if not np.all(np.isfinite(t)):
        raise TensorError("tensor has non-finite entries")
    t.flags.writeable = False
    return t


def contract(a, b, pairs):
    """Sum over paired legs of ``a`` and ``b``.

    ``pairs`` is a list of ``(leg_of_a, leg_of_b)``. The result carries the
    unpaired legs of ``a`` followed by the unpaired legs of ``b``, each in
    their original order.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    pairs = [(int(i), int(j)) for i, j in pairs]
    legs_a = [i for i, _ in pairs]
    legs_b = [j for _, j in pairs]
    if len(set(legs_a)) != len(legs_a) or len(set(legs_b)) != len(legs_b):
        raise ContractionError(f"a leg is paired more than once in {pairs}")
    for i, j in pairs:
        if not (0 <= i < a.ndim and 0 <= j < b.ndim):
            raise ContractionError(f"leg pair {(i, j)} out of range for ranks {a.ndim}, {b.ndim}")
        if a.shape[i] != b.shape[j]:
            raise ContractionError(
                f"leg pair {(i, j)} has mismatched dimensions {a.shape[i]} != {b.shape[j]}"
            )
    return np.tensordot(a, b, axes=(legs_a, legs_b))


def adjoint(a, upper, lower):
    """Swap the upper and lower leg groups and conjugate.

    For ``a`` with legs ``upper + lower`` (in the given order) the result has
    legs ``lower + upper`` with entries ``conj(a[upper_idx, lower_idx])``.
    """
    a = np.asarray(a)
    upper = [int(x) for x in upper]
    lower = [int(x) for x in lower]
    if sorted(upper + lower) != list(range(a.ndim)):
        raise TensorError(f"legs {upper} + {lower} do not partition the {a.ndim} legs")
    return np.conj(np.transpose(a, lower + upper))


def matrix_view(a, row_legs, col_legs):
    """Reshape ``a`` into a matrix with the given row and column leg groups."""
    a = np.asarray(a)
    row_legs = [int(x) for x in row_legs]
    col_legs = [int(x) for x in col_legs]
    if sorted(row_legs + col_legs) != list(range(a.ndim)):
        raise TensorError(f"legs {row_legs} + {col_legs} do not partition the {a.ndim} legs")
    rows = int(np.prod([a.shape[i] for i in row_legs]))
    cols = int(np.prod([a.shape[i] for i in col_legs]))
    return np.transpose(a, row_legs + col_legs).reshape(rows, cols)


def kron(a, b):
    """Kronecker product of two matrix views (row-major leg order)."""
    return np.kron(np.asarray(a), np.asarray(b))
