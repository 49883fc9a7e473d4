import numpy as np
import pytest

from qumera.tensor import ContractionError, TensorError, adjoint, as_tensor, contract, kron, matrix_view


def test_as_tensor_is_readonly_complex():
    t = as_tensor([[1, 2], [3, 4]])
    assert t.dtype == np.complex128
    with pytest.raises(ValueError):
        t[0, 0] = 5


def test_as_tensor_rejects_bad_input():
    with pytest.raises(TensorError):
        as_tensor([1.0, np.nan])
    with pytest.raises(TensorError, match="cannot view"):
        as_tensor(np.zeros(6), shape=(2, 2))


def test_contract_matches_einsum(rng):
    a = rng.standard_normal((2, 3, 4))
    b = rng.standard_normal((4, 3, 5))
    out = contract(a, b, [(1, 1), (2, 0)])
    np.testing.assert_allclose(out, np.einsum("ijk,kjl->il", a, b))


def test_contract_names_offending_pair():
    with pytest.raises(ContractionError, match=r"\(0, 1\)"):
        contract(np.zeros((2, 3)), np.zeros((3, 3)), [(0, 1)])
    with pytest.raises(ContractionError, match="more than once"):
        contract(np.zeros((2, 2)), np.zeros((2, 2)), [(0, 0), (0, 1)])


def test_adjoint_and_matrix_view(rng):
    a = rng.standard_normal((2, 3, 4)) + 1j * rng.standard_normal((2, 3, 4))
    m = matrix_view(a, [0], [1, 2])
    madj = matrix_view(adjoint(a, [0], [1, 2]), [0, 1], [2])
    np.testing.assert_allclose(madj, m.conj().T)
    with pytest.raises(TensorError):
        matrix_view(a, [0], [1])


def test_kron_row_major(rng):
    a, b = rng.standard_normal((2, 2)), rng.standard_normal((3, 3))
    k = kron(a, b).reshape(2, 3, 2, 3)
    np.testing.assert_allclose(k, np.einsum("ij,kl->ikjl", a, b))
