import numpy as np
import pytest

from conftest import random_hermitian
from qumera import oracle
from qumera.model import embedding_spec, random_spec

Z = np.diag([1.0, -1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])
ZXZ = np.kron(np.kron(Z, X), Z)
ZZZ = np.kron(np.kron(Z, Z), Z)


def test_embedding_builds_all_zero_state():
    st = oracle.build_state(embedding_spec(2), 8)
    expect = np.zeros(256)
    expect[0] = 1
    np.testing.assert_array_equal(st.amplitudes, expect)


@pytest.mark.parametrize("N", [8, 16])
def test_norm(N):
    st = oracle.build_state(random_spec(2, 1), N)
    assert np.linalg.norm(st.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_d3_n8():
    st = oracle.build_state(random_spec(3, 0), 8)
    assert st.amplitudes.size == 3**8
    assert np.linalg.norm(st.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_layer_inverse():
    s = random_spec(2, 2)
    up = oracle.ascend_layer(oracle.build_state(s, 32 // 2), s)
    np.testing.assert_allclose(up.amplitudes, oracle.build_state(s, 8).amplitudes, atol=1e-12)


def test_resource_guard():
    with pytest.raises(oracle.ResourceGuardError, match="2\\*\\*24"):
        oracle.build_state(random_spec(2, 0), 32)
    with pytest.raises(ValueError):
        oracle.build_state(random_spec(2, 0), 12)


def test_sandwich_identities(rng):
    st = oracle.build_state(random_spec(2, 3), 8)
    A = random_hermitian(rng, 8)
    assert oracle.direct_expectation(st, 2, np.eye(8)) == pytest.approx(1.0)
    assert oracle.direct_correlator(st, 2, 6, A, np.eye(8)) == pytest.approx(
        oracle.direct_expectation(st, 2, A), abs=1e-12)
    p = np.zeros((8, 8))
    p[0, 0] = 1
    st0 = oracle.build_state(embedding_spec(2), 8)
    assert oracle.direct_expectation(st0, 5, p) == pytest.approx(1.0)


def test_reduced_density_properties():
    st = oracle.build_state(random_spec(2, 4), 8)
    full = oracle.reduced_density(st, range(8))
    np.testing.assert_allclose(full, np.outer(st.amplitudes, st.amplitudes.conj()), atol=1e-14)
    r3 = oracle.reduced_density(st, [6, 7, 0])
    assert np.trace(r3).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(r3).min() > -1e-12
    r2 = np.einsum("abcdbf->acdf", r3.reshape((2,) * 6)).reshape(4, 4)
    np.testing.assert_allclose(r2, oracle.reduced_density(st, [6, 0]), atol=1e-14)
    with pytest.raises(ValueError):
        oracle.reduced_density(st, [1, 1])
    with pytest.raises(ValueError):
        oracle.triple_sites(8, 0)


def test_frozen_reference_values():
    # recorded once from the state-vector route, seed 11
    s = random_spec(2, 11)
    st8 = oracle.build_state(s, 8)
    st16 = oracle.build_state(s, 16)
    avg = np.mean([oracle.direct_expectation(st8, k, ZXZ) for k in range(1, 9)])
    assert avg.real == pytest.approx(-0.006300344913419064, abs=1e-13)
    assert oracle.direct_expectation(st16, 6, ZXZ).real == pytest.approx(-0.06657352927308367, abs=1e-13)
    assert oracle.direct_correlator(st16, 2, 8, ZZZ, ZXZ).real == pytest.approx(0.022069862592211255, abs=1e-13)


def test_hamiltonian_expectation(rng):
    st = oracle.build_state(random_spec(2, 5), 8)
    H1 = np.eye(2)
    assert oracle.hamiltonian_expectation(st, H1=H1) == pytest.approx(8.0)
