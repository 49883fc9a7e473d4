import numpy as np
import pytest

from qumera.model import embedding_spec, random_spec


def random_hermitian(rng, D):
    x = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    return (x + x.conj().T) / 2


def random_density(rng, D):
    x = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def spec():
    return random_spec(2, 0)


@pytest.fixture
def embed():
    return embedding_spec(2)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("ab")), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
