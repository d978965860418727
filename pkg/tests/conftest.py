import numpy as np
import pytest
from scipy.linalg import expm

from ngmoe.fock import DensityMatrix, random_density_matrix


def lindblad_propagate(rho, epsilon, t):
    """Brute-force oracle: exponentiate the master-equation generator built
    from truncated ladder operators (row-major vectorisation)."""
    d = rho.shape[0]
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    n = np.diag(np.arange(d, dtype=float))
    eye = np.eye(d)

    def sandwich(left, right):
        # vec(L X R) = (L kron R^T) vec(X)
        return np.kron(left, right.T)

    ad = 2 * sandwich(a, a.conj().T) - sandwich(a.conj().T @ a, eye) - sandwich(eye, a.conj().T @ a)
    pd = 2 * sandwich(n, n) - sandwich(n @ n, eye) - sandwich(eye, n @ n)
    gen = (1 - epsilon) * ad + epsilon * pd
    return (expm(gen * t) @ rho.ravel()).reshape(d, d)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def random_rho(rng):
    def make(K):
        return random_density_matrix(K, rng)
    return make
