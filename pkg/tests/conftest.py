import numpy as np
import pytest
from scipy.linalg import eigh

from ctqw_defect import LatticeWindow, build_hamiltonian, make_params


@pytest.fixture
def fig2a():
    return make_params(2, 1, 3, 0, 0)


def dense_oracle(params, radius=128):
    """Dense eigendecomposition, independent of the tridiagonal solver path."""
    window = LatticeWindow(params.j_defect, radius)
    lam, vecs = eigh(build_hamiltonian(params, window).to_dense())
    return window, lam, vecs


def out_of_band(params, lam):
    lo = params.epsilon - 2 * abs(params.gamma)
    hi = params.epsilon + 2 * abs(params.gamma)
    mask = (lam < lo - 1e-9) | (lam > hi + 1e-9)
    return np.nonzero(mask)[0]
