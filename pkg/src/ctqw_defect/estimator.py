"""scikit-learn style front end.

``DefectWalk`` holds the model parameters as estimator hyperparameters, so it
supports ``get_params``/``set_params``/``clone`` and grid utilities.  ``fit``
solves for the bound states and fixes the lattice window; ``predict`` maps an
array of times to probability distributions on that window.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DisconnectedDefectError, WindowError
from .lattice import basis_state, make_params, window_for
from .observables import probability_distribution, std_dev
from .propagator import QuadratureSpec, evolve_oracle, evolve_spectral
from .spectral import DISCONNECT_TOL, bound_states

BACKENDS = ("spectral", "oracle")


def select_backend(params, requested: str) -> str:
    """Resolve the backend label; spectral requests on a disconnected defect
    become ``"oracle (forced)"``."""
    if requested not in BACKENDS + ("both",):
        raise ValueError(f"backend must be one of spectral, oracle, both; got {requested!r}")
    if requested != "oracle" and abs(params.defect_coupling) <= DISCONNECT_TOL:
        return "oracle (forced)"
    return requested


def _check_times(X) -> np.ndarray:
    times = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    return times


class DefectWalk(BaseEstimator):
    """Continuous-time quantum walk on a line with a single-point defect.

    Parameters
    ----------
    epsilon, gamma : float
        Uniform on-site energy and hopping rate.
    alpha, beta : float
        Position and transition defect strengths.
    j_defect, j0 : int
        Defect node and initial node of the walker.
    backend : {"spectral", "oracle"}
        Propagator used by ``predict``.
    n_nodes : int
        Gauss-Legendre nodes for the spectral backend.
    buffer : int
        Extra nodes beyond the light cone.
    t_max : float or None
        Largest time to support; if None it is taken from ``X`` in ``fit``.

    Attributes
    ----------
    params_ : DefectLineParams
    bound_states_ : list of BoundState (empty when the defect is disconnected)
    window_ : LatticeWindow
    backend_ : str
    """

    def __init__(self, epsilon=2.0, gamma=1.0, alpha=0.0, beta=0.0, j_defect=0, j0=0,
                 backend="spectral", n_nodes=2048, buffer=40, t_max=None):
        self.epsilon = epsilon
        self.gamma = gamma
        self.alpha = alpha
        self.beta = beta
        self.j_defect = j_defect
        self.j0 = j0
        self.backend = backend
        self.n_nodes = n_nodes
        self.buffer = buffer
        self.t_max = t_max

    def fit(self, X=None, y=None):
        self.params_ = make_params(self.epsilon, self.gamma, self.alpha, self.beta, self.j_defect)
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be 'spectral' or 'oracle', got {self.backend!r}")
        self.backend_ = select_backend(self.params_, self.backend)
        t_max = 0.0 if self.t_max is None else float(self.t_max)
        if X is not None:
            times = _check_times(X)
            if times.size:
                t_max = max(t_max, float(times.max()))
        self.t_max_ = t_max
        self.window_ = window_for(self.params_, self.j0, t_max, self.buffer)
        try:
            self.bound_states_ = bound_states(self.params_)
        except DisconnectedDefectError:
            self.bound_states_ = []
        self.quadrature_ = QuadratureSpec(self.n_nodes)
        return self

    def _evolve(self, t):
        psi0 = basis_state(self.j0, self.window_)
        if self.backend_ == "spectral":
            state, _ = evolve_spectral(psi0, t, self.params_, self.quadrature_,
                                       self.window_, self.bound_states_)
            return state
        return evolve_oracle(psi0, t, self.params_, self.window_)

    def predict(self, X) -> np.ndarray:
        """Probabilities, shape ``(n_times, window_.size)``, ordered by node."""
        check_is_fitted(self, "window_")
        times = _check_times(X)
        if times.size and times.max() > self.t_max_:
            raise WindowError(
                f"t={times.max()} exceeds the fitted t_max={self.t_max_}; refit with larger times"
            )
        return np.vstack([probability_distribution(self._evolve(t)).p for t in times]) \
            if times.size else np.empty((0, self.window_.size))

    def spread(self, X) -> np.ndarray:
        """Standard deviation of the position distribution at each time."""
        check_is_fitted(self, "window_")
        return np.array([std_dev(probability_distribution(self._evolve(t)))
                         for t in _check_times(X)])

    @property
    def nodes_(self) -> np.ndarray:
        check_is_fitted(self, "window_")
        return self.window_.nodes
