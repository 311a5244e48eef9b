"""Model parameters, lattice windows and the truncated defect Hamiltonian.

The infinite line is represented by a finite symmetric window of nodes
``center - radius .. center + radius`` with hard-wall truncation: couplings
leaving the window are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameterError, WindowError

DEFAULT_BUFFER = 40


@dataclass(frozen=True)
class DefectLineParams:
    """Uniform line (``epsilon``, ``gamma``) with a position defect ``alpha`` and
    a transition defect ``beta`` at node ``j_defect``."""

    epsilon: float
    gamma: float
    alpha: float
    beta: float
    j_defect: int = 0

    def __post_init__(self):
        for name in ("epsilon", "gamma", "alpha", "beta"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError) as exc:
                raise InvalidParameterError(f"{name} must be a real number") from exc
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.gamma == 0.0:
            raise InvalidParameterError("gamma must be nonzero")
        jd = self.j_defect
        if isinstance(jd, float):
            if not (math.isfinite(jd) and jd.is_integer()):
                raise InvalidParameterError(f"j_defect must be an integer, got {jd}")
        object.__setattr__(self, "j_defect", int(jd))

    @property
    def defect_coupling(self) -> float:
        """Hopping rate gamma + beta on the two bonds touching the defect."""
        return self.gamma + self.beta

    def replace(self, **changes) -> "DefectLineParams":
        values = dict(
            epsilon=self.epsilon,
            gamma=self.gamma,
            alpha=self.alpha,
            beta=self.beta,
            j_defect=self.j_defect,
        )
        values.update(changes)
        return DefectLineParams(**values)


def make_params(epsilon, gamma, alpha, beta, j_defect=0) -> DefectLineParams:
    return DefectLineParams(epsilon, gamma, alpha, beta, j_defect)


@dataclass(frozen=True)
class LatticeWindow:
    center: int
    radius: int

    def __post_init__(self):
        if int(self.radius) != self.radius or self.radius < 1:
            raise WindowError(f"radius must be a positive integer, got {self.radius}")
        object.__setattr__(self, "center", int(self.center))
        object.__setattr__(self, "radius", int(self.radius))

    @property
    def size(self) -> int:
        return 2 * self.radius + 1

    @property
    def start(self) -> int:
        return self.center - self.radius

    @property
    def stop(self) -> int:
        """Last node (inclusive)."""
        return self.center + self.radius

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.start, self.stop + 1)

    def __contains__(self, j) -> bool:
        return self.start <= j <= self.stop

    def index(self, j: int) -> int:
        if j not in self:
            raise WindowError(f"node {j} outside window [{self.start}, {self.stop}]")
        return int(j) - self.start


def window_for(params: DefectLineParams, j0: int, t: float,
               buffer: int = DEFAULT_BUFFER) -> LatticeWindow:
    """Smallest window centred on ``j0`` that satisfies the light-cone rule and
    holds the defect with a two-node margin."""
    radius = max(light_cone_radius(params, t, buffer),
                 abs(params.j_defect - j0) + 2, 1)
    return LatticeWindow(j0, radius)


@dataclass(frozen=True, eq=False)
class TridiagonalHamiltonian:
    """Real symmetric tridiagonal matrix; ``offdiag[i]`` couples window offsets
    ``i`` and ``i + 1`` in both directions."""

    window: LatticeWindow
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        n = self.window.size
        if self.diag.shape != (n,) or self.offdiag.shape != (n - 1,):
            raise ValueError("diag/offdiag lengths must be 2r+1 and 2r")

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.offdiag, 1)
                + np.diag(self.offdiag, -1))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out


def build_hamiltonian(params: DefectLineParams, window: LatticeWindow) -> TridiagonalHamiltonian:
    jd = params.j_defect
    if not (window.start + 2 <= jd <= window.stop - 2):
        raise WindowError(
            f"defect node {jd} needs a 2-node margin inside window "
            f"[{window.start}, {window.stop}]"
        )
    n = window.size
    diag = np.full(n, params.epsilon, dtype=float)
    offdiag = np.full(n - 1, -params.gamma, dtype=float)
    d = window.index(jd)
    diag[d] += params.alpha
    offdiag[d - 1] = -params.defect_coupling
    offdiag[d] = -params.defect_coupling
    diag.flags.writeable = False
    offdiag.flags.writeable = False
    return TridiagonalHamiltonian(window, diag, offdiag)


def band_interval(params: DefectLineParams) -> tuple[float, float]:
    half = 2.0 * abs(params.gamma)
    return params.epsilon - half, params.epsilon + half


def light_cone_radius(params: DefectLineParams, t: float, buffer: int = DEFAULT_BUFFER) -> int:
    if t < 0 or buffer < 0:
        raise ValueError("t and buffer must be non-negative")
    speed = 2.0 * (abs(params.gamma) + abs(params.beta))
    return int(math.ceil(speed * t)) + int(buffer)


@dataclass(frozen=True, eq=False)
class NodeState:
    window: LatticeWindow
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.window.size,):
            raise ValueError("amplitude count must match the window size")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def amplitude(self, j: int) -> complex:
        return complex(self.amplitudes[self.window.index(j)])

    def support(self) -> np.ndarray:
        """Nodes carrying a nonzero amplitude."""
        return self.window.nodes[np.nonzero(self.amplitudes)[0]]


def basis_state(j0: int, window: LatticeWindow) -> NodeState:
    amps = np.zeros(window.size, dtype=complex)
    amps[window.index(j0)] = 1.0
    return NodeState(window, amps)
