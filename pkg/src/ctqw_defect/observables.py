"""Probability distributions and derived observables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, NoBoundStateError
from .lattice import DefectLineParams, LatticeWindow, NodeState
from .propagator import QuadratureSpec
from .spectral import (
    BoundState,
    _check_connected,
    bound_amplitude,
    bound_states,
    even_amplitude,
    lambda_of_k,
    odd_amplitude,
)


@dataclass(frozen=True, eq=False)
class ProbabilityDistribution:
    window: LatticeWindow
    p: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.window.nodes

    def at(self, j: int) -> float:
        return float(self.p[self.window.index(j)])

    def total(self) -> float:
        return float(self.p.sum())


def probability_distribution(state: NodeState) -> ProbabilityDistribution:
    p = np.abs(state.amplitudes) ** 2
    p.flags.writeable = False
    return ProbabilityDistribution(state.window, p)


def std_dev(dist: ProbabilityDistribution) -> float:
    """Position spread sqrt(<j^2> - <j>^2)."""
    j = dist.nodes.astype(float)
    mean = float(np.dot(j, dist.p))
    var = float(np.dot(j * j, dist.p)) - mean * mean
    return math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class DefectSiteDecomposition:
    """The amplitude at one node split into odd-mode, even-mode and bound parts."""

    odd_term: complex
    even_term: complex
    bound_term: complex
    total_probability: float

    @property
    def bound_probability(self) -> float:
        return abs(self.bound_term) ** 2


def defect_site_decomposition(params: DefectLineParams, j0: int, j: int, t: float,
                              quad: QuadratureSpec | None = None,
                              bounds: list[BoundState] | None = None) -> DefectSiteDecomposition:
    _check_connected(params)
    quad = quad or QuadratureSpec()
    k, w = quad.nodes_weights()
    phase = w * np.exp(-1j * lambda_of_k(k, params) * t)
    if j == params.j_defect:
        odd = 0j  # odd modes vanish on the defect node
    else:
        odd = complex(np.sum(phase * odd_amplitude(k, j, params)
                             * np.conj(odd_amplitude(k, j0, params))))
    even = complex(np.sum(phase * even_amplitude(k, j, params)
                          * np.conj(even_amplitude(k, j0, params))))
    bounds = bound_states(params) if bounds is None else bounds
    bound = 0j
    for b in bounds:
        bound += (np.exp(-1j * b.lambda_b * t) * bound_amplitude(b, j, params)
                  * bound_amplitude(b, j0, params))
    return DefectSiteDecomposition(odd, even, complex(bound), float(abs(odd + even + bound) ** 2))


def bound_projection_probability(params: DefectLineParams, j: int, j0: int, t: float,
                                 bounds: list[BoundState] | None = None) -> float:
    """|sum_b e^{-i lambda_b t} <j|psi_b><psi_b|j0>|^2, traveling modes neglected."""
    bounds = bound_states(params) if bounds is None else bounds
    if not bounds:
        raise NoBoundStateError("no bound state exists for these parameters")
    amp = sum(np.exp(-1j * b.lambda_b * t) * bound_amplitude(b, j, params)
              * bound_amplitude(b, j0, params) for b in bounds)
    return float(abs(amp) ** 2)


def interference_period(bounds: list[BoundState]) -> float:
    if len(bounds) != 2:
        raise DomainError(f"interference needs exactly two bound states, got {len(bounds)}")
    lo, hi = sorted(b.lambda_b for b in bounds)
    return 2.0 * math.pi / (hi - lo)


def two_bound_closed_form(params: DefectLineParams, t: float, offset: int = 0,
                          bounds: list[BoundState] | None = None) -> float:
    """Two-bound-state interference formula for j_0 = j_d at node j_d + offset,
    offset in {-1, 0, 1}."""
    bounds = bound_states(params) if bounds is None else bounds
    if len(bounds) != 2:
        raise DomainError("closed form needs exactly two bound states")
    if abs(offset) > 1:
        raise DomainError("closed form covers only the defect node and its neighbours")
    minus, plus = sorted(bounds, key=lambda b: b.lambda_b)
    gb = params.defect_coupling
    ratio4 = (params.gamma / gb) ** 4
    if offset == 0:
        r_plus = r_minus = 1.0
    else:
        r_plus = (params.alpha + params.epsilon - plus.lambda_b) / (2.0 * gb)
        r_minus = (params.alpha + params.epsilon - minus.lambda_b) / (2.0 * gb)
    ap2, am2 = plus.A_b ** 2, minus.A_b ** 2
    beat = math.cos((plus.lambda_b - minus.lambda_b) * t)
    return ratio4 * (ap2 ** 2 * r_plus ** 2 + am2 ** 2 * r_minus ** 2
                     + 2.0 * beat * ap2 * am2 * r_plus * r_minus)
