"""Acceptance checks reproducing the reported results and structural invariants.

Each check returns a list of :class:`Criterion` records carrying the measured
value, its target and the tolerance.  ``run_validation`` collects them all.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .exceptions import DisconnectedDefectError
from .lattice import (
    DefectLineParams,
    LatticeWindow,
    band_interval,
    basis_state,
    make_params,
    window_for,
)
from .observables import (
    bound_projection_probability,
    defect_site_decomposition,
    interference_period,
    probability_distribution,
    std_dev,
    two_bound_closed_form,
)
from .propagator import (
    QuadratureSpec,
    compare_backends,
    completeness_residual,
    evolve_oracle,
    evolve_spectral,
    oracle_eigensystem,
    orthonormality_residuals,
)
from .spectral import bound_candidates, bound_states

EPS, GAMMA = 2.0, 1.0
QUAD = QuadratureSpec(2048)


@dataclass
class Criterion:
    id: str
    name: str
    measured: float
    target: float
    tolerance: float
    passed: bool
    kind: str = "abs"  # abs: |measured - target| <= tol; max: measured <= tol

    def __post_init__(self):
        self.passed = bool(self.passed)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"[{flag}] {self.id} {self.name}: measured={self.measured:.10g} "
                f"target={self.target:.10g} tol={self.tolerance:.3g}")


def _near(cid, name, measured, target, tol) -> Criterion:
    ok = bool(np.isfinite(measured)) and abs(measured - target) <= tol
    return Criterion(cid, name, float(measured), float(target), float(tol), ok, "abs")


def _below(cid, name, measured, tol) -> Criterion:
    ok = bool(np.isfinite(measured)) and measured <= tol
    return Criterion(cid, name, float(measured), 0.0, float(tol), ok, "max")


def _flag(cid, name, ok) -> Criterion:
    return Criterion(cid, name, 1.0 if ok else 0.0, 1.0, 0.0, bool(ok), "abs")


def _params(alpha=0.0, beta=0.0, jd=0) -> DefectLineParams:
    return make_params(EPS, GAMMA, alpha, beta, jd)


def _oracle_distribution(params, j0, t):
    window = window_for(params, j0, t)
    return probability_distribution(evolve_oracle(basis_state(j0, window), t, params, window))


def _spectral_distribution(params, j0, t):
    window = window_for(params, j0, t)
    state, _ = evolve_spectral(basis_state(j0, window), t, params, QUAD, window)
    return probability_distribution(state)


def oracle_out_of_band(params: DefectLineParams, radius: int = 128) -> np.ndarray:
    lam, _ = oracle_eigensystem(params, LatticeWindow(params.j_defect, radius))
    lo, hi = band_interval(params)
    return np.sort(lam[(lam < lo - 1e-9) | (lam > hi + 1e-9)])


# --- individual criteria -------------------------------------------------------

def check_fig2_peaks(s: float = 1.0) -> list[Criterion]:
    out = []
    for cid, jd, full, bound in (("AC1", 0, 0.692427, 0.692308),
                                 ("AC2", 1, 0.0637546, 0.063466)):
        p = _params(alpha=3.0, jd=jd)
        dist = _spectral_distribution(p, 0, 30.0)
        dec = defect_site_decomposition(p, 0, jd, 30.0, QUAD)
        out.append(_near(cid, f"P_jd full evolution (alpha=3, jd={jd}, t=30)",
                         dist.at(jd), full, 1e-4 * s))
        out.append(_near(cid, f"P_jd bound-only (alpha=3, jd={jd})",
                         dec.bound_probability, bound, 1e-5 * s))
    return out


def check_fig8b_projections(s: float = 1.0) -> list[Criterion]:
    p = _params(beta=0.5, jd=1)
    return [
        _near("AC3", "bound projection at j=1", bound_projection_probability(p, 1, 0, 30.0),
              0.003, 5e-4 * s),
        _near("AC3", "bound projection at j=0", bound_projection_probability(p, 0, 0, 30.0),
              0.209, 1e-3 * s),
        _near("AC3", "bound projection at j=2", bound_projection_probability(p, 2, 0, 30.0),
              0.209, 1e-3 * s),
    ]


def _count_check(p: DefectLineParams, expected: int, s: float) -> list[Criterion]:
    label = f"alpha={p.alpha:g}, beta={p.beta:g}"
    oracle = oracle_out_of_band(p)
    out = []
    try:
        states = bound_states(p)
    except DisconnectedDefectError:
        states = None
    if states is None:
        # spectral path unavailable; only the oracle count is meaningful
        out.append(_near("AC4", f"bound count (oracle) {label}", len(oracle), expected, 0))
        return out
    out.append(_near("AC4", f"bound count {label}", len(states), expected, 0))
    if len(oracle) == len(states):
        diff = max((abs(a - b.lambda_b) for a, b in zip(oracle, states)), default=0.0)
        out.append(_below("AC4", f"bound energies vs radius-128 oracle {label}", diff, 1e-8 * s))
    else:
        out.append(_flag("AC4", f"oracle out-of-band count matches {label}", False))
    return out


def check_bound_counts(s: float = 1.0) -> list[Criterion]:
    out = []
    for beta in (-2.0, -1.8, -1.5, -1.0, -0.5, -0.25, 0.0):
        out += _count_check(_params(beta=beta), 0, s)
    for beta in (0.25, 0.5, 2.0, -2.5):
        out += _count_check(_params(beta=beta), 2, s)
    for alpha in (0.5, -0.5, 3.0, -3.0):
        out += _count_check(_params(alpha=alpha), 1, s)
    return out


def check_candidate_rejection(s: float = 1.0) -> list[Criterion]:
    p = _params(beta=-1.8)
    cands = bound_candidates(p)
    lo, hi = band_interval(p)
    n_out = sum(1 for c in cands if c < lo or c > hi)
    return [
        _near("AC5", "real out-of-band candidates (beta=-1.8)", n_out, 2, 0),
        _near("AC5", "validated bound states (beta=-1.8)", len(bound_states(p)), 0, 0),
        _near("AC5", "oracle out-of-band eigenvalues (beta=-1.8)", len(oracle_out_of_band(p)), 0, 0),
    ]


def check_backend_equivalence(s: float = 1.0) -> list[Criterion]:
    worst = 0.0
    for alpha in (-3.0, 0.0, 3.0):
        for beta in (-0.9, -0.5, 0.0, 0.5, 2.0):
            p = _params(alpha, beta)
            if abs(p.defect_coupling) <= 1e-12:
                continue
            for t in (5.0, 15.0, 30.0):
                worst = max(worst, compare_backends(p, 0, t, QUAD))
    return [_below("AC6", "max |P_spectral - P_oracle| over 45-point grid", worst, 1e-8 * s)]


def check_disconnection(s: float = 1.0) -> list[Criterion]:
    p = _params(beta=-1.0)
    worst = max(abs(_oracle_distribution(p, 0, t).at(0) - 1.0) for t in (1.0, 10.0, 30.0))
    return [_below("AC7", "|P_jd - 1| at beta=-1, t in {1,10,30}", worst, 1e-12 * s)]


def check_alpha_symmetry(s: float = 1.0) -> list[Criterion]:
    worst = 0.0
    for alpha in (1.0, 3.0, 5.0):
        for jd in (0, 2):
            a = _oracle_distribution(_params(alpha, 0.0, jd), 0, 30.0)
            b = _oracle_distribution(_params(-alpha, 0.0, jd), 0, 30.0)
            worst = max(worst, float(np.max(np.abs(a.p - b.p))))
    return [_below("AC8", "max |P(+alpha) - P(-alpha)|", worst, 1e-9 * s)]


def check_free_spreading(s: float = 1.0) -> list[Criterion]:
    ts = np.array([10.0, 20.0, 30.0])
    sig = [std_dev(_oracle_distribution(_params(), 0, t)) for t in ts]
    slope = np.polyfit(ts, sig, 1)[0]
    target = math.sqrt(2.0) * GAMMA
    return [_near("AC9", "free-line sigma(t) slope", slope, target, 1e-3 * target * s)]


def spreading_widths(t: float = 30.0) -> dict[str, float]:
    out = {"free": std_dev(_oracle_distribution(_params(), 0, t))}
    for jd in (0, 1, 2, 5):
        out[f"alpha3_jd{jd}"] = std_dev(_oracle_distribution(_params(3.0, 0.0, jd), 0, t))
    out["beta-0.5"] = std_dev(_oracle_distribution(_params(beta=-0.5), 0, t))
    return out


def check_spreading_order(s: float = 1.0) -> list[Criterion]:
    w = spreading_widths()
    chain = [w["free"], w["alpha3_jd1"], w["alpha3_jd5"], w["alpha3_jd2"], w["alpha3_jd0"]]
    ordered = all(a > b for a, b in zip(chain, chain[1:]))
    return [
        _flag("AC10", "sigma(free) > sigma(|d|=1) > sigma(|d|=5) > sigma(|d|=2) > sigma(d=0)",
              ordered),
        _flag("AC10", "sigma(beta=-0.5) > sigma(free)", w["beta-0.5"] > w["free"]),
    ]


STRUCTURE_CONFIGS = ((0.0, 0.0), (3.0, 0.0), (0.0, 0.5), (0.0, 2.0), (-3.0, -0.9))


def check_structure(s: float = 1.0) -> list[Criterion]:
    norm = 0.0
    for alpha, beta in STRUCTURE_CONFIGS:
        p = _params(alpha, beta)
        for t in (5.0, 30.0):
            window = window_for(p, 0, t)
            psi0 = basis_state(0, window)
            _, rep = evolve_spectral(psi0, t, p, QUAD, window)
            orac = evolve_oracle(psi0, t, p, window)
            norm = max(norm, rep.norm_deviation, abs(orac.norm_squared() - 1.0))
    complete = max(completeness_residual(_params(a, b), QUAD, 40) for a, b in STRUCTURE_CONFIGS)
    ortho = {"odd_bound": 0.0, "even_bound": 0.0, "bound_bound": 0.0}
    for a, b in STRUCTURE_CONFIGS:
        for key, val in orthonormality_residuals(_params(a, b), QUAD, 60).items():
            ortho[key] = max(ortho[key], val)
    doubling = 0.0
    for a, b in STRUCTURE_CONFIGS:
        p = _params(a, b)
        window = window_for(p, 0, 30.0)
        psi0 = basis_state(0, window)
        lo, _ = evolve_spectral(psi0, 30.0, p, QuadratureSpec(1024), window)
        hi, _ = evolve_spectral(psi0, 30.0, p, QuadratureSpec(2048), window)
        doubling = max(doubling, float(np.max(np.abs(
            np.abs(lo.amplitudes) ** 2 - np.abs(hi.amplitudes) ** 2))))
    return [
        _below("AC11", "norm conservation |sum P - 1|", norm, 1e-10 * s),
        _below("AC11", "completeness residual (2048 nodes, radius 40)", complete, 1e-8 * s),
        _below("AC11", "orthonormality |<odd|bound>|", ortho["odd_bound"], 1e-10 * s),
        _below("AC11", "orthonormality |<even|bound>|", ortho["even_bound"], 1e-8 * s),
        _below("AC11", "orthonormality |<b|b'> - delta|", ortho["bound_bound"], 1e-8 * s),
        _below("AC11", "quadrature doubling 1024 -> 2048", doubling, 1e-9 * s),
    ]


def measured_interference_period(params: DefectLineParams, t_start: float = 30.0,
                                 n_periods: int = 6, samples_per_period: int = 400) -> float:
    """Mean spacing of the maxima of P_jd(t) from the oracle, refined parabolically."""
    T = interference_period(bound_states(params))
    t_end = t_start + n_periods * T
    window = window_for(params, params.j_defect, t_end)
    lam, vecs = oracle_eigensystem(params, window)
    row = vecs[window.index(params.j_defect)]
    ts = np.linspace(t_start, t_end, n_periods * samples_per_period + 1)
    P = np.abs((row * row * np.exp(-1j * np.outer(ts, lam))).sum(axis=1)) ** 2
    peaks = np.where((P[1:-1] > P[:-2]) & (P[1:-1] > P[2:]))[0] + 1
    dt = ts[1] - ts[0]
    refined = [ts[i] + 0.5 * dt * (P[i - 1] - P[i + 1]) / (P[i - 1] - 2 * P[i] + P[i + 1])
               for i in peaks]
    return float(np.mean(np.diff(refined)))


def check_two_bound_interference(s: float = 1.0) -> list[Criterion]:
    p = _params(beta=0.5)
    T = interference_period(bound_states(p))
    measured = measured_interference_period(p)
    full = _spectral_distribution(p, 0, 30.0).at(0)
    closed = two_bound_closed_form(p, 30.0)
    return [
        _near("AC12", "P_jd(t) oscillation period", measured, T, 0.01 * T * s),
        _below("AC12", "closed form vs full simulation at t=30 (relative)",
               abs(closed - full) / full, 0.05 * s),
    ]


CHECKS: list[Callable[[float], list[Criterion]]] = [
    check_fig2_peaks,
    check_fig8b_projections,
    check_bound_counts,
    check_candidate_rejection,
    check_backend_equivalence,
    check_disconnection,
    check_alpha_symmetry,
    check_free_spreading,
    check_spreading_order,
    check_structure,
    check_two_bound_interference,
]


def run_validation(tolerance_scale: float = 1.0) -> dict:
    """Run every acceptance check; ``tolerance_scale`` multiplies each tolerance."""
    criteria = [c for check in CHECKS for c in check(tolerance_scale)]
    return {
        "passed": all(c.passed for c in criteria),
        "n_criteria": len(criteria),
        "n_failed": sum(not c.passed for c in criteria),
        "tolerance_scale": tolerance_scale,
        "criteria": [asdict(c) for c in criteria],
    }
