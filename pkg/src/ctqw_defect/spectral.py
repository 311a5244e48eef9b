"""Closed-form eigensystem of the line with a single-point defect.

Traveling modes are labelled by a wave number ``k`` in ``(0, pi)`` and a parity
about the defect node.  Bound states are found in two steps: the quadratic
bound-energy formula yields candidates, and each candidate is kept only if the
even-parity reflection factor ``f`` vanishes on the decaying branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .exceptions import (
    DegenerateDenominatorError,
    DisconnectedDefectError,
    DomainError,
    PoleError,
)
from .lattice import DefectLineParams, LatticeWindow, band_interval, build_hamiltonian

UNIT_CIRCLE_TOL = 1e-12
BAND_EDGE_TOL = 1e-12
DISCONNECT_TOL = 1e-12
DEGENERATE_TOL = 1e-10
BRANCH_TOL = 1e-8
POLE_TOL = 1e-12
RESIDUAL_TOL = 1e-10

SQRT_4PI = math.sqrt(4.0 * math.pi)


def _check_connected(params: DefectLineParams) -> None:
    if abs(params.defect_coupling) <= DISCONNECT_TOL:
        raise DisconnectedDefectError(
            f"gamma + beta = {params.defect_coupling:g} disconnects the defect node"
        )


# --- dispersion and the y-root ----------------------------------------------

def lambda_of_k(k, params: DefectLineParams):
    """Traveling-wave eigenvalue ``epsilon - 2 gamma cos k``."""
    k_arr = np.asarray(k, dtype=float)
    if np.any((k_arr < 0.0) | (k_arr > math.pi)):
        raise DomainError("wave number must lie in [0, pi]")
    lam = params.epsilon - 2.0 * params.gamma * np.cos(k_arr)
    return float(lam) if lam.ndim == 0 else lam


@dataclass(frozen=True)
class YRoot:
    value: complex
    magnitude_class: Literal["on_circle", "inside", "outside"]

    @property
    def branch(self) -> int:
        """sign(1 - |y|): +1 when y itself decays, -1 when 1/y decays, 0 on the circle."""
        return {"inside": 1, "outside": -1, "on_circle": 0}[self.magnitude_class]


def _sqrt_disc(lam, params):
    # principal branch of sqrt((eps - lam)^2 - 4 gamma^2)
    x = params.epsilon - np.asarray(lam, dtype=float)
    return np.sqrt((x * x - 4.0 * params.gamma ** 2).astype(complex))


def _x_plus_minus(lam, params):
    """(x + S, x - S) with x = eps - lam; the smaller one is rebuilt from
    (x + S)(x - S) = 4 gamma^2 to avoid cancellation far from the band."""
    x = params.epsilon - np.asarray(lam, dtype=float)
    s = _sqrt_disc(lam, params)
    plus, minus = x + s, x - s
    four_g2 = 4.0 * params.gamma ** 2
    small_plus = np.abs(plus) < np.abs(minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        plus = np.where(small_plus, four_g2 / minus, plus)
        minus = np.where(small_plus, minus, four_g2 / plus)
    return x, s, plus, minus


def y_of_lambda(lam: float, params: DefectLineParams) -> YRoot:
    _, _, plus, _ = _x_plus_minus(lam, params)
    y = complex(plus / (2.0 * params.gamma))
    gap = abs(y) - 1.0
    if abs(gap) <= UNIT_CIRCLE_TOL:
        cls = "on_circle"
    elif gap < 0:
        cls = "inside"
    else:
        cls = "outside"
    return YRoot(y, cls)


# --- the even-parity reflection factor --------------------------------------

def _f_parts(lam, params: DefectLineParams):
    """Numerator, denominator and magnitude scale of f(lambda)."""
    g, gb = params.gamma, params.defect_coupling
    x, s, plus, minus = _x_plus_minus(lam, params)
    ax = params.alpha + x
    num = -ax * g * g + gb * gb * plus
    den = ax * g * g - gb * gb * minus
    scale = np.abs(ax) * g * g + gb * gb * (np.abs(x) + np.abs(s))
    return num, den, scale


def f_of_lambda(lam: float, params: DefectLineParams) -> complex:
    """Reflection factor f(lambda) on the principal square-root branch.

    Raises PoleError when the denominator vanishes (``f = inf``), which is the
    bound-state condition on the ``|y| > 1`` side of the band.
    """
    num, den, scale = _f_parts(lam, params)
    if abs(den) <= max(POLE_TOL * scale, 1e-300):
        raise PoleError(f"f(lambda) has a pole at lambda={lam!r}")
    return complex(num / den)


def f_of_k(k, params: DefectLineParams):
    """Unit-modulus reflection factor of the even traveling mode with y = e^{ik}."""
    g, b = params.gamma, params.beta
    k = np.asarray(k, dtype=float)
    a = 2j * (g + b) ** 2 * np.sin(k)
    c = g * params.alpha - 2.0 * b * (2.0 * g + b) * np.cos(k)
    f = np.asarray((a - c) / (a + c))
    return complex(f) if f.ndim == 0 else f


# --- traveling modes ----------------------------------------------------------

@dataclass(frozen=True)
class TravelingMode:
    k: float
    parity: Literal["odd", "even"]
    lambda_k: float
    f_k: complex | None = None


def traveling_mode(k: float, parity: str, params: DefectLineParams) -> TravelingMode:
    if not 0.0 < k < math.pi:
        raise DomainError("traveling modes need 0 < k < pi")
    if parity == "odd":
        return TravelingMode(k, "odd", lambda_of_k(k, params))
    if parity == "even":
        return TravelingMode(k, "even", lambda_of_k(k, params), f_of_k(k, params))
    raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")


def odd_amplitude(k, j, params: DefectLineParams):
    """<j|psi_k^odd> = (i / sqrt(pi)) sin(k (j - j_d)); broadcasts over k and j."""
    m = np.asarray(j) - params.j_defect
    out = np.asarray(1j / math.sqrt(math.pi) * np.sin(np.asarray(k, dtype=float) * m))
    return complex(out) if np.ndim(out) == 0 else out


def even_normalization(k, params: DefectLineParams, literal: bool = False):
    """Normalization constant multiplying ``e^{ik|m|} + f e^{-ik|m|}``.

    The delta-normalized value is ``1/sqrt(4 pi)``.  With ``literal=True`` the
    constant ``1/sqrt(4 pi - |1+f|^2 (1 - (gamma/(gamma+beta))^2))`` is returned
    instead; it coincides with the delta value only when beta = 0 and does not
    resolve the identity otherwise (kept for comparison in tests).
    """
    k = np.asarray(k, dtype=float)
    if not literal:
        return np.full(k.shape, 1.0 / SQRT_4PI) if k.ndim else 1.0 / SQRT_4PI
    f = f_of_k(k, params)
    ratio = params.gamma / params.defect_coupling
    return 1.0 / np.sqrt(4.0 * np.pi - np.abs(1.0 + f) ** 2 * (1.0 - ratio ** 2))


def even_amplitude(k, j, params: DefectLineParams, literal: bool = False):
    """<j|psi_k^even>; broadcasts over k and j.

    Away from the defect the mode is ``c (e^{ik|m|} + f e^{-ik|m|})`` which
    equals ``c (1+f) [cos(k|m|) + i (1-f)/(1+f) sin(k|m|)]``; on the defect node
    the extra ``-beta/(gamma+beta)`` term leaves ``c (1+f) gamma/(gamma+beta)``.
    """
    _check_connected(params)
    k = np.asarray(k, dtype=float)
    m = np.abs(np.asarray(j) - params.j_defect)
    f = f_of_k(k, params)
    c = even_normalization(k, params, literal)
    phase = np.exp(1j * k * m)
    out = c * (phase + f / phase)
    on_defect = c * (1.0 + f) * (params.gamma / params.defect_coupling)
    out = np.asarray(np.where(m == 0, on_defect, out))
    return complex(out) if out.ndim == 0 else out


# --- bound states -----------------------------------------------------------------

@dataclass(frozen=True)
class BoundState:
    """Validated even-parity bound eigenpair.

    ``base`` is the signed per-site decay factor (y or 1/y, whichever has
    modulus below one); ``decay`` is its modulus.
    """

    lambda_b: float
    branch: int
    base: float
    A_b: float
    c_center: float
    c_adjacent: float
    j_defect: int
    residual: float = 0.0

    @property
    def decay(self) -> float:
        return abs(self.base)


def bound_candidates(params: DefectLineParams) -> list[float]:
    """Real roots of the bound-energy quadratic, ascending; empty if complex."""
    g, b, a = params.gamma, params.beta, params.alpha
    gb = params.defect_coupling
    den = (g + 2.0 * b) ** 2 - 2.0 * b * b
    if abs(den) <= DEGENERATE_TOL:
        raise DegenerateDenominatorError(
            f"(gamma+2beta)^2 - 2beta^2 = {den:g}; use fallback_root_find"
        )
    radicand = 4.0 * den + a * a
    if radicand < 0.0:
        return []
    p = b * (2.0 * g + b) * a
    q = gb * gb * math.sqrt(radicand)
    # (p +/- q)/den, with the small root taken from the product of roots,
    # which equals -(a^2 g^2 + 4 gb^4)/den^2, to avoid cancellation.
    big = p + math.copysign(q, p if p != 0.0 else 1.0)
    if big == 0.0:
        return []
    x1 = big / den
    x2 = -(a * a * g * g + 4.0 * gb ** 4) / big
    return sorted([params.epsilon + x1, params.epsilon + x2])


def _branch_functions(params: DefectLineParams):
    def num(lam):
        return float(np.real(_f_parts(lam, params)[0]))

    def den(lam):
        return float(np.real(_f_parts(lam, params)[1]))

    return num, den


def fallback_root_find(params: DefectLineParams, n_scan: int = 4000) -> list[float]:
    """Bracket-and-refine search for bound-energy candidates.

    Zeros of the numerator of f are sought above the band (where |y| < 1) and
    zeros of its denominator below the band (where |y| > 1).
    """
    lo, hi = band_interval(params)
    span = 10.0 * (abs(params.gamma) + abs(params.beta) + abs(params.alpha))
    num, den = _branch_functions(params)
    # quadratic spacing resolves weakly bound states hugging the band edge
    u = np.linspace(0.0, 1.0, n_scan + 1)[1:] ** 2
    found = []
    for func, grid in ((den, lo - span * u[::-1]), (num, hi + span * u)):
        vals = np.array([func(x) for x in grid])
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                found.append(float(grid[i]))
            elif vals[i] * vals[i + 1] < 0.0:
                found.append(brentq(func, grid[i], grid[i + 1], xtol=1e-13, rtol=1e-15))
        if len(vals) and vals[-1] == 0.0:
            found.append(float(grid[-1]))
    return sorted(found)


def _bound_coefficients(params: DefectLineParams, lam: float, base: float):
    g, gb = params.gamma, params.defect_coupling
    center = g / gb
    adjacent = g * (params.alpha + params.epsilon - lam) / (2.0 * gb * gb)
    b2 = base * base
    norm = 2.0 * b2 * b2 / (1.0 - b2) + center ** 2 + 2.0 * adjacent ** 2
    A = 1.0 / math.sqrt(norm)
    return A, A * center, A * adjacent


def bound_amplitude(b: BoundState, j, params: DefectLineParams | None = None):
    """<j|psi^b>; broadcasts over j."""
    jd = b.j_defect if params is None else params.j_defect
    m = np.abs(np.asarray(j) - jd)
    with np.errstate(over="ignore"):
        tail = b.A_b * np.power(b.base, m.astype(float))
    out = np.where(m == 0, b.c_center, np.where(m == 1, b.c_adjacent, tail))
    return float(out) if out.ndim == 0 else out


def _residual_radius(base: float) -> int:
    decay = abs(base)
    if decay == 0.0:
        return 60
    need = math.ceil(math.log(1e-17) / math.log(decay)) + 2
    return int(min(max(60, need), 200_000))


def eigen_residual(params: DefectLineParams, b: BoundState, radius: int | None = None) -> float:
    """||(H - lambda_b) psi_b|| on a truncated window centred on the defect."""
    r = _residual_radius(b.base) if radius is None else radius
    window = LatticeWindow(params.j_defect, r)
    ham = build_hamiltonian(params, window)
    psi = bound_amplitude(b, window.nodes, params)
    return float(np.linalg.norm(ham.matvec(psi) - b.lambda_b * psi))


def validate_bound(params: DefectLineParams, lam: float) -> BoundState | None:
    """Accept ``lam`` as a bound energy iff f^{sign(1-|y|)}(lam) = 0."""
    lo, hi = band_interval(params)
    if lo - BAND_EDGE_TOL <= lam <= hi + BAND_EDGE_TOL:
        raise DomainError(f"lambda={lam} is inside the band [{lo}, {hi}]")
    _check_connected(params)
    y = y_of_lambda(lam, params)
    if y.magnitude_class == "on_circle":
        return None
    try:
        f = f_of_lambda(lam, params)
        pole = False
    except PoleError:
        pole = True
    if y.magnitude_class == "inside":
        ok = not pole and abs(f) <= BRANCH_TOL
        base = y.value.real
    else:
        ok = pole or (f != 0 and abs(1.0 / f) <= BRANCH_TOL)
        base = 1.0 / y.value.real
    if not ok:
        return None
    A, center, adjacent = _bound_coefficients(params, lam, base)
    state = BoundState(float(lam), y.branch, base, A, center, adjacent, params.j_defect)
    res = eigen_residual(params, state)
    scale = max(1.0, abs(params.epsilon) + abs(params.alpha)
                + 2.0 * abs(params.gamma) + 2.0 * abs(params.defect_coupling))
    if res > RESIDUAL_TOL * scale:
        return None
    return BoundState(float(lam), y.branch, base, A, center, adjacent,
                      params.j_defect, res)


def bound_states(params: DefectLineParams) -> list[BoundState]:
    """All validated bound states, ascending in energy (zero, one or two)."""
    _check_connected(params)
    try:
        candidates = bound_candidates(params)
    except DegenerateDenominatorError:
        candidates = fallback_root_find(params)
    lo, hi = band_interval(params)
    out = []
    for lam in candidates:
        if lo - BAND_EDGE_TOL <= lam <= hi + BAND_EDGE_TOL:
            continue
        state = validate_bound(params, lam)
        if state is not None and all(abs(state.lambda_b - s.lambda_b) > 1e-9 for s in out):
            out.append(state)
    return sorted(out, key=lambda s: s.lambda_b)
