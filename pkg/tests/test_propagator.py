import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.special import jv

from ctqw_defect import (
    AccuracyError,
    DisconnectedDefectError,
    LatticeWindow,
    NodeState,
    QuadratureSpec,
    WindowError,
    basis_state,
    build_hamiltonian,
    compare_backends,
    completeness_residual,
    evolve_oracle,
    evolve_spectral,
    make_params,
    window_for,
)
from ctqw_defect.propagator import resolved_identity
from ctqw_defect.spectral import bound_amplitude, bound_states, even_amplitude, odd_amplitude

QUAD = QuadratureSpec(2048)


def _run(params, j0, t, backend="spectral", quad=QUAD):
    w = window_for(params, j0, t)
    psi0 = basis_state(j0, w)
    if backend == "spectral":
        return evolve_spectral(psi0, t, params, quad, w)[0]
    return evolve_oracle(psi0, t, params, w)


def test_quadrature_nodes_inside_open_interval():
    k, w = QuadratureSpec(64).nodes_weights()
    assert np.all((k > 0) & (k < math.pi))
    assert w.sum() == pytest.approx(math.pi)


@pytest.mark.parametrize("alpha,beta", [(0, 0), (3, 0), (0, 2), (-3, -0.9)])
def test_spectral_identity_at_time_zero(alpha, beta):
    p = make_params(2, 1, alpha, beta, 0)
    w = LatticeWindow(0, 40)
    psi0 = basis_state(0, w)
    state, rep = evolve_spectral(psi0, 0.0, p, QUAD, w)
    assert np.max(np.abs(state.amplitudes - psi0.amplitudes)) <= 1e-10
    assert rep.norm_deviation <= 1e-10


def test_spectral_fig2a_peak(fig2a):
    state = _run(fig2a, 0, 30.0)
    assert abs(state.amplitude(0)) ** 2 == pytest.approx(0.692427, abs=1e-4)


def test_spectral_refuses_disconnected_defect():
    p = make_params(2, 1, 0, -1 + 1e-13, 0)
    w = window_for(p, 0, 30.0)
    with pytest.raises(DisconnectedDefectError):
        evolve_spectral(basis_state(0, w), 30.0, p, QUAD, w)


def test_light_cone_precondition(fig2a):
    w = LatticeWindow(0, 60)
    with pytest.raises(WindowError):
        evolve_spectral(basis_state(0, w), 30.0, fig2a, QUAD, w)
    with pytest.raises(WindowError):
        evolve_oracle(basis_state(0, w), 30.0, fig2a, w)


def test_spectral_accuracy_guard(fig2a):
    w = window_for(fig2a, 0, 30.0)
    with pytest.raises(AccuracyError):
        evolve_spectral(basis_state(0, w), 30.0, fig2a, QuadratureSpec(16), w)


@pytest.mark.parametrize("t", [5.0, 17.5, 30.0])
def test_free_walk_matches_bessel(t):
    # P_j(t) = J_{j}(2 gamma t)^2 on the infinite free line
    p = make_params(2, 1, 0, 0, 0)
    for backend in ("spectral", "oracle"):
        state = _run(p, 0, t, backend)
        ref = jv(state.window.nodes, 2 * t) ** 2
        assert np.max(np.abs(np.abs(state.amplitudes) ** 2 - ref)) <= 1e-12


@pytest.mark.parametrize("alpha,beta,jd", [(3, 0, 0), (0, 0.5, 1), (-3, -0.9, 2), (0, -1, 0)])
def test_oracle_matches_dense_expm(alpha, beta, jd):
    p = make_params(2, 1, alpha, beta, jd)
    t = 7.0
    w = window_for(p, 0, t)
    ref = expm(-1j * t * build_hamiltonian(p, w).to_dense())[:, w.index(0)]
    state = evolve_oracle(basis_state(0, w), t, p, w)
    assert np.max(np.abs(state.amplitudes - ref)) <= 1e-11


def test_oracle_free_reflection_symmetry():
    state = _run(make_params(2, 1, 0, 0, 0), 0, 13.0, "oracle")
    P = np.abs(state.amplitudes) ** 2
    assert np.allclose(P, P[::-1], atol=1e-14)


@pytest.mark.parametrize("t", [1.0, 10.0, 30.0])
def test_oracle_disconnected_defect_stays(t):
    state = _run(make_params(2, 1, 0, -1, 0), 0, t, "oracle")
    assert abs(state.amplitude(0)) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_oracle_free_spread():
    state = _run(make_params(2, 1, 0, 0, 0), 0, 30.0, "oracle")
    j = state.window.nodes
    P = np.abs(state.amplitudes) ** 2
    sigma = math.sqrt(np.dot(j * j, P) - np.dot(j, P) ** 2)
    assert sigma == pytest.approx(math.sqrt(2) * 30, rel=1e-3)


def test_compare_backends_examples(fig2a):
    assert compare_backends(fig2a, 0, 30.0, QUAD, LatticeWindow(0, 128)) <= 1e-8
    assert compare_backends(make_params(2, 1, 0, 0.5, 1), 0, 30.0, QUAD) <= 1e-8
    assert compare_backends(fig2a, 0, 0.0, QUAD) <= 1e-12


@pytest.mark.parametrize("alpha", [-3.0, 0.0, 3.0])
@pytest.mark.parametrize("beta", [-0.9, -0.5, 0.0, 0.5, 2.0])
def test_backend_equivalence_grid(alpha, beta):
    p = make_params(2, 1, alpha, beta, 0)
    for t in (5.0, 15.0, 30.0):
        assert compare_backends(p, 0, t, QUAD) <= 1e-8


def test_superposition_initial_state():
    p = make_params(2, 1, 1.5, 0.3, 1)
    t = 12.0
    w = window_for(p, 0, t)
    amps = np.zeros(w.size, dtype=complex)
    amps[w.index(-1)] = 0.6
    amps[w.index(0)] = 0.8j
    psi0 = NodeState(w, amps)
    spec, _ = evolve_spectral(psi0, t, p, QUAD, w)
    orac = evolve_oracle(psi0, t, p, w)
    assert np.max(np.abs(spec.amplitudes - orac.amplitudes)) <= 1e-9


@pytest.mark.parametrize("alpha,beta", [(0, 0), (3, 0), (0, 2), (0, 0.5), (1, -1.3)])
def test_completeness(alpha, beta):
    assert completeness_residual(make_params(2, 1, alpha, beta, 0), QUAD, 40) <= 1e-8


def test_completeness_negative_gamma():
    assert completeness_residual(make_params(0.5, -1.2, 0.8, 0.4, 0), QUAD, 30) <= 1e-8


def test_literal_even_normalization_breaks_completeness():
    p = make_params(2, 1, 0, 0.5, 0)
    nodes = np.arange(-10, 11)
    k, w = QUAD.nodes_weights()
    odd = odd_amplitude(k[:, None], nodes[None, :], p)
    even = even_amplitude(k[:, None], nodes[None, :], p, literal=True)
    ident = (odd.T * w) @ odd.conj() + (even.T * w) @ even.conj()
    for b in bound_states(p):
        v = bound_amplitude(b, nodes, p)
        ident += np.outer(v, v)
    assert np.max(np.abs(ident - np.eye(len(nodes)))) > 1e-2
    assert np.max(np.abs(resolved_identity(p, QUAD, nodes) - np.eye(len(nodes)))) <= 1e-10


@pytest.mark.parametrize("alpha,beta", [(3, 0), (0, 0.5), (0, 2), (-3, -0.9)])
def test_quadrature_doubling_stable(alpha, beta):
    p = make_params(2, 1, alpha, beta, 0)
    lo = _run(p, 0, 30.0, quad=QuadratureSpec(1024))
    hi = _run(p, 0, 30.0, quad=QuadratureSpec(2048))
    assert np.max(np.abs(np.abs(lo.amplitudes) ** 2 - np.abs(hi.amplitudes) ** 2)) <= 1e-9


@pytest.mark.parametrize("backend", ["spectral", "oracle"])
def test_unitarity(backend):
    for p in (make_params(2, 1, 3, 0, 0), make_params(2, 1, 0, 2, 1)):
        state = _run(p, 0, 25.0, backend)
        assert abs(state.norm_squared() - 1) <= 1e-10


def test_spectral_is_bit_reproducible():
    p = make_params(2, 1, 0, 0.5, 1)
    a = _run(p, 0, 30.0)
    b = _run(p, 0, 30.0)
    assert a.amplitudes.tobytes() == b.amplitudes.tobytes()


def test_energy_conserved_by_oracle():
    p = make_params(2, 1, 3, 0.5, 0)
    w = window_for(p, 0, 30.0)
    h = build_hamiltonian(p, w)
    energies = []
    for t in (0.0, 10.0, 20.0, 30.0):
        psi = evolve_oracle(basis_state(0, w), t, p, w).amplitudes
        energies.append(np.vdot(psi, h.matvec(psi)).real)
    assert np.ptp(energies) <= 1e-9


def test_report_bound_weight(fig2a):
    w = window_for(fig2a, 0, 5.0)
    _, rep = evolve_spectral(basis_state(0, w), 5.0, fig2a, QUAD, w)
    (b,) = bound_states(fig2a)
    assert rep.bound_weight == pytest.approx(b.c_center ** 2)
    assert 0 <= rep.bound_weight <= 1 + 1e-10 and rep.runtime >= 0
