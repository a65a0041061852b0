from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgeo_vqa import burgers
from sgeo_vqa.ansatz import ParamVector
from sgeo_vqa.optim import GridSpec, SgeoConfig, grid_minimize
from sgeo_vqa.qsim import Estimator

EXACT = Estimator("exact")


def random_state(rng, cfg, lam=1.3):
    spec = cfg.ansatz
    p = ParamVector(rng.uniform(-np.pi, np.pi, spec.n_params))
    return burgers.FluidState(0.0, lam, spec.statevector(p.values), p)


def dense_step(prev, cfg):
    n = cfg.n_grid
    shift = np.roll(np.eye(n), 1, axis=1)  # (A psi)_i = psi_{i+1}
    l1 = prev.lam * cfg.dt * cfg.nu / (2 * cfg.dx**2)
    l2 = prev.lam**2 * cfg.dt / (2 * cfg.dx)
    return (prev.lam * np.eye(n) + l1 * (shift + shift.T - 2 * np.eye(n))
            - l2 * np.diag(prev.psi) @ (shift - shift.T))


def test_presets():
    lam = burgers.preset("laminar")
    assert (lam.depth, lam.nu, lam.initial, lam.sgeo.sweeps) == (2, 1.0, "square", 5)
    assert lam.dt == pytest.approx(lam.dx / 10) and lam.n_steps == 40
    tur = burgers.preset("turbulent")
    assert (tur.depth, tur.nu, tur.initial, tur.sgeo.sweeps) == (3, 1e-3, "sine", 10)
    assert burgers.preset("laminar", n_qubits=4).depth == 3
    with pytest.raises(ValueError):
        burgers.preset("stormy")


def test_config_validation():
    with pytest.raises(ValueError):
        burgers.BurgersConfig(domain=(1.0, -1.0))
    with pytest.raises(ValueError):
        burgers.BurgersConfig(initial="step")
    with pytest.raises(ValueError):
        burgers.BurgersConfig(tau=-1.0)


def test_square_initial_condition():
    cfg = burgers.preset("laminar", mode="exact")
    u0 = burgers.initial_field(cfg)
    assert np.array_equal(cfg.grid[u0 == 1.0], [-0.25, 0.0, 0.25])
    state, residual = burgers.initial_state(cfg)
    assert state.lam == pytest.approx(math.sqrt(3))
    assert np.linalg.norm(state.psi) == pytest.approx(1.0)
    assert residual < 1e-6


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sine_initial_condition_sums_to_zero(n):
    cfg = burgers.preset("turbulent", n_qubits=n)
    assert abs(burgers.initial_field(cfg).sum()) < 1e-12


def test_g_terms_uniform_state_convection_cancels():
    cfg = burgers.BurgersConfig(nu=0.0, mode="exact")
    spec = cfg.ansatz
    psi = np.full(cfg.n_grid, 1 / math.sqrt(cfg.n_grid))
    prev = burgers.FluidState(0.0, 1.0, psi, ParamVector(np.zeros(spec.n_params)))
    g = burgers.estimate_g_terms(prev, spec, ParamVector(np.zeros(spec.n_params)), 0, cfg, EXACT)
    assert g.g2 == (0.0, 0.0)
    assert max(abs(x) for x in g.g3) < 1e-15


def test_g_terms_small_tau_reduce_to_overlap(rng):
    cfg = burgers.BurgersConfig(tau=1e-14, t_final=1e-13, mode="exact")
    spec = cfg.ansatz
    prev = random_state(rng, cfg, lam=1.7)
    p = ParamVector(rng.uniform(-np.pi, np.pi, spec.n_params))
    g = burgers.estimate_g_terms(prev, spec, p, 3, cfg, EXACT)
    from sgeo_vqa.residual import estimate_alpha

    ac = estimate_alpha(prev.psi, spec, p, 3, EXACT)
    assert g.g1 == pytest.approx((1.7 * ac.a0, 1.7 * ac.a_pi), abs=1e-11)
    assert max(map(abs, g.g2 + g.g3)) < 1e-11


@given(st.integers(0, 2**31 - 1), st.floats(1e-3, 1.0))
def test_step_curve_matches_dense_operator(seed, nu):
    rng = np.random.default_rng(seed)
    cfg = burgers.BurgersConfig(nu=nu, mode="exact")
    spec = cfg.ansatz
    prev = random_state(rng, cfg, lam=float(rng.uniform(0.5, 2)))
    w = dense_step(prev, cfg) @ prev.psi
    assert np.allclose(w, burgers.step_target(prev, cfg), atol=1e-12)
    p = ParamVector(rng.uniform(-np.pi, np.pi, spec.n_params))
    j = int(rng.integers(spec.n_params))
    g = burgers.estimate_g_terms(prev, spec, p, j, cfg, EXACT)
    for lam in rng.uniform(-np.pi, np.pi, 4):
        ref = -float(w @ spec.statevector(p.with_value(j, lam).values)) ** 2
        assert abs(g(lam) - ref) < 1e-9
        assert abs(burgers.exact_step_cost(prev, spec, p.with_value(j, lam), cfg) - ref) < 1e-12


def test_step_curve_examples():
    zero = burgers.GTerms(0, (0.0, 0.0), (0.0, 0.0), (0.0, 0.0))
    assert np.all(burgers.step_cost_curve(zero, np.linspace(-3, 3, 5)) == 0)
    unit = burgers.GTerms(0, (1.0, 0.0), (0.0, 0.0), (0.0, 0.0))
    lam = np.linspace(-3, 3, 7)
    assert np.allclose(unit(lam), -np.cos(lam / 2) ** 2)
    assert unit.minimizer() == 0.0 and unit(0.0) == -1.0


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_closed_form_matches_grid(s0, sp):
    g = burgers.GTerms(0, (s0, sp), (0.0, 0.0), (0.0, 0.0))
    grid = GridSpec()
    lam_g, c_g = grid_minimize(g, grid)
    assert g(g.minimizer()) <= c_g + 1e-12


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-3, 3), st.integers(1, 3))
def test_step_derivative_finite_difference(s0, sp, lam, order):
    g = burgers.GTerms(0, (s0, sp), (0.0, 0.0), (0.0, 0.0))
    h = 1e-4
    lower = g if order == 1 else (lambda x: burgers.step_cost_derivative(g, x, order - 1))
    fd = (lower(lam + h) - lower(lam - h)) / (2 * h)
    an = burgers.step_cost_derivative(g, lam, order)
    assert abs(fd - an) <= 1e-4 * max(abs(an), 1e-1)


def test_lambda_helpers():
    assert burgers.lambda_from_cost(-4.0) == 2.0
    assert burgers.update_lambda_hyper(-1.5) == (-1.5, True)
    with pytest.raises(ValueError):
        burgers.lambda_from_cost(0.5)


def test_identity_step_keeps_norm(rng):
    cfg = burgers.BurgersConfig(tau=1e-15, t_final=1e-14, mode="exact")
    prev = random_state(rng, cfg, lam=1.4)
    _, bracket = burgers.direct_step_cost(prev, cfg.ansatz, prev.params, cfg, EXACT)
    assert bracket == pytest.approx(1.4, abs=1e-12)


def test_first_laminar_step_norm_matches_euler():
    cfg = burgers.preset("laminar", mode="exact")
    state, _ = burgers.initial_state(cfg)
    res = burgers.sgeo_step(state, cfg, Estimator("exact"), SgeoConfig(sweeps=40))
    u1 = burgers.euler_step(burgers.initial_field(cfg), cfg)
    assert abs(res.state.lam) == pytest.approx(np.linalg.norm(u1), abs=1e-6)
    assert np.allclose(res.state.u, u1, atol=1e-4)


def test_classical_constant_field_is_stationary():
    cfg = burgers.preset("laminar", t_final=0.2)
    u = np.full(cfg.n_grid, 0.7)
    for _ in range(cfg.n_steps):
        u = burgers.euler_step(u, cfg)
    assert np.allclose(u, 0.7, atol=1e-14)


def test_classical_diffusion_decay_and_mass():
    cfg = burgers.preset("turbulent", nu=1.0, t_final=0.1)
    traj = burgers.classical_reference(cfg)
    sup = np.max(np.abs(traj), axis=1)
    assert np.all(np.diff(sup) <= 0)
    u = np.random.default_rng(0).normal(size=cfg.n_grid)
    assert abs(burgers.euler_step(u, cfg, convection=False).sum() - u.sum()) < 1e-10


def test_classical_blowup_raises():
    cfg = burgers.preset("turbulent", nu=1e-3, tau=0.5, t_final=500.0)
    with pytest.raises(FloatingPointError):
        burgers.classical_reference(cfg)


def test_infidelity_sign_invariant(rng):
    u = rng.normal(size=8)
    psi = u / np.linalg.norm(u)
    assert burgers.infidelity(u, psi) == pytest.approx(0.0, abs=1e-15)
    assert burgers.infidelity(u, -psi) == pytest.approx(0.0, abs=1e-15)


def test_sgeo_step_accounting(rng):
    cfg = burgers.preset("laminar", mode="exact", sgeo=SgeoConfig(sweeps=2))
    prev = random_state(rng, cfg)
    res = burgers.sgeo_step(prev, cfg, Estimator("exact"))
    assert res.trace.circuit_evals == 10 * cfg.ansatz.n_params * 2


def test_baseline_step_accounting(rng):
    from sgeo_vqa.optim import BaselineConfig

    cfg = burgers.preset("laminar", mode="exact", baseline=BaselineConfig(max_iterations=30))
    prev = random_state(rng, cfg)
    est = Estimator("exact")
    res = burgers.baseline_step(prev, cfg, est)
    assert res.trace.circuit_evals == 5 * len(res.trace.records)
    # the final direct evaluation for the norm consumes five more circuit indices
    assert est.circuit_counter == res.trace.circuit_evals + 5


def test_sign_of_lambda_tracks_state():
    cfg = burgers.preset("laminar", mode="exact", t_final=0.25)
    traj = burgers.evolve(cfg)
    for st_, u in zip(traj.states, traj.classical):
        assert float(np.dot(st_.u, u)) > 0


def test_evolve_short_shots_run_is_deterministic():
    cfg = burgers.preset("laminar", t_final=0.05, shots=5000)
    a, b = burgers.evolve(cfg), burgers.evolve(cfg)
    assert np.array_equal(a.infidelity, b.infidelity)
    assert np.array_equal(a.lambdas, b.lambdas)
    assert list(a.circuit_evals) == [0, 450, 450]
    c = burgers.evolve(replace(cfg, seed=1))
    assert not np.array_equal(a.lambdas, c.lambdas)


def test_compare_step_returns_both_with_exact_costs():
    cfg = burgers.preset("laminar", t_final=0.05, shots=5000)
    out = burgers.compare_step(cfg, 1)
    assert set(out) == {"sgeo", "baseline"}
    for res in out.values():
        assert all("exact_cost" in r.info for r in res.trace.records)
    with pytest.raises(ValueError):
        burgers.compare_step(cfg, 0)
