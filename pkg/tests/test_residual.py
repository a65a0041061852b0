from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgeo_vqa.ansatz import AnsatzSpec, ParamVector, variant_state
from sgeo_vqa.optim import SgeoConfig, sgeo_run
from sgeo_vqa.qsim import Circuit, Estimator, ry
from sgeo_vqa.residual import (
    AlphaCoeffs,
    direct_residual,
    estimate_alpha,
    estimate_beta,
    estimate_gamma,
    residual_curve,
    residual_derivative,
    residual_full,
    residual_full_lattice,
    residual_surface,
    residual_surface_derivative,
)

from .conftest import unit

EXACT = Estimator("exact")
coeff = st.floats(-1, 1, allow_nan=False)
angles = st.floats(-math.pi, math.pi, allow_nan=False)


def rand_params(rng, spec):
    return ParamVector(rng.uniform(-np.pi, np.pi, spec.n_params))


def test_direct_residual_examples(rng):
    spec = AnsatzSpec(2, 1)
    p = rand_params(rng, spec)
    assert direct_residual(spec.statevector(p.values), spec, p, EXACT) == pytest.approx(0.0, abs=1e-14)
    one = AnsatzSpec(1, 0)
    assert direct_residual(np.array([1.0, 0.0]), one, ParamVector(np.array([math.pi])), EXACT) == pytest.approx(2.0)
    target = Circuit(1, (ry(0, math.pi / 2),))
    assert direct_residual(target, one, ParamVector(np.zeros(1)), EXACT) == pytest.approx(0.5857864376, abs=1e-10)


def test_alpha_examples(rng):
    spec = AnsatzSpec(3, 2)
    p = rand_params(rng, spec)
    target = variant_state(spec, p, {4: 0.0})
    assert estimate_alpha(target, spec, p, 4, EXACT).a0 == pytest.approx(1.0)
    one = AnsatzSpec(1, 0)
    ac = estimate_alpha(Circuit(1, (ry(0, math.pi / 2),)), one, ParamVector(np.zeros(1)), 0, EXACT)
    assert ac.a0 == pytest.approx(0.7071067812, abs=1e-10)
    assert ac.a_pi == pytest.approx(0.7071067812, abs=1e-10)


def test_alpha_shots_within_four_stderr(rng):
    spec = AnsatzSpec(2, 1)
    target = unit(rng, spec.dim)
    p = rand_params(rng, spec)
    ref = estimate_alpha(target, spec, p, 1, EXACT)
    hits = 0
    for seed in range(1000):
        ac = estimate_alpha(target, spec, p, 1, Estimator("shots", 50_000, seed))
        hits += abs(ac.a0 - ref.a0) <= 4 * ac.stderr[0] and abs(ac.a_pi - ref.a_pi) <= 4 * ac.stderr[1]
    assert hits >= 990


def test_curve_examples():
    assert residual_curve(AlphaCoeffs(0, 1.0, 0.0), 0.0) == pytest.approx(0.0)
    h = math.sqrt(2) / 2
    assert residual_curve(AlphaCoeffs(0, h, h), math.pi / 2) == pytest.approx(0.0, abs=1e-15)


def test_curve_matches_direct_on_32_points(rng):
    spec = AnsatzSpec(3, 2)
    target = unit(rng, spec.dim)
    p = rand_params(rng, spec)
    for j in (0, 5, 8):
        ac = estimate_alpha(target, spec, p, j, EXACT)
        for lam in rng.uniform(-np.pi, np.pi, 32):
            assert abs(ac(lam) - direct_residual(target, spec, p.with_value(j, lam), EXACT)) < 1e-10


def test_curve_accepts_arrays():
    ac = AlphaCoeffs(0, 0.3, -0.4)
    lam = np.linspace(-3, 3, 7)
    assert np.allclose(residual_curve(ac, lam), [residual_curve(ac, x) for x in lam])


def test_derivative_vanishes_at_minimizer():
    ac = AlphaCoeffs(0, 0.6, 0.3)
    assert abs(residual_derivative(ac, ac.minimizer(), 1)) < 1e-9


@given(coeff, coeff, st.floats(-3.0, 3.0))
def test_first_derivative_finite_difference(a0, ap, lam):
    ac = AlphaCoeffs(0, a0, ap)
    h = 1e-5
    fd = (ac(lam + h) - ac(lam - h)) / (2 * h)
    an = residual_derivative(ac, lam, 1)
    assert abs(fd - an) <= 1e-6 * max(abs(an), 1e-2)


@given(coeff, coeff, angles)
def test_fourth_derivative_closure(a0, ap, lam):
    # d^4 cos(l/2) = cos(l/2)/16, so C - 16 C'''' is the constant 2
    ac = AlphaCoeffs(0, a0, ap)
    assert abs(ac(lam) - 16 * residual_derivative(ac, lam, 4) - 2) < 1e-10


def test_beta_examples(rng):
    spec = AnsatzSpec(2, 2)
    target = unit(rng, spec.dim)
    p = rand_params(rng, spec)
    bc = estimate_beta(target, spec, p, 1, 4, EXACT)
    for a, b in rng.uniform(-np.pi, np.pi, (16, 2)):
        q = p.with_value(1, a).with_value(4, b)
        assert abs(residual_surface(bc, a, b) - direct_residual(target, spec, q, EXACT)) < 1e-10
    tgt = variant_state(spec, p, {1: 0.0, 4: 0.0})
    assert estimate_beta(tgt, spec, p, 1, 4, EXACT).b[0, 0] == pytest.approx(1.0)


def test_beta_mixed_derivative(rng):
    spec = AnsatzSpec(2, 1)
    bc = estimate_beta(unit(rng, spec.dim), spec, rand_params(rng, spec), 0, 3, EXACT)
    a, b, h = 0.4, -1.1, 1e-4
    fd = (residual_surface(bc, a + h, b + h) - residual_surface(bc, a + h, b - h)
          - residual_surface(bc, a - h, b + h) + residual_surface(bc, a - h, b - h)) / (4 * h * h)
    an = residual_surface_derivative(bc, a, b, 1, 1)
    assert abs(fd - an) <= 1e-5 * max(abs(an), 1e-2)


def test_gamma_reconstruction_and_zero_point(rng):
    spec = AnsatzSpec(2, 0)
    target = unit(rng, spec.dim)
    gc = estimate_gamma(target, spec, rand_params(rng, spec), EXACT)
    for _ in range(20):
        q = rand_params(rng, spec)
        assert abs(residual_full(gc, q.values) - direct_residual(target, spec, q, EXACT)) < 1e-10
    assert residual_full(gc, np.zeros(2)) == pytest.approx(2 * (1 - gc.g[0]))


def test_lattice_minimum_bounded_by_sgeo(rng):
    # target built from lattice angles so the exhaustive lattice contains the optimum
    spec = AnsatzSpec(2, 1)
    axis = np.linspace(-np.pi, np.pi, 33)[:-1]
    inner = axis[np.abs(axis) < np.pi / 2]
    target = spec.statevector(rng.choice(inner, spec.n_params))
    p0 = ParamVector(np.zeros(spec.n_params))
    gc = estimate_gamma(target, spec, p0, EXACT)
    lattice_min = float(residual_full_lattice(gc, axis).min())
    provider = lambda p, j, e: (estimate_alpha(target, spec, p, j, e), 2)
    trace = sgeo_run(provider, p0, SgeoConfig(sweeps=20), Estimator("exact"))
    final = direct_residual(target, spec, trace.params, EXACT)
    assert lattice_min <= final + 1e-8
    assert final <= lattice_min + 1e-6


def test_sgeo_trapped_at_box_edge_is_documented():
    # the residual is 4*pi periodic per angle; the [-pi, pi) box can pin an angle at -pi
    spec = AnsatzSpec(2, 1)
    rng = np.random.default_rng(4)
    axis = np.linspace(-np.pi, np.pi, 33)[:-1]
    target = spec.statevector(rng.choice(axis, spec.n_params))
    p0 = ParamVector(rng.uniform(-np.pi, np.pi, spec.n_params))
    provider = lambda p, j, e: (estimate_alpha(target, spec, p, j, e), 2)
    trace = sgeo_run(provider, p0, SgeoConfig(sweeps=20), Estimator("exact"))
    assert direct_residual(target, spec, trace.params, EXACT) > 0.1
    assert np.any(trace.params.values == -np.pi)


def test_index_out_of_range(rng):
    spec = AnsatzSpec(2, 0)
    with pytest.raises(IndexError):
        estimate_alpha(unit(rng, 4), spec, rand_params(rng, spec), 5, EXACT)
