from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sgeo_vqa.ansatz import (
    AnsatzSpec,
    ParamVector,
    bind,
    decompose_two_qubit,
    fix_params,
    lcu_full,
    lcu_pair,
    lcu_single,
    lcu_tied,
    swap_family_unitary,
    variant_state,
    wrap_angle,
)
from sgeo_vqa.qsim import pauli_matrix

angles = st.floats(-math.pi, math.pi, allow_nan=False)
seeds = st.integers(0, 2**31 - 1)


def rand_params(rng, spec, ties=()):
    v = rng.uniform(-np.pi, np.pi, spec.n_params)
    for g in ties:
        v[list(g)] = v[g[0]]
    return ParamVector(v, ties)


@pytest.mark.parametrize("n,d,m", [(3, 2, 9), (4, 3, 16), (2, 0, 2)])
def test_parameter_count(n, d, m):
    assert AnsatzSpec(n, d).n_params == m


def test_depth_zero_has_no_cnots():
    kinds = {g.kind for g in AnsatzSpec(2, 0).circuit([0.1, 0.2]).gates}
    assert kinds == {"RY"}


@pytest.mark.parametrize("n,d", [(1, 0), (2, 1), (3, 2)])
def test_all_zero_parameters_give_ground_state(n, d):
    psi = AnsatzSpec(n, d).statevector(np.zeros(n * (d + 1)))
    assert psi[0] == pytest.approx(1.0) and np.allclose(psi[1:], 0)


def test_single_rotation_state():
    psi = AnsatzSpec(1, 0).statevector([math.pi / 2])
    assert np.allclose(psi, [math.cos(math.pi / 4), math.sin(math.pi / 4)])


def test_fast_statevector_matches_circuit_and_is_real(rng):
    spec = AnsatzSpec(3, 2)
    p = rand_params(rng, spec)
    amps = bind(spec, p).statevector().amps
    assert np.max(np.abs(amps.imag)) < 1e-12
    assert np.allclose(amps.real, spec.statevector(p.values), atol=1e-13)


def test_fix_params(rng):
    spec = AnsatzSpec(3, 1)
    p = rand_params(rng, spec)
    assert np.allclose(fix_params(spec, p, {}).unitary(), bind(spec, p).unitary())
    assert np.allclose(variant_state(spec, p, {2: 0.0}), spec.statevector(p.with_value(2, 0.0).values))
    one = variant_state(AnsatzSpec(1, 0), [0.3], {0: math.pi})
    assert np.allclose(one, [0, 1])


def test_lcu_single_qubit_algebra():
    for lam in (-2.0, 0.4, 3.0):
        exp = lcu_single(AnsatzSpec(1, 0), [lam], 0)
        ry = np.array([[math.cos(lam / 2), -math.sin(lam / 2)], [math.sin(lam / 2), math.cos(lam / 2)]])
        assert np.max(np.abs(exp.matrix() - ry)) < 1e-12


def test_lcu_coefficients_at_zero():
    spec = AnsatzSpec(2, 1)
    p = ParamVector(np.zeros(4))
    assert np.allclose(lcu_single(spec, p, 1).coefficients(), [1, 0])
    assert np.allclose(lcu_pair(spec, p, 0, 2).coefficients(), [1, 0, 0, 0])
    full = lcu_full(spec, p).coefficients()
    assert full[0] == 1 and np.all(full[1:] == 0)


def test_lcu_tied_half_pi_coefficients():
    spec = AnsatzSpec(2, 1)
    p = ParamVector(np.array([math.pi / 2, 0.3, math.pi / 2, -0.1]), ((0, 2),))
    assert np.allclose(lcu_tied(spec, p, (0, 2)).coefficients(), [0.5, 0.5, 0.5])


@given(seeds)
def test_lcu_single_reconstruction(seed):
    rng = np.random.default_rng(seed)
    spec = AnsatzSpec(3, 2)
    p = rand_params(rng, spec)
    u = spec.unitary(p.values)
    for j in range(spec.n_params):
        assert np.max(np.abs(lcu_single(spec, p, j).matrix() - u)) < 1e-12


def test_lcu_pair_all_pairs(rng):
    spec = AnsatzSpec(3, 1)
    p = rand_params(rng, spec)
    u = spec.unitary(p.values)
    for j in range(spec.n_params):
        for k in range(j + 1, spec.n_params):
            assert np.max(np.abs(lcu_pair(spec, p, j, k).matrix() - u)) < 1e-12


@given(seeds)
def test_lcu_tied_reconstruction(seed):
    rng = np.random.default_rng(seed)
    spec = AnsatzSpec(2, 2)
    j, k = (int(x) for x in rng.choice(spec.n_params, 2, replace=False))
    p = rand_params(rng, spec, ((j, k),))
    assert np.max(np.abs(lcu_tied(spec, p, (j, k)).matrix() - spec.unitary(p.values))) < 1e-12


@pytest.mark.parametrize("n,d,tol", [(2, 0, 1e-12), (2, 2, 1e-11)])
def test_lcu_full_reconstruction(rng, n, d, tol):
    spec = AnsatzSpec(n, d)
    p = rand_params(rng, spec)
    exp = lcu_full(spec, p)
    assert len(exp.terms) == 2**spec.n_params
    assert np.max(np.abs(exp.matrix() - spec.unitary(p.values))) < tol


def _swap_oracle(kind, lam):
    xx = np.kron(pauli_matrix("X"), pauli_matrix("X"))
    yy = np.kron(pauli_matrix("Y"), pauli_matrix("Y"))
    h = xx + (1 if kind == "pSWAP" else -1) * yy
    w, v = np.linalg.eigh(h)
    return v @ np.diag(np.exp(-0.5j * lam * w)) @ v.conj().T


def test_swap_family_endpoints():
    zz = np.kron(np.diag([1, -1]), np.diag([1, -1]))
    assert np.allclose(decompose_two_qubit("pSWAP", 0.0).matrix(), np.eye(4))
    assert np.allclose(swap_family_unitary("pSWAP", math.pi), zz)
    assert np.allclose(swap_family_unitary("piSWAP", math.pi), -zz)


@given(angles, st.sampled_from(["pSWAP", "piSWAP"]))
def test_swap_family_three_terms(lam, kind):
    exp = decompose_two_qubit(kind, lam)
    assert len(exp.terms) == 3
    assert np.max(np.abs(exp.matrix() - _swap_oracle(kind, lam))) < 1e-12


@given(angles, st.sampled_from(["XX", "YZ", "ZZX"]))
def test_pauli_rotation_two_terms(lam, pauli):
    q = pauli_matrix(pauli)
    w, v = np.linalg.eigh(q)
    ref = v @ np.diag(np.exp(-0.5j * lam * w)) @ v.conj().T
    assert np.max(np.abs(decompose_two_qubit("PAULI_ROT", lam, pauli).matrix() - ref)) < 1e-12


def test_pauli_rotation_rejects_non_involution():
    with pytest.raises(ValueError):
        decompose_two_qubit("PAULI_ROT", 0.1, 2 * np.eye(2))


@given(st.floats(-50, 50, allow_nan=False))
def test_wrap_angle_range(x):
    w = wrap_angle(x)
    assert -math.pi <= w < math.pi
    assert math.isclose(math.cos(w), math.cos(x), abs_tol=1e-9)


def test_tied_groups_update_together():
    p = ParamVector(np.zeros(4), ((0, 2),))
    q = p.with_value(2, 1.0)
    assert q.values[0] == q.values[2] == 1.0
    assert p.sweep_order() == [0, 1, 3]
