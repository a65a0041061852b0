"""Squared-residual cost ``C_I = || |target> - U(l)|0> ||^2 = 2 [1 - Re<target|U(l)|0>]``.

Along one angle the cost is a two-term trig sum in the half angle, along two
angles a four-term product form, and over all angles a 2^m-term form. The
coefficients are overlaps with circuit variants whose free angles are fixed to
0 or pi; once estimated, the cost and every derivative follow classically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ansatz import (
    MAX_FULL_PARAMS,
    AnsatzSpec,
    ParamVector,
    corner_assignment,
    full_weights,
    variant_state,
)
from .qsim import Estimator, Prep, overlap_real
from .trig import dcos_half, dsin_half


def direct_residual(target: Prep, spec: AnsatzSpec, p: ParamVector, est: Estimator) -> float:
    ov = overlap_real(target, [], variant_state(spec, p, {}), est)
    return 2.0 * (1.0 - ov.value)


@dataclass(frozen=True)
class AlphaCoeffs:
    j: int
    a0: float
    a_pi: float
    stderr: tuple[float, float] = (0.0, 0.0)

    def __call__(self, lam):
        return residual_curve(self, lam)

    def minimizer(self) -> float:
        from .optim import closed_form_min

        lam, _ = closed_form_min("linear", (self.a0, self.a_pi))
        return lam


def estimate_alpha(target: Prep, spec: AnsatzSpec, p: ParamVector, j: int,
                   est: Estimator) -> AlphaCoeffs:
    if not 0 <= j < spec.n_params:
        raise IndexError(f"parameter index {j} out of range")
    ests = [overlap_real(target, [], variant_state(spec, p, {j: fixed}), est)
            for fixed in (0.0, math.pi)]
    return AlphaCoeffs(j, ests[0].value, ests[1].value, (ests[0].stderr, ests[1].stderr))


def residual_curve(ac: AlphaCoeffs, lam):
    return 2.0 * (1.0 - dcos_half(lam) * ac.a0 - dsin_half(lam) * ac.a_pi)


def residual_derivative(ac: AlphaCoeffs, lam, order: int):
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    return -2.0 * (dcos_half(lam, order) * ac.a0 + dsin_half(lam, order) * ac.a_pi)


def residual_curve_stderr(ac: AlphaCoeffs, lam):
    """Propagated one-sigma band of the reconstructed curve."""
    s0, sp = ac.stderr
    return 2.0 * np.sqrt((dcos_half(lam) * s0) ** 2 + (dsin_half(lam) * sp) ** 2)


@dataclass(frozen=True)
class BetaCoeffs:
    j: int
    k: int
    # indexed [bit_j, bit_k], bit set = fixed to pi
    b: np.ndarray


def estimate_beta(target: Prep, spec: AnsatzSpec, p: ParamVector, j: int, k: int,
                  est: Estimator) -> BetaCoeffs:
    if j == k:
        raise ValueError("beta coefficients need two distinct indices")
    b = np.zeros((2, 2))
    for bj, bk in itertools.product((0, 1), repeat=2):
        fa = {j: bj * math.pi, k: bk * math.pi}
        b[bj, bk] = overlap_real(target, [], variant_state(spec, p, fa), est).value
    return BetaCoeffs(j, k, b)


def _half_pair(lam, order: int):
    return np.stack([dcos_half(lam, order), dsin_half(lam, order)])


def residual_surface(bc: BetaCoeffs, lam_j, lam_k):
    wj = _half_pair(lam_j, 0)
    wk = _half_pair(lam_k, 0)
    return 2.0 - 2.0 * np.einsum("a...,ab,b...->...", wj, bc.b, wk)


def residual_surface_derivative(bc: BetaCoeffs, lam_j, lam_k, order_j: int, order_k: int):
    if order_j + order_k < 1:
        raise ValueError("total derivative order must be >= 1")
    wj = _half_pair(lam_j, order_j)
    wk = _half_pair(lam_k, order_k)
    return -2.0 * np.einsum("a...,ab,b...->...", wj, bc.b, wk)


@dataclass(frozen=True)
class GammaCoeffs:
    # index k: bit l set means parameter l fixed to pi
    g: np.ndarray

    @property
    def n_params(self) -> int:
        return int(round(math.log2(self.g.size)))


def estimate_gamma(target: Prep, spec: AnsatzSpec, p: ParamVector, est: Estimator) -> GammaCoeffs:
    m = spec.n_params
    if m > MAX_FULL_PARAMS:
        raise ValueError(f"full expansion needs 2^{m} overlaps; cap is m <= {MAX_FULL_PARAMS}")
    g = np.array([
        overlap_real(target, [], variant_state(spec, p, corner_assignment(k, m)), est).value
        for k in range(1 << m)
    ])
    return GammaCoeffs(g)


def residual_full(gc: GammaCoeffs, lam) -> float:
    return float(2.0 - 2.0 * full_weights(lam) @ gc.g)


def residual_full_lattice(gc: GammaCoeffs, axis: np.ndarray) -> np.ndarray:
    """Cost on the tensor lattice ``axis^m`` (array of shape ``(len(axis),)*m``).

    Axis ``l`` of the result is parameter ``l``.
    """
    m = gc.n_params
    axis = np.asarray(axis, dtype=float)
    w = np.stack([np.cos(axis / 2), np.sin(axis / 2)], axis=1)  # (P, 2)
    # C-order reshape puts the highest bit (parameter m-1) first; flip to parameter order
    t = gc.g.reshape((2,) * m).transpose(tuple(range(m - 1, -1, -1)))
    small = "abcdefghijkl"[:m]
    big = "ABCDEFGHIJKL"[:m]
    expr = small + "," + ",".join(f"{B}{s}" for B, s in zip(big, small)) + "->" + big
    return 2.0 - 2.0 * np.einsum(expr, t, *([w] * m))
