"""Expectation cost ``C_O(l) = <0|U(l)^dag O U(l)|0>`` for Hermitian ``O``.

Along one angle ``C_O = c^2 k00 + s^2 kpp + 2 c s Re k0p`` with ``c, s`` the
half-angle cosine and sine, i.e. the harmonic ``A + B cos l + C sin l``.
Two angles need the ten independent numbers collected in ``ZetaCoeffs``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec, ParamVector, variant_state
from .qsim import Estimator, RealEstimate
from .trig import dcos, dsin


class ObservableEval(ABC):
    """Evaluates ``Re<bra|O|ket>`` for real-amplitude variant states.

    ``cost`` is the number of circuits charged per call.
    """

    hermitian = True
    cost = 1

    @abstractmethod
    def evaluate(self, bra: np.ndarray, ket: np.ndarray, est: Estimator) -> RealEstimate:
        ...

    def __call__(self, bra, ket, est: Estimator) -> RealEstimate:
        return self.evaluate(bra, ket, est)


class DenseObservable(ObservableEval):
    """Dense Hermitian matrix; shots are drawn on ``O / ||O||`` and rescaled."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        if not np.allclose(matrix, matrix.conj().T, atol=1e-12):
            raise ValueError("observable must be Hermitian")
        self.matrix = matrix
        self.scale = float(np.linalg.norm(matrix, 2))
        evals = np.linalg.eigvalsh(matrix)
        self.spectrum = (float(evals[0]), float(evals[-1]))

    def evaluate(self, bra, ket, est):
        re = float(np.real(np.vdot(bra, self.matrix @ ket)))
        if self.scale == 0.0:
            est.reserve()
            return RealEstimate(0.0, 0.0)
        r = est.sample(re / self.scale)
        return RealEstimate(r.value * self.scale, r.stderr * self.scale)


def direct_expectation(obs: ObservableEval, spec: AnsatzSpec, p: ParamVector,
                       est: Estimator) -> float:
    psi = variant_state(spec, p, {})
    return obs(psi, psi, est).value


@dataclass(frozen=True)
class KappaCoeffs:
    j: int
    k00: float
    kpp: float
    re_k0p: float

    @property
    def harmonic(self) -> tuple[float, float, float]:
        """``(A, B, C)`` of ``A + B cos l + C sin l``."""
        return (self.k00 + self.kpp) / 2, (self.k00 - self.kpp) / 2, self.re_k0p

    def __call__(self, lam):
        return expectation_curve(self, lam)

    def minimizer(self) -> float:
        from .optim import closed_form_min

        lam, _ = closed_form_min("harmonic", self.harmonic)
        return lam


def estimate_kappa(obs: ObservableEval, spec: AnsatzSpec, p: ParamVector, j: int,
                   est: Estimator) -> KappaCoeffs:
    if not 0 <= j < spec.n_params:
        raise IndexError(f"parameter index {j} out of range")
    u0 = variant_state(spec, p, {j: 0.0})
    up = variant_state(spec, p, {j: math.pi})
    return KappaCoeffs(j, obs(u0, u0, est).value, obs(up, up, est).value, obs(u0, up, est).value)


def expectation_curve(kc: KappaCoeffs, lam):
    a, b, c = kc.harmonic
    return a + b * dcos(lam) + c * dsin(lam)


def expectation_derivative(kc: KappaCoeffs, lam, order: int):
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    _, b, c = kc.harmonic
    return b * dcos(lam, order) + c * dsin(lam, order)


def fit_harmonic(f0: float, f_half_pi: float, f_pi: float) -> tuple[float, float, float]:
    """``(A, B, C)`` from curve values at 0, pi/2 and pi."""
    a = (f0 + f_pi) / 2
    return a, (f0 - f_pi) / 2, f_half_pi - a


# keys are (bra_j, bra_k, ket_j, ket_k); 1 means the angle is fixed to pi
ZETA_KEYS = (
    (0, 0, 0, 0), (0, 1, 0, 1), (1, 0, 1, 0), (1, 1, 1, 1),
    (0, 0, 0, 1), (1, 0, 1, 1), (0, 0, 1, 0), (0, 1, 1, 1),
    (0, 0, 1, 1), (0, 1, 1, 0),
)


@dataclass(frozen=True)
class ZetaCoeffs:
    j: int
    k: int
    z: dict  # ZETA_KEYS -> real (real part for the off-diagonal keys)

    def __getitem__(self, key) -> float:
        return self.z[tuple(key)]


def estimate_zeta(obs: ObservableEval, spec: AnsatzSpec, p: ParamVector, j: int, k: int,
                  est: Estimator) -> ZetaCoeffs:
    if j == k:
        raise ValueError("zeta coefficients need two distinct indices")
    states = {
        (bj, bk): variant_state(spec, p, {j: bj * math.pi, k: bk * math.pi})
        for bj in (0, 1) for bk in (0, 1)
    }
    z = {key: obs(states[key[:2]], states[key[2:]], est).value for key in ZETA_KEYS}
    return ZetaCoeffs(j, k, z)


def expectation_surface(zc: ZetaCoeffs, lam_j, lam_k):
    cj, sj = np.cos(np.asarray(lam_j) / 2), np.sin(np.asarray(lam_j) / 2)
    ck, sk = np.cos(np.asarray(lam_k) / 2), np.sin(np.asarray(lam_k) / 2)
    z = zc.z
    return (
        cj**2 * (ck**2 * z[0, 0, 0, 0] + 2 * ck * sk * z[0, 0, 0, 1] + sk**2 * z[0, 1, 0, 1])
        + sj**2 * (sk**2 * z[1, 1, 1, 1] + 2 * ck * sk * z[1, 0, 1, 1] + ck**2 * z[1, 0, 1, 0])
        + 2 * cj * sj * (
            ck**2 * z[0, 0, 1, 0]
            + sk**2 * z[0, 1, 1, 1]
            + ck * sk * (z[0, 0, 1, 1] + z[0, 1, 1, 0])
        )
    )
