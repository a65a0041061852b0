"""Real-amplitude ansatz and its linear-combination-of-unitaries expansions.

Layout: ``d`` repetitions of [RY on every qubit, CNOT(i, i+1) for i = 0..n-2]
followed by a final RY column, giving ``m = n (d + 1)`` angles indexed
layer-major, qubit-minor.

Because ``RY(l) = cos(l/2) RY(0) + sin(l/2) RY(pi)``, fixing any subset of the
angles to 0 or pi yields circuit variants whose trig-weighted sum reproduces
the ansatz exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .qsim import Circuit, cnot, pauli_matrix, ry

MAX_FULL_PARAMS = 12


def wrap_angle(x):
    """Reduce angles into [-pi, pi); values already inside are returned unchanged.

    Rounding in the modular shift would otherwise send angles just below pi to
    -pi, which flips the sign of a half-angle rotation.
    """
    x = np.asarray(x, dtype=float)
    inside = (x >= -np.pi) & (x < np.pi)
    out = np.where(inside, x, np.mod(x + np.pi, 2.0 * np.pi) - np.pi)
    return np.where(out >= np.pi, -np.pi, out)


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    depth: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")

    @property
    def n_params(self) -> int:
        return self.n_qubits * (self.depth + 1)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def qubit_of(self, j: int) -> int:
        return j % self.n_qubits

    def layer_of(self, j: int) -> int:
        return j // self.n_qubits

    @cached_property
    def _ladder_perm(self) -> np.ndarray:
        """Basis permutation of one CNOT ladder: new[perm[k]] = old[k]."""
        n = self.n_qubits
        perm = np.arange(self.dim)
        for i in range(n - 1):
            ctrl = (perm >> i) & 1
            perm = perm ^ (ctrl << (i + 1))
        return perm

    def circuit(self, values: Sequence[float]) -> Circuit:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {values.shape}")
        n = self.n_qubits
        gates = []
        for layer in range(self.depth + 1):
            for q in range(n):
                gates.append(ry(q, values[layer * n + q]))
            if layer < self.depth:
                gates.extend(cnot(i, i + 1) for i in range(n - 1))
        return Circuit(n, tuple(gates))

    def statevector(self, values: Sequence[float]) -> np.ndarray:
        """Real amplitudes of ``U(values)|0>`` (fast path, float64)."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {values.shape}")
        n = self.n_qubits
        psi = np.zeros(self.dim)
        psi[0] = 1.0
        perm = self._ladder_perm
        for layer in range(self.depth + 1):
            psi = psi.reshape((2,) * n)
            for q in range(n):
                c, s = math.cos(values[layer * n + q] / 2), math.sin(values[layer * n + q] / 2)
                ax = n - 1 - q
                a0 = np.take(psi, 0, axis=ax)
                a1 = np.take(psi, 1, axis=ax)
                psi = np.stack([c * a0 - s * a1, s * a0 + c * a1], axis=ax)
            psi = psi.reshape(-1)
            if layer < self.depth:
                out = np.empty_like(psi)
                out[perm] = psi
                psi = out
        return psi

    def unitary(self, values: Sequence[float]) -> np.ndarray:
        return self.circuit(values).unitary()


@dataclass(frozen=True)
class ParamVector:
    """Angles wrapped into [-pi, pi) plus optional groups of tied indices."""

    values: np.ndarray
    tie_groups: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        vals = wrap_angle(self.values).reshape(-1)
        object.__setattr__(self, "values", vals)
        groups = tuple(tuple(int(i) for i in g) for g in self.tie_groups)
        seen: set[int] = set()
        for g in groups:
            for i in g:
                if not 0 <= i < vals.size:
                    raise IndexError(f"tie index {i} out of range")
                if i in seen:
                    raise ValueError(f"index {i} appears in more than one tie group")
                seen.add(i)
            if g and not np.allclose(vals[list(g)], vals[g[0]], atol=1e-12):
                raise ValueError(f"tied indices {g} hold different values")
        object.__setattr__(self, "tie_groups", groups)

    def __len__(self) -> int:
        return self.values.size

    def group_of(self, j: int) -> tuple[int, ...]:
        for g in self.tie_groups:
            if j in g:
                return g
        return (j,)

    def with_value(self, j: int, value: float) -> ParamVector:
        """Set parameter ``j`` (and everything tied to it)."""
        vals = self.values.copy()
        vals[list(self.group_of(j))] = value
        return ParamVector(vals, self.tie_groups)

    def sweep_order(self) -> list[int]:
        """Ascending indices, one representative per tie group."""
        reps = []
        covered: set[int] = set()
        for j in range(len(self)):
            if j not in covered:
                g = self.group_of(j)
                covered.update(g)
                reps.append(min(g))
        return reps


class FixedAssignment(dict):
    """Parameter index -> fixed angle. Built from pairs so collisions are caught."""

    def __init__(self, pairs: Mapping[int, float] | Sequence[tuple[int, float]] = ()):
        items = list(pairs.items()) if isinstance(pairs, Mapping) else list(pairs)
        super().__init__()
        for idx, angle in items:
            idx = int(idx)
            if idx in self:
                raise ValueError(f"index {idx} assigned twice")
            self[idx] = float(angle)

    def __hash__(self):
        return hash(tuple(sorted(self.items())))


def _assigned_values(spec: AnsatzSpec, p: ParamVector | Sequence[float],
                     fa: Mapping[int, float]) -> np.ndarray:
    values = p.values if isinstance(p, ParamVector) else wrap_angle(p)
    if values.shape != (spec.n_params,):
        raise ValueError(f"expected {spec.n_params} parameters, got {values.shape}")
    values = values.copy()
    for idx, angle in fa.items():
        if not 0 <= idx < spec.n_params:
            raise IndexError(f"fixed index {idx} out of range for {spec.n_params} parameters")
        values[idx] = angle
    return values


def bind(spec: AnsatzSpec, p: ParamVector | Sequence[float]) -> Circuit:
    return spec.circuit(_assigned_values(spec, p, {}))


def fix_params(spec: AnsatzSpec, p: ParamVector | Sequence[float],
               fa: Mapping[int, float]) -> Circuit:
    return spec.circuit(_assigned_values(spec, p, fa))


def variant_state(spec: AnsatzSpec, p: ParamVector | Sequence[float],
                  fa: Mapping[int, float]) -> np.ndarray:
    """Real statevector of the variant circuit with ``fa`` overriding ``p``."""
    # fixed angles are 0 or pi and must not be re-wrapped to -pi
    return spec.statevector(_assigned_values(spec, p, fa))


# -- LCU expansions ---------------------------------------------------------


@dataclass(frozen=True)
class LcuTerm:
    weight: Callable[[np.ndarray], float]
    variants: tuple  # summed with equal weight; FixedAssignment or fixed angle


@dataclass(frozen=True)
class LcuExpansion:
    """``U(angles) = sum_t weight_t(angles) * sum(variants_t)``."""

    terms: tuple[LcuTerm, ...]
    free_indices: tuple[int, ...]
    angles: np.ndarray
    variant_unitary: Callable[[object], np.ndarray] = field(repr=False)

    def coefficients(self, angles=None) -> np.ndarray:
        a = self.angles if angles is None else np.atleast_1d(np.asarray(angles, dtype=float))
        return np.array([t.weight(a) for t in self.terms])

    def matrix(self, angles=None) -> np.ndarray:
        coeffs = self.coefficients(angles)
        out = None
        for c, term in zip(coeffs, self.terms):
            for v in term.variants:
                u = c * self.variant_unitary(v)
                out = u if out is None else out + u
        return out


def _half(a: float) -> tuple[float, float]:
    return math.cos(a / 2), math.sin(a / 2)


def _ansatz_variant(spec: AnsatzSpec, p: ParamVector | Sequence[float]):
    return lambda fa: fix_params(spec, p, fa).unitary()


def lcu_single(spec: AnsatzSpec, p: ParamVector | Sequence[float], j: int) -> LcuExpansion:
    if not 0 <= j < spec.n_params:
        raise IndexError(f"parameter index {j} out of range")
    values = _assigned_values(spec, p, {})
    terms = (
        LcuTerm(lambda a: _half(a[0])[0], (FixedAssignment({j: 0.0}),)),
        LcuTerm(lambda a: _half(a[0])[1], (FixedAssignment({j: math.pi}),)),
    )
    return LcuExpansion(terms, (j,), values[[j]], _ansatz_variant(spec, p))


def lcu_tied(spec: AnsatzSpec, p: ParamVector | Sequence[float],
             group: Sequence[int]) -> LcuExpansion:
    """Expansion for a group of indices sharing one angle.

    With ``c = cos(l/2)``, ``s = sin(l/2)`` the weight of every variant that
    fixes ``r`` members to pi is ``c^(g-r) s^r``; variants with the same ``r``
    share one term, so a tied pair gives the three-coefficient form.
    """
    group = tuple(int(i) for i in group)
    if len(set(group)) != len(group):
        raise ValueError("repeated index in tie group")
    for i in group:
        if not 0 <= i < spec.n_params:
            raise IndexError(f"parameter index {i} out of range")
    values = _assigned_values(spec, p, {})
    g = len(group)
    terms = []
    for r in range(g + 1):
        variants = tuple(
            FixedAssignment({i: (math.pi if i in chosen else 0.0) for i in group})
            for chosen in itertools.combinations(group, r)
        )
        terms.append(LcuTerm(lambda a, r=r: _half(a[0])[0] ** (g - r) * _half(a[0])[1] ** r,
                             variants))
    return LcuExpansion(tuple(terms), group, values[[group[0]]], _ansatz_variant(spec, p))


def lcu_pair(spec: AnsatzSpec, p: ParamVector | Sequence[float], j: int, k: int) -> LcuExpansion:
    if j == k:
        raise ValueError("pair expansion needs two distinct indices")
    if isinstance(p, ParamVector) and k in p.group_of(j):
        return lcu_tied(spec, p, (j, k))
    for i in (j, k):
        if not 0 <= i < spec.n_params:
            raise IndexError(f"parameter index {i} out of range")
    values = _assigned_values(spec, p, {})
    terms = []
    for bj, bk in itertools.product((0, 1), repeat=2):
        fa = FixedAssignment({j: bj * math.pi, k: bk * math.pi})
        terms.append(LcuTerm(lambda a, bj=bj, bk=bk: _half(a[0])[bj] * _half(a[1])[bk], (fa,)))
    return LcuExpansion(tuple(terms), (j, k), values[[j, k]], _ansatz_variant(spec, p))


def full_weights(angles: np.ndarray) -> np.ndarray:
    """Weights ``prod_l cos((l_l - l'_kl)/2)`` for all 2^m corners.

    Corner ``k`` fixes parameter ``l`` to pi when bit ``l`` of ``k`` is set.
    """
    angles = np.asarray(angles, dtype=float)
    w = np.ones(1)
    for a in angles:
        c, s = math.cos(a / 2), math.sin(a / 2)
        # higher parameter indices become higher bits
        w = np.concatenate([w * c, w * s])
    return w


def corner_assignment(k: int, m: int) -> FixedAssignment:
    return FixedAssignment({l: (math.pi if (k >> l) & 1 else 0.0) for l in range(m)})


def lcu_full(spec: AnsatzSpec, p: ParamVector | Sequence[float]) -> LcuExpansion:
    m = spec.n_params
    if m > MAX_FULL_PARAMS:
        raise ValueError(f"full expansion needs 2^{m} terms; cap is m <= {MAX_FULL_PARAMS}")
    values = _assigned_values(spec, p, {})
    terms = tuple(
        LcuTerm(lambda a, k=k: float(full_weights(a)[k]), (corner_assignment(k, m),))
        for k in range(1 << m)
    )
    return LcuExpansion(terms, tuple(range(m)), values, _ansatz_variant(spec, p))


# -- two-qubit gates ----------------------------------------------------------

_XX = pauli_matrix("XX")
_YY = pauli_matrix("YY")


def swap_family_unitary(kind: str, angle: float) -> np.ndarray:
    """``exp(-i angle/2 (XX +/- YY))``; ``+`` for pSWAP, ``-`` for piSWAP."""
    sign = {"pSWAP": 1.0, "piSWAP": -1.0}[kind]
    return expm(-0.5j * angle * (_XX + sign * _YY))


def decompose_two_qubit(kind: str, angle: float, pauli: str | np.ndarray | None = None) -> LcuExpansion:
    """LCU form of a parameterized multi-qubit rotation.

    ``kind="PAULI_ROT"`` expands ``exp(-i angle Q/2)`` for any ``Q`` with
    ``Q^2 = I`` into two terms (variants at 0 and pi). ``kind`` ``"pSWAP"`` or
    ``"piSWAP"`` gives the three-term form on variants at 0, pi/2 and pi.
    """
    if kind == "PAULI_ROT":
        q = pauli_matrix(pauli) if isinstance(pauli, str) else np.asarray(pauli, dtype=complex)
        if not np.allclose(q @ q, np.eye(q.shape[0]), atol=1e-12):
            raise ValueError("rotation generator must square to the identity")
        gen = q

        def unitary(a):
            return math.cos(a / 2) * np.eye(gen.shape[0]) - 1j * math.sin(a / 2) * gen

        terms = (
            LcuTerm(lambda a: math.cos(a[0] / 2), (0.0,)),
            LcuTerm(lambda a: math.sin(a[0] / 2), (math.pi,)),
        )
        return LcuExpansion(terms, (0,), np.array([float(angle)]), unitary)
    if kind in ("pSWAP", "piSWAP"):
        terms = (
            LcuTerm(lambda a: math.cos(a[0] / 2) ** 2 - math.sin(a[0]) / 2, (0.0,)),
            LcuTerm(lambda a: math.sin(a[0] / 2) ** 2 - math.sin(a[0]) / 2, (math.pi,)),
            LcuTerm(lambda a: math.sin(a[0]), (math.pi / 2,)),
        )
        return LcuExpansion(terms, (0,), np.array([float(angle)]),
                            lambda a: swap_family_unitary(kind, a))
    raise ValueError(f"unknown two-qubit gate kind {kind!r}")
