"""Dense statevector engine.

Qubit 0 is the least-significant bit of a basis label. Amplitudes are complex128
throughout. Structured operators (cyclic adders and diagonals) are applied
directly rather than compiled to gates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

PAULI_LETTERS = frozenset("IXYZ")

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class StateVec:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        object.__setattr__(self, "amps", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> StateVec:
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, k: int) -> StateVec:
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[k] = 1.0
        return cls(n_qubits, amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


@dataclass(frozen=True)
class GateOp:
    """A gate acting on explicit qubit indices.

    ``kind`` is one of ``"RY"``, ``"H"``, ``"X"``, ``"CNOT"``, ``"PAULI_ROT"``,
    ``"CONTROLLED"`` or ``"UNITARY"`` (a dense matrix on ``targets``, used for
    state-preparation registers in circuit mode). For ``CNOT`` the targets are
    ``(control, target)``. For ``PAULI_ROT`` the string letter ``i`` acts on
    ``targets[i]``.
    """

    kind: str
    targets: tuple[int, ...]
    angle: float = 0.0
    pauli: str = ""
    inner: GateOp | None = None
    control: int = -1
    matrix: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind == "PAULI_ROT":
            if not self.pauli or set(self.pauli) - PAULI_LETTERS:
                raise ValueError(f"malformed Pauli string {self.pauli!r}")
            if len(self.pauli) != len(self.targets):
                raise ValueError("Pauli string length must match number of targets")
        if self.kind == "CONTROLLED" and self.inner is None:
            raise ValueError("CONTROLLED gate needs an inner gate")

    def qubits(self) -> tuple[int, ...]:
        if self.kind == "CONTROLLED":
            return (self.control,) + self.inner.qubits()
        return self.targets


def ry(q: int, angle: float) -> GateOp:
    return GateOp("RY", (q,), angle=float(angle))


def cnot(control: int, target: int) -> GateOp:
    return GateOp("CNOT", (control, target))


def ry_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def pauli_matrix(pauli: str) -> np.ndarray:
    """Dense matrix of a Pauli string; letter ``i`` acts on the i-th listed qubit.

    The first letter is the least-significant qubit, consistent with the
    little-endian basis labels used everywhere else.
    """
    if not pauli or set(pauli) - PAULI_LETTERS:
        raise ValueError(f"malformed Pauli string {pauli!r}")
    out = np.ones((1, 1), dtype=complex)
    for letter in pauli:
        out = np.kron(_PAULI[letter], out)
    return out


def _apply_matrix(amps: np.ndarray, n: int, mat: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to ``qubits`` (qubits[0] = least-significant local bit)."""
    k = len(qubits)
    psi = amps.reshape((2,) * n)
    # axis for qubit q in the C-ordered reshape is n-1-q
    axes = [n - 1 - q for q in reversed(qubits)]
    psi = np.moveaxis(psi, axes, range(k))
    shape = psi.shape
    psi = (mat @ psi.reshape(1 << k, -1)).reshape(shape)
    psi = np.moveaxis(psi, range(k), axes)
    return psi.reshape(-1)


def _gate_matrix(gate: GateOp) -> np.ndarray:
    kind = gate.kind
    if kind == "RY":
        return ry_matrix(gate.angle)
    if kind == "H":
        return _H
    if kind == "X":
        return _PAULI["X"]
    if kind == "CNOT":
        # local order (control, target): control is the low bit
        return np.array(
            [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
        )
    if kind == "PAULI_ROT":
        p = pauli_matrix(gate.pauli)
        return math.cos(gate.angle / 2) * np.eye(p.shape[0]) - 1j * math.sin(gate.angle / 2) * p
    if kind == "UNITARY":
        return np.asarray(gate.matrix, dtype=complex)
    if kind == "CONTROLLED":
        inner = _gate_matrix(gate.inner)
        d = inner.shape[0]
        # control is the low bit of the local register (control,) + inner qubits
        full = np.eye(2 * d, dtype=complex)
        idx = np.arange(d) * 2 + 1
        full[np.ix_(idx, idx)] = inner
        return full
    raise ValueError(f"unknown gate kind {kind!r}")


def _check_indices(gate: GateOp, n: int) -> None:
    qs = gate.qubits()
    if len(set(qs)) != len(qs):
        raise ValueError(f"gate {gate.kind} has repeated qubit indices {qs}")
    for q in qs:
        if not 0 <= q < n:
            raise IndexError(f"qubit index {q} out of range for {n} qubits")


def apply_gate(state: StateVec, gate: GateOp) -> StateVec:
    """Return ``U @ state`` for the gate's unitary."""
    _check_indices(gate, state.n_qubits)
    amps = _apply_matrix(state.amps, state.n_qubits, _gate_matrix(gate), gate.qubits())
    return StateVec(state.n_qubits, amps)


def gate_unitary(gate: GateOp, n_qubits: int) -> np.ndarray:
    """Dense 2^n x 2^n unitary of a gate (test/oracle helper)."""
    _check_indices(gate, n_qubits)
    dim = 1 << n_qubits
    cols = [_apply_matrix(np.eye(dim, dtype=complex)[:, k], n_qubits, _gate_matrix(gate), gate.qubits())
            for k in range(dim)]
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class Circuit:
    """A gate sequence acting on ``|0...0>`` of ``n_qubits``."""

    n_qubits: int
    gates: tuple[GateOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            _check_indices(g, self.n_qubits)

    def apply(self, amps: np.ndarray) -> np.ndarray:
        n = self.n_qubits
        for g in self.gates:
            amps = _apply_matrix(amps, n, _gate_matrix(g), g.qubits())
        return amps

    def statevector(self) -> StateVec:
        return StateVec(self.n_qubits, self.apply(StateVec.zero(self.n_qubits).amps))

    def unitary(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        return np.stack([self.apply(np.eye(dim, dtype=complex)[:, k]) for k in range(dim)], axis=1)


@dataclass(frozen=True)
class AdderOp:
    """Cyclic shift of basis labels: ``|k> -> |(k + direction) mod 2^n>``."""

    n_qubits: int
    direction: int = 1

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValueError(f"direction must be +1 or -1, got {self.direction}")

    def inverse(self) -> AdderOp:
        return AdderOp(self.n_qubits, -self.direction)

    def matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        return np.roll(np.eye(dim, dtype=complex), self.direction, axis=0)


def apply_adder(state: StateVec, op: AdderOp) -> StateVec:
    if state.n_qubits != op.n_qubits:
        raise ValueError(f"adder on {op.n_qubits} qubits applied to {state.n_qubits}-qubit state")
    return StateVec(state.n_qubits, np.roll(state.amps, op.direction))


@dataclass(frozen=True)
class DiagonalOp:
    """Diagonal operator; entries must satisfy ``|d_k| <= 1`` to be Hadamard-testable."""

    diag: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "diag", np.asarray(self.diag, dtype=complex))

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.diag.shape[0])))

    def adjoint(self) -> DiagonalOp:
        return DiagonalOp(np.conj(self.diag))

    def is_state_encoding(self, atol: float = 1e-10) -> bool:
        return abs(np.linalg.norm(self.diag) - 1.0) < atol


MiddleOp = Union[AdderOp, DiagonalOp]
Prep = Union[Circuit, StateVec, np.ndarray]


@dataclass(frozen=True)
class RealEstimate:
    value: float
    stderr: float = 0.0


@dataclass
class Estimator:
    """Evaluation policy for real parts of overlaps.

    In ``"shots"`` mode each call draws ``k ~ Binomial(shots, (1 + re) / 2)`` from
    an RNG stream keyed by ``(master_seed, circuit_counter)``, so a given circuit
    index always reproduces the same sample regardless of scheduling.
    """

    mode: str = "exact"
    shots: int = 50_000
    master_seed: int = 0
    circuit_counter: int = 0

    def __post_init__(self):
        self.mode = self.mode.lower()
        if self.mode not in ("exact", "shots"):
            raise ValueError(f"unknown estimator mode {self.mode!r}")
        if self.shots <= 0:
            raise ValueError("shots must be positive")

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def reserve(self, count: int = 1) -> int:
        """Claim ``count`` consecutive circuit indices and return the first."""
        start = self.circuit_counter
        self.circuit_counter += count
        return start

    def stream(self, index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.master_seed & (2**64 - 1), index]))

    def sample(self, re: float, index: int | None = None) -> RealEstimate:
        """Turn an exact real part into an estimate, consuming one circuit index."""
        if index is None:
            index = self.reserve()
        if self.exact:
            return RealEstimate(float(re), 0.0)
        p = min(max((1.0 + re) / 2.0, 0.0), 1.0)
        k = int(self.stream(index).binomial(self.shots, p))
        value = 2.0 * k / self.shots - 1.0
        return RealEstimate(value, math.sqrt(max(1.0 - value * value, 0.0) / self.shots))

    def fork(self) -> Estimator:
        return Estimator(self.mode, self.shots, self.master_seed, self.circuit_counter)


def _prep_amps(prep: Prep) -> np.ndarray:
    if isinstance(prep, Circuit):
        return prep.statevector().amps
    if isinstance(prep, StateVec):
        return prep.amps
    return np.asarray(prep, dtype=complex)


def _check_middle(middle: Sequence[MiddleOp], dim: int) -> None:
    for op in middle:
        if isinstance(op, DiagonalOp):
            if op.diag.shape[0] != dim:
                raise ValueError(f"diagonal of length {op.diag.shape[0]} on register of dim {dim}")
            if np.max(np.abs(op.diag)) > 1.0 + 1e-12:
                raise ValueError(
                    "diagonal entries exceed 1 in magnitude; normalize before Hadamard testing"
                )
        elif isinstance(op, AdderOp):
            if (1 << op.n_qubits) != dim:
                raise ValueError(f"adder on {op.n_qubits} qubits for register of dim {dim}")
        else:
            raise TypeError(f"unsupported middle operator {type(op).__name__}")


def apply_middle(amps: np.ndarray, middle: Sequence[MiddleOp]) -> np.ndarray:
    """Apply the chain to a ket; the first element acts first."""
    for op in middle:
        if isinstance(op, AdderOp):
            amps = np.roll(amps, op.direction)
        else:
            amps = op.diag * amps
    return amps


def exact_overlap(prep_left: Prep, middle: Sequence[MiddleOp], prep_right: Prep) -> complex:
    """Complex ``<0|U_L^dag M U_R|0>`` without any sampling."""
    left = _prep_amps(prep_left)
    right = _prep_amps(prep_right)
    if left.shape != right.shape:
        raise ValueError(f"register mismatch: {left.shape} vs {right.shape}")
    _check_middle(middle, right.shape[0])
    return complex(np.vdot(left, apply_middle(right, middle)))


def overlap_real(prep_left: Prep, middle: Sequence[MiddleOp], prep_right: Prep,
                 est: Estimator) -> RealEstimate:
    """Estimate ``Re<0|U_L^dag M U_R|0>`` by direct inner product.

    In shots mode the exact real part is converted into the ancilla outcome
    distribution of the equivalent Hadamard test and sampled binomially.
    """
    re = exact_overlap(prep_left, middle, prep_right).real
    if abs(re) > 1.0 + 1e-9:
        raise ValueError(f"|Re| = {abs(re):.6g} > 1: middle operator chain is not norm-bounded")
    return est.sample(re)


# -- explicit Hadamard-test circuit ------------------------------------------------


def _householder_prep(v: np.ndarray) -> np.ndarray:
    """A unitary whose first column is the unit vector ``v``."""
    v = np.asarray(v, dtype=complex)
    dim = v.shape[0]
    phase = v[0] / abs(v[0]) if abs(v[0]) > 1e-15 else 1.0
    e0 = np.zeros(dim, dtype=complex)
    e0[0] = 1.0
    w = e0 - v / phase
    nw = np.linalg.norm(w)
    if nw < 1e-15:
        return phase * np.eye(dim, dtype=complex)
    w /= nw
    refl = np.eye(dim, dtype=complex) - 2.0 * np.outer(w, np.conj(w))
    return phase * refl


class _Register:
    """Bookkeeping for the big simulated register of a Hadamard-test circuit."""

    def __init__(self, n_primary: int):
        self.n_primary = n_primary
        self.size = 1 + n_primary  # qubit 0 = Hadamard ancilla
        self.ops: list = []

    def alloc(self, k: int) -> list[int]:
        qs = list(range(self.size, self.size + k))
        self.size += k
        return qs

    @property
    def primary(self) -> list[int]:
        return list(range(1, 1 + self.n_primary))


def _controlled_apply(amps: np.ndarray, n: int, mat: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply ``mat`` to ``qubits`` on the ancilla=1 branch (ancilla is qubit 0)."""
    out = amps.copy()
    branch = amps[1::2]
    out[1::2] = _apply_matrix(branch, n - 1, mat, [q - 1 for q in qubits])
    return out


def hadamard_test_circuit(prep_left: Prep, middle: Sequence[MiddleOp], prep_right: Prep,
                          est: Estimator, max_qubits: int = 16) -> RealEstimate:
    """Estimate ``Re<0|U_L^dag M U_R|0>`` with an explicit ancilla circuit.

    Layout: H on the ancilla, then controlled ``U_R``, the middle chain and
    ``U_L^dag``, H, measure the ancilla. A unit-norm diagonal is realised by
    preparing its vector on a fresh register and copying the primary register
    onto it with CNOTs (``<i, 0| CX |j, v> = v_i delta_ij``); any other diagonal
    uses a one-qubit block encoding ``[[D, S], [S, -D^*]]``. The ancilla
    probability ``P(0) = (1 + Re)/2`` is then either returned exactly or sampled.
    """
    left = _prep_amps(prep_left)
    right = _prep_amps(prep_right)
    if left.shape != right.shape:
        raise ValueError(f"register mismatch: {left.shape} vs {right.shape}")
    dim = right.shape[0]
    _check_middle(middle, dim)
    n = int(round(math.log2(dim)))

    reg = _Register(n)
    ops: list[tuple[np.ndarray, list[int]]] = [(_householder_prep(right), reg.primary)]
    for op in middle:
        if isinstance(op, AdderOp):
            ops.append((op.matrix(), reg.primary))
        elif op.is_state_encoding():
            copy = reg.alloc(n)
            ops.append((_householder_prep(op.diag), copy))
            for p, c in zip(reg.primary, copy):
                ops.append((_gate_matrix(GateOp("CNOT", (0, 1))), [p, c]))
        else:
            (anc,) = reg.alloc(1)
            d = op.diag
            s = np.sqrt(np.clip(1.0 - np.abs(d) ** 2, 0.0, None))
            block = np.zeros((2 * dim, 2 * dim), dtype=complex)
            # local order: primary qubits low, block ancilla high
            block[:dim, :dim] = np.diag(d)
            block[:dim, dim:] = np.diag(s)
            block[dim:, :dim] = np.diag(s)
            block[dim:, dim:] = -np.diag(np.conj(d))
            ops.append((block, reg.primary + [anc]))
    ops.append((_householder_prep(left).conj().T, reg.primary))

    if reg.size > max_qubits:
        raise ValueError(f"Hadamard-test circuit needs {reg.size} qubits, cap is {max_qubits}")

    total = reg.size
    amps = np.zeros(1 << total, dtype=complex)
    amps[0] = 1.0
    amps = _apply_matrix(amps, total, _H, [0])
    for mat, qs in ops:
        amps = _controlled_apply(amps, total, mat, qs)
    amps = _apply_matrix(amps, total, _H, [0])
    # extra registers start in |0> and are compared against <0|, so the ancilla
    # marginal carries Re<0...0|W|0...0> of the whole register
    p0 = float(np.sum(np.abs(amps[0::2]) ** 2))
    return est.sample(2.0 * p0 - 1.0)
