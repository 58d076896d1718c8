"""Dense statevector simulator for small gate-model circuits.

Conventions, fixed for the whole package:

* qubit 0 is the least-significant bit of the basis-state index, so for
  two qubits the basis order is |q1 q0> = |00>, |01>, |10>, |11>;
* rotations use the half-angle form Rx(t) = exp(-i t X / 2) (and likewise
  Ry, Rz), which gives <Z> = cos(t) after Ry(t)|0>;
* CNOT flips the target bit exactly where the control bit is 1;
* everything is double-precision complex and expectations are exact —
  there is no shot sampling.

Angles are kept exactly as given (no modular reduction) so that shifted
copies of a circuit stay valid for parameter-shift gradients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    IndexOutOfRange,
    InvariantViolation,
    QubitCountOutOfRange,
    QubitMismatch,
)

MAX_QUBITS = 16
_NORM_TOL = 1e-10


class GateKind(Enum):
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CNOT = "cnot"


ROTATION_KINDS = (GateKind.RX, GateKind.RY, GateKind.RZ)


@dataclass(frozen=True)
class GateOp:
    """A single-qubit rotation or a CNOT."""

    kind: GateKind
    target: int
    control: int | None = None
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind is GateKind.CNOT:
            if self.control is None:
                raise InvariantViolation("CNOT requires a control qubit")
            if self.control == self.target:
                raise InvariantViolation("CNOT control and target must differ")
            if self.angle is not None:
                raise InvariantViolation("CNOT takes no angle")
        else:
            if self.control is not None:
                raise InvariantViolation(f"{self.kind.value} takes no control qubit")
            if self.angle is None or not math.isfinite(self.angle):
                raise InvariantViolation(f"{self.kind.value} needs a finite angle")

    @property
    def is_rotation(self) -> bool:
        return self.kind is not GateKind.CNOT


class ObservableKind(Enum):
    PAULI_Z = "pauli_z"


@dataclass(frozen=True)
class Observable:
    """Single-qubit observable; only Pauli-Z is supported."""

    kind: ObservableKind
    qubit: int


@dataclass
class Statevector:
    """2**n_qubits complex amplitudes with unit norm."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise QubitCountOutOfRange(
                f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise InvariantViolation(
                f"expected {2**self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )
        drift = abs(float(np.real(np.vdot(self.amplitudes, self.amplitudes))) - 1.0)
        if drift > _NORM_TOL:
            raise InvariantViolation(f"state norm drifted by {drift:.3e}")

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())


def new_zero_state(n_qubits: int) -> Statevector:
    """Return |0...0> on `n_qubits` qubits."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise QubitCountOutOfRange(
            f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}"
        )
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


def _check_qubit(n_qubits: int, qubit: int, what: str = "qubit") -> None:
    if not 0 <= qubit < n_qubits:
        raise IndexOutOfRange(f"{what} {qubit} out of range for {n_qubits} qubits")


def _apply_rotation_inplace(
    amps: np.ndarray, n_qubits: int, kind: GateKind, target: int, angle: float
) -> None:
    half = 0.5 * angle
    c, s = math.cos(half), math.sin(half)
    view = amps.reshape(2 ** (n_qubits - 1 - target), 2, 2**target)
    if kind is GateKind.RZ:
        view[:, 0, :] *= complex(c, -s)
        view[:, 1, :] *= complex(c, s)
        return
    lo = view[:, 0, :].copy()
    hi = view[:, 1, :]
    if kind is GateKind.RY:
        view[:, 0, :] = c * lo - s * hi
        view[:, 1, :] = s * lo + c * hi
    else:  # RX
        ms = complex(0.0, -s)
        view[:, 0, :] = c * lo + ms * hi
        view[:, 1, :] = ms * lo + c * hi


def _apply_cnot_inplace(
    amps: np.ndarray, n_qubits: int, control: int, target: int
) -> None:
    view = amps.reshape([2] * n_qubits)  # axis j holds qubit n_qubits-1-j
    ax_c = n_qubits - 1 - control
    ax_t = n_qubits - 1 - target
    sel0 = [slice(None)] * n_qubits
    sel0[ax_c], sel0[ax_t] = 1, 0
    sel1 = [slice(None)] * n_qubits
    sel1[ax_c], sel1[ax_t] = 1, 1
    block = view[tuple(sel0)].copy()
    view[tuple(sel0)] = view[tuple(sel1)]
    view[tuple(sel1)] = block


def _apply_gate_inplace(amps: np.ndarray, n_qubits: int, gate: GateOp) -> None:
    _check_qubit(n_qubits, gate.target, "target")
    if gate.kind is GateKind.CNOT:
        _check_qubit(n_qubits, gate.control, "control")
        _apply_cnot_inplace(amps, n_qubits, gate.control, gate.target)
    else:
        _apply_rotation_inplace(amps, n_qubits, gate.kind, gate.target, gate.angle)


def apply_gate(state: Statevector, gate: GateOp) -> Statevector:
    """Return a new state with `gate` applied; the input is untouched."""
    amps = state.amplitudes.copy()
    _apply_gate_inplace(amps, state.n_qubits, gate)
    return Statevector(state.n_qubits, amps)


def expectation_z(state: Statevector, qubit: int) -> float:
    """Exact <Z> on `qubit`: +1 weight where its bit is 0, -1 where it is 1."""
    _check_qubit(state.n_qubits, qubit)
    amps = state.amplitudes
    probs = amps.real**2 + amps.imag**2
    view = probs.reshape(2 ** (state.n_qubits - 1 - qubit), 2, 2**qubit)
    value = float(view[:, 0, :].sum() - view[:, 1, :].sum())
    # rounding can spill past +-1 by an ulp; the contract is a hard bound
    return min(1.0, max(-1.0, value))


def expectation(state: Statevector, observable: Observable) -> float:
    if observable.kind is not ObservableKind.PAULI_Z:
        raise InvariantViolation(f"unsupported observable {observable.kind}")
    return expectation_z(state, observable.qubit)


def _rotated_zero_qubit(kind: GateKind, angle: float) -> np.ndarray:
    """Single-qubit state R(angle)|0> as a length-2 vector."""
    half = 0.5 * angle
    c, s = math.cos(half), math.sin(half)
    if kind is GateKind.RY:
        return np.array([c, s], dtype=np.complex128)
    if kind is GateKind.RX:
        return np.array([c, complex(0.0, -s)], dtype=np.complex128)
    return np.array([complex(c, -s), 0.0], dtype=np.complex128)  # RZ


def _product_state_prefix(
    gates: tuple[GateOp, ...], n_qubits: int
) -> tuple[np.ndarray | None, int]:
    """Consume a leading run of rotations on pairwise-distinct qubits.

    Starting from |0...0> such a prefix prepares a product state, which we
    materialise directly instead of sweeping the full vector once per gate.
    Returns (amplitudes, number_of_gates_consumed); (None, 0) if the first
    gate is not usable.
    """
    factors = [None] * n_qubits
    consumed = 0
    for gate in gates:
        if not gate.is_rotation or not 0 <= gate.target < n_qubits:
            break
        if factors[gate.target] is not None:
            break
        factors[gate.target] = _rotated_zero_qubit(gate.kind, gate.angle)
        consumed += 1
    if consumed == 0:
        return None, 0
    one = np.array([1.0, 0.0], dtype=np.complex128)
    amps = factors[n_qubits - 1] if factors[n_qubits - 1] is not None else one
    for q in range(n_qubits - 2, -1, -1):
        vec = factors[q] if factors[q] is not None else one
        amps = (amps[:, None] * vec[None, :]).reshape(-1)
    return amps, consumed


def run_circuit(spec, init: Statevector) -> Statevector:
    """Apply `spec`'s gates in list order starting from `init`."""
    if spec.n_qubits != init.n_qubits:
        raise QubitMismatch(
            f"circuit has {spec.n_qubits} qubits, state has {init.n_qubits}"
        )
    gates = spec.gates
    start = 0
    amps = None
    if gates and init.amplitudes[0] == 1.0 and not init.amplitudes[1:].any():
        amps, start = _product_state_prefix(gates, init.n_qubits)
    if amps is None:
        amps = init.amplitudes.copy()
    for gate in gates[start:]:
        _apply_gate_inplace(amps, init.n_qubits, gate)
    return Statevector(init.n_qubits, amps)
