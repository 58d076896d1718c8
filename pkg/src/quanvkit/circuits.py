"""Circuit families used by quanvolution.

Three constructions: the pixel encoder (one Ry per pixel), a seeded random
layer of rotations and CNOTs, and a ring-entangled variant that touches
every qubit. Generated circuits are pure functions of their arguments;
randomness comes from numpy's PCG64 (`np.random.default_rng(seed)`) with
one fresh stream per construction call, and golden-file tests pin the
exact gate lists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    InvariantViolation,
    ParamIndexOutOfRange,
    QubitMismatch,
    TooFewQubits,
    ValueOutOfRange,
)
from .qsim import GateKind, GateOp, ROTATION_KINDS

TWO_PI = 2.0 * math.pi


class ScanOrder(Enum):
    RASTER_ROW_MAJOR = "raster_row_major"


@dataclass(frozen=True)
class PatchVector:
    """Flattened kernel-sized image patch, raster (row-major) order."""

    values: tuple[float, ...]
    kernel_size: int
    scan_order: ScanOrder = ScanOrder.RASTER_ROW_MAJOR

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != self.kernel_size**2:
            raise InvariantViolation(
                f"patch of kernel size {self.kernel_size} needs "
                f"{self.kernel_size ** 2} values, got {len(self.values)}"
            )
        for v in self.values:
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueOutOfRange(f"patch value {v} outside [0, 1]")


@dataclass(frozen=True)
class CircuitSpec:
    """Immutable ordered gate list.

    `param_indices` holds the gate positions whose angles count as tunable
    parameters (ansatz rotations); encoding rotations are pixel-driven and
    never appear there. `seed` records the PRNG seed for generated circuits.
    """

    n_qubits: int
    gates: tuple[GateOp, ...] = ()
    param_indices: tuple[int, ...] = ()
    seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "param_indices", tuple(self.param_indices))
        for gate in self.gates:
            if not 0 <= gate.target < self.n_qubits:
                raise InvariantViolation(
                    f"gate target {gate.target} invalid for {self.n_qubits} qubits"
                )
            if gate.control is not None and not 0 <= gate.control < self.n_qubits:
                raise InvariantViolation(
                    f"gate control {gate.control} invalid for {self.n_qubits} qubits"
                )
        for idx in self.param_indices:
            if not 0 <= idx < len(self.gates) or not self.gates[idx].is_rotation:
                raise InvariantViolation(
                    f"param index {idx} does not address a rotation gate"
                )

    @property
    def n_params(self) -> int:
        return len(self.param_indices)

    def touched_qubits(self) -> set[int]:
        touched: set[int] = set()
        for gate in self.gates:
            touched.add(gate.target)
            if gate.control is not None:
                touched.add(gate.control)
        return touched


def encode_patch(patch: PatchVector, n_qubits: int) -> CircuitSpec:
    """Angle-encode a patch: Ry(pi * x_j) on qubit j, ancillas untouched."""
    k2 = patch.kernel_size**2
    if n_qubits < k2:
        raise TooFewQubits(
            f"encoding a {patch.kernel_size}x{patch.kernel_size} patch needs at "
            f"least {k2} qubits, got {n_qubits}"
        )
    gates = tuple(
        GateOp(GateKind.RY, target=j, angle=math.pi * patch.values[j])
        for j in range(k2)
    )
    return CircuitSpec(n_qubits=n_qubits, gates=gates)


def _interleave(rotations: list[GateOp], entanglers: list[GateOp]) -> tuple[GateOp, ...]:
    """Evenly merge two draw-ordered gate lists, preserving each one's order."""
    total = len(rotations) + len(entanglers)
    n_ent = len(entanglers)
    out: list[GateOp] = []
    ri = ei = 0
    for slot in range(total):
        if n_ent and (slot + 1) * n_ent // total > slot * n_ent // total:
            out.append(entanglers[ei])
            ei += 1
        else:
            out.append(rotations[ri])
            ri += 1
    return tuple(out)


def random_layer(
    seed: int, n_qubits: int, n_rotations: int, n_entanglers: int
) -> CircuitSpec:
    """Seeded random ansatz: rotations evenly interleaved with CNOTs.

    Draw order (one PCG64 stream per call): first `n_rotations` triples of
    (kind uniform over Rx/Ry/Rz, target uniform over qubits, angle uniform
    over [0, 2pi)), then `n_entanglers` CNOT pairs redrawn until
    control != target.
    """
    if n_rotations < 0 or n_entanglers < 0:
        raise InvariantViolation("gate counts must be non-negative")
    if n_entanglers > 0 and n_qubits < 2:
        raise TooFewQubits("CNOTs need at least 2 qubits")
    rng = np.random.default_rng(seed)
    rotations = [
        GateOp(
            ROTATION_KINDS[int(rng.integers(3))],
            target=int(rng.integers(n_qubits)),
            angle=float(rng.uniform(0.0, TWO_PI)),
        )
        for _ in range(n_rotations)
    ]
    entanglers = []
    for _ in range(n_entanglers):
        while True:
            control = int(rng.integers(n_qubits))
            target = int(rng.integers(n_qubits))
            if control != target:
                break
        entanglers.append(GateOp(GateKind.CNOT, target=target, control=control))
    gates = _interleave(rotations, entanglers)
    params = tuple(i for i, g in enumerate(gates) if g.is_rotation)
    return CircuitSpec(n_qubits=n_qubits, gates=gates, param_indices=params, seed=seed)


def entangled_circuit(seed: int, n_qubits: int, n_rotations: int) -> CircuitSpec:
    """Ring of CNOTs over all qubits followed by a rotations-only random layer."""
    if n_qubits < 2:
        raise TooFewQubits("entangled circuit needs at least 2 qubits")
    ring = tuple(
        GateOp(GateKind.CNOT, target=(q + 1) % n_qubits, control=q)
        for q in range(n_qubits)
    )
    tail = random_layer(seed, n_qubits, n_rotations, 0)
    gates = ring + tail.gates
    params = tuple(len(ring) + i for i in tail.param_indices)
    return CircuitSpec(n_qubits=n_qubits, gates=gates, param_indices=params, seed=seed)


def concat(a: CircuitSpec, b: CircuitSpec) -> CircuitSpec:
    """Gate list of `a` followed by `b`; parameter indices are re-based."""
    if a.n_qubits != b.n_qubits:
        raise QubitMismatch(
            f"cannot concat circuits on {a.n_qubits} and {b.n_qubits} qubits"
        )
    offset = len(a.gates)
    return CircuitSpec(
        n_qubits=a.n_qubits,
        gates=a.gates + b.gates,
        param_indices=a.param_indices + tuple(offset + i for i in b.param_indices),
        seed=a.seed if a.seed is not None else b.seed,
    )


def shift_parameter(spec: CircuitSpec, param_idx: int, delta: float) -> CircuitSpec:
    """Copy of `spec` with the param_idx-th tunable angle increased by `delta`."""
    if not 0 <= param_idx < len(spec.param_indices):
        raise ParamIndexOutOfRange(
            f"param index {param_idx} out of range for {len(spec.param_indices)} params"
        )
    gate_idx = spec.param_indices[param_idx]
    old = spec.gates[gate_idx]
    shifted = GateOp(old.kind, target=old.target, angle=old.angle + delta)
    gates = spec.gates[:gate_idx] + (shifted,) + spec.gates[gate_idx + 1 :]
    return CircuitSpec(
        n_qubits=spec.n_qubits,
        gates=gates,
        param_indices=spec.param_indices,
        seed=spec.seed,
    )


def spec_to_json(spec: CircuitSpec) -> dict:
    """JSON-ready dict: n_qubits, seed, gates[{kind,target,control,angle}]."""
    return {
        "n_qubits": spec.n_qubits,
        "seed": spec.seed,
        "gates": [
            {
                "kind": g.kind.value,
                "target": g.target,
                "control": g.control,
                "angle": g.angle,
            }
            for g in spec.gates
        ],
        "param_indices": list(spec.param_indices),
    }


def spec_from_json(doc: dict) -> CircuitSpec:
    """Inverse of spec_to_json; missing param_indices default to all rotations."""
    gates = tuple(
        GateOp(
            GateKind(g["kind"]),
            target=int(g["target"]),
            control=None if g.get("control") is None else int(g["control"]),
            angle=None if g.get("angle") is None else float(g["angle"]),
        )
        for g in doc["gates"]
    )
    params = doc.get("param_indices")
    if params is None:
        params = [i for i, g in enumerate(gates) if g.is_rotation]
    return CircuitSpec(
        n_qubits=int(doc["n_qubits"]),
        gates=gates,
        param_indices=tuple(int(i) for i in params),
        seed=None if doc.get("seed") is None else int(doc["seed"]),
    )
