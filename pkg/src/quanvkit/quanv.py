"""The quanvolution operator.

Slides a quantum kernel over an image: each kernel-sized patch is angle
encoded, pushed through a frozen ansatz, and measured qubit by qubit, so
every output position yields one value per requested output channel. Input
channels are processed independently and their outputs concatenated, giving
C * out_channels feature channels. Only valid padding is supported.

The ansatz is fixed per config (lazy-training regime: never optimised) and
cached; only the encoding prefix changes from patch to patch. The
parameter-shift gradient of a single kernel evaluation is provided as an
operator, without any training loop around it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from joblib import Parallel, delayed

from .circuits import (
    CircuitSpec,
    PatchVector,
    concat,
    encode_patch,
    entangled_circuit,
    random_layer,
    shift_parameter,
)
from .errors import (
    ImageSmallerThanKernel,
    IndexOutOfRange,
    InvariantViolation,
    LayerShapeUnderflow,
    ParamIndexOutOfRange,
    ValueOutOfRange,
)
from .qsim import MAX_QUBITS, expectation_z, new_zero_state, run_circuit


class CircuitKind(Enum):
    RANDOM_LAYER = "random_layer"
    ENTANGLED = "entangled"


@dataclass(frozen=True)
class QuanvConfig:
    """One quanvolution layer: kernel geometry plus frozen-circuit recipe.

    Omitted fields get documented defaults: n_qubits = kernel_size**2,
    out_channels = kernel_size**2, n_rotations = 2 * n_qubits and
    n_entanglers = n_qubits (0 when only one qubit is available).
    """

    kernel_size: int
    stride: int = 1
    n_qubits: int | None = None
    out_channels: int | None = None
    circuit_kind: CircuitKind = CircuitKind.RANDOM_LAYER
    seed: int = 0
    n_rotations: int | None = None
    n_entanglers: int | None = None

    def __post_init__(self) -> None:
        if self.kernel_size < 1:
            raise InvariantViolation(f"kernel_size must be >= 1, got {self.kernel_size}")
        if self.stride < 1:
            raise InvariantViolation(f"stride must be >= 1, got {self.stride}")
        k2 = self.kernel_size**2
        if self.n_qubits is None:
            object.__setattr__(self, "n_qubits", k2)
        if self.out_channels is None:
            object.__setattr__(self, "out_channels", k2)
        if self.n_rotations is None:
            object.__setattr__(self, "n_rotations", 2 * self.n_qubits)
        if self.n_entanglers is None:
            object.__setattr__(
                self, "n_entanglers", self.n_qubits if self.n_qubits >= 2 else 0
            )
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise InvariantViolation(
                f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        if self.n_qubits < k2:
            raise InvariantViolation(
                f"n_qubits < kernel_size**2 ({self.n_qubits} < {k2})"
            )
        if not 1 <= self.out_channels <= self.n_qubits:
            raise InvariantViolation(
                "out_channels must be in [1, n_qubits], got "
                f"{self.out_channels} with {self.n_qubits} qubits"
            )
        if not 0 <= self.seed < 2**64:
            raise InvariantViolation("seed must fit an unsigned 64-bit integer")
        if self.n_rotations < 0 or self.n_entanglers < 0:
            raise InvariantViolation("gate counts must be non-negative")


@dataclass(frozen=True)
class ImageTensor:
    """H x W x C image with float64 values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise InvariantViolation(f"image must be H x W x C, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueOutOfRange("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueOutOfRange(
                f"image values outside [0, 1]: min {arr.min():.4g}, max {arr.max():.4g}"
            )
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @classmethod
    def from_array(cls, arr: np.ndarray, normalize: bool = False) -> "ImageTensor":
        """Coerce (H, W) or (H, W, C) data; min-max rescale when `normalize`."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if normalize and arr.size:
            lo, hi = float(arr.min()), float(arr.max())
            arr = (arr - lo) / (hi - lo) if hi > lo else np.zeros_like(arr)
        return cls(arr)


@dataclass(frozen=True)
class FeatureMap:
    """H' x W' x C' grid of Z-expectations, values in [-1, 1]."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise InvariantViolation(f"feature map must be 3-d, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueOutOfRange("feature map contains non-finite values")
        if arr.min() < -1.0 or arr.max() > 1.0:
            raise ValueOutOfRange("feature map values outside [-1, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass
class RunStats:
    """Mutable counters a caller can pass in to instrument a run."""

    circuit_evals: int = 0


def output_shape(height: int, width: int, config: QuanvConfig) -> tuple[int, int]:
    k, s = config.kernel_size, config.stride
    return (height - k) // s + 1, (width - k) // s + 1


@lru_cache(maxsize=128)
def _cached_ansatz(
    kind: CircuitKind, seed: int, n_qubits: int, n_rotations: int, n_entanglers: int
) -> CircuitSpec:
    if kind is CircuitKind.ENTANGLED:
        return entangled_circuit(seed, n_qubits, n_rotations)
    return random_layer(seed, n_qubits, n_rotations, n_entanglers)


def ansatz_for(config: QuanvConfig) -> CircuitSpec:
    """The frozen ansatz a config describes (built once, then cached)."""
    return _cached_ansatz(
        config.circuit_kind,
        config.seed,
        config.n_qubits,
        config.n_rotations,
        config.n_entanglers,
    )


def _eval_encoded(
    values: tuple[float, ...], kernel_size: int, config: QuanvConfig, ansatz: CircuitSpec
) -> np.ndarray:
    patch = PatchVector(values, kernel_size)
    circuit = concat(encode_patch(patch, config.n_qubits), ansatz)
    state = run_circuit(circuit, new_zero_state(config.n_qubits))
    return np.array(
        [expectation_z(state, q) for q in range(config.out_channels)], dtype=np.float64
    )


def kernel_eval(patch: PatchVector, config: QuanvConfig) -> np.ndarray:
    """Evaluate the quantum kernel on one patch: out_channels Z-expectations."""
    if patch.kernel_size != config.kernel_size:
        raise InvariantViolation(
            f"patch kernel size {patch.kernel_size} does not match config "
            f"kernel size {config.kernel_size}"
        )
    return _eval_encoded(patch.values, patch.kernel_size, config, ansatz_for(config))


def _eval_rows(
    image_data: np.ndarray, config: QuanvConfig, channel: int, row0: int, row1: int
) -> tuple[np.ndarray, int]:
    """Evaluate output rows [row0, row1) of one input channel.

    Shared by the serial and parallel paths so both perform identical
    floating-point work patch by patch.
    """
    k, s = config.kernel_size, config.stride
    _, out_w = output_shape(image_data.shape[0], image_data.shape[1], config)
    ansatz = ansatz_for(config)
    block = np.empty((row1 - row0, out_w, config.out_channels), dtype=np.float64)
    plane = image_data[:, :, channel]
    for m in range(row0, row1):
        top = m * s
        for n in range(out_w):
            left = n * s
            values = tuple(plane[top : top + k, left : left + k].ravel())
            block[m - row0, n] = _eval_encoded(values, k, config, ansatz)
    return block, (row1 - row0) * out_w


def _check_image_fits(image: ImageTensor, config: QuanvConfig) -> None:
    if image.height < config.kernel_size or image.width < config.kernel_size:
        raise ImageSmallerThanKernel(
            f"image {image.height}x{image.width} smaller than "
            f"{config.kernel_size}x{config.kernel_size} kernel"
        )


def quanvolve(
    image: ImageTensor, config: QuanvConfig, stats: RunStats | None = None
) -> FeatureMap:
    """Apply the quantum kernel at every valid position of every channel."""
    _check_image_fits(image, config)
    out_h, out_w = output_shape(image.height, image.width, config)
    f = config.out_channels
    out = np.empty((out_h, out_w, image.channels * f), dtype=np.float64)
    evals = 0
    for c in range(image.channels):
        block, n_evals = _eval_rows(image.data, config, c, 0, out_h)
        out[:, :, c * f : (c + 1) * f] = block
        evals += n_evals
    if stats is not None:
        stats.circuit_evals += evals
    return FeatureMap(out)


def _row_blocks(out_h: int, n_blocks: int) -> list[tuple[int, int]]:
    n_blocks = max(1, min(n_blocks, out_h))
    bounds = np.linspace(0, out_h, n_blocks + 1, dtype=int)
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(n_blocks)]


def quanvolve_parallel(
    image: ImageTensor,
    config: QuanvConfig,
    workers: int,
    stats: RunStats | None = None,
) -> FeatureMap:
    """quanvolve with output rows fanned out over a process pool.

    Patches are independent and each one is computed with the same
    fixed-order operations as the serial path, so the result is
    bit-identical to `quanvolve` for any worker count.
    """
    if workers < 1:
        raise InvariantViolation(f"workers must be >= 1, got {workers}")
    if workers == 1:
        return quanvolve(image, config, stats)
    _check_image_fits(image, config)
    out_h, out_w = output_shape(image.height, image.width, config)
    f = config.out_channels
    tasks = [
        (c, r0, r1)
        for c in range(image.channels)
        for r0, r1 in _row_blocks(out_h, workers)
    ]
    results = Parallel(n_jobs=workers, backend="loky")(
        delayed(_eval_rows)(image.data, config, c, r0, r1) for c, r0, r1 in tasks
    )
    out = np.empty((out_h, out_w, image.channels * f), dtype=np.float64)
    evals = 0
    for (c, r0, r1), (block, n_evals) in zip(tasks, results):
        out[r0:r1, :, c * f : (c + 1) * f] = block
        evals += n_evals
    if stats is not None:
        stats.circuit_evals += evals
    return FeatureMap(out)


def rescale_to_unit(fmap: FeatureMap) -> ImageTensor:
    """Map feature values from [-1, 1] to [0, 1] so they can be re-encoded."""
    return ImageTensor((fmap.data + 1.0) / 2.0)


def stack_layers(
    image: ImageTensor,
    configs: list[QuanvConfig],
    workers: int = 1,
    stats: RunStats | None = None,
) -> FeatureMap:
    """Apply quanvolution layers in sequence.

    Between layers the [-1, 1] expectations are rescaled to [0, 1] via
    v -> (v + 1) / 2 so they are valid encoder inputs; the final layer's
    output is returned unrescaled.
    """
    if not configs:
        raise InvariantViolation("stack_layers needs at least one layer config")
    current = image
    fmap: FeatureMap | None = None
    for i, config in enumerate(configs):
        if current.height < config.kernel_size or current.width < config.kernel_size:
            raise LayerShapeUnderflow(
                f"layer {i} input {current.height}x{current.width} smaller than "
                f"kernel {config.kernel_size}"
            )
        if workers > 1:
            fmap = quanvolve_parallel(current, config, workers, stats)
        else:
            fmap = quanvolve(current, config, stats)
        if i + 1 < len(configs):
            current = rescale_to_unit(fmap)
    return fmap


def parameter_shift_gradient(
    patch: PatchVector, config: QuanvConfig, param_idx: int, out_channel: int
) -> float:
    """Exact gradient of one kernel output w.r.t. one ansatz angle.

    Parameter-shift rule for half-angle rotations:
    grad = (f(theta + pi/2) - f(theta - pi/2)) / 2.
    """
    if not 0 <= out_channel < config.out_channels:
        raise IndexOutOfRange(
            f"out_channel {out_channel} out of range for {config.out_channels} channels"
        )
    ansatz = ansatz_for(config)
    if not 0 <= param_idx < ansatz.n_params:
        raise ParamIndexOutOfRange(
            f"param index {param_idx} out of range for {ansatz.n_params} ansatz params"
        )
    plus = _eval_encoded(
        patch.values, patch.kernel_size, config,
        shift_parameter(ansatz, param_idx, math.pi / 2),
    )
    minus = _eval_encoded(
        patch.values, patch.kernel_size, config,
        shift_parameter(ansatz, param_idx, -math.pi / 2),
    )
    return 0.5 * (float(plus[out_channel]) - float(minus[out_channel]))
