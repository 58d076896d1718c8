"""File formats: images in, feature maps out, run configs.

NPY (v1, float64) is the lossless interchange format; PNG grids are for
visual inspection only and CSV is a flat text export. Run configs are JSON
documents with schema id "quanvkit-config/1"; loaders reject anything they
cannot validate rather than silently repairing it (the explicit normalize
flag is the one sanctioned repair).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    CorruptFile,
    InvariantViolation,
    SchemaError,
    UnsupportedFormat,
    ValueOutOfRange,
)
from .quanv import CircuitKind, FeatureMap, ImageTensor, QuanvConfig

CONFIG_SCHEMA = "quanvkit-config/1"


class ExportFormat(Enum):
    NPY = "npy"
    PNG_GRID = "png"
    CSV = "csv"


@dataclass
class RunConfig:
    """Everything a pipeline run needs besides the input image itself."""

    layers: list[QuanvConfig]
    input: str | None = None
    output: str | None = None
    normalize: bool = False
    workers: int = 1
    export_format: ExportFormat = ExportFormat.NPY

    def __post_init__(self) -> None:
        if not self.layers:
            raise InvariantViolation("config needs at least one layer")
        if self.workers < 1:
            raise InvariantViolation(f"workers must be >= 1, got {self.workers}")


# --- images ---

def _image_from_png(path: Path, normalize: bool) -> ImageTensor:
    try:
        with Image.open(path) as img:
            mode = img.mode
            arr = np.asarray(img)
    except UnidentifiedImageError as exc:
        raise CorruptFile(f"{path}: not a decodable image") from exc
    if mode == "L":
        scale = 255.0
    elif mode in ("I;16", "I"):
        scale = 65535.0
    elif mode == "RGB":
        scale = 255.0
    else:
        raise UnsupportedFormat(
            f"{path}: unsupported PNG mode {mode}; need 8/16-bit grayscale or RGB"
        )
    return ImageTensor.from_array(arr.astype(np.float64) / scale, normalize=normalize)


def _image_from_npy(path: Path, normalize: bool) -> ImageTensor:
    try:
        arr = np.load(path, allow_pickle=False)
    except ValueError as exc:
        raise CorruptFile(f"{path}: cannot decode NPY payload") from exc
    if arr.ndim not in (2, 3):
        raise UnsupportedFormat(f"{path}: need (H, W) or (H, W, C), got {arr.shape}")
    if np.issubdtype(arr.dtype, np.floating):
        if not np.isfinite(arr).all():
            raise CorruptFile(f"{path}: array contains non-finite values")
        try:
            return ImageTensor.from_array(arr, normalize=normalize)
        except ValueOutOfRange as exc:
            raise ValueOutOfRange(
                f"{path}: {exc}; pass normalize to rescale float input"
            ) from exc
    if arr.dtype == np.uint8:
        return ImageTensor.from_array(arr.astype(np.float64) / 255.0)
    if arr.dtype == np.uint16:
        return ImageTensor.from_array(arr.astype(np.float64) / 65535.0)
    raise UnsupportedFormat(f"{path}: unsupported dtype {arr.dtype}")


def load_image(path: str | Path, normalize: bool = False) -> ImageTensor:
    """Load a PNG or NPY image, scaled to [0, 1]."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        return _image_from_png(path, normalize)
    if suffix == ".npy":
        return _image_from_npy(path, normalize)
    raise UnsupportedFormat(f"{path}: unsupported extension {suffix or '(none)'}")


# --- feature maps ---

def grid_layout(n_channels: int) -> tuple[int, int]:
    """(rows, cols) tiling for a channel grid: ceil(sqrt(C)) columns."""
    cols = math.ceil(math.sqrt(n_channels))
    rows = math.ceil(n_channels / cols)
    return rows, cols


def _save_png_grid(fmap: FeatureMap, path: Path) -> None:
    rows, cols = grid_layout(fmap.channels)
    h, w = fmap.height, fmap.width
    canvas = np.zeros((rows * h, cols * w), dtype=np.uint8)
    scale_lines = ["channel,min,max,note"]
    for ch in range(fmap.channels):
        tile = fmap.data[:, :, ch]
        lo, hi = float(tile.min()), float(tile.max())
        if hi > lo:
            scaled = np.round((tile - lo) / (hi - lo) * 255.0).astype(np.uint8)
            note = ""
        else:
            scaled = np.full((h, w), 128, dtype=np.uint8)
            note = "zero-dynamic-range"
        r, c = divmod(ch, cols)
        canvas[r * h : (r + 1) * h, c * w : (c + 1) * w] = scaled
        scale_lines.append(f"{ch},{lo!r},{hi!r},{note}")
    Image.fromarray(canvas, mode="L").save(path)
    sidecar = path.with_name(path.name + ".scale.txt")
    sidecar.write_text("\n".join(scale_lines) + "\n")


def _save_csv(fmap: FeatureMap, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["height", "width", "channels"])
        writer.writerow([fmap.height, fmap.width, fmap.channels])
        for r in range(fmap.height):
            writer.writerow([repr(float(v)) for v in fmap.data[r].ravel()])


def save_feature_map(
    fmap: FeatureMap, path: str | Path, export_format: ExportFormat | str = ExportFormat.NPY
) -> None:
    """Write a feature map; NPY is lossless, PNG/CSV are exports."""
    path = Path(path)
    if isinstance(export_format, str):
        export_format = ExportFormat(export_format)
    if export_format is ExportFormat.NPY:
        np.save(path, fmap.data.astype(np.float64))
    elif export_format is ExportFormat.PNG_GRID:
        _save_png_grid(fmap, path)
    else:
        _save_csv(fmap, path)


def load_feature_map(path: str | Path) -> FeatureMap:
    """Read back a feature map stored as NPY."""
    arr = np.load(Path(path), allow_pickle=False)
    if arr.ndim != 3:
        raise UnsupportedFormat(f"{path}: expected a 3-d feature map, got {arr.shape}")
    return FeatureMap(arr)


# --- run configs ---

_LAYER_KEYS = {
    "kernel_size", "stride", "n_qubits", "out_channels",
    "circuit_kind", "seed", "n_rotations", "n_entanglers",
}
_TOP_KEYS = {"schema", "layers", "input", "output", "normalize", "workers", "format"}


def _expect(doc: dict, key: str, types, path: str, default=None, required=False):
    if key not in doc:
        if required:
            raise SchemaError(f"{path}{key}: missing required field")
        return default
    value = doc[key]
    if value is None and not required:
        return default
    allowed = types if isinstance(types, tuple) else (types,)
    # bool is an int subclass; only accept it where bool is asked for
    if not isinstance(value, allowed) or (isinstance(value, bool) and bool not in allowed):
        names = "/".join(t.__name__ for t in allowed)
        raise SchemaError(f"{path}{key}: expected {names}, got {type(value).__name__}")
    return value


def _layer_from_json(doc: dict, path: str) -> QuanvConfig:
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected an object, got {type(doc).__name__}")
    unknown = set(doc) - _LAYER_KEYS
    if unknown:
        raise SchemaError(f"{path}.{sorted(unknown)[0]}: unknown field")
    kind_name = _expect(doc, "circuit_kind", str, f"{path}.", default="random_layer")
    try:
        kind = CircuitKind(kind_name)
    except ValueError:
        raise SchemaError(
            f"{path}.circuit_kind: unknown kind {kind_name!r}; "
            f"expected one of {[k.value for k in CircuitKind]}"
        ) from None
    try:
        return QuanvConfig(
            kernel_size=_expect(doc, "kernel_size", int, f"{path}.", required=True),
            stride=_expect(doc, "stride", int, f"{path}.", default=1),
            n_qubits=_expect(doc, "n_qubits", int, f"{path}."),
            out_channels=_expect(doc, "out_channels", int, f"{path}."),
            circuit_kind=kind,
            seed=_expect(doc, "seed", int, f"{path}.", default=0),
            n_rotations=_expect(doc, "n_rotations", int, f"{path}."),
            n_entanglers=_expect(doc, "n_entanglers", int, f"{path}."),
        )
    except InvariantViolation as exc:
        raise InvariantViolation(f"{path}: {exc}") from exc


def run_config_from_json(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise SchemaError(f"top level: expected an object, got {type(doc).__name__}")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaError(f"{sorted(unknown)[0]}: unknown field")
    schema = _expect(doc, "schema", str, "", required=True)
    if schema != CONFIG_SCHEMA:
        raise SchemaError(f"schema: expected {CONFIG_SCHEMA!r}, got {schema!r}")
    layers_doc = _expect(doc, "layers", list, "", required=True)
    if not layers_doc:
        raise SchemaError("layers: must not be empty")
    layers = [
        _layer_from_json(layer, f"layers[{i}]") for i, layer in enumerate(layers_doc)
    ]
    fmt_name = _expect(doc, "format", str, "", default="npy")
    try:
        export_format = ExportFormat(fmt_name)
    except ValueError:
        raise SchemaError(
            f"format: unknown format {fmt_name!r}; "
            f"expected one of {[f.value for f in ExportFormat]}"
        ) from None
    config = RunConfig(
        layers=layers,
        input=_expect(doc, "input", str, ""),
        output=_expect(doc, "output", str, ""),
        normalize=_expect(doc, "normalize", bool, "", default=False),
        workers=_expect(doc, "workers", int, "", default=1),
        export_format=export_format,
    )
    return config


def load_run_config(path: str | Path) -> RunConfig:
    """Parse and fully validate a quanvkit-config/1 JSON document."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return run_config_from_json(doc)


def run_config_to_json(config: RunConfig) -> dict:
    return {
        "schema": CONFIG_SCHEMA,
        "layers": [
            {
                "kernel_size": layer.kernel_size,
                "stride": layer.stride,
                "n_qubits": layer.n_qubits,
                "out_channels": layer.out_channels,
                "circuit_kind": layer.circuit_kind.value,
                "seed": layer.seed,
                "n_rotations": layer.n_rotations,
                "n_entanglers": layer.n_entanglers,
            }
            for layer in config.layers
        ],
        "input": config.input,
        "output": config.output,
        "normalize": config.normalize,
        "workers": config.workers,
        "format": config.export_format.value,
    }
