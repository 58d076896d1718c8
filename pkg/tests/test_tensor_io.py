"""I/O tests: scaling on load, lossless NPY round trip, config schema errors."""
import csv
import json

import numpy as np
import pytest
from PIL import Image

from quanvkit import FeatureMap, ImageTensor, quanvolve, QuanvConfig
from quanvkit.errors import (
    CorruptFile,
    InvariantViolation,
    SchemaError,
    UnsupportedFormat,
    ValueOutOfRange,
)
from quanvkit.tensor_io import (
    CONFIG_SCHEMA,
    ExportFormat,
    grid_layout,
    load_feature_map,
    load_image,
    load_run_config,
    run_config_from_json,
    save_feature_map,
)


def minimal_config(**overrides):
    doc = {"schema": CONFIG_SCHEMA, "layers": [{"kernel_size": 2}]}
    doc.update(overrides)
    return doc


# --- image loading ---

def test_png_8bit_scaling(tmp_path):
    pixels = np.array([[0, 85], [170, 255]], dtype=np.uint8)
    path = tmp_path / "img.png"
    Image.fromarray(pixels, mode="L").save(path)
    img = load_image(path)
    np.testing.assert_allclose(
        img.data[:, :, 0], [[0.0, 85 / 255], [170 / 255, 1.0]], atol=1e-12
    )


def test_png_rgb_loads_three_channels(tmp_path):
    rgb = np.zeros((3, 2, 3), dtype=np.uint8)
    rgb[..., 1] = 128
    path = tmp_path / "img.png"
    Image.fromarray(rgb, mode="RGB").save(path)
    img = load_image(path)
    assert img.channels == 3
    assert img.data[0, 0, 1] == pytest.approx(128 / 255)


def test_png_16bit_scaling(tmp_path):
    pixels = np.array([[0, 65535], [32768, 1024]], dtype=np.uint16)
    path = tmp_path / "img16.png"
    Image.fromarray(pixels).save(path)
    img = load_image(path)
    assert img.data.max() == pytest.approx(1.0)
    assert img.data[1, 1, 0] == pytest.approx(1024 / 65535)


def test_npy_float_passthrough(tmp_path):
    path = tmp_path / "img.npy"
    np.save(path, np.full((4, 4), 0.5))
    img = load_image(path)
    assert img.data.shape == (4, 4, 1)
    assert (img.data == 0.5).all()


def test_npy_nan_is_corrupt(tmp_path):
    arr = np.zeros((3, 3))
    arr[1, 1] = np.nan
    path = tmp_path / "bad.npy"
    np.save(path, arr)
    with pytest.raises(CorruptFile):
        load_image(path)


def test_npy_out_of_range_needs_normalize(tmp_path):
    path = tmp_path / "wide.npy"
    np.save(path, np.linspace(-2.0, 5.0, 16).reshape(4, 4))
    with pytest.raises(ValueOutOfRange):
        load_image(path)
    img = load_image(path, normalize=True)
    assert img.data.min() == 0.0 and img.data.max() == 1.0


def test_npy_uint8_scaled(tmp_path):
    path = tmp_path / "u8.npy"
    np.save(path, np.array([[0, 255]], dtype=np.uint8))
    img = load_image(path)
    np.testing.assert_array_equal(img.data[:, :, 0], [[0.0, 1.0]])


def test_unknown_extension_rejected(tmp_path):
    path = tmp_path / "img.tif"
    path.write_bytes(b"nope")
    with pytest.raises(UnsupportedFormat):
        load_image(path)


def test_garbage_png_is_corrupt(tmp_path):
    path = tmp_path / "junk.png"
    path.write_bytes(b"not a png at all")
    with pytest.raises(CorruptFile):
        load_image(path)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_image(tmp_path / "absent.npy")


# --- feature map saving ---

def test_npy_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    fmap = FeatureMap(rng.uniform(-1, 1, size=(5, 4, 3)))
    path = tmp_path / "fm.npy"
    save_feature_map(fmap, path, ExportFormat.NPY)
    back = load_feature_map(path)
    assert back.data.tobytes() == fmap.data.tobytes()


def test_grid_layout_rule():
    assert grid_layout(12) == (3, 4)
    assert grid_layout(9) == (3, 3)
    assert grid_layout(1) == (1, 1)
    assert grid_layout(5) == (2, 3)


def test_png_grid_tiling_and_sidecar(tmp_path):
    rng = np.random.default_rng(1)
    data = rng.uniform(-1, 1, size=(4, 4, 12))
    data[:, :, 7] = 0.25  # constant channel
    path = tmp_path / "grid.png"
    save_feature_map(FeatureMap(data), path, "png")
    with Image.open(path) as img:
        assert img.size == (4 * 4, 3 * 4)  # (width, height) of 3x4 tile grid
    sidecar = (tmp_path / "grid.png.scale.txt").read_text().splitlines()
    assert sidecar[0] == "channel,min,max,note"
    assert len(sidecar) == 13
    assert sidecar[8].endswith("zero-dynamic-range")


def test_csv_export_round_trips(tmp_path):
    rng = np.random.default_rng(2)
    fmap = FeatureMap(rng.uniform(-1, 1, size=(3, 2, 4)))
    path = tmp_path / "fm.csv"
    save_feature_map(fmap, path, ExportFormat.CSV)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["height", "width", "channels"]
    assert rows[1] == ["3", "2", "4"]
    values = np.array(
        [[float(v) for v in row] for row in rows[2:]]
    ).reshape(3, 2, 4)
    assert values.tobytes() == fmap.data.tobytes()


# --- run configs ---

def test_minimal_config_defaults():
    config = run_config_from_json(minimal_config())
    layer = config.layers[0]
    assert layer.stride == 1
    assert layer.out_channels == 4
    assert layer.n_qubits == 4
    assert layer.circuit_kind.value == "random_layer"
    assert config.workers == 1
    assert config.export_format is ExportFormat.NPY


def test_config_invariant_reported_with_layer_path():
    doc = minimal_config(layers=[{"kernel_size": 3, "n_qubits": 4}])
    with pytest.raises(InvariantViolation, match=r"layers\[0\].*n_qubits < kernel_size"):
        run_config_from_json(doc)


def test_config_missing_schema():
    with pytest.raises(SchemaError, match="schema"):
        run_config_from_json({"layers": [{"kernel_size": 2}]})


def test_config_wrong_type_has_field_path():
    doc = minimal_config(layers=[{"kernel_size": "big"}])
    with pytest.raises(SchemaError, match=r"layers\[0\]\.kernel_size"):
        run_config_from_json(doc)


def test_config_unknown_field_rejected():
    doc = minimal_config(layers=[{"kernel_size": 2, "kernelsize": 3}])
    with pytest.raises(SchemaError, match="kernelsize"):
        run_config_from_json(doc)


def test_config_empty_layers_rejected():
    with pytest.raises(SchemaError, match="layers"):
        run_config_from_json(minimal_config(layers=[]))


def test_config_bad_circuit_kind():
    doc = minimal_config(layers=[{"kernel_size": 2, "circuit_kind": "magic"}])
    with pytest.raises(SchemaError, match="circuit_kind"):
        run_config_from_json(doc)


def test_load_run_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(minimal_config(workers=3)))
    config = load_run_config(path)
    assert config.workers == 3


def test_load_run_config_invalid_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{nope")
    with pytest.raises(SchemaError):
        load_run_config(path)


def test_committed_two_layer_config_parses(tmp_path):
    # mirror of the repo's EuroSAT-geometry config: 64x64x3 -> 4x4x12
    doc = {
        "schema": CONFIG_SCHEMA,
        "layers": [
            {"kernel_size": 4, "stride": 4, "n_qubits": 16, "out_channels": 4,
             "seed": 11, "n_rotations": 16, "n_entanglers": 8},
            {"kernel_size": 4, "stride": 4, "n_qubits": 16, "out_channels": 1,
             "seed": 12, "n_rotations": 16, "n_entanglers": 8},
        ],
    }
    config = run_config_from_json(doc)
    h = w = 64
    for layer in config.layers:
        h = (h - layer.kernel_size) // layer.stride + 1
        w = (w - layer.kernel_size) // layer.stride + 1
    channels = 3
    for layer in config.layers:
        channels *= layer.out_channels
    assert (h, w, channels) == (4, 4, 12)
