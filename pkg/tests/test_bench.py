"""Benchmark harness tests with synthetic records and one tiny real sweep."""
import pytest

from quanvkit.bench import (
    AxisTrend,
    BenchRecord,
    CSV_COLUMNS,
    SweepGrid,
    check_trends,
    default_grids,
    expected_evals,
    read_records_csv,
    run_sweep,
    write_gnuplot_script,
    write_records_csv,
)
from quanvkit.errors import InsufficientData, InvariantViolation


def record(**kw):
    base = dict(image_size=32, kernel_size=2, stride=2, n_qubits=4,
                out_channels=4, workers=1, wall_time=1.0, time_stddev=0.001,
                circuit_evals=256, repeats=5)
    base.update(kw)
    return BenchRecord(**base)


# --- run_sweep ---

def test_tiny_sweep_counts_and_order():
    grid = SweepGrid((8,), (2,), (1, 2), (4,), (2,))
    records = run_sweep(grid, repeats=3)
    assert [r.stride for r in records] == [1, 2]
    for r in records:
        assert r.circuit_evals == expected_evals(8, 2, r.stride, 1)
        assert r.wall_time > 0
        assert r.repeats == 3


def test_invalid_grid_point_skipped(caplog):
    # n_qubits=4 cannot host a 3x3 kernel; the 2x2 point must survive
    grid = SweepGrid((8,), (2, 3), (1,), (4,), (1,))
    with caplog.at_level("WARNING"):
        records = run_sweep(grid, repeats=3)
    assert [r.kernel_size for r in records] == [2]
    assert "skipping" in caplog.text


def test_repeats_floor_enforced():
    with pytest.raises(InvariantViolation):
        run_sweep(SweepGrid((8,), (2,), (1,), (4,), (1,)), repeats=2)


def test_default_grids_cover_all_axes():
    grids = list(default_grids())
    assert len(grids) == 4
    axes_with_spread = set()
    for grid in grids:
        if len(grid.strides) > 1:
            axes_with_spread.add("stride")
        if len(grid.image_sizes) > 1:
            axes_with_spread.add("image_size")
        if len(grid.kernel_sizes) > 1:
            axes_with_spread.add("kernel_size")
        if len(grid.n_qubits) > 1:
            axes_with_spread.add("n_qubits")
    assert axes_with_spread == {"stride", "image_size", "kernel_size", "n_qubits"}


# --- check_trends ---

def test_trends_pass_on_well_behaved_records():
    records = [
        record(stride=1, wall_time=4.0),
        record(stride=2, wall_time=1.0),
        record(stride=4, wall_time=0.3),
        record(image_size=8, wall_time=0.1),
        record(image_size=16, wall_time=0.3),
        record(image_size=32, wall_time=1.0),
    ]
    report = check_trends(records)
    by_axis = {a.axis: a for a in report.axes}
    assert by_axis["stride"].status == "pass"
    assert by_axis["image_size"].status == "pass"
    assert by_axis["kernel_size"].status == "insufficient"
    assert report.passed


def test_trends_fail_identifies_pair():
    records = [
        record(stride=1, wall_time=1.0),
        record(stride=2, wall_time=5.0),  # violates: time must not rise with stride
        record(stride=4, wall_time=0.2),
    ]
    report = check_trends(records)
    trend = next(a for a in report.axes if a.axis == "stride")
    assert trend.status == "fail"
    lo, hi = trend.violation
    assert (lo.stride, hi.stride) == (1, 2)
    assert not report.passed


def test_trends_tolerate_noise_band():
    # 1ms regression inside a 2x pooled-stddev band is not a violation
    records = [
        record(stride=1, wall_time=1.000, time_stddev=0.002),
        record(stride=2, wall_time=1.001, time_stddev=0.002),
    ]
    report = check_trends(records)
    assert next(a for a in report.axes if a.axis == "stride").status == "pass"


def test_trends_require_some_data():
    with pytest.raises(InsufficientData):
        check_trends([record()])
    with pytest.raises(InsufficientData):
        check_trends([])


def test_trends_groups_do_not_mix_other_axes():
    # different out_channels: not comparable along the stride axis
    records = [
        record(stride=1, out_channels=1, wall_time=1.0),
        record(stride=2, out_channels=2, wall_time=9.0),
        record(image_size=8, wall_time=0.5),
        record(image_size=64, wall_time=2.0),
    ]
    report = check_trends(records)
    assert next(a for a in report.axes if a.axis == "stride").status == "insufficient"
    assert next(a for a in report.axes if a.axis == "image_size").status == "pass"


def test_summary_mentions_every_axis():
    records = [record(stride=1), record(stride=2, wall_time=0.5)]
    text = check_trends(records).summary()
    for axis in ("stride", "image_size", "kernel_size", "n_qubits"):
        assert axis in text


# --- CSV ---

def test_csv_round_trip(tmp_path):
    records = [record(), record(stride=4, wall_time=0.25, time_stddev=0.0125)]
    path = tmp_path / "bench.csv"
    write_records_csv(records, path)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)
    assert read_records_csv(path) == records


def test_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("nope,nope\n1,2\n")
    with pytest.raises(InvariantViolation):
        read_records_csv(path)


def test_gnuplot_script_emission(tmp_path):
    records = [record(stride=1), record(stride=2, wall_time=0.5)]
    csv_path = tmp_path / "bench.csv"
    write_records_csv(records, csv_path)
    script = tmp_path / "bench.gp"
    write_gnuplot_script(csv_path, script, x_axis="stride")
    text = script.read_text()
    assert "bench.csv" in text and "using 3:7" in text
