"""Processing-time sweeps over the quanvolution parameter space.

Each grid point is timed on a synthetic seeded-noise image (timings are
data independent in an exact simulator) with one untimed warmup run
followed by `repeats` timed runs; the median and sample stddev go into the
record. Trend checks assert the expected monotone directions — time falls
with stride, rises with image size, kernel size and qubit count — inside a
noise band of twice the pooled stddev.
"""
from __future__ import annotations

import csv
import itertools
import logging
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InsufficientData, InvalidGridPoint, InvariantViolation, QuanvKitError
from .quanv import ImageTensor, QuanvConfig, RunStats, quanvolve, quanvolve_parallel

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "image_size", "kernel_size", "stride", "n_qubits", "out_channels",
    "workers", "median_s", "stddev_s", "circuit_evals", "repeats",
)

#: axis name -> expected direction of median wall time along it
TREND_AXES = {
    "stride": "non_increasing",
    "image_size": "non_decreasing",
    "kernel_size": "non_decreasing",
    "n_qubits": "non_decreasing",
}


@dataclass(frozen=True)
class BenchRecord:
    image_size: int
    kernel_size: int
    stride: int
    n_qubits: int
    out_channels: int
    workers: int
    wall_time: float  # median over repeats, seconds
    time_stddev: float
    circuit_evals: int
    repeats: int


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian sweep; iteration order follows the field order here."""

    image_sizes: tuple[int, ...]
    kernel_sizes: tuple[int, ...]
    strides: tuple[int, ...]
    n_qubits: tuple[int, ...]
    out_channels: tuple[int, ...]
    workers: tuple[int, ...] = (1,)
    channels: int = 1
    image_seed: int = 0
    circuit_seed: int = 0

    def points(self):
        return itertools.product(
            self.image_sizes, self.kernel_sizes, self.strides,
            self.n_qubits, self.out_channels, self.workers,
        )


def default_grids() -> list[SweepGrid]:
    """One single-axis sweep per trend axis, sized for quick wall clocks."""
    return [
        SweepGrid((32,), (2,), (1, 2, 4), (4,), (4,)),
        SweepGrid((8, 16, 32, 64), (2,), (2,), (4,), (4,)),
        SweepGrid((16,), (1, 2, 3, 4), (4,), (16,), (1,)),
        SweepGrid((16,), (2,), (2,), (4, 8, 12, 16), (4,)),
    ]


def expected_evals(image_size: int, kernel_size: int, stride: int, channels: int) -> int:
    side = (image_size - kernel_size) // stride + 1
    return side * side * channels


def _time_point(
    image: ImageTensor, config: QuanvConfig, workers: int, repeats: int
) -> tuple[float, float, int]:
    def run() -> int:
        stats = RunStats()
        if workers > 1:
            quanvolve_parallel(image, config, workers, stats)
        else:
            quanvolve(image, config, stats)
        return stats.circuit_evals

    evals = run()  # warmup: builds the ansatz cache / process pool
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        run()
        times.append(time.perf_counter() - start)
    return statistics.median(times), statistics.stdev(times), evals


def run_sweep(grid: SweepGrid, repeats: int = 5) -> list[BenchRecord]:
    """Time every valid grid point; invalid points are logged and skipped."""
    if repeats < 3:
        raise InvariantViolation(f"repeats must be >= 3, got {repeats}")
    records = []
    images: dict[int, ImageTensor] = {}
    for size, kernel, stride, qubits, out_ch, workers in grid.points():
        try:
            if size < kernel:
                raise InvalidGridPoint(f"image {size} smaller than kernel {kernel}")
            try:
                config = QuanvConfig(
                    kernel_size=kernel, stride=stride, n_qubits=qubits,
                    out_channels=out_ch, seed=grid.circuit_seed,
                )
            except QuanvKitError as exc:
                raise InvalidGridPoint(str(exc)) from exc
            if size not in images:
                rng = np.random.default_rng(grid.image_seed)
                images[size] = ImageTensor(
                    rng.uniform(size=(size, size, grid.channels))
                )
            median, stddev, evals = _time_point(images[size], config, workers, repeats)
            want = expected_evals(size, kernel, stride, grid.channels)
            if evals != want:
                raise InvariantViolation(
                    f"instrumented evals {evals} != closed-form count {want}"
                )
            records.append(
                BenchRecord(size, kernel, stride, qubits, out_ch, workers,
                            median, stddev, evals, repeats)
            )
        except InvalidGridPoint as exc:
            logger.warning("skipping grid point %s: %s",
                           (size, kernel, stride, qubits, out_ch, workers), exc)
    return records


# --- trend checking ---

@dataclass(frozen=True)
class AxisTrend:
    axis: str
    direction: str
    status: str  # "pass" | "fail" | "insufficient"
    violation: tuple[BenchRecord, BenchRecord] | None = None


@dataclass(frozen=True)
class TrendReport:
    axes: tuple[AxisTrend, ...]

    @property
    def passed(self) -> bool:
        checked = [a for a in self.axes if a.status != "insufficient"]
        return bool(checked) and all(a.status == "pass" for a in checked)

    def summary(self) -> str:
        lines = []
        for a in self.axes:
            line = f"{a.axis:12s} {a.direction:15s} {a.status.upper()}"
            if a.violation:
                lo, hi = a.violation
                line += (
                    f"  ({a.axis} {getattr(lo, a.axis)} -> {getattr(hi, a.axis)}: "
                    f"{lo.wall_time:.4f}s -> {hi.wall_time:.4f}s)"
                )
            lines.append(line)
        return "\n".join(lines)


_GROUP_FIELDS = ("image_size", "kernel_size", "stride", "n_qubits",
                 "out_channels", "workers")


def check_trends(records: list[BenchRecord]) -> TrendReport:
    """Check every trend axis over record groups where all other axes are fixed."""
    axes = []
    any_checked = False
    for axis, direction in TREND_AXES.items():
        other = [f for f in _GROUP_FIELDS if f != axis]
        groups: dict[tuple, list[BenchRecord]] = {}
        for rec in records:
            groups.setdefault(tuple(getattr(rec, f) for f in other), []).append(rec)
        status, violation = "insufficient", None
        for group in groups.values():
            if len({getattr(r, axis) for r in group}) < 2:
                continue
            any_checked = True
            if status == "insufficient":
                status = "pass"
            group = sorted(group, key=lambda r: getattr(r, axis))
            for lo, hi in zip(group, group[1:]):
                band = 2.0 * ((lo.time_stddev**2 + hi.time_stddev**2) / 2.0) ** 0.5
                if direction == "non_increasing":
                    bad = hi.wall_time > lo.wall_time + band
                else:
                    bad = hi.wall_time < lo.wall_time - band
                if bad:
                    status, violation = "fail", (lo, hi)
                    break
            if status == "fail":
                break
        axes.append(AxisTrend(axis, direction, status, violation))
    if not any_checked:
        raise InsufficientData(
            "no axis has a record group with two or more points to compare"
        )
    return TrendReport(tuple(axes))


# --- CSV + plotting ---

def write_records_csv(records: list[BenchRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.image_size, r.kernel_size, r.stride, r.n_qubits,
                r.out_channels, r.workers, repr(r.wall_time),
                repr(r.time_stddev), r.circuit_evals, r.repeats,
            ])


def read_records_csv(path: str | Path) -> list[BenchRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise InvariantViolation(
            f"{path}: expected header {','.join(CSV_COLUMNS)}"
        )
    records = []
    for row in rows[1:]:
        records.append(BenchRecord(
            image_size=int(row[0]), kernel_size=int(row[1]), stride=int(row[2]),
            n_qubits=int(row[3]), out_channels=int(row[4]), workers=int(row[5]),
            wall_time=float(row[6]), time_stddev=float(row[7]),
            circuit_evals=int(row[8]), repeats=int(row[9]),
        ))
    return records


def write_gnuplot_script(csv_path: str | Path, script_path: str | Path,
                         x_axis: str = "image_size") -> None:
    """Emit a gnuplot script plotting median time against one axis."""
    col = CSV_COLUMNS.index(x_axis) + 1
    median_col = CSV_COLUMNS.index("median_s") + 1
    script = "\n".join([
        "set datafile separator ','",
        f"set xlabel '{x_axis}'",
        "set ylabel 'median wall time (s)'",
        "set key off",
        "set term png size 800,600",
        f"set output '{Path(csv_path).with_suffix('.png').name}'",
        f"plot '{Path(csv_path).name}' skip 1 using {col}:{median_col} with points pt 7",
        "",
    ])
    Path(script_path).write_text(script)
