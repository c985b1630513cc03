"""
Report emission: speedup CSV and dual-axis SVG plot.

CSV layout::

    kernel,workers,mean_time_s,speedup,efficiency,amdahl_bound

one row per worker count in ascending order, numbers with 9 significant
digits, ``\\n`` line endings.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd
import svgwrite
import structlog

from ..exceptions import BenchError
from ..models.records import SpeedupRow
from .analysis import amdahl_limit, amdahl_speedup

logger = structlog.get_logger(__name__)

COLUMNS = ["kernel", "workers", "mean_time_s", "speedup", "efficiency", "amdahl_bound"]
FLOAT_FORMAT = "%.9g"

PathLike = Union[str, Path]


def write_report(rows: Sequence[SpeedupRow], path: PathLike) -> None:
    ordered = sorted(rows, key=lambda row: row.workers)
    frame = pd.DataFrame(
        [
            {
                "kernel": row.kernel_id,
                "workers": row.workers,
                "mean_time_s": row.mean_time_s,
                "speedup": row.speedup,
                "efficiency": row.efficiency,
                "amdahl_bound": row.amdahl_bound,
            }
            for row in ordered
        ],
        columns=COLUMNS,
    )
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise BenchError(f"cannot write report {path}: {e}") from e
    logger.info("report written", path=str(path), rows=len(ordered))


def read_report(path: PathLike) -> List[SpeedupRow]:
    try:
        frame = pd.read_csv(path, dtype={"kernel": str, "workers": int}, float_precision="round_trip")
    except OSError as e:
        raise BenchError(f"cannot read report {path}: {e}") from e

    if list(frame.columns) != COLUMNS:
        raise BenchError(f"unexpected report header {list(frame.columns)}")
    return [
        SpeedupRow(
            kernel_id=record["kernel"],
            workers=int(record["workers"]),
            mean_time_s=float(record["mean_time_s"]),
            speedup=float(record["speedup"]),
            efficiency=float(record["efficiency"]),
            amdahl_bound=float(record["amdahl_bound"]),
        )
        for record in frame.to_dict(orient="records")
    ]


# Plot geometry (px)
WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 80, 80, 50, 60
TICKS = 5

TIME_COLOR = "#1f77b4"
SPEEDUP_COLOR = "#d62728"
BOUND_COLOR = "#7f7f7f"


def _r(value: float) -> float:
    return round(value, 2)


class _Axes:
    """Linear maps from data space to the plot rectangle."""

    def __init__(self, x_range, time_max: float, speedup_max: float):
        self.x_min, self.x_max = x_range
        self.time_max = time_max
        self.speedup_max = speedup_max
        self.plot_w = WIDTH - LEFT - RIGHT
        self.plot_h = HEIGHT - TOP - BOTTOM

    def x(self, workers: float) -> float:
        return _r(LEFT + (workers - self.x_min) / (self.x_max - self.x_min) * self.plot_w)

    def y_time(self, value: float) -> float:
        return _r(TOP + self.plot_h - value / self.time_max * self.plot_h)

    def y_speedup(self, value: float) -> float:
        return _r(TOP + self.plot_h - value / self.speedup_max * self.plot_h)


def emit_plot(
    rows: Sequence[SpeedupRow],
    declared_fraction: Optional[float],
    path: PathLike,
    title: Optional[str] = None,
) -> None:
    """Mean time (left axis) and speedup (right axis) versus worker count.

    With ``declared_fraction`` the Amdahl curve and its limit are overlaid.
    Output is byte-identical for identical input.
    """

    ordered = sorted(rows, key=lambda row: row.workers)
    workers = [row.workers for row in ordered]
    x_min = min([1] + workers)
    x_max = max(workers) if workers and max(workers) > x_min else x_min + 1

    bound_points = []
    limit = None
    if declared_fraction is not None:
        bound_points = [(p, amdahl_speedup(declared_fraction, p)) for p in range(x_min, x_max + 1)]
        if declared_fraction < 1:
            limit = amdahl_limit(declared_fraction)

    time_max = max([row.mean_time_s for row in ordered] + [0.0]) * 1.1 or 1.0
    speedup_candidates = [row.speedup for row in ordered] + [s for _, s in bound_points] + [1.0]
    if limit is not None:
        speedup_candidates.append(limit)
    speedup_max = max(speedup_candidates) * 1.1
    axes = _Axes((x_min, x_max), time_max, speedup_max)

    dwg = svgwrite.Drawing(filename=str(path), size=(WIDTH, HEIGHT), profile="full", debug=False)
    dwg.add(dwg.rect(insert=(0, 0), size=(WIDTH, HEIGHT), fill="white"))
    if title:
        dwg.add(dwg.text(title, insert=(WIDTH / 2, 24), text_anchor="middle", font_size=16, font_family="sans-serif"))

    bottom_y = TOP + axes.plot_h
    right_x = LEFT + axes.plot_w
    frame = dwg.g(stroke="black", stroke_width=1)
    frame.add(dwg.line(start=(LEFT, TOP), end=(LEFT, bottom_y)))
    frame.add(dwg.line(start=(right_x, TOP), end=(right_x, bottom_y)))
    frame.add(dwg.line(start=(LEFT, bottom_y), end=(right_x, bottom_y)))
    dwg.add(frame)

    labels = dwg.g(font_size=11, font_family="sans-serif")
    for i in range(TICKS + 1):
        share = i / TICKS
        y = _r(bottom_y - share * axes.plot_h)
        labels.add(dwg.text(f"{share * time_max:.3g}", insert=(LEFT - 8, y + 4), text_anchor="end", fill=TIME_COLOR))
        labels.add(dwg.text(f"{share * speedup_max:.3g}", insert=(right_x + 8, y + 4), fill=SPEEDUP_COLOR))
    for p in sorted(set(workers)):
        labels.add(dwg.text(str(p), insert=(axes.x(p), bottom_y + 16), text_anchor="middle"))
    labels.add(dwg.text("workers", insert=(LEFT + axes.plot_w / 2, HEIGHT - 16), text_anchor="middle"))
    labels.add(dwg.text("mean time (s)", insert=(16, TOP - 12), fill=TIME_COLOR))
    labels.add(dwg.text("speedup", insert=(WIDTH - 16, TOP - 12), text_anchor="end", fill=SPEEDUP_COLOR))
    dwg.add(labels)

    if bound_points:
        curve = [(axes.x(p), axes.y_speedup(s)) for p, s in bound_points]
        dwg.add(dwg.polyline(curve, fill="none", stroke=BOUND_COLOR, stroke_width=1.5, stroke_dasharray="6,4"))
    if limit is not None:
        y = axes.y_speedup(limit)
        dwg.add(dwg.line(start=(LEFT, y), end=(right_x, y), stroke=BOUND_COLOR, stroke_width=1, stroke_dasharray="2,3"))
        dwg.add(
            dwg.text(
                f"Amdahl limit {limit:.4g}",
                insert=(right_x - 4, _r(y - 4)),
                text_anchor="end",
                font_size=11,
                font_family="sans-serif",
                fill=BOUND_COLOR,
            )
        )

    for color, y_of, values in (
        (TIME_COLOR, axes.y_time, [row.mean_time_s for row in ordered]),
        (SPEEDUP_COLOR, axes.y_speedup, [row.speedup for row in ordered]),
    ):
        points = [(axes.x(p), y_of(v)) for p, v in zip(workers, values)]
        if len(points) > 1:
            dwg.add(dwg.polyline(points, fill="none", stroke=color, stroke_width=2))
        for point in points:
            dwg.add(dwg.circle(center=point, r=3.5, fill=color))

    try:
        dwg.save()
    except OSError as e:
        raise BenchError(f"cannot write plot {path}: {e}") from e
    logger.info("plot written", path=str(path), points=len(ordered))
