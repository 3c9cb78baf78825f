"""Metric extraction from event logs and CSV round-tripping.

Every metric is a pure function of the log; nothing here touches the engine.
CSV files carry '#'-prefixed config-echo lines, then a header row, then rows
serialized with full round-trip precision.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

@dataclass
class MetricTable:
    """A header + rows + run metadata; what write_csv/read_csv move around."""

    columns: list
    rows: list
    meta: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, MetricTable):
            return NotImplemented
        return (self.columns == other.columns and self.rows == other.rows
                and self.meta == other.meta)


def _format_value(value) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not a CSV cell type; use 0/1")
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    text = str(value)
    if "," in text or "\n" in text or "#" in text:
        raise ValueError(f"cell value {text!r} would not survive the CSV round trip")
    return text


_INT_RE = re.compile(r"^-?\d+$")


def _parse_value(text: str):
    if _INT_RE.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def table_to_text(table: MetricTable) -> str:
    lines = [f"# {key} = {value}" for key, value in table.meta.items()]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(table: MetricTable, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(table_to_text(table))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def parse_csv_text(text: str) -> MetricTable:
    meta = {}
    columns = None
    rows = []
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
            continue
        if columns is None:
            columns = line.split(",")
            continue
        rows.append(tuple(_parse_value(cell) for cell in line.split(",")))
    if columns is None:
        raise ValueError("CSV carries no header row")
    return MetricTable(columns=columns, rows=rows, meta=meta)


def read_csv(path) -> MetricTable:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_csv_text(fh.read())


# --- events ------------------------------------------------------------------

EVENT_COLUMNS = ["time_s", "event_kind", "vehicle_id", "lane", "position_m",
                 "velocity_mps", "aux"]


def events_to_table(log, include_samples: bool = False) -> MetricTable:
    """The raw log as one record stream; samples become 'sample' rows on request."""
    rows = list(log.events)
    if include_samples:
        s = log.samples
        rows.extend((s.t[i], "sample", s.vehicle_id[i], s.lane[i],
                     s.position[i], s.velocity[i], "")
                    for i in range(len(s)))
        rows.sort(key=lambda r: r[0])
    return MetricTable(columns=list(EVENT_COLUMNS),
                       rows=[tuple(str(v) if isinstance(v, str) else v for v in row)
                             for row in rows],
                       meta=dict(log.config_echo))


# --- exit aggregates ----------------------------------------------------------


@dataclass
class ExitSeries:
    """Cumulative arrivals/exits per time bin and their ratio."""

    bin_s: float
    t: list
    arrivals: list
    exits: list
    ratio: list

    def to_table(self, meta=None) -> MetricTable:
        rows = [(self.t[i], self.arrivals[i], self.exits[i], self.ratio[i])
                for i in range(len(self.t))]
        return MetricTable(columns=["t_s", "cum_arrivals", "cum_exits", "exit_ratio"],
                           rows=rows, meta=dict(meta or {}))


def exit_series(log, bin_s: float = 30.0) -> ExitSeries:
    """Cumulative entered/exited counts sampled at bin boundaries."""
    if bin_s <= 0:
        raise ValueError("bin_s must be > 0")
    n_bins = max(0, math.ceil(log.end_time / bin_s - 1e-9))
    arrival_times = sorted(e[0] for e in log.events if e[1] == "injection")
    exit_times = sorted(e[0] for e in log.events if e[1] == "exit")
    t, arrivals, exits, ratio = [], [], [], []
    ai = xi = 0
    for k in range(n_bins):
        edge = (k + 1) * bin_s
        while ai < len(arrival_times) and arrival_times[ai] <= edge:
            ai += 1
        while xi < len(exit_times) and exit_times[xi] <= edge:
            xi += 1
        t.append(edge)
        arrivals.append(ai)
        exits.append(xi)
        ratio.append(xi / ai if ai else 0.0)
    return ExitSeries(bin_s=bin_s, t=t, arrivals=arrivals, exits=exits, ratio=ratio)


# --- lane changes ---------------------------------------------------------------


def lane_change_positions(log, out_of_obstacle_lane: bool = False,
                          upstream_only: bool = False) -> list:
    """(time, position, infected) per lane-change event, with optional filters."""
    cfg = log.cfg
    rows = []
    for event in log.events:
        if event[1] != "lane_change":
            continue
        time_s, _, _, from_lane, position, _, aux = event
        target_lane, _, infected = aux.partition("|")
        if out_of_obstacle_lane and from_lane != cfg.obstacle_lane:
            continue
        if upstream_only and position >= cfg.obstacle_position:
            continue
        rows.append((time_s, position, int(infected)))
    return rows


def lane_changes_to_table(log) -> MetricTable:
    rows = lane_change_positions(log)
    return MetricTable(columns=["t_s", "position_m", "infected"],
                       rows=rows, meta=dict(log.config_echo))


# --- velocity grid --------------------------------------------------------------


@dataclass
class VelocityGrid:
    """Space-time binned mean velocities; empty cells stay empty (NaN), not zero."""

    x_bin_size: float
    t_bin_size: float
    counts: np.ndarray   # (n_time_bins, n_x_bins)
    means: np.ndarray    # NaN where counts == 0

    def to_table(self, meta=None) -> MetricTable:
        rows = []
        nt, nx = self.counts.shape
        for ti in range(nt):
            for xi in range(nx):
                n = int(self.counts[ti, xi])
                if n == 0:
                    continue
                rows.append((ti * self.t_bin_size, xi * self.x_bin_size,
                             float(self.means[ti, xi]), n))
        return MetricTable(columns=["t_bin_s", "x_bin_m", "mean_velocity_mps", "n_samples"],
                           rows=rows, meta=dict(meta or {}))


def velocity_grid(log, x_bin_size: float = 10.0, t_bin_size: float = 30.0) -> VelocityGrid:
    """Mean velocity per (time bin, position bin) over all per-tick samples."""
    if x_bin_size <= 0 or t_bin_size <= 0:
        raise ValueError("bin sizes must be > 0")
    cfg = log.cfg
    nt = max(1, math.ceil(log.end_time / t_bin_size - 1e-9))
    nx = max(1, math.ceil(cfg.field_length / x_bin_size - 1e-9))
    samples = log.samples
    if len(samples) == 0:
        counts = np.zeros((nt, nx), dtype=np.int64)
        means = np.full((nt, nx), np.nan)
        return VelocityGrid(x_bin_size, t_bin_size, counts, means)
    t = np.frombuffer(samples.t, dtype=np.float64)
    x = np.frombuffer(samples.position, dtype=np.float64)
    v = np.frombuffer(samples.velocity, dtype=np.float64)
    ti = np.minimum((t / t_bin_size).astype(np.int64), nt - 1)
    xi = np.minimum((x / x_bin_size).astype(np.int64), nx - 1)
    flat = ti * nx + xi
    counts = np.bincount(flat, minlength=nt * nx).reshape(nt, nx)
    sums = np.bincount(flat, weights=v, minlength=nt * nx).reshape(nt, nx)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return VelocityGrid(x_bin_size, t_bin_size, counts, means)


def slow_cell_area(grid: VelocityGrid, threshold: float = 5.0,
                   x_limit: float | None = None) -> int:
    """Number of non-empty cells below the velocity threshold, optionally
    restricted to positions under x_limit (e.g. upstream of the obstacle)."""
    mask = (grid.counts > 0) & (grid.means < threshold)
    if x_limit is not None:
        nx_keep = int(x_limit / grid.x_bin_size)
        mask = mask[:, :nx_keep]
    return int(mask.sum())
