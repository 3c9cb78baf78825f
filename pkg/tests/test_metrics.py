"""Metric extraction with recount oracles and CSV round-trips."""

import numpy as np
import pytest

from vanetflow.config import ScenarioPreset, SimConfig, as_echo_dict
from vanetflow.engine import EventLog, run
from vanetflow.metrics import (MetricTable, events_to_table, exit_series,
                               lane_change_positions, lane_changes_to_table,
                               parse_csv_text, read_csv, slow_cell_area,
                               table_to_text, velocity_grid, write_csv)
from vanetflow.sweep import run_sweep


def synthetic_log(events=(), samples=(), end_time=90.0, cfg=None):
    cfg = cfg or SimConfig()
    log = EventLog(config_echo=as_echo_dict(cfg), cfg=cfg, end_time=end_time)
    log.events = list(events)
    for t, vid, lane, x, v in samples:
        log.samples.t.append(t)
        log.samples.vehicle_id.append(vid)
        log.samples.lane.append(lane)
        log.samples.position.append(x)
        log.samples.velocity.append(v)
    return log


def real_log(duration=200.0, seed=31, **kw):
    kw.setdefault("warm_up", 10.0)
    return run(SimConfig(duration=duration, seed=seed, **kw))


# --- exit series -----------------------------------------------------------------

def test_exit_series_no_exits():
    log = synthetic_log(events=[(5.0, "injection", 1, 0, 0.0, 30.0, "")],
                        end_time=60.0)
    series = exit_series(log, bin_s=30.0)
    assert series.exits == [0, 0]
    assert series.arrivals == [1, 1]
    assert series.ratio == [0.0, 0.0]


def test_exit_series_ratio_definition():
    events = [(0.25 * i, "injection", i, 0, 0.0, 30.0, "") for i in range(100)]
    events += [(25.0, "exit", i, 0, 1500.0, 30.0, "") for i in range(50)]
    log = synthetic_log(events=events, end_time=30.0)
    series = exit_series(log, bin_s=30.0)
    assert series.arrivals[-1] == 100
    assert series.exits[-1] == 50
    assert series.ratio[-1] == pytest.approx(0.5)


def test_exit_series_matches_recount_oracle():
    log = real_log()
    series = exit_series(log, bin_s=30.0)
    for k, edge in enumerate(series.t):
        arrivals = sum(1 for e in log.events if e[1] == "injection" and e[0] <= edge)
        exits = sum(1 for e in log.events if e[1] == "exit" and e[0] <= edge)
        assert series.arrivals[k] == arrivals
        assert series.exits[k] == exits
        expected = exits / arrivals if arrivals else 0.0
        assert series.ratio[k] == pytest.approx(expected)
    assert all(b >= a for a, b in zip(series.exits, series.exits[1:]))
    assert all(b >= a for a, b in zip(series.arrivals, series.arrivals[1:]))


# --- lane changes -----------------------------------------------------------------

def test_lane_change_projection_empty():
    assert lane_change_positions(synthetic_log()) == []


def test_lane_change_projection_counts_and_filters():
    log = real_log(duration=400.0)
    rows = lane_change_positions(log)
    n_events = sum(1 for e in log.events if e[1] == "lane_change")
    assert len(rows) == n_events
    filtered = lane_change_positions(log, out_of_obstacle_lane=True,
                                     upstream_only=True)
    assert all(x < log.cfg.obstacle_position for _, x, _ in filtered)
    assert len(filtered) <= n_events
    assert {i for *_, i in rows} <= {0, 1}


# --- velocity grid -----------------------------------------------------------------

def test_velocity_grid_constant_speed_vehicle():
    samples = [(t * 0.25, 1, 0, 20.0 * t * 0.25, 20.0) for t in range(1, 241)]
    log = synthetic_log(samples=samples, end_time=60.0)
    grid = velocity_grid(log, x_bin_size=10.0, t_bin_size=30.0)
    filled = grid.counts > 0
    assert filled.any()
    assert np.allclose(grid.means[filled], 20.0)
    assert np.isnan(grid.means[~filled]).all()  # empty cells stay empty


def test_velocity_grid_matches_bruteforce_recount():
    log = real_log()
    grid = velocity_grid(log, x_bin_size=10.0, t_bin_size=30.0)
    s = log.samples
    nt, nx = grid.counts.shape
    sums = np.zeros((nt, nx))
    counts = np.zeros((nt, nx), dtype=int)
    for i in range(len(s)):
        ti = min(int(s.t[i] / 30.0), nt - 1)
        xi = min(int(s.position[i] / 10.0), nx - 1)
        sums[ti, xi] += s.velocity[i]
        counts[ti, xi] += 1
    assert (counts == grid.counts).all()
    mask = counts > 0
    assert np.allclose(grid.means[mask], sums[mask] / counts[mask], atol=1e-9)


def test_velocity_grid_cells_within_speed_limit():
    log = real_log()
    grid = velocity_grid(log)
    filled = grid.counts > 0
    assert grid.means[filled].max() <= log.cfg.speed_limit + 1e-9
    assert grid.means[filled].min() >= 0.0


def test_slow_cell_area_counts_upstream_cells():
    samples = [(1.0, 1, 0, 5.0, 1.0), (1.0, 2, 0, 1200.0, 1.0)]
    log = synthetic_log(samples=samples, end_time=30.0)
    grid = velocity_grid(log)
    assert slow_cell_area(grid, threshold=5.0) == 2
    assert slow_cell_area(grid, threshold=5.0, x_limit=1000.0) == 1


# --- CSV round-trips ----------------------------------------------------------------

def roundtrip(table):
    return parse_csv_text(table_to_text(table))


def test_csv_roundtrip_metric_tables():
    log = real_log()
    tables = [
        exit_series(log).to_table(log.config_echo),
        lane_changes_to_table(log),
        velocity_grid(log).to_table(log.config_echo),
    ]
    for table in tables:
        assert roundtrip(table) == table


def test_csv_roundtrip_sweep_table(tmp_path):
    preset = ScenarioPreset("tiny", "round-trip fixture",
                            {"duration": 60.0, "warm_up": 10.0,
                             "traffic_load": 1800.0})
    table = run_sweep(preset, [0, 1], jobs=1)
    path = tmp_path / "sweep.csv"
    write_csv(table, path)
    assert read_csv(path) == table


def test_csv_empty_table_has_header_and_meta(tmp_path):
    table = MetricTable(columns=["a", "b"], rows=[], meta={"seed": "1"})
    path = tmp_path / "empty.csv"
    write_csv(table, path)
    text = path.read_text()
    assert text.splitlines()[0] == "# seed = 1"
    assert text.splitlines()[1] == "a,b"
    assert read_csv(path) == table


def test_csv_full_precision_floats():
    value = 0.1 + 0.2  # not exactly representable as short decimal
    table = MetricTable(columns=["x"], rows=[(value,)], meta={})
    back = roundtrip(table)
    assert back.rows[0][0] == value


def test_write_csv_unwritable_path():
    table = MetricTable(columns=["x"], rows=[], meta={})
    with pytest.raises(OSError, match="no/such/dir"):
        write_csv(table, "no/such/dir/out.csv")


def test_events_table_long_form_with_samples():
    log = real_log(duration=30.0)
    table = events_to_table(log, include_samples=True)
    n_samples = len(log.samples)
    assert len(table.rows) == len(log.events) + n_samples
    times = [row[0] for row in table.rows]
    assert times == sorted(times)
    assert table.meta["seed"] == "31"


def test_velocity_grid_long_form_row_count():
    log = real_log(duration=120.0)
    grid = velocity_grid(log)
    table = grid.to_table(log.config_echo)
    assert len(table.rows) == int((grid.counts > 0).sum())


# --- sweep ------------------------------------------------------------------------

def tiny_preset():
    return ScenarioPreset("tiny", "sweep fixture",
                          {"duration": 60.0, "warm_up": 10.0,
                           "traffic_load": 2400.0})


def test_sweep_parallelism_invariance():
    a = run_sweep(tiny_preset(), [0, 1, 2], jobs=1)
    b = run_sweep(tiny_preset(), [0, 1, 2], jobs=4)
    assert a.rows == b.rows
    assert a.columns == b.columns


def test_sweep_medians_match_independent_sort():
    table = run_sweep(tiny_preset(), [0, 1, 2, 3], jobs=2)
    per_seed = [r for r in table.rows if r[6] == "ok"]
    medians = {r[1]: r for r in table.rows if r[6] == "median"}
    for arm in ("on", "off"):
        exits = sorted(r[5] for r in per_seed if r[1] == arm)
        mid = 0.5 * (exits[1] + exits[2])
        assert medians[arm][5] == pytest.approx(mid)


def test_sweep_reports_failures_per_seed(monkeypatch):
    import vanetflow.sweep as sweep_mod

    real_run = sweep_mod.run

    def flaky(cfg):
        if cfg.seed == 1:
            raise RuntimeError("synthetic failure")
        return real_run(cfg)

    monkeypatch.setattr(sweep_mod, "run", flaky)
    table = sweep_mod.run_sweep(tiny_preset(), [0, 1], jobs=1)
    status = {(r[0], r[1]): r[6] for r in table.rows if r[0] >= 0}
    assert status[(0, "on")] == "ok"
    assert "error" in status[(1, "on")]
    assert any(r[6] == "median" for r in table.rows)


def test_sweep_rejects_empty_seed_list():
    with pytest.raises(ValueError):
        run_sweep(tiny_preset(), [], jobs=1)
