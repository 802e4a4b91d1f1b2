import math
import os

import numpy as np
import pytest

from isingring.global_discord import OptimizerConfig
from isingring.sweep import (
    COLUMNS,
    SweepTable,
    _q12,
    default_ratio_grid,
    find_peak,
    fit_scaling,
    peak_drift,
    sweep,
)


def small_table(**overrides):
    """Synthetic but schema-valid table for io/peak tests."""
    ratios = np.array([0.5, 0.75, 1.0, 1.25, 1.5])
    values = 1.0 - (ratios - 1.0) ** 2
    columns = {c: np.full(5, math.nan) for c in COLUMNS}
    columns["ratio"] = ratios
    columns["gd"] = values
    columns["gd_converged"] = np.ones(5)
    columns["gd_diff"] = np.zeros(5)
    columns.update(overrides)
    return SweepTable(columns=columns, metadata={"n_sites": 4, "seed": 0})


def test_quantizer_idempotent():
    x = 0.12345678901234567
    q = _q12(x)
    assert _q12(q) == q
    assert float(f"{q:.12g}") == q


def test_default_grid_properties():
    grid = default_ratio_grid()
    assert grid[0] == 0.01 and abs(grid[-1] - 6.0) < 1e-12
    assert 1.0 in grid
    assert np.all(np.diff(grid) > 0)
    with pytest.raises(ValueError):
        default_ratio_grid(start=-1.0)
    with pytest.raises(ValueError):
        default_ratio_grid(count=1)


def test_table_validation():
    with pytest.raises(ValueError):
        small_table(ratio=np.array([0.5, 0.75, 0.75, 1.25, 1.5]))  # not increasing
    with pytest.raises(ValueError):
        small_table(ratio=np.array([0.5, 0.75, 1.0]))  # length mismatch
    bad = {c: np.zeros(2) for c in COLUMNS if c != "gd"}
    bad["ratio"] = np.array([0.5, 1.0])
    with pytest.raises(ValueError):
        SweepTable(columns=bad, metadata={})
    # NaN in a computed column without recorded row errors is rejected
    with pytest.raises(ValueError):
        SweepTable(
            columns=small_table().columns
            | {"gd": np.array([1, 1, math.nan, 1, 1], dtype=float)},
            metadata={"measures": ["gd"], "row_errors": []},
        )


def test_zero_field_row_reproduces_cat_state_values():
    table = sweep(
        6,
        ratios=[0.0],
        opt=OptimizerConfig(seed=0, uniform_angles=True),
    )
    row = {c: table.columns[c][0] for c in COLUMNS}
    assert abs(row["gd"] - 1.0) < 1e-6
    assert row["gd_converged"] == 1.0
    assert abs(row["mean_E"] - 1.0) < 1e-10
    assert abs(row["var_E"]) < 1e-10
    assert abs(row["nn_discord"]) < 1e-8
    assert abs(row["nn_mid"] - 1.0) < 1e-8
    assert abs(row["nn_amid"]) < 1e-6


def test_strong_field_row_is_classical():
    table = sweep(4, ratios=[1e6], measures=("pair", "estats"))
    assert table.columns["nn_discord"][0] < 1e-3
    assert table.columns["nn_amid"][0] < 1e-3
    assert table.columns["mean_E"][0] < 1e-3


def test_sweep_deterministic_and_parallel_invariant():
    grid = np.geomspace(0.4, 2.0, 5)
    a = sweep(4, ratios=grid, measures=("pair", "estats"), seed=11)
    b = sweep(4, ratios=grid, measures=("pair", "estats"), seed=11)
    assert a.same_as(b)
    c = sweep(4, ratios=grid, measures=("pair", "estats"), seed=11, n_workers=3)
    assert a.same_as(c)


def test_round_trips_are_exact(tmp_path):
    table = sweep(3, ratios=[0.5, 1.0, 2.0], measures=("pair", "estats"), seed=2)
    csv_path = os.fspath(tmp_path / "t.csv")
    json_path = os.fspath(tmp_path / "t.json")
    table.to_csv(csv_path)
    table.to_json(json_path)
    assert SweepTable.from_csv(csv_path).same_as(table)
    assert SweepTable.from_json(json_path).same_as(table)
    # atomic write leaves no temp files behind
    assert sorted(p.name for p in tmp_path.iterdir()) == ["t.csv", "t.json"]
    with pytest.raises(ValueError):
        SweepTable.from_csv(json_path)
    with pytest.raises(ValueError):
        SweepTable.from_json(csv_path)


def test_gd_diff_is_first_difference():
    table = sweep(
        3,
        ratios=[0.6, 0.8, 1.0],
        measures=("gd",),
        opt=OptimizerConfig(seed=0, uniform_angles=True),
    )
    gd = table.columns["gd"]
    r = table.columns["ratio"]
    assert table.columns["gd_diff"][0] == 0.0
    for i in (1, 2):
        manual = _q12((gd[i] - gd[i - 1]) / (r[i] - r[i - 1]))
        assert table.columns["gd_diff"][i] == manual


def test_sweep_input_validation():
    with pytest.raises(ValueError):
        sweep(4, ratios=[1.0, 0.5], measures=("estats",))
    with pytest.raises(ValueError):
        sweep(4, ratios=[-0.5, 1.0], measures=("estats",))
    with pytest.raises(ValueError):
        sweep(4, ratios=[1.0], measures=("estats", "bogus"))


def test_find_peak_refines_with_injected_evaluator():
    table = small_table()
    peak = find_peak(
        table, "gd", evaluator=lambda r: 1.0 - (r - 1.0) ** 2, xtol=1e-5
    )
    assert not peak.boundary
    assert abs(peak.ratio_star - 1.0) < 1e-4
    assert abs(peak.value - 1.0) < 1e-8
    assert peak.n_evals > 0


def test_find_peak_boundary_flag():
    table = sweep(5, ratios=[1.0, 1.5, 2.0, 3.0], measures=("estats",))
    peak = find_peak(table, "mean_E")
    assert peak.boundary and peak.ratio_star == 1.0 and peak.n_evals == 0


def test_find_peak_rejects_unusable_columns():
    table = small_table()
    with pytest.raises(ValueError):
        find_peak(table, "nn_discord")  # all NaN
    with pytest.raises(ValueError):
        find_peak(
            small_table(nn_discord=np.zeros(5)), "gd_diff",
        )


def test_find_peak_reevaluates_true_measure():
    """Refinement through metadata-reconstructed evaluators: the var_E peak
    of the N=6 ring lands near the finite-size critical ratio."""
    table = sweep(6, ratios=np.geomspace(0.5, 2.0, 9), measures=("estats",))
    peak = find_peak(table, "var_E")
    assert not peak.boundary
    assert 0.8 <= peak.ratio_star <= 1.5
    assert peak.value >= np.max(table.columns["var_E"]) - 1e-12


def test_fit_scaling_exact_line_and_degenerate():
    line = [(n, 1.0 + 0.7 * (n - 2)) for n in range(2, 8)]
    fit = fit_scaling(line)
    assert abs(fit.slope - 0.7) < 1e-12
    assert max(abs(r) for r in fit.residuals) < 1e-12
    assert abs(fit.predict(9) - (1.0 + 0.7 * 7)) < 1e-12
    with pytest.raises(ValueError):
        fit_scaling([(2, 1.0), (2, 1.1)])
    with pytest.raises(ValueError):
        fit_scaling([])


def test_fit_scaling_reference_point_set():
    points = [(2, 1.0), (3, 1.8296), (4, 2.4360), (5, 3.0879), (6, 3.7095), (7, 4.501)]
    fit = fit_scaling(points)
    assert abs(fit.slope - 0.6965) < 5e-4
    # N=2 carries zero weight in the constrained fit
    assert abs(fit_scaling(points[1:]).slope - fit.slope) < 1e-15


def test_peak_drift_report():
    report = peak_drift([(3, 0.69), (4, 0.84), (5, 0.92), (6, 0.96)])
    assert report.monotone
    assert report.max_increase <= 0.0
    worsening = peak_drift([(3, 0.95), (4, 0.7)])
    assert not worsening.monotone
    with pytest.raises(ValueError):
        peak_drift([(3, 0.9)])
    with pytest.raises(ValueError):
        peak_drift([(3, 0.9), (3, 0.8)])


def test_metadata_records_configuration():
    table = sweep(3, ratios=[0.8, 1.2], measures=("estats",), seed=9)
    meta = table.metadata
    assert meta["n_sites"] == 3 and meta["seed"] == 9
    assert meta["measures"] == ["estats"]
    assert meta["grid"] == {"count": 2, "min": 0.8, "max": 1.2}
    assert meta["row_errors"] == []
