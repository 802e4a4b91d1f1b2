"""B/J sweeps, peak refinement, and finite-size scaling fits.

A sweep evaluates the measure families (global discord, nearest-neighbour
pair measures, bipartition-entanglement statistics) on the ring ground state
over a grid of field/coupling ratios and collects them in a flat table with
a fixed column schema.  Peaks are refined by golden-section search that
re-evaluates the underlying measure, not by interpolating the grid.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .entanglement import entanglement_stats
from .global_discord import OptimizerConfig, global_discord
from .pair_measures import amid, discord, mid, reduced_two_spin
from .ring import RingConfig, ground_state

COLUMNS = (
    "ratio",
    "gd",
    "gd_converged",
    "mean_E",
    "var_E",
    "nn_discord",
    "nn_mid",
    "nn_amid",
    "gd_diff",
)

MEASURE_GROUPS = ("gd", "pair", "estats")

_GROUP_COLUMNS = {
    "gd": ("gd", "gd_converged", "gd_diff"),
    "pair": ("nn_discord", "nn_mid", "nn_amid"),
    "estats": ("mean_E", "var_E"),
}

_CSV_MAGIC = "# isingring-sweep-v1 "
_JSON_FORMAT = "isingring-sweep-v1"

#: Golden-ratio section constant for the peak refinement.
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

#: Columns that find_peak can re-evaluate from table metadata alone.
_REFINABLE_COLUMNS = frozenset(
    {"gd", "mean_E", "var_E", "nn_discord", "nn_mid", "nn_amid"}
)


def _q12(x: float) -> float:
    """Quantize to 12 significant digits: the table's storage precision.

    Applied at computation time so the in-memory table, the CSV text, and
    the JSON text all carry bit-identical values.
    """
    return float(f"{float(x):.12g}")


def default_ratio_grid(
    start: float = 1e-2, stop: float = 6.0, count: int = 100
) -> np.ndarray:
    """Logarithmic B/J grid with the critical point 1.0 always included."""
    if not (0 < start < stop):
        raise ValueError("grid requires 0 < start < stop")
    if count < 2:
        raise ValueError("grid requires at least 2 points")
    pts = np.geomspace(start, stop, count)
    if start <= 1.0 <= stop:
        pts = np.append(pts, 1.0)
    return np.unique([_q12(p) for p in pts])


@dataclass(frozen=True)
class SweepTable:
    """Fixed-schema results table: one row per B/J ratio.

    All nine columns are always present; measure families that were not
    requested are filled with NaN and listed out of ``metadata['measures']``.
    ``gd_converged`` is stored as 0.0/1.0.  ``gd_diff`` is the first
    difference d(gd)/d(ratio) with a leading zero.
    """

    columns: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [c for c in COLUMNS if c not in self.columns]
        if missing:
            raise ValueError(f"table missing columns {missing}")
        ratios = np.asarray(self.columns["ratio"], dtype=float)
        if ratios.ndim != 1 or len(ratios) == 0:
            raise ValueError("ratio column must be a nonempty 1-d array")
        if not np.all(np.isfinite(ratios)):
            raise ValueError("ratios must be finite")
        if np.any(np.diff(ratios) <= 0):
            raise ValueError("ratios must be strictly increasing")
        for name in COLUMNS:
            col = np.asarray(self.columns[name], dtype=float)
            if col.shape != ratios.shape:
                raise ValueError(f"column {name!r} length mismatch")
            object.__setattr__(self, "columns", {**self.columns, name: col})
        if not self.metadata.get("row_errors"):
            for group in self.metadata.get("measures", ()):
                for name in _GROUP_COLUMNS[group]:
                    if not np.all(np.isfinite(self.columns[name])):
                        raise ValueError(
                            f"column {name!r} contains non-finite values "
                            "but no row errors were recorded"
                        )

    @property
    def ratios(self) -> np.ndarray:
        return self.columns["ratio"]

    @property
    def n_rows(self) -> int:
        return len(self.columns["ratio"])

    def same_as(self, other: "SweepTable") -> bool:
        """Exact equality, treating NaN as equal to NaN."""
        if self.metadata != other.metadata:
            return False
        return all(
            np.array_equal(self.columns[c], other.columns[c], equal_nan=True)
            for c in COLUMNS
        )

    # ------------------------------------------------------------------ io

    def to_csv(self, path: str) -> None:
        lines = [_CSV_MAGIC + json.dumps(self.metadata, sort_keys=True)]
        lines.append(",".join(COLUMNS))
        for i in range(self.n_rows):
            lines.append(
                ",".join(f"{self.columns[c][i]:.12g}" for c in COLUMNS)
            )
        _atomic_write(path, "\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path: str) -> "SweepTable":
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
        if not lines or not lines[0].startswith(_CSV_MAGIC):
            raise ValueError(f"{path}: not an isingring sweep CSV")
        metadata = json.loads(lines[0][len(_CSV_MAGIC):])
        header = tuple(lines[1].split(","))
        if header != COLUMNS:
            raise ValueError(f"{path}: unexpected column header {header}")
        rows = [[float(tok) for tok in ln.split(",")] for ln in lines[2:]]
        data = np.array(rows, dtype=float).reshape(len(rows), len(COLUMNS))
        columns = {c: data[:, k] for k, c in enumerate(COLUMNS)}
        return cls(columns=columns, metadata=metadata)

    def to_json(self, path: str) -> None:
        payload = {
            "format": _JSON_FORMAT,
            "metadata": self.metadata,
            "columns": {c: list(self.columns[c]) for c in COLUMNS},
        }
        _atomic_write(path, json.dumps(payload, indent=1))

    @classmethod
    def from_json(cls, path: str) -> "SweepTable":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != _JSON_FORMAT:
            raise ValueError(f"{path}: not an isingring sweep JSON")
        columns = {c: np.array(payload["columns"][c], float) for c in COLUMNS}
        return cls(columns=columns, metadata=payload["metadata"])


def _atomic_write(path: str, text: str) -> None:
    """Write via a sibling temp file + rename so readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- sweeping


def _normalize_measures(measures) -> tuple:
    requested = set(measures)
    unknown = requested - set(MEASURE_GROUPS)
    if unknown:
        raise ValueError(f"unknown measure groups {sorted(unknown)}")
    return tuple(g for g in MEASURE_GROUPS if g in requested)


def _row_values(args):
    """Evaluate one grid point; module-level so worker processes can pick it up."""
    n_sites, coupling_j, ratio, measures, opt_fields, seed = args
    config = RingConfig(
        n_sites=n_sites, coupling_j=coupling_j, field_b=ratio * coupling_j
    )
    gs, _energy = ground_state(config)
    out = {c: math.nan for c in COLUMNS if c not in ("ratio", "gd_diff")}
    errors = []
    if "gd" in measures:
        try:
            res = global_discord(gs, OptimizerConfig(**opt_fields))
            out["gd"] = res.value
            out["gd_converged"] = float(res.converged)
        except Exception as exc:
            errors.append(f"gd@ratio={ratio:.6g}: {exc}")
            out["gd_converged"] = 0.0
    if "pair" in measures:
        try:
            pair = reduced_two_spin(gs, 0, 1)
            out["nn_discord"] = discord(pair, direction="sym")
            out["nn_mid"] = mid(pair)
            out["nn_amid"] = amid(pair, seed=seed)
        except Exception as exc:
            errors.append(f"pair@ratio={ratio:.6g}: {exc}")
    if "estats" in measures:
        try:
            stats = entanglement_stats(gs)
            out["mean_E"] = stats.mean
            out["var_E"] = stats.variance
        except Exception as exc:
            errors.append(f"estats@ratio={ratio:.6g}: {exc}")
    return out, errors


def sweep(
    n_sites: int,
    ratios=None,
    *,
    coupling_j: float = 1.0,
    measures=MEASURE_GROUPS,
    opt: OptimizerConfig | None = None,
    seed: int = 0,
    n_workers: int | None = None,
) -> SweepTable:
    """Evaluate the requested measure families over a B/J grid.

    Rows are computed independently (optionally in parallel) and assembled
    in grid order, so the result is identical for any worker count.  A
    failure at one grid point is recorded in ``metadata['row_errors']`` and
    leaves NaN in the affected cells; the sweep continues.
    """
    if ratios is None:
        ratios = default_ratio_grid()
    ratios = np.array([_q12(r) for r in np.asarray(ratios, dtype=float).ravel()])
    if np.any(np.diff(ratios) <= 0):
        raise ValueError("ratios must be strictly increasing")
    if np.any(ratios < 0):
        raise ValueError("ratios must be nonnegative")
    measures = _normalize_measures(measures)
    opt = opt if opt is not None else OptimizerConfig(seed=seed)
    opt_fields = dataclasses.asdict(opt)
    args = [
        (n_sites, coupling_j, float(r), measures, opt_fields, seed)
        for r in ratios
    ]
    workers = _resolve_workers(n_workers)
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_row_values, args))
    else:
        results = [_row_values(a) for a in args]

    columns = {c: np.full(len(ratios), math.nan) for c in COLUMNS}
    columns["ratio"] = ratios
    row_errors = []
    for i, (values, errors) in enumerate(results):
        row_errors.extend(errors)
        for name, value in values.items():
            columns[name][i] = _q12(value) if math.isfinite(value) else value
    columns["gd_diff"] = _first_difference(ratios, columns["gd"])
    metadata = {
        "n_sites": n_sites,
        "coupling_j": coupling_j,
        "seed": seed,
        "measures": list(measures),
        "grid": {
            "count": int(len(ratios)),
            "min": float(ratios[0]),
            "max": float(ratios[-1]),
        },
        "optimizer": opt_fields,
        "row_errors": row_errors,
    }
    return SweepTable(columns=columns, metadata=metadata)


def _resolve_workers(n_workers: int | None) -> int:
    if n_workers is not None:
        return max(1, int(n_workers))
    env = os.environ.get("ISINGRING_THREADS", "").strip()
    return max(1, int(env)) if env else 1


def _first_difference(ratios: np.ndarray, values: np.ndarray) -> np.ndarray:
    """d(value)/d(ratio) by first differences, zero-padded at the left edge."""
    diff = np.full(len(ratios), math.nan)
    diff[0] = 0.0
    if len(ratios) > 1:
        diff[1:] = (values[1:] - values[:-1]) / (ratios[1:] - ratios[:-1])
    return np.array(
        [_q12(d) if math.isfinite(d) else d for d in diff]
    )


# ------------------------------------------------------------------ peaks


@dataclass(frozen=True)
class PeakResult:
    """Refined maximum of one table column over the ratio axis."""

    ratio_star: float
    value: float
    column: str
    boundary: bool
    n_evals: int


def _make_evaluator(table: SweepTable, column: str):
    """Re-evaluator for a measure column at an arbitrary ratio.

    Reconstructs the measure from the table metadata so refinement probes
    the actual function, under the same optimizer settings and seed.
    """
    meta = table.metadata
    n_sites = meta["n_sites"]
    coupling_j = meta.get("coupling_j", 1.0)
    seed = meta.get("seed", 0)
    opt_fields = meta.get("optimizer")

    def state_at(ratio: float):
        config = RingConfig(
            n_sites=n_sites, coupling_j=coupling_j, field_b=ratio * coupling_j
        )
        return ground_state(config)[0]

    if column == "gd":
        opt = OptimizerConfig(**opt_fields) if opt_fields else OptimizerConfig()

        def evaluate(ratio: float) -> float:
            return global_discord(state_at(ratio), opt).value

    elif column in ("mean_E", "var_E"):

        def evaluate(ratio: float) -> float:
            stats = entanglement_stats(state_at(ratio))
            return stats.mean if column == "mean_E" else stats.variance

    elif column in ("nn_discord", "nn_mid", "nn_amid"):

        def evaluate(ratio: float) -> float:
            pair = reduced_two_spin(state_at(ratio), 0, 1)
            if column == "nn_discord":
                return discord(pair, direction="sym")
            if column == "nn_mid":
                return mid(pair)
            return amid(pair, seed=seed)

    else:
        raise ValueError(f"column {column!r} is not a refinable measure")
    return evaluate


def find_peak(
    table: SweepTable,
    column: str = "gd",
    *,
    evaluator=None,
    xtol: float = 1e-4,
) -> PeakResult:
    """Locate and refine the maximum of ``column`` along the ratio axis.

    The grid argmax seeds a golden-section search on the bracketing
    interval; every probe re-evaluates the measure itself.  A maximum on
    the first or last grid point is returned unrefined with
    ``boundary=True`` (no bracket exists).
    """
    if evaluator is None and column not in _REFINABLE_COLUMNS:
        raise ValueError(
            f"column {column!r} is not a refinable measure; "
            "supply an evaluator to refine it"
        )
    values = table.columns[column]
    if np.any(~np.isfinite(values)):
        raise ValueError(f"column {column!r} has non-finite entries")
    i = int(np.argmax(values))
    if i == 0 or i == table.n_rows - 1:
        return PeakResult(
            ratio_star=float(table.ratios[i]),
            value=float(values[i]),
            column=column,
            boundary=True,
            n_evals=0,
        )
    if evaluator is None:
        evaluator = _make_evaluator(table, column)
    lo, hi = float(table.ratios[i - 1]), float(table.ratios[i + 1])
    best_r, best_v = float(table.ratios[i]), float(values[i])
    n_evals = 0

    def probe(r: float) -> float:
        nonlocal best_r, best_v, n_evals
        v = float(evaluator(r))
        n_evals += 1
        if v > best_v:
            best_r, best_v = r, v
        return v

    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = probe(c), probe(d)
    while (b - a) > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = probe(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = probe(d)
    return PeakResult(
        ratio_star=best_r,
        value=best_v,
        column=column,
        boundary=False,
        n_evals=n_evals,
    )


# ------------------------------------------------------------------- fits


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line through (2, 1): value = 1 + slope * (N - 2)."""

    slope: float
    points: tuple
    residuals: tuple

    def predict(self, n: int) -> float:
        return 1.0 + self.slope * (n - 2)


def fit_scaling(points) -> ScalingFit:
    """Fit max-measure-versus-size points to a line constrained through (2, 1).

    Minimizing sum_i (y_i - 1 - m (N_i - 2))^2 gives
    m = sum (N-2)(y-1) / sum (N-2)^2 in closed form.
    """
    pts = tuple((int(n), float(y)) for n, y in points)
    if not pts:
        raise ValueError("fit requires at least one point")
    x = np.array([n - 2 for n, _ in pts], dtype=float)
    y = np.array([v - 1.0 for _, v in pts], dtype=float)
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise ValueError(
            "degenerate fit: all points have N = 2, slope is unconstrained"
        )
    slope = float(np.dot(x, y) / denom)
    residuals = tuple(float(r) for r in (y - slope * x))
    return ScalingFit(slope=slope, points=pts, residuals=residuals)


@dataclass(frozen=True)
class DriftReport:
    """How the peak location approaches the infinite-size critical ratio 1."""

    n_values: tuple
    deviations: tuple
    max_increase: float
    monotone: bool


def peak_drift(peaks, *, slack: float = 5e-2) -> DriftReport:
    """Deviation |ratio* - 1| per size, flagged monotone if it never grows
    by more than ``slack`` from one size to the next."""
    pts = sorted((int(n), float(r)) for n, r in peaks)
    if len(pts) < 2:
        raise ValueError("drift report requires at least two sizes")
    ns = tuple(n for n, _ in pts)
    if len(set(ns)) != len(ns):
        raise ValueError("duplicate sizes in drift report")
    devs = tuple(abs(r - 1.0) for _, r in pts)
    increases = [b - a for a, b in zip(devs[:-1], devs[1:])]
    max_increase = max(increases)
    return DriftReport(
        n_values=ns,
        deviations=devs,
        max_increase=float(max_increase),
        monotone=bool(max_increase <= slack),
    )
