"""Monte Carlo campaigns: batch runs, persistence, scaling-exponent fits.

A campaign executes many independent estimation runs over a sweep of probe
depths, persists one record per trial plus a summary CSV, and fits the
log-log slope of dispersion versus photon resources.  All randomness is
derived per (root seed, depth, trial), so outputs are byte-identical
across reruns and worker-pool widths.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .errors import BudgetExceededError, DegenerateFitError
from .estimator import (
    ProtocolConfig,
    derive_seed,
    hash_uniform,
    holevo_variance,
    run_protocol,
    signed_phase_error,
)
from .posterior import TWO_PI

DEFAULT_BUDGET = 10_000_000
BUDGET_ENV = "PHASIM_BUDGET"

SUMMARY_COLUMNS = ("K", "N", "M", "model", "trials", "V_H", "stderr")
_STDERR_RESAMPLES = 200


def measurement_budget() -> int:
    """Campaign size guard, overridable through the environment."""
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass(frozen=True)
class CampaignSpec:
    """One batch experiment: a protocol, a depth sweep, and output paths."""

    protocol: ProtocolConfig
    trials: int
    output_dir: str
    k_sweep: tuple[int, ...] | None = None
    root_seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.k_sweep is not None and len(self.k_sweep) == 0:
            raise ValueError("k_sweep must be omitted or nonempty")

    @property
    def sweep(self) -> tuple[int, ...]:
        if self.k_sweep is None:
            return (self.protocol.k_max,)
        return tuple(self.k_sweep)

    @property
    def max_resources(self) -> int:
        return max(
            self.protocol.repeats * (2 ** (k + 1) - 1) for k in self.sweep
        )


@dataclass(frozen=True)
class RunRecord:
    """Everything needed to replay or re-analyze a single trial."""

    k_max: int
    repeats: int
    model: str
    trial: int
    seed: int
    true_phase: float
    estimate: float
    error: float
    sharpness: float
    holevo_variance: float
    n_resources: int
    outcomes: tuple[tuple[int, float, int], ...]

    def to_json(self) -> str:
        payload = asdict(self)
        payload["outcomes"] = [list(o) for o in self.outcomes]
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        payload = json.loads(text)
        payload["outcomes"] = tuple(
            (int(n), float(fb), int(u)) for n, fb, u in payload["outcomes"]
        )
        return cls(**payload)


@dataclass(frozen=True)
class SummaryPoint:
    """One summary CSV row."""

    k_max: int
    n_resources: int
    repeats: int
    model: str
    trials: int
    holevo_variance: float
    stderr: float


@dataclass(frozen=True)
class ScalingResult:
    """Dispersion-versus-resources points and the fitted power law."""

    points: tuple[SummaryPoint, ...]
    slope: float
    intercept: float
    slope_ci: tuple[float, float]


def _bootstrap_holevo(errors: np.ndarray, n_boot: int, rng: np.random.Generator) -> np.ndarray:
    """Holevo variances of with-replacement resamples of the error sample."""
    idx = rng.integers(0, errors.size, size=(n_boot, errors.size))
    mu = np.abs(np.mean(np.exp(1j * errors[idx]), axis=1))
    out = np.full(n_boot, math.inf)
    ok = mu > 0
    out[ok] = 1.0 / mu[ok] ** 2 - 1.0
    return np.maximum(out, 0.0)


def _run_trial(args: tuple[ProtocolConfig, int, int, int]) -> RunRecord:
    protocol, k, trial, root_seed = args
    cfg = replace(protocol, k_max=k)
    seed = derive_seed(root_seed, "trial", k, trial)
    true_phase = TWO_PI * hash_uniform(root_seed, "phase", k, trial)
    result = run_protocol(true_phase, cfg, seed)
    return RunRecord(
        k_max=k,
        repeats=cfg.repeats,
        model=cfg.model,
        trial=trial,
        seed=seed,
        true_phase=true_phase,
        estimate=result.estimate,
        error=signed_phase_error(result.estimate, true_phase),
        sharpness=result.sharpness,
        holevo_variance=result.holevo_variance,
        n_resources=result.n_resources,
        outcomes=tuple((n, fb, int(u)) for n, fb, u in result.outcome_log),
    )


def _format(value: float) -> str:
    return "inf" if math.isinf(value) else repr(float(value))


def write_summary_csv(path: Path, points: tuple[SummaryPoint, ...]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for p in points:
            writer.writerow(
                [
                    p.k_max,
                    p.n_resources,
                    p.repeats,
                    p.model,
                    p.trials,
                    _format(p.holevo_variance),
                    _format(p.stderr),
                ]
            )


def read_summary_csv(path: Path) -> list[SummaryPoint]:
    points = []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            points.append(
                SummaryPoint(
                    k_max=int(row["K"]),
                    n_resources=int(row["N"]),
                    repeats=int(row["M"]),
                    model=row["model"],
                    trials=int(row["trials"]),
                    holevo_variance=float(row["V_H"]),
                    stderr=float(row["stderr"]),
                )
            )
    return points


def run_campaign(spec: CampaignSpec) -> ScalingResult:
    """Execute a campaign, persist records and summary, fit the scaling.

    Raises :class:`BudgetExceededError` before running anything when
    trials x (largest photon count) would exceed the measurement budget.
    With fewer than three usable summary points the fit fields are NaN.
    """
    cost = spec.trials * spec.max_resources
    budget = measurement_budget()
    if cost > budget:
        raise BudgetExceededError(
            f"campaign needs {cost} elementary measurements, budget is {budget}"
        )

    out_dir = Path(spec.output_dir)
    records_dir = out_dir / "records"
    records_dir.mkdir(parents=True, exist_ok=True)

    tasks = [
        (spec.protocol, k, trial, spec.root_seed)
        for k in sorted(spec.sweep)
        for trial in range(spec.trials)
    ]
    if spec.workers == 1:
        records = [_run_trial(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            records = list(pool.map(_run_trial, tasks, chunksize=8))

    # all writes happen here, in task order, regardless of pool width
    points: list[SummaryPoint] = []
    error_sets: list[np.ndarray] = []
    for i, k in enumerate(sorted(spec.sweep)):
        group = records[i * spec.trials : (i + 1) * spec.trials]
        for record in group:
            name = f"k{k:02d}_trial{record.trial:05d}.json"
            with open(records_dir / name, "w", newline="") as handle:
                handle.write(record.to_json() + "\n")
        errors = np.array([r.error for r in group])
        mu = abs(np.mean(np.exp(1j * errors)))
        rng = np.random.default_rng(derive_seed(spec.root_seed, "stderr", k))
        resampled = _bootstrap_holevo(errors, _STDERR_RESAMPLES, rng)
        finite = resampled[np.isfinite(resampled)]
        points.append(
            SummaryPoint(
                k_max=k,
                n_resources=group[0].n_resources,
                repeats=spec.protocol.repeats,
                model=spec.protocol.model,
                trials=spec.trials,
                holevo_variance=holevo_variance(mu),
                stderr=float(np.std(finite)) if finite.size else math.inf,
            )
        )
        error_sets.append(errors)

    write_summary_csv(out_dir / "summary.csv", tuple(points))

    triples = [(p.n_resources, p.holevo_variance, p.stderr) for p in points]
    usable = sum(1 for n, v, _ in triples if math.isfinite(v) and v > 0)
    if usable >= 3:
        slope, intercept, ci = fit_scaling(
            triples,
            per_point_errors=error_sets,
            seed=derive_seed(spec.root_seed, "fit"),
        )
    else:
        slope, intercept, ci = math.nan, math.nan, (math.nan, math.nan)
    return ScalingResult(points=tuple(points), slope=slope, intercept=intercept, slope_ci=ci)


def _ols_loglog(n_vals: np.ndarray, v_vals: np.ndarray) -> tuple[float, float]:
    x = np.log(n_vals)
    y = np.log(v_vals)
    x_centered = x - x.mean()
    denom = float(np.sum(x_centered**2))
    if denom == 0.0:
        raise DegenerateFitError("resource values are degenerate (no spread)")
    slope = float(np.sum(x_centered * y) / denom)
    intercept = float(y.mean() - slope * x.mean())
    return slope, intercept


def fit_scaling(
    points,
    per_point_errors=None,
    n_boot: int = 1000,
    seed: int = 0,
) -> tuple[float, float, tuple[float, float]]:
    """Least-squares power-law fit of dispersion against resources.

    ``points`` holds (N, V_H, stderr) triples; rows with nonfinite or
    nonpositive V_H are dropped.  The 95% slope interval comes from 1000
    bootstrap refits: percentile over refits of resampled per-trial errors
    when they are supplied, otherwise a studentized residual bootstrap
    (plain percentile intervals undercover badly at a handful of points).
    """
    triples = [(float(n), float(v), float(s)) for n, v, s in points]
    keep = [
        i
        for i, (n, v, _) in enumerate(triples)
        if math.isfinite(v) and v > 0 and n > 0
    ]
    if len(keep) < 3:
        raise DegenerateFitError(f"need >= 3 finite positive points, got {len(keep)}")
    n_vals = np.array([triples[i][0] for i in keep])
    v_vals = np.array([triples[i][1] for i in keep])
    slope, intercept = _ols_loglog(n_vals, v_vals)

    rng = np.random.default_rng(seed)
    if per_point_errors is not None:
        slopes = []
        resampled = np.column_stack(
            [
                _bootstrap_holevo(np.asarray(per_point_errors[i], dtype=float), n_boot, rng)
                for i in keep
            ]
        )
        for row in resampled:
            ok = np.isfinite(row) & (row > 0)
            if ok.sum() >= 3 and np.ptp(np.log(n_vals[ok])) > 0:
                slopes.append(_ols_loglog(n_vals[ok], row[ok])[0])
        if not slopes:
            raise DegenerateFitError("bootstrap produced no usable refits")
        lo, hi = np.percentile(slopes, [2.5, 97.5])
        return slope, intercept, (float(lo), float(hi))

    x = np.log(n_vals)
    x_centered = x - x.mean()
    sxx = float(np.sum(x_centered**2))
    fitted = intercept + slope * x
    residuals = np.log(v_vals) - fitted
    dof = residuals.size - 2
    if dof < 1:
        raise DegenerateFitError("too few points for a studentized interval")
    stderr = math.sqrt(float(residuals @ residuals) / dof / sxx)
    if stderr == 0.0:
        return slope, intercept, (slope, slope)
    idx = rng.integers(0, residuals.size, size=(n_boot, residuals.size))
    tstats = []
    for draw in residuals[idx]:
        resample = fitted + draw
        slope_b, intercept_b = _ols_loglog(n_vals, np.exp(resample))
        resid_b = resample - intercept_b - slope_b * x
        stderr_b = math.sqrt(float(resid_b @ resid_b) / dof / sxx)
        if stderr_b > 0.0:
            tstats.append((slope_b - slope) / stderr_b)
    if not tstats:
        raise DegenerateFitError("bootstrap produced no usable refits")
    q_lo, q_hi = np.percentile(tstats, [2.5, 97.5])
    return slope, intercept, (slope - q_hi * stderr, slope - q_lo * stderr)
