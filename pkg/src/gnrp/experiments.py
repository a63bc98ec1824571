"""Monte Carlo sweeps around the structural thresholds of G(n, r, p).

A sweep fixes (theorem, n, r) and walks a one-dimensional grid: c-values
with q = c ln n / n, K-values with the same mapping (the Hamiltonicity
convention), or p directly. Every trial's seed derives from (master seed,
point index, trial index), so any record can be regenerated in isolation
and aggregation is a deterministic fold independent of scheduling.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from enum import Enum
from functools import partial
from multiprocessing import get_context

import numpy as np

from gnrp import solvers
from gnrp.generator import ModelParams, generate, trial_seed
from gnrp.geometry import GridMode, build_grid
from gnrp.graph_core import (
    degree_report,
    diameter_exact,
    is_connected,
    isolated_count,
)
from gnrp.hamilton import HamiltonCertificate, hamilton_constructive

SCHEMA_VERSION = 1
CSV_HEADER = "theorem,n,r,p,c_or_K,trial,seed,quantity,value,ratio,wall_ms"
WILSON_Z = 1.96


class Theorem(Enum):
    DEGREE = "DEGREE"
    CONNECTIVITY = "CONNECTIVITY"
    CLIQUE = "CLIQUE"
    HAM = "HAM"
    ALPHA = "ALPHA"
    CHI = "CHI"
    DIAM = "DIAM"


class GridKind(Enum):
    C = "c"
    K = "K"
    P = "p"


class UndefinedFormula(ValueError):
    """The theorem's formula is not defined at these parameters."""


class NoCrossing(ValueError):
    """Success fractions never bracket the requested target."""


# trials where success means "indicator came up 1" rather than
# "a finite quantity was measured"
_INDICATOR = frozenset({Theorem.DEGREE, Theorem.CONNECTIVITY, Theorem.HAM})


@dataclass(frozen=True)
class SweepConfig:
    theorem: Theorem
    n: int
    r: float
    grid_kind: GridKind
    grid: tuple[float, ...]
    trials: int = 30
    master_seed: int = 0
    budget: int = solvers.DEFAULT_BUDGET
    restarts: int = 20
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0.0 < self.r < 0.5:
            raise ValueError(f"r must lie in (0, 0.5), got {self.r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.grid:
            raise ValueError("grid is empty")
        for v in self.grid:
            if v < 0:
                raise ValueError(f"grid values must be >= 0, got {v}")
            if self.grid_kind is GridKind.P and v > 1.0:
                raise ValueError(f"p grid value out of [0, 1]: {v}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    def point_p(self, value: float) -> float:
        """Edge-retention probability at one grid point.

        For c/K grids this derives p from q = value * ln n / n; the result
        may exceed 1, which run_sweep reports as an infeasible point.
        """
        if self.grid_kind is GridKind.P:
            return float(value)
        q = value * math.log(self.n) / self.n
        return q / (math.pi * self.r * self.r)


@dataclass(frozen=True)
class TrialRecord:
    theorem: Theorem
    n: int
    r: float
    p: float
    value: float  # the grid coordinate (c, K, or p)
    point_index: int
    trial: int
    seed: int
    quantity: str
    measured: float
    ratio: float | None
    extras: dict
    wall_ms: float  # real elapsed time; the CSV writes 0 instead


@dataclass(frozen=True)
class PointSummary:
    value: float
    p: float
    infeasible: bool
    trials: int
    successes: int
    success_frac: float | None
    wilson_lo: float | None
    wilson_hi: float | None
    mean: float | None
    stderr: float | None
    mean_ratio: float | None
    wall_ms: float


@dataclass(frozen=True)
class SweepSummary:
    theorem: Theorem
    n: int
    r: float
    grid_kind: GridKind
    trials: int
    master_seed: int
    points: tuple[PointSummary, ...]


def formula_value(theorem: Theorem, n: int, r: float, p: float) -> float:
    """The theorem's predicted quantity at (n, r, p).

    CLIQUE: 2 ln((1-p) n r^2) / (1-p)
    ALPHA:  r^{-2} log_{1/(1-p)}(n r^2)
    CHI:    n r^2 / log_{1/(1-p)}(n r^2)
    DIAM:   r^{-1} + ln n / ln(n r^2 p)

    Raises UndefinedFormula outside each formula's domain (and always for
    DEGREE, CONNECTIVITY, HAM, which have thresholds rather than formulas).
    """
    if theorem is Theorem.CLIQUE:
        x = (1.0 - p) * n * r * r
        if x <= 1.0:
            raise UndefinedFormula(f"(1-p)nr^2 = {x:.6g} <= 1")
        return 2.0 * math.log(x) / (1.0 - p)
    if theorem in (Theorem.ALPHA, Theorem.CHI):
        x = n * r * r
        if not 0.0 < p < 1.0 or x <= 1.0:
            raise UndefinedFormula(f"need 0 < p < 1 and nr^2 > 1, got p={p}, nr^2={x:.6g}")
        lg = math.log(x) / math.log(1.0 / (1.0 - p))
        return lg / (r * r) if theorem is Theorem.ALPHA else x / lg
    if theorem is Theorem.DIAM:
        x = n * r * r * p
        if x <= 1.0 or n <= 1:
            raise UndefinedFormula(f"need nr^2p > 1 and n > 1, got nr^2p={x:.6g}")
        return 1.0 / r + math.log(n) / math.log(x)
    raise UndefinedFormula(f"no formula for {theorem.value}")


def formula_ratio(record: TrialRecord, theorem: Theorem | None = None) -> float:
    """measured / formula_value at the record's parameters."""
    th = record.theorem if theorem is None else theorem
    return record.measured / formula_value(th, record.n, record.r, record.p)


def _measure(cfg: SweepConfig, p: float, seed: int):
    """Run one trial: returns (quantity name, measured value, extras)."""
    inst = generate(ModelParams(n=cfg.n, r=cfg.r, p=p, seed=seed))
    th = cfg.theorem
    if th is Theorem.DEGREE:
        if p == 0.0:
            return "degree_within_band", float("nan"), {}
        rep = degree_report(inst.graph, inst.params)
        return "degree_within_band", float(rep.within_band), {
            "min_degree": float(rep.min_degree),
            "max_degree": float(rep.max_degree),
            "band_lo": rep.band_lo,
            "band_hi": rep.band_hi,
        }
    if th is Theorem.CONNECTIVITY:
        g = inst.graph
        return "connected", float(is_connected(g)), {
            "isolated": float(isolated_count(g)),
        }
    if th is Theorem.CLIQUE:
        res = solvers.clique_lower_dense_cell(inst, budget=cfg.budget)
        return "omega_lower", float(res.size), {}
    if th is Theorem.HAM:
        out = hamilton_constructive(inst, restarts=cfg.restarts, seed=seed)
        if isinstance(out, HamiltonCertificate):
            return "hamiltonian", 1.0, {"splices": float(len(out.splice_edges))}
        return "hamiltonian", 0.0, {"failure_stage": out.stage.value}
    if th is Theorem.ALPHA:
        lo = solvers.alpha_lower_spaced_cells(inst, budget=cfg.budget)
        up = solvers.alpha_upper_cellsum(inst, budget=cfg.budget)
        if lo.size > up.value:
            raise AssertionError(f"sandwich violated: {lo.size} > {up.value}")
        return "alpha_lower", float(lo.size), {"alpha_upper": float(up.value)}
    if th is Theorem.CHI:
        lo, up = solvers.chromatic_sandwich(inst, budget=cfg.budget)
        if lo > up:
            raise AssertionError(f"sandwich violated: {lo} > {up}")
        return "chi_upper", float(up), {"chi_lower": float(lo)}
    if th is Theorem.DIAM:
        g = inst.graph
        if not is_connected(g):
            return "diameter", float("nan"), {"connected": 0.0}
        cells = build_grid(cfg.r / 2.0, GridMode.AT_MOST).cell_ids(inst.points)
        d = diameter_exact(g, cell_ids=cells)
        return "diameter", float(d), {"connected": 1.0}
    raise ValueError(f"unknown theorem {th}")


def _run_trial(cfg: SweepConfig, task) -> TrialRecord:
    point_index, value, p, trial = task
    seed = trial_seed(cfg.master_seed, point_index, trial)
    t0 = time.perf_counter()
    quantity, measured, extras = _measure(cfg, p, seed)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    try:
        ratio = measured / formula_value(cfg.theorem, cfg.n, cfg.r, p)
        if not math.isfinite(ratio):
            ratio = None
    except UndefinedFormula:
        ratio = None
    return TrialRecord(
        theorem=cfg.theorem, n=cfg.n, r=cfg.r, p=p, value=float(value),
        point_index=point_index, trial=trial, seed=seed, quantity=quantity,
        measured=measured, ratio=ratio, extras=extras, wall_ms=wall_ms,
    )


def _is_success(theorem: Theorem, rec: TrialRecord) -> bool:
    if theorem in _INDICATOR:
        return rec.measured == 1.0
    return math.isfinite(rec.measured)


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z):
    """Wilson score interval for a binomial fraction."""
    if trials == 0:
        return 0.0, 1.0
    ph = successes / trials
    denom = 1.0 + z * z / trials
    center = (ph + z * z / (2 * trials)) / denom
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def summarize(cfg: SweepConfig, records, infeasible) -> SweepSummary:
    by_point = {}
    for rec in records:
        by_point.setdefault(rec.point_index, []).append(rec)
    infeasible = set(infeasible)
    points = []
    for pi, value in enumerate(cfg.grid):
        p = cfg.point_p(value)
        if pi in infeasible:
            points.append(PointSummary(
                value=float(value), p=p, infeasible=True, trials=0, successes=0,
                success_frac=None, wilson_lo=None, wilson_hi=None,
                mean=None, stderr=None, mean_ratio=None, wall_ms=0.0,
            ))
            continue
        recs = sorted(by_point.get(pi, []), key=lambda rec: rec.trial)
        succ = sum(_is_success(cfg.theorem, rec) for rec in recs)
        finite = [rec.measured for rec in recs if math.isfinite(rec.measured)]
        ratios = [rec.ratio for rec in recs if rec.ratio is not None]
        mean = float(np.mean(finite)) if finite else None
        stderr = (
            float(np.std(finite, ddof=1) / math.sqrt(len(finite)))
            if len(finite) >= 2 else None
        )
        lo, hi = wilson_interval(succ, len(recs)) if recs else (None, None)
        points.append(PointSummary(
            value=float(value), p=p, infeasible=False, trials=len(recs),
            successes=succ,
            success_frac=succ / len(recs) if recs else None,
            wilson_lo=lo, wilson_hi=hi, mean=mean, stderr=stderr,
            mean_ratio=float(np.mean(ratios)) if ratios else None,
            wall_ms=float(sum(rec.wall_ms for rec in recs)),
        ))
    return SweepSummary(
        theorem=cfg.theorem, n=cfg.n, r=cfg.r, grid_kind=cfg.grid_kind,
        trials=cfg.trials, master_seed=cfg.master_seed, points=tuple(points),
    )


def run_sweep(cfg: SweepConfig):
    """Run every feasible (grid point, trial) pair; returns (records, summary).

    Grid points whose derived p exceeds 1 are reported infeasible in the
    summary and skipped, never clamped. With workers > 1 trials run in a
    process pool; the fold order is fixed by (point index, trial index), so
    results do not depend on the worker count.
    """
    tasks = []
    infeasible = []
    for pi, value in enumerate(cfg.grid):
        p = cfg.point_p(value)
        if p > 1.0:
            infeasible.append(pi)
            continue
        tasks.extend((pi, float(value), p, t) for t in range(cfg.trials))
    if cfg.workers > 1 and len(tasks) > 1:
        with get_context("fork").Pool(cfg.workers) as pool:
            records = pool.map(partial(_run_trial, cfg), tasks)
    else:
        records = [_run_trial(cfg, task) for task in tasks]
    records.sort(key=lambda rec: (rec.point_index, rec.trial))
    return records, summarize(cfg, records, infeasible)


def threshold_crossing(summary: SweepSummary, target: float) -> float:
    """Grid value at which the success fraction crosses `target`.

    Fractions are smoothed to a non-decreasing sequence by isotonic
    regression, then interpolated linearly between the bracketing points.
    Raises NoCrossing when the smoothed fractions never reach the target
    from below.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    pts = [q for q in summary.points if not q.infeasible and q.trials > 0]
    if not pts:
        raise NoCrossing("no feasible grid points")
    from scipy.optimize import isotonic_regression

    x = np.array([q.value for q in pts])
    y = isotonic_regression(np.array([q.success_frac for q in pts])).x
    if target < y[0] or target > y[-1]:
        raise NoCrossing(
            f"fractions span [{y[0]:.3f}, {y[-1]:.3f}], never bracket {target}"
        )
    i = int(np.argmax(y >= target))
    if i == 0:
        return float(x[0])
    lo, hi = y[i - 1], y[i]
    return float(x[i - 1] + (target - lo) / (hi - lo) * (x[i] - x[i - 1]))


def write_records_csv(records, path) -> None:
    """One row per record under a fixed header.

    The wall_ms column is written as 0 so that reruns with the same master
    seed are byte-identical regardless of scheduling; real timings live in
    the JSON summary.
    """
    lines = [f"# schema_version={SCHEMA_VERSION}", CSV_HEADER]
    for rec in records:
        lines.append(",".join([
            rec.theorem.value,
            str(rec.n),
            repr(rec.r),
            repr(rec.p),
            repr(rec.value),
            str(rec.trial),
            str(rec.seed),
            rec.quantity,
            repr(rec.measured),
            "" if rec.ratio is None else repr(rec.ratio),
            "0",
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def summary_to_dict(summary: SweepSummary) -> dict:
    points = []
    for q in summary.points:
        d = {
            "value": q.value,
            "p": q.p,
            "trials": q.trials,
            "successes": q.successes,
            "success_frac": q.success_frac,
            "wilson_lo": q.wilson_lo,
            "wilson_hi": q.wilson_hi,
            "mean": q.mean,
            "stderr": q.stderr,
            "mean_ratio": q.mean_ratio,
            "wall_ms": q.wall_ms,
        }
        if q.infeasible:
            d["error"] = "INFEASIBLE_POINT"
        points.append(d)
    return {
        "schema_version": SCHEMA_VERSION,
        "theorem": summary.theorem.value,
        "n": summary.n,
        "r": summary.r,
        "grid_kind": summary.grid_kind.value,
        "trials": summary.trials,
        "master_seed": summary.master_seed,
        "points": points,
    }


def write_summary_json(summary: SweepSummary, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary_to_dict(summary), fh, indent=2)
        fh.write("\n")
