"""Seeded, replicated Monte Carlo experiments on G(n, p) and the graph process.

Replicate ``i`` of an experiment draws all of its randomness from
``RandomSource(spec.seed, i)``, so any single replicate can be re-run on its
own and results do not depend on the number of workers.

Experiment kinds and their record columns are listed in :data:`COLUMNS`.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import partial
from os import PathLike
from typing import Any, Callable

import numpy as np

from . import __version__
from .bondage import bondage_exact, certified_lower_bound, damage_directed, fink_bauer_bound, hartnell_rall_bound
from .domination import (
    DEFAULT_CAP,
    _Brancher,
    count_dominating_sets,
    gamma_exact,
    intersection_profile,
    z_per_vertex,
)
from .errors import CapacityError, DomainError
from .formulas import (
    DEFAULT_EPSILON,
    FormulaContext,
    compute_r,
    estimate_pi,
    expected_damage,
    expected_heavy_count,
    expected_heavy_damage,
    log_ewi_over_pi,
    log_f,
)
from .graph import Graph, RandomSource, iter_bits, process_stream, sample_gnp

__all__ = [
    "KINDS",
    "COLUMNS",
    "ExperimentSpec",
    "ExperimentResult",
    "run_experiment",
    "run_concentration",
    "run_process",
    "run_moments",
    "run_damage_mean",
    "run_profile",
    "write_results",
    "render_results",
    "metadata",
    "metadata_path",
    "mean_gate",
]

KINDS = ("concentration", "process", "moments", "damage_mean", "profile")

COLUMNS: dict[str, list[str]] = {
    "concentration": ["replicate", "stream", "n", "p", "r", "gamma", "gamma_minus_r", "x_gamma", "status"],
    "process": [
        "replicate", "stream", "m", "u", "v", "gamma_before", "gamma", "drop", "plateau_end", "plateau_length",
        "max_degree", "fink_bauer", "hartnell_rall", "certified", "exact_b", "status",
    ],
    "moments": [
        "replicate", "stream", "k", "x_k", "sum_z", "sum_z2", "sum_w", "sum_iw", "w_k",
        "identities_ok", "status",
    ],
    "damage_mean": [
        "replicate", "stream", "u", "v", "r", "L", "z_num", "z_den", "z", "z_light", "z_heavy",
        "heavy_count", "partition_ok", "status",
    ],
    "profile": ["replicate", "stream", "r", "x", "w", "status"],
}

TIMING_COLUMN = "wall_time"


@dataclass(frozen=True)
class ExperimentSpec:
    """Description of one replicated experiment.

    ``k`` is the set size for ``moments`` and overrides r for ``damage_mean``
    and ``profile``. ``m`` truncates a ``process`` run after m edges.
    ``limit`` turns on exact bondage numbers (searched up to ``limit``) at
    process plateau ends, or at every step with ``every_step``.
    """

    kind: str
    n: int
    p: float | None = None
    m: int | None = None
    k: int | None = None
    samples: int = 1
    seed: int = 0
    epsilon: float = DEFAULT_EPSILON
    cap: int = DEFAULT_CAP
    limit: int | None = None
    every_step: bool = False
    pair: tuple[int, int] = (0, 1)
    profile_cap: int = 2000
    pi_samples: int = 20000
    validate_every: int = 100

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.samples < 1:
            raise DomainError(f"samples must be at least 1, got {self.samples}")
        if self.n < 1:
            raise DomainError(f"n must be at least 1, got {self.n}")
        if self.kind != "process":
            if self.p is None:
                raise DomainError(f"experiment {self.kind!r} needs p")
            if not 0.0 <= self.p <= 1.0:
                raise DomainError(f"p must lie in [0, 1], got {self.p}")
        if not 0 < self.epsilon <= 1:
            raise DomainError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pair"] = list(self.pair)
        return d


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list[dict[str, Any]]
    summary: dict[str, Any]
    violations: int = 0

    @property
    def columns(self) -> list[str]:
        return COLUMNS[self.spec.kind]

    @property
    def ok(self) -> bool:
        return self.violations == 0


def mean_gate(values: list[float], expected: float, width: float = 3.0) -> dict[str, Any]:
    """Sample mean, its standard error and whether it lies within ``width`` SE.

    When every sample is zero the sample SE is zero and says nothing. For a
    non-negative integer count, Pr(count >= 1) <= its mean, so all-zero is
    plausible while N * expected <= 3; the gate then reports ``rule="zero"``.
    """
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean()) if arr.size else math.nan
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else math.nan
    rule = "se"
    if se > 0:
        z = (mean - expected) / se
        within = abs(z) <= width
    elif arr.size and not arr.any():
        rule = "zero"
        z = math.nan
        within = arr.size * expected <= width
    else:
        z = 0.0 if math.isclose(mean, expected, rel_tol=1e-12, abs_tol=1e-300) else math.inf
        within = z == 0.0
    return {"mean": mean, "se": se, "expected": expected, "z": z, "within": bool(within), "rule": rule}


def _run_replicates(spec: ExperimentSpec, fn: Callable, workers: int) -> list[list[dict]]:
    indices = range(spec.samples)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, [spec] * spec.samples, indices))
    return [fn(spec, i) for i in indices]


def _timed_call(fn: Callable, spec: ExperimentSpec, index: int) -> list[dict]:
    start = time.perf_counter()
    try:
        rows = fn(spec, index)
    except CapacityError:
        rows = [{"replicate": index, "stream": index, "status": "capacity"}]
    elapsed = time.perf_counter() - start
    for row in rows:
        row[TIMING_COLUMN] = elapsed
    return rows


def _timed(fn: Callable) -> Callable:
    # a partial of module-level functions pickles, so it can go to worker processes
    return partial(_timed_call, fn)


# -- concentration ------------------------------------------------------------


def _concentration_replicate(spec: ExperimentSpec, index: int) -> list[dict]:
    g = sample_gnp(spec.n, spec.p, RandomSource(spec.seed, index))
    r = compute_r(spec.n, spec.p)
    gamma = gamma_exact(g)
    return [{
        "replicate": index, "stream": index, "n": spec.n, "p": spec.p, "r": r,
        "gamma": gamma, "gamma_minus_r": gamma - r,
        "x_gamma": count_dominating_sets(g, gamma), "status": "ok",
    }]


_concentration_task = _timed(_concentration_replicate)


def run_concentration(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Domination number of G(n, p) against r; fraction of samples in {r, r+1}."""
    if spec.p > 1.0 - spec.epsilon:
        raise DomainError(f"p = {spec.p} exceeds 1 - epsilon = {1.0 - spec.epsilon}")
    r = compute_r(spec.n, spec.p)
    rows = [row for rs in _run_replicates(spec, _concentration_task, workers) for row in rs]
    good = [row for row in rows if row["status"] == "ok"]
    violations = sum(1 for row in good if not 1 <= row["gamma"] <= spec.n)
    diffs: dict[int, int] = {}
    for row in good:
        diffs[row["gamma_minus_r"]] = diffs.get(row["gamma_minus_r"], 0) + 1
    total = len(good)
    summary = {
        "kind": "concentration",
        "n": spec.n, "p": spec.p, "r": r,
        "samples": spec.samples, "completed": total, "excluded": len(rows) - total,
        "gamma_minus_r": {str(k): v for k, v in sorted(diffs.items())},
        "fraction_two_point": (diffs.get(0, 0) + diffs.get(1, 0)) / total if total else math.nan,
        "fraction_at_r": diffs.get(0, 0) / total if total else math.nan,
        "mean_x_gamma": float(np.mean([row["x_gamma"] for row in good])) if good else math.nan,
        "f_at_r": math.exp(log_f(spec.n, r, spec.p)),
        "violations": violations,
    }
    return ExperimentResult(spec, rows, summary, violations)


# -- graph process ------------------------------------------------------------


class _ProcessState:
    """Edge-by-edge graph with a minimum dominating set kept per component.

    Adding one edge changes only the component(s) of its endpoints. The
    union of the old sets still dominates the new component, so it seeds the
    branch and bound as an upper bound.
    """

    def __init__(self, n: int):
        self.n = n
        self.rows = [0] * n
        self.comp_of = [1 << v for v in range(n)]
        self.dom = {1 << v: 1 << v for v in range(n)}
        self.gamma = n

    def add(self, u: int, v: int) -> int:
        self.rows[u] |= 1 << v
        self.rows[v] |= 1 << u
        cu, cv = self.comp_of[u], self.comp_of[v]
        if cu == cv:
            comp = cu
            seed = self.dom.pop(cu)
        else:
            comp = cu | cv
            seed = self.dom.pop(cu) | self.dom.pop(cv)
        old = seed.bit_count()
        sub, labels = self.graph().induced(comp)
        index = {w: i for i, w in enumerate(labels)}
        local = 0
        for w in iter_bits(seed):
            local |= 1 << index[w]
        _, best = _Brancher(sub).minimum(old, local)
        result = 0
        for i in iter_bits(best):
            result |= 1 << labels[i]
        self.dom[comp] = result
        for w in iter_bits(comp):
            self.comp_of[w] = comp
        self.gamma += result.bit_count() - old
        return self.gamma

    def graph(self) -> Graph:
        return Graph._trusted(self.n, self.rows)


def _process_gammas(spec: ExperimentSpec, edges: list[tuple[int, int]]) -> list[int]:
    state = _ProcessState(spec.n)
    gammas = [spec.n]
    for step, (u, v) in enumerate(edges, 1):
        gammas.append(state.add(u, v))
        if spec.validate_every and step % spec.validate_every == 0:
            full = gamma_exact(state.graph())
            if full != state.gamma:
                raise AssertionError(f"incremental gamma {state.gamma} != recomputed {full} at m={step}")
    return gammas


def _bound_columns(spec: ExperimentSpec, g: Graph) -> dict[str, Any]:
    row: dict[str, Any] = {}
    degs = g.degrees()
    row["max_degree"] = max(degs, default=0)
    if g.m == 0:
        row["status"] = "edgeless"
        return row
    row["fink_bauer"] = fink_bauer_bound(g)
    row["hartnell_rall"] = hartnell_rall_bound(g)
    try:
        row["certified"] = certified_lower_bound(g, spec.cap).lower
    except CapacityError:
        row["status"] = "capacity"
        return row
    if spec.limit is not None:
        res = bondage_exact(g, limit=spec.limit, cap=spec.cap)
        row["exact_b"] = res.value if res.value is not None else f">{res.lower}"
    return row


def _process_replicate(spec: ExperimentSpec, index: int) -> list[dict]:
    n = spec.n
    edges = process_stream(n, RandomSource(spec.seed, index))
    if spec.m is not None:
        if not 0 <= spec.m <= len(edges):
            raise DomainError(f"m must lie in [0, {len(edges)}], got {spec.m}")
        edges = edges[: spec.m]
    gammas = _process_gammas(spec, edges)
    steps = len(edges)
    rows_out = []
    adj = [0] * n
    # last step before the current plateau; plateau_length counts edges since then
    start = 0
    for m in range(steps + 1):
        if m:
            u, v = edges[m - 1]
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        if m and gammas[m] != gammas[m - 1]:
            start = m - 1
        end = m == steps or gammas[m + 1] != gammas[m]
        row: dict[str, Any] = {
            "replicate": index, "stream": index, "m": m,
            "u": edges[m - 1][0] if m else "", "v": edges[m - 1][1] if m else "",
            "gamma_before": gammas[m - 1] if m else gammas[0],
            "gamma": gammas[m], "drop": gammas[m - 1] - gammas[m] if m else 0,
            "plateau_end": int(end), "plateau_length": m - start, "status": "ok",
        }
        if end or spec.every_step:
            row.update(_bound_columns(spec, Graph._trusted(n, adj)))
        rows_out.append(row)
    return rows_out


_process_task = _timed(_process_replicate)


def _process_checks(rows: list[dict], n: int, complete: bool) -> dict[str, int]:
    checks = {"monotone": 0, "endpoints": 0, "certified_le_length": 0, "exact_le_length": 0,
              "certified_lt_exact": 0}
    by_rep: dict[int, list[dict]] = {}
    for row in rows:
        by_rep.setdefault(row["replicate"], []).append(row)
    for reps in by_rep.values():
        if any(r.get("status") == "capacity" and "m" not in r for r in reps):
            continue
        gam = [r["gamma"] for r in reps]
        checks["monotone"] += sum(1 for a, b in zip(gam, gam[1:]) if b > a)
        if gam[0] != n or (complete and gam[-1] != 1):
            checks["endpoints"] += 1
        for r in reps:
            cert = r.get("certified")
            exact = r.get("exact_b")
            exact = exact if isinstance(exact, int) else None
            # removing the plateau's edges restores the larger gamma, so b <= length
            applies = r["plateau_end"] and r["gamma"] < n
            if applies and cert is not None and cert > r["plateau_length"]:
                checks["certified_le_length"] += 1
            if applies and exact is not None and exact > r["plateau_length"]:
                checks["exact_le_length"] += 1
            if cert is not None and exact is not None and not cert < exact:
                checks["certified_lt_exact"] += 1
    return checks


def run_process(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Random graph process: domination staircase and bondage bounds per plateau."""
    if spec.n < 2:
        raise DomainError(f"the graph process needs n >= 2, got {spec.n}")
    rows = [row for rs in _run_replicates(spec, _process_task, workers) for row in rs]
    complete = spec.m is None or spec.m == spec.n * (spec.n - 1) // 2
    checks = _process_checks(rows, spec.n, complete)
    ends = [r for r in rows if r.get("plateau_end") and r.get("fink_bauer") is not None]
    ratios = [r["fink_bauer"] / (r["m"] / spec.n) for r in ends if r["m"] > 0]
    cert_ratios = [r["certified"] / (r["m"] / spec.n) for r in ends if r["m"] > 0 and r.get("certified") is not None]
    drops = [r["drop"] for r in rows if r.get("drop")]
    summary = {
        "kind": "process", "n": spec.n, "samples": spec.samples,
        "plateaus": len([r for r in rows if r.get("plateau_end")]),
        "drops": len(drops),
        "max_drop": max(drops, default=0),
        "capacity_rows": sum(1 for r in rows if r.get("status") == "capacity"),
        "fink_bauer_over_m_per_n": _describe(ratios),
        "certified_over_m_per_n": _describe(cert_ratios),
        "checks": checks,
    }
    violations = sum(checks.values())
    summary["violations"] = violations
    return ExperimentResult(spec, rows, summary, violations)


def _describe(values: list[float]) -> dict[str, float]:
    if not values:
        return {"count": 0}
    arr = np.asarray(values, dtype=float)
    return {"count": int(arr.size), "mean": float(arr.mean()), "min": float(arr.min()), "max": float(arr.max())}


# -- first moment and identities ------------------------------------------------


def _moments_replicate(spec: ExperimentSpec, index: int) -> list[dict]:
    k = spec.k
    g = sample_gnp(spec.n, spec.p, RandomSource(spec.seed, index))
    x = count_dominating_sets(g, k)
    z = z_per_vertex(g, k)
    row: dict[str, Any] = {
        "replicate": index, "stream": index, "k": k, "x_k": x,
        "sum_z": sum(z), "sum_z2": sum(v * v for v in z), "status": "ok",
    }
    ok = row["sum_z"] == k * x
    if x <= spec.profile_cap:
        prof = intersection_profile(g, k, spec.cap)
        row["sum_w"] = prof.total
        row["sum_iw"] = sum(i * w for i, w in enumerate(prof.W))
        row["w_k"] = prof.W[k]
        ok = ok and row["sum_w"] == x * x and row["w_k"] == x and row["sum_iw"] == row["sum_z2"]
    row["identities_ok"] = int(ok)
    return [row]


_moments_task = _timed(_moments_replicate)


def run_moments(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Sample mean of X_k against f(n, k, p), with exact identity checks per replicate."""
    if spec.k is None or not 1 <= spec.k <= spec.n:
        raise DomainError(f"moments needs 1 <= k <= n, got k = {spec.k}")
    rows = [row for rs in _run_replicates(spec, _moments_task, workers) for row in rs]
    good = [r for r in rows if r["status"] == "ok"]
    violations = sum(1 for r in good if not r["identities_ok"])
    gate = mean_gate([r["x_k"] for r in good], math.exp(log_f(spec.n, spec.k, spec.p)))
    summary = {
        "kind": "moments", "n": spec.n, "p": spec.p, "k": spec.k,
        "samples": spec.samples, "completed": len(good),
        "x_k": gate,
        "identity_violations": violations,
        "violations": violations,
    }
    return ExperimentResult(spec, rows, summary, violations)


# -- damage of one directed pair ---------------------------------------------------


def _damage_context(spec: ExperimentSpec) -> FormulaContext:
    return FormulaContext.build(spec.n, spec.p, spec.epsilon, r=spec.k)


def _damage_replicate(spec: ExperimentSpec, index: int) -> list[dict]:
    ctx = _damage_context(spec)
    u, v = spec.pair
    g = sample_gnp(spec.n, spec.p, RandomSource(spec.seed, index))
    dmg = damage_directed(g, u, v, ctx.r, spec.cap)
    total = dmg.total
    light, heavy = dmg.split(ctx.L)
    return [{
        "replicate": index, "stream": index, "u": u, "v": v, "r": ctx.r, "L": ctx.L,
        "z_num": total.numerator, "z_den": total.denominator, "z": float(total),
        "z_light": float(light), "z_heavy": float(heavy),
        "heavy_count": sum(c for j, c in dmg.buckets.items() if j <= ctx.L),
        "partition_ok": int(light + heavy == total), "status": "ok",
    }]


_damage_task = _timed(_damage_replicate)


def run_damage_mean(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Mean damage of a fixed directed pair against its closed-form expectation."""
    u, v = spec.pair
    if u == v or not (0 <= u < spec.n and 0 <= v < spec.n):
        raise DomainError(f"pair {spec.pair} is not a pair of distinct vertices of 0..{spec.n - 1}")
    ctx = _damage_context(spec)
    rows = [row for rs in _run_replicates(spec, _damage_task, workers) for row in rs]
    good = [r for r in rows if r["status"] == "ok"]
    violations = sum(1 for r in good if not r["partition_ok"])
    z = [r["z"] for r in good]
    heavy = [r["z_heavy"] for r in good]
    summary = {
        "kind": "damage_mean", "n": spec.n, "p": spec.p, "r": ctx.r, "L": ctx.L,
        "samples": spec.samples, "completed": len(good),
        "z": mean_gate(z, math.exp(expected_damage(ctx))),
        "z_heavy": mean_gate(heavy, math.exp(expected_heavy_damage(ctx))),
        "heavy_count": mean_gate([r["heavy_count"] for r in good], math.exp(expected_heavy_count(ctx))),
        "mean_heavy_le_mean_total": bool(np.mean(heavy) <= np.mean(z)) if good else True,
        "partition_violations": violations,
        "violations": violations,
    }
    return ExperimentResult(spec, rows, summary, violations)


# -- intersection profile -------------------------------------------------------------


def _profile_replicate(spec: ExperimentSpec, index: int) -> list[dict]:
    r = spec.k if spec.k is not None else compute_r(spec.n, spec.p)
    g = sample_gnp(spec.n, spec.p, RandomSource(spec.seed, index))
    prof = intersection_profile(g, r, spec.cap)
    return [{
        "replicate": index, "stream": index, "r": r, "x": prof.W[r],
        "w": ";".join(str(w) for w in prof.W), "status": "ok",
    }]


_profile_task = _timed(_profile_replicate)


def run_profile(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Mean intersection profile W_i against E W_i / P_i times a Monte Carlo P_i."""
    ctx = FormulaContext.build(spec.n, spec.p, spec.epsilon, r=spec.k) if 0 < spec.p < 1 else None
    r = spec.k if spec.k is not None else compute_r(spec.n, spec.p)
    rows = [row for rs in _run_replicates(spec, _profile_task, workers) for row in rs]
    good = [row for row in rows if row["status"] == "ok"]
    profiles = [[int(x) for x in row["w"].split(";")] for row in good]
    violations = sum(1 for w in profiles if w[r] != 0 and sum(w) != w[r] ** 2)
    violations += sum(1 for row, w in zip(good, profiles) if sum(w) != row["x"] ** 2)
    per_i = []
    for i in range(r + 1):
        entry: dict[str, Any] = {"i": i}
        values = [w[i] for w in profiles]
        if ctx is not None and spec.n - 2 * r + i >= 0:
            pi, pi_se = estimate_pi(spec.n, spec.p, r, i, spec.pi_samples, RandomSource(spec.seed, spec.samples + i))
            expected = math.exp(log_ewi_over_pi(ctx, i)) * pi
            entry.update(mean_gate(values, expected))
            entry["p_i"] = pi
            entry["p_i_se"] = pi_se
        else:
            entry.update(mean_gate(values, 0.0))
        per_i.append(entry)
    summary = {
        "kind": "profile", "n": spec.n, "p": spec.p, "r": r,
        "samples": spec.samples, "completed": len(good),
        "w": per_i, "violations": violations,
    }
    return ExperimentResult(spec, rows, summary, violations)


_RUNNERS = {
    "concentration": run_concentration,
    "process": run_process,
    "moments": run_moments,
    "damage_mean": run_damage_mean,
    "profile": run_profile,
}


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    return _RUNNERS[spec.kind](spec, workers)


# -- output -------------------------------------------------------------------------


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        if value == math.inf:
            return "infinity"
        return repr(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return value


def metadata(result: ExperimentResult, include_timing: bool = False) -> dict:
    """Spec echo, library version, seed and column list for a result table."""
    return {
        "library": "bondlab",
        "version": __version__,
        "kind": result.spec.kind,
        "seed": result.spec.seed,
        "spec": result.spec.to_dict(),
        "columns": _columns(result, include_timing),
        "summary": _jsonable(result.summary),
    }


def _columns(result: ExperimentResult, include_timing: bool) -> list[str]:
    return list(result.columns) + ([TIMING_COLUMN] if include_timing else [])


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("infinity" if value > 0 else "-infinity")
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, np.generic):
        return value.item()
    return value


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "infinity" if value > 0 else "-infinity"
        return repr(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return value


def render_results(result: ExperimentResult, fmt: str = "csv", include_timing: bool = False) -> str:
    """Serialise the records; identical experiment parameters give identical text.

    CSV uses RFC 4180 quoting and CRLF line ends; JSON lines holds one object
    per record. Wall times vary between runs and are written only with
    ``include_timing``.
    """
    columns = _columns(result, include_timing)
    if fmt == "csv":
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(columns)
        for row in result.rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "jsonl":
        return "".join(
            json.dumps({c: _jsonable(row.get(c)) for c in columns}) + "\n" for row in result.rows
        )
    raise DomainError(f"unknown output format {fmt!r}; expected csv or jsonl")


def metadata_path(path: str | PathLike) -> str:
    return f"{path}.meta.json"


def write_results(result: ExperimentResult, path: str | PathLike, fmt: str = "csv", include_timing: bool = False) -> str:
    """Write the record table to ``path`` and its metadata to ``path + '.meta.json'``.

    Returns the metadata path. I/O failures are re-raised with the path in the message.
    """
    text = render_results(result, fmt, include_timing)
    meta_path = metadata_path(path)
    meta = json.dumps(metadata(result, include_timing), indent=2, sort_keys=True) + "\n"
    for target, body in ((path, text), (meta_path, meta)):
        try:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(body)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write results to {target}: {exc.strerror}") from exc
    return meta_path
