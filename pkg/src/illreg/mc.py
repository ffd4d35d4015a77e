"""Noise injection, Monte-Carlo benchmarks, oracle search, and trade-off curves.

Noise convention: relative level eps means i.i.d. Gaussian components with
standard deviation eps*||y||/sqrt(m), so E||xi||**2 = eps**2*||y||**2; rules
that need delta receive the realized ||xi||, which the simulation knows
exactly.

The harness shares one noise draw per (problem, level, rep) across all
methods and rules, seeds each rep as base_seed + rep, and aggregates with the
population std convention. Replications are independent, so they may run on a
thread pool (ILLREG_THREADS, default 1); results are merged keyed by rep
index, making parallel and serial runs byte-identical.

Error evaluation is done in the singular basis: with b = V.T x_true and
c = U.T y_noisy, the error of any filter solution is
sqrt(||g(lam)*s*c - b||**2 + ||x_perp||**2), costing O(rank) per grid point.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import filters, rules
from .core import CSV_STAMP, Svd, compute_svd, reconstructed_condition

RULE_IDS = ("oracle",) + rules.HEURISTICS + ("morozov",)

# Cells the literature leaves undefined: gcv needs a linear filter trace and
# the residual of tsvd/cg is not monotone in the parameter.
NOT_APPLICABLE = frozenset({("gcv", "cg"), ("morozov", "tsvd"), ("morozov", "cg")})


@dataclass(frozen=True)
class NoiseModel:
    """Relative white-noise level and the seed of its generator."""

    level: float
    seed: int

    def __post_init__(self):
        if self.level < 0.0:
            raise ValueError("noise level must be nonnegative")


def add_noise(y, model: NoiseModel):
    """Return (y + xi, ||xi||) for xi ~ N(0, (level*||y||/sqrt(m))**2) i.i.d."""
    y = np.asarray(y, dtype=float)
    if model.level == 0.0:
        return y.copy(), 0.0
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        raise ValueError("relative noise needs nonzero data")
    s = model.level * ynorm / math.sqrt(y.size)
    xi = s * np.random.default_rng(model.seed).standard_normal(y.size)
    return y + xi, float(np.linalg.norm(xi))


def default_grid(kind: str, svd: Svd, grid_min: float = 1e-12, grid_max: float = 1.0,
                 grid_count: int = 200) -> np.ndarray:
    """Per-method search grid, ordered regularization-descending.

    Filter methods get a geometric alpha grid from grid_max down to grid_min;
    tsvd gets every squared singular value (its natural thresholds); cg gets
    iteration counts 1..min(n, 200).
    """
    if kind == "cg":
        return np.arange(1, min(svd.V.shape[0], 200) + 1)
    if kind == "tsvd":
        return svd.s ** 2
    if kind in filters.KINDS:
        if not 0.0 < grid_min < grid_max:
            raise ValueError("grid needs 0 < min < max")
        return np.geomspace(grid_max, grid_min, grid_count)
    raise ValueError(f"unknown method {kind!r}")


class _ErrorEval:
    """Relative solution errors against one fixed x_true, any data vector."""

    def __init__(self, svd: Svd, x_true):
        x = np.asarray(x_true, dtype=float)
        self.svd = svd
        self.b = svd.V.T @ x
        self.perp_sq = max(float(x @ x - self.b @ self.b), 0.0)
        self.xnorm = float(np.linalg.norm(x))
        if self.xnorm == 0.0:
            raise ValueError("x_true must be nonzero for relative errors")

    def filter_errors(self, c, kind, alphas) -> np.ndarray:
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        lam = self.svd.s ** 2
        G = np.asarray(filters.g_value(kind, alphas[:, None], lam[None, :]))
        W = G * (self.svd.s * c)
        return np.sqrt(np.sum((W - self.b) ** 2, axis=1) + self.perp_sq) / self.xnorm

    def cg_errors(self, c, ks) -> np.ndarray:
        ks = np.atleast_1d(np.asarray(ks, dtype=int))
        Z, _ = filters.cgls_diag_iterates(self.svd.s, c, int(ks.max()))
        if Z.shape[0] == 0:
            return np.full(ks.size, 1.0)
        # Past a breakdown the iteration is stationary; reuse the last iterate.
        idx = np.minimum(ks - 1, Z.shape[0] - 1)
        return np.sqrt(np.sum((Z[idx] - self.b) ** 2, axis=1) + self.perp_sq) / self.xnorm

    def errors(self, c, kind, grid) -> np.ndarray:
        if kind == "cg":
            return self.cg_errors(c, grid)
        return self.filter_errors(c, kind, grid)

    def error_at(self, c, kind, param, k=None) -> float:
        if kind == "cg":
            return float(self.cg_errors(c, [int(k)])[0])
        return float(self.filter_errors(c, kind, [param])[0])


def best_error_oracle(svd: Svd, x_true, y_noisy, method: filters.MethodSpec, grid):
    """Grid point minimizing the relative error, ties toward stronger
    regularization. Returns (param, error); param is the native parameter
    (alpha or threshold for filters, iteration count for cg)."""
    grid = np.asarray(grid)
    if grid.size == 0:
        raise ValueError("empty grid")
    if method.kind == "cg":
        grid = np.sort(grid.astype(int))
    else:
        grid = np.sort(grid.astype(float))[::-1]
    ev = _ErrorEval(svd, x_true)
    c = svd.U.T @ np.asarray(y_noisy, dtype=float)
    errs = ev.errors(c, method.kind, grid)
    i = int(np.argmin(errs))
    param = int(grid[i]) if method.kind == "cg" else float(grid[i])
    return param, float(errs[i])


@dataclass(frozen=True)
class McConfig:
    """Benchmark configuration; problems are Problem instances."""

    problems: tuple
    methods: tuple
    rules: tuple
    noise_levels: tuple
    reps: int = 200
    base_seed: int = 0
    grid_min: float = 1e-12
    grid_max: float = 1.0
    grid_count: int = 200
    per_rep_log: bool = False

    def __post_init__(self):
        object.__setattr__(self, "problems", tuple(self.problems))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "noise_levels", tuple(float(e) for e in self.noise_levels))
        if not self.problems:
            raise ValueError("need at least one problem")
        for kind in self.methods:
            if kind not in filters.KINDS:
                raise ValueError(f"unknown method {kind!r}")
        for rule in self.rules:
            if rule not in RULE_IDS:
                raise ValueError(f"unknown rule {rule!r}")
        if any(e < 0.0 for e in self.noise_levels) or not self.noise_levels:
            raise ValueError("noise levels must be nonnegative and nonempty")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not 0.0 < self.grid_min < self.grid_max:
            raise ValueError("grid needs 0 < min < max")
        if self.grid_count < 2:
            raise ValueError("grid_count must be at least 2")


@dataclass(frozen=True)
class McRow:
    problem: str
    method: str
    rule: str
    noise_level: float
    rep_count: int
    e_min: float
    e_max: float
    e_mean: float
    e_std: float
    param_mean: float


@dataclass(frozen=True)
class McRepRow:
    problem: str
    method: str
    rule: str
    noise_level: float
    rep: int
    seed: int
    param: float
    rel_error: float
    delta_realized: float


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


@dataclass(frozen=True)
class McReport:
    rows: tuple
    rep_rows: tuple | None

    def row(self, problem: str, method: str, rule: str, noise_level: float) -> McRow:
        for row in self.rows:
            if (row.problem == problem and row.method == method and row.rule == rule
                    and row.noise_level == float(noise_level)):
                return row
        raise KeyError(f"no cell ({problem}, {method}, {rule}, {noise_level})")

    def to_csv(self) -> str:
        lines = [CSV_STAMP + "mc",
                 "problem,method,rule,noise_level,rep_count,e_min,e_max,e_mean,e_std,param_mean"]
        for r in self.rows:
            lines.append(",".join([r.problem, r.method, r.rule, _fmt(r.noise_level),
                                   str(r.rep_count), _fmt(r.e_min), _fmt(r.e_max),
                                   _fmt(r.e_mean), _fmt(r.e_std), _fmt(r.param_mean)]))
        return "\n".join(lines) + "\n"

    def per_rep_csv(self) -> str:
        if self.rep_rows is None:
            raise ValueError("per-rep logging was not enabled")
        lines = [CSV_STAMP + "mc-reps",
                 "problem,method,rule,noise_level,rep,seed,param,rel_error,delta_realized"]
        for r in self.rep_rows:
            lines.append(",".join([r.problem, r.method, r.rule, _fmt(r.noise_level),
                                   str(r.rep), str(r.seed), _fmt(r.param),
                                   _fmt(r.rel_error), _fmt(r.delta_realized)]))
        return "\n".join(lines) + "\n"


def _worker_count() -> int:
    raw = os.environ.get("ILLREG_THREADS")
    if raw is None or raw.strip() == "":
        return 1
    count = int(raw)
    if count < 1:
        raise ValueError("ILLREG_THREADS must be a positive integer")
    return min(count, os.cpu_count() or 1)


def _rep_cells(svd, ev, y_exact, grids, cfg: McConfig, eps: float, rep: int):
    """One replication: dict (method, rule) -> (param, rel_error) plus delta.

    The oracle cell is the best error over the method grid and every
    rule-chosen parameter of the same replication, so rule error >= oracle
    error holds identically, not just up to grid resolution.
    """
    seed = cfg.base_seed + rep
    y_noisy, delta = add_noise(y_exact, NoiseModel(level=eps, seed=seed))
    c = svd.U.T @ y_noisy
    cells = {}
    for kind in cfg.methods:
        grid = grids[kind]
        spec = filters.METHODS[kind]
        rule_cells = {}
        for rule in cfg.rules:
            if rule == "oracle":
                continue
            if (rule, kind) in NOT_APPLICABLE:
                rule_cells[rule] = None
                continue
            if rule == "morozov":
                out = rules.morozov_like(svd, y_noisy, delta, kind)
            else:
                out = rules.heuristic_select(rule, svd, y_noisy, spec, grid)
            err = ev.error_at(c, kind, out.param, k=out.k)
            param = out.param
            rule_cells[rule] = (param, err)
        if "oracle" in cfg.rules:
            errs = ev.errors(c, kind, grid)
            i = int(np.argmin(errs))
            best_param = 1.0 / float(grid[i]) if kind == "cg" else float(grid[i])
            best_err = float(errs[i])
            for cell in rule_cells.values():
                if cell is not None and cell[1] < best_err:
                    best_param, best_err = cell
            rule_cells["oracle"] = (best_param, best_err)
        for rule, cell in rule_cells.items():
            cells[(kind, rule)] = cell
    return cells, delta


def run_monte_carlo(cfg: McConfig) -> McReport:
    """Full benchmark: every (problem, method, rule, noise level) cell
    aggregated over cfg.reps replications."""
    svds = {p.name: compute_svd(p.A) for p in cfg.problems}
    evals = {p.name: _ErrorEval(svds[p.name], p.x_true) for p in cfg.problems}
    workers = _worker_count()

    rows = []
    rep_rows = [] if cfg.per_rep_log else None
    for prob in cfg.problems:
        svd = svds[prob.name]
        ev = evals[prob.name]
        grids = {kind: default_grid(kind, svd, cfg.grid_min, cfg.grid_max, cfg.grid_count)
                 for kind in cfg.methods}
        for eps in cfg.noise_levels:
            def job(rep):
                return _rep_cells(svd, ev, prob.y_exact, grids, cfg, eps, rep)

            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    by_rep = list(pool.map(job, range(cfg.reps)))
            else:
                by_rep = [job(rep) for rep in range(cfg.reps)]

            if rep_rows is not None:
                for rep, (cells, delta) in enumerate(by_rep):
                    for kind in cfg.methods:
                        for rule in cfg.rules:
                            cell = cells[(kind, rule)]
                            if cell is None:
                                continue
                            rep_rows.append(McRepRow(
                                problem=prob.name, method=kind, rule=rule,
                                noise_level=eps, rep=rep, seed=cfg.base_seed + rep,
                                param=float(cell[0]), rel_error=float(cell[1]),
                                delta_realized=delta))

            for kind in cfg.methods:
                for rule in cfg.rules:
                    cells0 = [by_rep[rep][0][(kind, rule)] for rep in range(cfg.reps)]
                    if cells0[0] is None:
                        rows.append(McRow(problem=prob.name, method=kind, rule=rule,
                                          noise_level=eps, rep_count=0,
                                          e_min=math.nan, e_max=math.nan, e_mean=math.nan,
                                          e_std=math.nan, param_mean=math.nan))
                        continue
                    errs = np.array([cell[1] for cell in cells0])
                    params = np.array([cell[0] for cell in cells0])
                    rows.append(McRow(
                        problem=prob.name, method=kind, rule=rule, noise_level=eps,
                        rep_count=cfg.reps,
                        e_min=float(errs.min()), e_max=float(errs.max()),
                        e_mean=float(errs.mean()), e_std=float(errs.std(ddof=0)),
                        param_mean=float(params.mean())))
    return McReport(rows=tuple(rows), rep_rows=None if rep_rows is None else tuple(rep_rows))


def conditioning_error_curve(svd: Svd, x_true, y_noisy, kind: str, alpha_grid):
    """Rows (alpha, reconstructed condition, relative error), alpha descending."""
    alphas = np.sort(np.asarray(alpha_grid, dtype=float))[::-1]
    if alphas.size == 0:
        raise ValueError("empty grid")
    ev = _ErrorEval(svd, x_true)
    c = svd.U.T @ np.asarray(y_noisy, dtype=float)
    errs = ev.filter_errors(c, kind, alphas)
    return [(float(al), reconstructed_condition(svd, kind, al), float(e))
            for al, e in zip(alphas, errs)]


def median_error_curve(problem, kind: str, noise_level: float, reps: int,
                       base_seed: int, alpha_grid, svd: Svd | None = None):
    """conditioning_error_curve with the error replaced by its median over
    seeded replications (seed = base_seed + rep, same convention as the
    harness)."""
    if svd is None:
        svd = compute_svd(problem.A)
    alphas = np.sort(np.asarray(alpha_grid, dtype=float))[::-1]
    ev = _ErrorEval(svd, problem.x_true)
    all_errs = np.empty((reps, alphas.size))
    for rep in range(reps):
        y_noisy, _ = add_noise(problem.y_exact, NoiseModel(level=noise_level, seed=base_seed + rep))
        all_errs[rep] = ev.filter_errors(svd.U.T @ y_noisy, kind, alphas)
    med = np.median(all_errs, axis=0)
    return [(float(al), reconstructed_condition(svd, kind, al), float(e))
            for al, e in zip(alphas, med)]


def _monotone_curve(rows):
    """Reduce curve rows to the efficient frontier: for each conditioning
    level, the best error achievable at that level or below (running
    minimum over increasing conditioning). Error-vs-conditioning curves are
    U-shaped, so the raw relation is not single-valued in error; the
    frontier is what "achieves the same error with smaller conditioning"
    compares."""
    cond = np.array([row[1] for row in rows])
    err = np.array([row[2] for row in rows])
    order = np.argsort(cond, kind="stable")
    cond, err = cond[order], np.minimum.accumulate(err[order])
    keep = np.ones(cond.size, dtype=bool)
    keep[:-1] = cond[:-1] < cond[1:]
    return cond[keep], err[keep]


def curve_dominance(rows_a, rows_b, n_levels: int = 200):
    """Compare two trade-off frontiers on common conditioning levels.

    Interpolates ln(best error at conditioning budget) against
    ln(conditioning) on both curves over the overlap of their conditioning
    ranges and returns (violation fraction, max relative excess) of curve a
    above curve b. Zero excess means a is at or below b everywhere sampled.
    """
    ca, ea = _monotone_curve(rows_a)
    cb, eb = _monotone_curve(rows_b)
    lo = max(ca[0], cb[0])
    hi = min(ca[-1], cb[-1])
    if not lo < hi:
        raise ValueError("curves share no conditioning range")
    levels = np.linspace(math.log(lo), math.log(hi), n_levels)
    fa = np.exp(np.interp(levels, np.log(ca), np.log(ea)))
    fb = np.exp(np.interp(levels, np.log(cb), np.log(eb)))
    excess = fa / fb - 1.0
    violations = float(np.mean(excess > 0.0))
    return violations, float(max(excess.max(), 0.0))
