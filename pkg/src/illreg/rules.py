"""Parameter-choice rules.

Three families:

* a-priori maps delta -> alpha built on inverses of Theta functions
  (apriori_theta_p, apriori_delta, apriori_theta_eps);
* the a-posteriori rule alpha(delta) = sup{alpha : ||T x_alpha - y|| <=
  delta + sqrt(delta)} (morozov_like), restricted to methods whose residual
  is monotone in alpha;
* five data-driven rules (heuristic_select): gcv, dqo, h1, h2, lcv.

All rules work purely in the singular basis: with c = U.T y and lam = s**2,
solution and residual norms are coordinate-wise expressions, so a grid scan
costs O(grid * rank). For the iterative method the same trick applies because
CG on the normal equations commutes with the orthogonal change of variables.

Parameter conventions for discrete methods: tsvd outcomes carry the cut
threshold (a squared singular value) as param, cg outcomes carry alpha = 1/k;
both set the k field. Ties always break toward the stronger regularization
(larger alpha, smaller k), implemented by scanning grids in
regularization-descending order and keeping the first minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from . import filters
from .core import Svd

HEURISTICS = ("gcv", "dqo", "h1", "h2", "lcv")

_MOROZOV_LO = 1e-14
_MOROZOV_HI = 1.0


@dataclass(frozen=True)
class RuleOutcome:
    """Chosen parameter plus the evidence for the choice.

    objective_trace rows are (param, objective value) in scan order; the
    chosen param is one of them, except for the Morozov-like rule where it is
    the bisection limit (still appended as the final row). flags is a subset
    of {"boundary_hit", "not_applicable", "non_monotone_warning"}.
    """

    param: float
    k: int | None
    objective: float
    flags: frozenset
    objective_trace: np.ndarray

    def __post_init__(self):
        trace = np.asarray(self.objective_trace, dtype=float).reshape(-1, 2)
        trace.flags.writeable = False
        object.__setattr__(self, "objective_trace", trace)
        if "not_applicable" not in self.flags and trace.shape[0] == 0:
            raise ValueError("an applicable rule must retain a nonempty trace")


def _not_applicable() -> RuleOutcome:
    return RuleOutcome(param=math.nan, k=None, objective=math.nan,
                       flags=frozenset({"not_applicable"}),
                       objective_trace=np.zeros((0, 2)))


def theta_p_fn(lam, p: float):
    """Theta_p(lam) = sqrt(lam) * ln(1/lam)**(-p), increasing on (0, exp(-1)]."""
    lam = np.asarray(lam, dtype=float)
    return np.sqrt(lam) * np.log(1.0 / lam) ** (-p)


def apriori_theta_p(delta: float, p: float, a: float = math.exp(-1.0)) -> float:
    """Inverse of Theta_p at delta, to 1e-12 relative accuracy.

    Solved in t = ln(lam): 0.5*t - p*ln(-t) = ln(delta) is strictly increasing
    there, and brentq on the log form is immune to the huge dynamic range of
    lam itself.
    """
    if p <= 0.0:
        raise ValueError("p must be positive")
    if not 0.0 < a <= math.exp(-1.0):
        raise ValueError("spectral bound a must lie in (0, exp(-1)]")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    cap = float(theta_p_fn(a, p))
    if delta > cap * (1.0 + 1e-12):
        raise ValueError(f"delta {delta} exceeds Theta_p(a) = {cap}; rule undefined")

    ln_delta = math.log(delta)

    def fn(t):
        return 0.5 * t - p * math.log(-t) - ln_delta

    hi = math.log(a)
    if fn(hi) <= 0.0:
        # delta within the 1e-12 tolerance of the cap; the root is a itself.
        return float(a)
    lo = hi - 2.0
    while fn(lo) > 0.0:
        lo = hi + 2.0 * (lo - hi)
        if lo < -690.0:
            raise ValueError("delta too small; the root underflows")
    t = scipy.optimize.brentq(fn, lo, hi, xtol=1e-13, rtol=1e-15)
    lam = math.exp(t)
    if abs(theta_p_fn(lam, p) - delta) > 1e-12 * delta:
        raise ArithmeticError("bisection failed to reach the requested tolerance")
    return lam


def apriori_delta(delta: float) -> float:
    """Smoothness-free choice alpha = delta."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    return float(delta)


def apriori_theta_eps(delta: float, eps: float = 0.125, phi=None, a: float = math.exp(-1.0)) -> float:
    """Inverse of Theta_eps(lam) = lam**(-eps) * sqrt(lam) * phi(lam).

    phi must be increasing and positive on (0, a]; the default is the
    identity, for which the map reduces to lam**(3/2 - eps). Requires
    delta <= Theta(a) = sqrt(a)*phi(a), the regime the choice is meant for.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if not 0.0 < a <= math.exp(-1.0):
        raise ValueError("spectral bound a must lie in (0, exp(-1)]")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if phi is None:
        phi = lambda lam: lam
    cap = math.sqrt(a) * float(phi(a))
    if delta > cap * (1.0 + 1e-12):
        raise ValueError(f"delta {delta} exceeds Theta(a) = {cap}; rule undefined")

    ln_delta = math.log(delta)

    def fn(t):
        return (0.5 - eps) * t + math.log(float(phi(math.exp(t)))) - ln_delta

    hi = math.log(a)
    lo = hi - 2.0
    while fn(lo) > 0.0:
        lo = hi + 2.0 * (lo - hi)
        if lo < -690.0:
            raise ValueError("delta too small; the root underflows")
    t = scipy.optimize.brentq(fn, lo, hi, xtol=1e-13, rtol=1e-15)
    lam = math.exp(t)
    val = lam ** (-eps) * math.sqrt(lam) * float(phi(lam))
    if abs(val - delta) > 1e-12 * delta:
        raise ArithmeticError("bisection failed to reach the requested tolerance")
    return lam


def _spectral_coeffs(svd: Svd, y_noisy):
    """Return (c, lam, y_perp_sq): data coefficients, squared singular values,
    and the squared data mass outside the retained left singular space."""
    y = np.asarray(y_noisy, dtype=float)
    if y.shape != (svd.U.shape[0],):
        raise ValueError("data length does not match operator rows")
    c = svd.U.T @ y
    y_perp_sq = max(float(y @ y - c @ c), 0.0)
    return c, svd.s ** 2, y_perp_sq


def residual_norm(svd: Svd, y_noisy, kind: str, alpha: float) -> float:
    """||T x_alpha - y|| evaluated in the singular basis."""
    c, lam, y_perp_sq = _spectral_coeffs(svd, y_noisy)
    r = np.asarray(filters.r_value(kind, alpha, lam))
    return math.sqrt(float(np.sum((r * c) ** 2)) + y_perp_sq)


def morozov_like(svd: Svd, y_noisy, delta: float, kind: str) -> RuleOutcome:
    """Largest alpha with residual <= delta + sqrt(delta).

    Bracketing scan over a geometric grid on [1e-14, 1], then bisection in
    ln(alpha) to 1e-3 relative width; the returned alpha is the confirmed
    feasible endpoint, so its residual satisfies the defining inequality
    exactly. boundary_hit marks a sup at either interval end.
    """
    if kind not in ("nrm", "tik", "sw"):
        raise ValueError(f"rule needs a monotone residual; got method {kind!r}")
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    thresh = delta + math.sqrt(delta)
    c, lam, y_perp_sq = _spectral_coeffs(svd, y_noisy)

    def res(alpha):
        r = np.asarray(filters.r_value(kind, alpha, lam))
        return math.sqrt(float(np.sum((r * c) ** 2)) + y_perp_sq)

    scan_alphas = np.geomspace(_MOROZOV_LO, _MOROZOV_HI, 41)
    scan_res = np.array([res(al) for al in scan_alphas])
    trace_rows = list(zip(scan_alphas, scan_res))
    flags = set()

    slack = 1e-12 * max(scan_res[-1], 1.0)
    if np.any(np.diff(scan_res) < -slack):
        # Should not happen for these kinds; fall back to the raw scan.
        flags.add("non_monotone_warning")
        feasible = scan_res <= thresh
        if not feasible.any():
            flags.add("boundary_hit")
            param = _MOROZOV_LO
        else:
            param = float(scan_alphas[np.nonzero(feasible)[0].max()])
            if param == _MOROZOV_HI:
                flags.add("boundary_hit")
        trace_rows.append((param, res(param)))
        return RuleOutcome(param=param, k=None, objective=res(param),
                           flags=frozenset(flags),
                           objective_trace=np.array(trace_rows))

    if scan_res[-1] <= thresh:
        flags.add("boundary_hit")
        param = _MOROZOV_HI
    elif scan_res[0] > thresh:
        flags.add("boundary_hit")
        param = _MOROZOV_LO
    else:
        idx = int(np.nonzero(scan_res <= thresh)[0].max())
        lo, hi = float(scan_alphas[idx]), float(scan_alphas[idx + 1])
        while hi / lo - 1.0 > 1e-3:
            mid = math.sqrt(lo * hi)
            rmid = res(mid)
            trace_rows.append((mid, rmid))
            if rmid <= thresh:
                lo = mid
            else:
                hi = mid
        param = lo
    obj = res(param)
    trace_rows.append((param, obj))
    return RuleOutcome(param=param, k=None, objective=obj, flags=frozenset(flags),
                       objective_trace=np.array(trace_rows))


def dqo_alpha_sequence(alpha0: float, q: float) -> np.ndarray:
    """Geometric parameter sequence alpha0 * q**n, stopping before 1e-14."""
    if alpha0 <= 0.0:
        raise ValueError("alpha0 must be positive")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    count = int(math.floor(math.log(1e-14 / alpha0) / math.log(q))) + 1
    if count < 2:
        raise ValueError("sequence too short; raise alpha0 or q")
    return alpha0 * q ** np.arange(count)


def _first_argmin(values: np.ndarray) -> int:
    return int(np.argmin(values))


def _argmin_flags(i: int, size: int) -> frozenset:
    if i == 0 or i == size - 1:
        return frozenset({"boundary_hit"})
    return frozenset()


def heuristic_select(rule: str, svd: Svd, y_noisy, method: filters.MethodSpec, grid,
                     *, dqo_alpha0: float | None = None, dqo_q: float = 0.9) -> RuleOutcome:
    """Data-driven parameter choice by grid minimization.

    Objectives (res = T x - y_noisy, evaluated spectrally):

    * gcv: ||res|| / tr(r_alpha), trace counting null directions at value 1,
      so the tsvd denominator is n - k; undefined for cg.
    * dqo: ||x_{next} - x_current|| over its own geometric alpha sequence
      (alpha0 defaults to s_1**2, ratio q), or over consecutive discrete
      iterates for tsvd/cg; the grid argument is ignored for continuous kinds.
    * h1: alpha**(-1/2) * ||res||      (alpha = 1/k for tsvd/cg)
    * h2: alpha**(-1) * ||T.T res||
    * lcv: ||x_alpha|| * ||res||

    grid carries alphas for filter methods, cut thresholds (descending
    squared singular values) for tsvd, iteration counts for cg.
    """
    if rule not in HEURISTICS:
        raise ValueError(f"unknown heuristic {rule!r}")
    kind = method.kind
    if rule == "gcv" and kind == "cg":
        return _not_applicable()
    if kind not in filters.KINDS:
        raise ValueError(f"unknown method {kind!r}")

    c, lam, y_perp_sq = _spectral_coeffs(svd, y_noisy)
    sc = svd.s * c
    n = svd.V.shape[0]
    r = svd.rank

    if rule == "dqo":
        if kind in ("nrm", "tik", "sw"):
            alpha0 = float(lam[0]) if dqo_alpha0 is None else float(dqo_alpha0)
            if alpha0 > lam[0] * (1.0 + 1e-12):
                raise ValueError(f"alpha0 {alpha0} exceeds the largest squared singular value {lam[0]}")
            alphas = dqo_alpha_sequence(alpha0, dqo_q)
            G = np.asarray(filters.g_value(kind, alphas[:, None], lam[None, :]))
            X = G * sc
            diffs = np.linalg.norm(np.diff(X, axis=0), axis=1)
            params = alphas[:-1]
        elif kind == "tsvd":
            if r < 2:
                raise ValueError("need at least two spectral components")
            diffs = np.abs(c[1:] / svd.s[1:])
            params = lam[: r - 1]
        else:
            k_max = int(np.max(np.asarray(grid)))
            Z, _ = filters.cgls_diag_iterates(svd.s, c, max(k_max, 2))
            if Z.shape[0] < 2:
                raise ValueError("iteration stopped before two iterates were available")
            diffs = np.linalg.norm(np.diff(Z, axis=0), axis=1)
            params = 1.0 / np.arange(1, Z.shape[0], dtype=float)
        i = _first_argmin(diffs)
        trace = np.column_stack([params, diffs])
        k = i + 1 if kind in ("tsvd", "cg") else None
        return RuleOutcome(param=float(params[i]), k=k, objective=float(diffs[i]),
                           flags=_argmin_flags(i, diffs.size), objective_trace=trace)

    if kind in ("nrm", "tik", "sw"):
        alphas = np.sort(np.asarray(grid, dtype=float))[::-1]
        if alphas.size == 0:
            raise ValueError("empty grid")
        G = np.asarray(filters.g_value(kind, alphas[:, None], lam[None, :]))
        R = np.asarray(filters.r_value(kind, alphas[:, None], lam[None, :]))
        res = np.sqrt(np.sum((R * c) ** 2, axis=1) + y_perp_sq)
        if rule == "gcv":
            denom = R.sum(axis=1) + (n - r)
            obj = res / denom
        elif rule == "h1":
            obj = alphas ** -0.5 * res
        elif rule == "h2":
            obj = np.linalg.norm(svd.s * (R * c), axis=1) / alphas
        else:
            obj = np.linalg.norm(G * sc, axis=1) * res
        i = _first_argmin(obj)
        trace = np.column_stack([alphas, obj])
        return RuleOutcome(param=float(alphas[i]), k=None, objective=float(obj[i]),
                           flags=_argmin_flags(i, obj.size), objective_trace=trace)

    if kind == "tsvd":
        ks = np.arange(1, r + 1)
        params = lam.copy()
        tail_res = np.sqrt(np.concatenate([np.cumsum((c ** 2)[::-1])[::-1][1:], [0.0]]) + y_perp_sq)
        if rule == "gcv":
            denom = (n - ks).astype(float)
            with np.errstate(divide="ignore"):
                obj = np.where(denom > 0.0, tail_res / np.where(denom > 0.0, denom, 1.0), np.inf)
        elif rule == "h1":
            obj = np.sqrt(ks) * tail_res
        elif rule == "h2":
            tail_normal = np.sqrt(np.concatenate([np.cumsum(((svd.s * c) ** 2)[::-1])[::-1][1:], [0.0]]))
            obj = ks * tail_normal
        else:
            xnorm = np.sqrt(np.cumsum((c / svd.s) ** 2))
            obj = xnorm * tail_res
        i = _first_argmin(obj)
        trace = np.column_stack([params, obj])
        return RuleOutcome(param=float(params[i]), k=int(ks[i]), objective=float(obj[i]),
                           flags=_argmin_flags(i, obj.size), objective_trace=trace)

    ks = np.sort(np.asarray(grid, dtype=int))
    if ks.size == 0 or ks[0] < 1:
        raise ValueError("cg grid must hold positive iteration counts")
    Z, _ = filters.cgls_diag_iterates(svd.s, c, int(ks[-1]))
    ks = ks[ks <= Z.shape[0]]
    if ks.size == 0:
        raise ValueError("iteration broke down before the first requested count")
    res = np.sqrt(np.sum((c - Z[ks - 1] * svd.s) ** 2, axis=1) + y_perp_sq)
    if rule == "h1":
        obj = np.sqrt(ks) * res
    elif rule == "h2":
        obj = ks * np.linalg.norm(svd.s * (c - Z[ks - 1] * svd.s), axis=1)
    else:
        obj = np.linalg.norm(Z[ks - 1], axis=1) * res
    i = _first_argmin(obj)
    params = 1.0 / ks.astype(float)
    trace = np.column_stack([params, obj])
    return RuleOutcome(param=float(params[i]), k=int(ks[i]), objective=float(obj[i]),
                       flags=_argmin_flags(i, obj.size), objective_trace=trace)
