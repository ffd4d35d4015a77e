"""Problem container, SVD plumbing, and the spectral scaling convention.

Every solver in this package assumes the squared singular values of the
operator live in (0, a] with a <= exp(-1). scale_problem enforces that by
multiplying A and y by t = sqrt(a)/s_1, which leaves x_true (and relative
errors) unchanged. Problems are stored and serialized in scaled form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import filters

# Every delimited report starts with this comment so consumers can detect
# schema drift; bump the version when a column list changes.
CSV_STAMP = "# illreg csv v1 schema="


@dataclass(frozen=True)
class SpectralConstraint:
    """Target upper bound a for the squared singular values.

    The default exp(-1) makes |ln lam| >= 1 on the whole spectrum, which the
    bound verifiers rely on; anything in (0, exp(-1)] is accepted.
    """

    a: float = math.exp(-1.0)

    def __post_init__(self):
        if not (0.0 < self.a <= math.exp(-1.0)):
            raise ValueError(f"spectral bound must lie in (0, exp(-1)]; got {self.a}")


def _readonly(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Problem:
    """Discretized ill-posed system A x_true = y_exact, already scaled.

    ``scale`` is the factor t that was applied to the rows of the original
    operator and data; 1.0 means the problem was generated directly in scaled
    form. Arrays are stored read-only so cached SVDs cannot go stale.
    """

    name: str
    A: np.ndarray
    x_true: np.ndarray
    y_exact: np.ndarray
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "A", _readonly(self.A))
        object.__setattr__(self, "x_true", _readonly(self.x_true))
        object.__setattr__(self, "y_exact", _readonly(self.y_exact))
        if self.A.ndim != 2:
            raise ValueError("operator must be a matrix")
        m, n = self.A.shape
        if self.x_true.shape != (n,) or self.y_exact.shape != (m,):
            raise ValueError("solution/data lengths do not match the operator")
        if not (np.isfinite(self.A).all() and np.isfinite(self.x_true).all() and np.isfinite(self.y_exact).all()):
            raise ValueError("problem contains non-finite entries")
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite; got {self.scale}")
        ynorm = float(np.linalg.norm(self.y_exact))
        consistency = float(np.linalg.norm(self.A @ self.x_true - self.y_exact))
        if consistency > 1e-10 * max(ynorm, 1e-300):
            raise ValueError(f"y_exact is not A @ x_true (||A x - y|| = {consistency:.3e})")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class Svd:
    """Thin SVD A = U diag(s) V.T with singular values in descending order."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return self.s.size


def compute_svd(A, drop_tol: float = 1e-14) -> Svd:
    """Thin SVD with trailing singular values below drop_tol * s_1 removed.

    Uses LAPACK gesvd (QR-based) rather than the divide-and-conquer default:
    the test operators here have condition numbers past 1e15 and gesvd keeps
    the tiny singular values more reproducible across BLAS builds.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("operator must be a matrix")
    U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
    if s.size == 0 or s[0] == 0.0:
        raise ValueError("operator is identically zero")
    r = int(np.count_nonzero((s >= drop_tol * s[0]) & (s > 0.0)))
    if r == 0:
        raise ValueError("all singular values fall below the drop tolerance")
    return Svd(U=_readonly(U[:, :r]), s=_readonly(s[:r]), V=_readonly(Vt[:r].T))


def scale_problem(name, A, x_true, y_exact, constraint: SpectralConstraint = SpectralConstraint()) -> Problem:
    """Build a Problem with A multiplied by t = sqrt(a)/s_1.

    After scaling the largest squared singular value equals a exactly (up to
    roundoff), so every filter sees its spectrum inside (0, exp(-1)].
    Idempotent in exact arithmetic: scaling a scaled problem multiplies by 1.
    y_exact is recomputed as (tA) @ x_true rather than scaled, keeping the
    consistency identity bit-exact; t*(A@x) and (tA)@x round differently.
    """
    A = np.asarray(A, dtype=float)
    s1 = float(np.linalg.norm(A, 2))
    if s1 == 0.0:
        raise ValueError("operator is identically zero")
    t = math.sqrt(constraint.a) / s1
    A_scaled = t * A
    return Problem(name=name, A=A_scaled, x_true=np.asarray(x_true, dtype=float),
                   y_exact=A_scaled @ np.asarray(x_true, dtype=float), scale=t)


def reconstructed_condition(svd: Svd, kind: str, alpha: float) -> float:
    """Condition number of the regularized inverse's effective operator.

    For a filter method this is max_k w / min_k w with w = 1/g on the
    retained spectrum: tik gives (lam+alpha) ratios, nrm gives
    (lam + (1-lam**sqrt(alpha))**2) ratios, sw gives lam/(1-exp(-lam/alpha))
    ratios, tsvd gives lam_1/lam_q over the kept block. w is not monotone
    in lam for nrm, so the extrema need not sit at the spectrum ends.
    cg has no filter representation and is rejected.
    """
    if kind == "cg":
        raise ValueError("cg has no spectral filter; no reconstructed condition number")
    if kind not in filters.FILTER_KINDS:
        raise ValueError(f"unknown method {kind!r}")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    lam = svd.s ** 2
    if kind == "tsvd":
        kept = lam[lam >= alpha]
        if kept.size == 0:
            raise ValueError("cut threshold exceeds the largest squared singular value")
        return float(kept[0] / kept[-1])
    if kind == "tik":
        w = lam + alpha
    elif kind == "sw":
        w = lam / (-np.expm1(-lam / alpha))
    else:
        d = np.expm1(math.sqrt(alpha) * np.log(lam))
        w = lam + d * d
    return float(np.max(w) / np.min(w))


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def problem_to_json(problem: Problem) -> str:
    """Serialize with %.17g floats (round-trips IEEE doubles exactly)."""
    a_flat = ", ".join(_f17(v) for v in problem.A.ravel())
    x = ", ".join(_f17(v) for v in problem.x_true)
    y = ", ".join(_f17(v) for v in problem.y_exact)
    return (
        "{\n"
        f'  "name": {json.dumps(problem.name)},\n'
        f'  "m": {problem.m},\n'
        f'  "n": {problem.n},\n'
        f'  "a_rowmajor": [{a_flat}],\n'
        f'  "x_true": [{x}],\n'
        f'  "y_exact": [{y}],\n'
        f'  "scale": {_f17(problem.scale)}\n'
        "}\n"
    )


def problem_from_json(text: str) -> Problem:
    obj = json.loads(text)
    try:
        m, n = int(obj["m"]), int(obj["n"])
        A = np.array(obj["a_rowmajor"], dtype=float).reshape(m, n)
        return Problem(name=str(obj["name"]), A=A,
                       x_true=np.array(obj["x_true"], dtype=float),
                       y_exact=np.array(obj["y_exact"], dtype=float),
                       scale=float(obj["scale"]))
    except KeyError as exc:
        raise ValueError(f"problem JSON missing field {exc}") from exc


def save_problem(problem: Problem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(problem_to_json(problem))


def load_problem(path) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_json(fh.read())
