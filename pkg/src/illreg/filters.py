"""Spectral filter functions and the solvers built on them.

Each regularization method is identified by a short kind string:

``nrm``
    g_alpha(lam) = 1/(lam + (1 - lam**sqrt(alpha))**2); the penalty term
    vanishes as alpha -> 0 like alpha*ln(lam)**2, so small singular values
    are damped logarithmically rather than polynomially.
``tik``
    g_alpha(lam) = 1/(lam + alpha).
``tsvd``
    g_alpha(lam) = 1/lam for lam >= alpha, else 0; alpha is the cut threshold
    on the squared singular values.
``sw``
    g_alpha(lam) = (1 - exp(-lam/alpha))/lam, the value at t = 1/alpha of the
    asymptotic ODE u' = A.T y - A.T A u started at zero.
``cg``
    conjugate gradient on the normal equations; no filter function, the
    iteration count k is the parameter (alpha = 1/k by convention).

The exponent lam**sqrt(alpha) is always evaluated as exp(sqrt(alpha)*ln(lam)),
via expm1 so that (1 - lam**sqrt(alpha))**2 keeps full precision when
sqrt(alpha)*|ln lam| is tiny.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("nrm", "tik", "tsvd", "sw", "cg")
FILTER_KINDS = ("nrm", "tik", "tsvd", "sw")


@dataclass(frozen=True)
class MethodSpec:
    """Method identity plus the nature of its regularization parameter.

    ``discrete`` is True when the native parameter is an iteration count
    rather than a continuous alpha.
    """

    kind: str
    discrete: bool


METHODS = {k: MethodSpec(kind=k, discrete=(k == "cg")) for k in KINDS}


def _check_domain(alpha, lam):
    alpha = np.asarray(alpha, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0.0) or np.any(lam >= 1.0):
        raise ValueError("squared singular values must lie in (0, 1); rescale the problem first")
    if np.any(alpha <= 0.0):
        raise ValueError("regularization parameter must be positive")
    return alpha, lam


def _maybe_scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def g_value(kind: str, alpha, lam):
    """Filter value g_alpha(lam).

    ``alpha`` and ``lam`` broadcast like numpy operands, so a column of alphas
    against a row of lambdas yields the full evaluation matrix. Scalars in,
    scalar out.
    """
    alpha, lam = _check_domain(alpha, lam)
    if kind == "tik":
        out = 1.0 / (lam + alpha)
    elif kind == "tsvd":
        out = np.where(lam >= alpha, 1.0 / lam, 0.0)
    elif kind == "sw":
        out = -np.expm1(-lam / alpha) / lam
    elif kind == "nrm":
        d = np.expm1(np.sqrt(alpha) * np.log(lam))
        out = 1.0 / (lam + d * d)
    else:
        raise ValueError(f"no filter function for method {kind!r}")
    return _maybe_scalar(out)


def r_value(kind: str, alpha, lam):
    """Residual value r_alpha(lam) = 1 - lam*g_alpha(lam), in closed form."""
    alpha, lam = _check_domain(alpha, lam)
    if kind == "tik":
        out = alpha / (lam + alpha)
    elif kind == "tsvd":
        out = np.where(lam >= alpha, 0.0, 1.0)
    elif kind == "sw":
        out = np.exp(-lam / alpha)
    elif kind == "nrm":
        d = np.expm1(np.sqrt(alpha) * np.log(lam))
        out = d * d / (lam + d * d)
    else:
        raise ValueError(f"no residual function for method {kind!r}")
    return _maybe_scalar(out)


def filter_solve(svd, y_obs, kind: str, alpha: float) -> np.ndarray:
    """Regularized solution V @ (g_alpha(s**2) * s * (U.T @ y)).

    ``svd`` is a core.Svd of the (scaled) operator. cg is rejected here; use
    cgls_iterates for the iterative method.
    """
    if kind not in FILTER_KINDS:
        raise ValueError(f"filter_solve handles {FILTER_KINDS}; got {kind!r}")
    y = np.asarray(y_obs, dtype=float)
    if y.shape != (svd.U.shape[0],):
        raise ValueError(f"data length {y.shape} does not match operator rows {svd.U.shape[0]}")
    lam = svd.s ** 2
    g = np.asarray(g_value(kind, alpha, lam))
    if kind == "tsvd" and not g.any():
        raise ValueError("cut threshold exceeds the largest squared singular value; nothing retained")
    return svd.V @ (g * svd.s * (svd.U.T @ y))


def cgls_iterates(A, y_obs, k_max: int):
    """First ``k_max`` iterates of CG on the normal equations, started at zero.

    Returns ``(X, truncated)`` where row k-1 of X is the k-th iterate, the
    minimizer of ||A x - y|| over the k-dimensional Krylov space
    span{A.T y, (A.T A) A.T y, ...}. On breakdown (zero direction or zero
    normal residual) the sequence stops early and ``truncated`` is True.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y_obs, dtype=float)
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if y.shape != (A.shape[0],):
        raise ValueError("data length does not match operator rows")
    n = A.shape[1]
    x = np.zeros(n)
    res = y.copy()
    s = A.T @ res
    p = s.copy()
    gamma = float(s @ s)
    rows = []
    truncated = False
    for _ in range(k_max):
        if gamma == 0.0:
            truncated = True
            break
        q = A @ p
        qq = float(q @ q)
        if qq == 0.0:
            truncated = True
            break
        step = gamma / qq
        x = x + step * p
        res = res - step * q
        rows.append(x)
        s = A.T @ res
        gamma_new = float(s @ s)
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    return np.array(rows).reshape(len(rows), n), truncated


def cgls_diag_iterates(s, c, k_max: int):
    """CGLS iterates for the diagonal system diag(s) z = c.

    Same recurrence as cgls_iterates specialized to a diagonal operator; used
    by the harness and the heuristic rules, which see the operator only
    through its singular system (x_k = V @ z_k).
    """
    s = np.asarray(s, dtype=float)
    c = np.asarray(c, dtype=float)
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    z = np.zeros_like(c)
    res = c.copy()
    t = s * res
    p = t.copy()
    gamma = float(t @ t)
    rows = []
    truncated = False
    for _ in range(k_max):
        if gamma == 0.0:
            truncated = True
            break
        q = s * p
        qq = float(q @ q)
        if qq == 0.0:
            truncated = True
            break
        step = gamma / qq
        z = z + step * p
        res = res - step * q
        rows.append(z)
        t = s * res
        gamma_new = float(t @ t)
        p = t + (gamma_new / gamma) * p
        gamma = gamma_new
    return np.array(rows).reshape(len(rows), c.size), truncated


def showalter_ode_solve(A, y_obs, alpha: float, h: float) -> np.ndarray:
    """Forward-Euler integration of u' = A.T y - A.T A u up to t = 1/alpha.

    Cross-check route for the ``sw`` filter; filter_solve is the production
    path. The final step is shortened to land exactly on t = 1/alpha.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y_obs, dtype=float)
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if h <= 0.0:
        raise ValueError("step size must be positive")
    s1sq = np.linalg.norm(A, 2) ** 2
    if s1sq > 0.0 and h >= 2.0 / s1sq:
        raise ValueError(f"Euler step {h} unstable for this operator; needs h < {2.0 / s1sq:.3e}")
    t_end = 1.0 / alpha
    aty = A.T @ y
    ata = A.T @ A
    u = np.zeros(A.shape[1])
    n_full, rem = divmod(t_end, h)
    for _ in range(int(n_full)):
        u = u + h * (aty - ata @ u)
    if rem > 0.0:
        u = u + rem * (aty - ata @ u)
    return u
