"""Test-problem generators: shaw, baart, heat, and a diagonal synthetic.

The three named problems are re-derived from the published formulas of the
classical regularization test set (midpoint collocation for shaw and heat,
Galerkin box functions for baart). Bit-exact agreement with other
implementations is not a goal; the contract is the qualitative spectrum:
shaw/baart singular values fall super-polynomially, heat decays log-linearly
with condition number past 1e10 by n = 150.

All generators return square, already-scaled Problems (largest squared
singular value exp(-1)) with y_exact := A @ x_true exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import Problem, SpectralConstraint, scale_problem


@dataclass(frozen=True)
class SyntheticSource:
    """Smoothness assumption for gen_diag_synthetic.

    kind "holder" takes x_true = (A.T A)**index @ w, kind "logarithmic" takes
    x_true = (-ln(A.T A))**(-index) @ w, with w a seeded random vector of norm
    rho. index is mu respectively p.
    """

    kind: str
    index: float
    rho: float
    seed: int

    def __post_init__(self):
        if self.kind not in ("holder", "logarithmic"):
            raise ValueError(f"source kind must be holder or logarithmic; got {self.kind!r}")
        if self.kind == "logarithmic" and self.index <= 0.0:
            raise ValueError("logarithmic source needs p > 0")
        if self.kind == "holder" and self.index < 0.0:
            raise ValueError("holder source needs mu >= 0")
        if self.rho <= 0.0:
            raise ValueError("source norm bound rho must be positive")


@dataclass(frozen=True)
class SpectrumDecay:
    """Singular-value law for gen_diag_synthetic.

    kind "exponential" gives sigma_k = exp(-rate*k/2), kind "polynomial"
    gives sigma_k = k**(-rate/2), both before the common rescale that pins
    sigma_1**2 to exp(-1).
    """

    kind: str
    rate: float

    def __post_init__(self):
        if self.kind not in ("exponential", "polynomial"):
            raise ValueError(f"decay kind must be exponential or polynomial; got {self.kind!r}")
        if self.rate <= 0.0:
            raise ValueError("decay rate must be positive")


def gen_shaw(n: int) -> Problem:
    """Shaw image-reconstruction problem, midpoint collocation on [-pi/2, pi/2].

    A_ij = h*(cos s_i + cos t_j)**2 * (sin(u)/u)**2 with u = pi*(sin s_i +
    sin t_j); the removable singularity at u = 0 is handled by sinc. n must
    be even so the grid is symmetric about 0.
    """
    if n % 2 != 0:
        raise ValueError(f"shaw needs even n; got {n}")
    if n < 4:
        raise ValueError("n must be at least 4")
    h = math.pi / n
    t = -math.pi / 2 + (np.arange(n) + 0.5) * h
    cs = np.cos(t)
    sn = np.sin(t)
    # np.sinc(z) = sin(pi z)/(pi z), so sinc(sin s + sin t) is sin(u)/u exactly.
    A = h * (cs[:, None] + cs[None, :]) ** 2 * np.sinc(sn[:, None] + sn[None, :]) ** 2
    x = 2.0 * np.exp(-6.0 * (t - 0.8) ** 2) + np.exp(-2.0 * (t + 0.5) ** 2)
    return scale_problem("shaw", A, x, A @ x)


def gen_baart(n: int) -> Problem:
    """Baart problem, Galerkin discretization with orthonormal box functions.

    Kernel exp(s*cos t) on [0, pi/2] x [0, pi], solution sin t, inner products
    by the midpoint rule, so A_ij = sqrt(hs*ht)*exp(s_i*cos t_j) and the
    coefficient vector of sin is sqrt(ht)*sin(t_j). y_exact is A @ x_true;
    the analytic right-hand side 2*sinh(s)/s is only a cross-check
    (baart_rhs_coeffs), matching to discretization error.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    hs = (math.pi / 2) / n
    ht = math.pi / n
    s = (np.arange(n) + 0.5) * hs
    t = (np.arange(n) + 0.5) * ht
    A = math.sqrt(hs * ht) * np.exp(s[:, None] * np.cos(t)[None, :])
    x = math.sqrt(ht) * np.sin(t)
    return scale_problem("baart", A, x, A @ x)


def baart_rhs_coeffs(n: int) -> np.ndarray:
    """Box-function coefficients of the analytic right-hand side 2*sinh(s)/s."""
    hs = (math.pi / 2) / n
    s = (np.arange(n) + 0.5) * hs
    return math.sqrt(hs) * 2.0 * np.sinh(s) / s


def _heat_profile(n: int) -> np.ndarray:
    """Classical bump profile: quadratic ramp, parabolic plateau, exponential
    decay on the first half of the interval, identically zero afterwards."""
    x = np.zeros(n)
    half = n // 2
    t = 20.0 * np.arange(1, half + 1) / n
    ramp = t < 2.0
    plateau = (t >= 2.0) & (t < 3.0)
    decay = t >= 3.0
    x[:half][ramp] = 0.75 * t[ramp] ** 2 / 4.0
    x[:half][plateau] = 0.75 + (t[plateau] - 2.0) * (3.0 - t[plateau])
    x[:half][decay] = 0.75 * np.exp(-2.0 * (t[decay] - 3.0))
    return x


def gen_heat(n: int) -> Problem:
    """Inverse heat equation, midpoint quadrature of the Volterra convolution.

    Kernel k(tau) = tau**(-3/2)/(2*sqrt(pi)) * exp(-1/(4*tau)) on [0, 1], so A
    is lower-triangular Toeplitz with first column h*k((i - 1/2)*h). The
    fixed x_true profile is frozen (see _heat_profile) so benchmark runs stay
    reproducible.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    h = 1.0 / n
    tau = (np.arange(n) + 0.5) * h
    col = h * tau ** (-1.5) / (2.0 * math.sqrt(math.pi)) * np.exp(-1.0 / (4.0 * tau))
    row = np.zeros(n)
    row[0] = col[0]
    A = scipy.linalg.toeplitz(col, row)
    x = _heat_profile(n)
    return scale_problem("heat", A, x, A @ x)


def gen_diag_synthetic(n: int, decay: SpectrumDecay, source: SyntheticSource) -> Problem:
    """Diagonal operator with a prescribed decay law and source condition.

    sigma_k follows the decay law, rescaled so sigma_1**2 = exp(-1) exactly;
    x_true = phi(sigma**2) * w with phi the Hölder power or the logarithmic
    index function, and w a seeded standard-normal vector normalized to
    ||w|| = rho. Everything downstream (rates, rule checks) sees the scaled
    spectrum, so the source condition is imposed after scaling.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    k = np.arange(1, n + 1, dtype=float)
    if decay.kind == "exponential":
        sig = np.exp(-decay.rate * k / 2.0)
    else:
        sig = k ** (-decay.rate / 2.0)
    t = math.exp(-0.5) / sig[0]
    sig = t * sig
    lam = sig ** 2
    rng = np.random.default_rng(source.seed)
    w = rng.standard_normal(n)
    w *= source.rho / np.linalg.norm(w)
    if source.kind == "holder":
        x = lam ** source.index * w
    else:
        x = (-np.log(lam)) ** (-source.index) * w
    return Problem(name=f"diag-{decay.kind}", A=np.diag(sig), x_true=x, y_exact=sig * x, scale=t)


GENERATORS = {"shaw": gen_shaw, "baart": gen_baart, "heat": gen_heat}
