"""Test-problem generators: kernels, spectra, sources, determinism."""

import math

import numpy as np
import pytest

from illreg import core, problems


def test_shaw_symmetric_kernel():
    prob = problems.gen_shaw(160)
    assert np.max(np.abs(prob.A - prob.A.T)) <= 1e-12


def test_shaw_scaled_spectrum_top():
    svd = core.compute_svd(problems.gen_shaw(160).A)
    assert float(svd.s[0] ** 2) == pytest.approx(math.exp(-1), rel=1e-12)


def test_shaw_scale_factor_frozen():
    assert problems.gen_shaw(160).scale == pytest.approx(0.20262912472556505, rel=1e-12)


def test_shaw_rejects_odd_n():
    with pytest.raises(ValueError):
        problems.gen_shaw(21)


def test_shaw_severe_decay():
    svd = core.compute_svd(problems.gen_shaw(160).A, drop_tol=0.0)
    assert svd.s[0] / svd.s[19] > 1e10
    # faster than any fixed polynomial over the top 20: beats k^8 easily
    assert svd.s[19] / svd.s[0] < 20.0 ** -8


def test_baart_decay_and_ranges():
    prob = problems.gen_baart(150)
    svd = core.compute_svd(prob.A, drop_tol=0.0)
    assert svd.s[0] / svd.s[19] > 1e10
    assert np.all(prob.x_true >= 0.0) and np.all(prob.x_true <= 1.0)
    assert np.all(prob.A[0] > 0.0)


def test_baart_matches_analytic_rhs():
    """Quadrature y_exact tracks 2*sinh(s)/s to discretization error."""
    prob = problems.gen_baart(150)
    analytic = problems.baart_rhs_coeffs(150) * prob.scale
    assert float(np.max(np.abs(prob.y_exact - analytic))) < 5e-6


def test_heat_is_lower_triangular():
    prob = problems.gen_heat(60)
    assert np.all(np.triu(prob.A, k=1) == 0.0)
    assert np.all(np.isfinite(prob.A))


def test_heat_severely_ill_conditioned():
    svd = core.compute_svd(problems.gen_heat(150).A, drop_tol=0.0)
    assert svd.s[0] / svd.s[-1] > 1e10


def test_heat_log_linear_decay(heat100_svd):
    """ln s_k falls off linearly in k over the leading spectrum."""
    k = np.arange(30)
    lns = np.log(heat100_svd.s[:30])
    slope, intercept = np.polyfit(k, lns, 1)
    fitted = slope * k + intercept
    ss_res = np.sum((lns - fitted) ** 2)
    ss_tot = np.sum((lns - lns.mean()) ** 2)
    assert 1.0 - ss_res / ss_tot > 0.95


def test_diag_synthetic_exponential_spectrum():
    prob = problems.gen_diag_synthetic(
        50, problems.SpectrumDecay("exponential", 1.0),
        problems.SyntheticSource("logarithmic", 1.0, rho=1.0, seed=7))
    lam = np.sort(np.diag(prob.A) ** 2)[::-1]
    expect = np.exp(-1.0 - np.arange(50))
    np.testing.assert_allclose(lam, expect, rtol=1e-12)


def test_diag_synthetic_degenerate_holder_source():
    src = problems.SyntheticSource("holder", 0.0, rho=1.0, seed=3)
    prob = problems.gen_diag_synthetic(8, problems.SpectrumDecay("exponential", 1.0), src)
    # mu = 0 applies the identity: x_true is the raw unit-norm draw
    assert np.linalg.norm(prob.x_true) == pytest.approx(1.0, rel=1e-12)


def test_diag_synthetic_log_source_norm_bound():
    src = problems.SyntheticSource("logarithmic", 1.0, rho=1.0, seed=12)
    prob = problems.gen_diag_synthetic(30, problems.SpectrumDecay("exponential", 1.0), src)
    # f_1(exp(-1)) = 1, f_1 increasing: the filtered draw cannot exceed rho
    assert np.linalg.norm(prob.x_true) <= 1.0 + 1e-12


def test_diag_synthetic_deterministic():
    decay = problems.SpectrumDecay("polynomial", 2.0)
    a = problems.gen_diag_synthetic(20, decay, problems.SyntheticSource("holder", 0.5, 1.0, 42))
    b = problems.gen_diag_synthetic(20, decay, problems.SyntheticSource("holder", 0.5, 1.0, 42))
    c = problems.gen_diag_synthetic(20, decay, problems.SyntheticSource("holder", 0.5, 1.0, 43))
    assert np.array_equal(a.x_true, b.x_true)
    assert np.array_equal(a.A, b.A)
    assert not np.array_equal(a.x_true, c.x_true)


def test_generators_emit_exact_consistency():
    for prob in (problems.gen_shaw(24), problems.gen_baart(20), problems.gen_heat(20)):
        assert np.array_equal(prob.y_exact, prob.A @ prob.x_true)
        assert prob.m == prob.n


def test_generator_registry():
    assert set(problems.GENERATORS) == {"shaw", "baart", "heat"}
    prob = problems.GENERATORS["shaw"](16)
    assert prob.name == "shaw"
