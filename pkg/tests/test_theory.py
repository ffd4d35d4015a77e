"""Index functions, analytic-bound scans, and empirical convergence rates."""

import math

import numpy as np
import pytest

from illreg import theory


def test_f_p_normalization():
    assert theory.f_p(math.exp(-1), 1.0) == pytest.approx(1.0, rel=1e-14)
    assert theory.f_p(math.exp(-2), 2.0) == pytest.approx(0.25, rel=1e-14)


def test_phi_p_inverse_roundtrip():
    # lam floor per p: exp(-lam**(-1/(2p))) underflows once the exponent
    # passes ~745, so small p restricts how deep the roundtrip can go.
    grids = {0.5: (3e-3, 0.05, 0.2), 1.0: (1e-5, 1e-3, 0.2), 2.0: (1e-9, 1e-4, 0.2)}
    for p, lams in grids.items():
        for lam in lams:
            val = float(theory.phi_p(lam, p))
            assert theory.phi_p_inv(val, p) == pytest.approx(lam, rel=1e-9)
    assert float(theory.phi_p(1e-9, 0.5)) == 0.0
    with pytest.raises(ValueError):
        theory.phi_p_inv(0.0, 0.5)


def test_theta_builds_on_phi():
    phi = lambda lam: theory.f_p(lam, 1.0)
    lam = 0.05
    assert theory.theta_fn(lam, phi) == pytest.approx(math.sqrt(lam) * phi(lam), rel=1e-14)


def test_spectral_margin_value():
    # (|ln a| / (1 + |ln a|))^2 at a = e^-1
    assert theory.spectral_margin(math.exp(-1)) == 0.25


def test_default_lambda_grid_domain():
    grid = theory.default_lambda_grid()
    assert grid.size == 400
    assert grid.min() > 0.0
    assert grid.max() <= math.exp(-1) + 1e-15


def test_residual_bound_scan_passes():
    report = theory.verify_residual_bound()
    assert report.passed
    (row,) = report.rows
    assert row.worst_slack_or_band < 1e-12
    assert row.worst_slack_or_band == pytest.approx(3.397852557401881e-14, rel=1e-6)


def test_prop2_pointwise_bound_holds_but_band_is_wide():
    """Every per-alpha supremum obeys 1/(2 sqrt(M alpha)); the scaled band
    across eight decades measures 7.66, far from flat."""
    report = theory.verify_prop2()
    bound_rows = [r for r in report.rows if r.check == "prop2_bound"]
    assert len(bound_rows) == 9
    assert all(r.passed for r in bound_rows)
    (band_row,) = [r for r in report.rows if r.check == "prop2_band"]
    assert band_row.worst_slack_or_band == pytest.approx(7.661679773973256, rel=1e-9)
    assert band_row.passed  # module-level tolerance is a factor of 10


def test_qualification_bands():
    expected = {0.5: 1.0391, 1.0: 1.0321, 2.0: 1.1240}
    for p, band in expected.items():
        report = theory.verify_qualification(p)
        (row,) = report.rows
        assert row.passed
        assert row.worst_slack_or_band == pytest.approx(band, abs=2e-4)
        assert row.worst_slack_or_band <= 10.0


def test_lemma2_roots_and_psi_bands():
    report = theory.verify_lemma2()
    assert report.passed
    root_rows = [r for r in report.rows if r.check == "lemma2_root"]
    psi_rows = [r for r in report.rows if r.check == "lemma2_psi"]
    assert len(root_rows) == 9 and len(psi_rows) == 3
    for row in root_rows:
        assert 0.1 <= row.worst_slack_or_band <= 10.0
    for row, band in zip(psi_rows, (1.0269, 1.0182, 1.1750)):
        assert row.worst_slack_or_band == pytest.approx(band, abs=2e-4)


def test_root_of_h_defining_property():
    for p in (0.5, 1.0, 2.0):
        for alpha in (1e-4, 1e-6, 1e-8):
            root = theory.root_of_h(p, alpha)
            assert abs(theory.h_fn(root, p, alpha)) < 1e-8
            ratio = root / (alpha * abs(math.log(alpha)))
            assert 0.1 <= ratio <= 10.0


def test_psi_positive_on_domain():
    lam = np.geomspace(1e-10, math.exp(-1), 50)
    vals = np.asarray(theory.psi(lam, 1.0, 1e-6))
    assert np.all(np.isfinite(vals))


def test_rates_suite_frozen_values():
    report = theory.verify_rates()
    by_label = {(r.check, r.parameter): r for r in report.rows}
    log_row = by_label[("rate_log", "p=1,theta_p")]
    assert log_row.worst_slack_or_band == pytest.approx(1.5474678618968225, rel=1e-9)
    assert log_row.passed  # band stays under 5
    mu_half = by_label[("rate_holder", "mu=0.5,theta_eps")]
    assert mu_half.worst_slack_or_band == pytest.approx(0.4765115275691141, rel=1e-9)
    assert mu_half.worst_slack_or_band >= 0.40
    mu_two = by_label[("rate_holder", "mu=2,theta_eps")]
    assert mu_two.worst_slack_or_band == pytest.approx(0.6849793992343842, rel=1e-9)
    assert mu_two.worst_slack_or_band >= 0.55
    moro = by_label[("rate_morozov", "p=1,nrm")]
    assert moro.worst_slack_or_band == pytest.approx(1.706825516805924, rel=1e-9)
    assert moro.passed
    assert report.passed


def test_empirical_rate_points_are_usable():
    from illreg import problems
    src = problems.SyntheticSource("logarithmic", 1.0, rho=10.0, seed=7)
    prob = problems.gen_diag_synthetic(60, problems.SpectrumDecay("exponential", 1.0), src)
    pts = theory.empirical_rate(prob, src, "theta_p", np.geomspace(1e-2, 1e-4, 3))
    assert len(pts) == 3
    for pt in pts:
        assert pt.alpha > 0 and pt.rel_error > 0 and not pt.skipped


def test_fit_slope_recovers_exponent():
    deltas = np.geomspace(1e-6, 1e-2, 6)
    pts = [theory.RatePoint(delta=d, alpha=d, rel_error=3.0 * d ** 0.7, skipped=False)
           for d in deltas]
    assert theory.fit_slope(pts) == pytest.approx(0.7, rel=1e-10)


def test_ratio_band_flat_for_proportional_errors():
    deltas = np.geomspace(1e-6, 1e-2, 6)
    pts = [theory.RatePoint(delta=d, alpha=d, rel_error=2.5 * math.sqrt(d), skipped=False)
           for d in deltas]
    assert theory.ratio_band(pts, math.sqrt) == pytest.approx(1.0, rel=1e-12)


def test_merge_reports_concatenates():
    a = theory.verify_qualification(1.0)
    b = theory.verify_qualification(2.0)
    merged = theory.merge_reports("qualification", [a, b])
    assert merged.name == "qualification"
    assert len(merged.rows) == 2
    assert merged.passed


def test_report_csv_quotes_commas():
    report = theory.verify_rates()
    lines = report.to_csv().splitlines()
    assert lines[0] == theory.CSV_STAMP + "verify"
    assert lines[1] == "check,parameter,worst_slack_or_band,pass"
    import csv, io
    parsed = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    assert all(len(row) == 4 for row in parsed)
