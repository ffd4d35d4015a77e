"""SVD plumbing, spectrum scaling, conditioning, and problem serialization."""

import math

import numpy as np
import pytest

from illreg import core, problems


def test_svd_reconstructs_and_is_orthonormal():
    for prob in (problems.gen_shaw(60), problems.gen_baart(50), problems.gen_heat(80)):
        svd = core.compute_svd(prob.A, drop_tol=0.0)
        recon = (svd.U * svd.s) @ svd.V.T
        assert np.max(np.abs(recon - prob.A)) < 1e-10 * svd.s[0]
        eye = np.eye(svd.rank)
        assert np.max(np.abs(svd.U.T @ svd.U - eye)) < 1e-12
        assert np.max(np.abs(svd.V.T @ svd.V - eye)) < 1e-12


def test_svd_drop_tol_trims_numerical_noise_tail(heat100, heat100_svd):
    """Default 1e-14 relative cutoff strips the garbage tail of heat(100)."""
    assert heat100_svd.rank == 97
    assert heat100_svd.s[-1] / heat100_svd.s[0] == pytest.approx(1.1531755302408138e-06)
    full = core.compute_svd(heat100.A, drop_tol=0.0)
    assert full.rank == 100


def test_svd_rejects_degenerate_input():
    with pytest.raises(ValueError):
        core.compute_svd(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        core.compute_svd(np.ones(4))


def test_scale_problem_unit_diag():
    prob = core.scale_problem("unit", np.diag([1.0]), np.array([2.0]), np.array([2.0]))
    assert prob.A[0, 0] == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert prob.x_true[0] == 2.0
    assert prob.scale == pytest.approx(math.exp(-0.5), rel=1e-15)


def test_scale_problem_idempotent():
    A = np.diag([0.7, 0.2])
    first = core.scale_problem("toy", A, np.ones(2), A @ np.ones(2))
    again = core.scale_problem("toy", first.A, first.x_true, first.y_exact)
    assert again.scale == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(again.A, first.A, rtol=1e-12)


def test_scale_problem_rejects_zero_operator():
    with pytest.raises(ValueError):
        core.scale_problem("zero", np.zeros((2, 2)), np.ones(2), np.zeros(2))


def test_scaled_consistency_is_bitwise(heat100):
    assert np.array_equal(heat100.y_exact, heat100.A @ heat100.x_true)


def test_condition_tik_closed_form(diag_svd):
    # (0.25 + 0.01) / (0.01 + 0.01)
    assert core.reconstructed_condition(diag_svd, "tik", 0.01) == pytest.approx(13.0, rel=1e-14)


def test_condition_nrm_interior_extrema(diag_svd):
    """w(lam) = lam + (1 - lam)^2 at alpha = 1: max(0.9801..., 0.8125) over min."""
    got = core.reconstructed_condition(diag_svd, "nrm", 1.0)
    assert got == pytest.approx(1.2185846153846154, rel=1e-12)


def test_condition_tsvd_single_component(diag_svd):
    assert core.reconstructed_condition(diag_svd, "tsvd", 0.02) == 1.0


def test_condition_domain_errors(diag_svd):
    with pytest.raises(ValueError):
        core.reconstructed_condition(diag_svd, "tsvd", 0.5)  # cut above s_1^2
    with pytest.raises(ValueError):
        core.reconstructed_condition(diag_svd, "tik", 0.0)
    with pytest.raises(ValueError):
        core.reconstructed_condition(diag_svd, "cg", 0.1)


def test_condition_monotonicity_on_heat(heat100_svd):
    alphas = np.geomspace(1e-12, 1.0, 60)
    tik = np.array([core.reconstructed_condition(heat100_svd, "tik", a) for a in alphas])
    nrm = np.array([core.reconstructed_condition(heat100_svd, "nrm", a) for a in alphas])
    # conditioning improves (falls) as alpha grows; tik strictly, nrm weakly
    assert np.all(np.diff(tik) < 0.0)
    assert np.all(np.diff(nrm) <= nrm[1:] * 1e-12)


def test_condition_tik_at_top_singular_value(heat100_svd):
    alpha = float(heat100_svd.s[0] ** 2)
    assert core.reconstructed_condition(heat100_svd, "tik", alpha) == pytest.approx(2.0, abs=1e-6)


def test_condition_range_nrm_vs_tik(heat100_svd):
    """nrm spans far fewer decades of conditioning than tik on the same grid."""
    alphas = np.geomspace(1e-12, 1.0, 40)
    worst_nrm = max(core.reconstructed_condition(heat100_svd, "nrm", a) for a in alphas)
    worst_tik = max(core.reconstructed_condition(heat100_svd, "tik", a) for a in alphas)
    assert worst_nrm < 1e9 < worst_tik


def test_problem_json_roundtrip(tmp_path):
    prob = problems.gen_shaw(24)
    path = tmp_path / "shaw24.json"
    core.save_problem(prob, path)
    back = core.load_problem(path)
    assert back.name == prob.name
    assert back.scale == prob.scale
    assert np.array_equal(back.A, prob.A)
    assert np.array_equal(back.x_true, prob.x_true)
    assert np.array_equal(back.y_exact, prob.y_exact)
    # serialization is stable: a second trip produces identical text
    assert core.problem_to_json(back) == core.problem_to_json(prob)


def test_problem_json_shape_fields():
    prob = problems.gen_baart(12)
    text = core.problem_to_json(prob)
    back = core.problem_from_json(text)
    assert (back.m, back.n) == (12, 12)
    assert np.array_equal(back.A, prob.A)
