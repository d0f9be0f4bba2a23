import json
import os
import tempfile

import numpy as np
import pytest

import mcpert

MEYER = np.array([[0, 2, 2, 0], [2, 0, 2, 0], [2, 1, 0, 1], [1, 1, 1, 1]]) / 4.0


def test_meyer_stationary_and_group_inverse():
    pi = mcpert.stationary_distribution(MEYER)
    np.testing.assert_allclose(pi, np.array([342, 285, 342, 114]) / 1083, atol=1e-14)
    a_sharp = mcpert.group_inverse(MEYER)
    np.testing.assert_allclose(a_sharp @ (np.eye(4) - MEYER) @ a_sharp, a_sharp, atol=1e-13)
    assert mcpert.ergodicity_coefficient(a_sharp) == pytest.approx(24 / 19, rel=1e-12)


def test_bound_reports():
    best = mcpert.seneta_best_bound(MEYER, delta_norm=0.01)
    assert best.bound_name == "seneta_best"
    assert best.value == pytest.approx(0.01 * best.ell)
    assert best.hypotheses_hold()
    small = mcpert.small_set_bound(MEYER, m_min=2, m_max=2)
    assert small.ell == pytest.approx(3.2, abs=1e-12)
    assert small.details["m"] == 2
    assert "BoundReport small_set" in repr(small)


def test_exact_gap_is_dominated():
    p_tilde = MEYER.copy()
    p_tilde[3, 3] += 0.01
    p_tilde[3, 0] -= 0.01
    gap = mcpert.exact_gap(MEYER, p_tilde)
    assert 0 < gap <= mcpert.seneta_best_bound(MEYER, delta_norm=0.02).value


def test_errors_carry_their_kind():
    with pytest.raises(mcpert.MCPertError, match="ValidationError"):
        mcpert.stationary_distribution(np.array([[0.5, 0.4], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        mcpert.gallery_model("no-such-model")


def test_hitting_times_two_routes():
    model = mcpert.gallery_model("geometric-return", {"N": 40, "p": 0.25})
    m = mcpert.hitting_times(model["matrix"], 0)
    np.testing.assert_allclose(m[1:], 4.0, rtol=1e-12)
    np.testing.assert_allclose(mcpert.value_iteration_hitting(model["matrix"], 0), m, rtol=1e-12)


def test_ctmc_and_batch_drift():
    drift = mcpert.batch_arrival_drift(np.array([-1.0, 1.0]), np.array([4.0, -5.0, 1.0]), 50)
    assert drift["z0"] == pytest.approx(2.0, abs=1e-9)
    assert drift["lambda"] == pytest.approx(1.0, abs=1e-9)
    assert drift["b"] == pytest.approx(2.0, abs=1e-9)
    q = np.array([[-1.0, 1.0], [2.0, -2.0]])
    np.testing.assert_allclose(mcpert.ctmc_deviation_matrix(q), np.array([[1, -1], [-2, 2]]) / 9, atol=1e-12)
    assert mcpert.ctmc_lambda1_bound(q).ell == pytest.approx(1 / 3)


def test_gallery_and_fuzz():
    names = mcpert.gallery_names()
    assert "funderlic8" in names and "mm1" in names
    report = mcpert.fuzz_bounds("meyer4", cases=50, magnitude=0.01, seed=3)
    assert report["violations"] == 0
    assert report["cases"] == 50
    assert {s["bound"] for s in report["summary"]} >= {"seneta_best", "drift_hitting"}


def test_cli_roundtrip():
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "funderlic8.json")
        code, out, _ = mcpert.run_cli(["gallery", "export", "funderlic8", path])
        assert code == 0
        code, out, _ = mcpert.run_cli(["bounds", path, "--format", "json"])
        assert code == 0
        rows = {r["bound"]: r for r in json.loads(out)["bounds"]}
        assert rows["seneta_best"]["ell"] == pytest.approx(11.3352, abs=1e-3)
