import math

import numpy as np
import pytest

import clsim


def test_geometry_round_trip():
    g = clsim.angle(3, 30.0)
    v = clsim.realize_vectors(g, 8, seed=4)
    assert v.shape == (8, 3)
    back = clsim.measure_geometry(v)
    np.testing.assert_allclose(back.sq_dists, g.sq_dists, atol=1e-8)
    with pytest.raises(clsim.ValidationError):
        clsim.explicit(np.ones(2), np.array([[0.0, 9.0], [9.0, 0.0]]))


def test_solvers():
    w = clsim.fit_min_norm(np.array([[1.0, 0.0]]), np.array([2.0]), np.array([0.0, 5.0]))
    np.testing.assert_allclose(w, [2.0, 5.0])
    w = clsim.fit_least_squares(np.array([[1.0], [1.0]]), np.array([1.0, 3.0]))
    assert w[0] == pytest.approx(2.0)


def test_theory_examples():
    same = clsim.identical(2)
    a = clsim.theory_adaptation(2, 20, 60, 10, 0.0, same)
    assert a["total"] == pytest.approx(0.25)
    assert a["regime"] == "Overparameterized"
    assert clsim.theory_memory(2, 20, 60, 10, 0.0, same)["total"] == pytest.approx(-0.25)
    under = clsim.theory_adaptation(3, 60, 40, 30, 0.5, clsim.identical(3))
    assert under["total"] == pytest.approx(10 / 49)
    with pytest.raises(clsim.UndefinedTheoryError):
        clsim.theory_adaptation(2, 20, 30, 10, 0.1, same)
    assert clsim.classify_regime(30, 20, 10) == "Boundary"


def test_extrema():
    s_star, grid, values = clsim.find_memory_floor(100, 400, 0.0, 1.0, 1.0, 0.0)
    assert s_star == 100
    assert len(grid) == len(values) == 299
    with pytest.raises(clsim.RangeError):
        clsim.find_adaptation_turning_point(2, 100, 102, 0.1, clsim.identical(2))


def test_train_sequence():
    cfg = clsim.SequenceConfig(T=2, n=20, p=6, s=4)
    out = clsim.train_sequence(cfg, seed=3)
    np.testing.assert_allclose(out["snapshots"][1], out["vectors"][:, 0], atol=1e-8)
    assert math.isnan(out["memory"][0])


def test_monte_carlo():
    cfg = clsim.SequenceConfig(T=2, n=20, p=60, s=10)
    rows = clsim.run_replications(cfg, reps=200, seed=1, threads=2)
    a2 = next(r for r in rows if r["metric"] == "A" and r["task"] == 2)
    assert a2["theory"] == pytest.approx(0.25)
    assert abs(a2["mean"] - 0.25) <= 3 * a2["stderr"]
    again = clsim.run_replications(cfg, reps=200, seed=1, threads=1)
    assert rows == again


def test_sweep_skips_boundary():
    cfg = clsim.SequenceConfig(T=2, n=20, p=60, s=10, sigma=0.1)
    rows = clsim.run_sweep(cfg, "p", [20, 30, 60], reps=2)
    skipped = [r for r in rows if r["skipped"]]
    assert len(skipped) == 1 and skipped[0]["axis_value"] == 30
    with pytest.raises(clsim.EmptySweepError):
        clsim.run_sweep(cfg, "p", [], reps=2)
