import math

import numpy as np
import pytest
from scipy import integrate

from uniband.core import BanditInstance, InvalidParameterError, UniformArm
from uniband.montecarlo import (RegretCurve, Scenario, _Moments, c2_probe, chunk_size, linear_checkpoints,
                                log_checkpoints, run_scenario)
from uniband.policies import PolicySpec, run_policy
from uniband.theory import index_underestimate_prob_bound, minmax_joint_density

KINDS = ["ucb-uniform", "bk-ucb", "chk-normal", "kr"]
MIXED = BanditInstance.from_pairs([(0, 1), (0.2, 1.0), (0.1, 1.3)])


def _scenario(instance=MIXED, reps=40, horizon=400, seed=5, kinds=KINDS):
    return Scenario(instance, [PolicySpec(k) for k in kinds], horizon,
                    linear_checkpoints(horizon, 8, 3 * instance.n_arms), reps, seed)


def test_single_replication_equals_run_policy():
    sc = _scenario(reps=1)
    curves = run_scenario(sc)
    for slot, (curve, spec) in enumerate(zip(curves, sc.policies)):
        run = run_policy(MIXED, spec, sc.horizon, sc.master_seed, key=(slot, 0), checkpoints=sc.checkpoints)
        np.testing.assert_array_equal(curve.mean, run.regret)
        assert not curve.stderr.any() and curve.reps == 1


def test_identical_arms_give_zero_curves():
    curves = run_scenario(_scenario(BanditInstance.from_pairs([(3, 4)] * 4), reps=20))
    for c in curves:
        assert not c.mean.any() and not c.stderr.any()


def test_bit_identical_across_worker_counts():
    sc = _scenario(reps=150)  # several chunks per policy
    assert chunk_size(3, 400) < 150
    ref = run_scenario(sc, workers=1)
    for workers in (2, 8):
        for a, b in zip(ref, run_scenario(sc, workers=workers)):
            assert a.mean.tobytes() == b.mean.tobytes()
            assert a.stderr.tobytes() == b.stderr.tobytes()


def test_aggregate_matches_direct_statistics():
    sc = _scenario(reps=150, kinds=["ucb-uniform"])
    curve = run_scenario(sc)[0]
    paths = np.array([run_policy(MIXED, sc.policies[0], sc.horizon, sc.master_seed, key=(0, r),
                                 checkpoints=sc.checkpoints).regret for r in range(150)])
    np.testing.assert_allclose(curve.mean, paths.mean(axis=0), rtol=1e-12)
    np.testing.assert_allclose(curve.stderr, paths.std(axis=0, ddof=1) / math.sqrt(150), rtol=1e-10)


def test_moment_merge_matches_numpy():
    x = np.random.default_rng(0).normal(size=(97, 5)) * 10 + 3
    acc = _Moments()
    for lo in range(0, 97, 13):
        acc = acc.merge(_Moments.of(x[lo:lo + 13]))
    assert acc.count == 97
    np.testing.assert_allclose(acc.mean, x.mean(axis=0), rtol=1e-13)
    np.testing.assert_allclose(acc.m2, ((x - x.mean(axis=0)) ** 2).sum(axis=0), rtol=1e-12)


def test_mean_regret_nondecreasing():
    for c in run_scenario(_scenario(reps=60)):
        assert np.all(np.diff(c.mean) >= 0)
        assert np.all(c.stderr >= 0)


def test_seed_changes_output():
    a = run_scenario(_scenario(seed=1))[0].mean
    b = run_scenario(_scenario(seed=2))[0].mean
    assert not np.array_equal(a, b)


def test_checkpoint_generators():
    assert linear_checkpoints(100, 4) == [25, 50, 75, 100]
    assert linear_checkpoints(10, 20, 6) == [6, 7, 8, 9, 10]
    pts = log_checkpoints(10**5, 25, 18)
    assert pts[0] == 18 and pts[-1] == 10**5
    assert pts == sorted(set(pts))
    ratios = np.diff(np.log(pts))
    assert ratios.max() / ratios.min() < 1.1


def test_scenario_validation():
    with pytest.raises(InvalidParameterError):
        Scenario(MIXED, [PolicySpec("ucb-uniform")], 8, [8])  # shorter than 3 pulls per arm
    with pytest.raises(InvalidParameterError):
        Scenario(MIXED, [PolicySpec("kr")], 100, [50, 20])
    with pytest.raises(InvalidParameterError):
        Scenario(MIXED, [PolicySpec("kr")], 100, [100], replications=0)
    with pytest.raises(InvalidParameterError):
        Scenario(MIXED, [], 100, [100])


def test_regret_curve_rows():
    c = RegretCurve("kr", np.array([10, 20]), np.array([0.5, 1.0]), np.array([0.1, 0.2]), 7)
    assert list(c.rows()) == [("kr", 10, 0.5, 0.1, 7), ("kr", 20, 1.0, 0.2, 7)]


# -- index underestimation probe ---------------------------------------------

def test_probe_frequencies_are_probabilities():
    res = c2_probe(UniformArm(0, 1), 0.49, 30, 2000, stream=3)
    for f in (res.ucb_uniform, res.bk):
        assert np.all((f >= 0) & (f <= 1))
    # The event set grows with t only through new j; the index itself grows
    # with t, so neither curve is forced to be monotone. Just check shapes.
    assert res.t[0] == 3 and res.t[-1] == 30 and len(res.ucb_uniform) == 28


def test_probe_within_summed_bound():
    arm, eps = UniformArm(0, 1), 0.1
    res = c2_probe(arm, eps, 60, 20000, stream=11)
    for t, f, se in zip(res.t, res.ucb_uniform, res.ucb_uniform_stderr):
        bound = sum(index_underestimate_prob_bound(t, s, eps, arm) for s in range(3, t + 1))
        assert f <= bound + 3 * max(se, math.sqrt(bound / res.replications))


def test_probe_t3_matches_density_quadrature():
    arm, eps = UniformArm(0, 1), 0.2
    target = arm.mean() - eps

    # event: v + (w - v)/2 * 3 < target  <=>  w < (target + v/2) / 1.5
    def w_hi(v):
        return min(arm.b, max(v, (target + 0.5 * v) / 1.5))

    exact, _ = integrate.dblquad(lambda w, v: minmax_joint_density(3, w, v, arm), arm.a, arm.b, lambda v: v, w_hi,
                                 epsabs=1e-12)
    res = c2_probe(arm, eps, 3, 200_000, stream=4)
    assert res.ucb_uniform[0] == pytest.approx(exact, abs=4 * res.ucb_uniform_stderr[0] + 1e-9)


def test_probe_rejects_large_eps():
    with pytest.raises(InvalidParameterError):
        c2_probe(UniformArm(0, 1), 0.5, 10, 10)
