import math

import numpy as np
import pytest

from armalloc import (
    InvalidParameterError,
    MeanVector,
    OperatingTargets,
    TrialParams,
    lfc_config,
    null_config,
    power_single,
    power_two_stage,
    simulate_power_single,
    simulate_two_stage,
    simulate_type1_single,
    solve_sample_size_single,
    solve_two_stage,
    type1_error_single,
    type1_error_two_stage,
)
from armalloc.simulate import BLOCK_SIZE, SimEstimate, generate_replicates

REPS = 100_000


def test_power_with_trivial_threshold_is_selection_probability():
    p = TrialParams(k=3)
    est = simulate_power_single(-10.0, 20, p, 20_000, seed=1)
    # C below every statistic: only the "arm K is best" part of the event remains
    assert est.within(power_single(-10.0, 20, p))
    assert simulate_power_single(10.0, 20, p, 5000, seed=1).estimate == 0.0


def test_type1_rejects_always_or_never():
    p = TrialParams(k=3)
    assert simulate_type1_single(-10.0, 20, p, 5000).estimate == 1.0
    assert simulate_two_stage(-10.0, 20, p, 5000).estimate == 1.0
    assert simulate_two_stage(10.0, 20, p, 5000).estimate == 0.0


def test_overwhelming_effect_gives_full_power():
    p = TrialParams(k=4, sigma=1.0, delta=10.0, delta0=0.125)
    d = solve_sample_size_single(p, OperatingTargets())
    assert simulate_power_single(d.critical_value, d.per_arm_n, p, 20_000, seed=3).estimate > 0.99


def test_same_seed_same_estimate():
    p = TrialParams(k=3, ratio=1.7)
    a = simulate_type1_single(2.0, 30, p, 50_000, seed=11)
    b = simulate_type1_single(2.0, 30, p, 50_000, seed=11)
    assert a == b
    assert simulate_type1_single(2.0, 30, p, 50_000, seed=12) != a


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_estimate_independent_of_worker_count(workers):
    p = TrialParams(k=4, ratio=2.3)
    reps = 3 * BLOCK_SIZE + 123
    serial = simulate_two_stage(2.0, 25, p, reps, seed=5, hypothesis=lfc_config(p))
    parallel = simulate_two_stage(2.0, 25, p, reps, seed=5, hypothesis=lfc_config(p), workers=workers)
    assert serial == parallel
    assert simulate_type1_single(1.9, 25, p, reps, seed=5) == simulate_type1_single(
        1.9, 25, p, reps, seed=5, workers=workers)


def test_location_invariance_under_null():
    p = TrialParams(k=3, ratio=2.0)
    base = simulate_type1_single(2.0, 40, p, REPS, seed=2)
    shifted = simulate_type1_single(2.0, 40, p, REPS, seed=2, means=null_config(3, level=3.7))
    assert abs(base.estimate - shifted.estimate) <= 3 * base.std_error


def test_statistics_follow_definition():
    p = TrialParams(k=3, ratio=1.5, sigma=1.3)
    n = 21
    reps = generate_replicates(n, p, lfc_config(p), 2000, seed=4)
    n0 = math.ceil(1.5 * n)
    r = n0 / n
    s0, s = reps.sums[:, 0], reps.sums[:, 1:]
    z = (r * s - s0[:, None]) / (p.sigma * math.sqrt(r * (r + 1) * n))
    np.testing.assert_allclose(reps.z_stats, z)
    np.testing.assert_array_equal(reps.z_max_index, np.argmax(z, axis=1))
    assert reps.stage2_z is None


def test_two_stage_decomposition():
    p = TrialParams(k=4, ratio=2.0)
    m = 50_000
    reps = generate_replicates(30, p, null_config(4), m, seed=9, two_stage=True)
    np.testing.assert_allclose(reps.stage2_z, reps.z_max / math.sqrt(2) + reps.stage2_increment)
    corr = np.corrcoef(reps.z_max, reps.stage2_increment)[0, 1]
    assert abs(corr) < 4 / math.sqrt(m)
    # the increment is a standardized comparison scaled by 1/sqrt(2)
    assert np.std(reps.stage2_increment) == pytest.approx(1 / math.sqrt(2), abs=0.01)


def test_symmetric_arms_select_uniformly():
    k, m = 4, 80_000
    reps = generate_replicates(15, TrialParams(k=k), null_config(k), m, seed=6)
    counts = np.bincount(reps.z_max_index, minlength=k)
    se = math.sqrt(m * (1 / k) * (1 - 1 / k))
    assert np.all(np.abs(counts - m / k) <= 3 * se)


def test_single_stage_matches_analytic():
    p, t = TrialParams(k=2), OperatingTargets()
    d = solve_sample_size_single(p, t)
    a = simulate_type1_single(d.critical_value, d.per_arm_n, p, REPS, seed=21)
    b = simulate_power_single(d.critical_value, d.per_arm_n, p, REPS, seed=22)
    assert a.within(0.05)
    assert b.within(d.achieved_power)


@pytest.mark.parametrize("k,r,c,n", [(2, 1.0, 2.0, 40), (3, 2.0, 2.1, 40), (5, 3.0, 1.8, 20)])
def test_two_stage_matches_analytic(k, r, c, n):
    p = TrialParams(k=k, ratio=r)
    a = simulate_two_stage(c, n, p, REPS, seed=31)
    b = simulate_two_stage(c, n, p, REPS, seed=32, hypothesis=lfc_config(p))
    assert a.within(type1_error_two_stage(c, p))
    assert b.within(power_two_stage(c, n, p))


def test_single_stage_agreement_at_unequal_ratio():
    p = TrialParams(k=4, ratio=2.5)
    assert simulate_type1_single(2.1, 40, p, REPS, seed=41).within(type1_error_single(2.1, p))
    assert simulate_power_single(2.1, 40, p, REPS, seed=42).within(power_single(2.1, 40, p))


def test_sim_estimate_fields():
    est = SimEstimate.from_count(250, 1000, seed=3)
    assert est.estimate == 0.25
    assert est.std_error == pytest.approx(math.sqrt(0.25 * 0.75 / 1000))
    assert est.within(0.25 + 2.9 * est.std_error)
    assert not est.within(0.25 + 3.5 * est.std_error)
    assert SimEstimate.from_count(0, 1000, 0).within(0.001)


def test_mean_vector_helpers():
    p = TrialParams(k=3, delta=0.6, delta0=0.2)
    lfc = lfc_config(p)
    assert lfc.mu == (0.0, 0.2, 0.2, 0.6)
    assert lfc.target_arm == 3
    assert null_config(3).mu == (0.0,) * 4
    with pytest.raises(InvalidParameterError):
        MeanVector((0.0,))
    with pytest.raises(InvalidParameterError):
        MeanVector((0.0, 1.0), target_arm=2)
    with pytest.raises(InvalidParameterError):
        simulate_type1_single(2.0, 10, TrialParams(k=2), 100, means=null_config(3))
    with pytest.raises(InvalidParameterError):
        simulate_type1_single(2.0, 10, TrialParams(k=2), 0)
