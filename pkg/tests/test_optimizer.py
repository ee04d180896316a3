import math
from decimal import Decimal

import pytest

from armalloc import (
    InvalidParameterError,
    OperatingTargets,
    RatioGrid,
    Scenario,
    TrialParams,
    find_r_max,
    find_r_op,
    per_arm_reduction_report,
    sweep,
)

STAMPEDE = Scenario(TrialParams(k=5, sigma=1.5), OperatingTargets(alpha=0.013, power=0.85))


@pytest.fixture(scope="module")
def sweeps():
    cache = {}

    def get(k, alpha=0.05, power=0.9, stage="single"):
        key = (k, alpha, power, stage)
        if key not in cache:
            cache[key] = sweep(Scenario(TrialParams(k=k), OperatingTargets(alpha, power), stage=stage))
        return cache[key]

    return get


@pytest.fixture(scope="module")
def stampede():
    return sweep(STAMPEDE)


class TestGrid:
    def test_default_grid(self):
        ratios = RatioGrid().ratios()
        assert len(ratios) == 41
        assert ratios[0] == Decimal("1.0") and ratios[-1] == Decimal("5.0")
        assert Decimal("3.3") in ratios

    def test_parse(self):
        g = RatioGrid.parse("1.5:2.5:0.25")
        assert g.ratios() == [Decimal(x) for x in ("1.5", "1.75", "2", "2.25", "2.5")]
        assert RatioGrid.parse("1,2,0.5").ratios() == [1, Decimal("1.5"), 2]

    @pytest.mark.parametrize("text", ["3:2:0.1", "1:2:0", "1:2", "0.5:2:0.1", "a:b:c"])
    def test_invalid(self, text):
        with pytest.raises(InvalidParameterError):
            RatioGrid.parse(text)


class TestSweep:
    def test_baseline_rows(self, sweeps):
        table = sweeps(2)
        row = table.row(1)
        assert row.design.total_n == 249
        assert (row.n_vs_baseline, row.proportion_vs_baseline) == (0, 1.0)
        assert (row.per_arm_reduction, row.per_arm_proportion) == (0, 1.0)

    def test_two_to_one_k5(self, sweeps):
        row = sweeps(5).row(2)
        assert round(row.proportion_vs_baseline, 2) == 0.92
        assert -row.n_vs_baseline == 46

    def test_baseline_solved_when_grid_starts_above_one(self):
        table = sweep(Scenario(TrialParams(k=2)), RatioGrid.parse("1.5:2.0:0.1"))
        assert table.baseline.total_n == 249
        assert [str(r.ratio) for r in table.rows] == ["1.5", "1.6", "1.7", "1.8", "1.9", "2.0"]

    def test_parallel_matches_serial(self):
        s = Scenario(TrialParams(k=3))
        assert sweep(s, workers=4) == sweep(s)

    @pytest.mark.parametrize("stage", ["single", "two_stage"])
    def test_composition_identities(self, sweeps, stage):
        for row in sweeps(3, stage=stage).rows:
            d = row.design
            assert d.control_n == math.ceil(round(float(row.ratio) * d.per_arm_n, 9))
            if stage == "single":
                assert d.total_n == d.control_n + 3 * d.per_arm_n
            else:
                assert d.total_n == 2 * d.control_n + 4 * d.per_arm_n

    # 2:1 comparisons against 1:1 (proportion, reduction in patients)
    @pytest.mark.parametrize("alpha,row", [
        (0.2, [(1.08, -13), (1.05, -11), (1.00, -1), (0.99, 5)]),
        (0.1, [(1.04, -8), (1.00, -1), (0.97, 14), (0.95, 26)]),
        (0.05, [(1.03, -7), (0.98, 9), (0.94, 29), (0.92, 46)]),
        (0.025, [(1.01, -3), (0.96, 18), (0.93, 38), (0.91, 65)]),
    ])
    def test_two_to_one_reductions(self, sweeps, alpha, row):
        for k, (prop, red) in zip((2, 3, 4, 5), row):
            r = sweeps(k, alpha).row(2)
            assert (round(r.proportion_vs_baseline, 2), -r.n_vs_baseline) == (prop, red)


class TestROp:
    def test_k4(self, sweeps):
        rop = find_r_op(sweeps(4))
        assert (rop.r_op_low, rop.r_op_high) == (Decimal("1.9"), Decimal("1.9"))
        assert str(rop) == "1.9"

    def test_tied_range(self, sweeps):
        rop = find_r_op(sweeps(5, alpha=0.2))
        assert str(rop) == "1.4-1.6"

    @pytest.mark.parametrize("k,alpha,power", [(5, 0.2, 0.9), (2, 0.1, 0.9), (5, 0.025, 0.8)])
    def test_report_invariants(self, sweeps, k, alpha, power):
        table = sweeps(k, alpha, power)
        rop = find_r_op(table)
        for row in table.rows:
            assert rop.min_total_n <= row.design.total_n
            if rop.r_op_low <= row.ratio <= rop.r_op_high:
                assert row.design.total_n == rop.min_total_n
        assert set(rop.ratios) == {r.ratio for r in table.rows if r.design.total_n == rop.min_total_n}

    # reductions at R_OP against 1:1; alpha 0.1, K=3 lands two patients lower than published
    @pytest.mark.parametrize("alpha,row", [
        (0.2, [2, 3, 6, 16]), (0.1, [2, 9, 19, 28]), (0.05, [2, 14, 30, 48]), (0.025, [8, 23, 41, 70]),
    ])
    def test_reduction_at_optimum(self, sweeps, alpha, row):
        for k, red in zip((2, 3, 4, 5), row):
            table = sweeps(k, alpha)
            assert table.baseline.total_n - find_r_op(table).min_total_n == red

    @pytest.mark.parametrize("k,n1,red", [(2, 186, 2), (3, 276, 10), (4, 370, 22), (5, 468, 37)])
    def test_lower_power_row(self, sweeps, k, n1, red):
        table = sweeps(k, 0.05, 0.8)
        assert table.baseline.total_n == n1
        assert n1 - find_r_op(table).min_total_n == red

    def test_two_stage_optimum_at_equal_allocation(self, sweeps):
        assert find_r_op(sweeps(2, stage="two_stage")).r_op_low == Decimal("1.0")


class TestRMax:
    def test_examples(self, sweeps):
        assert find_r_max(sweeps(2)) == Decimal("2.0")
        assert find_r_max(sweeps(5, alpha=0.025)) == Decimal("4.5")

    def test_unbounded_budget_is_grid_end(self, sweeps):
        assert find_r_max(sweeps(3), math.inf) == Decimal("5.0")

    def test_zero_budget_when_equal_allocation_is_optimal(self, sweeps):
        table = sweeps(2, alpha=0.2, power=0.8)
        assert find_r_op(table).r_op_high == Decimal("1.0")
        assert find_r_max(table, 0.0) == Decimal("1.0")

    def test_zero_budget_keeps_cheaper_ratios(self, sweeps):
        table = sweeps(5)
        raw = find_r_max(table, 0.0, decimals=None)
        assert raw > Decimal("2.0")
        assert table.row(raw).design.total_n <= table.baseline.total_n
        # a proportion of 1.005 rounds to 1.00 and still counts as no inflation
        assert find_r_max(table, 0.0) >= raw

    def test_monotone_in_budget(self, sweeps):
        table = sweeps(4, alpha=0.1)
        values = [find_r_max(table, b / 200) for b in range(0, 40)]
        assert values == sorted(values)

    def test_rounded_versus_raw_comparison(self, sweeps):
        # 578 / 560 = 1.032 rounds to 1.03
        table = sweeps(4, alpha=0.025)
        assert find_r_max(table) == Decimal("3.7")
        assert find_r_max(table, decimals=None) == Decimal("3.5")

    def test_negative_budget(self, sweeps):
        with pytest.raises(InvalidParameterError):
            find_r_max(sweeps(2), -0.01)


class TestReduction:
    def test_two_arm_default(self, sweeps):
        (row,) = per_arm_reduction_report(sweeps(2), [2])
        assert (round(row.per_arm_proportion, 2), row.per_arm_reduction) == (0.77, 19)
        assert not row.exceeds_budget

    def test_baseline(self, sweeps):
        (row,) = per_arm_reduction_report(sweeps(3), [1])
        assert (row.per_arm_reduction, row.per_arm_proportion) == (0, 1.0)

    @pytest.mark.parametrize("alpha,flags", [
        (0.2, [True, True, False, False]), (0.1, [True, False, False, False]),
        (0.05, [False] * 4), (0.025, [False] * 4),
    ])
    def test_budget_flags_at_two_to_one(self, sweeps, alpha, flags):
        got = [per_arm_reduction_report(sweeps(k, alpha), [2])[0].exceeds_budget for k in (2, 3, 4, 5)]
        assert got == flags

    def test_stampede(self, stampede):
        rows = per_arm_reduction_report(stampede, [1, 2, "4.9"])
        assert [(r.total_n, r.per_arm_n) for r in rows] == [(1560, 260), (1393, 199), (1614, 163)]
        assert find_r_max(stampede) == Decimal("4.9")
        assert 4 * rows[2].per_arm_reduction == 388
        assert round(rows[1].per_arm_proportion, 2) == 0.77

    def test_off_grid_ratio(self, sweeps):
        with pytest.raises(KeyError):
            per_arm_reduction_report(sweeps(2), [2.05])


def test_empty_table_rejected(sweeps):
    from dataclasses import replace
    with pytest.raises(InvalidParameterError):
        find_r_op(replace(sweeps(2), rows=()))


def test_unknown_stage():
    with pytest.raises(InvalidParameterError):
        Scenario(TrialParams(k=2), stage="three")
