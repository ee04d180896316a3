"""Allocation-ratio sweeps and the summaries drawn from them.

A sweep solves one design per grid ratio and compares each against the 1:1
design solved under the same targets. ``find_r_op`` picks the ratio that
minimizes the total sample size; ``find_r_max`` the largest ratio whose total
stays within an inflation budget of the 1:1 total.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Sequence, Union

from .errors import InvalidParameterError
from .params import OperatingTargets, TrialParams
from .single_stage import DesignPoint, solve_sample_size_single
from .stats import DEFAULT_QUADRATURE, QuadratureSpec
from .two_stage import TwoStageDesignPoint, solve_two_stage

__all__ = [
    "STAGES",
    "Scenario",
    "RatioGrid",
    "SweepRow",
    "SweepTable",
    "OptimalRatioReport",
    "ReductionRow",
    "solve",
    "sweep",
    "find_r_op",
    "find_r_max",
    "per_arm_reduction_report",
]

STAGES = ("single", "two_stage")
Design = Union[DesignPoint, TwoStageDesignPoint]


@dataclass(frozen=True)
class Scenario:
    """Everything but the ratio needed to solve one design."""

    params: TrialParams
    targets: OperatingTargets = field(default_factory=OperatingTargets)
    stage: str = "single"
    ratio_mode: str = "nominal"
    form: str = "exact"  # two-stage only
    quad: QuadratureSpec = DEFAULT_QUADRATURE

    def __post_init__(self):
        if self.stage not in STAGES:
            raise InvalidParameterError("stage", f"must be one of {STAGES}, got {self.stage!r}")


@dataclass(frozen=True)
class RatioGrid:
    """Ratios ``start, start + step, ...`` up to ``end``, carried as decimals."""

    start: Decimal = Decimal("1.0")
    end: Decimal = Decimal("5.0")
    step: Decimal = Decimal("0.1")

    def __post_init__(self):
        for name in ("start", "end", "step"):
            object.__setattr__(self, name, Decimal(str(getattr(self, name))))
        if self.step <= 0:
            raise InvalidParameterError("grid", "step must be > 0")
        if self.start > self.end:
            raise InvalidParameterError("grid", f"start {self.start} exceeds end {self.end}")
        if self.start < 1:
            raise InvalidParameterError("grid", "ratios below 1 are not supported")

    @classmethod
    def parse(cls, text: str) -> "RatioGrid":
        """Parse ``"start:end:step"`` (commas also accepted)."""
        parts = text.replace(",", ":").split(":")
        if len(parts) != 3:
            raise InvalidParameterError("grid", f"expected start:end:step, got {text!r}")
        try:
            return cls(*(Decimal(p.strip()) for p in parts))
        except ArithmeticError as exc:
            raise InvalidParameterError("grid", f"not a number in {text!r}") from exc

    def ratios(self) -> list[Decimal]:
        count = int((self.end - self.start) / self.step)
        return [self.start + i * self.step for i in range(count + 1)]

    def __str__(self) -> str:
        return f"{self.start}:{self.end}:{self.step}"


@dataclass(frozen=True)
class SweepRow:
    ratio: Decimal
    design: Design
    n_vs_baseline: int
    proportion_vs_baseline: float
    per_arm_reduction: int
    per_arm_proportion: float


@dataclass(frozen=True)
class SweepTable:
    scenario: Scenario
    grid: RatioGrid
    baseline: Design
    rows: tuple[SweepRow, ...]

    def row(self, ratio) -> SweepRow:
        key = Decimal(str(ratio))
        for r in self.rows:
            if r.ratio == key:
                return r
        raise KeyError(f"ratio {ratio} is not on the grid {self.grid}")


@dataclass(frozen=True)
class OptimalRatioReport:
    """Grid ratios minimizing total N.

    ``[r_op_low, r_op_high]`` is the first contiguous run of minimizers;
    ``ratios`` lists every minimizing grid ratio, including any further runs.
    """

    r_op_low: Decimal
    r_op_high: Decimal
    min_total_n: int
    ratios: tuple[Decimal, ...]

    def __str__(self) -> str:
        if self.r_op_low == self.r_op_high:
            return str(self.r_op_low)
        return f"{self.r_op_low}-{self.r_op_high}"


@dataclass(frozen=True)
class ReductionRow:
    ratio: Decimal
    per_arm_n: int
    total_n: int
    per_arm_reduction: int
    per_arm_proportion: float
    total_over_baseline: float
    exceeds_budget: bool


def solve(scenario: Scenario, ratio) -> Design:
    params = scenario.params.with_ratio(float(ratio))
    if scenario.stage == "single":
        return solve_sample_size_single(params, scenario.targets,
                                        ratio_mode=scenario.ratio_mode, quad=scenario.quad)
    return solve_two_stage(params, scenario.targets, form=scenario.form,
                           ratio_mode=scenario.ratio_mode, quad=scenario.quad)


def _row(ratio: Decimal, design: Design, baseline: Design) -> SweepRow:
    return SweepRow(
        ratio=ratio,
        design=design,
        n_vs_baseline=design.total_n - baseline.total_n,
        proportion_vs_baseline=design.total_n / baseline.total_n,
        per_arm_reduction=baseline.per_arm_n - design.per_arm_n,
        per_arm_proportion=design.per_arm_n / baseline.per_arm_n,
    )


def sweep(scenario: Scenario, grid: RatioGrid = RatioGrid(), workers: int = 1) -> SweepTable:
    """Solve one design per grid ratio.

    Grid points are independent; with ``workers > 1`` they are solved on a
    thread pool and reassembled in grid order. The 1:1 baseline is always
    solved, even when the grid starts above 1.
    """
    ratios = grid.ratios()
    todo = ratios if Decimal(1) in ratios else [Decimal(1)] + ratios
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            designs = list(pool.map(lambda r: solve(scenario, r), todo))
    else:
        designs = [solve(scenario, r) for r in todo]
    solved = dict(zip(todo, designs))
    baseline = solved[Decimal(1)]
    rows = tuple(_row(r, solved[r], baseline) for r in ratios)
    return SweepTable(scenario=scenario, grid=grid, baseline=baseline, rows=rows)


def find_r_op(table: SweepTable) -> OptimalRatioReport:
    """Ratio (or contiguous range of tied ratios) with the smallest total N.

    Ties use exact integer equality of N.
    """
    if not table.rows:
        raise InvalidParameterError("table", "sweep table has no rows")
    best = min(r.design.total_n for r in table.rows)
    hits = [i for i, r in enumerate(table.rows) if r.design.total_n == best]
    end = hits[0]
    while end + 1 < len(table.rows) and table.rows[end + 1].design.total_n == best:
        end += 1
    return OptimalRatioReport(
        r_op_low=table.rows[hits[0]].ratio,
        r_op_high=table.rows[end].ratio,
        min_total_n=best,
        ratios=tuple(table.rows[i].ratio for i in hits),
    )


def _within_budget(proportion: float, budget: float, decimals: int | None) -> bool:
    if math.isinf(budget):
        return True
    if decimals is not None:
        proportion = round(proportion, decimals)
    # tolerance only absorbs float noise in 1 + budget
    return proportion <= 1 + budget + 1e-12


def find_r_max(table: SweepTable, inflation_budget: float = 0.03,
               decimals: int | None = 2) -> Decimal:
    """Largest grid ratio whose total N is within ``1 + budget`` of the 1:1 total.

    The proportion ``N(R) / N(1:1)`` is rounded to ``decimals`` places before
    the comparison, matching tables that state proportions to two decimals;
    pass ``decimals=None`` to compare the raw ratio.
    """
    if inflation_budget < 0:
        raise InvalidParameterError("budget", "must be >= 0")
    ok = [r.ratio for r in table.rows
          if _within_budget(r.proportion_vs_baseline, inflation_budget, decimals)]
    if not ok:
        raise InvalidParameterError("budget", "no grid ratio satisfies the budget")
    return max(ok)


def per_arm_reduction_report(table: SweepTable, ratios: Sequence,
                             inflation_budget: float = 0.03,
                             decimals: int | None = 2) -> list[ReductionRow]:
    """Per-arm sample size at each requested ratio relative to the 1:1 design.

    Rows whose total N breaks the inflation budget are flagged.
    """
    out = []
    for ratio in ratios:
        row = table.row(ratio)
        out.append(ReductionRow(
            ratio=row.ratio,
            per_arm_n=row.design.per_arm_n,
            total_n=row.design.total_n,
            per_arm_reduction=row.per_arm_reduction,
            per_arm_proportion=row.per_arm_proportion,
            total_over_baseline=row.proportion_vs_baseline,
            exceeds_budget=not _within_budget(row.proportion_vs_baseline, inflation_budget, decimals),
        ))
    return out
