"""Two-stage select-then-test design.

Stage 1 enrolls ``n`` per active arm and ``ceil(R n)`` controls and keeps only
the arm with the largest Z statistic. Stage 2 enrolls the same numbers again
on the kept arm and the control; the pooled statistic

    Z2* = (Z1M + Y) / sqrt(2)

(``Y`` being the stage-2-only comparison) is tested against C.

Two forms of the operating-characteristic integrals are provided:

``form="exact"`` (default)
    Derived from the decision rule above. Conditioning on the stage-1 control
    noise contributes a factor ``1/sqrt(R)``; it agrees with the simulator for
    every R.

``form="published"``
    The double integrals exactly as usually printed, which carry the stage-1
    control noise with unit weight. The two forms coincide at ``R = 1`` only;
    for ``R > 1`` the published form overstates both alpha and the power loss,
    so its designs are conservative and larger than necessary. It is kept for
    reproducing results that were computed with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

from .errors import InvalidParameterError
from .params import OperatingTargets, TrialParams
from .search import DEFAULT_N_CAP, solve_design
from .stats import (
    DEFAULT_BISECTION,
    DEFAULT_QUADRATURE,
    BisectionSpec,
    QuadratureSpec,
    gauss_weighted_integral_2d,
    std_normal_cdf,
)

__all__ = [
    "FORMS",
    "TwoStageDesignPoint",
    "type1_error_two_stage",
    "power_two_stage",
    "solve_two_stage",
]

FORMS = ("exact", "published")


def _check_form(form: str) -> None:
    if form not in FORMS:
        raise InvalidParameterError("form", f"must be one of {FORMS}, got {form!r}")


@dataclass(frozen=True)
class TwoStageDesignPoint:
    """A solved two-stage design; ``n`` and ``ceil(R n)`` are per stage."""

    ratio: float
    k: int
    critical_value: float
    per_arm_stage_n: int
    control_stage_n: int
    total_n: int
    achieved_alpha: float
    achieved_power: float
    ratio_mode: str = "nominal"
    form: str = "exact"

    stage = "two_stage"

    @property
    def per_arm_n(self) -> int:
        return self.per_arm_stage_n

    @property
    def control_n(self) -> int:
        return self.control_stage_n


def type1_error_two_stage(c: float, params: TrialParams,
                          quad: QuadratureSpec = DEFAULT_QUADRATURE,
                          form: str = "exact") -> float:
    """P(Z2* >= c) under the global null; depends on ``k`` and ``ratio`` only."""
    _check_form(form)
    r, k = params.ratio, params.k
    shift = c * math.sqrt(2 * (r + 1) / r)
    b_coef = math.sqrt((r + 1) / r)
    a_coef = 1 / math.sqrt(r) if form == "exact" else 1.0
    return 1.0 - gauss_weighted_integral_2d(
        lambda a, b: std_normal_cdf(a_coef * a + shift - b_coef * b) ** k, quad
    )


def power_two_stage(c: float, n: int, params: TrialParams,
                    quad: QuadratureSpec = DEFAULT_QUADRATURE,
                    form: str = "exact") -> float:
    """P(arm K selected at the interim and Z2* >= c) under the least favourable configuration."""
    _check_form(form)
    r, k = params.ratio, params.k
    rn = math.sqrt(n)
    lead = 2 * rn * params.delta / params.sigma - c * math.sqrt(2 * (r + 1) / r)
    u_coef = math.sqrt((r + 1) / r)
    sep = rn * (params.delta - params.delta0) / params.sigma
    outer = math.sqrt(r) if form == "exact" else 1.0

    def integrand(w, u):
        return std_normal_cdf(outer * (w + u_coef * u + lead)) * std_normal_cdf(w + sep) ** (k - 1)

    return gauss_weighted_integral_2d(integrand, quad)


# Module-level partials keep the critical-value cache keyed per form.
_TYPE1 = {f: partial(type1_error_two_stage, form=f) for f in FORMS}
_POWER = {f: partial(power_two_stage, form=f) for f in FORMS}


def solve_two_stage(params: TrialParams, targets: OperatingTargets, *,
                    form: str = "exact", ratio_mode: str = "nominal",
                    n_cap: int = DEFAULT_N_CAP,
                    quad: QuadratureSpec = DEFAULT_QUADRATURE,
                    bisection: BisectionSpec = DEFAULT_BISECTION) -> TwoStageDesignPoint:
    _check_form(form)
    res = solve_design(_TYPE1[form], _POWER[form], params, targets,
                       ratio_mode=ratio_mode, n_cap=n_cap, quad=quad, bisection=bisection)
    return TwoStageDesignPoint(
        ratio=float(params.ratio),
        k=params.k,
        critical_value=res.critical_value,
        per_arm_stage_n=res.n,
        control_stage_n=res.control_n,
        total_n=2 * res.control_n + (params.k + 1) * res.n,
        achieved_alpha=res.achieved_alpha,
        achieved_power=res.achieved_power,
        ratio_mode=ratio_mode,
        form=form,
    )
