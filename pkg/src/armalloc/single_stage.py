"""One-stage design: the maximum of K control comparisons is tested against C.

With ``Z_i = (R S_i - S_0) / (σ sqrt((R + 1) R n))`` the trial carries the best
arm forward when ``max Z_i >= C``. Conditioning on the control sum makes the
arms independent, which gives the one-dimensional integrals below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import OperatingTargets, TrialParams
from .search import DEFAULT_N_CAP, critical_value, solve_design
from .stats import (
    DEFAULT_BISECTION,
    DEFAULT_QUADRATURE,
    BisectionSpec,
    QuadratureSpec,
    gauss_weighted_integral_1d,
    std_normal_cdf,
)

__all__ = [
    "DesignPoint",
    "type1_error_single",
    "power_single",
    "solve_critical_value_single",
    "solve_sample_size_single",
    "dunnett_heuristic_ratio",
]


@dataclass(frozen=True)
class DesignPoint:
    """A solved one-stage design.

    ``total_n = control_n + k * per_arm_n`` with ``control_n = ceil(ratio * per_arm_n)``.
    """

    ratio: float
    k: int
    critical_value: float
    per_arm_n: int
    control_n: int
    total_n: int
    achieved_alpha: float
    achieved_power: float
    ratio_mode: str = "nominal"

    stage = "single"

    @property
    def realized_ratio(self) -> float:
        return self.control_n / self.per_arm_n


def type1_error_single(c: float, params: TrialParams,
                       quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """P(max Z_i >= c) under the global null.

    Depends on ``params.k`` and ``params.ratio`` only.
    """
    r, k = params.ratio, params.k
    shift = c * math.sqrt((r + 1) / r)
    scale = 1 / math.sqrt(r)
    return 1.0 - gauss_weighted_integral_1d(lambda x: std_normal_cdf(shift + scale * x) ** k, quad)


def power_single(c: float, n: int, params: TrialParams,
                 quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Probability that arm K is both the best arm and exceeds ``c``.

    Evaluated under the least favourable configuration: control mean 0, arm K
    at ``delta``, all other arms at ``delta0``.
    """
    r, k = params.ratio, params.k
    rn = math.sqrt(n)
    sep = rn * (params.delta - params.delta0) / params.sigma
    lead = math.sqrt(r * n) * params.delta / params.sigma - c * math.sqrt(r + 1)
    root_r = math.sqrt(r)

    def integrand(w):
        return std_normal_cdf(w + sep) ** (k - 1) * std_normal_cdf(root_r * w + lead)

    return gauss_weighted_integral_1d(integrand, quad)


def solve_critical_value_single(params: TrialParams, targets: OperatingTargets,
                                quad: QuadratureSpec = DEFAULT_QUADRATURE,
                                bisection: BisectionSpec = DEFAULT_BISECTION) -> float:
    """Smallest critical value whose type I error does not exceed ``targets.alpha``."""
    return critical_value(type1_error_single, params, targets.alpha, quad, bisection)


def solve_sample_size_single(params: TrialParams, targets: OperatingTargets, *,
                             ratio_mode: str = "nominal", n_cap: int = DEFAULT_N_CAP,
                             quad: QuadratureSpec = DEFAULT_QUADRATURE,
                             bisection: BisectionSpec = DEFAULT_BISECTION) -> DesignPoint:
    """Smallest per-arm n meeting the power target at the minimal critical value.

    Raises:
        InfeasibleDesignError: if no ``n <= n_cap`` reaches the power target.
    """
    res = solve_design(type1_error_single, power_single, params, targets,
                       ratio_mode=ratio_mode, n_cap=n_cap, quad=quad, bisection=bisection)
    return DesignPoint(
        ratio=float(params.ratio),
        k=params.k,
        critical_value=res.critical_value,
        per_arm_n=res.n,
        control_n=res.control_n,
        total_n=res.control_n + params.k * res.n,
        achieved_alpha=res.achieved_alpha,
        achieved_power=res.achieved_power,
        ratio_mode=ratio_mode,
    )


def dunnett_heuristic_ratio(k: int) -> float:
    """The square-root rule: control gets sqrt(K) patients per active-arm patient."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.sqrt(k)
