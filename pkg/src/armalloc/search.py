"""Critical-value and sample-size searches common to both trial designs."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .errors import InfeasibleDesignError, InvalidParameterError
from .params import OperatingTargets, TrialParams
from .stats import (
    DEFAULT_BISECTION,
    DEFAULT_QUADRATURE,
    BisectionSpec,
    QuadratureSpec,
    bisect_bracket,
    ceil_product,
    smallest_integer,
)

RATIO_MODES = ("nominal", "realized")
DEFAULT_N_CAP = 10**6

# (critical value, params, quad) -> probability
Type1Fn = Callable[[float, TrialParams, QuadratureSpec], float]
# (critical value, n, params, quad) -> probability
PowerFn = Callable[[float, int, TrialParams, QuadratureSpec], float]


@dataclass(frozen=True)
class SearchResult:
    critical_value: float
    n: int
    control_n: int
    achieved_alpha: float
    achieved_power: float


@lru_cache(maxsize=4096)
def _critical_value(type1: Type1Fn, k: int, ratio: float, alpha: float,
                    quad: QuadratureSpec, bisection: BisectionSpec) -> float:
    params = TrialParams(k=k, ratio=ratio)
    _, hi = bisect_bracket(lambda c: type1(c, params, quad) - alpha, bisection)
    # hi sits on the alpha <= target side of the final bracket
    return hi


def critical_value(type1: Type1Fn, params: TrialParams, alpha: float,
                   quad: QuadratureSpec = DEFAULT_QUADRATURE,
                   bisection: BisectionSpec = DEFAULT_BISECTION) -> float:
    """Smallest C (to the bisection tolerance) with ``type1(C) <= alpha``."""
    return _critical_value(type1, params.k, float(params.ratio), float(alpha), quad, bisection)


def solve_design(type1: Type1Fn, power: PowerFn, params: TrialParams,
                 targets: OperatingTargets, *, ratio_mode: str = "nominal",
                 n_cap: int = DEFAULT_N_CAP,
                 quad: QuadratureSpec = DEFAULT_QUADRATURE,
                 bisection: BisectionSpec = DEFAULT_BISECTION) -> SearchResult:
    """Smallest C meeting alpha, then smallest per-arm n meeting power.

    ``ratio_mode="nominal"`` evaluates both integrals at the requested ratio R
    and only rounds the control arm afterwards. ``"realized"`` evaluates them
    at ``ceil(R n) / n`` for each candidate n, re-solving C every time, and
    scans n upwards because power is then no longer monotone in n.
    """
    if ratio_mode not in RATIO_MODES:
        raise InvalidParameterError("ratio_mode", f"must be one of {RATIO_MODES}")

    if ratio_mode == "nominal":
        c = critical_value(type1, params, targets.alpha, quad, bisection)
        n = smallest_integer(lambda m: power(c, m, params, quad) >= targets.power, cap=n_cap)
        if n is None:
            raise InfeasibleDesignError(f"power {targets.power} not reached with n <= {n_cap}")
        return SearchResult(c, n, ceil_product(params.ratio, n), type1(c, params, quad),
                            power(c, n, params, quad))

    for n in range(1, n_cap + 1):
        control = ceil_product(params.ratio, n)
        realized = params.with_ratio(control / n)
        c = critical_value(type1, realized, targets.alpha, quad, bisection)
        p = power(c, n, realized, quad)
        if p >= targets.power:
            return SearchResult(c, n, control, type1(c, realized, quad), p)
    raise InfeasibleDesignError(f"power {targets.power} not reached with n <= {n_cap}")
