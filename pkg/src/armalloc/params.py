"""Scenario inputs shared by every design and simulation routine."""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, replace

from .errors import InvalidParameterError


@dataclass(frozen=True)
class TrialParams:
    """Fixed scenario of a multi-arm trial with a shared control.

    Attributes:
        k: Number of active arms.
        ratio: Allocation ratio R; the control arm gets ``ceil(R * n)``
            patients for every ``n`` per active arm.
        sigma: Common outcome standard deviation.
        delta: Clinically relevant effect.
        delta0: Largest uninteresting effect.
    """

    k: int
    ratio: float = 1.0
    sigma: float = 1.0
    delta: float = 0.5
    delta0: float = 0.125

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, numbers.Integral) or self.k < 1:
            raise InvalidParameterError("k", f"must be an integer >= 1, got {self.k!r}")
        for name in ("ratio", "sigma", "delta", "delta0"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(name, "must be finite")
        if self.ratio < 1:
            raise InvalidParameterError("ratio", f"must be >= 1, got {self.ratio!r}")
        if self.sigma <= 0:
            raise InvalidParameterError("sigma", f"must be > 0, got {self.sigma!r}")
        if not 0 <= self.delta0 < self.delta:
            raise InvalidParameterError(
                "delta0", f"need 0 <= delta0 < delta, got delta0={self.delta0!r}, delta={self.delta!r}"
            )

    def with_ratio(self, ratio: float) -> "TrialParams":
        return replace(self, ratio=float(ratio))


@dataclass(frozen=True)
class OperatingTargets:
    """Required type I error and power."""

    alpha: float = 0.05
    power: float = 0.9

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InvalidParameterError("alpha", f"must lie in (0, 1), got {self.alpha!r}")
        if not 0 < self.power < 1:
            raise InvalidParameterError("power", f"must lie in (0, 1), got {self.power!r}")
