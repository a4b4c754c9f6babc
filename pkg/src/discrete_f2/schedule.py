"""Derivative-growth schedules alpha_r and beta_n for the C^1 construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .words import WordPair, enumerate_pairs

DEFAULT_MARGIN = 0.01
BISECTION_RTOL = 1e-12
BISECTION_MAX_STEPS = 200


class ScheduleError(ArithmeticError):
    pass


def b2_values(r: int, alpha_value: float) -> list[float]:
    """``(1+a)^s * ((1+a)^(r-s) - 1)`` for ``s = 0, ..., r-1``."""
    q = 1.0 + alpha_value
    return [q**s * (q ** (r - s) - 1.0) for s in range(r)]


def check_b2(r: int, alpha_value: float, C: float) -> bool:
    if r < 1:
        raise ValueError("r must be a positive integer")
    return all(v > C for v in b2_values(r, alpha_value))


@lru_cache(maxsize=4096)
def alpha(r: int, C: float, margin: float = DEFAULT_MARGIN) -> float:
    """Positive root of ``a * (1+a)^(r-1) = C * (1+margin)``.

    The left side is the minimum over ``s`` of the (b2) expression, so the root
    satisfies (b2) with headroom ``C * margin``.
    """
    if r < 1:
        raise ValueError("r must be a positive integer")
    if not C > 0:
        raise ValueError("C must be positive")
    if not 0 < margin <= 1:
        raise ValueError("margin must lie in (0, 1]")
    target = C * (1.0 + margin)

    def h(a: float) -> float:
        return a * (1.0 + a) ** (r - 1) - target

    lo, hi = 0.0, target
    for _ in range(BISECTION_MAX_STEPS):
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= BISECTION_RTOL * hi:
            break
    else:
        raise ScheduleError(f"bisection for alpha_{r} did not converge")
    # hi side satisfies h >= 0, hence (b2) with margin
    value = hi
    if not check_b2(r, value, C):
        raise ScheduleError(f"alpha_{r} = {value!r} fails (b2) for C = {C}")
    return value


@dataclass(frozen=True)
class AlphaSchedule:
    C: float
    margin: float = DEFAULT_MARGIN

    def __call__(self, r: int) -> float:
        return alpha(r, self.C, self.margin)

    def values(self, r_max: int) -> list[float]:
        return [self(r) for r in range(1, r_max + 1)]


@dataclass
class BetaSchedule:
    """``beta_n = alpha_{|U_n|}`` along the pair enumeration."""

    alphas: AlphaSchedule
    pairs: list[WordPair] = field(default_factory=list)

    @classmethod
    def build(cls, count: int, C: float, margin: float = DEFAULT_MARGIN) -> "BetaSchedule":
        return cls(AlphaSchedule(C, margin), enumerate_pairs(count))

    def __call__(self, n: int) -> float:
        return beta(n, self)

    def __len__(self) -> int:
        return len(self.pairs)


def beta(n: int, schedule: BetaSchedule) -> float:
    if not 1 <= n <= len(schedule.pairs):
        raise IndexError(f"pair {n} is not materialized (have {len(schedule.pairs)})")
    return schedule.alphas(len(schedule.pairs[n - 1].U))
