"""Choosing r_n so that the staircase zeta series stays bounded, and certifying it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..errors import ValidationError
from ..recurrence import OmegaWeight, omega_eval
from .levels import LevelTower
from .words import StaircaseParams


@dataclass(frozen=True)
class Summable:
    """b_n either as b0 * ratio**n or an explicit list."""

    b0: float = 1.0
    ratio: float = 0.5
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.values is None and not (0 < self.ratio < 1 and self.b0 > 0):
            raise ValidationError("geometric b_n needs b0 > 0 and 0 < ratio < 1")
        if self.values is not None and any(v <= 0 for v in self.values):
            raise ValidationError("b_n must be positive")

    def __call__(self, n: int) -> float:
        if self.values is not None:
            return self.values[n - 1]
        return self.b0 * self.ratio**n

    def total(self, depth: int) -> float:
        return math.fsum(self(n) for n in range(1, depth + 1))

    @classmethod
    def parse(cls, spec) -> "Summable":
        if isinstance(spec, Summable):
            return spec
        if isinstance(spec, (list, tuple)):
            return cls(values=tuple(float(v) for v in spec))
        if isinstance(spec, dict):
            unknown = set(spec) - {"b0", "ratio"}
            if unknown:
                raise ValidationError(f"unknown b_n keys {sorted(unknown)}")
            return cls(b0=float(spec.get("b0", 1.0)), ratio=float(spec.get("ratio", 0.5)))
        raise ValidationError("b_n must be a list or {b0, ratio}")


def _tau_prime(s_bound: int) -> int:
    # q_{2n+2} = (2rs+1) q_{2n} + s q_{2n-1} < (2rs+1+s) q_{2n} <= (3M+1) r q_{2n}
    return 3 * s_bound + 1


def hit_ratio(params: StaircaseParams, n: int, tower: LevelTower | None = None) -> Fraction:
    """2 max_hits(n) / q_{2n-2}; doubled because a window straddles two level words."""
    tower = tower or LevelTower(params)
    return Fraction(2 * tower.level(n).max_hits(), params.alpha().q(2 * n - 2))


def scale_bound(params_prefix: StaircaseParams, r: int, s: int, eps: float, s_bound: int,
                tau_floor: Fraction = Fraction(0)) -> tuple[float, Fraction]:
    """Left side of the forging inequality at level n = len(prefix) + 1, in log form.

    tau is the largest exact hit ratio over levels 1..n (the candidate r_n
    included), so one constant serves every level as in the hit-count bound.
    Returns (log value, tau).
    """
    n = params_prefix.depth + 1
    trial = StaircaseParams(params_prefix.pairs + ((r, s),))
    q_prev = trial.alpha().q(2 * n - 2)
    tau = max(tau_floor, hit_ratio(trial, n))
    val = (math.log(tau) + (1 - eps) * math.log(q_prev) - eps * math.log(2 * r)
           + (1 - eps) * math.log(_tau_prime(s_bound) * r + 1))
    return val, tau


def forge_alpha(eps: float, b, s_bound: int = 1, depth: int = 6,
                s_choice: Sequence[int] | None = None) -> StaircaseParams:
    """Minimal r_n (doubling, then bisection) satisfying the per-scale inequality."""
    if eps <= 0.5:
        raise ValidationError("forging needs eps > 1/2")
    if s_bound < 1:
        raise ValidationError("s_bound must be >= 1")
    b = Summable.parse(b)
    pairs: list[tuple[int, int]] = []
    tau_floor = Fraction(0)
    for n in range(1, depth + 1):
        s = 1 if s_choice is None else int(s_choice[n - 1])
        if not 1 <= s <= s_bound:
            raise ValidationError("s_n must lie in [1, s_bound]")
        prefix = StaircaseParams(tuple(pairs))
        target = math.log(b(n))

        def ok(r):
            return scale_bound(prefix, r, s, eps, s_bound, tau_floor)[0] < target

        hi = 1
        while not ok(hi):
            hi *= 2
            if hi > 1 << 400:
                raise ValidationError("no admissible r_n found")
        lo = hi // 2  # not admissible (or zero)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        pairs.append((hi, s))
        tau_floor = max(tau_floor, hit_ratio(StaircaseParams(tuple(pairs)), n))
    return StaircaseParams(tuple(pairs))


def _omega_run_sum(w: OmegaWeight, q: int, L: int, exact_terms: int = 4096, growth: float = 1e-3) -> float:
    """Upper bound on sum_{l=1}^{L} omega(l*q + 1); exact for small l."""
    head = min(L, exact_terms)
    total = math.fsum(omega_eval(w, l * q + 1) for l in range(1, head + 1))
    start = head + 1
    parts = []
    while start <= L:
        stop = min(L, max(start, int(start * (1 + growth))))
        # omega nonincreasing: the block is at most its size times its first term
        parts.append((stop - start + 1) * omega_eval(w, start * q + 1))
        start = stop + 1
    return total + math.fsum(parts)


@dataclass
class Certificate:
    value: float
    levels: list[dict] = field(default_factory=list)
    bound_sum: float | None = None

    @property
    def margin(self) -> float | None:
        return None if self.bound_sum is None else self.value - self.bound_sum


def zeta_certificate(params: StaircaseParams, eps: float, w: OmegaWeight, N: int,
                     b=None, tower: LevelTower | None = None) -> Certificate:
    """Upper bound for sum_{i<=N} omega(i)[S_i(x) = 0] valid for every x.

    Times (q_{2n}, q_{2n+2}] are cut into windows of length q_{2n}; a window
    meets at most two level-n words, so it holds at most
    min(q_{2n}, 2 max_hits(n)) zero sums, each weighted at most
    omega(l q_{2n} + 1).
    """
    if w.power < eps:
        raise ValidationError("weight must decay at least like n^-eps")
    cf = params.alpha()
    if N > cf.q(2 * params.depth):
        raise ValidationError("N exceeds the forged depth")
    tower = tower or LevelTower(params)
    total = [omega_eval(w, 1)]
    levels = []
    n = 0
    while cf.q(2 * n) < N:
        q = cf.q(2 * n)
        q_next = cf.q(2 * n + 2)
        windows = min(-(-q_next // q), -(-N // q)) - 1
        hits = 1 if n == 0 else min(q, 2 * tower.level(n).max_hits())
        part = hits * _omega_run_sum(w, q, windows)
        total.append(part)
        levels.append({"level": n, "q": q, "windows": windows, "hits": hits, "bound": part})
        n += 1
    value = math.fsum(total) * (1 + 1e-12)
    bound_sum = None
    if b is not None:
        bound_sum = omega_eval(w, 1) + Summable.parse(b).total(params.depth)
    return Certificate(value, levels, bound_sum)
