"""Exact simulation of Z-valued step cocycles over the rotation x -> x + alpha.

Points of the circle are kept in the form u + v*alpha (mod 1) with u rational
and v an integer, so every comparison against a breakpoint reduces to a sign
determination in Q + Q*alpha.

Long orbits use a fixed-point fast path: positions are 64-bit integers that
wrap modulo 2**64, each step carries a certified error bound, and any step
that lands within that bound of a breakpoint is recomputed exactly.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .contfrac import ContinuedFraction
from .errors import ValidationError

_BITS = 64
_MOD = 1 << _BITS


@dataclass(frozen=True, order=False)
class CirclePoint:
    """The point (u + v*alpha) mod 1; canonical when 0 <= u + v*alpha < 1."""

    u: Fraction
    v: int = 0

    @classmethod
    def canonical(cls, u, v, cf: ContinuedFraction) -> "CirclePoint":
        u = Fraction(u)
        v = int(v)
        return cls(u - cf.floor(u, v), v)

    @classmethod
    def zero(cls) -> "CirclePoint":
        return cls(Fraction(0), 0)

    def is_canonical(self, cf: ContinuedFraction) -> bool:
        return cf.floor(self.u, self.v) == 0

    def approx(self, cf: ContinuedFraction) -> float:
        return float(self.u) + self.v * float(cf)

    def to_text(self) -> str:
        return f"{self.u},{self.v}"

    @classmethod
    def from_text(cls, text: str) -> "CirclePoint":
        u, v = text.split(",")
        return cls(Fraction(u.strip()), int(v))


def compare(x: CirclePoint, y: CirclePoint, cf: ContinuedFraction) -> int:
    """Sign of (x - y) as real numbers (both assumed canonical)."""
    return cf.sign(x.u - y.u, x.v - y.v)


def rotate(x: CirclePoint, n: int, cf: ContinuedFraction) -> CirclePoint:
    """x + n*alpha mod 1, canonical."""
    if n == 0:
        return x
    return CirclePoint.canonical(x.u, x.v + n, cf)


@dataclass
class StepCocycle:
    """Integer-valued step function on [0, 1) with left-closed pieces.

    ``breakpoints[i]`` is the left endpoint of the piece carrying
    ``values[i]``; the first breakpoint is 0.
    """

    breakpoints: list[CirclePoint]
    values: list[int]

    def __post_init__(self):
        if len(self.breakpoints) != len(self.values) or not self.values:
            raise ValidationError("need one value per breakpoint")
        if self.breakpoints[0] != CirclePoint.zero():
            raise ValidationError("first breakpoint must be the point 0")
        self.values = [int(a) for a in self.values]

    @classmethod
    def staircase(cls) -> "StepCocycle":
        """chi_[0,1/2) - chi_[1/2,1)."""
        return cls([CirclePoint.zero(), CirclePoint(Fraction(1, 2), 0)], [1, -1])

    @classmethod
    def constant(cls, c: int) -> "StepCocycle":
        return cls([CirclePoint.zero()], [c])

    @property
    def variation(self) -> int:
        vals = self.values
        return sum(abs(vals[(i + 1) % len(vals)] - vals[i]) for i in range(len(vals)))

    def validate(self, cf: ContinuedFraction) -> None:
        for a, b in zip(self.breakpoints, self.breakpoints[1:]):
            if compare(a, b, cf) >= 0:
                raise ValidationError("breakpoints must be strictly increasing")
        last = self.breakpoints[-1]
        if cf.sign(last.u - 1, last.v) >= 0:
            raise ValidationError("breakpoints must lie in [0, 1)")

    def mean(self) -> tuple[Fraction, Fraction]:
        """Exact integral as (U, V) meaning U + V*alpha."""
        U = Fraction(0)
        V = Fraction(0)
        ends = self.breakpoints[1:] + [CirclePoint(Fraction(1), 0)]
        for b, e, val in zip(self.breakpoints, ends, self.values):
            U += val * (e.u - b.u)
            V += val * (e.v - b.v)
        return U, V

    def has_zero_mean(self) -> bool:
        U, V = self.mean()
        # alpha irrational: U + V*alpha = 0 iff U = V = 0
        return U == 0 and V == 0

    def to_json(self) -> str:
        return json.dumps(
            {"breakpoints": [b.to_text() for b in self.breakpoints], "values": self.values}
        )

    @classmethod
    def from_json(cls, text: str | dict) -> "StepCocycle":
        d = json.loads(text) if isinstance(text, str) else text
        unknown = set(d) - {"breakpoints", "values"}
        if unknown:
            raise ValidationError(f"unknown cocycle keys {sorted(unknown)}")
        return cls([CirclePoint.from_text(s) for s in d["breakpoints"]], d["values"])


@dataclass
class SumTrace:
    """Ergodic sums S_0 = 0, S_n = f(x) + ... + f(x + (n-1)alpha)."""

    x: CirclePoint
    horizon: int
    sums: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.sums = np.asarray(self.sums, dtype=np.int64)
        if len(self.sums) != self.horizon + 1:
            raise ValueError("sums must have horizon + 1 entries")

    @classmethod
    def from_sums(cls, sums: Sequence[int], x: CirclePoint | None = None) -> "SumTrace":
        return cls(x or CirclePoint.zero(), len(sums) - 1, np.asarray(sums, dtype=np.int64))

    def _check(self, N: int) -> None:
        if N < 1 or N > self.horizon:
            raise ValueError(f"N={N} outside 1..{self.horizon}")

    def to_csv(self, path) -> None:
        from .reporting import write_csv

        write_csv(path, ["n", "S_n"], zip(range(self.horizon + 1), self.sums.tolist()))


def evaluate(f: StepCocycle, x: CirclePoint, cf: ContinuedFraction) -> int:
    """Value of f at the canonical point x."""
    lo, hi = 0, len(f.breakpoints) - 1
    # last breakpoint b with b <= x
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if compare(x, f.breakpoints[mid], cf) >= 0:
            lo = mid
        else:
            hi = mid - 1
    return f.values[lo]


def interval_index(f: StepCocycle, x: CirclePoint, cf: ContinuedFraction) -> int:
    lo, hi = 0, len(f.breakpoints) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if compare(x, f.breakpoints[mid], cf) >= 0:
            lo = mid
        else:
            hi = mid - 1
    return lo


class _FixedOrbit:
    """Certified 64-bit fixed-point orbit of a point under rotation."""

    def __init__(self, f: StepCocycle, cf: ContinuedFraction):
        self.f = f
        self.cf = cf
        self.A = cf.fixed_point(_BITS) % _MOD
        bps = []
        for b in f.breakpoints:
            B = (math.floor(b.u * _MOD) + b.v * self.A) % _MOD
            bps.append((B, 2 * abs(b.v) + 2))
        self.bp = np.array([b for b, _ in bps], dtype=np.uint64)
        self.bp_err = np.array([e for _, e in bps], dtype=np.uint64)
        order = np.argsort(self.bp, kind="stable")
        if not np.array_equal(order, np.arange(len(bps))):
            raise ValidationError("breakpoints out of order at 64-bit resolution")
        gaps = np.diff(np.append(self.bp.astype(object), _MOD))
        if any(int(g) <= 4 * int(e) + (1 << 20) for g, e in zip(gaps, self.bp_err)):
            raise ValidationError("breakpoints too close for the fixed-point engine")

    def indices(self, x: CirclePoint, start: int, count: int) -> np.ndarray:
        """Piece index of x + n*alpha for n in [start, start + count)."""
        X = (math.floor(x.u * _MOD) + x.v * self.A) % _MOD
        ex = 2 * abs(x.v) + 2
        n = np.arange(start, start + count, dtype=np.uint64)
        pos = np.uint64(X) + n * np.uint64(self.A)
        idx = np.searchsorted(self.bp, pos, side="right") - 1
        tol = np.uint64(ex + 2) + np.uint64(2) * n
        ambiguous = np.zeros(count, dtype=bool)
        for B, e in zip(self.bp, self.bp_err):
            d = pos - B
            dist = np.minimum(d, np.uint64(0) - d)
            ambiguous |= dist <= tol + e
        for j in np.flatnonzero(ambiguous):
            idx[j] = interval_index(self.f, rotate(x, start + int(j), self.cf), self.cf)
        return idx


def orbit_indices(f: StepCocycle, x: CirclePoint, N: int, cf: ContinuedFraction,
                  chunk: int = 1 << 20) -> np.ndarray:
    """Piece index of x + i*alpha for i = 0..N-1."""
    if N >= 1 << 40:
        raise ValueError("horizon too large for the fixed-point engine")
    eng = _FixedOrbit(f, cf)
    parts = [eng.indices(x, s, min(chunk, N - s)) for s in range(0, N, chunk)]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def ergodic_sums(f: StepCocycle, x: CirclePoint, N: int, cf: ContinuedFraction) -> SumTrace:
    """S_0..S_N along the orbit of x, exact."""
    if N < 1:
        raise ValueError("N must be positive")
    f.validate(cf)
    vals = np.asarray(f.values, dtype=np.int64)
    steps = vals[orbit_indices(f, x, N, cf)]
    return SumTrace(x, N, np.concatenate([[0], np.cumsum(steps)]))


def ergodic_sums_stepwise(f: StepCocycle, x: CirclePoint, N: int, cf: ContinuedFraction) -> SumTrace:
    """Same as :func:`ergodic_sums` but one exact comparison per step (slow)."""
    sums = [0]
    y = x
    for _ in range(N):
        sums.append(sums[-1] + evaluate(f, y, cf))
        y = rotate(y, 1, cf)
    return SumTrace(x, N, sums)


def range_count(trace: SumTrace, N: int) -> int:
    """Number of distinct values among S_1..S_N."""
    trace._check(N)
    return int(np.unique(trace.sums[1 : N + 1]).size)


def zero_hits(trace: SumTrace, N: int) -> int:
    """#{1 <= n <= N : S_n = 0}."""
    trace._check(N)
    return int(np.count_nonzero(trace.sums[1 : N + 1] == 0))


# -- sums at convergent denominators -----------------------------------------


class _PointTest:
    """Decides frac(x + n*alpha) < c quickly, falling back to exact signs."""

    def __init__(self, cf: ContinuedFraction, bits: int):
        self.cf = cf
        self.bits = bits
        self.A = cf.fixed_point(bits)

    def below(self, x: CirclePoint, n: int, c: CirclePoint) -> bool:
        mod = 1 << self.bits
        pos = ((x.u.numerator << self.bits) // x.u.denominator + (x.v + n) * self.A) % mod
        C = (c.u.numerator << self.bits) // c.u.denominator + c.v * self.A
        err = 2 * abs(x.v + n) + 2
        err_c = 2 * abs(c.v) + 2
        if err < pos < mod - err:
            if pos + err < C - err_c:
                return True
            if pos - err > C + err_c:
                return False
        y = rotate(x, n, self.cf)
        return compare(y, c, self.cf) < 0


class _Grid:
    """Per-level data for count_below: q, p^-1 mod q, the side of the shift, and a tight alpha bracket."""

    def __init__(self, cf: ContinuedFraction, k: int):
        self.q, self.p = cf.q(k), cf.p(k)
        q = self.q
        self.delta_pos = cf.sign(Fraction(-self.p, q), 1) > 0
        d = k + 2
        while cf.q(d) * cf.q(d - 1) < (q * q) << 80:
            d += 1
        self.lo, self.hi = cf.interval(d)
        self.p_inv = pow(self.p, -1, q) if q > 1 else 0
        self._c: dict = {}

    def scaled(self, u: Fraction, v) -> tuple[tuple[int, int], tuple[int, int]]:
        """Bracket of q*(u + v*alpha) as unreduced (numerator, denominator) pairs."""
        q = self.q
        if v == 0:
            t = (u.numerator * q, u.denominator)
            return t, t
        a, b = u * q + v * q * self.lo, u * q + v * q * self.hi
        a, b = (a, b) if a <= b else (b, a)
        return (a.numerator, a.denominator), (b.numerator, b.denominator)

    def c_bracket(self, c: CirclePoint):
        if c not in self._c:
            self._c[c] = self.scaled(c.u, c.v)
        return self._c[c]


def _diff_floor(a: tuple[int, int], b: tuple[int, int], shift: int) -> tuple[int, bool]:
    """floor(a - b - shift) for unreduced fractions, and whether a - b is an integer."""
    num = a[0] * b[1] - b[0] * a[1]
    den = a[1] * b[1]
    return num // den - shift, num % den == 0


def count_below(x: CirclePoint, c: CirclePoint, k: int, cf: ContinuedFraction,
                _tester: _PointTest | None = None, _grid: _Grid | None = None) -> int:
    """#{0 <= n < q_k : frac(x + n*alpha) < c}, for canonical x and c.

    For n < q_k the points x + n*alpha sit within 1/q_{k+1} of the grid
    x + j/q_k, all displaced to the same side, so only O(1) grid cells near
    0 and c need an exact test.
    """
    if c == CirclePoint.zero():
        return 0
    g = _grid or _Grid(cf, k)
    q = g.q
    tester = _tester or _PointTest(cf, q.bit_length() + 96)
    if q <= 2:
        return sum(tester.below(x, n, c) for n in range(q))
    if x.v == 0:
        fl = (x.u.numerator * q) // x.u.denominator
    else:
        fl = cf.floor(x.u * q, x.v * q)
    (sl_n, sl_d), (sh_n, sh_d) = g.scaled(x.u, x.v)
    f0_lo, f0_hi = (sl_n - fl * sl_d, sl_d), (sh_n - fl * sh_d, sh_d)
    C_lo, C_hi = g.c_bracket(c)
    e_max = 1 if g.delta_pos else 0
    e_min = 0 if g.delta_pos else -1
    i_max, exact = _diff_floor(C_lo, f0_hi, e_max)
    if exact:
        i_max -= 1
    certain_hi = min(i_max, q - 2)
    top, exact = _diff_floor(C_hi, f0_lo, e_min)
    cand_hi = min(q - 1, top if exact else top + 1)
    candidates = {0, q - 1}
    candidates.update(range(max(1, certain_hi + 1), cand_hi + 1))
    n_certain = max(0, certain_hi)  # grid indices 1..certain_hi
    n_certain -= sum(1 for i in candidates if 1 <= i <= certain_hi)
    total = n_certain
    for i in candidates:
        n = ((i - fl) * g.p_inv) % q
        total += tester.below(x, n, c)
    return total


def convergent_sum(f: StepCocycle, x: CirclePoint, k: int, cf: ContinuedFraction,
                   _tester: _PointTest | None = None, _grid: _Grid | None = None) -> int:
    """S_{q_k} f(x), exact, in O(#breakpoints) exact operations."""
    grid = _grid or _Grid(cf, k)
    tester = _tester or _PointTest(cf, grid.q.bit_length() + 96)
    counts = [count_below(x, b, k, cf, tester, grid) for b in f.breakpoints] + [grid.q]
    return sum(val * (counts[i + 1] - counts[i]) for i, val in enumerate(f.values))


@dataclass
class DenjoyKoksmaRecord:
    level: int
    q: int
    max_abs_sum: int
    bound: int
    samples: int

    @property
    def holds(self) -> bool:
        return self.max_abs_sum <= self.bound


def sample_points(cf: ContinuedFraction, f: StepCocycle, count: int, seed: int,
                  orbit: int = 8, backward: int = 0) -> list[CirclePoint]:
    """Random dyadic points plus orbit segments of 0 and of each breakpoint.

    The backward orbit b - j*alpha (j < n) is where S_n jumps, so extremal
    sums sit on it.
    """
    rng = random.Random(seed)
    pts = [CirclePoint(Fraction(rng.getrandbits(53), 1 << 53), 0) for _ in range(count)]
    for b in f.breakpoints:
        pts.extend(rotate(b, j, cf) for j in range(-backward, orbit))
    return list(dict.fromkeys(pts))


def denjoy_koksma_check(f: StepCocycle, cf: ContinuedFraction, k: int, sample_count: int,
                        seed: int = 0) -> DenjoyKoksmaRecord:
    """Largest observed |S_{q_k} f(x)| against the variation of f."""
    if k < 1:
        raise ValueError("level must be >= 1")
    f.validate(cf)
    if not f.has_zero_mean():
        raise ValidationError("Denjoy-Koksma check needs a zero-mean cocycle")
    q = cf.q(k)
    tester = _PointTest(cf, q.bit_length() + 96)
    grid = _Grid(cf, k)
    worst = 0
    pts = sample_points(cf, f, sample_count, seed)
    for x in pts:
        worst = max(worst, abs(convergent_sum(f, x, k, cf, tester, grid)))
    return DenjoyKoksmaRecord(k, q, worst, f.variation, len(pts))


@dataclass
class LyapunovFit:
    slope: float
    horizons: list[int]
    max_sums: list[int]


def growth_slope(horizons: Sequence[int], maxima: Sequence[int]) -> float:
    """Least-squares slope of log max(m, 1) against log n; 0 if degenerate."""
    y = np.log(np.maximum(np.asarray(maxima, dtype=float), 1.0))
    if len(set(np.round(y, 12))) <= 1:
        return 0.0
    xlog = np.log(np.asarray(horizons, dtype=float))
    return float(np.polyfit(xlog, y, 1)[0])


def lyapunov_estimate(f: StepCocycle, cf: ContinuedFraction, horizons: Sequence[int],
                      sample_count: int, seed: int = 0) -> LyapunovFit:
    """Growth exponent of the essential sup of |S_n| over the given horizons."""
    horizons = [int(h) for h in horizons]
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if any(b <= a for a, b in zip(horizons, horizons[1:])) or horizons[0] < 1:
        raise ValueError("horizons must be positive and increasing")
    f.validate(cf)
    N = horizons[-1]
    idx = np.asarray(horizons)
    best = np.zeros(len(horizons), dtype=np.int64)
    for x in sample_points(cf, f, sample_count, seed, orbit=1, backward=sample_count):
        sums = ergodic_sums(f, x, N, cf).sums
        best = np.maximum(best, np.abs(sums[idx]))
    maxima = best.tolist()
    return LyapunovFit(growth_slope(horizons, maxima), horizons, maxima)
