"""Arbitrary-precision continued fractions and certified sign determination.

Rotation numbers are written alpha = [a_1, a_2, ...] = 1/(a_1 + 1/(a_2 + ...))
with every a_i >= 1. Convergents use p_0 = 0, q_0 = 1, p_{-1} = 1, q_{-1} = 0,
so that p_1/q_1 = 1/a_1 and q_1 = a_1.

Numbers of the form u + v*alpha (u, v rational) are compared exactly by
bracketing alpha between consecutive convergents until the sign is constant
on the bracket; alpha is irrational, so this terminates unless u = v = 0.
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import DepthExhausted, PrecisionError, ValidationError

#: default cap on the depth used by sign refinement
DEFAULT_MAX_DEPTH = 10_000


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


def _gauss_kuzmin_digit(rng: random.Random) -> int:
    # inverse CDF: P(a >= k) = log2(1 + 1/k)
    while True:
        u = rng.random()
        if u > 0.0:
            return max(1, math.floor(1.0 / math.expm1(u * math.log(2.0))))


class ContinuedFraction:
    """A continued fraction whose digits are stored and extended on demand.

    Use one of the constructors :meth:`explicit`, :meth:`from_rule`,
    :meth:`gauss_kuzmin` or :meth:`parse`. An explicit digit list is treated as
    the known prefix of an (unknown) infinite expansion: operations that need
    more digits raise :class:`DepthExhausted`.
    """

    def __init__(
        self,
        digits: Iterable[int] = (),
        *,
        rule: Callable[[int], int] | None = None,
        label: str | None = None,
        max_depth: int = DEFAULT_MAX_DEPTH,
    ):
        self._digits: list[int] = []
        self._rule = rule
        self.label = label
        self.max_depth = max_depth
        # convergent tables indexed from 0
        self._p = [0]
        self._q = [1]
        self._sums = [0]
        for a in digits:
            self._append(int(a))

    # -- construction ----------------------------------------------------

    @classmethod
    def explicit(cls, digits: Sequence[int], **kw) -> "ContinuedFraction":
        if "label" not in kw:
            kw["label"] = "[" + ",".join(str(int(a)) for a in digits) + "]"
        return cls(digits, **kw)

    @classmethod
    def from_rule(cls, rule: Callable[[int], int], label: str, **kw) -> "ContinuedFraction":
        """Digits a_i = rule(i) for i = 1, 2, ..."""
        return cls(rule=rule, label=label, **kw)

    @classmethod
    def eventually_constant(cls, prefix: Sequence[int], tail: int | None = None) -> "ContinuedFraction":
        """``prefix`` followed by ``tail`` repeated forever (default: last digit)."""
        prefix = [int(a) for a in prefix]
        if not prefix:
            raise ValidationError("empty digit list")
        t = prefix[-1] if tail is None else int(tail)
        n = len(prefix)
        label = "[" + ",".join(map(str, prefix)) + ",...]"
        return cls.from_rule(lambda i: prefix[i - 1] if i <= n else t, label)

    @classmethod
    def gauss_kuzmin(cls, seed: int, depth: int = 1) -> "ContinuedFraction":
        """Digits drawn i.i.d. from the Gauss-Kuzmin law; extended lazily.

        Extension continues the same random stream, so the digit sequence
        depends only on ``seed`` regardless of how it was extended.
        """
        rng = random.Random(seed)
        drawn: list[int] = []

        def rule(i: int) -> int:
            while len(drawn) < i:
                drawn.append(_gauss_kuzmin_digit(rng))
            return drawn[i - 1]

        cf = cls.from_rule(rule, label=f"gauss:{seed}")
        cf.ensure(depth)
        return cf

    @classmethod
    def parse(cls, text: str) -> "ContinuedFraction":
        """Parse the ``--alpha`` syntax.

        ``[2,1,4]`` is an explicit finite prefix, ``[2,2,...]`` repeats the last
        digit forever, ``gauss:<seed>:<depth>`` draws Gauss-Kuzmin digits.
        """
        text = text.strip()
        m = re.fullmatch(r"gauss:(-?\d+)(?::(\d+))?", text)
        if m:
            return cls.gauss_kuzmin(int(m.group(1)), int(m.group(2) or 1))
        m = re.fullmatch(r"\[(.*)\]", text)
        if not m:
            raise ValidationError(f"cannot parse continued fraction {text!r}")
        parts = [s.strip().strip('"') for s in m.group(1).split(",") if s.strip()]
        periodic = bool(parts) and parts[-1] in ("...", "…")
        if periodic:
            parts = parts[:-1]
        try:
            digits = [int(s) for s in parts]
        except ValueError as exc:
            raise ValidationError(f"bad digit in {text!r}") from exc
        if not digits or any(a < 1 for a in digits):
            raise ValidationError(f"digits must be >= 1 in {text!r}")
        return cls.eventually_constant(digits) if periodic else cls.explicit(digits)

    def to_json(self, depth: int | None = None) -> str:
        """Digits as a JSON array of decimal strings."""
        n = len(self._digits) if depth is None else depth
        return json.dumps([str(self.digit(i)) for i in range(1, n + 1)])

    @classmethod
    def from_json(cls, text: str) -> "ContinuedFraction":
        return cls.explicit([int(s) for s in json.loads(text)])

    # -- digits ----------------------------------------------------------

    def _append(self, a: int) -> None:
        if a < 1:
            raise ValidationError(f"partial quotient must be >= 1, got {a}")
        self._digits.append(a)
        n = len(self._digits)
        p_prev2 = 1 if n == 1 else self._p[n - 2]
        q_prev2 = 0 if n == 1 else self._q[n - 2]
        self._p.append(a * self._p[n - 1] + p_prev2)
        self._q.append(a * self._q[n - 1] + q_prev2)
        self._sums.append(self._sums[-1] + a)

    @property
    def extendable(self) -> bool:
        return self._rule is not None

    @property
    def known_depth(self) -> int:
        return len(self._digits)

    def can_reach(self, n: int) -> bool:
        return n <= len(self._digits) or self._rule is not None

    def ensure(self, n: int) -> None:
        """Make digits a_1..a_n available or raise :class:`DepthExhausted`."""
        if n <= len(self._digits):
            return
        if self._rule is None:
            raise DepthExhausted(
                f"need {n} digits of {self.label or 'alpha'}, only {len(self._digits)} known"
            )
        for i in range(len(self._digits) + 1, n + 1):
            self._append(int(self._rule(i)))

    def digit(self, i: int) -> int:
        if i < 1:
            raise IndexError("digits are indexed from 1")
        self.ensure(i)
        return self._digits[i - 1]

    def digits(self, n: int) -> list[int]:
        self.ensure(n)
        return self._digits[:n]

    def convergent(self, n: int) -> Convergent:
        if n < 0:
            raise IndexError("convergent index must be >= 0")
        self.ensure(n)
        return Convergent(n, self._p[n], self._q[n])

    def q(self, n: int) -> int:
        if n == -1:
            return 0
        self.ensure(n)
        return self._q[n]

    def p(self, n: int) -> int:
        if n == -1:
            return 1
        self.ensure(n)
        return self._p[n]

    def digit_sum(self, n: int) -> int:
        self.ensure(n)
        return self._sums[n]

    def tail(self, k: int) -> "ContinuedFraction":
        """The continued fraction [a_{k+1}, a_{k+2}, ...]."""
        if k == 0:
            return self
        label = f"{self.label or 'alpha'}>>{k}"
        if self._rule is None:
            self.ensure(k)
            return ContinuedFraction(self._digits[k:], label=label, max_depth=self.max_depth)
        return ContinuedFraction.from_rule(lambda i: self.digit(i + k), label, max_depth=self.max_depth)

    # -- certified arithmetic --------------------------------------------

    def interval(self, depth: int) -> tuple[Fraction, Fraction]:
        """Open rational bracket (lo, hi) around alpha from convergents depth-1, depth."""
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.ensure(depth)
        a = Fraction(self._p[depth - 1], self._q[depth - 1])
        b = Fraction(self._p[depth], self._q[depth])
        return (a, b) if a < b else (b, a)

    def _usable_depth(self, wanted: int) -> int:
        if wanted <= len(self._digits) or self._rule is not None:
            return wanted
        return len(self._digits)

    def sign(self, u, v=0) -> int:
        """Exact sign of u + v*alpha for rational u, v."""
        u = Fraction(u)
        v = Fraction(v)
        if v == 0:
            return (u > 0) - (u < 0)
        depth = 8
        while True:
            d = self._usable_depth(depth)
            if d < 1:
                raise DepthExhausted("no digits available")
            self.ensure(d)
            p0, q0, p1, q1 = self._p[d - 1], self._q[d - 1], self._p[d], self._q[d]
            # sign(u + v*p/q) == sign(u*q + v*p) since q > 0
            s0 = u * q0 + v * p0
            s1 = u * q1 + v * p1
            if s0 > 0 and s1 > 0:
                return 1
            if s0 < 0 and s1 < 0:
                return -1
            if d < depth:
                raise DepthExhausted(
                    f"sign of {u} + {v}*alpha unresolved with {d} known digits"
                )
            if depth >= self.max_depth:
                raise PrecisionError(f"sign unresolved at depth {depth}")
            depth = min(2 * depth, self.max_depth)

    def floor(self, u, v=0) -> int:
        """Exact floor of u + v*alpha."""
        u = Fraction(u)
        v = Fraction(v)
        if v == 0:
            return math.floor(u)
        d = max(self._usable_depth(40), 1)
        lo, hi = self.interval(d)
        m = math.floor(u + v * (lo + hi) / 2)
        while self.sign(u - m, v) < 0:
            m -= 1
        while self.sign(u - m - 1, v) >= 0:
            m += 1
        return m

    def fixed_point(self, bits: int) -> int:
        """An integer A with 0 <= alpha * 2**bits - A < 2."""
        target = 1 << (bits + 2)
        d = 1
        while True:
            if not self.can_reach(d):
                raise DepthExhausted(f"not enough digits for a {bits}-bit approximation")
            self.ensure(d)
            if self._q[d] * self._q[d - 1] > target:
                break
            d += 1
        lo, _ = self.interval(d)
        return (lo.numerator << bits) // lo.denominator

    def to_mpf(self, dps: int = 50):
        import mpmath

        bits = int(dps * 3.33) + 16
        with mpmath.workprec(bits + 8):
            return mpmath.mpf(self.fixed_point(bits)) / mpmath.mpf(2) ** bits

    def __float__(self) -> float:
        return self.fixed_point(60) / 2.0**60

    def __repr__(self) -> str:
        return f"ContinuedFraction({self.label or self._digits[:8]!r})"


# -- functional interface ----------------------------------------------------


def convergents(cf: ContinuedFraction, n: int) -> list[Convergent]:
    """The first n convergents p_1/q_1 ... p_n/q_n."""
    if n < 1:
        raise ValueError("n must be positive")
    cf.ensure(n)
    return [cf.convergent(i) for i in range(1, n + 1)]


def digit_sums(cf: ContinuedFraction, n: int) -> int:
    """a_1 + ... + a_n."""
    if n < 1:
        raise ValueError("n must be positive")
    return cf.digit_sum(n)


def sample_gauss_kuzmin(seed: int, depth: int) -> ContinuedFraction:
    if depth < 1:
        raise ValueError("depth must be positive")
    return ContinuedFraction.gauss_kuzmin(seed, depth)


def alpha_interval(cf: ContinuedFraction, depth: int) -> tuple[Fraction, Fraction]:
    if depth < 2:
        raise ValueError("depth must be >= 2")
    return cf.interval(depth)


def sign_of(u, v, cf: ContinuedFraction) -> int:
    """Sign (-1, 0, 1) of u + v*alpha."""
    return cf.sign(u, v)


def nested_fraction(digits: Sequence[int]) -> Fraction:
    """Direct evaluation of 1/(a_1 + 1/(a_2 + ... + 1/a_n))."""
    x = Fraction(0)
    for a in reversed(digits):
        x = 1 / (a + x)
    return x
