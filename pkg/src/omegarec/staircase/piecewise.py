"""Integer-valued piecewise polynomials on Z, stored as binomial-basis jumps.

A function is a sum of terms c * C(k - b, i) * [k >= b] with anchor b and
integer c. In this basis shifting moves anchors, and the running sum
P(k) = sum_{t <= k} H(t) turns each term (b, i) into (b - 1, i + 1) by the
hockey-stick identity, so window sums over runs of huge length stay exact
and cheap.
"""

from __future__ import annotations

import bisect
from math import comb
from typing import Iterable


def _add_into(dst: list[int], src: Iterable[int], scale: int = 1) -> list[int]:
    src = list(src)
    if len(src) > len(dst):
        dst = dst + [0] * (len(src) - len(dst))
    for i, c in enumerate(src):
        dst[i] += scale * c
    return dst


def _trim(coeffs: list[int]) -> list[int]:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


class JumpPoly:
    """Sum over anchors b of sum_i coeffs[b][i] * C(k - b, i) for k >= b."""

    __slots__ = ("terms", "_pieces")

    def __init__(self, terms: dict[int, list[int]] | None = None):
        self.terms = {b: _trim(list(c)) for b, c in (terms or {}).items()}
        self.terms = {b: c for b, c in self.terms.items() if c}
        self._pieces = None

    @classmethod
    def from_counts(cls, hist: dict[int, int]) -> "JumpPoly":
        """Finitely supported k -> count."""
        terms: dict[int, list[int]] = {}
        for k, c in hist.items():
            if c:
                terms.setdefault(k, [0])[0] += c
                terms.setdefault(k + 1, [0])[0] -= c
        return cls(terms)

    @classmethod
    def point(cls, k: int, count: int = 1) -> "JumpPoly":
        return cls.from_counts({k: count})

    def shift(self, c: int) -> "JumpPoly":
        """k -> H(k - c)."""
        return JumpPoly({b + c: v for b, v in self.terms.items()})

    def running_sum(self) -> "JumpPoly":
        """P(k) = sum of H(t) over t <= k."""
        return JumpPoly({b - 1: [0] + v for b, v in self.terms.items()})

    def __add__(self, other: "JumpPoly") -> "JumpPoly":
        return combine([(1, self), (1, other)])

    def __sub__(self, other: "JumpPoly") -> "JumpPoly":
        return combine([(1, self), (-1, other)])

    def scaled(self, m: int) -> "JumpPoly":
        return JumpPoly({b: [m * c for c in v] for b, v in self.terms.items()})

    @property
    def degree(self) -> int:
        return max((len(v) - 1 for v in self.terms.values()), default=-1)

    def __len__(self) -> int:
        return len(self.terms)

    # -- evaluation --------------------------------------------------------

    def pieces(self) -> "Pieces":
        if self._pieces is None:
            self._pieces = Pieces.build(self)
        return self._pieces

    def __call__(self, k: int) -> int:
        return self.pieces()(k)

    def direct(self, k: int) -> int:
        """Evaluation by summing every term (slow reference)."""
        total = 0
        for b, v in self.terms.items():
            if k >= b:
                total += sum(c * comb(k - b, i) for i, c in enumerate(v))
        return total


def combine(parts: Iterable[tuple[int, JumpPoly]]) -> JumpPoly:
    terms: dict[int, list[int]] = {}
    for m, p in parts:
        for b, v in p.terms.items():
            terms[b] = _add_into(terms.get(b, []), v, m)
    return JumpPoly(terms)


def _reanchor(coeffs: list[int], d: int) -> list[int]:
    """Coefficients of the same polynomial in the basis C(k - (b + d), j)."""
    if d == 0 or not coeffs:
        return list(coeffs)
    out = [0] * len(coeffs)
    binoms = [comb(d, t) for t in range(len(coeffs))]
    for i, c in enumerate(coeffs):
        if c:
            for j in range(i + 1):
                out[j] += c * binoms[i - j]
    return out


def _eval(coeffs: list[int], t: int) -> int:
    return sum(c * comb(t, i) for i, c in enumerate(coeffs) if c)


class Pieces:
    """Materialized form: sorted anchors with the local polynomial on each piece."""

    __slots__ = ("anchors", "polys")

    def __init__(self, anchors: list[int], polys: list[list[int]]):
        self.anchors = anchors
        self.polys = polys

    @classmethod
    def build(cls, f: JumpPoly) -> "Pieces":
        anchors = sorted(f.terms)
        polys = []
        cur: list[int] = []
        prev = None
        for b in anchors:
            if prev is not None:
                cur = _reanchor(cur, b - prev)
            cur = _trim(_add_into(cur, f.terms[b]))
            polys.append(list(cur))
            prev = b
        return cls(anchors, polys)

    def __call__(self, k: int) -> int:
        i = bisect.bisect_right(self.anchors, k) - 1
        if i < 0:
            return 0
        return _eval(self.polys[i], k - self.anchors[i])

    def segments(self):
        """(start, end_exclusive or None, coeffs) for every piece."""
        n = len(self.anchors)
        for i in range(n):
            end = self.anchors[i + 1] if i + 1 < n else None
            yield self.anchors[i], end, self.polys[i]

    def maximum(self) -> int:
        """Exact max over Z of a finitely supported function (0 counts)."""
        best = 0
        for start, end, poly in self.segments():
            if not poly:
                continue
            if end is None:
                raise ValueError("function does not vanish at +infinity")
            best = max(best, _poly_max(poly, 0, end - start - 1))
        return best


def _diff(coeffs: list[int]) -> list[int]:
    """Forward difference p(t+1) - p(t) in the binomial basis."""
    return coeffs[1:]


def _monotone_breaks(coeffs: list[int], lo: int, hi: int) -> list[int]:
    """Points splitting [lo, hi] into stretches where p is monotone."""
    if hi <= lo or len(coeffs) <= 2:
        return [lo, hi]
    d = _diff(coeffs)
    inner = _monotone_breaks(d, lo, hi - 1)
    pts = {lo, hi}
    for u, v in zip(inner, inner[1:]):
        # d is monotone on [u, v]: locate its sign change by bisection
        su = _eval(d, u) >= 0
        sv = _eval(d, v) >= 0
        pts.add(u)
        pts.add(min(v + 1, hi))
        if su == sv:
            continue
        a, b = u, v
        while b - a > 1:
            m = (a + b) // 2
            if (_eval(d, m) >= 0) == su:
                a = m
            else:
                b = m
        pts.update((a, b, min(b + 1, hi)))
    return sorted(pts)


def _poly_max(coeffs: list[int], lo: int, hi: int) -> int:
    """Exact max of the polynomial sum_i c_i C(t, i) over integers t in [lo, hi]."""
    return max(_eval(coeffs, t) for t in _monotone_breaks(coeffs, lo, hi))
