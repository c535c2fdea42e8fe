"""Level histograms g(sigma^(n)(X), k) without materializing words."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..errors import ValidationError
from .piecewise import JumpPoly, combine
from .words import DRIFT, LETTERS, StaircaseParams, image_runs, level_lengths


@dataclass
class LevelHistogram:
    level: int
    hists: dict[str, JumpPoly]
    lengths: dict[str, int]
    drifts: dict[str, int]

    def count(self, letter: str, k: int) -> int:
        return self.hists[letter](k)

    def support(self, letter: str) -> tuple[int, int]:
        """Smallest and largest k with a jump (inclusive bounds on the support)."""
        anchors = self.hists[letter].pieces().anchors
        return anchors[0], anchors[-1] - 1

    def as_dict(self, letter: str, limit: int = 10**6) -> dict[int, int]:
        lo, hi = self.support(letter)
        if hi - lo > limit:
            raise ValidationError("support too wide to list")
        h = self.hists[letter].pieces()
        out = {}
        for k in range(lo, hi + 1):
            v = h(k)
            if v:
                out[k] = v
        return out

    def rows(self, limit: int = 10**6):
        """(k, countA, countB, countC) over the joint support."""
        spans = [self.support(x) for x in LETTERS]
        lo = min(s[0] for s in spans)
        hi = max(s[1] for s in spans)
        if hi - lo > limit:
            raise ValidationError("support too wide to list")
        pcs = [self.hists[x].pieces() for x in LETTERS]
        for k in range(lo, hi + 1):
            yield (k, *(p(k) for p in pcs))

    def max_hits(self) -> int:
        return max(self.hists[x].pieces().maximum() for x in LETTERS)


class LevelTower:
    """Histograms and running sums for levels 0, 1, 2, ... of one parameter set."""

    def __init__(self, params: StaircaseParams):
        self.params = params
        base = {x: JumpPoly.point(DRIFT[x]) for x in LETTERS}
        self._levels = [self._wrap(0, base)]
        self._running: dict[tuple[int, str], JumpPoly] = {}

    def _wrap(self, n: int, hists: dict[str, JumpPoly]) -> LevelHistogram:
        lengths = dict(zip(LETTERS, level_lengths(self.params, n)))
        drifts = {x: DRIFT[x] for x in LETTERS}  # +1 for A, -1 for B and C at every level
        return LevelHistogram(n, hists, lengths, drifts)

    def running(self, n: int, letter: str) -> JumpPoly:
        key = (n, letter)
        if key not in self._running:
            self._running[key] = self.level(n).hists[letter].running_sum()
        return self._running[key]

    def level(self, n: int) -> LevelHistogram:
        while len(self._levels) <= n:
            m = len(self._levels)
            r, s = self.params.pair(m)
            hists = {x: compose_level(self, m - 1, image_runs(x, r, s)) for x in LETTERS}
            self._levels.append(self._wrap(m, hists))
        return self._levels[n]


def compose_level(tower: LevelTower, n: int, runs: list[tuple[str, int]]) -> JumpPoly:
    """Histogram of the concatenation of level-n words given as runs."""
    groups: Counter = Counter()
    c = 0
    for y, count in runs:
        d = DRIFT[y]
        first, last = c, c + (count - 1) * d
        groups[(y, min(first, last), max(first, last), count == 1)] += 1
        c += count * d
    parts = []
    lower = tower.level(n)
    for (y, lo, hi, single), mult in groups.items():
        if single:
            parts.append((mult, lower.hists[y].shift(lo)))
        else:
            p = tower.running(n, y)
            parts.append((mult, p.shift(lo)))
            parts.append((-mult, p.shift(hi + 1)))
    return combine(parts)


def run_hits(tower: LevelTower, n: int, letter: str, c0: int, a: int, b: int) -> int:
    """Zero sums inside copies a..b-1 of a run of level-n words.

    Copy i starts at drift c0 + i*d, so its prefixes hit zero
    H(-(c0 + i*d)) times.
    """
    if b <= a:
        return 0
    p = tower.running(n, letter).pieces()
    if DRIFT[letter] > 0:
        return p(-c0 - a) - p(-c0 - b)
    return p(-c0 + b - 1) - p(-c0 + a - 1)


def level_histograms(params: StaircaseParams, n: int) -> LevelHistogram:
    if n < 0:
        raise ValidationError("level must be >= 0")
    return LevelTower(params).level(n)


def max_hits(params: StaircaseParams, n: int) -> int:
    if n < 1:
        raise ValidationError("level must be >= 1")
    return LevelTower(params).level(n).max_hits()
