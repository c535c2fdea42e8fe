"""Three-letter substitutions generating the staircase coding of the origin."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

from ..contfrac import ContinuedFraction
from ..errors import ValidationError

LETTERS = "ABC"
DRIFT = {"A": 1, "B": -1, "C": -1}
WORD_CAP = 10**7


@dataclass(frozen=True)
class StaircaseParams:
    """Pairs (r_i, s_i) defining alpha = [2r_1, s_1, 2r_2, s_2, ...].

    Beyond the stored depth the expansion continues with (1, 1), so alpha is
    a definite irrational and points can be coded to any length.
    """

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(r), int(s)) for r, s in self.pairs)
        if any(r < 1 or s < 1 for r, s in pairs):
            raise ValidationError("every r_i and s_i must be >= 1")
        object.__setattr__(self, "pairs", pairs)

    @property
    def depth(self) -> int:
        return len(self.pairs)

    def pair(self, i: int) -> tuple[int, int]:
        """(r_i, s_i), 1-based; the (1, 1) tail past the stored depth."""
        return self.pairs[i - 1] if i <= len(self.pairs) else (1, 1)

    def digit(self, i: int) -> int:
        r, s = self.pair((i + 1) // 2)
        return 2 * r if i % 2 else s

    def alpha(self) -> ContinuedFraction:
        label = "staircase" + json.dumps([list(p) for p in self.pairs])
        return ContinuedFraction.from_rule(self.digit, label)

    def shifted(self, levels: int = 1) -> "StaircaseParams":
        """Parameters of the renormalized rotation (tail of the expansion)."""
        tail = self.pairs[levels:]
        return StaircaseParams(tail)

    def to_json(self) -> str:
        return json.dumps([[r, s] for r, s in self.pairs])

    @classmethod
    def from_json(cls, text) -> "StaircaseParams":
        raw = json.loads(text) if isinstance(text, str) else text
        if not isinstance(raw, list) or any(not isinstance(p, list) or len(p) != 2 for p in raw):
            raise ValidationError("params must be a JSON list of [r, s] pairs")
        return cls(tuple((int(r), int(s)) for r, s in raw))


def image_runs(letter: str, r: int, s: int) -> list[tuple[str, int]]:
    """sigma(letter) as a run-length list [(letter, count), ...]."""
    up = [("A", r), ("B", r - 1), ("C", 1)]
    down = [("A", r - 1), ("B", r), ("C", 1)]
    if letter == "A":
        runs = [("A", 1)] + up * s
    elif letter == "B":
        runs = [("A", 1)] + down + up * (s - 1)
    elif letter == "C":
        runs = [("A", 1)] + down + up * s
    else:
        raise ValidationError(f"unknown letter {letter!r}")
    return [(y, c) for y, c in runs if c > 0]


def substitute(word: str, r: int, s: int) -> str:
    if r < 1 or s < 1:
        raise ValidationError("r and s must be >= 1")
    images = {x: "".join(y * c for y, c in image_runs(x, r, s)) for x in LETTERS}
    return "".join(images[x] for x in word)


def letter_matrix(r: int, s: int) -> list[list[int]]:
    """m[x][y] = occurrences of letter y in sigma(x)."""
    m = []
    for x in LETTERS:
        row = [0, 0, 0]
        for y, c in image_runs(x, r, s):
            row[LETTERS.index(y)] += c
        m.append(row)
    return m


def letter_counts(params: StaircaseParams, n: int) -> dict[str, tuple[int, int, int]]:
    """Letter counts (#A, #B, #C) of sigma^(n)(X) for each letter X."""
    # sigma^(n)(X) = sigma^(n-1)(sigma_n(X)), so counts_n = M_n . counts_(n-1)
    counts = {x: tuple(int(x == y) for y in LETTERS) for x in LETTERS}
    for i in range(1, n + 1):
        m = letter_matrix(*params.pair(i))
        counts = {
            x: tuple(sum(m[ix][k] * counts[LETTERS[k]][j] for k in range(3)) for j in range(3))
            for ix, x in enumerate(LETTERS)
        }
    return counts


def level_lengths(params: StaircaseParams, n: int) -> tuple[int, int, int]:
    """(|sigma^(n)(A)|, |sigma^(n)(B)|, |sigma^(n)(C)|)."""
    c = letter_counts(params, n)
    return tuple(sum(c[x]) for x in LETTERS)


def level_drifts(params: StaircaseParams, n: int) -> tuple[int, int, int]:
    c = letter_counts(params, n)
    return tuple(a - b - cc for a, b, cc in (c[x] for x in LETTERS))


def level_word(params: StaircaseParams, n: int, letter: str = "A", cap: int = WORD_CAP) -> str:
    """sigma_1 o ... o sigma_n applied to one letter, materialized."""
    if letter not in LETTERS:
        raise ValidationError(f"unknown letter {letter!r}")
    length = level_lengths(params, n)[LETTERS.index(letter)]
    if length > cap:
        raise ValidationError(f"word length {length} exceeds cap {cap}")
    word = letter
    for i in range(n, 0, -1):
        word = substitute(word, *params.pair(i))
    return word


def drift(word: str) -> int:
    return word.count("A") - word.count("B") - word.count("C")


def prefix_drifts(word: str) -> Iterator[int]:
    g = 0
    for ch in word:
        g += DRIFT[ch]
        yield g


def word_histogram(word: str) -> dict[int, int]:
    """k -> #{prefixes with drift k} (nonempty prefixes)."""
    hist: dict[int, int] = {}
    for g in prefix_drifts(word):
        hist[g] = hist.get(g, 0) + 1
    return hist
