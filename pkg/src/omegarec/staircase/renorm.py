"""Coding of arbitrary points through the renormalization towers.

For alpha = [2r, s, beta...] and delta = 1 - 2r*alpha, the first return to
J = [0, delta) is rotation by beta after rescaling, and J splits into
J_A = [0, delta/2), J_B = [delta/2, delta - delta*beta), J_C = [delta - delta*beta, delta)
whose return words are sigma(A), sigma(B), sigma(C). Every x sits on some
floor j of the tower over a point y of J, so its coding is
sigma(X)[j:] followed by sigma applied to the coding of y/delta (minus its
first letter). Repeating this gives

    coding(x) = V_0 sigma^(1)(V_1) sigma^(2)(V_2) ...

with each V_i a suffix of a single substitution image. Points are kept as
u + v*alpha_i with u, v rational, where alpha_i is the level-i rotation
number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..cocycle import CirclePoint, StepCocycle, orbit_indices
from ..errors import PrecisionError, ValidationError
from ..recurrence import OmegaWeight, omega_eval
from .levels import LevelTower, run_hits
from .words import DRIFT, StaircaseParams, image_runs, level_word


def coding_of_point(params: StaircaseParams, x: CirclePoint, N: int) -> str:
    """N-letter itinerary of x through A=[0,1/2), B=[1/2,1-alpha), C=[1-alpha,1)."""
    if N > 10**7:
        raise ValidationError("coding length above cap")
    cf = params.alpha()
    labels = StepCocycle([CirclePoint.zero(), CirclePoint(Fraction(1, 2)), CirclePoint(Fraction(1), -1)],
                         [0, 1, 2])
    labels.validate(cf)
    idx = orbit_indices(labels, x, N, cf)
    return "".join(np.array(list("ABC"))[idx])


def _approx_floor_ratio(cf, num: tuple, den: tuple) -> int:
    """floor((u1 + v1*a) / (u2 + v2*a)) for positive denominator, exact."""
    size = max(abs(Fraction(t)).numerator.bit_length() + Fraction(t).denominator.bit_length()
               for t in (*num, *den))
    bits = 128 + 2 * size
    a = Fraction(cf.fixed_point(bits), 1 << bits)
    n_val = num[0] + num[1] * a
    d_val = den[0] + den[1] * a
    k = math.floor(n_val / d_val)
    # correct the estimate with exact signs
    for _ in range(64):
        if cf.sign(num[0] - k * den[0], num[1] - k * den[1]) < 0:
            k -= 1
        elif cf.sign(num[0] - (k + 1) * den[0], num[1] - (k + 1) * den[1]) >= 0:
            k += 1
        else:
            return k
    raise PrecisionError("floor estimate did not settle")


@dataclass(frozen=True)
class TowerStep:
    letter: str
    floor: int
    base: tuple[Fraction, Fraction]  # y in level coordinates
    next_point: tuple[Fraction, Fraction]  # y/delta in the next level


def decompose(cf, r: int, s: int, point: tuple[Fraction, Fraction]) -> TowerStep:
    """Tower floor and base of a point in [0, 1) for alpha = [2r, s, ...]."""
    u, v = Fraction(point[0]), Fraction(point[1])
    delta = (Fraction(1), Fraction(-2 * r))
    q2 = 2 * r * s + 1
    # m with x - m*alpha in [delta - alpha, delta)
    m = _approx_floor_ratio(cf, (u - 1, v + 2 * r + 1), (Fraction(0), Fraction(1)))
    zu, zv = u, v - m
    # b with z + b*delta in [0, delta)
    b = -_approx_floor_ratio(cf, (zu, zv), delta)
    yu, yv = zu + b, zv - 2 * r * b
    if cf.sign(2 * yu - 1, 2 * yv + 2 * r) < 0:
        letter = "A"
    elif cf.sign(yu - 1 - s, yv + 2 * r + q2) < 0:
        letter = "B"
    else:
        letter = "C"
    floor = 2 * r * b + m
    height = q2 + (2 * r if letter == "C" else 0)
    if not (0 <= m <= 2 * r and 0 <= floor < height):
        raise PrecisionError("tower decomposition inconsistent")
    nxt = (yu * q2 + yv * s, 2 * r * yu + yv)
    return TowerStep(letter, floor, (yu, yv), nxt)


@dataclass(frozen=True)
class Item:
    """count consecutive copies of the level word sigma^(level)(letter)."""

    level: int
    letter: str
    count: int
    start: int  # letters before the first copy
    drift: int  # ergodic sum before the first copy


def _suffix_runs(runs, skip: int):
    out = []
    for y, c in runs:
        if skip >= c:
            skip -= c
            continue
        out.append((y, c - skip))
        skip = 0
    return out


def expansion(params: StaircaseParams, x: CirclePoint | tuple, N: int,
              tower: LevelTower | None = None, max_levels: int | None = None):
    """Items covering at least the first N letters of the coding of x."""
    tower = tower or LevelTower(params)
    point = (Fraction(x.u), Fraction(x.v)) if isinstance(x, CirclePoint) else x
    max_levels = max_levels or params.depth + 200
    items = []
    t, c = 0, 0
    level = 0
    while t < N:
        if level > max_levels:
            raise PrecisionError("coding did not reach the requested length")
        r, s = params.pair(level + 1)
        cf = params.shifted(level).alpha()
        step = decompose(cf, r, s, point)
        skip = step.floor if level == 0 else step.floor + 1
        lengths = tower.level(level).lengths
        for y, count in _suffix_runs(image_runs(step.letter, r, s), skip):
            items.append(Item(level, y, count, t, c))
            t += count * lengths[y]
            c += count * DRIFT[y]
        point = step.next_point
        level += 1
    return items


def coding_by_expansion(params: StaircaseParams, x, N: int) -> str:
    """Materialized coding from the tower expansion (for cross-checks)."""
    parts = []
    total = 0
    for it in expansion(params, x, N):
        w = level_word(params, it.level, it.letter)
        parts.append(w * it.count)
        total += len(w) * it.count
        if total >= N:
            break
    return "".join(parts)[:N]


@dataclass
class ZetaEnclosure:
    lower: float
    upper: float
    zero_hits: int
    N: int
    segments: int


def zeta_enclosure(params: StaircaseParams, x, N: int, w: OmegaWeight, tol: float = 1e-3,
                   tower: LevelTower | None = None) -> ZetaEnclosure:
    """Bounds on sum_{i<=N} omega(i)[S_i(x) = 0] together with the exact zero count.

    Runs of level words are split until omega varies by at most a factor
    1 + tol across each piece; hits inside a piece come from running sums
    of the level histograms, so no word is ever materialized.
    """
    tower = tower or LevelTower(params)
    lo = hi = 0.0
    lo_terms, hi_terms = [], []
    hits_total = 0
    nseg = 0
    stack = [(it.level, it.letter, it.start, it.drift, it.count) for it in expansion(params, x, N, tower)]
    while stack:
        n, y, t0, c0, count = stack.pop()
        if t0 >= N:
            continue
        nseg += 1
        ell = tower.level(n).lengths[y]
        d = DRIFT[y]
        if n == 0 and count == 1:
            if c0 + d == 0:
                wv = omega_eval(w, t0 + 1)
                lo_terms.append(wv)
                hi_terms.append(wv)
                hits_total += 1
            continue
        h = run_hits(tower, n, y, c0, 0, count)
        if h == 0:
            continue
        t_end = t0 + count * ell
        if t_end <= N:
            w_hi = omega_eval(w, t0 + 1)
            w_lo = omega_eval(w, t_end)
            if w_hi <= (1 + tol) * w_lo:
                lo_terms.append(h * w_lo)
                hi_terms.append(h * w_hi)
                hits_total += h
                continue
        if count > 1:
            if t_end > N:
                half = max(1, min(count - 1, (N - t0) // ell))
            else:
                half = count // 2
            stack.append((n, y, t0, c0, half))
            stack.append((n, y, t0 + half * ell, c0 + half * d, count - half))
            continue
        r, s = params.pair(n)
        lower = tower.level(n - 1).lengths
        tt, cc = t0, c0
        for z, k in image_runs(y, r, s):
            stack.append((n - 1, z, tt, cc, k))
            tt += k * lower[z]
            cc += k * DRIFT[z]
    lo = math.fsum(lo_terms)
    hi = math.fsum(hi_terms)
    # one-ulp-scale outward padding for the float sums
    return ZetaEnclosure(lo * (1 - 1e-12), hi * (1 + 1e-12), hits_total, N, nseg)
