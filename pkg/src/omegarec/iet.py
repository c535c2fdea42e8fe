"""Interval exchange transformations of periodic type.

Lengths are kept as integer enclosures [lo, hi] of 2**bits * length, so
every comparison either certifies an order or fails loudly. Labels 0..m-1
are fixed; ``top`` lists them left to right before the map, ``bottom``
after it.

A Rauzy move is named by the row whose last interval is shorter and gets
consumed: lengths (0.3, 0.7) on the rotation permutation give "bottom".
With old = E @ new, the move matrices are I + e[winner, loser].
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from numba import njit

from .cocycle import CirclePoint, SumTrace, growth_slope
from .errors import PrecisionError, ValidationError
from .recurrence import OmegaWeight

MOVES = ("top", "bottom")
MAX_BITS = 4096
KERNEL_BITS = 62


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _irreducible(top: Sequence[int], bottom: Sequence[int]) -> bool:
    return all(set(top[:k]) != set(bottom[:k]) for k in range(1, len(top)))


def _check_rows(top, bottom) -> None:
    m = len(top)
    if m < 2:
        raise ValidationError("an IET needs at least two intervals")
    if sorted(top) != list(range(m)) or sorted(bottom) != list(range(m)):
        raise ValidationError("rows must be orderings of the labels 0..m-1")
    if not _irreducible(top, bottom):
        raise ValidationError("permutation is reducible")


def rows_from_permutation(perm: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """perm[i] is the 1-based position after the map of the i-th interval."""
    m = len(perm)
    if sorted(perm) != list(range(1, m + 1)):
        raise ValidationError("permutation must be a bijection on 1..m")
    bottom = [0] * m
    for i, p in enumerate(perm):
        bottom[p - 1] = i
    return tuple(range(m)), tuple(bottom)


def _move_rows(top, bottom, move: str):
    """Combinatorial part of a Rauzy move: new rows plus (winner, loser)."""
    top, bottom = list(top), list(bottom)
    if move == "bottom":
        winner, loser = top[-1], bottom.pop()
        bottom.insert(bottom.index(winner) + 1, loser)
    elif move == "top":
        winner, loser = bottom[-1], top.pop()
        top.insert(top.index(winner) + 1, loser)
    else:
        raise ValidationError(f"unknown move {move!r}")
    return tuple(top), tuple(bottom), winner, loser


def _elementary(m: int, winner: int, loser: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(i == j or (i, j) == (winner, loser)) for j in range(m)) for i in range(m))


def _matmul(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
                 for i in range(len(a)))


def is_primitive(R) -> bool:
    """Some power is strictly positive; (m-1)^2 + 1 powers suffice."""
    m = len(R)
    if any(v < 0 for row in R for v in row):
        return False
    P = R
    for _ in range((m - 1) ** 2 + 1):
        if all(v > 0 for row in P for v in row):
            return True
        P = _matmul(P, R)
    return False


@dataclass(frozen=True)
class Iet:
    top: tuple[int, ...]
    bottom: tuple[int, ...]
    lengths: tuple[tuple[int, int], ...]  # per label, enclosure of 2**bits * length
    bits: int
    loop: "RauzyLoop | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        _check_rows(self.top, self.bottom)
        if len(self.lengths) != len(self.top):
            raise ValidationError("one length per label")
        for lo, hi in self.lengths:
            if lo > hi:
                raise ValidationError("empty length enclosure")
            if lo <= 0:
                raise PrecisionError("length not certified positive")

    @classmethod
    def from_lengths(cls, lengths: Sequence, permutation: Sequence[int], bits: int = 256,
                     radii: Sequence | None = None) -> "Iet":
        """Lengths (decimal strings, Fractions or floats) of the intervals left to right, scaled to total 1."""
        top, bottom = rows_from_permutation(permutation)
        if len(lengths) != len(top):
            raise ValidationError("one length per interval")
        radii = radii or [0] * len(lengths)
        one = 1 << bits
        enc = []
        for x, r in zip(lengths, radii):
            x, r = Fraction(str(x)), Fraction(str(r))
            enc.append((math.floor((x - r) * one), math.ceil((x + r) * one)))
        if any(lo <= 0 for lo, _ in enc):
            raise ValidationError("lengths must be positive")
        return cls(top, bottom, _normalize(enc, bits), bits)

    @property
    def m(self) -> int:
        return len(self.top)

    @property
    def permutation(self) -> list[int]:
        return [self.bottom.index(label) + 1 for label in self.top]

    @property
    def radius(self) -> float:
        return max(hi - lo for lo, hi in self.lengths) / 2 / (1 << self.bits)

    def length(self, label: int) -> Fraction:
        lo, hi = self.lengths[label]
        return Fraction(lo + hi, 2 << self.bits)

    def interval_lengths(self) -> list[float]:
        """Midpoint lengths in left-to-right order."""
        return [float(self.length(label)) for label in self.top]

    def to_json(self) -> dict:
        digits = math.ceil(self.bits * math.log10(2)) + 2
        return {
            "lengths": [_decimal(sum(self.lengths[x]), self.bits + 1, digits) for x in self.top],
            "radii": [_decimal(self.lengths[x][1] - self.lengths[x][0] + 2, self.bits + 1, digits, up=True)
                      for x in self.top],
            "permutation": self.permutation,
        }

    @classmethod
    def from_json(cls, d: dict, bits: int = 256) -> "Iet":
        unknown = set(d) - {"lengths", "radii", "permutation"}
        if unknown:
            raise ValidationError(f"unknown IET keys {sorted(unknown)}")
        return cls.from_lengths(d["lengths"], d["permutation"], bits, d.get("radii"))


def _decimal(num: int, bits: int, digits: int, up: bool = False) -> str:
    """num / 2**bits as a fixed decimal string (truncated, or rounded up)."""
    scaled = num * 10**digits
    q = _ceil_div(scaled, 1 << bits) if up else scaled >> bits
    s = str(q).rjust(digits + 1, "0")
    return f"{s[:-digits]}.{s[-digits:]}"


def _normalize(enc, bits: int):
    tot_lo = sum(lo for lo, _ in enc)
    tot_hi = sum(hi for _, hi in enc)
    if tot_lo <= 0:
        raise PrecisionError("total length not certified positive")
    return tuple(((lo << bits) // tot_hi, _ceil_div(hi << bits, tot_lo)) for lo, hi in enc)


def rauzy_step(iet: Iet, normalize: bool = True):
    """One Rauzy-Veech induction step: (induced IET, move, E) with old = E @ new."""
    t, b = iet.top[-1], iet.bottom[-1]
    lt, lb = iet.lengths[t], iet.lengths[b]
    if lt[0] > lb[1]:
        move = "bottom"
    elif lb[0] > lt[1]:
        move = "top"
    else:
        raise PrecisionError("cannot separate the two last lengths (tie or too little precision)")
    top, bottom, winner, loser = _move_rows(iet.top, iet.bottom, move)
    enc = list(iet.lengths)
    (wl, wh), (ll, lh) = enc[winner], enc[loser]
    enc[winner] = (wl - lh, wh - ll)
    if enc[winner][0] <= 0:
        raise PrecisionError("induced length not certified positive")
    if normalize:
        enc = _normalize(enc, iet.bits)
    return Iet(top, bottom, tuple(enc), iet.bits, iet.loop), move, _elementary(iet.m, winner, loser)


@dataclass(frozen=True)
class RauzyLoop:
    top: tuple[int, ...]
    bottom: tuple[int, ...]
    moves: tuple[str, ...]

    def __post_init__(self):
        _check_rows(self.top, self.bottom)
        top, bottom = self.top, self.bottom
        for mv in self.moves:
            top, bottom, _, _ = _move_rows(top, bottom, mv)
        if (top, bottom) != (self.top, self.bottom):
            raise ValidationError("move sequence does not return to the start permutation")

    @classmethod
    def from_permutation(cls, permutation: Sequence[int], moves: Sequence[str]) -> "RauzyLoop":
        top, bottom = rows_from_permutation(permutation)
        return cls(top, bottom, tuple(moves))

    @classmethod
    def golden(cls) -> "RauzyLoop":
        return cls.from_permutation([2, 1], ["top", "bottom"])

    @property
    def m(self) -> int:
        return len(self.top)

    @property
    def matrix(self) -> tuple[tuple[int, ...], ...]:
        R = _elementary(self.m, 0, 0)
        top, bottom = self.top, self.bottom
        for mv in self.moves:
            top, bottom, w, l = _move_rows(top, bottom, mv)
            R = _matmul(R, _elementary(self.m, w, l))
        return R

    def is_primitive(self) -> bool:
        return is_primitive(self.matrix)

    def require_primitive(self) -> None:
        if not self.is_primitive():
            raise ValidationError("loop matrix is not primitive")

    def to_json(self) -> dict:
        perm = [self.bottom.index(label) + 1 for label in self.top]
        if self.top != tuple(range(self.m)):
            return {"top": list(self.top), "bottom": list(self.bottom), "moves": list(self.moves)}
        return {"permutation": perm, "moves": list(self.moves)}

    @classmethod
    def from_json(cls, d: dict) -> "RauzyLoop":
        unknown = set(d) - {"permutation", "top", "bottom", "moves"}
        if unknown:
            raise ValidationError(f"unknown loop keys {sorted(unknown)}")
        if "moves" not in d:
            raise ValidationError("loop needs moves")
        if "permutation" in d:
            return cls.from_permutation(d["permutation"], d["moves"])
        return cls(tuple(d["top"]), tuple(d["bottom"]), tuple(d["moves"]))


def periodic_iet_from_loop(loop: RauzyLoop, bits: int = 256) -> Iet:
    """The self-similar IET whose lengths are the Perron vector of the loop matrix.

    The normalized Perron vector lies in the hull of the normalized columns
    of every power R^j, which gives exact rational enclosures that shrink
    geometrically.
    """
    loop.require_primitive()
    if not 16 <= bits <= MAX_BITS:
        raise ValidationError(f"bits must lie in 16..{MAX_BITS}")
    R = loop.matrix
    P = R
    for _ in range(64 * bits):
        cols = list(zip(*P))
        if all(min(c) > 0 for c in cols):
            enc = []
            for i in range(loop.m):
                lo = min((c[i] << bits) // sum(c) for c in cols)
                hi = max(_ceil_div(c[i] << bits, sum(c)) for c in cols)
                enc.append((lo, hi))
            if max(hi - lo for lo, hi in enc) <= 4:
                return Iet(loop.top, loop.bottom, tuple(enc), bits, loop)
        P = _matmul(P, R)
    raise PrecisionError("Perron enclosure did not converge")


def traverse_loop(iet: Iet, loop: RauzyLoop):
    """Induce along the loop, checking each move; returns (IET, product matrix)."""
    R = _elementary(iet.m, 0, 0)
    cur = iet
    for expected in loop.moves:
        cur, mv, E = rauzy_step(cur)
        if mv != expected:
            raise ValidationError(f"lengths induce {mv!r} where the loop has {expected!r}")
        R = _matmul(R, E)
    return cur, R


def self_similarity_residual(iet: Iet, loop: RauzyLoop) -> float:
    """Largest distance between start and end lengths after one traversal (certified upper bound)."""
    end, _ = traverse_loop(iet, loop)
    if (end.top, end.bottom) != (iet.top, iet.bottom):
        raise ValidationError("traversal did not return to the start permutation")
    worst = max(max(h1 - l0, h0 - l1) for (l0, h0), (l1, h1) in zip(iet.lengths, end.lengths))
    return max(worst, 0) / (1 << iet.bits)


@dataclass(frozen=True)
class LoopSpectrum:
    theta1: float
    theta2: float
    m_jordan: int
    m_intervals: int
    moduli: tuple[float, ...]

    def as_dict(self) -> dict:
        return {"theta1": self.theta1, "theta2": self.theta2, "M_jordan": self.m_jordan,
                "m": self.m_intervals}


def loop_spectrum(loop: RauzyLoop, tol: float = 1e-9, prec: int = 256) -> LoopSpectrum:
    """theta1 = log Perron eigenvalue, theta2 = max(log|lambda_2|, 0), largest Jordan block."""
    loop.require_primitive()
    return matrix_spectrum(loop.matrix, tol, prec)


def matrix_spectrum(R, tol: float = 1e-9, prec: int = 256) -> LoopSpectrum:
    """Spectrum record of a primitive integer matrix; eigenvalues within tol are one cluster."""
    if not is_primitive(R):
        raise ValidationError("matrix is not primitive")
    m = len(R)
    with mpmath.workprec(prec):
        A = mpmath.matrix([list(row) for row in R])
        eig = sorted(mpmath.eig(A, left=False, right=False), key=lambda z: -abs(z))
        clusters: list[list] = []
        for z in eig:
            for c in clusters:
                if abs(c[0] - z) <= tol * max(1, abs(z)):
                    c.append(z)
                    break
            else:
                clusters.append([z])
        block = 1
        for c in clusters:
            a = len(c)
            if a == 1:
                continue
            mu = sum(c) / a
            B = A - mu * mpmath.eye(m)
            Bk = B
            for k in range(1, a + 1):
                sv = mpmath.svd(Bk, compute_uv=False)
                nullity = sum(1 for s in sv if abs(s) <= tol * (1 + mpmath.mnorm(A, 1)))
                if nullity >= a:
                    break
                Bk = Bk * B
            block = max(block, k)
        theta1 = float(mpmath.log(abs(eig[0])))
        theta2 = float(mpmath.log(abs(eig[1]))) if abs(eig[1]) > 0 else 0.0
        theta2 = 0.0 if theta2 < tol else theta2  # unit-modulus eigenvalues give log ~ 1e-77
        moduli = tuple(float(abs(z)) for z in eig)
    return LoopSpectrum(theta1, theta2, block, m, moduli)


def iet_omega(spec: LoopSpectrum, j: int) -> OmegaWeight:
    """(log n)^M / (n^z log^(2) n ... log^(j) n) with z = (theta1 - theta2)/theta1."""
    if not 0 <= spec.theta2 < spec.theta1:
        raise ValidationError("need 0 <= theta2 < theta1")
    return OmegaWeight(power=(spec.theta1 - spec.theta2) / spec.theta1, log_power=spec.m_jordan,
                       log_start=2, log_end=j)


def conze_scales(spec: LoopSpectrum, gamma: float, K: int, C: float = 1.0):
    """N_k = gamma^k and rho_k = C k^(M+1) gamma^(k theta2/theta1), k = 1..K."""
    ratio = spec.theta2 / spec.theta1
    Ns = [gamma**k for k in range(1, K + 1)]
    rhos = [C * k ** (spec.m_jordan + 1) * gamma ** (k * ratio) for k in range(1, K + 1)]
    return Ns, rhos


# -- cocycles over an IET -----------------------------------------------------


@dataclass(frozen=True)
class IetCocycle:
    """Integer step function: one value per interval, or values between exact cut points."""

    values: tuple[int, ...]
    cuts: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.cuts is not None:
            cuts = tuple(Fraction(str(c)) for c in self.cuts)
            if any(not 0 < c < 1 for c in cuts) or list(cuts) != sorted(set(cuts)):
                raise ValidationError("cuts must be increasing points of (0, 1)")
            if len(self.values) != len(cuts) + 1:
                raise ValidationError("need one value per piece")
            object.__setattr__(self, "cuts", cuts)

    @classmethod
    def halves(cls, a: int = 1, b: int = -1) -> "IetCocycle":
        return cls((a, b), (Fraction(1, 2),))

    @property
    def variation(self) -> int:
        v = list(self.values)
        return sum(abs(x - y) for x, y in zip(v, v[1:] + v[:1]))

    def as_dict(self) -> dict:
        d = {"values": list(self.values)}
        if self.cuts is not None:
            d["cuts"] = [str(c) for c in self.cuts]
        return d

    @classmethod
    def from_dict(cls, d) -> "IetCocycle":
        if isinstance(d, (list, tuple)):
            return cls(tuple(d))
        unknown = set(d) - {"values", "cuts"}
        if unknown:
            raise ValidationError(f"unknown cocycle keys {sorted(unknown)}")
        return cls(tuple(d["values"]), d.get("cuts"))


@dataclass
class _Cells:
    """Pieces where both the IET and the cocycle are constant, at `bits` precision."""

    bits: int
    start_lo: list[int]
    start_hi: list[int]
    trans_lo: list[int]
    trans_hi: list[int]
    values: list[int]

    @classmethod
    def build(cls, iet: Iet, phi: IetCocycle) -> "_Cells":
        B = iet.bits
        if phi.cuts is None and len(phi.values) != iet.m:
            raise ValidationError("need one cocycle value per interval")
        # top starts and translations per label
        start, shift = {}, {}
        lo = hi = 0
        for label in iet.top:
            start[label] = (lo, hi)
            lo, hi = lo + iet.lengths[label][0], hi + iet.lengths[label][1]
        lo = hi = 0
        for label in iet.bottom:
            s_lo, s_hi = start[label]
            shift[label] = (lo - s_hi, hi - s_lo)
            lo, hi = lo + iet.lengths[label][0], hi + iet.lengths[label][1]
        # (start enclosure, kind, index): kind 0 = IET interval, 1 = cocycle piece
        marks = [(start[label], 0, j) for j, label in enumerate(iet.top)]
        if phi.cuts is not None:
            one = 1 << B
            marks += [((math.floor(c * one), math.ceil(c * one)), 1, j + 1) for j, c in enumerate(phi.cuts)]
        marks.sort(key=lambda t: t[0][0])
        for prev, nxt in zip(marks, marks[1:]):
            if nxt[0][0] <= prev[0][1]:
                raise PrecisionError("cocycle cut not separated from an IET discontinuity")
        cells = cls(B, [], [], [], [], [])
        cur_int = cur_piece = 0
        for (s_lo, s_hi), kind, idx in marks:
            if kind == 0:
                cur_int = idx
            else:
                cur_piece = idx
            label = iet.top[cur_int]
            cells.start_lo.append(s_lo)
            cells.start_hi.append(s_hi)
            cells.trans_lo.append(shift[label][0])
            cells.trans_hi.append(shift[label][1])
            cells.values.append(phi.values[cur_int] if phi.cuts is None else phi.values[cur_piece])
        return cells

    def mean(self) -> tuple[Fraction, Fraction]:
        """Enclosure of the integral of the cocycle."""
        one = 1 << self.bits
        lo = hi = Fraction(0)
        ends_lo = self.start_lo[1:] + [one]
        ends_hi = self.start_hi[1:] + [one]
        for v, s_lo, s_hi, e_lo, e_hi in zip(self.values, self.start_lo, self.start_hi, ends_lo, ends_hi):
            a, b = Fraction(v * (e_lo - s_hi), one), Fraction(v * (e_hi - s_lo), one)
            lo += min(a, b)
            hi += max(a, b)
        return lo, hi

    def kernel_arrays(self, P: int):
        """Rounded to P bits: (search starts, certified start upper, certified end lower, shift, error, values)."""
        d = self.bits - P
        big = 1 << 62
        s_lo = [x >> d for x in self.start_lo]
        s_hi = [_ceil_div(x, 1 << d) for x in self.start_hi]
        s_hi[0] = -big  # 0 is exact and nothing lies below it
        e_lo = s_lo[1:] + [big]
        mid = [(a + b) >> (d + 1) for a, b in zip(self.trans_lo, self.trans_hi)]
        err = [_ceil_div(b - a, 1 << (d + 1)) + 2 for a, b in zip(self.trans_lo, self.trans_hi)]
        as64 = lambda v: np.asarray(v, dtype=np.int64)  # noqa: E731
        return as64(s_lo), as64(s_hi), as64(e_lo), as64(mid), as64(err), as64(self.values)


@njit(cache=True)
def _orbit_kernel(X, e, s_lo, s_hi, e_lo, shift, err, vals, out):
    """Fill out[1..] with ergodic sums; returns the first uncertified step or -1."""
    n_cells = s_lo.shape[0]
    S = 0
    for n in range(out.shape[0] - 1):
        a, b = 0, n_cells
        while b - a > 1:
            c = (a + b) // 2
            if s_lo[c] <= X:
                a = c
            else:
                b = c
        if X - e < s_hi[a] or X + e >= e_lo[a]:
            return n
        S += vals[a]
        out[n + 1] = S
        X += shift[a]
        e += err[a]
    return -1


def _orbit_exact(cells: _Cells, x: Fraction, N: int) -> np.ndarray:
    """Same walk with Python integers at the full precision of the cells."""
    B = cells.bits
    one = 1 << B
    X = x * one
    e = 0 if X.denominator == 1 else 1
    X = math.floor(X)
    n_cells = len(cells.values)
    ends = cells.start_lo[1:] + [None]
    shift = [(a + b) >> 1 for a, b in zip(cells.trans_lo, cells.trans_hi)]
    err = [_ceil_div(b - a, 2) + 1 for a, b in zip(cells.trans_lo, cells.trans_hi)]
    out = np.zeros(N + 1, dtype=np.int64)
    S = 0
    for n in range(N):
        k = max(bisect.bisect_right(cells.start_lo, X) - 1, 0)
        if (k > 0 and X - e < cells.start_hi[k]) or (k + 1 < n_cells and X + e >= ends[k]):
            raise PrecisionError(f"orbit step {n} too close to a discontinuity at {B} bits")
        S += cells.values[k]
        out[n + 1] = S
        X += shift[k]
        e += err[k]
    return out


def iet_ergodic_sums(iet: Iet, phi: IetCocycle, x, N: int) -> SumTrace:
    """Exact integer sums S_n = sum_{i<n} phi(T^i x), n = 0..N.

    A 62-bit walk runs first; if it cannot certify a step, the walk is redone
    with full-width integers, and for loop-built IETs the precision is
    doubled up to 4096 bits.
    """
    x = Fraction(x)
    if not 0 <= x < 1:
        raise ValidationError("x must lie in [0, 1)")
    if N < 0:
        raise ValidationError("N must be >= 0")
    cur = iet
    while True:
        cells = _Cells.build(cur, phi)
        P = min(KERNEL_BITS, cells.bits)
        X = x * (1 << P)
        out = np.zeros(N + 1, dtype=np.int64)
        fail = _orbit_kernel(math.floor(X), 0 if X.denominator == 1 else 1, *cells.kernel_arrays(P), out)
        if fail < 0:
            return SumTrace(CirclePoint(x, 0), N, out)
        try:
            return SumTrace(CirclePoint(x, 0), N, _orbit_exact(cells, x, N))
        except PrecisionError:
            if cur.loop is None or 2 * cur.bits > MAX_BITS:
                raise
            cur = periodic_iet_from_loop(cur.loop, 2 * cur.bits)


def iet_sample_points(count: int, seed: int) -> list[Fraction]:
    rng = random.Random(seed)
    return [Fraction(rng.getrandbits(53), 1 << 53) for _ in range(count)]


@dataclass
class GrowthFit:
    exponent: float
    horizons: list[int]
    max_sums: list[int]
    samples: int

    def rows(self):
        return list(zip(self.horizons, self.max_sums))


def birkhoff_sup_growth(iet: Iet, phi: IetCocycle, horizons: Sequence[int], sample_count: int,
                        seed: int = 0) -> GrowthFit:
    """max over sampled x of |S_n(x)| at each horizon, and the fitted log-log slope."""
    horizons = [int(h) for h in horizons]
    if not horizons or horizons[0] < 1 or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValidationError("horizons must be positive and increasing")
    if sample_count < 1:
        raise ValidationError("sample_count must be >= 1")
    lo, hi = _Cells.build(iet, phi).mean()
    if not lo <= 0 <= hi:
        raise ValidationError("cocycle does not have zero mean against the lengths")
    idx = np.asarray(horizons)
    best = np.zeros(len(horizons), dtype=np.int64)
    for x in iet_sample_points(sample_count, seed):
        sums = iet_ergodic_sums(iet, phi, x, horizons[-1]).sums
        best = np.maximum(best, np.abs(sums[idx]))
    maxima = best.tolist()
    return GrowthFit(growth_slope(horizons, maxima), horizons, maxima, sample_count)
