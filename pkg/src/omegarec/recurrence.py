"""Balls-and-bins diagnostics for ergodic sums and omega-weighted return series.

A trace's partial sums S_1..S_N are the balls; the values they take are the
bins. Returns to zero weighted by omega(n) give the partial sums of the
omega-recurrence series.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cocycle import CirclePoint, StepCocycle, SumTrace, ergodic_sums, zero_hits
from .contfrac import ContinuedFraction
from .errors import ValidationError


def _exact(x) -> Fraction:
    """Decimal-faithful rational for user-facing float parameters."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _log_iter(x: float, times: int) -> float:
    for _ in range(times):
        x = math.log(x)
    return x


def _tower(i: int) -> float:
    """Smallest n with log^(i) n >= 1 (e, e^e, e^e^e, ...)."""
    t = 1.0
    for _ in range(i):
        if t > 700:
            return math.inf
        t = math.exp(t)
    return t


@dataclass(frozen=True)
class OmegaWeight:
    """omega(n) = (log n)^m / (n^z * log^(j0) n * ... * log^(j) n).

    The iterated-log range is empty when ``log_end < log_start``. Below
    ``valid_from`` the weight is held at its value there.
    """

    power: float = 1.0
    log_power: float = 0.0
    log_start: int = 2
    log_end: int = 1
    valid_from: float | None = None

    def __post_init__(self):
        if self.power < 0 or self.log_power < 0:
            raise ValidationError("power and log_power must be nonnegative")
        if self.log_start < 2:
            raise ValidationError("iterated logs start at order 2")
        if self.power == 0 and self.log_power > 0:
            raise ValidationError("(log n)^m with no power decay is not monotone")
        floor = self.default_threshold()
        n0 = floor if self.valid_from is None else float(self.valid_from)
        if n0 < floor:
            raise ValidationError(f"valid_from below {floor}, where the weight is not monotone")
        if not math.isfinite(n0) or n0 > 1e300:
            raise ValidationError("iterated-log range too deep to evaluate")
        object.__setattr__(self, "valid_from", n0)

    @classmethod
    def power_law(cls, z: float) -> "OmegaWeight":
        return cls(power=z)

    def default_threshold(self) -> float:
        n0 = 1.0
        if self.log_power > 0:
            n0 = max(n0, math.exp(self.log_power / self.power))
        if self.log_end >= self.log_start:
            n0 = max(n0, _tower(self.log_end))
        return n0

    def __call__(self, n) -> float:
        return omega_eval(self, n)

    def as_dict(self) -> dict:
        return {"power": self.power, "log_power": self.log_power, "log_start": self.log_start,
                "log_end": self.log_end, "valid_from": self.valid_from}

    @classmethod
    def from_dict(cls, d: dict) -> "OmegaWeight":
        unknown = set(d) - {"power", "log_power", "log_start", "log_end", "valid_from"}
        if unknown:
            raise ValidationError(f"unknown weight keys {sorted(unknown)}")
        return cls(**d)


def omega_eval(w: OmegaWeight, n) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    n = max(n, w.valid_from)
    ln = math.log(n)
    val = -w.power * ln
    if w.log_power:
        val += w.log_power * math.log(ln)
    for i in range(w.log_start, w.log_end + 1):
        val -= math.log(_log_iter(n, i))
    return math.exp(val)


def omega_from_lyapunov(d: int, lam: float) -> OmegaWeight:
    """The power weight n^-(1 - d*lam) obtained from an exponent bound lam."""
    if d < 1 or lam <= 0 or d * lam >= 1:
        raise ValidationError("need d >= 1 and 0 < d*lam < 1")
    return OmegaWeight(power=1 - d * lam)


def zeta_partial(trace: SumTrace, w: OmegaWeight, N: int) -> float:
    """sum of omega(i) over 1 <= i <= N with S_i = 0."""
    trace._check(N)
    hits = np.flatnonzero(trace.sums[1 : N + 1] == 0) + 1
    return math.fsum(omega_eval(w, int(i)) for i in hits)


def rho_quantile(range_samples: Sequence[int], eps1) -> int:
    """Least n such that a fraction >= eps1 of the samples is <= n."""
    if not range_samples:
        raise ValueError("need at least one sample")
    e = _exact(eps1)
    if not 0 < e <= 1:
        raise ValidationError("eps1 must lie in (0, 1]")
    ordered = sorted(range_samples)
    return ordered[math.ceil(e * len(ordered)) - 1]


@dataclass
class CrowdedBins:
    bins: set
    ball_total: int
    threshold: Fraction

    def lemma_bound(self, N: int, eps2) -> Fraction:
        return (1 - _exact(eps2)) * N


def crowded_bins(trace: SumTrace, N: int, rho, eps2) -> CrowdedBins:
    """Values hit at least eps2*N/rho times among S_1..S_N."""
    trace._check(N)
    if rho < 1:
        raise ValidationError("rho must be >= 1")
    thr = _exact(eps2) * N / _exact(rho)
    vals, counts = np.unique(trace.sums[1 : N + 1], return_counts=True)
    keep = [(int(v), int(c)) for v, c in zip(vals, counts) if c >= thr]
    return CrowdedBins({v for v, _ in keep}, sum(c for _, c in keep), thr)


@dataclass
class PredictingReport:
    count: int
    lower_bound: Fraction


def predicting_balls(trace: SumTrace, N: int, rho, eps2, eps3) -> PredictingReport:
    """#{m <= N : S_{m+n} = S_m for at least eps2*eps3*N/rho values n in [1, N]}."""
    if trace.horizon < 2 * N:
        raise ValueError("trace horizon must be at least 2N")
    e2, e3, r = _exact(eps2), _exact(eps3), _exact(rho)
    thr = e2 * e3 * N / r
    s = trace.sums[1 : 2 * N + 1].astype(np.int64)
    span = 2 * N + 1
    keys = (s - s.min()) * span + np.arange(1, 2 * N + 1)
    ordered = np.sort(keys)
    km = keys[:N]
    repeats = np.searchsorted(ordered, km + N, side="right") - np.searchsorted(ordered, km, side="right")
    count = int(np.count_nonzero(repeats >= math.ceil(thr)))
    return PredictingReport(count, (1 - e2) * (1 - e3) * N - r)


@dataclass
class BkReport:
    fraction: float
    lower_bound: float
    samples: int


def bk_fraction(f: StepCocycle, cf: ContinuedFraction, N: int, rho, eps2, eps3,
                sample_count: int, seed: int, eps1=1) -> BkReport:
    """Share of random base points with many zero sums before time N."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = random.Random(seed)
    thr = _exact(eps2) * _exact(eps3) * N / _exact(rho)
    good = 0
    for _ in range(sample_count):
        x = CirclePoint(Fraction(rng.getrandbits(53), 1 << 53))
        good += zero_hits(ergodic_sums(f, x, N, cf), N) >= thr
    bound = float(eps1) * (1 - float(eps2)) * (1 - float(eps3)) - float(rho) / N
    return BkReport(good / sample_count, bound, sample_count)


def gap_condition(Ns: Sequence, rhos: Sequence, delta) -> list[bool]:
    """N_k/rho_k >= delta/(1-delta) * sum_{i<k} N_i/rho_i, for each k."""
    if len(Ns) != len(rhos):
        raise ValueError("Ns and rhos differ in length")
    d = _exact(delta)
    if not 0 < d < 1:
        raise ValidationError("delta must lie in (0, 1)")
    out = []
    acc = Fraction(0)
    for n, r in zip(Ns, rhos):
        ratio = _exact(n) / _exact(r)
        out.append(ratio >= d / (1 - d) * acc)
        acc += ratio
    return out


def divergence_series(Ns: Sequence, rhos: Sequence, w: OmegaWeight, K: int) -> list[float]:
    """Partial sums of omega(N_k) * N_k / rho_k for k = 1..K."""
    if K > min(len(Ns), len(rhos)):
        raise ValueError("K exceeds the supplied levels")
    out, acc = [], 0.0
    for n, r in zip(Ns[:K], rhos[:K]):
        # log form keeps huge N_k finite
        acc += math.exp(math.log(omega_eval(w, n)) + math.log(n) - math.log(r))
        out.append(acc)
    return out


def ck_rotation_exact(cf: ContinuedFraction, K: int) -> list[Fraction]:
    """C_k = (a_k/q_k) * sum_{i<k} q_i/a_i with a_k the digit sum, k = 1..K."""
    cf.ensure(K)
    out, acc = [], Fraction(0)
    for k in range(1, K + 1):
        ak = cf.digit_sum(k)
        out.append(Fraction(ak, cf.q(k)) * acc)
        acc += Fraction(cf.q(k), ak)
    return out


def ck_rotation(cf: ContinuedFraction, K: int) -> list[float]:
    return [float(c) for c in ck_rotation_exact(cf, K)]


def _check_iet_params(theta1, theta2, M, gamma):
    if not (0 <= theta2 < theta1) or gamma <= 1 or M < 1:
        raise ValidationError("need 0 <= theta2 < theta1, gamma > 1, M >= 1")


def ck_iet_parts(theta1: float, theta2: float, M: float, gamma: float, k: int) -> tuple[float, float]:
    """C_k split at the cutoff T(k) past which gamma-decay beats k^(M+1)."""
    _check_iet_params(theta1, theta2, M, gamma)
    rate = (theta2 - theta1) / theta1 * math.log(gamma)
    cut = int(theta1 * (M + 1) * math.log(k) / ((theta1 - theta2) * math.log(gamma))) if k > 1 else 0

    def term(j):
        return math.exp((M + 1) * math.log(k / (k - j)) + j * rate)

    head = math.fsum(term(j) for j in range(1, min(cut, k - 1) + 1))
    rest = math.fsum(term(j) for j in range(max(cut, 0) + 1, k))
    return head, rest


def ck_iet(theta1: float, theta2: float, M: float, gamma: float, K: int) -> list[float]:
    """C_k = sum_{j<k} (k/(k-j))^(M+1) * gamma^(j(theta2-theta1)/theta1), k = 1..K."""
    return [sum(ck_iet_parts(theta1, theta2, M, gamma, k)) for k in range(1, K + 1)]


@dataclass(frozen=True)
class RecurrenceConfig:
    eps1: float = 1.0
    eps2: float = 0.5
    eps3: float = 0.5
    delta: float = 0.5

    def __post_init__(self):
        if not 0 < self.eps1 <= 1:
            raise ValidationError("eps1 must lie in (0, 1]")
        for name in ("eps2", "eps3", "delta"):
            if not 0 < getattr(self, name) < 1:
                raise ValidationError(f"{name} must lie in (0, 1)")
