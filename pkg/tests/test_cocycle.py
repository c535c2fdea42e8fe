from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omegarec.cocycle import (
    CirclePoint,
    StepCocycle,
    SumTrace,
    convergent_sum,
    denjoy_koksma_check,
    ergodic_sums,
    ergodic_sums_stepwise,
    evaluate,
    lyapunov_estimate,
    range_count,
    rotate,
    sample_points,
    zero_hits,
)
from omegarec.contfrac import ContinuedFraction, sample_gauss_kuzmin
from omegarec.errors import ValidationError

SQRT2 = ContinuedFraction.parse("[2,2,...]")


def test_rotate_examples():
    zero = CirclePoint.zero()
    assert rotate(zero, 2, SQRT2) == CirclePoint(Fraction(0), 2)
    assert rotate(zero, 3, SQRT2) == CirclePoint(Fraction(-1), 3)
    x = CirclePoint(Fraction(1, 7), 0)
    assert rotate(x, 0, SQRT2) == x


def test_evaluate_examples():
    f = StepCocycle.staircase()
    assert evaluate(f, CirclePoint.zero(), SQRT2) == 1
    assert evaluate(f, CirclePoint(Fraction(0), 1), SQRT2) == 1
    assert evaluate(f, CirclePoint(Fraction(1, 2)), SQRT2) == -1


def test_ergodic_sum_examples():
    f = StepCocycle.staircase()
    assert ergodic_sums(f, CirclePoint.zero(), 3, SQRT2).sums.tolist() == [0, 1, 2, 1]
    assert ergodic_sums(f, CirclePoint.zero(), 1, sample_gauss_kuzmin(4, 10)).sums[1] == 1
    z = ergodic_sums(StepCocycle.constant(0), CirclePoint(Fraction(1, 3)), 10, SQRT2)
    assert not z.sums.any()


def test_range_and_zero_hits():
    t = SumTrace.from_sums([0, 1, 2, 1, 2, 1])
    assert range_count(t, 5) == 2
    assert zero_hits(t, 5) == 0
    assert zero_hits(SumTrace.from_sums([0, 1, 0, 1, 0]), 4) == 2
    one = ergodic_sums(StepCocycle.constant(1), CirclePoint.zero(), 7, SQRT2)
    assert range_count(one, 7) == 7
    nil = ergodic_sums(StepCocycle.constant(0), CirclePoint.zero(), 9, SQRT2)
    assert range_count(nil, 7) == 1 and zero_hits(nil, 9) == 9
    with pytest.raises(ValueError):
        range_count(t, 6)


def test_counts_monotone():
    t = ergodic_sums(StepCocycle.staircase(), CirclePoint.zero(), 5000, SQRT2)
    rc = [range_count(t, n) for n in range(1, 5001, 37)]
    assert rc == sorted(rc)
    assert all(zero_hits(t, n) <= n for n in range(1, 5001, 37))


def _oracle_sums(f, x, N, alpha_digits, dps=200):
    """Orbit in 200-digit floats; returns sums and the closest approach to a breakpoint."""
    with mpmath.workdps(dps):
        cf = ContinuedFraction.from_rule(lambda i: alpha_digits[min(i, len(alpha_digits) - 1)], "t")
        alpha = cf.to_mpf(dps)
        bps = [mpmath.mpf(b.u.numerator) / b.u.denominator + b.v * alpha for b in f.breakpoints]
        bps = [b - mpmath.floor(b) for b in bps]
        y = mpmath.mpf(x.u.numerator) / x.u.denominator + x.v * alpha
        sums, s, closest = [0], 0, mpmath.mpf(1)
        for _ in range(N):
            frac = y - mpmath.floor(y)
            idx = 0
            for i, b in enumerate(bps):
                if frac >= b:
                    idx = i
                d = abs(frac - b)
                closest = min(closest, d, 1 - d)
            s += f.values[idx]
            sums.append(s)
            y += alpha
        return sums, closest


def test_matches_high_precision_oracle():
    digits = [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9]
    cf = ContinuedFraction.from_rule(lambda i: digits[min(i, len(digits) - 1)], "t")
    f = StepCocycle([CirclePoint.zero(), CirclePoint(Fraction(1, 3)), CirclePoint(Fraction(0), 1)], [1, 2, -3])
    f.validate(cf)
    x = CirclePoint(Fraction(5, 11))
    sums, closest = _oracle_sums(f, x, 10_000, digits)
    assert closest > mpmath.mpf(10) ** -50
    assert ergodic_sums(f, x, 10_000, cf).sums.tolist() == sums


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 300), st.integers(1, 300),
       st.fractions(0, 1, max_denominator=1000).filter(lambda q: q < 1))
def test_cocycle_additivity(seed, m, n, u):
    cf = sample_gauss_kuzmin(seed, 30)
    f = StepCocycle.staircase()
    x = CirclePoint(u)
    total = ergodic_sums(f, x, m + n, cf).sums[m + n]
    head = ergodic_sums(f, x, m, cf).sums[m]
    rest = ergodic_sums(f, rotate(x, m, cf), n, cf).sums[n]
    assert total == head + rest


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_fast_engine_matches_stepwise(seed):
    cf = sample_gauss_kuzmin(seed, 30)
    bp = CirclePoint.canonical(0, 1, cf)
    if cf.sign(bp.u - Fraction(1, 2), bp.v) <= 0:
        pts = [CirclePoint.zero(), bp, CirclePoint(Fraction(1, 2))]
    else:
        pts = [CirclePoint.zero(), CirclePoint(Fraction(1, 2)), bp]
    f = StepCocycle(pts, [1, -2, 1])
    x = rotate(CirclePoint.zero(), 3, cf)  # hits breakpoint orbits exactly
    a = ergodic_sums(f, x, 600, cf).sums
    b = ergodic_sums_stepwise(f, x, 600, cf).sums
    assert np.array_equal(a, b)


def test_convergent_sum_matches_orbit():
    f = StepCocycle.staircase()
    for seed in range(4):
        cf = sample_gauss_kuzmin(seed, 60)
        for k in range(1, 25):
            q = cf.q(k)
            if q > 500_000:
                break
            for x in (CirclePoint(Fraction(3, 7)), CirclePoint.canonical(0, 2, cf), CirclePoint.zero()):
                assert convergent_sum(f, x, k, cf) == ergodic_sums(f, x, q, cf).sums[q]


def test_denjoy_koksma_examples():
    f = StepCocycle.staircase()
    rec = denjoy_koksma_check(f, SQRT2, 1, 50)
    assert rec.q == 2 and rec.bound == 4 and rec.holds
    assert denjoy_koksma_check(StepCocycle.constant(0), SQRT2, 5, 10).max_abs_sum == 0
    rec = denjoy_koksma_check(f, ContinuedFraction.parse("gauss:7:40"), 10, 1000, seed=1)
    assert rec.holds
    with pytest.raises(ValidationError):
        denjoy_koksma_check(StepCocycle.constant(1), SQRT2, 3, 10)


def test_lyapunov_examples():
    hs = [10, 100, 1000, 10000]
    assert lyapunov_estimate(StepCocycle.constant(0), SQRT2, hs, 3).slope == 0
    assert lyapunov_estimate(StepCocycle.constant(1), SQRT2, hs, 3).slope == pytest.approx(1)


def test_validation():
    with pytest.raises(ValidationError):
        StepCocycle([CirclePoint(Fraction(1, 3))], [1])
    bad = StepCocycle([CirclePoint.zero(), CirclePoint(Fraction(2, 3)), CirclePoint(Fraction(1, 3))], [1, 0, -1])
    with pytest.raises(ValidationError):
        bad.validate(SQRT2)
    f = StepCocycle.staircase()
    assert StepCocycle.from_json(f.to_json()) == f
    assert f.variation == 4 and f.has_zero_mean()


@pytest.mark.parametrize("seed", range(8))
def test_convergent_sum_small_levels(seed):
    # low levels, including breakpoint orbits where points sit exactly on the grid
    f = StepCocycle.staircase()
    cf = ContinuedFraction.gauss_kuzmin(seed, 30)
    for x in sample_points(cf, f, 3, seed, orbit=3, backward=3):
        sums = ergodic_sums(f, x, cf.q(7), cf).sums
        for k in range(1, 8):
            assert convergent_sum(f, x, k, cf) == sums[cf.q(k)]
