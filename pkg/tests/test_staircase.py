import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from omegarec.cocycle import CirclePoint, StepCocycle, ergodic_sums, zero_hits
from omegarec.errors import ValidationError
from omegarec.recurrence import OmegaWeight, zeta_partial
from omegarec.staircase import (
    LevelTower,
    StaircaseParams,
    Summable,
    coding_by_expansion,
    coding_of_point,
    drift,
    forge_alpha,
    level_drifts,
    level_histograms,
    level_lengths,
    level_word,
    max_hits,
    scale_bound,
    substitute,
    word_histogram,
    zeta_certificate,
    zeta_enclosure,
)
from omegarec.staircase.piecewise import JumpPoly

pair_lists = st.lists(st.tuples(st.integers(1, 4), st.integers(1, 3)), min_size=1, max_size=4)


def test_substitute_examples():
    assert substitute("A", 1, 1) == "AAC"
    assert substitute("B", 1, 1) == "ABC"
    assert substitute("A", 1, 2) == "AACAC"
    assert substitute("C", 2, 1) == "AABBCAABC"


def test_level_word_examples():
    p = StaircaseParams(((1, 1), (2, 1)))
    assert level_word(p, 0, "B") == "B"
    assert level_word(p, 1) == "AAC"
    assert level_word(p, 2).startswith(level_word(p, 1))
    with pytest.raises(ValidationError):
        level_word(StaircaseParams(((50, 3),) * 5), 5, cap=1000)


def test_level_lengths_examples():
    p = StaircaseParams(((1, 1),))
    assert level_lengths(p, 0) == (1, 1, 1)
    assert level_lengths(p, 1) == (3, 3, 5)


@settings(max_examples=60)
@given(pair_lists)
def test_lengths_against_convergents(pairs):
    p = StaircaseParams(tuple(pairs))
    cf = p.alpha()
    for n in range(1, len(pairs) + 1):
        a, b, c = level_lengths(p, n)
        assert a == cf.q(2 * n)
        assert c == cf.q(2 * n) + cf.q(2 * n - 1)
        # the B-word has the A-word's length, not q_2n + q_2n-1
        assert b == cf.q(2 * n)
        assert level_drifts(p, n) == (1, -1, -1)


@settings(max_examples=60)
@given(pair_lists)
def test_q_sandwich(pairs):
    p = StaircaseParams(tuple(pairs))
    cf = p.alpha()
    M = max(s for _, s in pairs)
    for n in range(len(pairs)):
        r_next = p.pair(n + 1)[0]
        assert 2 * r_next * cf.q(2 * n) < cf.q(2 * n + 2) < (3 * M + 1) * r_next * cf.q(2 * n)


def test_histogram_examples():
    h = level_histograms(StaircaseParams(((1, 1),)), 1)
    assert h.as_dict("A") == {1: 2, 2: 1}
    assert h.as_dict("B") == {1: 1, 0: 1, -1: 1}
    assert max_hits(StaircaseParams(((1, 1),)), 1) == 2


@settings(max_examples=40, deadline=None)
@given(pair_lists)
def test_histograms_match_words(pairs):
    p = StaircaseParams(tuple(pairs))
    tower = LevelTower(p)
    for n in range(len(pairs) + 1):
        if level_lengths(p, n)[2] > 200_000:
            break
        lvl = tower.level(n)
        for x in "ABC":
            w = level_word(p, n, x)
            assert lvl.as_dict(x) == word_histogram(w)
            assert sum(lvl.as_dict(x).values()) == lvl.lengths[x] == len(w)
            assert drift(w) == lvl.drifts[x]


def test_max_hits_with_huge_r_matches_brute_force_shape():
    # r = 10**30 at level 1: word A (A^r B^(r-1) C)^s hits level 1 exactly 2s+1 times... and 2s elsewhere
    for s in (1, 2, 3):
        small = max_hits(StaircaseParams(((5, s),)), 1)
        huge = max_hits(StaircaseParams(((10**30, s),)), 1)
        assert small == max(max(word_histogram(level_word(StaircaseParams(((5, s),)), 1, x)).values()) for x in "ABC")
        assert huge == small


def test_lemma_bound_random():
    rng = random.Random(5)
    for _ in range(20):
        pairs = tuple((rng.randint(1, 10), rng.randint(1, 2)) for _ in range(5))
        p = StaircaseParams(pairs)
        cf = p.alpha()
        tower = LevelTower(p)
        for n in range(2, 6):
            assert tower.level(n).max_hits() <= 11 * cf.q(2 * n - 2)


@settings(max_examples=40)
@given(st.dictionaries(st.integers(-50, 50), st.integers(0, 10**6), max_size=12), st.integers(-30, 30))
def test_jump_poly_running_sum(hist, shift):
    h = JumpPoly.from_counts(hist).shift(shift)
    p = h.running_sum()
    keys = sorted(k + shift for k in hist) or [0]
    acc = 0
    for k in range(keys[0] - 3, keys[-1] + 4):
        acc += hist.get(k - shift, 0)
        assert h(k) == hist.get(k - shift, 0)
        assert p(k) == acc == p.direct(k)
    assert h.pieces().maximum() == max(hist.values(), default=0)


def test_coding_examples():
    p = StaircaseParams(((1, 1),))
    assert coding_of_point(p, CirclePoint.zero(), 3) == "AAC"
    assert coding_of_point(p, CirclePoint.zero(), 1) == "A"


@pytest.mark.parametrize("pairs", list(itertools.product([1, 2], repeat=4)))
def test_origin_coding_is_limit_word(pairs):
    p = StaircaseParams(((pairs[0], pairs[1]), (pairs[2], pairs[3])))
    for n in (1, 2):
        w = level_word(p, n)
        assert coding_of_point(p, CirclePoint.zero(), len(w)) == w


def test_coding_drift_is_ergodic_sum():
    p = StaircaseParams(((2, 1), (3, 2)))
    x = CirclePoint(Fraction(3, 11))
    code = coding_of_point(p, x, 500)
    sums = ergodic_sums(StepCocycle.staircase(), x, 500, p.alpha()).sums
    assert drift(code) == sums[500]
    assert drift(code[:123]) == sums[123]


@settings(max_examples=25, deadline=None)
@given(pair_lists, st.integers(0, 2**30 - 1))
def test_expansion_matches_direct_coding(pairs, num):
    p = StaircaseParams(tuple(pairs))
    x = CirclePoint(Fraction(num, 2**30))
    assert coding_by_expansion(p, x, 2000) == coding_of_point(p, x, 2000)


def test_zeta_enclosure_brackets_exact():
    p = StaircaseParams(((2, 1), (3, 2), (5, 1)))
    cf = p.alpha()
    w = OmegaWeight(power=0.75)
    rng = random.Random(2)
    for _ in range(4):
        x = CirclePoint(Fraction(rng.getrandbits(40), 2**40))
        trace = ergodic_sums(StepCocycle.staircase(), x, 30_000, cf)
        exact = zeta_partial(trace, w, 30_000)
        enc = zeta_enclosure(p, x, 30_000, w)
        assert enc.lower <= exact <= enc.upper
        assert enc.zero_hits == zero_hits(trace, 30_000)


def test_forge_examples():
    assert forge_alpha(0.75, {"b0": 1, "ratio": 0.5}, 1, 0).pairs == ()
    with pytest.raises(ValidationError):
        forge_alpha(0.5, {"b0": 1, "ratio": 0.5}, 1, 2)


def test_forge_minimal_and_growing():
    b = Summable(1, 0.5)
    p = forge_alpha(0.75, b, 1, 4)
    rs = [r for r, _ in p.pairs]
    assert all(x < y for x, y in zip(rs, rs[1:]))
    tau = Fraction(0)
    for n, (r, s) in enumerate(p.pairs, start=1):
        prefix = StaircaseParams(p.pairs[: n - 1])
        val, tau_n = scale_bound(prefix, r, s, 0.75, 1, tau)
        assert val < math.log(b(n))
        if r > 1:
            assert scale_bound(prefix, r - 1, s, 0.75, 1, tau)[0] >= math.log(b(n))
        tau = tau_n


def test_forge_monotone_in_eps():
    # on a fixed prefix, a larger eps never needs a larger r_n
    b = Summable(1, 0.5)
    base = forge_alpha(0.75, b, 1, 2)
    for n in range(1, 4):
        prefix = StaircaseParams(base.pairs[: n - 1])
        target = math.log(b(n))
        minimal = []
        for eps in (0.6, 0.75, 0.9):
            r = 1
            while scale_bound(prefix, r, 1, eps, 1)[0] >= target:
                r += 1 if r < 64 else r
            minimal.append(r)
        assert minimal[0] >= minimal[1] >= minimal[2]


def test_certificate_dominates_small_case():
    p = StaircaseParams(((2, 1), (3, 1), (4, 1)))
    w = OmegaWeight(power=0.75)
    cf = p.alpha()
    N = cf.q(6)
    cert = zeta_certificate(p, 0.75, w, N)
    rng = random.Random(9)
    for _ in range(30):
        x = CirclePoint(Fraction(rng.getrandbits(30), 2**30))
        z = zeta_partial(ergodic_sums(StepCocycle.staircase(), x, N, cf), w, N)
        assert z <= cert.value
    with pytest.raises(ValidationError):
        zeta_certificate(p, 0.75, w, cf.q(7))
    with pytest.raises(ValidationError):
        zeta_certificate(p, 0.75, OmegaWeight(power=0.5), N)


def test_params_json():
    p = StaircaseParams(((3, 1), (10**20, 2)))
    assert StaircaseParams.from_json(p.to_json()) == p
    assert p.alpha().digits(5) == [6, 1, 2 * 10**20, 2, 2]
