import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from omegarec.cocycle import CirclePoint, StepCocycle, ergodic_sums
from omegarec.contfrac import ContinuedFraction
from omegarec.errors import PrecisionError, ValidationError
from omegarec.iet import (
    Iet,
    IetCocycle,
    RauzyLoop,
    _Cells,
    _orbit_exact,
    birkhoff_sup_growth,
    conze_scales,
    iet_ergodic_sums,
    iet_omega,
    loop_spectrum,
    matrix_spectrum,
    periodic_iet_from_loop,
    rauzy_step,
    self_similarity_residual,
    traverse_loop,
)
from omegarec.recurrence import divergence_series, omega_eval

GOLDEN = (1 + math.sqrt(5)) / 2
GENUS2 = ("top", "top", "bottom", "top", "bottom", "bottom", "top", "bottom")


def genus2_loop():
    return RauzyLoop.from_permutation([4, 3, 2, 1], GENUS2)


def test_rauzy_step_examples():
    new, move, E = rauzy_step(Iet.from_lengths(["0.3", "0.7"], [2, 1]))
    assert move == "bottom"
    assert new.interval_lengths() == pytest.approx([3 / 7, 4 / 7], abs=1e-15)
    assert E == ((1, 0), (1, 1))
    new, move, E = rauzy_step(Iet.from_lengths(["0.7", "0.3"], [2, 1]))
    assert move == "top"
    assert new.interval_lengths() == pytest.approx([4 / 7, 3 / 7], abs=1e-15)
    assert E == ((1, 1), (0, 1))


def test_rauzy_step_tie_raises():
    with pytest.raises(PrecisionError):
        rauzy_step(Iet.from_lengths(["0.5", "0.5"], [2, 1]))


@settings(max_examples=50)
@given(st.lists(st.integers(1, 10**6), min_size=4, max_size=4))
def test_matrix_reconstructs_lengths(raw):
    it = Iet.from_lengths([Fraction(r, sum(raw)) for r in raw], [4, 3, 2, 1])
    try:
        new, _, E = rauzy_step(it, normalize=False)
    except PrecisionError:
        return
    for i in range(4):
        lo = sum(E[i][j] * new.lengths[j][0] for j in range(4))
        hi = sum(E[i][j] * new.lengths[j][1] for j in range(4))
        assert lo <= it.lengths[i][0] <= it.lengths[i][1] <= hi


def test_invalid_iets():
    with pytest.raises(ValidationError):
        Iet.from_lengths(["0.5", "0.5"], [1, 2])  # reducible
    with pytest.raises(ValidationError):
        Iet.from_lengths(["0.5", "-0.1", "0.6"], [3, 2, 1])
    with pytest.raises(ValidationError):
        RauzyLoop.from_permutation([2, 1], ["top", "top", "left"])


def test_loop_validation():
    with pytest.raises(ValidationError):
        periodic_iet_from_loop(RauzyLoop.from_permutation([2, 1], []))
    with pytest.raises(ValidationError):
        loop_spectrum(RauzyLoop.from_permutation([2, 1], ["top", "top"]))
    with pytest.raises(ValidationError):
        RauzyLoop.from_permutation([4, 3, 2, 1], ["top"])  # does not close up


def test_golden_loop():
    loop = RauzyLoop.golden()
    assert loop.matrix == ((2, 1), (1, 1))
    it = periodic_iet_from_loop(loop, 256)
    a, b = it.interval_lengths()
    assert a / b == pytest.approx(GOLDEN, rel=1e-15)
    assert self_similarity_residual(it, loop) <= 1e-12
    end, R = traverse_loop(it, loop)
    assert R == loop.matrix


def test_genus_two_loop_self_similar():
    loop = genus2_loop()
    it = periodic_iet_from_loop(loop, 256)
    assert self_similarity_residual(it, loop) <= 1e-60
    assert sum(it.interval_lengths()) == pytest.approx(1, abs=1e-15)


def test_spectrum():
    sp = loop_spectrum(RauzyLoop.golden())
    assert sp.theta1 == pytest.approx(math.log((3 + math.sqrt(5)) / 2), abs=1e-12)
    assert sp.theta2 == 0 and sp.m_jordan == 1
    sp4 = loop_spectrum(genus2_loop())
    assert 0 < sp4.theta2 < sp4.theta1
    assert sp4.m_intervals == 4


def test_jordan_block_detection():
    # eigenvalues 4, 0, 0 with a single eigenvector for 0
    sp = matrix_spectrum(((1, 1, 1), (1, 1, 1), (1, 3, 2)))
    assert sp.theta1 == pytest.approx(math.log(4), abs=1e-12)
    assert sp.theta2 == 0 and sp.m_jordan == 2
    assert matrix_spectrum(((2, 1), (1, 1))).m_jordan == 1
    sq = loop_spectrum(RauzyLoop.from_permutation([2, 1], ["top", "bottom", "top", "bottom"]))
    assert sq.theta1 == pytest.approx(2 * loop_spectrum(RauzyLoop.golden()).theta1, abs=1e-12)


def test_iet_omega():
    w = iet_omega(loop_spectrum(RauzyLoop.golden()), 1)
    assert w.power == 1 and w.log_power == 1
    sp = loop_spectrum(genus2_loop())
    half = type(sp)(1.0, 0.5, 1, 4, ())
    w = iet_omega(half, 2)
    n = 10**8
    assert omega_eval(w, n) == pytest.approx(math.log(n) / (n**0.5 * math.log(math.log(n))), rel=1e-12)


def test_conze_divergence_terms():
    sp = loop_spectrum(RauzyLoop.golden())
    w = iet_omega(sp, 2)
    Ns, rhos = conze_scales(sp, 2.0, 1000, C=3.0)
    partial = divergence_series(Ns, rhos, w, 1000)
    for k in (200, 500, 1000):
        term = partial[k - 1] - partial[k - 2]
        closed = math.log(2) / (3.0 * k * math.log(k * math.log(2)))
        assert term == pytest.approx(closed, rel=1e-9)


def test_zero_cocycle():
    it = periodic_iet_from_loop(RauzyLoop.golden())
    assert not iet_ergodic_sums(it, IetCocycle((0, 0)), Fraction(1, 3), 1000).sums.any()
    assert birkhoff_sup_growth(it, IetCocycle((0, 0)), [10, 100, 1000], 4).exponent == 0


def test_rotation_path_agreement():
    it = periodic_iet_from_loop(RauzyLoop.golden())
    cf = ContinuedFraction.parse("[2,1,1,...]")  # rotation by the shorter length
    for x in (Fraction(0), Fraction(1, 3), Fraction(123456789, 2**30)):
        a = iet_ergodic_sums(it, IetCocycle.halves(), x, 50_000).sums
        b = ergodic_sums(StepCocycle.staircase(), CirclePoint(x), 50_000, cf).sums
        assert (a == b).all()


def test_fast_walk_matches_full_width():
    it = periodic_iet_from_loop(genus2_loop())
    phi = IetCocycle.halves()
    cells = _Cells.build(it, phi)
    x = Fraction(5, 7)
    assert (iet_ergodic_sums(it, phi, x, 20_000).sums == _orbit_exact(cells, x, 20_000)).all()


def test_per_interval_values():
    it = Iet.from_lengths(["0.25", "0.75"], [2, 1])
    sums = iet_ergodic_sums(it, IetCocycle((3, -1)), Fraction(1, 10), 8).sums
    # rotation by 3/4 from 0.1: 0.1, 0.85, 0.6, 0.35, 0.1, ...
    assert sums.tolist() == [0, 3, 2, 1, 0, 3, 2, 1, 0]


def test_growth_requires_zero_mean():
    it = periodic_iet_from_loop(RauzyLoop.golden())
    with pytest.raises(ValidationError):
        birkhoff_sup_growth(it, IetCocycle((1, -1)), [10, 100], 2)


def test_golden_growth_exponent():
    it = periodic_iet_from_loop(RauzyLoop.golden())
    fit = birkhoff_sup_growth(it, IetCocycle.halves(), [2**k for k in range(8, 21)], 8, seed=1)
    assert fit.exponent <= 0.15


def test_genus_two_growth_and_bound():
    loop = genus2_loop()
    sp = loop_spectrum(loop)
    it = periodic_iet_from_loop(loop)
    phi = IetCocycle.halves()
    fit = birkhoff_sup_growth(it, phi, [2**k for k in range(8, 19)], 8, seed=2)
    assert fit.exponent <= sp.theta2 / sp.theta1 + 0.1
    scale = [math.log(h) ** (sp.m_jordan + 1) * h ** (sp.theta2 / sp.theta1) * phi.variation
             for h in fit.horizons]
    assert max(m / s for m, s in zip(fit.max_sums, scale)) <= 1


def test_json_round_trip():
    it = periodic_iet_from_loop(RauzyLoop.golden(), 128)
    back = Iet.from_json(it.to_json(), 128)
    assert back.permutation == [2, 1]
    assert back.interval_lengths() == pytest.approx(it.interval_lengths(), abs=1e-30)
    loop = genus2_loop()
    assert RauzyLoop.from_json(loop.to_json()) == loop
    with pytest.raises(ValidationError):
        RauzyLoop.from_json({"moves": [], "extra": 1})
