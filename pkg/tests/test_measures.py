from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from statverify.measures import (
    COIN, REAL_LINE, Interval, NotContinuitySet, SampleSpace, SampleVector, SpaceMismatch,
    bernoulli, empirical_count, finite_world, float_down, float_up, is_feasible,
    parse_interval, prob, real_world, sample, sample_paths, to_fraction, uniform,
    weak_convergence_check,
)


def test_prob_examples(unif, fair, heads):
    assert prob(bernoulli(0.6), heads) == Fraction(3, 5)
    assert prob(fair, COIN.whole()) == 1
    assert prob(unif, REAL_LINE.whole()) == 1
    assert prob(unif, REAL_LINE.open_interval(0.25, 0.5)) == Fraction(1, 4)


def test_prob_space_mismatch(unif, heads):
    with pytest.raises(SpaceMismatch, match="space mismatch"):
        prob(unif, heads)
    other = SampleSpace.finite("abc")
    with pytest.raises(SpaceMismatch):
        heads | other.singleton("a")


def test_atoms_follow_endpoint_tags(lumpy):
    closed = REAL_LINE.event(["[1/2, 1)"])
    opened = REAL_LINE.event(["(1/2, 1)"])
    assert prob(lumpy, closed) - prob(lumpy, opened) == Fraction(3, 10)
    assert prob(lumpy, REAL_LINE.event(["(1, 3)"])) == Fraction(1, 5)


def test_float_input_goes_through_repr():
    assert to_fraction(0.1) == Fraction(1, 10)
    assert to_fraction("3/7") == Fraction(3, 7)
    q = Fraction(1, 3)
    assert float_down(q) < q < float_up(q)
    assert float_down(Fraction(1, 2)) == float_up(Fraction(1, 2)) == 0.5


def test_bad_worlds():
    with pytest.raises(ValueError):
        bernoulli(1.2)
    with pytest.raises(ValueError):
        finite_world(COIN, [0.5, 0.6])
    with pytest.raises(ValueError, match="distinct"):
        real_world([(0, 1, [1])], [(0, 0), (0, 0)])
    with pytest.raises(ValueError):
        real_world([(0, 1, [Fraction(1, 2)])])
    with pytest.raises(ValueError):
        SampleSpace.finite("aa")
    with pytest.raises(ValueError):
        REAL_LINE.open_interval(1, 1)


def test_near_unit_mass_is_renormalised():
    w = finite_world(COIN, [0.3, 0.7 + 1e-13])
    assert sum(w.probs) == 1


def test_sampling_degenerate_and_deterministic(fair):
    assert "".join(sample(bernoulli(1), 5, seed=123).points) == "HHHHH"
    a = sample(fair, 10_000, seed=42)
    b = sample(fair, 10_000, seed=42)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, sample(fair, 10_000, seed=43).values)


def test_large_sample_frequency(fair, heads):
    # binomial 99.9% band for n = 1e5 is about +-0.0052, well inside 0.01
    n = 100_000
    freq = empirical_count(sample(fair, n, seed=2024), heads) / n
    assert abs(freq - 0.5) < 0.01


@given(st.integers(1, 400), st.integers(0, 400), st.integers(0, 2**63))
def test_prefix_property(n, extra, seed):
    w = uniform(-1, 3)
    short, long = sample(w, n, seed), sample(w, n + extra, seed)
    assert np.array_equal(short.values, long.values[:n])


def test_paths_match_single_samples(fair):
    paths = sample_paths(fair, 50, 9, [3, 0, 7])
    for row, t in enumerate([3, 0, 7]):
        assert np.array_equal(paths.values[row], sample(fair, 50, 9, trial=t).values)


def test_empirical_count_examples(heads):
    assert empirical_count(SampleVector.from_points(COIN, "HHTH"), heads) == 3
    assert empirical_count(SampleVector.from_points(COIN, "HHTH"), COIN.empty()) == 0
    s = SampleVector.from_points(REAL_LINE, [0.1, 0.5, 0.9])
    assert empirical_count(s, REAL_LINE.open_interval(0.25, 0.75)) == 1


def test_count_at_rational_boundary():
    # 1/3 is not a double; membership must still be exact on both sides
    lo, hi = float_down(Fraction(1, 3)), float_up(Fraction(1, 3))
    s = SampleVector.from_points(REAL_LINE, [lo, hi])
    assert empirical_count(s, REAL_LINE.event(["(1/3, 1)"])) == 1
    assert empirical_count(s, REAL_LINE.event(["[1/3, 1)"])) == 1
    assert empirical_count(s, REAL_LINE.event(["(0, 1/3]"])) == 1
    s = SampleVector.from_points(REAL_LINE, [0.5])
    assert empirical_count(s, REAL_LINE.event(["(0, 1/2]"])) == 1
    assert empirical_count(s, REAL_LINE.event(["(0, 1/2)"])) == 0


def test_feasibility_examples(unif, lumpy, heads):
    assert is_feasible(bernoulli(0.3), heads)
    assert is_feasible(unif, REAL_LINE.open_interval(0.25, 0.5))
    assert not is_feasible(lumpy, REAL_LINE.open_interval(0.25, 0.5))
    assert is_feasible(lumpy, REAL_LINE.open_interval(0.25, 0.4))


def test_weak_convergence_examples(heads):
    tails = COIN.singleton("T")
    seq = [bernoulli(Fraction(1, 2) + Fraction(1, 2**k)) for k in range(1, 21)]
    ok, report = weak_convergence_check(seq, bernoulli(0.5), [heads, tails], 0.01)
    assert ok and report["{H}"] == pytest.approx(2**-16)
    assert weak_convergence_check([bernoulli(0.3)] * 4, bernoulli(0.3), [heads], 1e-9)[0]
    ok, report = weak_convergence_check([bernoulli(0.9)] * 5, bernoulli(0.5), [heads], 0.1)
    assert not ok and report["{H}"] == pytest.approx(0.4)


def test_weak_convergence_rejects_discontinuity_sets(lumpy):
    with pytest.raises(NotContinuitySet, match="not a continuity set"):
        weak_convergence_check([lumpy], lumpy, [REAL_LINE.open_interval(0, 0.5)], 0.1)


# --- property tests over random events --------------------------------------

ENDS = [Fraction(k, 8) for k in range(-8, 17)]


@st.composite
def real_events(draw):
    n = draw(st.integers(0, 4))
    ivs = []
    for _ in range(n):
        lo, hi = sorted(draw(st.lists(st.sampled_from(ENDS), min_size=2, max_size=2, unique=True)))
        ivs.append(Interval(lo, draw(st.booleans()), hi, draw(st.booleans())))
    return REAL_LINE.event(ivs)


coin_events = st.sets(st.sampled_from("HT")).map(COIN.event)
GRID = [Fraction(k, 32) for k in range(-40, 80)]


def _extension(e):
    return tuple(e.contains(x) for x in GRID)


@given(real_events(), real_events())
def test_real_algebra_closure_and_feasibility(a, b):
    w = real_world([(-1, 2, [Fraction(1, 3)])], label="atomless")
    for e in (a | b, a & b, ~a, a - b):
        assert e.canonical() == e
        assert is_feasible(w, e)
    assert _extension(a | b) == tuple(x or y for x, y in zip(_extension(a), _extension(b)))
    assert _extension(a & b) == tuple(x and y for x, y in zip(_extension(a), _extension(b)))
    assert _extension(~a) == tuple(not x for x in _extension(a))
    assert ~~a == a


@given(real_events(), real_events())
def test_boundary_subadditive(a, b):
    for e in (a | b, a & b):
        assert e.endpoints() <= a.endpoints() | b.endpoints()
    assert (~a).endpoints() == a.endpoints()


@given(real_events(), real_events())
def test_canonical_form_is_extensional(a, b):
    # grid spacing 1/32 is finer than the endpoint grid 1/8, and includes midpoints
    assert (a == b) == (_extension(a) == _extension(b))


@given(real_events(), real_events())
def test_prob_additive_on_disjoint_events(a, b):
    w = real_world([(-1, 0, [Fraction(1, 4)]), (0, 1, [Fraction(1, 8), Fraction(1, 1)])],
                   [(Fraction(3, 8), Fraction(1, 8))])
    b = b - a
    assert prob(w, a | b) == prob(w, a) + prob(w, b)
    assert prob(w, a) + prob(w, ~a) == 1


@given(coin_events, coin_events, st.fractions(0, 1))
def test_coin_algebra(a, b, p):
    w = bernoulli(p)
    assert prob(w, a | b) + prob(w, a & b) == prob(w, a) + prob(w, b)
    assert is_feasible(w, ~a)


def test_parse_interval():
    assert parse_interval("(1/4, 1/2]") == Interval(Fraction(1, 4), False, Fraction(1, 2), True)
    assert parse_interval("(-inf, 0)").lo == -math.inf
    with pytest.raises(ValueError):
        parse_interval("1/4, 1/2")


@pytest.mark.parametrize("world", [uniform(0, 1),
                                   real_world([(0, 1, [0, 2])]),
                                   real_world([(0, 1, [Fraction(1, 2)])], [(Fraction(1, 4), Fraction(1, 2))])])
def test_real_sampler_matches_cdf(world):
    x = sample(world, 40_000, seed=5).values
    for q in (Fraction(1, 5), Fraction(1, 2), Fraction(4, 5)):
        exact = float(prob(world, REAL_LINE.event([Interval(-math.inf, False, q, True)])))
        se = math.sqrt(exact * (1 - exact) / len(x))
        assert abs((x <= float(q)).mean() - exact) < 5 * se + 1e-9
