"""Named worlds, hypotheses and problems used as running examples."""
from __future__ import annotations

from fractions import Fraction

from .hypotheses import (
    ClosedComplement, FSigma, Partition, SubBasic, band_as_intersection, closed_band,
)
from .measures import COIN, Event, bernoulli, to_fraction, uniform
from .verifiers import disjoin, subbasic_verifier

HEADS = COIN.singleton("H")
TAILS = COIN.singleton("T")


def bias_above(b) -> SubBasic:
    """``{mu : mu({H}) > b}`` on the coin."""
    return SubBasic(HEADS, to_fraction(b))


def bias_at_most(b) -> FSigma:
    """``{mu : mu({H}) <= b}`` as a single closed piece."""
    return FSigma.of([ClosedComplement(bias_above(b))], f"P{{H}} <= {to_fraction(b)}")


def band_union(event: Event, lo, hi, name: str = "") -> FSigma:
    """``lo < mu(A) < hi`` as the union of closed bands ``[lo + 1/j, hi - 1/j]``."""
    lo, hi = to_fraction(lo), to_fraction(hi)
    return FSigma(lambda j: closed_band(event, lo + Fraction(1, j), hi - Fraction(1, j)),
                  name or f"{lo} < P{event} < {hi}")


def three_cell_bias() -> Partition:
    """Coin bias at most 1/3, strictly between 1/3 and 2/3, or at least 2/3."""
    third, two_thirds = Fraction(1, 3), Fraction(2, 3)
    return Partition(
        [FSigma.of([ClosedComplement(bias_above(third))], "low"),
         band_union(HEADS, third, two_thirds, "mid"),
         FSigma.of([ClosedComplement(SubBasic(TAILS, third))], "high")],
        ["low", "mid", "high"])


def dyadic_union(event: Event, base, alpha):
    """Disjunction of ``mu(A) > base + 2**-i`` over ``i >= 1``; equals ``mu(A) > base``."""
    base = to_fraction(base)

    def member(i):
        h = SubBasic(event, base + Fraction(1, 2**i))
        return h, lambda a, h=h: subbasic_verifier(h, a)

    return disjoin(member, alpha, target=SubBasic(event, base))


def coin_sequence(base=Fraction(1, 2), k_max: int = 20):
    """``Bernoulli(base + 2**-k)`` for ``k = 1..k_max``."""
    base = to_fraction(base)
    return [bernoulli(base + Fraction(1, 2**k)) for k in range(1, k_max + 1)]


def coin_algebra():
    """All four events of the coin space."""
    return [COIN.empty(), HEADS, TAILS, COIN.whole()]


WORLDS = {
    "fair-coin": lambda: bernoulli(Fraction(1, 2), "fair-coin"),
    "uniform": lambda: uniform(0, 1, "uniform"),
}

HYPOTHESES = {
    "bias-above-half": lambda: bias_above(Fraction(1, 2)),
    "bias-at-most-half": lambda: bias_at_most(Fraction(1, 2)),
    "middle-band": lambda: band_as_intersection(HEADS, Fraction(3, 10), Fraction(7, 10)),
    "middle-third": lambda: band_union(HEADS, Fraction(1, 3), Fraction(2, 3)),
}

PARTITIONS = {
    "three-cell-bias": three_cell_bias,
}
