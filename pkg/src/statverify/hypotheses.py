"""Hypotheses: subsets of worlds presented through the weak-topology sub-basis.

The generators are ``{mu : mu(A) > b}`` for events ``A`` of the algebra and
rational ``b``.  Finite conjunctions and disjunctions of generators are open,
their complements are closed, and countable unions of closed pieces (given by
an enumerator) are F-sigma.  :func:`contains` is the exact membership oracle
that every test uses as ground truth.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence, Union

from .measures import Event, Number, World, prob, require_feasible, to_fraction


class Membership(str, enum.Enum):
    IN = "in"
    OUT = "out"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


IN, OUT, UNKNOWN = Membership.IN, Membership.OUT, Membership.UNKNOWN


@dataclass(frozen=True)
class SubBasic:
    """``{mu : mu(event) > b}``.

    ``b`` may fall outside [0, 1]: below 0 the set is every world, from 1 up
    it is empty.
    """

    event: Event
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "b", to_fraction(self.b))

    def __str__(self):
        return f"P{self.event} > {self.b}"


@dataclass(frozen=True)
class Band:
    """``{mu : a < mu(event) < b}``."""

    event: Event
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", to_fraction(self.a))
        object.__setattr__(self, "b", to_fraction(self.b))
        if not self.a < self.b:
            raise ValueError("band needs a < b")

    def __str__(self):
        return f"{self.a} < P{self.event} < {self.b}"


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("And needs at least one child")

    def __str__(self):
        return "(" + " & ".join(map(str, self.children)) + ")"


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("Or needs at least one child")

    def __str__(self):
        return "(" + " | ".join(map(str, self.children)) + ")"


OpenForm = Union[SubBasic, Band, And, Or]


@dataclass(frozen=True)
class ClosedComplement:
    """Every world outside an open-form hypothesis."""

    open: OpenForm

    def __post_init__(self):
        if not is_open_form(self.open):
            raise ValueError("ClosedComplement wraps open-form hypotheses only")

    def __str__(self):
        return f"not {self.open}"


@dataclass(frozen=True, eq=False)
class FSigma:
    """Countable union of closed pieces ``C_1, C_2, ...``.

    ``enumerator(i)`` must return a :class:`ClosedComplement` for every
    ``i >= 1``.  Use :meth:`of` for a finite list; the last piece then repeats.
    """

    enumerator: Callable[[int], ClosedComplement]
    name: str = "F"
    length: Optional[int] = None

    @classmethod
    def of(cls, pieces: Sequence, name: str = "F") -> "FSigma":
        pieces = tuple(p if isinstance(p, ClosedComplement) else ClosedComplement(p.open)
                       for p in pieces)
        if not pieces:
            raise ValueError("need at least one closed piece")
        return cls(lambda i: pieces[min(i, len(pieces)) - 1], name, len(pieces))

    def piece(self, i: int) -> ClosedComplement:
        if i < 1:
            raise IndexError("pieces are indexed from 1")
        c = self.enumerator(i)
        if not isinstance(c, ClosedComplement):
            raise TypeError(f"piece {i} of {self.name} is not a ClosedComplement")
        return c

    def pieces(self, upto: int) -> Iterator[ClosedComplement]:
        for i in range(1, upto + 1):
            yield self.piece(i)

    def __str__(self):
        return self.name


Hypothesis = Union[SubBasic, Band, And, Or, ClosedComplement, FSigma]


def is_open_form(h) -> bool:
    if isinstance(h, (SubBasic, Band)):
        return True
    if isinstance(h, (And, Or)):
        return all(is_open_form(c) for c in h.children)
    return False


def events_of(h, depth: int = 1) -> list[Event]:
    """Events mentioned by ``h`` (F-sigma pieces up to ``depth``)."""
    if isinstance(h, (SubBasic, Band)):
        return [h.event]
    if isinstance(h, (And, Or)):
        return [e for c in h.children for e in events_of(c, depth)]
    if isinstance(h, ClosedComplement):
        return events_of(h.open, depth)
    if isinstance(h, FSigma):
        return [e for p in h.pieces(depth) for e in events_of(p, depth)]
    raise TypeError(f"not a hypothesis: {h!r}")


def _as_membership(flag: bool) -> Membership:
    return IN if flag else OUT


def contains(h, world: World, depth: int = 1) -> Membership:
    """Exact membership of ``world`` in ``h``.

    F-sigma membership is only semi-decidable: the answer is ``IN`` when a
    piece of index ``<= depth`` contains the world and ``UNKNOWN`` otherwise.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    for ev in events_of(h, depth):
        require_feasible(world, ev)
    return _contains(h, world, depth)


def _contains(h, world, depth) -> Membership:
    if isinstance(h, SubBasic):
        return _as_membership(prob(world, h.event) > h.b)
    if isinstance(h, Band):
        return _as_membership(h.a < prob(world, h.event) < h.b)
    if isinstance(h, And):
        vals = [_contains(c, world, depth) for c in h.children]
        if OUT in vals:
            return OUT
        return IN if all(v is IN for v in vals) else UNKNOWN
    if isinstance(h, Or):
        vals = [_contains(c, world, depth) for c in h.children]
        if IN in vals:
            return IN
        return OUT if all(v is OUT for v in vals) else UNKNOWN
    if isinstance(h, ClosedComplement):
        inner = _contains(h.open, world, depth)
        return {IN: OUT, OUT: IN}.get(inner, UNKNOWN)
    if isinstance(h, FSigma):
        for piece in h.pieces(depth):
            if _contains(piece, world, depth) is IN:
                return IN
        return UNKNOWN
    raise TypeError(f"not a hypothesis: {h!r}")


def band_as_intersection(event: Event, a: Number, b: Number) -> And:
    """Rewrite ``a < mu(A) < b`` as ``mu(A) > a`` and ``mu(A^c) > 1 - b``."""
    a, b = to_fraction(a), to_fraction(b)
    if not a < b:
        raise ValueError("band needs a < b")
    return And((SubBasic(event, a), SubBasic(~event, 1 - b)))


def closed_band(event: Event, lo: Number, hi: Number) -> ClosedComplement:
    """``lo <= mu(A) <= hi`` as the complement of ``mu(A^c) > 1-lo or mu(A) > hi``."""
    lo, hi = to_fraction(lo), to_fraction(hi)
    return ClosedComplement(Or((SubBasic(~event, 1 - lo), SubBasic(event, hi))))


@dataclass(frozen=True, eq=False)
class Partition:
    """An empirical problem: answers that split the configured worlds.

    Disjointness and exhaustiveness are checked only on the worlds handed to
    :meth:`validate`.
    """

    answers: tuple
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "answers", tuple(self.answers))
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.answers:
            raise ValueError("a partition needs at least one answer")
        if len(self.answers) != len(self.labels):
            raise ValueError("one label per answer")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("answer labels must be distinct")

    def __str__(self):
        return " / ".join(self.labels)

    def memberships(self, world: World, depth: int = 64) -> list[Membership]:
        return [contains(a, world, depth) for a in self.answers]

    def classify(self, world: World, depth: int = 64) -> str:
        """Label of the unique answer containing ``world``."""
        hits = [lab for lab, m in zip(self.labels, self.memberships(world, depth)) if m is IN]
        if len(hits) != 1:
            raise ValueError(f"{world!r} lies in {len(hits)} answers at depth {depth}")
        return hits[0]

    def validate(self, worlds: Sequence[World], depth: int = 64) -> None:
        for w in worlds:
            self.classify(w, depth)
