"""Sample spaces, events, probability worlds and seeded i.i.d. sampling.

Two kinds of sample space are supported: a finite alphabet with the discrete
topology, and the real line with open rational intervals as its basis.  Events
are finite Boolean combinations of basis sets held in a canonical form, so the
boundary of an event is just its set of finite endpoints and feasibility
(zero boundary mass) can be decided exactly against a world's atom list.

All probabilities are exact ``Fraction`` values.  Floats appear only when
drawing samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

Number = Union[int, float, str, Fraction]

INF = math.inf
MASS_TOL = 1e-12


class SpaceMismatch(ValueError):
    def __init__(self, msg: str = "space mismatch"):
        super().__init__(msg)


class NotContinuitySet(ValueError):
    def __init__(self, msg: str = "not a continuity set"):
        super().__init__(msg)


def to_fraction(x: Number) -> Fraction:
    """Exact rational from an int, Fraction, decimal/ratio string or float.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _to_endpoint(x) -> Union[Fraction, float]:
    if isinstance(x, float) and math.isinf(x):
        return x
    if isinstance(x, str) and x.strip().lstrip("+-") in ("inf", "oo"):
        return -INF if x.strip().startswith("-") else INF
    return to_fraction(x)


def float_down(q) -> float:
    """Largest double that is <= q."""
    if isinstance(q, float):
        return q
    f = float(q)
    if Fraction(f) > q:
        f = math.nextafter(f, -INF)
    return f


def float_up(q) -> float:
    """Smallest double that is >= q."""
    if isinstance(q, float):
        return q
    f = float(q)
    if Fraction(f) < q:
        f = math.nextafter(f, INF)
    return f


# ---------------------------------------------------------------------------
# sample spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSpace:
    """A finite alphabet (``kind="finite"``) or the real line (``kind="real"``)."""

    kind: str
    symbols: tuple = ()

    def __post_init__(self):
        if self.kind not in ("finite", "real"):
            raise ValueError(f"unknown sample space kind {self.kind!r}")
        if self.kind == "finite":
            if not self.symbols:
                raise ValueError("a finite alphabet needs at least one symbol")
            if len(set(self.symbols)) != len(self.symbols):
                raise ValueError("alphabet symbols must be distinct")
        elif self.symbols:
            raise ValueError("the real line has no symbols")

    @classmethod
    def finite(cls, symbols: Iterable) -> "SampleSpace":
        return cls("finite", tuple(symbols))

    @classmethod
    def real_line(cls) -> "SampleSpace":
        return cls("real")

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def index(self, symbol) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise ValueError(f"{symbol!r} is not a symbol of this space") from None

    # basis and algebra constructors

    def singleton(self, symbol) -> "Event":
        """Basic open set ``{symbol}`` of a finite alphabet."""
        return self.event([symbol])

    def open_interval(self, lo: Number, hi: Number) -> "Event":
        """Basic open set ``(lo, hi)`` of the real line (rational endpoints)."""
        if self.kind != "real":
            raise ValueError("open intervals live on the real line")
        lo, hi = _to_endpoint(lo), _to_endpoint(hi)
        if not lo < hi:
            raise ValueError("interval endpoints must satisfy left < right")
        return Event(self, (Interval(lo, False, hi, False),))

    def event(self, items: Iterable = ()) -> "Event":
        """Build a canonical event.

        For a finite alphabet ``items`` are symbols; for the real line they
        are :class:`Interval` values, ``(lo, hi)`` pairs (open) or strings
        such as ``"[0, 1/2)"``.
        """
        if self.kind == "finite":
            idx = sorted({self.index(s) for s in items})
            return Event(self, tuple(idx))
        ivs = [_coerce_interval(it) for it in items]
        return Event(self, _canonical_intervals(ivs))

    def whole(self) -> "Event":
        if self.kind == "finite":
            return Event(self, tuple(range(len(self.symbols))))
        return Event(self, (Interval(-INF, False, INF, False),))

    def empty(self) -> "Event":
        return Event(self, ())


COIN = SampleSpace.finite(("H", "T"))
REAL_LINE = SampleSpace.real_line()


# ---------------------------------------------------------------------------
# events
# ---------------------------------------------------------------------------

class Interval(NamedTuple):
    lo: Union[Fraction, float]
    lo_closed: bool
    hi: Union[Fraction, float]
    hi_closed: bool

    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return not (self.lo_closed and self.hi_closed)
        return False

    def contains(self, x) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def __str__(self):
        def fmt(v):
            return str(v) if not isinstance(v, float) else ("-inf" if v < 0 else "inf")
        return (("[" if self.lo_closed else "(") + fmt(self.lo) + ", "
                + fmt(self.hi) + ("]" if self.hi_closed else ")"))


def parse_interval(text: str) -> Interval:
    """Parse ``"(1/4, 1/2]"`` style literals; ``inf``/``-inf`` allowed."""
    s = text.strip()
    if len(s) < 5 or s[0] not in "([" or s[-1] not in ")]":
        raise ValueError(f"bad interval literal {text!r}")
    body = s[1:-1].split(",")
    if len(body) != 2:
        raise ValueError(f"bad interval literal {text!r}")
    lo, hi = (_to_endpoint(b) for b in body)
    lo_closed, hi_closed = s[0] == "[", s[-1] == "]"
    if (isinstance(lo, float) and lo_closed) or (isinstance(hi, float) and hi_closed):
        raise ValueError(f"infinite endpoints must be open in {text!r}")
    return Interval(lo, lo_closed, hi, hi_closed)


def _coerce_interval(it) -> Interval:
    if isinstance(it, Interval):
        return it
    if isinstance(it, str):
        return parse_interval(it)
    if len(it) == 2:
        return Interval(_to_endpoint(it[0]), False, _to_endpoint(it[1]), False)
    lo, lc, hi, hc = it
    return Interval(_to_endpoint(lo), bool(lc), _to_endpoint(hi), bool(hc))


def _canonical_intervals(ivs: Iterable[Interval]) -> tuple:
    live = sorted((iv for iv in ivs if not iv.is_empty()),
                  key=lambda iv: (iv.lo, not iv.lo_closed))
    out: list[Interval] = []
    for iv in live:
        if out:
            cur = out[-1]
            touches = iv.lo < cur.hi or (iv.lo == cur.hi and (cur.hi_closed or iv.lo_closed))
            if touches:
                if iv.hi > cur.hi:
                    hi, hc = iv.hi, iv.hi_closed
                elif iv.hi == cur.hi:
                    hi, hc = cur.hi, cur.hi_closed or iv.hi_closed
                else:
                    hi, hc = cur.hi, cur.hi_closed
                out[-1] = Interval(cur.lo, cur.lo_closed, hi, hc)
                continue
        out.append(iv)
    return tuple(out)


@dataclass(frozen=True)
class Event:
    """Element of the algebra generated by the basis, in canonical form.

    ``parts`` is a sorted tuple of symbol indices (finite alphabet) or of
    disjoint, non-adjacent :class:`Interval` values (real line).
    """

    space: SampleSpace
    parts: tuple

    def _check(self, other: "Event"):
        if not isinstance(other, Event) or other.space != self.space:
            raise SpaceMismatch()

    def __or__(self, other: "Event") -> "Event":
        self._check(other)
        if self.space.is_finite:
            return Event(self.space, tuple(sorted(set(self.parts) | set(other.parts))))
        return Event(self.space, _canonical_intervals(self.parts + other.parts))

    def __and__(self, other: "Event") -> "Event":
        self._check(other)
        if self.space.is_finite:
            return Event(self.space, tuple(sorted(set(self.parts) & set(other.parts))))
        return ~(~self | ~other)

    def __invert__(self) -> "Event":
        if self.space.is_finite:
            rest = set(range(len(self.space.symbols))) - set(self.parts)
            return Event(self.space, tuple(sorted(rest)))
        gaps = []
        lo, lo_closed = -INF, False
        for iv in self.parts:
            gaps.append(Interval(lo, lo_closed, iv.lo, not iv.lo_closed))
            lo, lo_closed = iv.hi, not iv.hi_closed
        gaps.append(Interval(lo, lo_closed, INF, False))
        return Event(self.space, _canonical_intervals(gaps))

    def __sub__(self, other: "Event") -> "Event":
        return self & ~other

    def canonical(self) -> "Event":
        if self.space.is_finite:
            return Event(self.space, tuple(sorted(set(self.parts))))
        return Event(self.space, _canonical_intervals(self.parts))

    @property
    def is_empty(self) -> bool:
        return not self.parts

    def endpoints(self) -> frozenset:
        """Finite interval endpoints; this is the topological boundary."""
        if self.space.is_finite:
            return frozenset()
        pts = set()
        for iv in self.parts:
            for v in (iv.lo, iv.hi):
                if not isinstance(v, float):
                    pts.add(v)
        return frozenset(pts)

    def contains(self, point) -> bool:
        if self.space.is_finite:
            return self.space.index(point) in self.parts
        x = point if isinstance(point, (Fraction, int)) else Fraction(float(point))
        return any(iv.contains(x) for iv in self.parts)

    def indicator(self, values: np.ndarray) -> np.ndarray:
        """Vectorised membership for stored sample values.

        Finite-alphabet values are integer symbol codes; real-line values are
        doubles compared exactly against the rational endpoints.
        """
        values = np.asarray(values)
        if self.space.is_finite:
            table = np.zeros(len(self.space.symbols), dtype=bool)
            table[list(self.parts)] = True
            return table[values]
        out = np.zeros(values.shape, dtype=bool)
        for iv in self.parts:
            # x > q  <=>  x > float_down(q);  x >= q  <=>  x >= float_up(q)
            if iv.lo_closed:
                above = values >= float_up(iv.lo)
            else:
                above = values > float_down(iv.lo)
            if iv.hi_closed:
                below = values <= float_down(iv.hi)
            else:
                below = values < float_up(iv.hi)
            out |= above & below
        return out

    def __str__(self):
        if self.space.is_finite:
            return "{" + ",".join(str(self.space.symbols[i]) for i in self.parts) + "}"
        if not self.parts:
            return "{}"
        return " u ".join(str(iv) for iv in self.parts)


# ---------------------------------------------------------------------------
# worlds
# ---------------------------------------------------------------------------

def _poly_antideriv(coeffs: Sequence[Fraction]) -> tuple:
    return (Fraction(0),) + tuple(c / (k + 1) for k, c in enumerate(coeffs))


def _poly_eval(coeffs, x):
    acc = 0 * x
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


class DensityPiece(NamedTuple):
    lo: Fraction
    hi: Fraction
    coeffs: tuple  # ascending powers of x


@dataclass(frozen=True, eq=False)
class World:
    """A probability measure on a sample space.

    Finite alphabets carry an exact probability vector.  The real line carries
    a piecewise-polynomial density (exact CDF) plus a finite list of atoms.
    Build instances with :func:`finite_world`, :func:`bernoulli`,
    :func:`real_world` or :func:`uniform`.
    """

    space: SampleSpace
    probs: tuple = ()
    pieces: tuple = ()
    atoms: tuple = ()
    label: str = ""

    def __repr__(self):
        return f"World({self.label or self.space.kind})"

    def __eq__(self, other):
        if not isinstance(other, World):
            return NotImplemented
        return (self.space, self.probs, self.pieces, self.atoms) == \
            (other.space, other.probs, other.pieces, other.atoms)

    def __hash__(self):
        return hash((self.space, self.probs, self.pieces, self.atoms))

    def total_mass(self) -> Fraction:
        if self.space.is_finite:
            return sum(self.probs, Fraction(0))
        return self._continuous_cdf(INF) + sum((m for _, m in self.atoms), Fraction(0))

    def _continuous_cdf(self, x) -> Fraction:
        total = Fraction(0)
        for p in self.pieces:
            if x <= p.lo:
                continue
            top = p.hi if x >= p.hi else x
            anti = _poly_antideriv(p.coeffs)
            total += _poly_eval(anti, top) - _poly_eval(anti, p.lo)
        return total

    @cached_property
    def atom_points(self) -> frozenset:
        return frozenset(x for x, m in self.atoms if m > 0)

    # sampling tables, built lazily in floating point

    @cached_property
    def _finite_cum(self) -> np.ndarray:
        cum = np.cumsum([float(p) for p in self.probs])
        cum[-1] = 1.0
        # trailing zero-mass symbols must never be drawn
        last = max(i for i, p in enumerate(self.probs) if p > 0)
        cum[last:] = 1.0
        return cum

    @cached_property
    def _segments(self):
        segs = [("atom", float(x), None, float(m)) for x, m in self.atoms if m > 0]
        for p in self.pieces:
            mass = self._continuous_cdf(p.hi) - self._continuous_cdf(p.lo)
            if mass > 0:
                segs.append(("piece", float(p.lo), p, float(mass)))
        cum = np.cumsum([s[3] for s in segs])
        cum[-1] = 1.0
        return segs, cum

    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in [0, 1) to draws (symbol codes or reals)."""
        u = np.asarray(u, dtype=float)
        if self.space.is_finite:
            codes = np.searchsorted(self._finite_cum, u, side="right")
            return np.minimum(codes, len(self.probs) - 1).astype(np.int16)
        segs, cum = self._segments
        which = np.minimum(np.searchsorted(cum, u, side="right"), len(segs) - 1)
        start = np.concatenate(([0.0], cum[:-1]))
        out = np.empty(u.shape, dtype=float)
        for j, (kind, x0, piece, mass) in enumerate(segs):
            sel = which == j
            if not sel.any():
                continue
            if kind == "atom":
                out[sel] = x0
                continue
            target = (u[sel] - start[j]) / mass
            out[sel] = _invert_piece(piece, target)
        return out


def _invert_piece(piece: DensityPiece, frac: np.ndarray) -> np.ndarray:
    """Solve normalised partial mass == frac on one density piece by bisection."""
    anti = [float(c) for c in _poly_antideriv(piece.coeffs)]
    lo, hi = float(piece.lo), float(piece.hi)
    base = np.polynomial.polynomial.polyval(lo, anti)
    mass = np.polynomial.polynomial.polyval(hi, anti) - base
    target = np.clip(frac, 0.0, 1.0) * mass
    a = np.full(frac.shape, lo)
    b = np.full(frac.shape, hi)
    for _ in range(64):
        mid = 0.5 * (a + b)
        left = np.polynomial.polynomial.polyval(mid, anti) - base < target
        a = np.where(left, mid, a)
        b = np.where(left, b, mid)
    return 0.5 * (a + b)


def _normalise(values: list[Fraction], what: str) -> list[Fraction]:
    if any(v < 0 for v in values):
        raise ValueError(f"{what} must be nonnegative")
    total = sum(values, Fraction(0))
    if abs(total - 1) > MASS_TOL:
        raise ValueError(f"total mass must be 1 (got {float(total)!r})")
    return [v / total for v in values]


def finite_world(space: SampleSpace, probs: Sequence[Number], label: str = "") -> World:
    if not space.is_finite:
        raise ValueError("finite_world needs a finite alphabet")
    if len(probs) != len(space.symbols):
        raise ValueError("one probability per symbol is required")
    ps = _normalise([to_fraction(p) for p in probs], "probabilities")
    return World(space, probs=tuple(ps), label=label)


def bernoulli(p: Number, label: str = "") -> World:
    """Coin world on ``{H, T}`` with ``P(H) = p``."""
    p = to_fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("bias must lie in [0, 1]")
    return finite_world(COIN, [p, 1 - p], label or f"Bernoulli({p})")


def real_world(pieces: Iterable = (), atoms: Iterable = (), label: str = "") -> World:
    """Real-line world from density pieces ``(lo, hi, coeffs)`` and atoms ``(x, mass)``.

    Coefficients are ascending powers of ``x``.  Pieces must not overlap and
    the density must be nonnegative on each piece.
    """
    ps = []
    for lo, hi, coeffs in pieces:
        lo, hi = to_fraction(lo), to_fraction(hi)
        if not lo < hi:
            raise ValueError("density pieces need lo < hi")
        ps.append(DensityPiece(lo, hi, tuple(to_fraction(c) for c in coeffs)))
    ps.sort(key=lambda p: p.lo)
    for a, b in zip(ps, ps[1:]):
        if b.lo < a.hi:
            raise ValueError("density pieces overlap")
    for p in ps:
        grid = [p.lo + (p.hi - p.lo) * Fraction(i, 16) for i in range(17)]
        if any(_poly_eval(p.coeffs, x) < 0 for x in grid):
            raise ValueError("density must be nonnegative")
    ats = [(to_fraction(x), to_fraction(m)) for x, m in atoms]
    if len({x for x, _ in ats}) != len(ats):
        raise ValueError("atom points must be distinct")
    if any(m < 0 for _, m in ats):
        raise ValueError("atom masses must be nonnegative")
    world = World(REAL_LINE, pieces=tuple(ps), atoms=tuple(ats), label=label)
    total = world.total_mass()
    if abs(total - 1) > MASS_TOL:
        raise ValueError(f"total mass must be 1 (got {float(total)!r})")
    if total != 1:
        world = World(REAL_LINE,
                      pieces=tuple(DensityPiece(p.lo, p.hi, tuple(c / total for c in p.coeffs))
                                   for p in ps),
                      atoms=tuple((x, m / total) for x, m in ats), label=label)
    return world


def uniform(lo: Number = 0, hi: Number = 1, label: str = "") -> World:
    lo, hi = to_fraction(lo), to_fraction(hi)
    return real_world([(lo, hi, [1 / (hi - lo)])], label=label or f"Uniform[{lo},{hi}]")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def prob(world: World, event: Event) -> Fraction:
    """Exact probability of ``event`` under ``world``."""
    if event.space != world.space:
        raise SpaceMismatch()
    if world.space.is_finite:
        return sum((world.probs[i] for i in event.parts), Fraction(0))
    total = Fraction(0)
    for iv in event.parts:
        total += world._continuous_cdf(iv.hi) - world._continuous_cdf(iv.lo)
        total += sum((m for x, m in world.atoms if iv.contains(x)), Fraction(0))
    return total


def is_feasible(world: World, event: Event) -> bool:
    """True iff the event's boundary carries no mass (a continuity set)."""
    if event.space != world.space:
        raise SpaceMismatch()
    if world.space.is_finite:
        return True
    return not (event.endpoints() & world.atom_points)


def require_feasible(world: World, event: Event) -> None:
    if not is_feasible(world, event):
        raise NotContinuitySet()


def _path_generator(seed: int, trial: int) -> np.random.Generator:
    # counter-based: key = (master seed, trial), counter = draw index
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, int(trial) & 0xFFFFFFFFFFFFFFFF]
    return np.random.Generator(np.random.Philox(key=key))


def _uniforms(seed: int, trial: int, n: int) -> np.ndarray:
    return _path_generator(seed, trial).random(n)


@dataclass(frozen=True, eq=False)
class SampleVector:
    """One i.i.d. sample of length ``n``; ``values`` are codes or reals."""

    space: SampleSpace
    values: np.ndarray
    seed: int = 0
    trial: int = 0

    def __len__(self):
        return len(self.values)

    @property
    def points(self) -> list:
        if self.space.is_finite:
            return [self.space.symbols[c] for c in self.values]
        return [float(v) for v in self.values]

    def prefix(self, n: int) -> "SampleVector":
        return SampleVector(self.space, self.values[:n], self.seed, self.trial)

    @classmethod
    def from_points(cls, space: SampleSpace, points: Iterable) -> "SampleVector":
        """Wrap hand-written outcomes, e.g. ``"HHTH"`` on the coin space."""
        if space.is_finite:
            vals = np.array([space.index(p) for p in points], dtype=np.int16)
        else:
            vals = np.array([float(p) for p in points], dtype=float)
        return cls(space, vals, seed=-1, trial=-1)


def sample(world: World, n: int, seed: int, trial: int = 0) -> SampleVector:
    """``n`` i.i.d. draws, deterministic in ``(world, n, seed, trial)``.

    Longer samples with the same seed and trial extend shorter ones.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return SampleVector(world.space, world.quantile(_uniforms(seed, trial, n)), seed, trial)


def empirical_count(sample: SampleVector, event: Event) -> int:
    if sample.space != event.space:
        raise SpaceMismatch()
    return int(event.indicator(sample.values).sum())


@dataclass(eq=False)
class SamplePaths:
    """A block of sample paths (rows = trials) with cached running counts."""

    space: SampleSpace
    values: np.ndarray  # shape (trials, n)
    trials: tuple = ()
    _counts: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def counts(self, event: Event) -> np.ndarray:
        """Running counts ``sum_{i<=n} 1_A(omega_i)`` with shape (trials, n)."""
        if event.space != self.space:
            raise SpaceMismatch()
        key = event.parts
        got = self._counts.get(key)
        if got is None:
            got = np.cumsum(event.indicator(self.values), axis=1, dtype=np.int32)
            self._counts[key] = got
        return got

    @classmethod
    def from_samples(cls, samples: Sequence[SampleVector]) -> "SamplePaths":
        n = {len(s) for s in samples}
        if len(n) != 1:
            raise ValueError("all samples must share a length")
        space = samples[0].space
        vals = np.stack([s.values for s in samples])
        return cls(space, vals, tuple(s.trial for s in samples))


def sample_paths(world: World, n: int, seed: int, trials: Iterable[int]) -> SamplePaths:
    """Stack the paths ``sample(world, n, seed, t)`` for each trial index ``t``."""
    trials = tuple(trials)
    u = np.empty((len(trials), n))
    for row, t in enumerate(trials):
        u[row] = _uniforms(seed, t, n)
    return SamplePaths(world.space, world.quantile(u), trials)


def weak_convergence_check(worlds: Sequence[World], limit: World,
                           events: Sequence[Event], tol: float):
    """Check ``mu_k(A) -> mu(A)`` on the tail (last quarter) of a sequence.

    Returns ``(ok, report)`` where ``report`` maps each event's string form to
    the largest tail deviation.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not worlds:
        raise ValueError("need at least one world in the sequence")
    for ev in events:
        require_feasible(limit, ev)
    tail = list(worlds)[len(worlds) - max(1, len(worlds) // 4):]
    report = {}
    ok = True
    for ev in events:
        target = prob(limit, ev)
        dev = max(abs(prob(w, ev) - target) for w in tail)
        report[str(ev)] = float(dev)
        ok = ok and dev < tol
    return ok, report
