"""Almost-sure statistical verifiers built from Hoeffding count thresholds.

Every test here accepts or continues based on running counts
``sum_i 1_A(omega_i)`` compared against integer thresholds, so a family is
compiled into a small Boolean formula over *threshold atoms*
``count_A(n) >= k(n)``.  Atoms on the same event merge under conjunction
(max of thresholds) and disjunction (min of thresholds), which keeps the
countable-disjunction construction cheap: thousands of disjuncts over one
event collapse into a single threshold schedule.

Families are evaluated on a whole block of sample paths at once through
:meth:`VerifierFamily.decide`, which returns an integer code per (trial, n):
``0`` means Continue and a positive code names the accepted payload.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .hypotheses import (
    And, Band, ClosedComplement, FSigma, Or, Partition, SubBasic, band_as_intersection,
    events_of, is_open_form,
)
from .measures import (
    Event, Number, SamplePaths, SampleSpace, SampleVector, SpaceMismatch, World,
    float_up, require_feasible, sample_paths, to_fraction,
)

NEVER = 2**31 - 1
_EPS = np.finfo(float).eps
_LOG_PI2_OVER_6 = math.log(math.pi**2 / 6)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    """``Accept(label)`` or ``Continue`` (the trivial conclusion W)."""

    label: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.label is not None

    def __str__(self):
        return f"Accept({self.label})" if self.accepted else "Continue"


CONTINUE = Verdict()


def Accept(label: str) -> Verdict:
    return Verdict(str(label))


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------

def _check_alpha(alpha) -> Fraction:
    alpha = to_fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0,1)")
    return alpha


def _log_fraction(q: Fraction) -> float:
    # exact-ish log for tiny rationals such as alpha / 2**4000
    return math.log(q.numerator) - math.log(q.denominator)


def _up(x: np.ndarray, ulps: int = 4) -> np.ndarray:
    return x + np.abs(x) * (ulps * _EPS) + np.finfo(float).tiny


def slack(ns, alpha) -> np.ndarray:
    """``t_n = sqrt(ln(pi^2 n^2 / (6 alpha)) / (2n))``, rounded upward."""
    alpha = _check_alpha(alpha)
    ns = np.asarray(ns, dtype=float)
    terms = _LOG_PI2_OVER_6 + 2 * np.log(ns) - _log_fraction(alpha)
    scale = _LOG_PI2_OVER_6 + 2 * np.log(ns) + abs(_log_fraction(alpha))
    logs = terms + 8 * _EPS * scale
    return _up(np.sqrt(logs / (2 * ns)))


def _schedule(b: Fraction, alpha: Fraction, horizon: int) -> np.ndarray:
    ns = np.arange(1, horizon + 1, dtype=float)
    b_hi = float_up(b)
    # n*b and n*t_n each rounded, then the sum pushed up before the ceiling
    v = _up(_up(ns * b_hi) + _up(ns * slack(ns, alpha)))
    k = np.ceil(v)
    return np.minimum(k, NEVER).astype(np.int64)


def threshold_schedule(b: Number, alpha: Number, horizon: int) -> np.ndarray:
    """Thresholds ``k(n) = ceil(n (b + t_n))`` for ``n = 1..horizon``."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return _schedule(to_fraction(b), _check_alpha(alpha), horizon)


def hoeffding_threshold(n: int, b: Number, alpha: Number) -> int:
    """Acceptance threshold for the count test of ``{mu : mu(A) > b}`` at size ``n``.

    Never smaller than the exact ``ceil(n (b + t_n))``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    alpha = _check_alpha(alpha)
    b = to_fraction(b)
    if not 0 <= b <= 1:
        raise ValueError("b must lie in [0,1]")
    v = _up(_up(np.array([n * float_up(b)])) + _up(n * slack([n], alpha)))
    return int(np.ceil(v)[0])


# ---------------------------------------------------------------------------
# threshold formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Atom:
    """Accept at size n iff ``count_event(n) >= k[n-1]``."""

    event: Event
    k: np.ndarray


@dataclass(frozen=True, eq=False)
class Window:
    """Accept exactly at the sizes where ``mask[n-1]`` holds."""

    mask: np.ndarray


@dataclass(frozen=True, eq=False)
class AllOf:
    children: tuple


@dataclass(frozen=True, eq=False)
class AnyOf:
    children: tuple


def _never(f, horizon) -> bool:
    if isinstance(f, Atom):
        return bool(np.all(f.k > np.arange(1, horizon + 1)))
    if isinstance(f, Window):
        return not f.mask.any()
    return False


def _always(f) -> bool:
    if isinstance(f, Atom):
        return bool(np.all(f.k <= 0))
    if isinstance(f, Window):
        return bool(f.mask.all())
    return False


def any_of(children, horizon: int):
    flat = []
    for c in children:
        flat.extend(c.children if isinstance(c, AnyOf) else [c])
    flat = [c for c in flat if not _never(c, horizon)]
    if any(_always(c) for c in flat):
        return Window(np.ones(horizon, dtype=bool))
    atoms: dict = {}
    rest = []
    mask = None
    for c in flat:
        if isinstance(c, Atom):
            atoms[c.event] = c.k if c.event not in atoms else np.minimum(atoms[c.event], c.k)
        elif isinstance(c, Window):
            mask = c.mask if mask is None else (mask | c.mask)
        else:
            rest.append(c)
    if mask is not None:
        rest.append(Window(mask))
    out = [Atom(e, k) for e, k in atoms.items()] + rest
    if not out:
        return Window(np.zeros(horizon, dtype=bool))
    return out[0] if len(out) == 1 else AnyOf(tuple(out))


def all_of(children, horizon: int):
    flat = []
    for c in children:
        flat.extend(c.children if isinstance(c, AllOf) else [c])
    if any(_never(c, horizon) for c in flat):
        return Window(np.zeros(horizon, dtype=bool))
    flat = [c for c in flat if not _always(c)]
    atoms: dict = {}
    rest = []
    for c in flat:
        if isinstance(c, Atom):
            atoms[c.event] = c.k if c.event not in atoms else np.maximum(atoms[c.event], c.k)
        else:
            rest.append(c)
    out = [Atom(e, k) for e, k in atoms.items()] + rest
    if not out:
        return Window(np.ones(horizon, dtype=bool))
    return out[0] if len(out) == 1 else AllOf(tuple(out))


def gate(f, mask: np.ndarray, horizon: int):
    """Restrict a formula to the sizes where ``mask`` holds."""
    if isinstance(f, Atom):
        return Atom(f.event, np.where(mask, f.k, NEVER))
    if isinstance(f, Window):
        return Window(f.mask & mask)
    if isinstance(f, AnyOf):
        return any_of([gate(c, mask, horizon) for c in f.children], horizon)
    return all_of([gate(c, mask, horizon) for c in f.children], horizon)


def evaluate(f, paths: SamplePaths) -> np.ndarray:
    """Boolean acceptance matrix of shape (trials, n)."""
    n = paths.n
    if isinstance(f, Atom):
        return paths.counts(f.event) >= f.k[None, :n]
    if isinstance(f, Window):
        return np.broadcast_to(f.mask[None, :n], (paths.values.shape[0], n)).copy()
    parts = [evaluate(c, paths) for c in f.children]
    if isinstance(f, AnyOf):
        return np.logical_or.reduce(parts)
    return np.logical_and.reduce(parts)


def formula_events(f) -> list[Event]:
    if isinstance(f, Atom):
        return [f.event]
    if isinstance(f, Window):
        return []
    return [e for c in f.children for e in formula_events(c)]


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

class VerifierFamily:
    """Indexed family of feasible tests ``lambda_n``.

    Subclasses implement :meth:`decide`; everything else is derived from it.
    """

    tag = "abstract"

    def __init__(self, target, alpha, space: SampleSpace):
        self.target = target
        self.alpha = alpha
        self.space = space

    def decide(self, paths: SamplePaths) -> np.ndarray:
        raise NotImplementedError

    def label(self, code: int) -> str:
        raise NotImplementedError

    def events(self, horizon: int) -> list[Event]:
        raise NotImplementedError

    def check_feasible(self, world: World, horizon: int) -> None:
        if world.space != self.space:
            raise SpaceMismatch()
        for ev in set(self.events(horizon)):
            require_feasible(world, ev)

    def verdict(self, code: int) -> Verdict:
        return CONTINUE if code == 0 else Accept(self.label(int(code)))

    def test_at(self, sample: SampleVector) -> Verdict:
        """The test at size ``len(sample)`` applied to ``sample``."""
        if sample.space != self.space:
            raise SpaceMismatch()
        paths = SamplePaths.from_samples([sample])
        return self.verdict(self.decide(paths)[0, -1])

    def __repr__(self):
        # str() keeps enumerator closures (and their addresses) out of reports
        return f"<{type(self).__name__} {self.tag} target={self.target!s} alpha={self.alpha}>"


class ThresholdFamily(VerifierFamily):
    """Family whose acceptance region is a threshold formula at every size."""

    def __init__(self, target, alpha, space, tag, build: Callable[[int], object]):
        super().__init__(target, alpha, space)
        self.tag = tag
        self._build = build
        self._cached = None

    def compile(self, horizon: int):
        """Uncached formula for sizes ``1..horizon``."""
        return self._build(horizon)

    def formula(self, horizon: int):
        if self._cached is None or self._cached[0] != horizon:
            self._cached = (horizon, self._build(horizon))
        return self._cached[1]

    def accepts(self, paths: SamplePaths) -> np.ndarray:
        return evaluate(self.formula(paths.n), paths)

    def decide(self, paths: SamplePaths) -> np.ndarray:
        return self.accepts(paths).astype(np.int32)

    def label(self, code: int) -> str:
        return str(self.target)

    def events(self, horizon: int) -> list[Event]:
        return formula_events(self.formula(horizon))


def subbasic_verifier(h: SubBasic, alpha: Number,
                      worlds: Sequence[World] = ()) -> ThresholdFamily:
    """Accept ``{mu : mu(A) > b}`` once the count of ``A`` reaches ``ceil(n(b + t_n))``."""
    if not isinstance(h, SubBasic):
        raise TypeError("subbasic_verifier needs a SubBasic hypothesis")
    alpha = _check_alpha(alpha)
    for w in worlds:
        require_feasible(w, h.event)

    def build(horizon):
        return Atom(h.event, _schedule(h.b, alpha, horizon))

    return ThresholdFamily(h, alpha, h.event.space, "hoeffding", build)


def conjoin(v1: ThresholdFamily, v2: ThresholdFamily) -> ThresholdFamily:
    """Accept at n iff both families accept at n."""
    if v1.space != v2.space:
        raise SpaceMismatch()
    if v1.alpha != v2.alpha:
        raise ValueError("conjoin needs families at the same alpha")

    def build(horizon):
        return all_of([v1.compile(horizon), v2.compile(horizon)], horizon)

    return ThresholdFamily(And((v1.target, v2.target)), v1.alpha, v1.space, "conjunction", build)


def identity_cutoff(n: int) -> int:
    return n


def disjoin(builders: Callable[[int], Optional[tuple]], alpha: Number, *,
            count: Optional[int] = None, target=None,
            cutoff: Callable[[int], int] = identity_cutoff) -> ThresholdFamily:
    """Countable disjunction with the error budget split as ``alpha / 2**i``.

    ``builders(i)`` returns ``(hypothesis_i, build_i)`` where ``build_i(alpha_i)``
    yields a threshold family for disjunct ``i``; returning ``None`` (or
    passing ``count``) ends the enumeration.  At size ``n`` only disjuncts
    ``i <= cutoff(n)`` are consulted.  An infinite enumeration needs an
    explicit ``target`` hypothesis equal to the union.
    """
    alpha = _check_alpha(alpha)
    members: dict[int, tuple] = {}

    def member(i):
        if count is not None and i > count:
            return None
        if i not in members:
            members[i] = builders(i)
        return members[i]

    if target is None:
        if count is None:
            raise ValueError("an infinite disjunction needs an explicit target")
        target = Or(tuple(member(i)[0] for i in range(1, count + 1)))
    first = member(1)
    if first is None:
        raise ValueError("disjoin needs at least one disjunct")
    space = first[1](alpha / 2).space

    def build(horizon):
        ns = np.arange(1, horizon + 1)
        limits = np.array([cutoff(int(n)) for n in ns])
        top = int(limits.max())
        parts = []
        for i in range(1, top + 1):
            m = member(i)
            if m is None:
                break
            fam = m[1](alpha / 2**i)
            if fam.space != space:
                raise SpaceMismatch()
            parts.append(gate(fam.compile(horizon), limits >= i, horizon))
        return any_of(parts, horizon)

    return ThresholdFamily(target, alpha, space, "disjunction", build)


@lru_cache(maxsize=4096)
def build_verifier(h, alpha: Fraction) -> ThresholdFamily:
    """Compile an open-form hypothesis into an a.s. ``alpha``-verifier.

    Conjunctions use :func:`conjoin` at the same level; finite disjunctions use
    :func:`disjoin` with the halving budget; bands go through
    :func:`band_as_intersection`.
    """
    alpha = _check_alpha(alpha)
    if isinstance(h, SubBasic):
        return subbasic_verifier(h, alpha)
    if isinstance(h, Band):
        return build_verifier(band_as_intersection(h.event, h.a, h.b), alpha)
    if isinstance(h, And):
        fams = [build_verifier(c, alpha) for c in h.children]
        out = fams[0]
        for f in fams[1:]:
            out = conjoin(out, f)
        if len(fams) > 1:
            out.target = h
        return out
    if isinstance(h, Or):
        kids = h.children
        return disjoin(lambda i: (kids[i - 1], lambda a, c=kids[i - 1]: build_verifier(c, a)),
                       alpha, count=len(kids), target=h)
    raise TypeError(f"no verifier construction for {type(h).__name__}; "
                    "only open-form hypotheses are verifiable")


# ---------------------------------------------------------------------------
# limiting verifiers and solvers
# ---------------------------------------------------------------------------

def _least_passing(candidates: Iterator[tuple], paths: SamplePaths) -> np.ndarray:
    """Least-index rule shared by the limiting verifier and the solver.

    ``candidates`` yields ``(index, code, family)``; at size n the output is
    the code of the least index ``<= n`` whose complement family does not
    accept (outputs W), or 0 when there is none.
    """
    trials, horizon = paths.values.shape
    out = np.zeros((trials, horizon), dtype=np.int32)
    undecided = np.ones((trials, horizon), dtype=bool)
    for index, code, fam in candidates:
        if index > horizon:
            break
        start = index - 1
        if not undecided[:, start:].any():
            break
        rejects = fam.accepts(paths)
        hit = undecided[:, start:] & ~rejects[:, start:]
        out[:, start:][hit] = code
        undecided[:, start:] &= ~hit
    return out


class LimitingVerifier(VerifierFamily):
    """Outputs the least closed piece ``C_j`` (``j <= n``) not rejected at size n."""

    tag = "limiting"

    def __init__(self, pieces: FSigma, alpha):
        alpha = _check_alpha(alpha)
        first = pieces.piece(1)
        super().__init__(pieces, alpha, events_of(first)[0].space)
        self.pieces = pieces

    def _candidates(self, horizon):
        seen = set()
        for j in range(1, horizon + 1):
            if self.pieces.length is not None and j > self.pieces.length:
                return
            piece = self.pieces.piece(j)
            if piece in seen:
                continue
            seen.add(piece)
            yield j, j, build_verifier(piece.open, self.alpha)

    def decide(self, paths: SamplePaths) -> np.ndarray:
        return _least_passing(self._candidates(paths.n), paths)

    def label(self, code: int) -> str:
        return f"{self.pieces.name}.C{code}"

    def events(self, horizon):
        return [e for _, _, f in self._candidates(horizon) for e in f.events(horizon)]


def limiting_verifier(pieces: FSigma, alpha: Number) -> LimitingVerifier:
    if isinstance(pieces, ClosedComplement):
        pieces = FSigma.of([pieces])
    return LimitingVerifier(pieces, alpha)


def cantor_unpair(k: int) -> tuple[int, int]:
    """1-based inverse Cantor pairing: 1 -> (1,1), 2 -> (1,2), 3 -> (2,1), ..."""
    if k < 1:
        raise ValueError("k must be >= 1")
    d = int((math.isqrt(8 * (k - 1) + 1) - 1) // 2)  # diagonal index, 0-based
    offset = (k - 1) - d * (d + 1) // 2
    return offset + 1, d - offset + 1


def check_pairing(f: Callable[[int], tuple], diagonal: int = 6, prefix: int = 10_000) -> None:
    """Raise unless ``f`` hits every pair with ``i + j <= diagonal`` within ``prefix`` steps."""
    want = {(i, s - i) for s in range(2, diagonal + 1) for i in range(1, s)}
    for k in range(1, prefix + 1):
        i, j = f(k)
        if i < 1 or j < 1:
            raise ValueError(f"pairing produced a non-positive pair at {k}")
        want.discard((i, j))
        if not want:
            return
    raise ValueError(f"pairing is not surjective: {sorted(want)[:3]} never produced")


class Solver(VerifierFamily):
    """Outputs the answer owning the first non-rejected piece ``C_f(k)``, ``k <= n``."""

    tag = "solver"

    def __init__(self, problem: Partition, alpha, pairing=cantor_unpair):
        alpha = _check_alpha(alpha)
        check_pairing(pairing)
        answers = []
        for a in problem.answers:
            if isinstance(a, ClosedComplement):
                a = FSigma.of([a])
            if not isinstance(a, FSigma):
                raise TypeError("solver answers must be presented as closed pieces")
            answers.append(a)
        super().__init__(problem, alpha, events_of(answers[0].piece(1))[0].space)
        self.problem = problem
        self.answers = answers
        self.pairing = pairing

    def _candidates(self, horizon):
        seen = set()
        for k in range(1, horizon + 1):
            i, j = self.pairing(k)
            if i > len(self.answers):
                continue
            ans = self.answers[i - 1]
            if ans.length is not None and j > ans.length:
                continue
            piece = ans.piece(j)
            if piece in seen:
                continue
            seen.add(piece)
            yield k, i, build_verifier(piece.open, self.alpha)

    def decide(self, paths: SamplePaths) -> np.ndarray:
        return _least_passing(self._candidates(paths.n), paths)

    def label(self, code: int) -> str:
        return self.problem.labels[code - 1]

    def code_of(self, label: str) -> int:
        return self.problem.labels.index(label) + 1

    def events(self, horizon):
        return [e for _, _, f in self._candidates(horizon) for e in f.events(horizon)]


def solver(problem: Partition, alpha: Number, pairing=cantor_unpair) -> Solver:
    return Solver(problem, alpha, pairing)


def run(v: VerifierFamily, world: World, n_max: int, seed: int, trial: int = 0) -> list[Verdict]:
    """Verdicts of ``lambda_1 .. lambda_{n_max}`` along one sample path."""
    v.check_feasible(world, n_max)
    paths = sample_paths(world, n_max, seed, [trial])
    return [v.verdict(c) for c in v.decide(paths)[0]]
