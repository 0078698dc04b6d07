"""Learning from propositional information on infinite binary sequences.

Worlds are infinite 0/1 sequences and the information state at stage ``n`` is
the cylinder of the first ``n`` bits.  Open sets are supplied as entailment
oracles ``entails(prefix) -> bool`` (does every extension of ``prefix`` lie
in the set?), which is all the methods below ever ask.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

W = "W"


@dataclass(frozen=True)
class Cylinder:
    """The set ``[prefix]`` of all sequences starting with ``prefix``."""

    prefix: str = ""

    def __post_init__(self):
        if set(self.prefix) - {"0", "1"}:
            raise ValueError("prefixes are binary strings")

    def entails(self, other: "Cylinder") -> bool:
        """``[self] ⊆ [other]``, i.e. ``other.prefix`` is a prefix of ``self.prefix``."""
        return self.prefix.startswith(other.prefix)

    def extend(self, bit: str) -> "Cylinder":
        return Cylinder(self.prefix + bit)


@dataclass(frozen=True, eq=False)
class OpenSetOracle:
    entails: Callable[[str], bool]
    name: str = "O"

    def __call__(self, prefix: str) -> bool:
        return bool(self.entails(prefix))

    def __repr__(self):
        return f"OpenSetOracle({self.name})"


WHOLE = OpenSetOracle(lambda s: True, "W")
EMPTY = OpenSetOracle(lambda s: False, "empty")


def some_bit(bit: str) -> OpenSetOracle:
    return OpenSetOracle(lambda s: bit in s, f"some {bit}")


def bit_at_or_after(bit: str, k: int) -> OpenSetOracle:
    """Some ``bit`` occurs at a position ``>= k`` (positions start at 0)."""
    return OpenSetOracle(lambda s: bit in s[k:], f"{bit} at >= {k}")


SOME_ZERO = some_bit("0")
SOME_ONE = some_bit("1")


@dataclass(frozen=True, eq=False)
class LocallyClosedPresentation:
    """Pieces ``O_i \\ O_i'`` given as pairs of open-set oracles.

    ``pairs`` is a finite list or a function ``i -> (O_i, O_i')`` for
    ``i >= 1``.  The pieces must be pairwise disjoint; that is the caller's
    job and is only spot-checked in tests.
    """

    pairs: Union[Sequence[tuple], Callable[[int], tuple]]
    labels: Optional[Union[Sequence[str], Callable[[int], str]]] = None

    @property
    def length(self) -> Optional[int]:
        return None if callable(self.pairs) else len(self.pairs)

    def pair(self, i: int) -> tuple:
        return self.pairs(i) if callable(self.pairs) else self.pairs[i - 1]

    def label(self, i: int) -> str:
        if self.labels is None:
            return f"piece({i})"
        return self.labels(i) if callable(self.labels) else self.labels[i - 1]


@dataclass(frozen=True, eq=False)
class PropMethod:
    conclude: Callable[[str], str]
    name: str = "L"

    def __call__(self, prefix: str) -> str:
        return self.conclude(prefix)


def open_verifier(o: OpenSetOracle, label: str = "H") -> PropMethod:
    """Conclude ``label`` exactly when the information entails the open set."""
    return PropMethod(lambda s: label if o(s) else W, f"verify {o.name}")


def limiting_verifier_prop(p: LocallyClosedPresentation) -> PropMethod:
    """Conjecture the least piece ``i`` with ``O_i`` entailed and ``O_i'`` not.

    The search at prefix ``s`` runs over ``i <= len(s) + 1`` so every call
    terminates; the bound grows without limit, so convergence is unaffected.
    """

    def conclude(s: str) -> str:
        top = len(s) + 1
        if p.length is not None:
            top = min(top, p.length)
        for i in range(1, top + 1):
            o, o_prime = p.pair(i)
            if o(s) and not o_prime(s):
                return p.label(i)
        return W

    return PropMethod(conclude, "limiting verifier")


def solver_prop(answers: Sequence[tuple]) -> PropMethod:
    """Label of the least-indexed answer whose limiting verifier conjectures a piece.

    ``answers`` is a list of ``(label, LocallyClosedPresentation)``.
    """
    members = [(label, limiting_verifier_prop(p)) for label, p in answers]

    def conclude(s: str) -> str:
        for label, m in members:
            if m(s) != W:
                return label
        return W

    return PropMethod(conclude, "solver")


# ---------------------------------------------------------------------------
# worlds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stream:
    """Eventually periodic sequence ``prefix + cycle + cycle + ...``."""

    prefix: str
    cycle: str

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("cycle must be nonempty")
        if set(self.prefix + self.cycle) - {"0", "1"}:
            raise ValueError("streams are binary")

    def first(self, n: int) -> str:
        out = self.prefix[:n]
        while len(out) < n:
            out += self.cycle
        return out[:n]

    def bits(self) -> set:
        return set(self.prefix) | set(self.cycle)

    def tail_bits(self) -> set:
        return set(self.cycle)

    def __str__(self):
        return f"{self.prefix}({self.cycle})"

    @classmethod
    def parse(cls, text: str) -> "Stream":
        """``"11(0)"`` = 110000..., or ``"010101..."`` with the period inferred."""
        s = text.strip()
        m = re.fullmatch(r"([01]*)\(([01]+)\)", s)
        if m:
            return cls(m.group(1), m.group(2))
        for tail in ("…", "..."):
            if s.endswith(tail):
                return cls._infer(s[: -len(tail)])
        if re.fullmatch(r"[01]+", s):
            return cls._infer(s)
        raise ValueError(f"bad stream literal {text!r}")

    @classmethod
    def _infer(cls, s: str) -> "Stream":
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"bad stream literal {s!r}")
        best = None
        for start in range(len(s)):
            body = s[start:]
            for period in range(1, len(body) // 2 + 1):
                reps, rem = divmod(len(body), period)
                if rem == 0 and body[:period] * reps == body:
                    cand = (start + period, start, period)
                    if best is None or cand < best:
                        best = cand
                    break
        if best is None:
            return cls(s[:-1], s[-1])
        _, start, period = best
        return cls(s[:start], s[start:start + period])


def random_stream(rng: random.Random, max_prefix: int = 12, max_cycle: int = 4) -> Stream:
    prefix = "".join(rng.choice("01") for _ in range(rng.randint(0, max_prefix)))
    cycle = "".join(rng.choice("01") for _ in range(rng.randint(1, max_cycle)))
    return Stream(prefix, cycle)


def simulate_inquiry(world: Union[Stream, Callable[[int], str]], m: PropMethod,
                     stages: int) -> list[str]:
    """Outputs ``m(w|n)`` for ``n = 0 .. stages``."""
    if stages < 1:
        raise ValueError("stages must be >= 1")
    first = world.first if isinstance(world, Stream) else world
    return [m(first(n)) for n in range(stages + 1)]


def stabilised(outputs: Sequence[str], fraction: float = 0.5) -> Optional[str]:
    """The output held constant over the last ``fraction`` of stages, if any."""
    tail = outputs[int(len(outputs) * (1 - fraction)):]
    return tail[0] if tail and all(o == tail[0] for o in tail) else None


# ---------------------------------------------------------------------------
# named examples
# ---------------------------------------------------------------------------

def constantly_zero() -> LocallyClosedPresentation:
    """``{000...}`` as the single piece ``W \\ (some one occurs)``."""
    return LocallyClosedPresentation([(WHOLE, SOME_ONE)], ["000..."])


def eventually_zero() -> LocallyClosedPresentation:
    """"Eventually all zeros" split by the position of the last one.

    Piece 1 is ``{000...}``; piece ``k + 1`` holds the worlds whose last one
    sits at position ``k - 1``, labelled ``k=<k>`` (no one at ``>= k``).
    """

    def pair(i):
        if i == 1:
            return WHOLE, SOME_ONE
        k = i - 1
        return bit_at_or_after("1", k - 1), bit_at_or_after("1", k)

    return LocallyClosedPresentation(pair, lambda i: f"k={i - 1}")


def zero_problem() -> list[tuple]:
    return [("some zero", LocallyClosedPresentation([(SOME_ZERO, EMPTY)])),
            ("no zeros", LocallyClosedPresentation([(WHOLE, SOME_ZERO)]))]


EXAMPLES = {
    "some-zero": (lambda: open_verifier(SOME_ZERO, "some zero"),
                  lambda w: "some zero" if "0" in w.bits() else W),
    "constantly-zero": (lambda: limiting_verifier_prop(constantly_zero()),
                        lambda w: "000..." if w.bits() == {"0"} else W),
    "eventually-zero": (lambda: limiting_verifier_prop(eventually_zero()),
                        lambda w: _last_one_label(w)),
    "zero-problem": (lambda: solver_prop(zero_problem()),
                     lambda w: "some zero" if "0" in w.bits() else "no zeros"),
}
"""name -> (method factory, limit the method should reach on a Stream)."""


def _last_one_label(w: Stream) -> str:
    if "1" in w.cycle:
        return W
    if "1" not in w.prefix:
        return "k=0"
    return f"k={w.prefix.rindex('1') + 1}"
