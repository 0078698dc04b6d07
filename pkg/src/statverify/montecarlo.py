"""Deterministic Monte Carlo harness for verifier families.

Each trial ``t`` draws one sample path keyed by ``(master_seed, t)`` and every
prefix of that path is tested, so a trial is a realisation of the whole
sequence ``lambda_1, lambda_2, ...`` on one infinite sample.  Reports keep raw
counts, which makes merging reports over disjoint trial ranges exact.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import NormalDist
from typing import Iterable, Optional, Sequence

import numpy as np

from .hypotheses import IN, OUT, Membership, contains
from .measures import World, sample_paths
from .verifiers import Solver, VerifierFamily

Z95 = NormalDist().inv_cdf(0.975)
MAX_CELLS = 4_000_000


class GroundTruthMismatch(ValueError):
    def __init__(self, msg: str = "claim/ground-truth mismatch"):
        super().__init__(msg)


@dataclass
class TrialPlan:
    verifier: VerifierFamily
    world: World
    n_max: int
    trials: int
    master_seed: int
    convergence_target: float = 0.95
    depth: int = 64

    def __post_init__(self):
        if self.trials < 1 or self.n_max < 1:
            raise ValueError("trials and n_max must be >= 1")


def wilson_interval(successes, trials, z: float = Z95):
    """Two-sided Wilson score interval, vectorised over ``successes``."""
    k = np.asarray(successes, dtype=float)
    p = k / trials
    denom = 1 + z**2 / trials
    centre = (p + z**2 / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return np.clip(centre - half, 0, 1), np.clip(centre + half, 0, 1)


def eventual_window(n_max: int) -> tuple[int, int]:
    """Sizes ``(first, last)`` making up the last quarter of the horizon."""
    return n_max - max(1, n_max // 4) + 1, n_max


@dataclass
class TrialReport:
    """Per-size acceptance counts and the statistics derived from them.

    ``eventual_rate`` is the horizon-truncated stand-in for the liminf event:
    the fraction of paths accepting at every size in ``window``.
    """

    verifier: str
    world: str
    n_max: int
    trials: int
    accept_counts: list
    eventual_count: int
    membership: str
    truth: Optional[str] = None
    alpha: Optional[str] = None
    convergence_target: float = 0.95
    window: tuple = field(default=(0, 0))

    def __post_init__(self):
        self.accept_counts = [int(c) for c in self.accept_counts]
        self.window = tuple(self.window) if self.window != (0, 0) else eventual_window(self.n_max)

    @property
    def accept_rate(self) -> np.ndarray:
        return np.asarray(self.accept_counts, dtype=float) / self.trials

    @property
    def ci(self) -> tuple[np.ndarray, np.ndarray]:
        return wilson_interval(self.accept_counts, self.trials)

    @property
    def cum_error_series(self) -> np.ndarray:
        return np.cumsum(self.accept_rate)

    @property
    def cum_error(self) -> float:
        return float(self.accept_rate.sum())

    @property
    def eventual_rate(self) -> float:
        return self.eventual_count / self.trials

    def convergence_n(self, target: Optional[float] = None) -> Optional[int]:
        target = self.convergence_target if target is None else target
        hits = np.nonzero(self.accept_rate >= target)[0]
        return int(hits[0]) + 1 if hits.size else None

    def merge(self, other: "TrialReport") -> "TrialReport":
        """Combine reports over disjoint trial ranges of the same plan."""
        same = ("verifier", "world", "n_max", "membership", "truth", "alpha", "window")
        for name in same:
            if getattr(self, name) != getattr(other, name):
                raise ValueError(f"cannot merge reports differing in {name}")
        return TrialReport(
            self.verifier, self.world, self.n_max, self.trials + other.trials,
            [a + b for a, b in zip(self.accept_counts, other.accept_counts)],
            self.eventual_count + other.eventual_count, self.membership, self.truth,
            self.alpha, self.convergence_target, self.window)

    def rows(self) -> list[tuple]:
        """Long-format rows ``(n, accept_rate, ci_low, ci_high, cum_error)``."""
        lo, hi = self.ci
        return [(n + 1, r, l, h, c) for n, (r, l, h, c) in
                enumerate(zip(self.accept_rate, lo, hi, self.cum_error_series))]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialReport":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrialReport":
        return cls.from_dict(json.loads(text))


def _ground_truth(plan: TrialPlan):
    v = plan.verifier
    if isinstance(v, Solver):
        truth = v.problem.classify(plan.world, plan.depth)
        return IN, truth, {v.code_of(truth)}
    return contains(v.target, plan.world, plan.depth), None, None


def _chunk_counts(plan: TrialPlan, trials: Sequence[int], accept_codes):
    paths = sample_paths(plan.world, plan.n_max, plan.master_seed, trials)
    codes = plan.verifier.decide(paths)
    if accept_codes is None:
        accepted = codes > 0
    else:
        accepted = np.isin(codes, list(accept_codes))
    first, last = eventual_window(plan.n_max)
    eventual = accepted[:, first - 1:last].all(axis=1)
    return accepted.sum(axis=0).astype(np.int64), int(eventual.sum())


def run_trials(plan: TrialPlan, trial_indices: Optional[Iterable[int]] = None,
               workers: int = 1) -> TrialReport:
    """Run ``plan`` (or the given subset of its trial indices) and aggregate.

    Trials are processed in memory-bounded chunks, optionally on a thread
    pool; the result does not depend on chunking or evaluation order.
    """
    plan.verifier.check_feasible(plan.world, plan.n_max)
    membership, truth, accept_codes = _ground_truth(plan)
    indices = list(range(plan.trials) if trial_indices is None else trial_indices)
    if not indices:
        raise ValueError("no trials to run")
    per_chunk = max(1, MAX_CELLS // plan.n_max)
    chunks = [indices[i:i + per_chunk] for i in range(0, len(indices), per_chunk)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda c: _chunk_counts(plan, c, accept_codes), chunks))
    else:
        results = [_chunk_counts(plan, c, accept_codes) for c in chunks]
    counts = np.sum([r[0] for r in results], axis=0)
    eventual = sum(r[1] for r in results)
    return TrialReport(
        verifier=repr(plan.verifier), world=repr(plan.world), n_max=plan.n_max,
        trials=len(indices), accept_counts=counts.tolist(), eventual_count=eventual,
        membership=str(membership), truth=truth, alpha=str(plan.verifier.alpha),
        convergence_target=plan.convergence_target)


@dataclass(frozen=True)
class ClaimResult:
    kind: str
    passed: bool
    value: float
    bound: float

    @property
    def margin(self) -> float:
        # positive when the claim holds with room to spare
        if self.kind == "sv3-bound":
            return self.bound - self.value
        if self.kind == "convergence":
            return self.bound - self.value if math.isfinite(self.value) else -math.inf
        return self.value - self.bound


def mc_sigma(alpha: float, trials: int) -> float:
    return math.sqrt(alpha / trials)


def certify(report: TrialReport, claims: Sequence[dict]) -> list[ClaimResult]:
    """Check SV3 / SV4 / convergence claims against a report.

    ``sv3-bound`` (params ``alpha``) passes iff ``cum_error <= alpha + 3 sigma``
    with ``sigma = sqrt(alpha / trials)``; ``sv4-eventual`` (``target``) iff
    ``eventual_rate >= target``; ``convergence`` (``target``, ``horizon``) iff
    the first size reaching ``target`` is at most ``horizon``.  The world's
    classification comes from the membership oracle recorded in the report.
    """
    membership = Membership(report.membership)
    out = []
    for claim in claims:
        kind = claim["kind"]
        if kind == "sv3-bound":
            if membership is IN:
                raise GroundTruthMismatch()
            alpha = float(claim["alpha"])
            bound = alpha + 3 * mc_sigma(alpha, report.trials)
            value = report.cum_error
            out.append(ClaimResult(kind, value <= bound, value, bound))
        elif kind == "sv4-eventual":
            if membership is OUT:
                raise GroundTruthMismatch()
            target = float(claim.get("target", 0.95))
            value = report.eventual_rate
            out.append(ClaimResult(kind, value >= target, value, target))
        elif kind == "convergence":
            if membership is OUT:
                raise GroundTruthMismatch()
            target = float(claim.get("target", report.convergence_target))
            horizon = int(claim.get("horizon", report.n_max))
            n = report.convergence_n(target)
            value = math.inf if n is None else float(n)
            out.append(ClaimResult(kind, n is not None and n <= horizon, value, float(horizon)))
        else:
            raise ValueError(f"unknown claim kind {kind!r}")
    return out
