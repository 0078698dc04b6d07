"""Sequential statistical verification over the weak topology.

The package is organised around a handful of modules:

* ``measures``: sample spaces, events, worlds and seeded sampling
* ``hypotheses``: hypothesis ASTs with an exact membership oracle
* ``verifiers``: Hoeffding-threshold verifiers, combinators, limiting
  verifiers and partition solvers
* ``montecarlo``: the trial harness and claim certification
* ``propositional``: learning on binary streams from cylinder information
* ``cli``: the config-driven experiment runner (``statverify`` command)
"""
from .hypotheses import (
    IN, OUT, UNKNOWN, And, Band, ClosedComplement, FSigma, Membership, Or, Partition,
    SubBasic, band_as_intersection, closed_band, contains,
)
from .measures import (
    COIN, REAL_LINE, Event, NotContinuitySet, SampleSpace, SampleVector, SpaceMismatch,
    World, bernoulli, empirical_count, finite_world, is_feasible, prob, real_world, sample,
    sample_paths, uniform, weak_convergence_check,
)
from .montecarlo import (
    ClaimResult, GroundTruthMismatch, TrialPlan, TrialReport, certify, run_trials,
)
from .verifiers import (
    CONTINUE, Accept, LimitingVerifier, Solver, Verdict, VerifierFamily, build_verifier,
    conjoin, disjoin, hoeffding_threshold, limiting_verifier, run, solver, subbasic_verifier,
)

__version__ = "0.1.0"
