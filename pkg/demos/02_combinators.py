"""Building verifiers for bands and unions out of single thresholds.

A band a < P{H} < b is the conjunction of two one-sided hypotheses, each
tested at the full level.  A countable union splits the level as alpha/2^i and
only lets disjunct i speak once n >= i.

Run:  python3 demos/02_combinators.py
"""
from fractions import Fraction

from statverify import Band, TrialPlan, bernoulli, build_verifier, run_trials
from statverify.catalog import HEADS, dyadic_union

alpha = Fraction(1, 20)
band = build_verifier(Band(HEADS, Fraction(3, 10), Fraction(7, 10)), alpha)

for p in ("1/2", "0.65", "0.9"):
    rep = run_trials(TrialPlan(band, bernoulli(p), 2000, 1000, master_seed=2))
    print(f"band 0.3 < P(H) < 0.7 on Bernoulli({p}): membership {rep.membership}, "
          f"final rate {rep.accept_rate[-1]:.3f}, reaches 0.95 at n={rep.convergence_n(0.95)}, "
          f"summed rate {rep.cum_error:.1f}")

# P{H} > 1/2 written as the union of P{H} > 1/2 + 2^-i.  Coarse disjuncts get a
# generous share of alpha but ask for a large margin; fine ones ask for little
# margin but are tested at a tiny level.  On Bernoulli(0.6) the useful ones are
# around i = 5 or 6.
union = dyadic_union(HEADS, Fraction(1, 2), alpha)
rep = run_trials(TrialPlan(union, bernoulli("0.6"), 4000, 500, master_seed=2))
print(f"\nunion on Bernoulli(0.6): reaches 0.95 at n={rep.convergence_n(0.95)}")
rep = run_trials(TrialPlan(union, bernoulli("0.5"), 1000, 2000, master_seed=2))
print(f"union on the fair coin: summed error {rep.cum_error:.4f}")
