"""How much error does the Hoeffding verifier actually spend?

We test "the coin favours heads" (P{H} > 1/2) on a fair coin, where the
hypothesis is false and every acceptance is an error.  The thresholds are
built so the total error over all sample sizes stays under alpha; here we
look at how the budget is spent and how conservative it is.

Run:  python3 demos/01_error_budget.py
"""
from fractions import Fraction

import numpy as np

from statverify import TrialPlan, bernoulli, run_trials, subbasic_verifier
from statverify.catalog import bias_above
from statverify.verifiers import threshold_schedule

alpha = Fraction(1, 20)
h = bias_above(Fraction(1, 2))

ks = threshold_schedule(h.b, alpha, 2000)
for n in (1, 10, 100, 1000, 2000):
    print(f"n={n:5d}  accept once #H >= {ks[n - 1]:5d}  (fraction {ks[n - 1] / n:.3f})")

# The threshold exceeds n for small n, so the first few tests can never fire.
print("first n where acceptance is possible:", int(np.argmax(ks <= np.arange(1, 2001))) + 1)

v = subbasic_verifier(h, alpha)
fair = run_trials(TrialPlan(v, bernoulli(Fraction(1, 2)), 300, 20_000, master_seed=1))
print(f"\nfair coin, 20000 paths of length 300: summed error {fair.cum_error:.5f} (budget 0.05)")

biased = run_trials(TrialPlan(v, bernoulli(Fraction(3, 5)), 2000, 2000, master_seed=1))
for n in (250, 500, 1000, 2000):
    lo, hi = biased.ci
    print(f"P(H)=0.6: acceptance rate at n={n}: {biased.accept_rate[n - 1]:.3f} "
          f"[{lo[n - 1]:.3f}, {hi[n - 1]:.3f}]")
print(f"accepting at every n in {biased.window}: {biased.eventual_rate:.3f} of paths")
