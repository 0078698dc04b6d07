"""Limiting verifiers and a three-answer solver for a coin's bias.

"P{H} <= 1/2" is closed, so it cannot be verified outright, but a limiting
verifier can settle on it: it keeps outputting the piece until the
complementary test rejects it.  On a world where the piece is false that
takes a while, which is visible in the early output rates below.

The solver interleaves the closed pieces of all answers and names the answer
owning the first surviving piece.

Run:  python3 demos/03_limits_and_solvers.py
"""
from fractions import Fraction

from statverify import TrialPlan, bernoulli, limiting_verifier, run_trials, solver
from statverify.catalog import bias_at_most, three_cell_bias

alpha = Fraction(1, 20)
lv = limiting_verifier(bias_at_most(Fraction(1, 2)), alpha)
for p in ("0.4", "0.6"):
    rep = run_trials(TrialPlan(lv, bernoulli(p), 2000, 1000, master_seed=3))
    rates = ", ".join(f"n={n}: {rep.accept_rate[n - 1]:.3f}" for n in (100, 500, 1000, 1500, 2000))
    print(f"Bernoulli({p}): piece output rate {rates}")

s = solver(three_cell_bias(), alpha)
for p in ("0.2", "0.4", "1/2", "0.8"):
    rep = run_trials(TrialPlan(s, bernoulli(p), 5000, 300, master_seed=3))
    print(f"Bernoulli({p}): true answer {rep.truth!r}, correct throughout the last quarter "
          f"on {rep.eventual_rate:.2f} of paths, first n with 95% correct: {rep.convergence_n(0.95)}")
