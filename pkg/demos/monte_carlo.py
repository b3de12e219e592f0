"""
Repeat the experiment run by run.

Each run is kept with the postselection probability, and every kept run
yields one pointer reading drawn from the postselected pointer density.
The sample mean over g scatters around the exact value with a standard
error that shrinks like one over the square root of the kept runs.

    python3 demos/monte_carlo.py
"""

from weakvalues import protocol as pr
from weakvalues.scenarios import builtin

s = builtin("simple-mzi")
g = 0.05
for runs in (10_000, 100_000, 1_000_000):
    mc = pr.monte_carlo_weak_value(s, g, runs, seed=7)
    pull = (mc.estimate - mc.exact) / mc.stderr
    print(f"{runs:>9} runs: {mc.estimate:+.4f} +- {mc.stderr:.4f} "
          f"(exact {mc.exact:+.6f}, {pull:+.2f} stderr, {mc.accepted} kept)")
