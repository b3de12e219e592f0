"""
Recover a weak value from simulated pointer statistics.

The pointer mean over g approaches Re S_w as the coupling weakens.  Two
routes reach the limit: shrink g at fixed pointer width, or widen the
pointer at fixed g.  Both are extrapolated polynomially and should land on
the analytic value.

    python3 demos/weak_limit.py
"""

from weakvalues import analysis as an
from weakvalues import protocol as pr
from weakvalues.scenarios import builtin

s = builtin("nested-mzi")
print(f"{s.name} [{s.observable_name}], analytic {an.analytic_weak_value(s).real:+.6f}\n")

est = pr.operational_weak_value(s)
print(f"{'g':>12} {'<Q>/g':>22} {'p(f)':>10}")
for (g, _, ratio), p in zip(est.per_g_table, est.postselection_probabilities):
    print(f"{g:12.6f} {ratio:22.15f} {p:10.6f}")
print(f"extrapolated {est.value:+.12f}  residual {est.residual:.1e}\n")

est = pr.delta_sweep_weak_value(s, g=0.05)
print(f"{'delta':>12} {'<Q>/g':>22}")
for d, _, ratio in est.per_g_table:
    print(f"{d:12.3f} {ratio:22.15f}")
print(f"extrapolated {est.value:+.12f}  residual {est.residual:.1e}\n")

# Away from the weak regime the pointer mean is no longer linear in g.
for g in (0.5, 1.0, 2.0):
    mean, p = pr.pointer_mean_postselected(s, g)
    print(f"g = {g:3.1f}: <Q>/g = {mean / g:+.4f}, p(f) = {p:.4f}")
