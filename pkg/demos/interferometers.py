"""
Walk through the built-in interferometers.

For each scenario and each of its named observables, print the analytic
weak value, the behaviour class, and the derailment trace.  The trace shows
where the probe's source state S|in> stops overlapping the undisturbed
state, which is what separates a representative weak value from one
produced by the measurement itself.

    python3 demos/interferometers.py
"""

from weakvalues import analysis as an
from weakvalues import hilbert as hb
from weakvalues.scenarios import BUILTINS, builtin


def fmt(z):
    z = complex(z)
    if abs(z.imag) < 1e-12:
        return f"{z.real:+.4f}"
    return f"{z.real:+.4f}{z.imag:+.4f}i"


for name in sorted(BUILTINS):
    print(f"== {name}")
    for obs in builtin(name).observables:
        d = an.classify(builtin(name, obs))
        print(f"  {obs:<10} weak value {fmt(d.analytic_weak_value)}   {d.behavior}")
        for t in d.trace:
            print(f"      {t.stage:<6} full {fmt(t.full_overlap)}   live {fmt(t.live_overlap)}")
        if d.caveat:
            print(f"      note: {d.caveat}")
    print()

# Channel decomposition of the nested interferometer's input: the arm
# projectors' weak values add up to one even though B's is negative.
s = builtin("nested-mzi")
arms = [hb.basis_state(s.basis, lab) for lab in "ABC"]
values = an.channel_weak_values(s, arms)
print("nested-mzi arms A, B, C:", ", ".join(fmt(v) for v in values), "sum", fmt(sum(values)))
