"""An almost insulating inclusion: conductivity eps in a disk of radius 1/2.

Two regimes show up.  With a source inside the inclusion, the solution
grows like 1/eps and the leading term u_{-1} carries it.  Without a source
u_{-1} vanishes and u_eps approaches u_0 at rate eps.

Run:  python3 demos/low_contrast.py
"""

import numpy as np

from hicontrast import (
    ContrastCoefficient,
    LowScenario,
    PiecewiseData,
    Subdomains,
    evaluate_low,
    expand_low,
    generate,
    h1_norm,
    regular_polygon,
    solve_direct,
)

mesh = generate(regular_polygon((0, 0), 1.0, 64), [regular_polygon((0, 0), 0.5, 64)], 0.05)
sub = Subdomains(mesh)
eps_values = [1e-2, 1e-3, 1e-4, 1e-5]

forced = PiecewiseData(forcing=(0.0, 1.0), g=(0.0, 1.0, 0.0))
norms = [h1_norm(solve_direct(mesh, ContrastCoefficient.low(1, e), forced)[0]) for e in eps_values]
slope = np.polyfit(np.log(eps_values), np.log(norms), 1)[0]
print("source inside the inclusion")
for e, n in zip(eps_values, norms):
    print(f"  eps={e:.0e}  |u_eps|_H1 = {n:.4e}")
print(f"  log-log slope {slope:.3f}  (blow-up like 1/eps)")

exp = expand_low(LowScenario(mesh, forced, order=4), sub)
direct, _ = solve_direct(mesh, ContrastCoefficient.low(1, 1e-3), forced)
print("  relative error of partial sums at eps=1e-3:",
      ", ".join(f"{h1_norm(direct - evaluate_low(exp, 1e-3, i)) / h1_norm(direct):.1e}" for i in range(-1, 4)))

plain = PiecewiseData(forcing=(0.0, 0.0), g=(0.0, 1.0, 0.0))
exp = expand_low(LowScenario(mesh, plain, order=0), sub)
print("\nno source inside the inclusion")
print(f"  max |u_-1| = {np.abs(exp.term(-1).values).max():.1e}")
errs = [h1_norm(solve_direct(mesh, ContrastCoefficient.low(1, e), plain)[0] - exp.term(0)) for e in eps_values]
for e, err in zip(eps_values, errs):
    print(f"  eps={e:.0e}  |u_eps - u_0|_H1 = {err:.4e}")
print(f"  log-log slope {np.polyfit(np.log(eps_values), np.log(errs), 1)[0]:.3f}  (first order in eps)")
print(f"  u_0(0.75, 0) = {exp.term(0)(0.75, 0.0):.4f}   insulating-core value {(0.75 + 0.25 / 0.75) / 1.25:.4f}")
