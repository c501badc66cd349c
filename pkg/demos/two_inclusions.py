"""Two conducting disks in a rectangle: the M = 2 constant system.

With several inclusions the limit constants come from a small linear system
whose matrix A_geom holds the energy products of the harmonic characteristic
functions.  Higher terms stay energy-orthogonal to those functions.

Run:  python3 demos/two_inclusions.py
"""

import numpy as np

from hicontrast import (
    ContrastCoefficient,
    HighScenario,
    PiecewiseData,
    Subdomains,
    build_basis,
    evaluate,
    expand_high,
    generate,
    h1_norm,
    rectangle,
    regular_polygon,
    run_checks,
    solve_direct,
)

disks = [regular_polygon((0.5, 0.5), 0.25, 64), regular_polygon((1.5, 0.5), 0.25, 64)]
mesh = generate(rectangle(0, 0, 2, 1), disks, 0.05)
sub = Subdomains(mesh)
basis = build_basis(sub)
np.set_printoptions(precision=4, suppress=True)
print("A_geom =\n", basis.a_geom)

data = PiecewiseData(forcing=(1.0, 0.0, 2.0), g=(0.2, 1.0, -0.5))
exp = expand_high(HighScenario(mesh, data, order=6), basis)
print("inclusion constants of u_0:", exp.constants_of(0))

for check in run_checks(exp, sub, basis):
    print(" ", check.line())

eta = 1e3
direct, _ = solve_direct(mesh, ContrastCoefficient.high(2, eta), data)
print(f"\nerrors against the direct solve at eta = {eta:g}:")
for i in range(5):
    print(f"  I={i}  {h1_norm(direct - evaluate(exp, eta, i)):.3e}")
