"""
Series criteria for existence of intermediate solutions
=======================================================

Two partial sums decide whether decaying solutions with unbounded
quasidifference can exist.  For geometric weights both converge to 1;
for the Euler weights the second grows like gamma log N.
"""

import numpy as np

from advdecay import Constant, EquationSpec, PhiMap, criterion_series, euler_spec, geometric_table

geo = EquationSpec(geometric_table(1.0, 2.0, 1, 200), Constant(1.0), PhiMap(1.0), p=1, start_index=1)
rep = criterion_series(geo, N=100)
print("geometric: J1 =", rep.j1.last, " J2 =", rep.j2.last, " ->", rep.combined.value)

eul = criterion_series(euler_spec(0.2, 1.0, p=2, form="criteria"), shifted=True)
inc = eul.j2.doubling_increments()
print("Euler gamma=0.2, p=2: last doubling increments of J2", np.round(inc[-4:], 5))
print("  gamma log 2 =", round(0.2 * np.log(2), 5), " model:", eul.j2.model.kind, " ->", eul.combined.value)
