"""
A closed-form solution as a sanity check
========================================

With a_n = (n+1)!, b_n = (n+2)!, alpha = 1 and advance p = 2 the sequence
x_n = 1/n! solves the equation exactly, and its quasidifference is -n.
Marching forward from x_1 = 1, x_2 = 1/2 should reproduce it.
"""

from math import factorial

import numpy as np

from advdecay import Constant, EquationSpec, FactorialShift, InitialData, PhiMap, classify, residual, simulate

spec = EquationSpec(FactorialShift(1), FactorialShift(2), PhiMap(1.0), p=2, start_index=1)
tr = simulate(spec, InitialData(1, (1.0, 0.5)), 14)

exact = np.array([1 / factorial(n) for n in tr.indices])
print("n   x_n                   rel. error   x^[1]_n")
for n, x, e, q in zip(tr.indices, tr.values, tr.values / exact - 1, np.append(tr.quasidiff, np.nan)):
    print(f"{n:<3d} {x:<21.15e} {e:+.2e}    {q:.12g}")

# residual scaled by b_n is at rounding level
print("max |residual| / b_n:", np.max(np.abs(residual(spec, tr, scale="b"))))

# decreasing to zero with an unbounded quasidifference
print("verdict:", classify(tr, spec).verdict.value)

# past n ~ 15 the dominant solution takes over: the forward march is unstable
long = simulate(spec, InitialData(1, (1.0, 0.5)), 22)
print("x_22 marched:", long.values[-1], " exact:", 1 / factorial(22))
