"""
Shooting across the Euler threshold
===================================

For the half-linear Euler equation Delta(n^2 Phi(Delta x_n)) + gamma Phi(x_{n+1}) = 0
the nonoscillation threshold is gamma* = (1/(1+alpha))^(alpha+1).  Below it a
bisection on the initial quasidifference finds a positive decreasing solution.
Above it every scanned value eventually crosses zero.
"""

import time

from advdecay import classify, euler_spec, euler_threshold, shoot_halflinear

for alpha in (1.0, 2.0):
    print(f"alpha = {alpha:g}, threshold = {euler_threshold(alpha):.6f}")
    gammas = (0.1, 0.2, 0.24, 0.5) if alpha == 1.0 else (0.02, 0.03, 0.1)
    for gamma in gammas:
        spec = euler_spec(gamma, alpha, form="halflinear")
        t0 = time.perf_counter()
        res = shoot_halflinear(spec, x_start=1.0, horizon=10_000)
        dt = time.perf_counter() - t0
        line = f"  gamma = {gamma:<5g} {res.outcome.value:<18s} ({dt:.2f} s)"
        if res.trajectory is not None:
            tr = res.trajectory
            verdict = classify(tr, spec).verdict.value
            line += f"  c* = {res.critical_quasidiff:.10f}  x_N = {tr.values[-1]:.3e}  x^[1]_N = {tr.quasidiff[-1]:.3f}  {verdict}"
        print(line)

# Near the threshold the solutions oscillate with very long periods: at gamma = 0.3
# the zeros are so far apart that a horizon of 10^4 still sees a positive solution.
res = shoot_halflinear(euler_spec(0.3, 1.0, form="halflinear"), 1.0, 10_000)
print("gamma = 0.3 at N = 1e4:", res.outcome.value, "- crossings in scan:", sum(s.crossed for s in res.scan))
