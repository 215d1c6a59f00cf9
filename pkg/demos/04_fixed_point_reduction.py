"""
Passing between advanced and half-linear equations
==================================================

An intermediate solution of one equation generates, through a Picard
iteration inside an envelope, one of the other.  Forward: the factorial
solution of the p = 2 equation gives a solution of the half-linear equation
with weight a_{n+1}.  Reverse: the shot Euler solution gives one of the
advanced equation.
"""

from math import factorial

import numpy as np

from advdecay import (
    EquationSpec,
    FactorialShift,
    PhiMap,
    Trajectory,
    apply_T_forward,
    build_envelope,
    euler_spec,
    iterate_T,
    shoot_halflinear,
)

spec = EquationSpec(FactorialShift(1), FactorialShift(2), PhiMap(1.0), p=2, start_index=1)
base = Trajectory.from_values([1 / factorial(n) for n in range(1, 31)], spec)
env = build_envelope("forward", base, spec)
print(f"forward envelope on [{env.start}, {env.stop}], M = {env.constant:.6f}")

# the upper boundary is mapped to something with exactly the base quasidifference
img = apply_T_forward(env.upper, env)
print("exactness error:", np.max(np.abs(img.quasidiff - base.quasidiff[env.indices - 1])))

run = iterate_T("forward", env, seed="upper")
print(f"forward: converged={run.converged} after {run.iterations} iterations, verdict {run.classification.verdict.value}")

half = euler_spec(0.2, 1.0, form="halflinear")
shot = shoot_halflinear(half, 1.0, 10_000)
adv = euler_spec(0.2, 1.0, p=2)
renv = build_envelope("reverse", shot.trajectory, adv)
rrun = iterate_T("reverse", renv, seed="lower")
print(f"reverse: H = {renv.constant:.6f}, converged={rrun.converged} after {rrun.iterations} iterations")
print(f"  residual in the p = 2 equation {rrun.equation_residual:.2e}, verdict {rrun.classification.verdict.value}")
