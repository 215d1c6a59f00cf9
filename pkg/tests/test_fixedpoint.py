import dataclasses

import numpy as np
import pytest

import oracles
from advdecay.classify import Asymptotics, shoot_halflinear
from advdecay.core import Constant, EquationSpec, FactorialShift, PhiMap, PowerShift, Trajectory
from advdecay.criteria import euler_spec
from advdecay.exceptions import (
    ConfigurationError,
    HypothesisError,
    InstabilityError,
    PreconditionError,
    TruncationError,
)
from advdecay.fixedpoint import (
    Direction,
    apply_T_forward,
    apply_T_reverse,
    build_envelope,
    iterate_T,
    lemma_est_tail,
)
from advdecay.recursion import residual

EPS = np.finfo(float).eps


@pytest.fixture(scope="module")
def factorial():
    spec = EquationSpec(FactorialShift(1), FactorialShift(2), PhiMap(1.0), 2, 1)
    xs, _ = oracles.factorial_solution(30)
    base = Trajectory.from_values([float(v) for v in xs], spec)
    return spec, base, build_envelope("forward", base, spec)


@pytest.fixture(scope="module")
def euler_reverse():
    half = euler_spec(0.2, 1.0, form="halflinear")
    shot = shoot_halflinear(half, 1.0, 10_000)
    spec = euler_spec(0.2, 1.0, p=2)
    return spec, shot.trajectory, build_envelope("reverse", shot.trajectory, spec)


def test_factorial_constants(factorial):
    _, _, env = factorial
    assert env.bound == 6.0
    assert env.constant == pytest.approx(1 / 7, rel=1e-15)
    assert env.anchor == 1 and env.anchor_quasidiff == pytest.approx(-1.0)
    assert np.all(env.lower <= env.upper)


def test_p1_forward_clamps_m():
    spec = euler_spec(0.2, 1.0, form="halflinear")
    shot = shoot_halflinear(spec, 1.0, 5000)
    env = build_envelope("forward", shot.trajectory, spec)
    assert env.bound == 0.0
    assert env.constant == pytest.approx(1 - 1e-6)


def test_constant_b_p2_bound_is_gamma(euler_reverse):
    _, _, env = euler_reverse
    assert env.bound == pytest.approx(0.2)
    y1 = abs(env.anchor_quasidiff)
    assert env.constant == pytest.approx(y1 / (y1 - 0.2))


def test_forward_exactness(factorial):
    spec, base, env = factorial
    img = apply_T_forward(env.upper, env)
    xq = base.quasidiff[env.indices - base.start_index]
    assert np.max(np.abs(img.quasidiff - xq)) <= 1e-10
    assert img.quasidiff[0] == env.anchor_quasidiff


def test_forward_self_map_and_ordering(factorial):
    spec, base, env = factorial
    rng = np.random.default_rng(7)
    xq = base.quasidiff[env.indices + spec.p - 1 - base.start_index]
    for _ in range(100):
        u = env.lower + (env.upper - env.lower) * rng.random(env.upper.size)
        img = apply_T_forward(u, env)
        tol = 10 * EPS * env.upper
        assert np.all(img.values <= env.upper + tol)
        assert np.all(img.values >= env.lower - tol)
        assert np.all(img.quasidiff >= xq * (1 + 1e-14))
        assert np.all(img.quasidiff <= env.constant * xq * (1 - 1e-14))


def test_forward_lower_seed_stays_inside(factorial):
    _, _, env = factorial
    assert env.violation(apply_T_forward(env.lower, env).values) <= 10 * EPS


@pytest.mark.parametrize("seed", ["upper", "lower", "midpoint"])
def test_forward_iteration_converges(factorial, seed):
    spec, _, env = factorial
    run = iterate_T("forward", env, seed=seed)
    assert run.converged and run.iterations <= 200
    assert run.equation_residual <= 1e-6
    assert run.classification.verdict is Asymptotics.INTERMEDIATE
    h = spec.halflinear().with_start(env.start)
    assert np.max(np.abs(residual(h, run.solution, scale="local"))) <= 1e-6


def test_refeeding_fixed_point(factorial):
    _, _, env = factorial
    run = iterate_T("forward", env, seed="upper")
    again = iterate_T("forward", env, seed=run.solution.values[:-1])
    assert again.iterations == 1 and again.residuals[0] < 1e-6


def test_reverse_self_map_and_ordering(euler_reverse):
    spec, base, env = euler_reverse
    half_q = Trajectory.from_values(base.values, spec.halflinear(), base.start_index).quasidiff
    rng = np.random.default_rng(3)
    for _ in range(20):
        u = env.lower + (env.upper - env.lower) * rng.random(env.upper.size)
        img = apply_T_reverse(u, env)
        assert env.violation(img.values) <= 10 * EPS
        nn = np.arange(env.start, env.start + img.quasidiff.size)
        yq = half_q[nn - spec.p + 1 - base.start_index]
        assert np.all(img.quasidiff <= yq * (1 - 1e-14))
        assert np.all(img.quasidiff >= env.constant * yq * (1 + 1e-14))
    lo = apply_T_reverse(env.lower, env)
    assert np.all(lo.values >= env.lower * (1 - 10 * EPS))


def test_reverse_iteration_solves_advanced_equation(euler_reverse):
    spec, _, env = euler_reverse
    run = iterate_T(Direction.REVERSE, env, seed="lower", tol=1e-6, damping=0.5)
    assert run.converged and run.iterations <= 200
    assert run.equation_residual <= 1e-6
    assert run.solution.start_index == env.anchor == 3
    assert run.classification.verdict is Asymptotics.INTERMEDIATE


def test_reverse_hypothesis_error(euler_reverse):
    _, base, _ = euler_reverse
    heavy = EquationSpec(PowerShift(1.0, -1, 2.0), Constant(5.0), PhiMap(1.0), 2, 2)
    with pytest.raises(HypothesisError, match="later anchor"):
        build_envelope("reverse", base, heavy)


def test_base_preconditions():
    spec = euler_spec(0.2, 1.0, form="halflinear")
    bumpy = Trajectory.from_values([1.0, 0.9, 0.95, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3], spec)
    with pytest.raises(PreconditionError):
        build_envelope("forward", bumpy, spec)
    with pytest.raises(ConfigurationError):
        build_envelope("sideways", bumpy, spec)


def test_short_window_truncation_error(euler_reverse):
    spec, base, _ = euler_reverse
    env = build_envelope("reverse", base.truncated(16), spec)
    with pytest.raises(TruncationError):
        apply_T_reverse(env.lower, env)


def test_instability_detected(factorial):
    _, _, env = factorial
    bad = dataclasses.replace(env, lower=0.9 * env.upper, constant=0.9)
    with pytest.raises(InstabilityError):
        iterate_T("forward", bad, seed=env.upper, tol=1e-9)


def test_non_convergence_reported(factorial):
    _, _, env = factorial
    run = iterate_T("forward", env, seed="lower", max_iter=3)
    assert not run.converged and run.solution is None and len(run.residuals) == 3


def test_normalization_rescales_back():
    spec = EquationSpec(FactorialShift(1), FactorialShift(2), PhiMap(1.0), 2, 1)
    xs, _ = oracles.factorial_solution(30)
    big = Trajectory.from_values([5.0 * float(v) for v in xs], spec)
    env = build_envelope("forward", big, spec)
    assert env.scale == pytest.approx(0.2)
    run = iterate_T("forward", env)
    assert run.solution.values[0] == pytest.approx(5.0 * 0.25, rel=1e-6)


def test_lemma_bound(factorial):
    spec, base, _ = factorial
    b = [lemma_est_tail(base, spec, n) for n in range(5, 13)]
    assert all(x > y for x, y in zip(b, b[1:]))
    with pytest.raises(PreconditionError):
        lemma_est_tail(base.scaled(3.0, 1.0), spec, 5)


def test_lemma_bound_p1_alpha1_pieces():
    spec = euler_spec(0.2, 1.0, form="halflinear")
    shot = shoot_halflinear(spec, 1.0, 2000)
    base = shot.trajectory
    n = 50
    c = abs(base.quasidiff[0])       # the B(p-1) term is absent for p = 1
    expected = c * oracles.hurwitz_tail(2, n) + base.value_at(n)
    assert lemma_est_tail(base, spec, n) == pytest.approx(expected, rel=1e-12)
