"""Integrators against closed forms, Richardson orders, and a fine-step oracle."""

import math

import pytest

from wdyn.errors import ArgumentError, DivergenceError
from wdyn.linalg import Matrix, matmul
from wdyn.ode import OdeProblem, bdf_solve, latent_step, rk4_solve
from wdyn.rng import Rng
from wdyn.systems import BrusselatorParams, brusselator_problem


def scalar_problem(fn, input_signal=None, n_inputs=0, jac=None):
    return OdeProblem(1, lambda t, x, u: [fn(t, x[0], u)],
                      jacobian=jac, input_signal=input_signal,
                      n_inputs=n_inputs)


def expm_oracle(a: Matrix, order=24, squarings=8) -> Matrix:
    """Scaling-and-squaring Taylor exponential, independent of the solvers."""
    n = a.rows
    scaled = a.scaled(1.0 / (1 << squarings))
    result = Matrix.identity(n)
    term = Matrix.identity(n)
    for k in range(1, order + 1):
        term = matmul(term, scaled).scaled(1.0 / k)
        result = result.add(term)
    for _ in range(squarings):
        result = matmul(result, result)
    return result


# ---------------------------------------------------------------------------
# rk4_solve
# ---------------------------------------------------------------------------

def test_rk4_constant_rhs_zero():
    traj = rk4_solve(scalar_problem(lambda t, x, u: 0.0), [1.0], 0.0, 1.0, 0.1)
    assert all(abs(traj.x.get(k, 0) - 1.0) == 0.0 for k in range(traj.length))


def test_rk4_exponential_decay():
    traj = rk4_solve(scalar_problem(lambda t, x, u: -x), [1.0], 0.0, 1.0, 0.01)
    assert abs(traj.x.get(traj.length - 1, 0) - math.exp(-1.0)) < 1e-9


def test_rk4_harmonic_energy_drift():
    prob = OdeProblem(2, lambda t, x, u: [x[1], -x[0]])
    traj = rk4_solve(prob, [1.0, 0.0], 0.0, 20.0, 0.01)
    e0 = 0.5 * (traj.x.get(0, 0) ** 2 + traj.x.get(0, 1) ** 2)
    worst = max(
        abs(0.5 * (traj.x.get(k, 0) ** 2 + traj.x.get(k, 1) ** 2) - e0) / e0
        for k in range(traj.length)
    )
    assert worst <= 1e-6


def test_rk4_empirical_order_four():
    errs = []
    for dt in (0.1, 0.05, 0.025):
        traj = rk4_solve(scalar_problem(lambda t, x, u: -x), [1.0],
                         0.0, 1.0, dt)
        errs.append(abs(traj.x.get(traj.length - 1, 0) - math.exp(-1.0)))
    order1 = math.log2(errs[0] / errs[1])
    order2 = math.log2(errs[1] / errs[2])
    assert abs(order1 - 4.0) <= 0.2
    assert abs(order2 - 4.0) <= 0.2


def test_rk4_zero_order_hold_contract():
    # A u(t) change strictly inside a step cannot alter that step's output.
    def make_signal(bump):
        def signal(t):
            frac = t - math.floor(t / 0.1) * 0.1
            return [bump if 0.02 < frac < 0.08 else 1.0]
        return signal

    def rhs(t, x, u):
        return [-x[0] + u[0]]

    a = rk4_solve(OdeProblem(1, rhs, input_signal=make_signal(1.0),
                             n_inputs=1), [0.0], 0.0, 1.0, 0.1)
    b = rk4_solve(OdeProblem(1, rhs, input_signal=make_signal(55.0),
                             n_inputs=1), [0.0], 0.0, 1.0, 0.1)
    assert a.x.data == b.x.data


def test_rk4_divergence_reported():
    with pytest.raises(DivergenceError):
        rk4_solve(scalar_problem(lambda t, x, u: x * x), [3.0], 0.0, 5.0, 0.5)


def test_rk4_argument_errors():
    p = scalar_problem(lambda t, x, u: -x)
    with pytest.raises(ArgumentError):
        rk4_solve(p, [1.0], 0.0, 1.0, -0.1)
    with pytest.raises(ArgumentError):
        rk4_solve(p, [1.0], 1.0, 0.0, 0.1)


# ---------------------------------------------------------------------------
# bdf_solve
# ---------------------------------------------------------------------------

def test_bdf_exponential_decay():
    traj = bdf_solve(scalar_problem(lambda t, x, u: -x), [1.0], 0.0, 1.0,
                     0.1, 0.01)
    assert abs(traj.x.get(traj.length - 1, 0) - math.exp(-1.0)) < 1e-4


def test_bdf_stable_where_rk4_blows_up():
    # dx/dt = -1000 (x - cos t): lambda h = -10 sits far outside the RK4
    # stability region but is no problem for BDF2.
    def rhs(t, x, u):
        return [-1000.0 * (x[0] - math.cos(t))]

    def jac(t, x, u):
        return Matrix.from_rows([[-1000.0]])

    with pytest.raises(DivergenceError):
        rk4_solve(OdeProblem(1, rhs), [0.0], 0.0, 2.0, 0.01)
    traj = bdf_solve(OdeProblem(1, rhs, jacobian=jac), [0.0], 0.0, 2.0,
                     0.1, 0.01)
    assert max(abs(v) for v in traj.x.data) < 2.0


def test_bdf_brusselator_vs_fine_rk4_reference():
    p = BrusselatorParams(a=1.0, b=5.0)
    x0 = [1.2, 3.1]
    bdf = bdf_solve(brusselator_problem(p), x0, 0.0, 2.0, 0.2, 0.002)
    ref = rk4_solve(brusselator_problem(p), x0, 0.0, 2.0, 1e-4)
    worst = 0.0
    for k in range(bdf.length):
        ref_k = int(round(bdf.t[k] / 1e-4))
        for j in range(2):
            worst = max(worst, abs(bdf.x.get(k, j) - ref.x.get(ref_k, j)))
    assert worst <= 1e-3


def test_bdf_empirical_order_two():
    errs = []
    for dt in (0.02, 0.01, 0.005):
        traj = bdf_solve(scalar_problem(lambda t, x, u: -x), [1.0],
                         0.0, 1.0, 0.1, dt, newton_tol=1e-13)
        errs.append(abs(traj.x.get(traj.length - 1, 0) - math.exp(-1.0)))
    order1 = math.log2(errs[0] / errs[1])
    order2 = math.log2(errs[1] / errs[2])
    assert abs(order1 - 2.0) <= 0.3
    assert abs(order2 - 2.0) <= 0.3


def test_bdf_finite_difference_jacobian_fallback():
    traj = bdf_solve(scalar_problem(lambda t, x, u: -x), [1.0], 0.0, 1.0,
                     0.1, 0.01)
    traj_fd = bdf_solve(
        OdeProblem(1, lambda t, x, u: [-x[0]]), [1.0], 0.0, 1.0, 0.1, 0.01)
    for k in range(traj.length):
        assert abs(traj.x.get(k, 0) - traj_fd.x.get(k, 0)) < 1e-9


def test_bdf_rejects_bad_substep():
    p = scalar_problem(lambda t, x, u: -x)
    with pytest.raises(ArgumentError):
        bdf_solve(p, [1.0], 0.0, 1.0, 0.1, 0.2)
    with pytest.raises(ArgumentError):
        bdf_solve(p, [1.0], 0.0, 1.0, 0.1, 0.03)


# ---------------------------------------------------------------------------
# latent_step
# ---------------------------------------------------------------------------

def test_latent_step_zero_field():
    w = Matrix.column([1.0, -2.0, 0.5])
    out = latent_step(lambda w_, u_: Matrix.zeros(3, 1), w, Matrix.zeros(0, 1),
                      0.1)
    assert out.data == w.data


def test_latent_step_matches_rk4_polynomial():
    # dw/dt = -w, one step of dt: RK4 gives the degree-4 Taylor polynomial
    w = Matrix.column([1.0])
    out = latent_step(lambda w_, u_: w_.scaled(-1.0), w, Matrix.zeros(0, 1),
                      0.1)
    poly = 1.0 - 0.1 + 0.1 ** 2 / 2 - 0.1 ** 3 / 6 + 0.1 ** 4 / 24
    assert abs(out.get(0, 0) - poly) < 1e-15
    assert abs(out.get(0, 0) - math.exp(-0.1)) < 0.1 ** 5


def test_latent_step_linear_field_vs_expm_oracle():
    rng = Rng(77)
    n = 5
    a = Matrix(n, n, [rng.uniform(-1.0, 1.0) for _ in range(n * n)])
    for i in range(n):
        a.data[i * n + i] -= 2.0  # keep it comfortably stable
    w0 = Matrix.column([rng.uniform(-1.0, 1.0) for _ in range(n)])
    dt = 0.05
    stepped = latent_step(lambda w_, u_: matmul(a, w_), w0,
                          Matrix.zeros(0, 1), dt)
    exact = matmul(expm_oracle(a.scaled(dt)), w0)
    assert stepped.sub(exact).max_abs() <= 10.0 * dt ** 5
