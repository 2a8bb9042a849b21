"""Fixed-step ODE integration for ground-truth data and latent rollouts.

rk4_solve is the classical 4th-order Runge-Kutta with the control held at its
value from the start of each step (zero-order hold).  bdf_solve is a 2nd-order
backward differentiation formula advanced at an inner substep and sampled at
the output step; the first inner step bootstraps with backward Euler, and each
implicit step is solved by a damped-free Newton iteration with an analytic or
finite-difference Jacobian.

Both integrators are deliberately fixed-step: reproducibility at a fixed seed
matters more here than adaptive efficiency.
"""

from array import array
from math import fabs, isfinite, sqrt

from .errors import ArgumentError, DivergenceError, StiffnessError
from .linalg import LuFactor, Matrix


class OdeProblem:
    """Continuous-time system dx/dt = rhs(t, x, u) with u = input_signal(t).

    rhs and input_signal work on plain float lists; jacobian (optional)
    returns a dim x dim Matrix and enables fast Newton steps in bdf_solve.
    """

    __slots__ = ("dim", "rhs", "jacobian", "input_signal", "n_inputs")

    def __init__(self, dim, rhs, jacobian=None, input_signal=None, n_inputs=0):
        self.dim = dim
        self.rhs = rhs
        self.jacobian = jacobian
        self.input_signal = input_signal or (lambda t: [])
        self.n_inputs = n_inputs


class Trajectory:
    """Uniformly sampled trajectory: time stamps, states, and inputs."""

    __slots__ = ("t", "x", "u")

    def __init__(self, t, x: Matrix, u: Matrix):
        self.t = array("d", t)
        self.x = x
        self.u = u

    @property
    def length(self):
        return len(self.t)

    @property
    def n_states(self):
        return self.x.cols

    @property
    def n_inputs(self):
        return self.u.cols

    @property
    def dt(self):
        return self.t[1] - self.t[0] if len(self.t) > 1 else 0.0

    def state_row(self, k):
        return self.x.row_list(k)

    def input_row(self, k):
        return self.u.row_list(k)


def _check_finite(x, t):
    for v in x:
        if not isfinite(v):
            raise DivergenceError(f"state became non-finite at t={t:.6g}")


def _num_steps(t0, t1, dt):
    if dt <= 0:
        raise ArgumentError("dt must be positive")
    if t1 <= t0:
        raise ArgumentError("t1 must exceed t0")
    steps = int(round((t1 - t0) / dt))
    if fabs(t0 + steps * dt - t1) > 1e-9 * max(1.0, fabs(t1)):
        raise ArgumentError(f"({t1} - {t0}) is not an integer multiple of {dt}")
    return steps


def rk4_step(f, t, x, u, h):
    """One classical RK4 step with u held constant."""
    n = len(x)
    k1 = f(t, x, u)
    x2 = [x[i] + 0.5 * h * k1[i] for i in range(n)]
    k2 = f(t + 0.5 * h, x2, u)
    x3 = [x[i] + 0.5 * h * k2[i] for i in range(n)]
    k3 = f(t + 0.5 * h, x3, u)
    x4 = [x[i] + h * k3[i] for i in range(n)]
    k4 = f(t + h, x4, u)
    return [
        x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        for i in range(n)
    ]


def rk4_solve(problem: OdeProblem, x0, t0, t1, dt) -> Trajectory:
    """Integrate with fixed-step RK4, sampling every step."""
    steps = _num_steps(t0, t1, dt)
    n = problem.dim
    ts = array("d")
    xs = Matrix(steps + 1, n)
    us = Matrix(steps + 1, problem.n_inputs)
    x = [float(v) for v in x0]
    if len(x) != n:
        raise ArgumentError(f"x0 has {len(x)} entries for dim {n}")
    for k in range(steps + 1):
        t = t0 + k * dt
        u = problem.input_signal(t)
        ts.append(t)
        for j in range(n):
            xs.data[k * n + j] = x[j]
        for j in range(problem.n_inputs):
            us.data[k * problem.n_inputs + j] = u[j]
        if k < steps:
            x = rk4_step(problem.rhs, t, x, u, dt)
            _check_finite(x, t + dt)
    return Trajectory(ts, xs, us)


def _fd_jacobian(f, t, x, u):
    n = len(x)
    j = Matrix(n, n)
    for col in range(n):
        h = 1e-6 * (1.0 + fabs(x[col]))
        xp = list(x)
        xm = list(x)
        xp[col] += h
        xm[col] -= h
        fp = f(t, xp, u)
        fm = f(t, xm, u)
        for row in range(n):
            j.data[row * n + col] = (fp[row] - fm[row]) / (2.0 * h)
    return j


def _newton_implicit(problem, t_new, u_new, coef, const, guess, tol,
                     max_iters=50):
    """Solve z - coef * f(t_new, z, u_new) - const = 0 by Newton iteration."""
    n = problem.dim
    z = list(guess)
    jac_fn = problem.jacobian
    for _ in range(max_iters):
        fz = problem.rhs(t_new, z, u_new)
        resid = [z[i] - coef * fz[i] - const[i] for i in range(n)]
        if jac_fn is not None:
            jf = jac_fn(t_new, z, u_new)
        else:
            jf = _fd_jacobian(problem.rhs, t_new, z, u_new)
        a = Matrix(n, n)
        for i in range(n):
            for j in range(n):
                a.data[i * n + j] = (1.0 if i == j else 0.0) - coef * jf.data[i * n + j]
        fac = LuFactor(a)
        if fac.singular:
            raise StiffnessError(
                f"Newton Jacobian singular at t={t_new:.6g}"
            )
        delta = fac.solve_vec(resid)
        norm = 0.0
        for i in range(n):
            z[i] -= delta[i]
            norm += delta[i] * delta[i]
        if sqrt(norm) <= tol:
            return z
    rnorm = sqrt(sum(r * r for r in resid))
    raise StiffnessError(
        f"Newton failed to converge at t={t_new:.6g} (residual {rnorm:.3e})"
    )


def bdf_solve(problem: OdeProblem, x0, t0, t1, dt_out, dt_inner,
              newton_tol=1e-10) -> Trajectory:
    """BDF2 advanced at dt_inner, sampled at dt_out.

    The first inner step uses backward Euler; afterwards
    x_{n+1} - (4/3) x_n + (1/3) x_{n-1} = (2/3) h f(t_{n+1}, x_{n+1}, u_{n+1}).
    The control for an implicit step is sampled at the step's end time, so
    changing u strictly inside a step cannot alter the step's output.
    """
    if dt_inner > dt_out:
        raise ArgumentError("dt_inner must not exceed dt_out")
    out_steps = _num_steps(t0, t1, dt_out)
    sub = int(round(dt_out / dt_inner))
    if fabs(sub * dt_inner - dt_out) > 1e-9 * dt_out:
        raise ArgumentError("dt_out must be an integer multiple of dt_inner")
    n = problem.dim
    h = dt_inner
    ts = array("d")
    xs = Matrix(out_steps + 1, n)
    us = Matrix(out_steps + 1, problem.n_inputs)

    x_prev = None
    x = [float(v) for v in x0]
    step_index = 0

    def record(k, t, state):
        u = problem.input_signal(t)
        ts.append(t)
        for j in range(n):
            xs.data[k * n + j] = state[j]
        for j in range(problem.n_inputs):
            us.data[k * problem.n_inputs + j] = u[j]

    record(0, t0, x)
    for k in range(out_steps):
        for s in range(sub):
            t_new = t0 + (step_index + 1) * h
            u_new = problem.input_signal(t_new)
            if x_prev is None:
                # backward Euler bootstrap
                z = _newton_implicit(problem, t_new, u_new, h, x, x,
                                     newton_tol)
            else:
                const = [(4.0 * x[i] - x_prev[i]) / 3.0 for i in range(n)]
                z = _newton_implicit(problem, t_new, u_new, 2.0 * h / 3.0,
                                     const, x, newton_tol)
            _check_finite(z, t_new)
            x_prev = x
            x = z
            step_index += 1
        record(k + 1, t0 + (k + 1) * dt_out, x)
    return Trajectory(ts, xs, us)


def latent_step(f_p, w: Matrix, u: Matrix, dt: float) -> Matrix:
    """One RK4 step of dw/dt = f_p(w, u) with u held constant over the step."""
    if dt <= 0:
        raise ArgumentError("dt must be positive")
    k1 = f_p(w, u)
    k2 = f_p(w.add(k1.scaled(0.5 * dt)), u)
    k3 = f_p(w.add(k2.scaled(0.5 * dt)), u)
    k4 = f_p(w.add(k3.scaled(dt)), u)
    incr = k1.add(k2.scaled(2.0)).add(k3.scaled(2.0)).add(k4)
    out = w.add(incr.scaled(dt / 6.0))
    if not out.is_finite():
        raise DivergenceError("latent state became non-finite")
    return out
