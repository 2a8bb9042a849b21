"""Benchmark dynamical systems, input signals, and the stiffness instrument."""

from math import cos, fabs, pi, sin

from .errors import ArgumentError, ConfigError, NumericError
from .linalg import Matrix, eig_general
from .ode import OdeProblem


# ---------------------------------------------------------------------------
# damped, controlled double pendulum
# ---------------------------------------------------------------------------

class DoublePendulumParams:
    """Point masses on massless rods; angles measured from the hanging
    position.  damping scales the -theta_dot term on each joint (1.0 gives
    the lightly damped benchmark; 0.0 the conservative variant)."""

    __slots__ = ("m1", "m2", "l1", "l2", "g", "damping")

    def __init__(self, m1=1.0, m2=1.0, l1=1.0, l2=1.0, g=9.81, damping=1.0):
        if min(m1, m2, l1, l2) <= 0.0:
            raise ArgumentError("masses and lengths must be positive")
        self.m1, self.m2 = m1, m2
        self.l1, self.l2 = l1, l2
        self.g = g
        self.damping = damping


def double_pendulum_rhs(state, u, p: DoublePendulumParams):
    """state = [th1, th2, th1_dot, th2_dot], u = [u1, u2] joint torques."""
    th1, th2, w1, w2 = state
    u1, u2 = (u[0], u[1]) if len(u) >= 2 else (0.0, 0.0)
    delta = th2 - th1
    sd, cd = sin(delta), cos(delta)
    mbar = p.m1 + p.m2
    rho = mbar - p.m2 * cd * cd
    if rho == 0.0:
        raise NumericError("degenerate mass matrix (rho = 0)")
    g = p.g
    acc1 = (
        p.m2 * p.l1 * w1 * w1 * sd * cd
        + p.m2 * g * sin(th2) * cd
        + p.m2 * p.l2 * w2 * w2 * sd
        - mbar * g * sin(th1)
        + u1
    ) / (p.l1 * rho) - p.damping * w1
    acc2 = (
        -p.m2 * p.l2 * w2 * w2 * sd * cd
        + mbar * g * sin(th1) * cd
        - mbar * p.l1 * w1 * w1 * sd
        - mbar * g * sin(th2)
        + u2
    ) / (p.l2 * rho) - p.damping * w2
    return [w1, w2, acc1, acc2]


def double_pendulum_energy(state, p: DoublePendulumParams):
    """Total mechanical energy of the conservative (undamped) pendulum."""
    th1, th2, w1, w2 = state
    v1sq = (p.l1 * w1) ** 2
    v2sq = (
        (p.l1 * w1) ** 2
        + (p.l2 * w2) ** 2
        + 2.0 * p.l1 * p.l2 * w1 * w2 * cos(th1 - th2)
    )
    kinetic = 0.5 * p.m1 * v1sq + 0.5 * p.m2 * v2sq
    y1 = -p.l1 * cos(th1)
    y2 = y1 - p.l2 * cos(th2)
    potential = p.g * (p.m1 * y1 + p.m2 * y2)
    return kinetic + potential


def double_pendulum_problem(p: DoublePendulumParams, input_signal=None):
    return OdeProblem(
        dim=4,
        rhs=lambda t, x, u: double_pendulum_rhs(x, u, p),
        input_signal=input_signal or (lambda t: [0.0, 0.0]),
        n_inputs=2,
    )


# ---------------------------------------------------------------------------
# Brusselator
# ---------------------------------------------------------------------------

class BrusselatorParams:
    __slots__ = ("a", "b")

    def __init__(self, a=1.0, b=3.0):
        if a <= 0.0 or b <= 0.0:
            raise ArgumentError("Brusselator constants must be positive")
        self.a, self.b = a, b


def brusselator_rhs(state, p: BrusselatorParams):
    x1, x2 = state
    return [
        p.a + x1 * x1 * x2 - (p.b + 1.0) * x1,
        p.b * x1 - x1 * x1 * x2,
    ]


def brusselator_jacobian(state, p: BrusselatorParams) -> Matrix:
    x1, x2 = state
    return Matrix.from_rows([
        [2.0 * x1 * x2 - (p.b + 1.0), x1 * x1],
        [p.b - 2.0 * x1 * x2, -x1 * x1],
    ])


def brusselator_problem(p: BrusselatorParams):
    return OdeProblem(
        dim=2,
        rhs=lambda t, x, u: brusselator_rhs(x, p),
        jacobian=lambda t, x, u: brusselator_jacobian(x, p),
        n_inputs=0,
    )


# ---------------------------------------------------------------------------
# stiffness ratio
# ---------------------------------------------------------------------------

class StiffnessReport:
    __slots__ = ("per_sample", "max_ratio", "min_ratio", "hit_infinite")

    def __init__(self, per_sample, hit_infinite):
        self.per_sample = per_sample
        finite = [v for v in per_sample if v != float("inf")]
        self.max_ratio = max(per_sample) if per_sample else 0.0
        self.min_ratio = min(finite) if finite else float("inf")
        self.hit_infinite = hit_infinite


def stiffness_ratio(traj, jacobian_fn) -> StiffnessReport:
    """max|eig| / min|eig| of the dynamics Jacobian at every sample.

    jacobian_fn(t, state) -> Matrix.  A sample whose smallest eigenvalue
    magnitude falls below 1e-12 reports +inf and sets the hit_infinite flag.
    """
    ratios = []
    hit_inf = False
    for k in range(traj.length):
        j = jacobian_fn(traj.t[k], traj.state_row(k))
        mags = [abs(z) for z in eig_general(j)]
        lo = min(mags)
        if lo < 1e-12:
            ratios.append(float("inf"))
            hit_inf = True
        else:
            ratios.append(max(mags) / lo)
    return StiffnessReport(ratios, hit_inf)


def brusselator_stiffness_ratio(traj, p: BrusselatorParams) -> StiffnessReport:
    return stiffness_ratio(traj, lambda t, x: brusselator_jacobian(x, p))


# ---------------------------------------------------------------------------
# networked multi-timescale system
# ---------------------------------------------------------------------------

class NetworkedSystemSpec:
    """Single-state nodes with leaky-sine self dynamics, diffusive coupling,
    and a bilinear control channel:

        dx_I/dt = -x_I / tau_I + alpha_I sin(x_I)
                  + sum_{J in N_I} w_IJ (x_J - x_I)
                  + beta_I x_I u_{m(I)}

    Edges are undirected pairs; input_map sends node I to its input index.
    """

    __slots__ = ("n_nodes", "edges", "tau", "alpha", "coupling", "beta",
                 "input_map", "n_inputs")

    def __init__(self, n_nodes, edges, tau, alpha, coupling, beta, input_map,
                 n_inputs):
        if len(tau) != n_nodes or len(alpha) != n_nodes:
            raise ConfigError("per-node parameter lists must match n_nodes")
        if any(t <= 0.0 for t in tau):
            raise ConfigError("time constants must be positive")
        if any(not (0 <= m < n_inputs) for m in input_map):
            raise ConfigError("input_map index out of range")
        self.n_nodes = n_nodes
        self.edges = [tuple(e) for e in edges]
        self.tau = list(tau)
        self.alpha = list(alpha)
        self.coupling = float(coupling)
        self.beta = list(beta)
        self.input_map = list(input_map)
        self.n_inputs = n_inputs
        for i, j in self.edges:
            if not (0 <= i < n_nodes and 0 <= j < n_nodes) or i == j:
                raise ConfigError(f"bad edge ({i}, {j})")

    def neighbors(self):
        adj = [[] for _ in range(self.n_nodes)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj


def reference_networked_spec() -> NetworkedSystemSpec:
    """12-node ring with three chords; nodes 0-3 are fast (tau = 0.02 s),
    the rest slow (tau = 1 s); three inputs drive node groups of four."""
    n = 12
    edges = [(i, (i + 1) % n) for i in range(n)]
    edges += [(0, 6), (2, 9), (4, 11)]
    tau = [0.02 if i < 4 else 1.0 for i in range(n)]
    alpha = [0.5] * n
    beta = [0.3] * n
    input_map = [i // 4 for i in range(n)]
    return NetworkedSystemSpec(n, edges, tau, alpha, 1.0, beta, input_map, 3)


def networked_rhs(state, u, spec: NetworkedSystemSpec, adj=None):
    if adj is None:
        adj = spec.neighbors()
    out = []
    for i in range(spec.n_nodes):
        xi = state[i]
        acc = -xi / spec.tau[i] + spec.alpha[i] * sin(xi)
        for j in adj[i]:
            acc += spec.coupling * (state[j] - xi)
        acc += spec.beta[i] * xi * u[spec.input_map[i]]
        out.append(acc)
    return out


def networked_jacobian(state, u, spec: NetworkedSystemSpec, adj=None) -> Matrix:
    if adj is None:
        adj = spec.neighbors()
    n = spec.n_nodes
    jac = Matrix(n, n)
    for i in range(n):
        diag = (
            -1.0 / spec.tau[i]
            + spec.alpha[i] * cos(state[i])
            - spec.coupling * len(adj[i])
            + spec.beta[i] * u[spec.input_map[i]]
        )
        jac.data[i * n + i] = diag
        for j in adj[i]:
            jac.data[i * n + j] += spec.coupling
    return jac


def networked_problem(spec: NetworkedSystemSpec, input_signal=None):
    adj = spec.neighbors()
    sig = input_signal or (lambda t: [0.0] * spec.n_inputs)
    return OdeProblem(
        dim=spec.n_nodes,
        rhs=lambda t, x, u: networked_rhs(x, u, spec, adj),
        jacobian=lambda t, x, u: networked_jacobian(x, u, spec, adj),
        input_signal=sig,
        n_inputs=spec.n_inputs,
    )


# ---------------------------------------------------------------------------
# input signals
# ---------------------------------------------------------------------------

def chirp(t, f0, f1, duration, amplitude=0.5):
    """Linear chirp: amplitude * sin(2 pi (f0 t + (f1 - f0) t^2 / (2 T))).

    Instantaneous frequency sweeps linearly from f0 at t=0 to f1 at t=T.
    """
    if duration <= 0.0:
        raise ArgumentError("chirp duration must be positive")
    phase = f0 * t + (f1 - f0) * t * t / (2.0 * duration)
    return amplitude * sin(2.0 * pi * phase)


def make_chirp_bank(rng, n_inputs, duration, f_lo=1.0, f_hi=4.0,
                    amplitude=0.5):
    """Per-input chirps with endpoint frequencies drawn from [f_lo, f_hi]."""
    bands = [(rng.uniform(f_lo, f_hi), rng.uniform(f_lo, f_hi))
             for _ in range(n_inputs)]

    def signal(t):
        return [chirp(t, f0, f1, duration, amplitude) for f0, f1 in bands]

    return signal, bands
