"""Reverse-mode differentiation over the dense-matrix op set.

A Tape records one forward pass; backward() runs a single reverse sweep and
accumulates parameter gradients into the owning ParamStore.  Constants never
touch the tape: a node is recorded only when some input requires a gradient,
and gradient accumulation follows construction order, so repeated runs of the
same forward build are bit-identical.

One tape per worker; tapes are never shared.
"""

from array import array

from .backend import K
from .errors import ArgumentError, ShapeError, StateError
from .linalg import Matrix

__all__ = [
    "Tape", "DiffValue", "ParamStore",
    "add", "sub", "mul", "matmul", "transpose", "concat_rows", "slice_rows",
    "sum_all", "trace", "prelu", "tanh", "weighted_frobenius_sq",
    "scale", "add_colbias", "colscale", "graph_mix", "node_mix",
]


class _Node:
    __slots__ = ("parents", "bwd", "param_name")

    def __init__(self, parents, bwd, param_name=None):
        self.parents = parents
        self.bwd = bwd
        self.param_name = param_name


class DiffValue:
    """A matrix value plus its position on the tape (idx < 0 for constants)."""

    __slots__ = ("tape", "idx", "value", "requires_grad")

    def __init__(self, tape, idx, value, requires_grad):
        self.tape = tape
        self.idx = idx
        self.value = value
        self.requires_grad = requires_grad

    @property
    def shape(self):
        return self.value.shape


class Tape:
    """Single-use record of one differentiable forward pass."""

    def __init__(self, store: "ParamStore"):
        self.store = store
        self.nodes = []
        self.grads = []
        self._leaf_cache = {}
        self.spent = False

    def constant(self, m: Matrix) -> DiffValue:
        return DiffValue(self, -1, m, False)

    def param(self, name: str) -> DiffValue:
        """Leaf for a registered parameter; cached so each parameter has one
        node per tape and window contributions merge on it in order."""
        dv = self._leaf_cache.get(name)
        if dv is None:
            val = self.store.matrix(name)
            idx = self._record(_Node((), None, param_name=name))
            dv = DiffValue(self, idx, val, True)
            self._leaf_cache[name] = dv
        return dv

    def _record(self, node) -> int:
        self.nodes.append(node)
        self.grads.append(None)
        return len(self.nodes) - 1

    def _accumulate(self, idx, fresh: Matrix):
        g = self.grads[idx]
        if g is None:
            self.grads[idx] = fresh
        else:
            K.axpy(1.0, fresh.data, g.data, len(g.data))

    def backward(self, loss: DiffValue):
        """Reverse sweep from a scalar (1x1) loss into ParamStore.grad."""
        if loss.value.shape != (1, 1):
            raise ArgumentError(f"loss must be 1x1, got {loss.value.shape}")
        if self.spent:
            raise StateError("tape already consumed by a previous backward()")
        if not loss.requires_grad:
            raise ArgumentError("loss does not depend on any parameter")
        self.spent = True
        self.grads[loss.idx] = Matrix(1, 1, array("d", [1.0]))
        for idx in range(len(self.nodes) - 1, -1, -1):
            g = self.grads[idx]
            if g is None:
                continue
            node = self.nodes[idx]
            if node.param_name is not None:
                self.store._add_grad(node.param_name, g)
            elif node.bwd is not None:
                node.bwd(g)
            self.grads[idx] = None


class ParamStore:
    """Flat float64 registry of named trainable arrays plus their gradients."""

    def __init__(self):
        self._slots = {}
        self._order = []
        self.flat = array("d")
        self.grad = array("d")

    def add(self, name, rows, cols, values=None):
        if name in self._slots:
            raise ArgumentError(f"duplicate parameter name {name!r}")
        n = rows * cols
        offset = len(self.flat)
        if values is None:
            self.flat.extend(array("d", bytes(8 * n)))
        else:
            values = array("d", values)
            if len(values) != n:
                raise ShapeError(f"{name}: {len(values)} values for {rows}x{cols}")
            self.flat.extend(values)
        self.grad.extend(array("d", bytes(8 * n)))
        self._slots[name] = (rows, cols, offset)
        self._order.append(name)

    def names(self):
        return list(self._order)

    def shape_of(self, name):
        rows, cols, _ = self._slots[name]
        return (rows, cols)

    @property
    def n_params(self):
        return len(self.flat)

    def matrix(self, name) -> Matrix:
        rows, cols, off = self._slots[name]
        return Matrix(rows, cols, self.flat[off:off + rows * cols])

    def set_matrix(self, name, m: Matrix):
        rows, cols, off = self._slots[name]
        if m.shape != (rows, cols):
            raise ShapeError(f"{name}: expected {rows}x{cols}, got {m.shape}")
        self.flat[off:off + rows * cols] = m.data

    def grad_matrix(self, name) -> Matrix:
        rows, cols, off = self._slots[name]
        return Matrix(rows, cols, self.grad[off:off + rows * cols])

    def _add_grad(self, name, g: Matrix):
        rows, cols, off = self._slots[name]
        gd = g.data
        grad = self.grad
        for i in range(rows * cols):
            grad[off + i] += gd[i]

    def zero_grad(self):
        self.grad = array("d", bytes(8 * len(self.grad)))

    def copy_flat(self):
        return array("d", self.flat)

    def load_flat(self, values):
        if len(values) != len(self.flat):
            raise ShapeError("flat parameter size mismatch")
        self.flat = array("d", values)


# ---------------------------------------------------------------------------
# op helpers
# ---------------------------------------------------------------------------

def _lift(tape, x):
    if isinstance(x, DiffValue):
        return x
    if isinstance(x, Matrix):
        return tape.constant(x)
    raise ArgumentError(f"cannot lift {type(x).__name__} onto the tape")


def _result(tape, value, inputs, bwd):
    if not any(x.requires_grad for x in inputs):
        return tape.constant(value)
    idx = tape._record(_Node(tuple(x.idx for x in inputs), bwd))
    return DiffValue(tape, idx, value, True)


def _fresh(rows, cols):
    return Matrix(rows, cols)


# ---------------------------------------------------------------------------
# ops
# ---------------------------------------------------------------------------

def add(tape, x, y):
    x, y = _lift(tape, x), _lift(tape, y)
    out = x.value.add(y.value)

    def bwd(g):
        if x.requires_grad:
            tape._accumulate(x.idx, g.copy())
        if y.requires_grad:
            tape._accumulate(y.idx, g.copy())

    return _result(tape, out, (x, y), bwd)


def sub(tape, x, y):
    x, y = _lift(tape, x), _lift(tape, y)
    out = x.value.sub(y.value)

    def bwd(g):
        if x.requires_grad:
            tape._accumulate(x.idx, g.copy())
        if y.requires_grad:
            tape._accumulate(y.idx, g.scaled(-1.0))

    return _result(tape, out, (x, y), bwd)


def mul(tape, x, y):
    """Elementwise product."""
    x, y = _lift(tape, x), _lift(tape, y)
    out = x.value.mul_elem(y.value)

    def bwd(g):
        if x.requires_grad:
            tape._accumulate(x.idx, g.mul_elem(y.value))
        if y.requires_grad:
            tape._accumulate(y.idx, g.mul_elem(x.value))

    return _result(tape, out, (x, y), bwd)


def matmul(tape, x, y):
    x, y = _lift(tape, x), _lift(tape, y)
    if x.value.cols != y.value.rows:
        raise ShapeError(f"matmul: {x.shape} x {y.shape}")
    out = _fresh(x.value.rows, y.value.cols)
    K.matmul(x.value.data, y.value.data, out.data,
             x.value.rows, x.value.cols, y.value.cols)

    def bwd(g):
        if x.requires_grad:
            gx = _fresh(x.value.rows, x.value.cols)
            K.matmul_nt(g.data, y.value.data, gx.data,
                        g.rows, g.cols, y.value.rows)
            tape._accumulate(x.idx, gx)
        if y.requires_grad:
            gy = _fresh(y.value.rows, y.value.cols)
            K.matmul_tn(x.value.data, g.data, gy.data,
                        x.value.cols, x.value.rows, g.cols)
            tape._accumulate(y.idx, gy)

    return _result(tape, out, (x, y), bwd)


def transpose(tape, x):
    x = _lift(tape, x)
    out = x.value.t()

    def bwd(g):
        tape._accumulate(x.idx, g.t())

    return _result(tape, out, (x,), bwd)


def concat_rows(tape, parts):
    """Stack matrices with equal column counts, top to bottom."""
    parts = [_lift(tape, p) for p in parts]
    cols = parts[0].value.cols
    for p in parts:
        if p.value.cols != cols:
            raise ShapeError("concat_rows: column mismatch")
    total = sum(p.value.rows for p in parts)
    out = _fresh(total, cols)
    pos = 0
    for p in parts:
        n = p.value.rows * cols
        out.data[pos:pos + n] = p.value.data
        pos += n
    spans = []
    pos = 0
    for p in parts:
        spans.append((p, pos, p.value.rows))
        pos += p.value.rows

    def bwd(g):
        for p, r0, nr in spans:
            if p.requires_grad:
                piece = Matrix(nr, cols, g.data[r0 * cols:(r0 + nr) * cols])
                tape._accumulate(p.idx, piece)

    return _result(tape, out, tuple(parts), bwd)


def slice_rows(tape, x, r0, r1):
    """Rows [r0, r1) as a new matrix."""
    x = _lift(tape, x)
    if not (0 <= r0 <= r1 <= x.value.rows):
        raise ShapeError(f"slice_rows [{r0}, {r1}) of {x.shape}")
    cols = x.value.cols
    out = Matrix(r1 - r0, cols, x.value.data[r0 * cols:r1 * cols])

    def bwd(g):
        gx = _fresh(x.value.rows, cols)
        gx.data[r0 * cols:r1 * cols] = g.data
        tape._accumulate(x.idx, gx)

    return _result(tape, out, (x,), bwd)


def sum_all(tape, x):
    """Sum of all entries as a 1x1 matrix."""
    x = _lift(tape, x)
    out = Matrix(1, 1, array("d", [K.asum(x.value.data, len(x.value.data))]))

    def bwd(g):
        tape._accumulate(x.idx, Matrix.full(x.value.rows, x.value.cols,
                                            g.data[0]))

    return _result(tape, out, (x,), bwd)


def trace(tape, x):
    x = _lift(tape, x)
    if x.value.rows != x.value.cols:
        raise ShapeError("trace needs a square matrix")
    n = x.value.rows
    out = Matrix(1, 1, array("d", [K.trace_sq(x.value.data, n)]))

    def bwd(g):
        gx = _fresh(n, n)
        g0 = g.data[0]
        for i in range(n):
            gx.data[i * n + i] = g0
        tape._accumulate(x.idx, gx)

    return _result(tape, out, (x,), bwd)


def prelu(tape, x, slope):
    """PReLU with a scalar (1x1) slope for the negative part."""
    x, slope = _lift(tape, x), _lift(tape, slope)
    if slope.value.shape != (1, 1):
        raise ShapeError("prelu slope must be 1x1")
    s = slope.value.data[0]
    out = _fresh(x.value.rows, x.value.cols)
    K.prelu_fwd(x.value.data, s, out.data, len(out.data))

    def bwd(g):
        gx = _fresh(x.value.rows, x.value.cols)
        gs = K.prelu_bwd(x.value.data, s, g.data, gx.data, len(gx.data))
        if x.requires_grad:
            tape._accumulate(x.idx, gx)
        if slope.requires_grad:
            tape._accumulate(slope.idx, Matrix(1, 1, array("d", [gs])))

    return _result(tape, out, (x, slope), bwd)


def tanh(tape, x):
    x = _lift(tape, x)
    out = _fresh(x.value.rows, x.value.cols)
    K.tanh_fwd(x.value.data, out.data, len(out.data))

    def bwd(g):
        gx = _fresh(x.value.rows, x.value.cols)
        K.tanh_bwd(out.data, g.data, gx.data, len(gx.data))
        tape._accumulate(x.idx, gx)

    return _result(tape, out, (x,), bwd)


def weighted_frobenius_sq(tape, y, yhat, v):
    """tr((Y - Yhat) V (Y - Yhat)^T) with V = diag(v), v one weight per column.

    The gradient with respect to Y is exactly 2 (Y - Yhat) V.
    """
    y, yhat = _lift(tape, y), _lift(tape, yhat)
    if y.value.shape != yhat.value.shape:
        raise ShapeError(f"weighted_frobenius_sq: {y.shape} vs {yhat.shape}")
    if len(v) != y.value.cols:
        raise ShapeError(
            f"weight vector of {len(v)} for {y.value.cols} columns"
        )
    vbuf = v if isinstance(v, array) else array("d", v)
    ny, nc = y.value.shape
    out = Matrix(1, 1, array("d", [K.wfrob(y.value.data, yhat.value.data,
                                           vbuf, ny, nc)]))

    def bwd(g):
        g0 = g.data[0]
        if y.requires_grad:
            gy = _fresh(ny, nc)
            K.wfrob_bwd(y.value.data, yhat.value.data, vbuf, g0, gy.data,
                        ny, nc)
            tape._accumulate(y.idx, gy)
        if yhat.requires_grad:
            gh = _fresh(ny, nc)
            K.wfrob_bwd(y.value.data, yhat.value.data, vbuf, -g0, gh.data,
                        ny, nc)
            tape._accumulate(yhat.idx, gh)

    return _result(tape, out, (y, yhat), bwd)


def scale(tape, x, alpha):
    x = _lift(tape, x)
    out = x.value.scaled(alpha)

    def bwd(g):
        tape._accumulate(x.idx, g.scaled(alpha))

    return _result(tape, out, (x,), bwd)


def add_colbias(tape, x, b):
    """x + b broadcast across columns (b is rows x 1)."""
    x, b = _lift(tape, x), _lift(tape, b)
    if b.value.shape != (x.value.rows, 1):
        raise ShapeError(f"bias {b.shape} for {x.shape}")
    out = _fresh(x.value.rows, x.value.cols)
    K.add_colbias(x.value.data, b.value.data, out.data,
                  x.value.rows, x.value.cols)

    def bwd(g):
        if x.requires_grad:
            tape._accumulate(x.idx, g.copy())
        if b.requires_grad:
            gb = _fresh(x.value.rows, 1)
            K.rowsum(g.data, gb.data, x.value.rows, x.value.cols)
            tape._accumulate(b.idx, gb)

    return _result(tape, out, (x, b), bwd)


def colscale(tape, x, w):
    """Scale column k of x by the constant weight w[k]."""
    x = _lift(tape, x)
    wbuf = w if isinstance(w, array) else array("d", w)
    if len(wbuf) != x.value.cols:
        raise ShapeError(f"colscale weights {len(wbuf)} for {x.shape}")
    out = _fresh(x.value.rows, x.value.cols)
    K.colscale(x.value.data, wbuf, out.data, x.value.rows, x.value.cols)

    def bwd(g):
        gx = _fresh(x.value.rows, x.value.cols)
        K.colscale(g.data, wbuf, gx.data, x.value.rows, x.value.cols)
        tape._accumulate(x.idx, gx)

    return _result(tape, out, (x,), bwd)


def graph_mix(tape, lap, lap_t, z, n_nodes, feat):
    """Node-axis mixing out[(I,f),:] = sum_J lap[I,J] z[(J,f),:].

    lap and lap_t are constant matrices (the operator and its transpose);
    z is (n_nodes*feat) x n_cols.
    """
    z = _lift(tape, z)
    if z.value.rows != n_nodes * feat:
        raise ShapeError(f"graph_mix: {z.shape} vs {n_nodes} nodes x {feat}")
    nc = z.value.cols
    out = _fresh(z.value.rows, nc)
    K.graph_mix(lap.data, z.value.data, out.data, n_nodes, feat, nc)

    def bwd(g):
        gz = _fresh(z.value.rows, nc)
        K.graph_mix(lap_t.data, g.data, gz.data, n_nodes, feat, nc)
        tape._accumulate(z.idx, gz)

    return _result(tape, out, (z,), bwd)


def node_mix(tape, theta, z, n_nodes, f_in, f_out):
    """Per-node shared feature map out[(I,g),:] = sum_f theta[f,g] z[(I,f),:]."""
    theta, z = _lift(tape, theta), _lift(tape, z)
    if theta.value.shape != (f_in, f_out):
        raise ShapeError(f"node_mix theta {theta.shape} vs {f_in}x{f_out}")
    if z.value.rows != n_nodes * f_in:
        raise ShapeError(f"node_mix: {z.shape} vs {n_nodes} nodes x {f_in}")
    nc = z.value.cols
    out = _fresh(n_nodes * f_out, nc)
    K.node_mix(theta.value.data, z.value.data, out.data,
               n_nodes, f_in, f_out, nc)

    def bwd(g):
        if theta.requires_grad:
            gt = _fresh(f_in, f_out)
            K.node_mix_grad_theta(z.value.data, g.data, gt.data,
                                  n_nodes, f_in, f_out, nc)
            tape._accumulate(theta.idx, gt)
        if z.requires_grad:
            gz = _fresh(n_nodes * f_in, nc)
            K.node_mix(theta.value.t().data, g.data, gz.data,
                       n_nodes, f_out, f_in, nc)
            tape._accumulate(z.idx, gz)

    return _result(tape, out, (theta, z), bwd)
