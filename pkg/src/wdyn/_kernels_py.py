"""Pure-Python twins of the compiled kernels.

Every function here has the same name, signature, and bit-exact semantics as
its counterpart in the C extension (wdyn._kernels_c).  All matrices are flat
row-major float64 buffers; reductions run left-to-right so results are
reproducible and identical across the two backends.

This module is the fallback selected by wdyn.backend when the extension is
missing.  It is slow; correctness, not speed, is its job.
"""

import math

BACKEND_NAME = "python"


# ---------------------------------------------------------------------------
# dense products
# ---------------------------------------------------------------------------

def matmul(a, b, out, n, k, m):
    """out(n x m) = a(n x k) . b(k x m); k-ascending accumulation."""
    for i in range(n):
        ik = i * k
        im = i * m
        for j in range(m):
            out[im + j] = 0.0
        for p in range(k):
            aip = a[ik + p]
            if aip == 0.0:
                continue
            pm = p * m
            for j in range(m):
                out[im + j] += aip * b[pm + j]


def matmul_tn(a, b, out, n, k, m):
    """out(n x m) = a(k x n)^T . b(k x m)."""
    for i in range(n):
        im = i * m
        for j in range(m):
            out[im + j] = 0.0
        for p in range(k):
            api = a[p * n + i]
            if api == 0.0:
                continue
            pm = p * m
            for j in range(m):
                out[im + j] += api * b[pm + j]


def matmul_nt(a, b, out, n, k, m):
    """out(n x m) = a(n x k) . b(m x k)^T."""
    for i in range(n):
        ik = i * k
        im = i * m
        for j in range(m):
            jk = j * k
            s = 0.0
            for p in range(k):
                s += a[ik + p] * b[jk + p]
            out[im + j] = s


# ---------------------------------------------------------------------------
# elementwise
# ---------------------------------------------------------------------------

def ew_add(a, b, out, n):
    for i in range(n):
        out[i] = a[i] + b[i]


def ew_sub(a, b, out, n):
    for i in range(n):
        out[i] = a[i] - b[i]


def ew_mul(a, b, out, n):
    for i in range(n):
        out[i] = a[i] * b[i]


def scale(a, alpha, out, n):
    for i in range(n):
        out[i] = alpha * a[i]


def axpy(alpha, x, y, n):
    """y += alpha * x."""
    for i in range(n):
        y[i] += alpha * x[i]


def transpose(a, out, n, m):
    """out(m x n) = a(n x m)^T."""
    for i in range(n):
        im = i * m
        for j in range(m):
            out[j * n + i] = a[im + j]


def asum(a, n):
    s = 0.0
    for i in range(n):
        s += a[i]
    return s


def trace_sq(a, n):
    s = 0.0
    for i in range(n):
        s += a[i * n + i]
    return s


def colscale(a, w, out, n, m):
    """out[i, j] = a[i, j] * w[j]."""
    for i in range(n):
        im = i * m
        for j in range(m):
            out[im + j] = a[im + j] * w[j]


def add_colbias(a, b, out, n, m):
    """out[i, j] = a[i, j] + b[i]  (b broadcast across columns)."""
    for i in range(n):
        im = i * m
        bi = b[i]
        for j in range(m):
            out[im + j] = a[im + j] + bi


def rowsum(a, out, n, m):
    """out[i] = sum_j a[i, j]."""
    for i in range(n):
        im = i * m
        s = 0.0
        for j in range(m):
            s += a[im + j]
        out[i] = s


def colminmax(a, n, m, mins, maxs):
    """Per-column min and max of a(n x m); mins/maxs must be pre-seeded."""
    for i in range(n):
        im = i * m
        for j in range(m):
            v = a[im + j]
            if v < mins[j]:
                mins[j] = v
            if v > maxs[j]:
                maxs[j] = v


# ---------------------------------------------------------------------------
# activations and loss terms
# ---------------------------------------------------------------------------

def prelu_fwd(x, slope, out, n):
    for i in range(n):
        v = x[i]
        out[i] = v if v > 0.0 else slope * v


def prelu_bwd(x, slope, g, gx, n):
    """gx = g * prelu'(x); returns d(loss)/d(slope) = sum over x<=0 of g*x."""
    gs = 0.0
    for i in range(n):
        v = x[i]
        if v > 0.0:
            gx[i] = g[i]
        else:
            gx[i] = slope * g[i]
            gs += g[i] * v
    return gs


def tanh_fwd(x, out, n):
    for i in range(n):
        out[i] = math.tanh(x[i])


def tanh_bwd(y, g, gx, n):
    for i in range(n):
        gx[i] = g[i] * (1.0 - y[i] * y[i])


def wfrob(y, yhat, v, ny, nc):
    """sum_k v[k] * ||y[:,k] - yhat[:,k]||^2 for y, yhat of shape (ny x nc)."""
    s = 0.0
    for k in range(nc):
        acc = 0.0
        for i in range(ny):
            d = y[i * nc + k] - yhat[i * nc + k]
            acc += d * d
        s += v[k] * acc
    return s


def wfrob_bwd(y, yhat, v, g0, gy, ny, nc):
    """gy = 2 * g0 * (y - yhat) * diag(v) applied columnwise."""
    for i in range(ny):
        inc = i * nc
        for k in range(nc):
            gy[inc + k] = 2.0 * g0 * (y[inc + k] - yhat[inc + k]) * v[k]


# ---------------------------------------------------------------------------
# rotations / reflectors (eigen and SVD machinery)
# ---------------------------------------------------------------------------

def rot_rows(a, n, m, p, q, c, s, clo, chi):
    """Left Givens: rows p, q over columns [clo, chi).

    [row_p; row_q] <- [[c, s], [-s, c]] . [row_p; row_q]
    """
    for j in range(clo, chi):
        ap = a[p * m + j]
        aq = a[q * m + j]
        a[p * m + j] = c * ap + s * aq
        a[q * m + j] = -s * ap + c * aq


def rot_cols(a, n, m, p, q, c, s, rlo, rhi):
    """Right Givens: columns p, q over rows [rlo, rhi).

    [col_p, col_q] <- [col_p, col_q] . [[c, -s], [s, c]]
    """
    for i in range(rlo, rhi):
        ap = a[i * m + p]
        aq = a[i * m + q]
        a[i * m + p] = c * ap + s * aq
        a[i * m + q] = -s * ap + c * aq


def hh_rows(a, n, m, v, beta, r0, clo, chi):
    """Apply P = I - beta v v^T from the left to rows r0..r0+len(v)-1."""
    nv = len(v)
    for j in range(clo, chi):
        w = 0.0
        for i in range(nv):
            w += v[i] * a[(r0 + i) * m + j]
        bw = beta * w
        for i in range(nv):
            a[(r0 + i) * m + j] -= bw * v[i]


def hh_cols(a, n, m, v, beta, c0, rlo, rhi):
    """Apply P = I - beta v v^T from the right to columns c0..c0+len(v)-1."""
    nv = len(v)
    for i in range(rlo, rhi):
        im = i * m
        w = 0.0
        for j in range(nv):
            w += v[j] * a[im + c0 + j]
        bw = beta * w
        for j in range(nv):
            a[im + c0 + j] -= bw * v[j]


def jacobi_sweep(a, vmat, n):
    """One cyclic Jacobi sweep on symmetric a(n x n), accumulating into vmat.

    Returns the largest |off-diagonal| remaining after the sweep.
    """
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p * n + q]
            if apq == 0.0:
                continue
            app = a[p * n + p]
            aqq = a[q * n + q]
            theta = 0.5 * (aqq - app) / apq
            t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
            if theta > 0.0:
                t = -t
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J with J = rot(p, q; c, s)
            rot_cols(a, n, n, p, q, c, s, 0, n)
            rot_rows(a, n, n, p, q, c, s, 0, n)
            rot_cols(vmat, n, n, p, q, c, s, 0, n)
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            v = abs(a[p * n + q])
            if v > off:
                off = v
    return off


def hqr_row_mod(h, n, k, nn, x, y, z, q, r):
    """Left reflector application inside one double-shift QR bulge step."""
    for j in range(k, nn + 1):
        p = h[k * n + j] + q * h[(k + 1) * n + j]
        if k + 1 != nn:
            p += r * h[(k + 2) * n + j]
            h[(k + 2) * n + j] -= p * z
        h[(k + 1) * n + j] -= p * y
        h[k * n + j] -= p * x


def hqr_col_mod(h, n, l, k, nn, x, y, z, q, r):
    """Right reflector application inside one double-shift QR bulge step."""
    hi = nn if nn < k + 3 else k + 3
    for i in range(l, hi + 1):
        p = x * h[i * n + k] + y * h[i * n + k + 1]
        if k + 1 != nn:
            p += z * h[i * n + k + 2]
            h[i * n + k + 2] -= p * r
        h[i * n + k + 1] -= p * q
        h[i * n + k] -= p


# ---------------------------------------------------------------------------
# LU with partial pivoting
# ---------------------------------------------------------------------------

def lu_factor(a, n, piv):
    """In-place LU of a(n x n) with partial pivoting.

    piv[i] receives the pivot row chosen at column i.  Returns 0 on success,
    or 1 + k when column k has no usable pivot (singular to machine zero).
    """
    for k in range(n):
        pk = k
        best = abs(a[k * n + k])
        for i in range(k + 1, n):
            v = abs(a[i * n + k])
            if v > best:
                best = v
                pk = i
        if best == 0.0:
            piv[k] = pk
            return 1 + k
        piv[k] = pk
        if pk != k:
            for j in range(n):
                tmp = a[k * n + j]
                a[k * n + j] = a[pk * n + j]
                a[pk * n + j] = tmp
        akk = a[k * n + k]
        for i in range(k + 1, n):
            lik = a[i * n + k] / akk
            a[i * n + k] = lik
            if lik != 0.0:
                for j in range(k + 1, n):
                    a[i * n + j] -= lik * a[k * n + j]
    return 0


def lu_solve(a, piv, b, n):
    """Solve with a factored LU (from lu_factor); b is overwritten."""
    for k in range(n):
        pk = piv[k]
        if pk != k:
            b[k], b[pk] = b[pk], b[k]
        for i in range(k + 1, n):
            b[i] -= a[i * n + k] * b[k]
    for i in range(n - 1, -1, -1):
        s = b[i]
        for j in range(i + 1, n):
            s -= a[i * n + j] * b[j]
        b[i] = s / a[i * n + i]


# ---------------------------------------------------------------------------
# graph-convolution mixing (node-block layouts)
# ---------------------------------------------------------------------------

def graph_mix(lap, z, out, n_nodes, f, nc):
    """out[(I,f),s] = sum_J lap[I,J] * z[(J,f),s] on (n_nodes*f x nc) blocks."""
    for i in range(n_nodes):
        for ff in range(f):
            row = (i * f + ff) * nc
            for s in range(nc):
                out[row + s] = 0.0
        for j in range(n_nodes):
            lij = lap[i * n_nodes + j]
            if lij == 0.0:
                continue
            for ff in range(f):
                ro = (i * f + ff) * nc
                ri = (j * f + ff) * nc
                for s in range(nc):
                    out[ro + s] += lij * z[ri + s]


def node_mix(theta, z, out, n_nodes, f, fp, nc):
    """Per-node feature map: out[(I,g),s] = sum_f theta[f,g] * z[(I,f),s]."""
    for i in range(n_nodes):
        base_o = i * fp
        base_z = i * f
        for g in range(fp):
            ro = (base_o + g) * nc
            for s in range(nc):
                out[ro + s] = 0.0
            for ff in range(f):
                t = theta[ff * fp + g]
                if t == 0.0:
                    continue
                ri = (base_z + ff) * nc
                for s in range(nc):
                    out[ro + s] += t * z[ri + s]


def node_mix_grad_theta(z, g, gtheta, n_nodes, f, fp, nc):
    """gtheta[f,g] += sum_I sum_s z[(I,f),s] * g[(I,g),s]."""
    for ff in range(f):
        for gg in range(fp):
            acc = 0.0
            for i in range(n_nodes):
                ri = (i * f + ff) * nc
                ro = (i * fp + gg) * nc
                for s in range(nc):
                    acc += z[ri + s] * g[ro + s]
            gtheta[ff * fp + gg] += acc


# ---------------------------------------------------------------------------
# trajectory window gathers
# ---------------------------------------------------------------------------

def gather_window(traj, ln, nch, r0, nw, out):
    """out(nch x nw) = traj[r0:r0+nw, :]^T for traj stored (ln x nch)."""
    for s in range(nw):
        base = (r0 + s) * nch
        for c in range(nch):
            out[c * nw + s] = traj[base + c]


def gather_delay_window(traj, ln, nch, r0, nw, d, out):
    """Delay-embedded window: out[(c*d + j), s] = traj[r0 + s - j, c].

    Rows group d lagged copies per channel; requires r0 >= d - 1.
    """
    for s in range(nw):
        for c in range(nch):
            base = (c * d) * nw + s
            for j in range(d):
                out[base + j * nw] = traj[(r0 + s - j) * nch + c]
