# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot-loop kernels.

Bit-identical twin of wdyn._kernels_py: same names, same signatures, same
summation order.  Compiled with -ffp-contract=off so no FMA contraction can
introduce cross-backend differences.
"""

from libc.math cimport fabs, sqrt, tanh

BACKEND_NAME = "c"


# ---------------------------------------------------------------------------
# dense products
# ---------------------------------------------------------------------------

def matmul(double[::1] a, double[::1] b, double[::1] out,
           Py_ssize_t n, Py_ssize_t k, Py_ssize_t m):
    cdef Py_ssize_t i, j, p, ik, im, pm
    cdef double aip
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


def matmul_tn(double[::1] a, double[::1] b, double[::1] out,
              Py_ssize_t n, Py_ssize_t k, Py_ssize_t m):
    cdef Py_ssize_t i, j, p, im, pm
    cdef double api
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


def matmul_nt(double[::1] a, double[::1] b, double[::1] out,
              Py_ssize_t n, Py_ssize_t k, Py_ssize_t m):
    cdef Py_ssize_t i, j, p, ik, im, jk
    cdef double s
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

def ew_add(double[::1] a, double[::1] b, double[::1] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[i] + b[i]


def ew_sub(double[::1] a, double[::1] b, double[::1] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[i] - b[i]


def ew_mul(double[::1] a, double[::1] b, double[::1] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[i] * b[i]


def scale(double[::1] a, double alpha, double[::1] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = alpha * a[i]


def axpy(double alpha, double[::1] x, double[::1] y, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        y[i] += alpha * x[i]


def transpose(double[::1] a, double[::1] out, Py_ssize_t n, Py_ssize_t m):
    cdef Py_ssize_t i, j, im
    for i in range(n):
        im = i * m
        for j in range(m):
            out[j * n + i] = a[im + j]


def asum(double[::1] a, Py_ssize_t n):
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(n):
        s += a[i]
    return s


def trace_sq(double[::1] a, Py_ssize_t n):
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(n):
        s += a[i * n + i]
    return s


def colscale(double[::1] a, double[::1] w, double[::1] out,
             Py_ssize_t n, Py_ssize_t m):
    cdef Py_ssize_t i, j, im
    for i in range(n):
        im = i * m
        for j in range(m):
            out[im + j] = a[im + j] * w[j]


def add_colbias(double[::1] a, double[::1] b, double[::1] out,
                Py_ssize_t n, Py_ssize_t m):
    cdef Py_ssize_t i, j, im
    cdef double bi
    for i in range(n):
        im = i * m
        bi = b[i]
        for j in range(m):
            out[im + j] = a[im + j] + bi


def rowsum(double[::1] a, double[::1] out, Py_ssize_t n, Py_ssize_t m):
    cdef Py_ssize_t i, j, im
    cdef double s
    for i in range(n):
        im = i * m
        s = 0.0
        for j in range(m):
            s += a[im + j]
        out[i] = s


def colminmax(double[::1] a, Py_ssize_t n, Py_ssize_t m,
              double[::1] mins, double[::1] maxs):
    cdef Py_ssize_t i, j, im
    cdef double v
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

def prelu_fwd(double[::1] x, double slope, double[::1] out, Py_ssize_t n):
    cdef Py_ssize_t i
    cdef double v
    for i in range(n):
        v = x[i]
        out[i] = v if v > 0.0 else slope * v


def prelu_bwd(double[::1] x, double slope, double[::1] g, double[::1] gx,
              Py_ssize_t n):
    cdef Py_ssize_t i
    cdef double v
    cdef double gs = 0.0
    for i in range(n):
        v = x[i]
        if v > 0.0:
            gx[i] = g[i]
        else:
            gx[i] = slope * g[i]
            gs += g[i] * v
    return gs


def tanh_fwd(double[::1] x, double[::1] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = tanh(x[i])


def tanh_bwd(double[::1] y, double[::1] g, double[::1] gx, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        gx[i] = g[i] * (1.0 - y[i] * y[i])


def wfrob(double[::1] y, double[::1] yhat, double[::1] v,
          Py_ssize_t ny, Py_ssize_t nc):
    cdef Py_ssize_t i, k
    cdef double s = 0.0
    cdef double acc, d
    for k in range(nc):
        acc = 0.0
        for i in range(ny):
            d = y[i * nc + k] - yhat[i * nc + k]
            acc += d * d
        s += v[k] * acc
    return s


def wfrob_bwd(double[::1] y, double[::1] yhat, double[::1] v, double g0,
              double[::1] gy, Py_ssize_t ny, Py_ssize_t nc):
    cdef Py_ssize_t i, k, inc
    for i in range(ny):
        inc = i * nc
        for k in range(nc):
            gy[inc + k] = 2.0 * g0 * (y[inc + k] - yhat[inc + k]) * v[k]


# ---------------------------------------------------------------------------
# rotations / reflectors
# ---------------------------------------------------------------------------

def rot_rows(double[::1] a, Py_ssize_t n, Py_ssize_t m,
             Py_ssize_t p, Py_ssize_t q, double c, double s,
             Py_ssize_t clo, Py_ssize_t chi):
    cdef Py_ssize_t j
    cdef double ap, aq
    for j in range(clo, chi):
        ap = a[p * m + j]
        aq = a[q * m + j]
        a[p * m + j] = c * ap + s * aq
        a[q * m + j] = -s * ap + c * aq


def rot_cols(double[::1] a, Py_ssize_t n, Py_ssize_t m,
             Py_ssize_t p, Py_ssize_t q, double c, double s,
             Py_ssize_t rlo, Py_ssize_t rhi):
    cdef Py_ssize_t i
    cdef double ap, aq
    for i in range(rlo, rhi):
        ap = a[i * m + p]
        aq = a[i * m + q]
        a[i * m + p] = c * ap + s * aq
        a[i * m + q] = -s * ap + c * aq


def hh_rows(double[::1] a, Py_ssize_t n, Py_ssize_t m, double[::1] v,
            double beta, Py_ssize_t r0, Py_ssize_t clo, Py_ssize_t chi):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t nv = v.shape[0]
    cdef double w, bw
    for j in range(clo, chi):
        w = 0.0
        for i in range(nv):
            w += v[i] * a[(r0 + i) * m + j]
        bw = beta * w
        for i in range(nv):
            a[(r0 + i) * m + j] -= bw * v[i]


def hh_cols(double[::1] a, Py_ssize_t n, Py_ssize_t m, double[::1] v,
            double beta, Py_ssize_t c0, Py_ssize_t rlo, Py_ssize_t rhi):
    cdef Py_ssize_t i, j, im
    cdef Py_ssize_t nv = v.shape[0]
    cdef double w, bw
    for i in range(rlo, rhi):
        im = i * m
        w = 0.0
        for j in range(nv):
            w += v[j] * a[im + c0 + j]
        bw = beta * w
        for j in range(nv):
            a[im + c0 + j] -= bw * v[j]


def jacobi_sweep(double[::1] a, double[::1] vmat, Py_ssize_t n):
    cdef Py_ssize_t p, q
    cdef double apq, app, aqq, theta, t, c, s, off, v
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p * n + q]
            if apq == 0.0:
                continue
            app = a[p * n + p]
            aqq = a[q * n + q]
            theta = 0.5 * (aqq - app) / apq
            t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
            if theta > 0.0:
                t = -t
            c = 1.0 / sqrt(t * t + 1.0)
            s = t * c
            rot_cols(a, n, n, p, q, c, s, 0, n)
            rot_rows(a, n, n, p, q, c, s, 0, n)
            rot_cols(vmat, n, n, p, q, c, s, 0, n)
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            v = fabs(a[p * n + q])
            if v > off:
                off = v
    return off


def hqr_row_mod(double[::1] h, Py_ssize_t n, Py_ssize_t k, Py_ssize_t nn,
                double x, double y, double z, double q, double r):
    cdef Py_ssize_t j
    cdef double p
    for j in range(k, nn + 1):
        p = h[k * n + j] + q * h[(k + 1) * n + j]
        if k + 1 != nn:
            p += r * h[(k + 2) * n + j]
            h[(k + 2) * n + j] -= p * z
        h[(k + 1) * n + j] -= p * y
        h[k * n + j] -= p * x


def hqr_col_mod(double[::1] h, Py_ssize_t n, Py_ssize_t l, Py_ssize_t k,
                Py_ssize_t nn, double x, double y, double z, double q,
                double r):
    cdef Py_ssize_t i
    cdef Py_ssize_t hi = nn if nn < k + 3 else k + 3
    cdef double p
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

def lu_factor(double[::1] a, Py_ssize_t n, long long[::1] piv):
    cdef Py_ssize_t k, i, j, pk
    cdef double best, v, akk, lik, tmp
    for k in range(n):
        pk = k
        best = fabs(a[k * n + k])
        for i in range(k + 1, n):
            v = fabs(a[i * n + k])
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


def lu_solve(double[::1] a, long long[::1] piv, double[::1] b, Py_ssize_t n):
    cdef Py_ssize_t k, i, j, pk
    cdef double s, tmp
    for k in range(n):
        pk = piv[k]
        if pk != k:
            tmp = b[k]
            b[k] = b[pk]
            b[pk] = tmp
        for i in range(k + 1, n):
            b[i] -= a[i * n + k] * b[k]
    for i in range(n - 1, -1, -1):
        s = b[i]
        for j in range(i + 1, n):
            s -= a[i * n + j] * b[j]
        b[i] = s / a[i * n + i]


# ---------------------------------------------------------------------------
# graph-convolution mixing
# ---------------------------------------------------------------------------

def graph_mix(double[::1] lap, double[::1] z, double[::1] out,
              Py_ssize_t n_nodes, Py_ssize_t f, Py_ssize_t nc):
    cdef Py_ssize_t i, j, ff, s, row, ro, ri
    cdef double lij
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


def node_mix(double[::1] theta, double[::1] z, double[::1] out,
             Py_ssize_t n_nodes, Py_ssize_t f, Py_ssize_t fp, Py_ssize_t nc):
    cdef Py_ssize_t i, g, ff, s, base_o, base_z, ro, ri
    cdef double t
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


def node_mix_grad_theta(double[::1] z, double[::1] g, double[::1] gtheta,
                        Py_ssize_t n_nodes, Py_ssize_t f, Py_ssize_t fp,
                        Py_ssize_t nc):
    cdef Py_ssize_t i, ff, gg, s, ri, ro
    cdef double acc
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

def gather_window(double[::1] traj, Py_ssize_t ln, Py_ssize_t nch,
                  Py_ssize_t r0, Py_ssize_t nw, double[::1] out):
    cdef Py_ssize_t s, c, base
    for s in range(nw):
        base = (r0 + s) * nch
        for c in range(nch):
            out[c * nw + s] = traj[base + c]


def gather_delay_window(double[::1] traj, Py_ssize_t ln, Py_ssize_t nch,
                        Py_ssize_t r0, Py_ssize_t nw, Py_ssize_t d,
                        double[::1] out):
    cdef Py_ssize_t s, c, j, base
    for s in range(nw):
        for c in range(nch):
            base = (c * d) * nw + s
            for j in range(d):
                out[base + j * nw] = traj[(r0 + s - j) * nch + c]
