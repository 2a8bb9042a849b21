"""Dense real linear algebra on flat row-major float64 buffers.

Matrix is a thin wrapper over array('d'); all inner loops run through the
kernel backend (compiled when available).  Summation orders are fixed, so
results are bit-reproducible run to run and across backends.

Eigenvalue machinery:
  * eig_general - Householder Hessenberg reduction followed by the implicit
    double-shift QR iteration with 1x1/2x2 deflation (eigenvalues only).
  * sym_eig     - cyclic Jacobi with eigenvector accumulation.
  * eig_sym_max - shifted power iteration for the largest eigenvalue of a
    symmetric matrix.
  * svd_truncated - Gram-matrix route through sym_eig.  Accuracy of tiny
    singular values is limited by the squaring of the condition number,
    which is fine for the well-conditioned factors used here.
"""

from array import array
from cmath import sqrt as csqrt
from math import fabs, sqrt

from .backend import K
from .errors import ArgumentError, NumericError, ShapeError

_EPS = 2.220446049250313e-16


def _zeros_buf(n):
    return array("d", bytes(8 * n))


class Matrix:
    """Dense rows x cols matrix of float64, row-major."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows, cols, data=None):
        if rows < 0 or cols < 0:
            raise ArgumentError("negative matrix dimension")
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = _zeros_buf(rows * cols)
        else:
            if not isinstance(data, array):
                data = array("d", data)
            if len(data) != rows * cols:
                raise ShapeError(
                    f"buffer of {len(data)} values cannot fill {rows}x{cols}"
                )
            self.data = data

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zeros(rows, cols):
        return Matrix(rows, cols)

    @staticmethod
    def full(rows, cols, value):
        return Matrix(rows, cols, array("d", [float(value)] * (rows * cols)))

    @staticmethod
    def identity(n):
        m = Matrix(n, n)
        for i in range(n):
            m.data[i * n + i] = 1.0
        return m

    @staticmethod
    def from_rows(rows_list):
        r = len(rows_list)
        c = len(rows_list[0]) if r else 0
        buf = array("d")
        for row in rows_list:
            if len(row) != c:
                raise ShapeError("ragged row list")
            buf.extend(float(v) for v in row)
        return Matrix(r, c, buf)

    @staticmethod
    def column(values):
        return Matrix(len(values), 1, array("d", [float(v) for v in values]))

    @staticmethod
    def row(values):
        return Matrix(1, len(values), array("d", [float(v) for v in values]))

    @staticmethod
    def diag(values):
        n = len(values)
        m = Matrix(n, n)
        for i, v in enumerate(values):
            m.data[i * n + i] = float(v)
        return m

    # -- element access ----------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    def get(self, i, j):
        return self.data[i * self.cols + j]

    def set(self, i, j, v):
        self.data[i * self.cols + j] = float(v)

    def row_list(self, i):
        c = self.cols
        return list(self.data[i * c:(i + 1) * c])

    def tolist(self):
        return [self.row_list(i) for i in range(self.rows)]

    def copy(self):
        return Matrix(self.rows, self.cols, array("d", self.data))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols})"

    def is_finite(self):
        for v in self.data:
            if v != v or v in (float("inf"), float("-inf")):
                return False
        return True

    # -- basic algebra -----------------------------------------------------

    def t(self):
        out = Matrix(self.cols, self.rows)
        K.transpose(self.data, out.data, self.rows, self.cols)
        return out

    def add(self, other):
        _check_same_shape(self, other)
        out = Matrix(self.rows, self.cols)
        K.ew_add(self.data, other.data, out.data, len(self.data))
        return out

    def sub(self, other):
        _check_same_shape(self, other)
        out = Matrix(self.rows, self.cols)
        K.ew_sub(self.data, other.data, out.data, len(self.data))
        return out

    def mul_elem(self, other):
        _check_same_shape(self, other)
        out = Matrix(self.rows, self.cols)
        K.ew_mul(self.data, other.data, out.data, len(self.data))
        return out

    def scaled(self, alpha):
        out = Matrix(self.rows, self.cols)
        K.scale(self.data, float(alpha), out.data, len(self.data))
        return out

    def frobenius(self):
        s = 0.0
        for v in self.data:
            s += v * v
        return sqrt(s)

    def max_abs(self):
        m = 0.0
        for v in self.data:
            a = fabs(v)
            if a > m:
                m = a
        return m


def _check_same_shape(a, b):
    if a.rows != b.rows or a.cols != b.cols:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Standard product with left-to-right accumulation over the inner index."""
    if a.cols != b.rows:
        raise ShapeError(f"matmul: {a.shape} x {b.shape}")
    out = Matrix(a.rows, b.cols)
    K.matmul(a.data, b.data, out.data, a.rows, a.cols, b.cols)
    return out


def matmul_tn(a: Matrix, b: Matrix) -> Matrix:
    """a^T . b without materializing the transpose."""
    if a.rows != b.rows:
        raise ShapeError(f"matmul_tn: {a.shape} x {b.shape}")
    out = Matrix(a.cols, b.cols)
    K.matmul_tn(a.data, b.data, out.data, a.cols, a.rows, b.cols)
    return out


def matmul_nt(a: Matrix, b: Matrix) -> Matrix:
    """a . b^T without materializing the transpose."""
    if a.cols != b.cols:
        raise ShapeError(f"matmul_nt: {a.shape} x {b.shape}")
    out = Matrix(a.rows, b.rows)
    K.matmul_nt(a.data, b.data, out.data, a.rows, a.cols, b.rows)
    return out


# ---------------------------------------------------------------------------
# LU factorization
# ---------------------------------------------------------------------------

class LuFactor:
    """Partial-pivot LU of a square matrix, reusable for several solves."""

    __slots__ = ("n", "lu", "piv", "singular_at")

    def __init__(self, a: Matrix):
        if a.rows != a.cols:
            raise ShapeError("LU needs a square matrix")
        self.n = a.rows
        self.lu = array("d", a.data)
        self.piv = array("q", bytes(8 * self.n))
        flag = K.lu_factor(self.lu, self.n, self.piv)
        self.singular_at = flag - 1 if flag else -1

    @property
    def singular(self):
        return self.singular_at >= 0

    def solve_vec(self, b):
        """Solve A x = b for a length-n sequence; returns array('d')."""
        if self.singular:
            raise NumericError(f"singular pivot at column {self.singular_at}")
        x = array("d", b)
        K.lu_solve(self.lu, self.piv, x, self.n)
        return x

    def det(self):
        if self.singular:
            return 0.0
        d = 1.0
        for i in range(self.n):
            d *= self.lu[i * self.n + i]
            if self.piv[i] != i:
                d = -d
        return d


def det(a: Matrix) -> float:
    return LuFactor(a).det()


def solve(a: Matrix, b: Matrix) -> Matrix:
    """Solve A X = B column by column."""
    f = LuFactor(a)
    out = Matrix(b.rows, b.cols)
    for j in range(b.cols):
        col = array("d", (b.data[i * b.cols + j] for i in range(b.rows)))
        x = f.solve_vec(col)
        for i in range(b.rows):
            out.data[i * b.cols + j] = x[i]
    return out


# ---------------------------------------------------------------------------
# General (nonsymmetric) eigenvalues
# ---------------------------------------------------------------------------

def _hessenberg_inplace(h, n):
    """Householder reduction of the flat n x n buffer h to Hessenberg form."""
    for k in range(n - 2):
        sigma = 0.0
        for i in range(k + 2, n):
            sigma += h[i * n + k] * h[i * n + k]
        x0 = h[(k + 1) * n + k]
        if sigma == 0.0:
            continue
        mu = sqrt(x0 * x0 + sigma)
        v0 = x0 + mu if x0 >= 0.0 else x0 - mu
        v = array("d", [1.0] * (n - k - 1))
        for i in range(k + 2, n):
            v[i - k - 1] = h[i * n + k] / v0
        beta = 2.0 * v0 * v0 / (sigma + v0 * v0)
        K.hh_rows(h, n, n, v, beta, k + 1, k, n)
        K.hh_cols(h, n, n, v, beta, k + 1, 0, n)
        for i in range(k + 2, n):
            h[i * n + k] = 0.0


def _eig2x2(a11, a12, a21, a22):
    """Eigenvalues of [[a11, a12], [a21, a22]] via the stable quadratic."""
    p = 0.5 * (a11 - a22)
    disc = p * p + a12 * a21
    mid = 0.5 * (a11 + a22)
    if disc >= 0.0:
        z = sqrt(disc)
        if p >= 0.0:
            l1 = mid + z
        else:
            l1 = mid - z
        # product of roots = det; avoids cancellation in the smaller root
        detv = a11 * a22 - a12 * a21
        l2 = detv / l1 if l1 != 0.0 else mid + (z if p < 0.0 else -z)
        return complex(l1, 0.0), complex(l2, 0.0)
    z = sqrt(-disc)
    return complex(mid, z), complex(mid, -z)


def eig_general(a: Matrix, max_sweep_factor: int = 100):
    """All eigenvalues of a square real matrix, sorted by descending magnitude.

    Hessenberg reduction + implicit double-shift QR with 1x1/2x2 deflation.
    The total number of QR sweeps is capped at max_sweep_factor * n; hitting
    the cap (or 30 sweeps without a deflation) raises NumericError with the
    sweep count.  The |det| = prod|lambda_i| identity is the recommended
    external residual check for this routine.
    """
    if a.rows != a.cols:
        raise ShapeError("eig_general needs a square matrix")
    n = a.rows
    if not a.is_finite():
        raise ArgumentError("eig_general requires finite entries")
    if n == 0:
        return []
    if n == 1:
        return [complex(a.data[0], 0.0)]
    if n == 2:
        d = a.data
        lams = list(_eig2x2(d[0], d[1], d[2], d[3]))
        lams.sort(key=lambda z: -abs(z))
        return lams

    h = array("d", a.data)
    _hessenberg_inplace(h, n)

    anorm = 0.0
    for i in range(n):
        for j in range(max(0, i - 1), n):
            anorm += fabs(h[i * n + j])
    if anorm == 0.0:
        return [complex(0.0, 0.0)] * n

    eigs = []
    nn = n - 1
    t = 0.0
    sweeps = 0
    cap = max_sweep_factor * n
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = fabs(h[(l - 1) * n + (l - 1)]) + fabs(h[l * n + l])
                if s == 0.0:
                    s = anorm
                if fabs(h[l * n + (l - 1)]) <= _EPS * s:
                    h[l * n + (l - 1)] = 0.0
                    break
                l -= 1
            x = h[nn * n + nn]
            if l == nn:
                eigs.append(complex(x + t, 0.0))
                nn -= 1
                break
            y = h[(nn - 1) * n + (nn - 1)]
            w = h[nn * n + (nn - 1)] * h[(nn - 1) * n + nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = sqrt(fabs(q))
                x += t
                if q >= 0.0:
                    z = p + (z if p >= 0.0 else -z)
                    lam1 = x + z
                    lam2 = lam1 if z == 0.0 else x - w / z
                    eigs.append(complex(lam1, 0.0))
                    eigs.append(complex(lam2, 0.0))
                else:
                    eigs.append(complex(x + p, -z))
                    eigs.append(complex(x + p, z))
                nn -= 2
                break
            # no deflation yet: one implicit double-shift sweep
            if its == 30:
                raise NumericError(
                    f"QR iteration stalled after {sweeps} sweeps "
                    f"({its} on the current block)"
                )
            sweeps += 1
            if sweeps > cap:
                raise NumericError(f"QR iteration exceeded {cap} sweeps")
            if its in (10, 20):
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    h[i * n + i] -= x
                s = fabs(h[nn * n + (nn - 1)]) + fabs(h[(nn - 1) * n + (nn - 2)])
                y = x = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while m >= l:
                z = h[m * n + m]
                r = x - z
                s = y - z
                p = (r * s - w) / h[(m + 1) * n + m] + h[m * n + (m + 1)]
                q = h[(m + 1) * n + (m + 1)] - z - r - s
                r = h[(m + 2) * n + (m + 1)]
                s = fabs(p) + fabs(q) + fabs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = fabs(h[m * n + (m - 1)]) * (fabs(q) + fabs(r))
                v = fabs(p) * (
                    fabs(h[(m - 1) * n + (m - 1)]) + fabs(z)
                    + fabs(h[(m + 1) * n + (m + 1)])
                )
                if u <= _EPS * v:
                    break
                m -= 1
            for i in range(m, nn - 1):
                h[(i + 2) * n + i] = 0.0
                if i != m:
                    h[(i + 2) * n + (i - 1)] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = h[k * n + (k - 1)]
                    q = h[(k + 1) * n + (k - 1)]
                    r = 0.0
                    if k + 1 != nn:
                        r = h[(k + 2) * n + (k - 1)]
                    x = fabs(p) + fabs(q) + fabs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = sqrt(p * p + q * q + r * r)
                if p < 0.0:
                    s = -s
                if s != 0.0:
                    if k == m:
                        if l != m:
                            h[k * n + (k - 1)] = -h[k * n + (k - 1)]
                    else:
                        h[k * n + (k - 1)] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    K.hqr_row_mod(h, n, k, nn, x, y, z, q, r)
                    K.hqr_col_mod(h, n, l, k, nn, x, y, z, q, r)
    eigs.sort(key=lambda lam: -abs(lam))
    return eigs


# ---------------------------------------------------------------------------
# Symmetric eigenvalues
# ---------------------------------------------------------------------------

def _require_symmetric(a: Matrix, rtol=1e-10):
    if a.rows != a.cols:
        raise ShapeError("expected a square symmetric matrix")
    n = a.rows
    scale = a.max_abs() or 1.0
    for i in range(n):
        for j in range(i + 1, n):
            if fabs(a.data[i * n + j] - a.data[j * n + i]) > rtol * scale:
                raise ArgumentError("matrix is not symmetric")


def sym_eig(a: Matrix, max_sweeps: int = 50):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi.

    Returns (eigenvalues, V) with eigenvalues sorted descending and the
    columns of V the matching orthonormal eigenvectors.
    """
    _require_symmetric(a)
    n = a.rows
    work = array("d", a.data)
    vmat = Matrix.identity(n)
    scale = a.max_abs()
    if scale == 0.0:
        return [0.0] * n, vmat
    for _ in range(max_sweeps):
        off = K.jacobi_sweep(work, vmat.data, n)
        if off <= 1e-14 * scale:
            break
    else:
        raise NumericError(f"Jacobi failed to converge in {max_sweeps} sweeps")
    pairs = sorted(
        ((work[i * n + i], i) for i in range(n)), key=lambda p: -p[0]
    )
    evals = [p[0] for p in pairs]
    vout = Matrix(n, n)
    for new_j, (_, old_j) in enumerate(pairs):
        for i in range(n):
            vout.data[i * n + new_j] = vmat.data[i * n + old_j]
    return evals, vout


def eig_sym_max(a: Matrix, tol: float = 1e-10, max_iters: int = 10000) -> float:
    """Largest eigenvalue of a symmetric matrix by shifted power iteration.

    The shift c = 1 + max_i sum_j |a_ij| makes every shifted eigenvalue
    positive, so the dominant eigenvalue of A + cI is lambda_max(A) + c.
    Convergence is declared at relative tolerance tol on the Rayleigh
    quotient.
    """
    _require_symmetric(a)
    n = a.rows
    if n == 0:
        raise ArgumentError("empty matrix")
    shift = 1.0
    for i in range(n):
        rs = 0.0
        for j in range(n):
            rs += fabs(a.data[i * n + j])
        if rs + 1.0 > shift:
            shift = rs + 1.0
    b = a.copy()
    for i in range(n):
        b.data[i * n + i] += shift

    from .rng import Rng

    rng = Rng(0xC0FFEE)
    v = Matrix(n, 1, array("d", [rng.uniform(0.5, 1.5) for _ in range(n)]))
    lam_old = 0.0
    for it in range(max_iters):
        w = matmul(b, v)
        norm = w.frobenius()
        if norm == 0.0:
            raise NumericError("power iteration hit the zero vector")
        v = w.scaled(1.0 / norm)
        # Rayleigh quotient of the shifted matrix
        bv = matmul(b, v)
        lam = 0.0
        for i in range(n):
            lam += v.data[i] * bv.data[i]
        if it > 0 and fabs(lam - lam_old) <= tol * fabs(lam):
            return lam - shift
        lam_old = lam
    raise NumericError(f"power iteration did not converge in {max_iters} iters")


# ---------------------------------------------------------------------------
# Truncated SVD
# ---------------------------------------------------------------------------

def svd_truncated(a: Matrix, rank: int):
    """Rank-truncated SVD via the Gram-matrix eigendecomposition.

    Returns (U, s, V) with U: rows x rank, s: list of rank singular values
    (descending), V: cols x rank, such that A ~= U diag(s) V^T.
    """
    if rank < 1 or rank > min(a.rows, a.cols):
        raise ArgumentError(
            f"rank {rank} invalid for a {a.rows}x{a.cols} matrix"
        )
    tall = a.rows >= a.cols
    if tall:
        gram = matmul_tn(a, a)  # cols x cols
    else:
        gram = matmul_nt(a, a)  # rows x rows
    evals, vfull = sym_eig(gram)
    svals = [sqrt(ev) if ev > 0.0 else 0.0 for ev in evals[:rank]]
    m = gram.rows
    small = Matrix(m, rank)
    for j in range(rank):
        for i in range(m):
            small.data[i * rank + j] = vfull.data[i * m + j]
    other = matmul(a, small) if tall else matmul_tn(a, small)
    smax = svals[0] if svals else 0.0
    for j in range(rank):
        s = svals[j]
        inv = 1.0 / s if s > smax * 1e-15 and s > 0.0 else 0.0
        for i in range(other.rows):
            other.data[i * rank + j] *= inv
    if tall:
        return other, svals, small
    return small, svals, other


def svd_reconstruct(u: Matrix, svals, v: Matrix) -> Matrix:
    """U diag(s) V^T, the rank-len(s) reconstruction."""
    us = Matrix(u.rows, u.cols, array("d", u.data))
    for j, s in enumerate(svals):
        for i in range(u.rows):
            us.data[i * u.cols + j] *= s
    return matmul_nt(us, v)
