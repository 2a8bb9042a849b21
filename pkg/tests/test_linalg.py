"""Dense linear algebra against independent oracles (triple loops, numpy)."""

import math

import numpy as np
import pytest

from wdyn.errors import ArgumentError, NumericError, ShapeError
from wdyn.linalg import (
    LuFactor,
    Matrix,
    det,
    eig_general,
    eig_sym_max,
    matmul,
    solve,
    svd_reconstruct,
    svd_truncated,
    sym_eig,
)
from wdyn.rng import Rng


def random_matrix(rng, rows, cols, lo=-1.0, hi=1.0):
    return Matrix(rows, cols, [rng.uniform(lo, hi) for _ in range(rows * cols)])


# ---------------------------------------------------------------------------
# matmul
# ---------------------------------------------------------------------------

def test_matmul_identity():
    a = Matrix.from_rows([[1, 2], [3, 4]])
    assert matmul(Matrix.identity(2), a).tolist() == [[1, 2], [3, 4]]


def test_matmul_column_selection():
    a = Matrix.from_rows([[1, 2], [3, 4]])
    b = Matrix.from_rows([[0], [1]])
    assert matmul(a, b).tolist() == [[2], [4]]


def test_matmul_against_triple_loop_oracle():
    rng = Rng(101)
    a = random_matrix(rng, 5, 7)
    b = random_matrix(rng, 7, 3)
    got = matmul(a, b)
    for i in range(5):
        for j in range(3):
            acc = 0.0
            for k in range(7):
                acc += a.get(i, k) * b.get(k, j)
            assert abs(got.get(i, j) - acc) <= 1e-14


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        matmul(Matrix.zeros(2, 3), Matrix.zeros(2, 3))


def test_matmul_associativity_property():
    rng = Rng(7)
    for _ in range(5):
        a = random_matrix(rng, 4, 6)
        b = random_matrix(rng, 6, 5)
        c = random_matrix(rng, 5, 3)
        left = matmul(matmul(a, b), c)
        right = matmul(a, matmul(b, c))
        scale = max(left.max_abs(), 1.0)
        assert left.sub(right).max_abs() <= 1e-12 * scale


# ---------------------------------------------------------------------------
# eig_general
# ---------------------------------------------------------------------------

def test_eig_diagonal():
    lams = eig_general(Matrix.diag([2.0, 3.0]))
    assert lams == [complex(3), complex(2)]


def test_eig_rotation_generator():
    lams = eig_general(Matrix.from_rows([[0, -1], [1, 0]]))
    assert sorted((z.real, z.imag) for z in lams) == [(0.0, -1.0), (0.0, 1.0)]


def test_eig_brusselator_jacobian_fixed_point():
    # Jacobian at the fixed point (1, B) for A=1, B=5 has eigenvalues
    # (3 +/- sqrt(5)) / 2, the roots of lambda^2 - 3 lambda + 1.
    j = Matrix.from_rows([[4.0, 1.0], [-5.0, -1.0]])
    lams = sorted(z.real for z in eig_general(j))
    lo, hi = (3 - math.sqrt(5)) / 2, (3 + math.sqrt(5)) / 2
    assert abs(lams[0] - lo) < 1e-12
    assert abs(lams[1] - hi) < 1e-12
    assert all(abs(z.imag) < 1e-14 for z in eig_general(j))


def test_eig_sorted_by_descending_magnitude():
    rng = Rng(3)
    for _ in range(10):
        a = random_matrix(rng, 6, 6)
        mags = [abs(z) for z in eig_general(a)]
        assert mags == sorted(mags, reverse=True)


def test_eig_magnitude_product_matches_lu_det():
    rng = Rng(11)
    for _ in range(10):
        a = random_matrix(rng, 6, 6)
        prod = 1.0
        for z in eig_general(a):
            prod *= abs(z)
        d = abs(det(a))
        assert abs(prod - d) <= 1e-8 * max(d, 1e-30)


def test_eig_matches_numpy_on_random():
    rng = Rng(23)
    for n in (3, 5, 8, 12):
        a = random_matrix(rng, n, n)
        mine = np.sort_complex(np.array(eig_general(a)))
        ref = np.sort_complex(np.linalg.eigvals(np.array(a.tolist())))
        assert np.max(np.abs(mine - ref)) < 1e-10


def test_eig_rejects_nonsquare_and_nonfinite():
    with pytest.raises(ShapeError):
        eig_general(Matrix.zeros(2, 3))
    bad = Matrix.from_rows([[1.0, float("nan")], [0.0, 1.0]])
    with pytest.raises(ArgumentError):
        eig_general(bad)


# ---------------------------------------------------------------------------
# eig_sym_max
# ---------------------------------------------------------------------------

def test_eig_sym_max_identity():
    assert abs(eig_sym_max(Matrix.identity(4), 1e-10) - 1.0) < 1e-8


def test_eig_sym_max_path_graph_laplacian():
    lap = Matrix.from_rows([[1, -1], [-1, 1]])
    assert abs(eig_sym_max(lap, 1e-10) - 2.0) < 1e-8


def test_eig_sym_max_complete_graph_laplacian():
    # normalized Laplacian of K_3: eigenvalues {0, 3/2, 3/2}
    lap = Matrix.from_rows([
        [1.0, -0.5, -0.5],
        [-0.5, 1.0, -0.5],
        [-0.5, -0.5, 1.0],
    ])
    assert abs(eig_sym_max(lap, 1e-10) - 1.5) < 1e-8


def test_eig_sym_max_rejects_asymmetric():
    with pytest.raises(ArgumentError):
        eig_sym_max(Matrix.from_rows([[0, 1], [0, 0]]), 1e-10)


# ---------------------------------------------------------------------------
# svd_truncated
# ---------------------------------------------------------------------------

def test_svd_diag_rank2():
    u, s, v = svd_truncated(Matrix.diag([3.0, 2.0, 1.0]), 2)
    assert [round(x, 12) for x in s] == [3.0, 2.0]


def test_svd_rank1_outer_product():
    uvec = [1.0, -2.0, 0.5]
    vvec = [0.3, 0.4, -1.2, 2.0]
    a = Matrix.from_rows([[ui * vj for vj in vvec] for ui in uvec])
    u, s, v = svd_truncated(a, 1)
    recon = svd_reconstruct(u, s, v)
    assert recon.sub(a).max_abs() <= 1e-12


def test_svd_full_rank_reconstruction_vs_gram_oracle():
    rng = Rng(17)
    a = random_matrix(rng, 20, 8)
    u, s, v = svd_truncated(a, 8)
    recon = svd_reconstruct(u, s, v)
    rel = recon.sub(a).frobenius() / a.frobenius()
    assert rel <= 1e-10
    # independent oracle: eigenvalues of A^T A
    an = np.array(a.tolist())
    evals = np.sort(np.linalg.eigvalsh(an.T @ an))[::-1]
    for si, ev in zip(s, evals):
        assert abs(si - math.sqrt(max(ev, 0.0))) <= 1e-10 * max(1.0, si)


def test_svd_tail_energy_identity():
    rng = Rng(29)
    a = random_matrix(rng, 9, 6)
    full_s = svd_truncated(a, 6)[1]
    for rank in (2, 4):
        u, s, v = svd_truncated(a, rank)
        err = svd_reconstruct(u, s, v).sub(a).frobenius()
        tail = math.sqrt(sum(x * x for x in full_s[rank:]))
        assert abs(err - tail) <= 1e-10 * max(1.0, tail)


def test_svd_wide_matrix():
    rng = Rng(31)
    a = random_matrix(rng, 4, 11)
    u, s, v = svd_truncated(a, 4)
    assert svd_reconstruct(u, s, v).sub(a).max_abs() <= 1e-10


def test_svd_rank_bounds():
    a = Matrix.zeros(3, 5)
    with pytest.raises(ArgumentError):
        svd_truncated(a, 0)
    with pytest.raises(ArgumentError):
        svd_truncated(a, 4)


# ---------------------------------------------------------------------------
# sym_eig / LU
# ---------------------------------------------------------------------------

def test_sym_eig_reconstructs():
    rng = Rng(41)
    a = random_matrix(rng, 7, 7)
    a = a.add(a.t()).scaled(0.5)
    evals, v = sym_eig(a)
    an = np.array(a.tolist())
    vn = np.array(v.tolist())
    recon = vn @ np.diag(evals) @ vn.T
    assert np.max(np.abs(recon - an)) < 1e-12
    assert evals == sorted(evals, reverse=True)


def test_lu_solve_and_det():
    a = Matrix.from_rows([[2.0, 1.0], [1.0, 3.0]])
    f = LuFactor(a)
    x = f.solve_vec([5.0, 10.0])
    assert abs(x[0] - 1.0) < 1e-12 and abs(x[1] - 3.0) < 1e-12
    assert abs(f.det() - 5.0) < 1e-12
    b = Matrix.from_rows([[5.0], [10.0]])
    assert solve(a, b).sub(Matrix.from_rows([[1.0], [3.0]])).max_abs() < 1e-12


def test_lu_singular_flagged():
    f = LuFactor(Matrix.from_rows([[1.0, 2.0], [2.0, 4.0]]))
    assert f.singular
    with pytest.raises(NumericError):
        f.solve_vec([1.0, 1.0])
