import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marekit.errors import AmbiguousKernel, NotSingular
from marekit.linalg import inf_norm, spectral_radius_nonneg
from marekit.mstruct import (
    MatrixKind,
    classify_zm,
    is_irreducible,
    null_pair,
    null_tol,
    regularity_witness,
    zero_eigen_structure,
)


def _singular_m_matrix(rng, size):
    """K = diag(s) - N with K v = 0 for a drawn positive v (exactly singular)."""
    N = rng.uniform(0.1, 1.0, (size, size))
    np.fill_diagonal(N, 0.0)
    v = rng.uniform(0.5, 1.5, size)
    s = (N @ v) / v
    return np.diag(s) - N, v


class TestClassify:
    def test_nilpotent_split_is_nonsingular(self):
        c = classify_zm([[1.0, -2.0], [0.0, 1.0]])
        assert c.kind is MatrixKind.NONSINGULAR_M
        assert c.rho_B == pytest.approx(0.0, abs=1e-10)
        assert c.s == 1.0

    def test_zero_row_sums_singular(self):
        c = classify_zm([[1.0, -1.0], [-1.0, 1.0]])
        assert c.kind is MatrixKind.SINGULAR_M
        assert abs(c.gap) <= c.tol

    def test_positive_off_diagonal_not_z(self):
        assert classify_zm([[1.0, 2.0], [0.0, 1.0]]).kind is MatrixKind.NOT_Z

    def test_z_not_m(self):
        # s = 1, B = [[0, 3], [3, 0]], rho = 3 > 1
        assert classify_zm([[1.0, -3.0], [-3.0, 1.0]]).kind is MatrixKind.Z_NOT_M

    @given(
        st.integers(1, 5).flatmap(
            lambda n: st.lists(
                st.lists(st.integers(-5, 5), min_size=n, max_size=n),
                min_size=n,
                max_size=n,
            )
        )
    )
    @settings(max_examples=80, deadline=None)
    def test_split_reconstruction_exact_on_integers(self, rows):
        # integer entries make s - (s - m) exact in floating point, so the
        # split reconstructs the input bit for bit
        M = np.array(rows, dtype=float)
        off = np.ones_like(M) - np.eye(M.shape[0])
        M = M * np.eye(M.shape[0]) - np.abs(M) * off  # force Z structure
        c = classify_zm(M)
        B = c.s * np.eye(M.shape[0]) - M
        assert np.array_equal(c.s * np.eye(M.shape[0]) - B, M)

    def test_split_reconstruction_float_close(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            n = int(rng.integers(1, 8))
            M = -rng.uniform(0.0, 1.0, (n, n))
            M[np.diag_indices(n)] = rng.uniform(0.0, 3.0, n)
            c = classify_zm(M)
            B = c.s * np.eye(n) - M
            assert np.allclose(c.s * np.eye(n) - B, M, atol=4 * np.finfo(float).eps * max(1.0, c.s))


class TestRegularity:
    def test_nonsingular_witness(self):
        M = np.array([[2.0, -1.0], [-1.0, 2.0]])
        rep = regularity_witness(M, classify_zm(M))
        assert rep.regular
        assert np.allclose(rep.witness, [1.0, 1.0])
        assert (M @ rep.witness >= 0).all()

    def test_singular_perron_witness(self):
        M = np.array([[1.0, -1.0], [-1.0, 1.0]])
        rep = regularity_witness(M, classify_zm(M))
        assert rep.regular
        assert (rep.witness > 0).all()
        assert np.allclose(M @ rep.witness, 0.0, atol=1e-12)

    def test_infeasible_case(self):
        # first row forces -v2 >= 0, impossible for positive v
        M = np.array([[0.0, -1.0], [0.0, 1.0]])
        rep = regularity_witness(M, classify_zm(M))
        assert not rep.regular
        assert rep.witness is None

    def test_every_nonsingular_m_matrix_regular(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            n = int(rng.integers(1, 12))
            N = rng.uniform(0.0, 1.0, (n, n))
            M = (spectral_radius_nonneg(N) + rng.uniform(0.1, 2.0)) * np.eye(n) - N
            cls = classify_zm(M)
            assert cls.kind is MatrixKind.NONSINGULAR_M
            rep = regularity_witness(M, cls)
            assert rep.regular
            assert (rep.witness > 0).all()

    def test_every_irreducible_singular_m_matrix_regular(self):
        rng = np.random.default_rng(37)
        for _ in range(30):
            n = int(rng.integers(2, 12))
            K, _ = _singular_m_matrix(rng, n)
            cls = classify_zm(K)
            assert cls.kind is MatrixKind.SINGULAR_M
            assert is_irreducible(K)
            rep = regularity_witness(K, cls)
            assert rep.regular
            assert (K @ rep.witness >= -cls.tol).all()

    def test_requires_m_matrix(self):
        M = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            regularity_witness(M, classify_zm(M))


class TestIrreducibility:
    def test_complete_graph(self):
        assert is_irreducible([[1.0, -1.0], [-1.0, 1.0]])

    def test_one_way_edge(self):
        assert not is_irreducible([[1.0, -1.0], [0.0, 1.0]])

    def test_one_by_one_convention(self):
        assert is_irreducible([[5.0]])

    def test_against_transitive_closure(self):
        rng = np.random.default_rng(41)
        for _ in range(60):
            n = int(rng.integers(1, 9))
            M = (rng.random((n, n)) < 0.3).astype(float)
            np.fill_diagonal(M, 1.0)
            # Floyd-Warshall boolean closure as the oracle
            reach = M != 0.0
            np.fill_diagonal(reach, True)
            for k in range(n):
                reach |= np.outer(reach[:, k], reach[k, :])
            assert is_irreducible(M) == bool(reach.all())


class TestNullPair:
    def test_symmetric_two_by_two(self):
        pair = null_pair([[1.0, -1.0], [-1.0, 1.0]], 1)
        assert np.allclose(pair.u, [0.5, 0.5])
        assert np.allclose(pair.v, [0.5, 0.5])
        assert pair.drift == 0.0

    def test_reducible_three_by_three(self):
        # hand null-space solve: v = (1/3, 1/3, 1/3), u = (0, 1/2, 1/2)
        K = np.array([[2.0, -1.0, -1.0], [0.0, 1.0, -1.0], [0.0, -1.0, 1.0]])
        pair = null_pair(K, 1)
        assert np.allclose(pair.v, [1 / 3, 1 / 3, 1 / 3], atol=1e-12)
        assert np.allclose(pair.u, [0.0, 0.5, 0.5], atol=1e-12)
        assert pair.drift == pytest.approx(-1 / 3, abs=1e-12)
        assert np.array_equal(pair.u1, pair.u[:1])
        assert np.array_equal(pair.v2, pair.v[1:])

    def test_nonsingular_raises(self):
        with pytest.raises(NotSingular):
            null_pair([[2.0, -1.0], [-1.0, 2.0]], 1)

    def test_two_dimensional_kernel_raises(self):
        with pytest.raises(AmbiguousKernel):
            null_pair(np.zeros((2, 2)), 1)

    def test_residual_within_tolerance_on_random_singular(self):
        rng = np.random.default_rng(43)
        for _ in range(40):
            size = int(rng.integers(2, 16))
            K, _ = _singular_m_matrix(rng, size)
            pair = null_pair(K, size // 2)
            tau = null_tol(K)
            assert inf_norm(K @ pair.v) <= tau
            assert inf_norm(pair.u @ K) <= tau
            assert pair.u.min() >= 0 and pair.v.min() >= 0
            assert abs(pair.u.sum() - 1.0) <= 1e-14
            assert abs(pair.v.sum() - 1.0) <= 1e-14

    @given(st.floats(0.01, 100.0), st.floats(0.01, 100.0))
    @settings(max_examples=40, deadline=None)
    def test_drift_invariant_under_scaling(self, cu, cv):
        K = np.array([[2.0, -1.0, -1.0], [0.0, 1.0, -1.0], [0.0, -1.0, 1.0]])
        pair = null_pair(K, 1)
        u = cu * pair.u
        v = cv * pair.v
        u /= np.abs(u).sum()
        v /= np.abs(v).sum()
        drift = u[:1] @ v[:1] - u[1:] @ v[1:]
        assert drift == pytest.approx(pair.drift, abs=1e-14)


class TestZeroEigenStructure:
    def test_rank_one_square_zero(self):
        # H^2 = 0: geometric 1, algebraic 2
        rep = zero_eigen_structure([[1.0, -1.0], [1.0, -1.0]])
        assert rep.simple_kernel
        assert rep.geometric_multiplicity == 1
        assert rep.algebraic_multiplicity == 2

    def test_diagonal_simple_zero(self):
        rep = zero_eigen_structure(np.diag([0.0, 1.0]))
        assert rep.simple_kernel
        assert (rep.geometric_multiplicity, rep.algebraic_multiplicity) == (1, 1)

    def test_two_independent_eigenvectors(self):
        rep = zero_eigen_structure(np.diag([0.0, 0.0]))
        assert not rep.simple_kernel
        assert rep.geometric_multiplicity == 2

    def test_no_zero_eigenvalue(self):
        rep = zero_eigen_structure(np.diag([1.0, 2.0]))
        assert not rep.simple_kernel
        assert rep.algebraic_multiplicity == 0

    def test_invariant_under_permutation_similarity(self):
        rng = np.random.default_rng(47)
        H = np.array(
            [
                [2.0, -1.0, -1.0, 0.0],
                [0.0, -1.0, 1.0, 0.0],
                [0.0, 1.0, -1.0, 0.0],
                [0.0, 0.0, 0.0, 3.0],
            ]
        )
        base = zero_eigen_structure(H)
        for _ in range(10):
            perm = rng.permutation(4)
            P = np.eye(4)[perm]
            conj = zero_eigen_structure(P @ H @ P.T)
            assert conj.geometric_multiplicity == base.geometric_multiplicity
            assert conj.algebraic_multiplicity == base.algebraic_multiplicity
            assert conj.simple_kernel == base.simple_kernel

    def test_geometric_at_most_algebraic_random(self):
        rng = np.random.default_rng(53)
        for _ in range(30):
            n = int(rng.integers(1, 9))
            H = rng.integers(-2, 3, (n, n)).astype(float)
            rep = zero_eigen_structure(H)
            assert rep.geometric_multiplicity <= rep.algebraic_multiplicity or (
                rep.algebraic_multiplicity == 0 and rep.geometric_multiplicity == 0
            )
