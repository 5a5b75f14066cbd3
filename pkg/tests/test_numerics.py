import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mubext.errors import InvalidArgument, NumericalFailure
from mubext.mub_catalog import fourier_mub
from mubext.finite_group import make_group
from mubext.numerics import (
    DEFAULT_TOL,
    Tolerances,
    cluster_values,
    eig_sym,
    eigvals_hermitian,
    eig_sym_batch,
    eigvals_hermitian_batch,
    gram_rank,
    gram_ranks_batch,
    intersection_dims_batch,
    min_eig_hermitian,
    operator_ranks,
    range_bases_batch,
    range_projector,
    operator_rank,
    range_basis,
    subspace_intersection_dim,
)
from mubext.povm import qubit_joint, vertex_joint


def rand_sym(rng, n):
    X = rng.standard_normal((n, n))
    return (X + X.T) / 2


def rand_unitary(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


class TestTolerances:
    def test_defaults(self):
        t = Tolerances()
        assert (t.eig_residual, t.cluster, t.rank, t.psd, t.match) == (1e-11, 1e-7, 1e-9, 1e-10, 1e-10)

    def test_positive_required(self):
        with pytest.raises(InvalidArgument):
            Tolerances(cluster=0.0)
        with pytest.raises(InvalidArgument):
            DEFAULT_TOL.with_(rank=-1)

    def test_with_ignores_none(self):
        assert DEFAULT_TOL.with_(cluster=None) == DEFAULT_TOL
        assert DEFAULT_TOL.with_(cluster=1e-6).cluster == 1e-6

    def test_from_env(self):
        t = Tolerances.from_env({"MUBEXT_TOL_CLUSTER": "1e-5", "OTHER": "x"})
        assert t.cluster == 1e-5 and t.rank == DEFAULT_TOL.rank
        with pytest.raises(InvalidArgument):
            Tolerances.from_env({"MUBEXT_TOL_RANK": "abc"})


class TestEigSym:
    def test_examples(self):
        assert np.allclose(eig_sym(np.eye(3)), [1, 1, 1], atol=0)
        assert np.array_equal(eig_sym(np.diag([2.0, -1.0, 0.0])), [-1, 0, 2])
        assert np.allclose(eig_sym([[0.0, 1.0], [1.0, 0.0]]), [-1, 1], atol=1e-15)

    def test_one_by_one_and_zero(self):
        assert eig_sym([[3.5]]).tolist() == [3.5]
        assert eig_sym(np.zeros((4, 4))).tolist() == [0, 0, 0, 0]

    def test_rejects_nonsquare(self):
        with pytest.raises(InvalidArgument):
            eig_sym(np.zeros((2, 3)))

    @pytest.mark.parametrize("n", [2, 3, 7, 16, 25, 49])
    def test_against_numpy_oracle(self, n):
        rng = np.random.default_rng(n)
        M = rand_sym(rng, n)
        vals, V = eig_sym(M, vectors=True)
        ref = np.linalg.eigvalsh(M)
        assert np.max(np.abs(vals - ref)) < 1e-11 * max(1, np.linalg.norm(M))
        assert np.all(np.diff(vals) >= 0)
        assert np.max(np.abs(V.T @ V - np.eye(n))) < 1e-11
        assert np.max(np.linalg.norm(M @ V - V * vals, axis=0)) <= 1e-11 * np.linalg.norm(M)

    def test_degenerate_spectrum(self):
        rng = np.random.default_rng(0)
        Q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
        D = np.array([-1.0] * 4 + [0.25] * 5 + [1.0] * 3)
        vals = eig_sym(Q @ np.diag(D) @ Q.T)
        assert np.max(np.abs(vals - np.sort(D))) < 1e-12

    def test_nonconvergence_reports_failure(self, monkeypatch):
        import mubext.numerics as nm

        monkeypatch.setattr(nm, "MAX_SWEEPS", 0)
        with pytest.raises(NumericalFailure) as ei:
            eig_sym(rand_sym(np.random.default_rng(1), 5))
        assert "off_diagonal_norm" in ei.value.diagnostics

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_orthogonal_similarity_invariance(self, n, seed):
        rng = np.random.default_rng(seed)
        M = rand_sym(rng, n)
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        a, b = eig_sym(M), eig_sym(Q @ M @ Q.T)
        assert np.max(np.abs(a - b)) <= DEFAULT_TOL.cluster

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 15), st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
    def test_trace(self, n, seed, scale):
        M = scale * rand_sym(np.random.default_rng(seed), n)
        assert abs(eig_sym(M).sum() - np.trace(M)) <= 1e-10 * n * max(np.linalg.norm(M), 1e-300)


class TestHermitian:
    def test_min_eig_examples(self):
        assert abs(min_eig_hermitian(np.eye(3)) - 1) < 1e-15
        P = np.zeros((3, 3))
        P[0, 0] = 1
        assert abs(min_eig_hermitian(P)) < 1e-15
        assert abs(min_eig_hermitian(np.diag([0.5, -0.25])) + 0.25) < 1e-15

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidArgument):
            min_eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_complex_against_numpy(self):
        rng = np.random.default_rng(5)
        Z = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        H = Z + Z.conj().T
        assert np.max(np.abs(eigvals_hermitian(H) - np.linalg.eigvalsh(H))) < 1e-11

    def test_range_basis_of_projector(self):
        v = np.array([1, 1j, 0]) / np.sqrt(2)
        P = np.outer(v, v.conj())
        basis = range_basis(P)
        assert subspace_intersection_dim(basis, [v]) == 1
        assert operator_rank(P) == 1


class TestGramRank:
    def test_examples(self):
        assert gram_rank([np.eye(2), np.eye(2)]) == 1
        assert gram_rank([np.diag([1, 0]), np.diag([0, 1])]) == 2

    def test_qubit_joint_rank_three(self):
        s = 1 / np.sqrt(2)
        C = qubit_joint((0, 0, 1), (1, 0, 0), (s, s))
        assert gram_rank(C.flat_effects()) == 3

    def test_complex_gram(self):
        # non-Hermitian family forces the complex Gram path
        E01 = np.array([[0, 1], [0, 0]], dtype=complex)
        assert gram_rank([E01, 1j * E01, E01.T]) == 2

    def test_shape_checks(self):
        with pytest.raises(InvalidArgument):
            gram_rank([])
        with pytest.raises(InvalidArgument):
            gram_rank([np.eye(2), np.eye(3)])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    def test_unitary_and_scaling_invariance(self, seed, k):
        rng = np.random.default_rng(seed)
        d = 3
        basis = [rand_sym(rng, d) for _ in range(k)]
        ops = basis + [basis[0] + 2 * basis[-1]]
        r = gram_rank(ops)
        assert r == min(k, d * d)
        U = rand_unitary(rng, d)
        assert gram_rank([U @ o @ U.conj().T for o in ops]) == r
        scales = rng.uniform(0.1, 10, len(ops)) * np.exp(1j * rng.uniform(0, 6, len(ops)))
        assert gram_rank([c * o for c, o in zip(scales, ops)]) == r


class TestIntersection:
    def test_examples(self):
        e = np.eye(3)
        assert subspace_intersection_dim([e[0]], [e[1]]) == 0
        assert subspace_intersection_dim([e[0], e[1]], [e[0], e[1]]) == 2

    def test_d5_vertex_ranges(self):
        C = vertex_joint(fourier_mub(make_group([5])))
        U, V = range_basis(C[0, 1]), range_basis(C[0, 3])
        assert subspace_intersection_dim(U, V) == 2

    def test_ambient_mismatch(self):
        with pytest.raises(InvalidArgument):
            subspace_intersection_dim([np.ones(2)], [np.ones(3)])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 4), st.integers(0, 4), st.integers(0, 3))
    def test_symmetry_and_construction(self, seed, a, b, shared):
        rng = np.random.default_rng(seed)
        n = 12
        S = [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(shared)]
        U = S + [rng.standard_normal(n) for _ in range(a)]
        V = [sum(rng.standard_normal() * s for s in S) for _ in range(shared)] if shared else []
        V = V + [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(b)]
        if not U or not V:
            return
        k = subspace_intersection_dim(U, V)
        assert k == subspace_intersection_dim(V, U)
        assert k == shared


class TestBatch:
    def test_batch_matches_single(self):
        rng = np.random.default_rng(7)
        Ms = np.array([rand_sym(rng, 6) for _ in range(5)])
        vals = eig_sym_batch(Ms)
        for M, v in zip(Ms, vals):
            assert np.array_equal(v, eig_sym(M)) or np.max(np.abs(v - eig_sym(M))) < 1e-13

    def test_gram_ranks_batch(self):
        rng = np.random.default_rng(9)
        fams = []
        for k in range(6):
            # k independent complex matrices, then dependent copies up to 8 members
            base = rng.standard_normal((k + 1, 3, 3)) + 1j * rng.standard_normal((k + 1, 3, 3))
            mix = rng.standard_normal((8 - k - 1, k + 1))
            fams.append(np.concatenate([base, np.einsum("ij,jab->iab", mix, base)]))
        ranks = gram_ranks_batch(np.stack(fams))
        assert list(ranks) == [1, 2, 3, 4, 5, 6]
        assert [gram_rank(list(f)) for f in fams] == list(ranks)
        herm = np.stack([np.stack([(f + f.conj().T) for f in fam]) for fam in fams])
        assert list(gram_ranks_batch(herm)) == [gram_rank(list(f)) for f in herm]

    def test_gram_ranks_batch_shape(self):
        with pytest.raises(InvalidArgument):
            gram_ranks_batch(np.zeros(3))

    def test_odd_and_trivial_sizes(self):
        rng = np.random.default_rng(10)
        for n in (1, 2, 3, 7):
            Ms = np.array([rand_sym(rng, n) for _ in range(3)])
            vals, V = eig_sym_batch(Ms, vectors=True)
            assert np.max(np.abs(vals - np.linalg.eigvalsh(Ms))) < 1e-12
            assert np.max(np.abs(Ms @ V - V * vals[:, None, :])) < 1e-12

    def test_hermitian_batch(self):
        rng = np.random.default_rng(8)
        Z = rng.standard_normal((4, 5, 5)) + 1j * rng.standard_normal((4, 5, 5))
        H = Z + np.conj(np.swapaxes(Z, 1, 2))
        ref = np.linalg.eigvalsh(H)
        assert np.max(np.abs(eigvals_hermitian_batch(H) - ref)) < 1e-11

    def test_operator_ranks(self):
        rng = np.random.default_rng(9)
        ops = []
        for r in range(5):
            X = rng.standard_normal((5, r)) + 1j * rng.standard_normal((5, r))
            ops.append(X @ X.conj().T)
        assert operator_ranks(np.array(ops)).tolist() == [0, 1, 2, 3, 4]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4), st.integers(0, 2))
    def test_projector_route_matches_gram_route(self, seed, a, b, shared):
        rng = np.random.default_rng(seed)
        n = 12  # a + b + shared <= n, so the planted subspace is the whole intersection
        cvec = lambda: rng.standard_normal(n) + 1j * rng.standard_normal(n)  # noqa: E731
        S = [cvec() for _ in range(shared)]
        U = S + [cvec() for _ in range(a)]
        V = S + [cvec() for _ in range(b)]
        P = [sum(np.outer(u, u.conj()) for u in W) for W in (U, V)]
        bases = range_bases_batch(np.array(P))
        proj = [range_projector(B, n) for B in bases]
        for Pi in proj:
            assert np.max(np.abs(Pi @ Pi - Pi)) < 1e-10
        got = intersection_dims_batch(proj[0][None], proj[1][None])[0]
        assert got == subspace_intersection_dim(U, V) == shared

    def test_empty_range_projector(self):
        assert np.array_equal(range_projector(np.zeros((0, 3)), 3), np.zeros((3, 3)))


def test_cluster_values():
    assert cluster_values([1.0, -1.0, 1.0 + 1e-9, 0.5], 1e-7) == [(-1.0, 1), (0.5, 1), (1.0 + 5e-10, 2)]
    assert cluster_values([], 1.0) == []
    # single linkage chains neighbours
    assert cluster_values([0.0, 0.6, 1.2], 0.7) == [(0.6, 3)]
