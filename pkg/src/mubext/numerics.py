"""Dense matrix kernels built around one cyclic Jacobi eigensolver.

Complex Hermitian problems are mapped to real symmetric ones through the
embedding ``M = X + iY  ->  [[X, -Y], [Y, X]]``, which doubles every
eigenvalue's multiplicity.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, NumericalFailure

MAX_SWEEPS = 100
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerances:
    eig_residual: float = 1e-11
    cluster: float = 1e-7
    rank: float = 1e-9
    psd: float = 1e-10
    match: float = 1e-10

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not v > 0:
                raise InvalidArgument(f"tolerance {f.name} must be strictly positive, got {v!r}")

    def with_(self, **overrides) -> "Tolerances":
        return replace(self, **{k: float(v) for k, v in overrides.items() if v is not None})

    @classmethod
    def from_env(cls, environ=None) -> "Tolerances":
        """Read ``MUBEXT_TOL_<FIELD>`` overrides, e.g. ``MUBEXT_TOL_CLUSTER=1e-6``."""
        environ = os.environ if environ is None else environ
        overrides = {}
        for f in fields(cls):
            raw = environ.get(f"MUBEXT_TOL_{f.name.upper()}")
            if raw is not None:
                try:
                    overrides[f.name] = float(raw)
                except ValueError:
                    raise InvalidArgument(f"MUBEXT_TOL_{f.name.upper()}={raw!r} is not a number") from None
        return cls().with_(**overrides)


DEFAULT_TOL = Tolerances()


def symmetrize(M) -> np.ndarray:
    """Return the exactly symmetric matrix (M + M^T)/2."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {M.shape}")
    return 0.5 * (M + M.T)


def _round_robin(m: int) -> list[list[int]]:
    """m-1 arrangements of range(m); in each, slot i is paired with slot m/2 + i.

    Across the rounds every pair of indices meets exactly once (circle method).
    """
    h = m // 2
    circle = list(range(m))
    rounds = []
    for _ in range(m - 1):
        rounds.append(circle[:h] + circle[m - 1 : h - 1 : -1])
        circle = [circle[0], circle[-1]] + circle[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> np.ndarray:
    """Off-diagonal Frobenius norm of each matrix in a (b, n, n) stack."""
    off = a.copy()
    idx = np.arange(a.shape[-1])
    off[:, idx, idx] = 0.0
    return np.sqrt(np.einsum("bij,bij->b", off, off))


def _jacobi(a: np.ndarray):
    """Cyclic Jacobi on a stack of symmetric matrices.

    Every matrix sees the same round-robin pair schedule with its own
    rotation angles; a matrix stops rotating once it has converged.
    Matrices are stored permuted so that each round rotates slot i against
    slot h + i, which turns every update into contiguous slice arithmetic.
    Odd sizes get a zero row and column that never rotates.
    Returns (diagonals, eigenvector stacks, sweeps used).
    """
    b, n, _ = a.shape
    scale = np.sqrt(np.einsum("bij,bij->b", a, a))
    if n == 1:
        return a[:, 0, :].copy(), np.ones((b, 1, 1)), 0
    m = n + (n % 2)
    if m != n:
        a = np.pad(a, ((0, 0), (0, 1), (0, 1)))
    rounds = [np.array(r) for r in _round_robin(m)]
    moves = []
    for k, cur in enumerate(rounds):
        where = np.empty(m, dtype=int)
        where[cur] = np.arange(m)
        moves.append(where[rounds[(k + 1) % len(rounds)]])
    order = rounds[0]
    a = a[:, order[:, None], order[None, :]]
    v = np.broadcast_to(np.eye(m)[:, order], (b, m, m)).copy()

    stop = n * _EPS * scale
    live = np.arange(b)
    for sweep in range(MAX_SWEEPS + 1):
        off = _off_norm(a[live])
        live = live[off > stop[live]]
        if live.size == 0:
            inv = np.argsort(order)
            a = a[:, inv[:, None], inv[None, :]]
            return np.einsum("bii->bi", a)[:, :n].copy(), v[:, :n, inv[:n]], sweep
        if sweep == MAX_SWEEPS:
            break
        al, vl = _jacobi_sweep(a[live], v[live], moves)
        a[live], v[live] = al, vl
    raise NumericalFailure(
        f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps",
        {"n": n, "off_diagonal_norm": float(off.max()), "matrix_norm": float(scale.max())},
    )


def _rotate(x: np.ndarray, c: np.ndarray, s: np.ndarray, axis: int) -> None:
    h = x.shape[axis] // 2
    lo = (slice(None),) * axis + (slice(None, h),)
    hi = (slice(None),) * axis + (slice(h, None),)
    first, second = x[lo], x[hi]
    x[lo], x[hi] = c * first - s * second, s * first + c * second


def _jacobi_sweep(a: np.ndarray, v: np.ndarray, moves):
    h = a.shape[1] // 2
    ii = np.arange(h)
    for move in moves:
        apq, app, aqq = a[:, ii, h + ii], a[:, ii, ii], a[:, h + ii, h + ii]
        # negligible entries are left alone; this also keeps theta finite
        active = np.abs(apq) > _EPS * _EPS * (np.abs(app) + np.abs(aqq))
        if active.any():
            theta = (aqq - app) / (2.0 * np.where(active, apq, 1.0))
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            _rotate(a, c[:, :, None], s[:, :, None], 1)
            _rotate(a, c[:, None, :], s[:, None, :], 2)
            _rotate(v, c[:, None, :], s[:, None, :], 2)
        a = a[:, move[:, None], move[None, :]]
        v = v[:, :, move]
    return a, v


def eig_sym_batch(Ms, tol: Tolerances = DEFAULT_TOL, vectors: bool = False):
    """Ascending eigenvalues for a (b, n, n) stack of real symmetric matrices.

    Every eigenpair is checked against ``tol.eig_residual * max(||M||_F, 1)``
    for its own matrix; a violation anywhere raises NumericalFailure.
    """
    M = np.asarray(Ms, dtype=float)
    if M.ndim != 3 or M.shape[1] != M.shape[2]:
        raise InvalidArgument(f"expected a stack of square matrices, got shape {M.shape}")
    if M.shape[1] < 1:
        raise InvalidArgument("empty matrix")
    M = 0.5 * (M + np.swapaxes(M, 1, 2))
    vals, V, _ = _jacobi(M.copy())
    order = np.argsort(vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    n = M.shape[1]
    norms = np.sqrt(np.einsum("bij,bij->b", M, M))
    bound = tol.eig_residual * np.maximum(norms, 1.0)
    resid = np.linalg.norm(M @ V - V * vals[:, None, :], axis=1).max(axis=1)
    ortho = np.abs(np.swapaxes(V, 1, 2) @ V - np.eye(n)).max(axis=(1, 2))
    bad = (resid > bound) | (ortho > tol.eig_residual)
    if bad.any():
        i = int(np.argmax(bad))
        raise NumericalFailure(
            "eigenpair residual above tolerance",
            {"index": i, "residual": float(resid[i]), "bound": float(bound[i]), "orthogonality": float(ortho[i])},
        )
    return (vals, V) if vectors else vals


def eig_sym(M, tol: Tolerances = DEFAULT_TOL, vectors: bool = False):
    """Eigenvalues (ascending) of a real symmetric matrix by cyclic Jacobi.

    With ``vectors=True`` returns ``(values, V)`` where column ``V[:, i]``
    belongs to ``values[i]``. Every eigenpair is checked against
    ``tol.eig_residual * max(||M||_F, 1)``.
    """
    M = symmetrize(M)
    if M.shape[0] < 1:
        raise InvalidArgument("empty matrix")
    vals, V = eig_sym_batch(M[None], tol, vectors=True)
    return (vals[0], V[0]) if vectors else vals[0]


def real_embedding(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    X, Y = M.real, M.imag
    return np.block([[X, -Y], [Y, X]])


def hermitian_part_check(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {M.shape}")
    dev = np.abs(M - M.conj().T).max() if M.size else 0.0
    if dev > tol.match:
        raise InvalidArgument(f"matrix is not Hermitian: max |M - M^H| = {dev:.3e}")
    return 0.5 * (M + M.conj().T)


def eigvals_hermitian(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix, one per complex dimension."""
    H = hermitian_part_check(M, tol)
    vals = eig_sym(real_embedding(H), tol)
    return vals[::2]


def eigh_hermitian(M, tol: Tolerances = DEFAULT_TOL):
    """Eigenvalues and complex eigenvectors of a Hermitian matrix.

    Vectors come from the real embedding: each complex eigenvector appears
    twice (as z and iz), so ``vecs`` has 2n columns spanning each eigenspace
    over the complex field. ``vals`` has the matching 2n entries.
    """
    H = hermitian_part_check(M, tol)
    n = H.shape[0]
    vals, V = eig_sym(real_embedding(H), tol, vectors=True)
    return vals, V[:n, :] + 1j * V[n:, :]


def min_eig_hermitian(M, tol: Tolerances = DEFAULT_TOL) -> float:
    return float(eigvals_hermitian(M, tol)[0])


def eigvals_hermitian_batch(Ms, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Ascending eigenvalues of each Hermitian matrix in a (b, n, n) stack."""
    Ms = np.asarray(Ms, dtype=complex)
    if Ms.ndim != 3 or Ms.shape[1] != Ms.shape[2]:
        raise InvalidArgument(f"expected a stack of square matrices, got shape {Ms.shape}")
    dev = np.abs(Ms - np.conj(np.swapaxes(Ms, 1, 2))).max() if Ms.size else 0.0
    if dev > tol.match:
        raise InvalidArgument(f"matrix is not Hermitian: max |M - M^H| = {dev:.3e}")
    H = 0.5 * (Ms + np.conj(np.swapaxes(Ms, 1, 2)))
    return eig_sym_batch(_embed_stack(H), tol)[:, ::2]


def _rank_from_psd_eigs(vals: np.ndarray, tol: Tolerances) -> int:
    top = vals.max() if vals.size else 0.0
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(vals > tol.rank * top))


def gram_matrix(ops: Sequence) -> np.ndarray:
    """Hilbert-Schmidt Gram matrix G_ij = tr(O_i^H O_j)."""
    X = np.array([np.asarray(o, dtype=complex).reshape(-1) for o in ops])
    return X.conj() @ X.T


def gram_rank(ops: Sequence, tol: Tolerances = DEFAULT_TOL) -> int:
    """Dimension of the linear span of a family of equally shaped operators."""
    ops = [np.asarray(o, dtype=complex) for o in ops]
    if not ops:
        raise InvalidArgument("gram_rank needs at least one operator")
    shape = ops[0].shape
    if any(o.shape != shape for o in ops):
        raise InvalidArgument("all operators must have the same shape")
    G = gram_matrix(ops)
    G = 0.5 * (G + G.conj().T)
    if np.abs(G.imag).max() <= tol.match * max(np.abs(G).max(), 1.0):
        # Hermitian families have a real Gram matrix
        return _rank_from_psd_eigs(eig_sym(G.real, tol), tol)
    vals = eig_sym(real_embedding(G), tol)
    # each eigenvalue appears twice in the embedding
    return _rank_from_psd_eigs(vals, tol) // 2


def gram_ranks_batch(families, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """gram_rank of each family in a (b, k, ...) stack of equally shaped operators.

    All Gram matrices share one batched Jacobi run.
    """
    F = np.asarray(families, dtype=complex)
    if F.ndim < 2 or F.shape[0] < 1 or F.shape[1] < 1:
        raise InvalidArgument(f"expected a (b, k, ...) stack of operator families, got shape {F.shape}")
    X = F.reshape(F.shape[0], F.shape[1], -1)
    G = np.einsum("bki,bli->bkl", X.conj(), X)
    G = 0.5 * (G + np.conj(np.swapaxes(G, 1, 2)))
    scale = np.maximum(np.abs(G).max(axis=(1, 2)), 1.0)
    if np.all(np.abs(G.imag).max(axis=(1, 2)) <= tol.match * scale):
        vals = eig_sym_batch(G.real, tol)
        return np.array([_rank_from_psd_eigs(v, tol) for v in vals], dtype=int)
    vals = eig_sym_batch(_embed_stack(G), tol)
    return np.array([_rank_from_psd_eigs(v, tol) // 2 for v in vals], dtype=int)


def span_rank(columns: Sequence, tol: Tolerances = DEFAULT_TOL) -> int:
    cols = [np.asarray(c, dtype=complex).reshape(-1) for c in columns]
    if not cols:
        return 0
    return gram_rank(cols, tol)


def subspace_intersection_dim(U: Sequence, V: Sequence, tol: Tolerances = DEFAULT_TOL) -> int:
    """dim(span U  ∩  span V) = dim U + dim V - dim(U + V)."""
    U = [np.asarray(u, dtype=complex).reshape(-1) for u in U]
    V = [np.asarray(v, dtype=complex).reshape(-1) for v in V]
    if U and V and U[0].shape != V[0].shape:
        raise InvalidArgument("subspaces live in different ambient dimensions")
    return span_rank(U, tol) + span_rank(V, tol) - span_rank(U + V, tol)


def range_basis(M, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """Vectors spanning the range of a positive semidefinite operator."""
    vals, vecs = eigh_hermitian(M, tol)
    top = vals.max()
    if top <= 0.0:
        return []
    keep = vals > tol.rank * top
    return [vecs[:, i] for i in np.flatnonzero(keep)]


def _embed_stack(H: np.ndarray) -> np.ndarray:
    X, Y = H.real, H.imag
    return np.concatenate([np.concatenate([X, -Y], axis=2), np.concatenate([Y, X], axis=2)], axis=1)


def range_bases_batch(Ms, tol: Tolerances = DEFAULT_TOL) -> list[np.ndarray]:
    """range_basis for each matrix of a (b, n, n) stack; rows are spanning vectors."""
    Ms = np.asarray(Ms, dtype=complex)
    n = Ms.shape[-1]
    H = 0.5 * (Ms + np.conj(np.swapaxes(Ms, 1, 2)))
    vals, V = eig_sym_batch(_embed_stack(H), tol, vectors=True)
    out = []
    for w, Vi in zip(vals, V):
        top = w.max()
        keep = np.flatnonzero(w > tol.rank * top) if top > 0 else np.array([], dtype=int)
        out.append((Vi[:n, keep] + 1j * Vi[n:, keep]).T)
    return out


def range_projector(basis: np.ndarray, n: int) -> np.ndarray:
    """Orthogonal projector onto the span of rows returned by range_bases_batch.

    Those rows come in pairs z, iz from an orthonormal real eigenbasis of the
    embedding, for which sum z z^H equals twice the projector.
    """
    if len(basis) == 0:
        return np.zeros((n, n), dtype=complex)
    return 0.5 * basis.T @ basis.conj()


def intersection_dims_batch(P, Q, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """dim(ran P ∩ ran Q) for stacks of orthogonal projectors.

    The intersection is the null space of 2I - P - Q, whose eigenvalues are
    1 - cos(theta) over the principal angles; zero is tested at tol.rank.
    """
    P, Q = np.asarray(P, dtype=complex), np.asarray(Q, dtype=complex)
    n = P.shape[-1]
    vals = eigvals_hermitian_batch(2.0 * np.eye(n) - P - Q, tol)
    return np.count_nonzero(vals <= tol.rank, axis=1)


def operator_rank(M, tol: Tolerances = DEFAULT_TOL) -> int:
    """Rank of a Hermitian operator, eigenvalues thresholded relative to the largest."""
    vals = np.abs(eigvals_hermitian(M, tol))
    return _rank_from_psd_eigs(vals, tol)


def operator_ranks(Ms, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """operator_rank for each matrix of a (b, n, n) stack."""
    vals = np.abs(eigvals_hermitian_batch(Ms, tol))
    return np.array([_rank_from_psd_eigs(v, tol) for v in vals], dtype=int)


def cluster_values(values, width: float) -> list[tuple[float, int]]:
    """Single-linkage clustering of a sorted list: consecutive gaps <= width merge."""
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        return []
    out = []
    start = 0
    for i in range(1, vals.size + 1):
        if i == vals.size or vals[i] - vals[i - 1] > width:
            block = vals[start:i]
            out.append((float(block.mean()), int(block.size)))
            start = i
    return out
