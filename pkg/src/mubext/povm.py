"""Observables built from a MUB pair: sharp, noisy, Lüders joint, vertex joint, qubit joint."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IncompatiblePair, InvalidArgument, OutOfRange, Unsupported
from .finite_group import ValidationReport
from .mub_catalog import MubPair
from .numerics import (
    DEFAULT_TOL,
    Tolerances,
    eig_sym,
    eigvals_hermitian_batch,
    operator_ranks,
)

ON_GAMMA_RESIDUAL = 1e-9
_SQRT_CLAMP = 1e-14

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _freeze(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _check_effects(effects: np.ndarray, tol: Tolerances) -> ValidationReport:
    flat = effects.reshape(-1, *effects.shape[-2:])
    dim = flat.shape[-1]
    herm = max(float(np.abs(E - E.conj().T).max()) for E in flat)
    herm_parts = 0.5 * (flat + np.conj(np.swapaxes(flat, 1, 2)))
    min_eig = float(eigvals_hermitian_batch(herm_parts, tol)[:, 0].min())
    norm = float(np.abs(flat.sum(axis=0) - np.eye(dim)).max())
    checks = {
        "hermitian": herm <= tol.match,
        "positive": min_eig >= -tol.psd,
        "normalized": norm <= tol.match,
    }
    details = {"max_hermiticity_deviation": herm, "min_eigenvalue": min_eig, "normalization_deviation": norm}
    return ValidationReport(all(checks.values()), checks, details)


@dataclass(frozen=True, eq=False)
class Observable:
    effects: np.ndarray  # shape (m, d, d)

    def __post_init__(self):
        E = _freeze(self.effects)
        if E.ndim != 3 or E.shape[1] != E.shape[2]:
            raise InvalidArgument(f"effects must have shape (m, d, d), got {E.shape}")
        object.__setattr__(self, "effects", E)

    @property
    def d(self) -> int:
        return self.effects.shape[1]

    @property
    def outcomes(self) -> int:
        return self.effects.shape[0]

    def __getitem__(self, x) -> np.ndarray:
        return self.effects[x]

    def check(self, tol: Tolerances = DEFAULT_TOL) -> ValidationReport:
        return _check_effects(self.effects, tol)

    def to_dict(self) -> dict:
        return {"d": self.d, "outcomes": self.outcomes, "effects": _complex_lists(self.effects)}


@dataclass(frozen=True, eq=False)
class JointObservable:
    """Effects indexed by (x, y); ``effects[x, y]`` is a d x d matrix."""

    effects: np.ndarray  # shape (m1, m2, d, d)
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        E = _freeze(self.effects)
        if E.ndim != 4 or E.shape[2] != E.shape[3]:
            raise InvalidArgument(f"effects must have shape (m1, m2, d, d), got {E.shape}")
        object.__setattr__(self, "effects", E)

    @property
    def d(self) -> int:
        return self.effects.shape[2]

    def __getitem__(self, xy) -> np.ndarray:
        return self.effects[xy]

    def flat_effects(self) -> list[np.ndarray]:
        """Effects in (x, y) lexicographic order."""
        return list(self.effects.reshape(-1, self.d, self.d))

    def check(self, tol: Tolerances = DEFAULT_TOL) -> ValidationReport:
        return _check_effects(self.effects, tol)

    def effect_ranks(self, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        m1, m2 = self.effects.shape[:2]
        return operator_ranks(self.effects.reshape(m1 * m2, self.d, self.d), tol).reshape(m1, m2)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "d": self.d,
            "effects": _complex_lists(self.effects),
        }


def _complex_lists(a: np.ndarray):
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_complex_lists(sub) for sub in a]


# -- elementary observables ---------------------------------------------------


def sharp_observables(pair: MubPair) -> tuple[Observable, Observable]:
    """A(x) = |phi_x><phi_x|, B(y) = |psi_y><psi_y|."""
    d = pair.d
    A = np.zeros((d, d, d), dtype=complex)
    A[np.arange(d), np.arange(d), np.arange(d)] = 1.0
    psi = pair.psi
    B = np.einsum("yi,yj->yij", psi, psi.conj())
    return Observable(A), Observable(B)


def uniform_observable(d: int, m: int) -> Observable:
    if d < 1 or m < 1:
        raise InvalidArgument("uniform observable needs d, m >= 1")
    return Observable(np.broadcast_to(np.eye(d) / m, (m, d, d)))


def noise_interval(m: int) -> tuple[float, float]:
    return (1.0 / (1 - m) if m > 1 else -math.inf, 1.0)


def _check_nu(nu: float, d: int) -> float:
    lo, hi = noise_interval(d)
    nu = float(nu)
    if not (lo - 1e-15 <= nu <= hi + 1e-15):
        raise OutOfRange(f"noise parameter {nu!r} outside [{lo:.6g}, 1] for d = {d}")
    return min(max(nu, lo), hi)


def noisy(X: Observable, nu: float) -> Observable:
    """nu X + (1 - nu) U, with U uniform over the outcomes of X."""
    nu = _check_nu(nu, X.outcomes)
    U = np.eye(X.d) / X.outcomes
    return Observable(nu * X.effects + (1.0 - nu) * U[None, :, :])


@dataclass(frozen=True)
class NoiseParams:
    lam: float
    mu: float
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise InvalidArgument("dimension must be at least 2")
        _check_nu(self.lam, self.d)
        _check_nu(self.mu, self.d)

    @property
    def negative(self) -> bool:
        return self.lam < 0 or self.mu < 0


@dataclass(frozen=True)
class SmearingCoefficients:
    u: float
    v: float
    gamma: float


def _sqrt_clamped(r: float) -> float:
    if r < 0.0:
        if r < -_SQRT_CLAMP:
            raise OutOfRange(f"negative radicand {r!r}")
        return 0.0
    return math.sqrt(r)


def smearing(nu: float, d: int) -> SmearingCoefficients:
    """Coefficients of A_nu(x)^(1/2) = u A(x) + (v/sqrt d) I, and gamma_nu."""
    if d < 2:
        raise InvalidArgument("smearing needs d >= 2")
    nu = _check_nu(nu, d)
    s1 = _sqrt_clamped(1.0 + (d - 1) * nu)
    s2 = _sqrt_clamped(1.0 - nu)
    u = (s1 - s2) / math.sqrt(d)
    v = s2
    gamma = ((d - 2) * (1.0 - nu) + 2.0 * s2 * s1) / d
    return SmearingCoefficients(u, v, gamma)


def gamma_of(nu: float, d: int) -> float:
    return smearing(nu, d).gamma


# -- region predicates used by the constructors --------------------------------


def ellipse_residual(d: int, lam: float, mu: float) -> float:
    """Q(lam, mu) - (4 - d); zero on the elliptic arc."""
    q = d * (lam * lam + mu * mu) + 2 * (d - 2) * lam * mu - 2 * (d - 2) * (lam + mu)
    return q - (4 - d)


def on_gamma(d: int, lam: float, mu: float, residual: float = ON_GAMMA_RESIDUAL) -> bool:
    if d < 3:
        return False
    lo = 1.0 / (1 - d)
    in_box = all(lo - residual <= t <= 1 + residual for t in (lam, mu))
    return (
        in_box
        and abs(ellipse_residual(d, lam, mu)) <= residual
        and (d - 1) * (lam + mu) >= (d - 3) - residual
    )


# -- joint observables -----------------------------------------------------------


def _jordan(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """AB + BA for every (x, y): shape (d, d, dim, dim)."""
    AB = np.einsum("xij,yjk->xyik", A, B)
    return AB + np.conj(np.swapaxes(AB, -1, -2))


def _luders_effects(A, B, uA: float, uB: float, c: float) -> np.ndarray:
    d = A.shape[1]
    return (uA * A[:, None] + uB * B[None, :]) / d + c * _jordan(A, B)


def luders_branch(pair: MubPair, lam: float, mu: float, branch: str) -> np.ndarray:
    """Effects of one Lüders formula, without checking the point."""
    d = pair.d
    A, B = (o.effects for o in sharp_observables(pair))
    if branch == "A":
        s = smearing(lam, d)
        return _luders_effects(A, B, s.u**2, s.v**2, s.u * s.v / math.sqrt(d))
    if branch == "B":
        s = smearing(mu, d)
        return _luders_effects(A, B, s.v**2, s.u**2, s.u * s.v / math.sqrt(d))
    raise InvalidArgument(f"branch must be 'A' or 'B', got {branch!r}")


def luders_joint(pair: MubPair, p: NoiseParams | tuple[float, float], tol: Tolerances = DEFAULT_TOL) -> JointObservable:
    """Lüders joint observable of (A_lam, B_mu) for a point on the elliptic arc.

    The A-branch sqrt(A_lam) B sqrt(A_lam) is used when mu >= 0, otherwise
    the B-branch sqrt(B_mu) A sqrt(B_mu). When both parameters are
    non-negative the two formulas are computed and must agree.
    """
    if not isinstance(p, NoiseParams):
        p = NoiseParams(p[0], p[1], pair.d)
    d = pair.d
    if d < 3:
        raise Unsupported("the Lüders construction on the elliptic arc needs d >= 3; use qubit_joint for d = 2")
    lam, mu = p.lam, p.mu
    if lam < 0 and mu < 0:
        raise Unsupported(f"no arc point has both parameters negative: ({lam}, {mu})")
    if not on_gamma(d, lam, mu):
        raise InvalidArgument(
            f"({lam}, {mu}) is not on the elliptic arc for d = {d}: "
            f"ellipse residual {ellipse_residual(d, lam, mu):.3e}, "
            f"(d-1)(lam+mu) - (d-3) = {(d - 1) * (lam + mu) - (d - 3):.3e}"
        )
    if mu >= 0:
        C = luders_branch(pair, lam, mu, "A")
        if lam >= 0:
            other = luders_branch(pair, lam, mu, "B")
            dev = float(np.abs(C - other).max())
            if dev > tol.match:
                raise InvalidArgument(f"Lüders branches disagree by {dev:.3e} at ({lam}, {mu})")
        branch = "A"
    else:
        C = luders_branch(pair, lam, mu, "B")
        branch = "B"
    return JointObservable(C, "luders-A-branch" if branch == "A" else "luders-B-branch", {"lambda": lam, "mu": mu})


def projection_pi(pair: MubPair) -> np.ndarray:
    """Pi(x, y): orthogonal projection onto span{phi_x, psi_y}, shape (d, d, d, d)."""
    d = pair.d
    A, B = (o.effects for o in sharp_observables(pair))
    return d / (d - 1) * (A[:, None] + B[None, :] - _jordan(A, B))


def vertex_joint(pair: MubPair) -> JointObservable:
    """Joint observable of (A_nu, B_nu) at nu = 1/(1-d): multiples of I - Pi(x, y)."""
    d = pair.d
    if d < 3:
        raise Unsupported("the vertex joint observable needs d >= 3")
    Pi = projection_pi(pair)
    C = (np.eye(d)[None, None] - Pi) / (d * (d - 2))
    nu = 1.0 / (1 - d)
    return JointObservable(C, "vertex", {"lambda": nu, "mu": nu})


def bloch_operator(vec) -> np.ndarray:
    return np.einsum("k,kij->ij", np.asarray(vec, dtype=float), PAULI)


def qubit_effect(vec, sign: int) -> np.ndarray:
    """(1/2)(I + sign * vec . sigma)."""
    return 0.5 * (np.eye(2) + sign * bloch_operator(vec))


QUBIT_SIGNS = (1, -1)  # outcome index 0 <-> '+', 1 <-> '-'
DEFAULT_A_VEC = (0.0, 0.0, 1.0)
DEFAULT_B_VEC = (1.0, 0.0, 0.0)


def _check_qubit_vectors(a_vec, b_vec, tol: Tolerances):
    a = np.asarray(a_vec, dtype=float)
    b = np.asarray(b_vec, dtype=float)
    if a.shape != (3,) or b.shape != (3,):
        raise InvalidArgument("Bloch vectors must be real 3-vectors")
    if abs(np.linalg.norm(a) - 1) > tol.match or abs(np.linalg.norm(b) - 1) > tol.match:
        raise InvalidArgument("Bloch vectors must have unit length")
    if abs(a @ b) > tol.match:
        raise InvalidArgument(f"Bloch vectors are not orthogonal: a.b = {a @ b:.3e}")
    return a, b


def qubit_noisy(vec, nu: float) -> Observable:
    return Observable([qubit_effect(nu * np.asarray(vec, dtype=float), s) for s in QUBIT_SIGNS])


def qubit_joint(a_vec, b_vec, p: NoiseParams | tuple[float, float], tol: Tolerances = DEFAULT_TOL) -> JointObservable:
    """C(x, y) = (1/4)(I + x lam a.sigma + y mu b.sigma)."""
    if not isinstance(p, NoiseParams):
        p = NoiseParams(p[0], p[1], 2)
    if p.d != 2:
        raise Unsupported("qubit_joint is for d = 2")
    a, b = _check_qubit_vectors(a_vec, b_vec, tol)
    r2 = p.lam**2 + p.mu**2
    if r2 > 1 + tol.psd:
        raise IncompatiblePair(
            f"(A_lam, B_mu) are incompatible: lam^2 + mu^2 = {r2:.6g} > 1 (outside the unit disk)"
        )
    C = np.empty((2, 2, 2, 2), dtype=complex)
    for i, x in enumerate(QUBIT_SIGNS):
        for j, y in enumerate(QUBIT_SIGNS):
            C[i, j] = 0.25 * (np.eye(2) + x * p.lam * bloch_operator(a) + y * p.mu * bloch_operator(b))
    return JointObservable(C, "qubit", {"lambda": p.lam, "mu": p.mu})


def margins(C: JointObservable) -> tuple[Observable, Observable]:
    E = C.effects
    return Observable(E.sum(axis=1)), Observable(E.sum(axis=0))


def max_deviation(X: Observable, Y: Observable) -> float:
    if X.effects.shape != Y.effects.shape:
        return math.inf
    return float(np.abs(X.effects - Y.effects).max())


# -- Jordan-product operators and the transition matrix K ----------------------


def e_operators(pair: MubPair) -> list[np.ndarray]:
    """E(z, t) = (A(z)B(t) + B(t)A(z))/2 in (z, t) lexicographic order."""
    A, B = (o.effects for o in sharp_observables(pair))
    d = pair.d
    return list((0.5 * _jordan(A, B)).reshape(d * d, d, d))


@dataclass(frozen=True)
class KMatrixReport:
    K: np.ndarray
    spectral_values: tuple[tuple[float, int], ...]  # (closed-form value, multiplicity)
    numeric_eigenvalues: tuple[float, ...]
    max_mismatch: float
    invertible: bool
    conditions: dict = field(default_factory=dict)


def k_matrix(a: float, b: float, c: float, e: float, d: int, tol: Tolerances = DEFAULT_TOL) -> KMatrixReport:
    """K_{(x,y),(z,t)} = a d_xz + b d_yt + 2c d_xz d_yt + e, with its spectral summary."""
    if d < 2:
        raise InvalidArgument("k_matrix needs d >= 2")
    I = np.eye(d)
    J = np.ones((d, d))
    K = a * np.kron(I, J) + b * np.kron(J, I) + 2 * c * np.eye(d * d) + e * np.kron(J, J)
    conditions = {
        "2c": 2 * c,
        "da+2c": d * a + 2 * c,
        "db+2c": d * b + 2 * c,
        "da+db+2c+d^2e": d * a + d * b + 2 * c + d * d * e,
    }
    mults = {"2c": (d - 1) ** 2, "da+2c": d - 1, "db+2c": d - 1, "da+db+2c+d^2e": 1}
    spectral = tuple((conditions[k], mults[k]) for k in conditions)
    expected = np.sort(np.repeat([v for v, _ in spectral], [m for _, m in spectral]))
    numeric = eig_sym(K, tol)
    mismatch = float(np.abs(np.sort(numeric) - expected).max())
    # zero test relative to the scale of the coefficients
    scale = max(abs(a), abs(b), abs(c), abs(e), 1e-300) * d * d
    invertible = all(abs(v) > 1e-12 * scale for v in conditions.values())
    return KMatrixReport(
        K,
        spectral,
        tuple(float(v) for v in numeric),
        mismatch,
        invertible,
        {k: abs(v) > 1e-12 * scale for k, v in conditions.items()},
    )


def luders_coefficients(lam: float, d: int) -> tuple[float, float, float, float]:
    """(a, b, c, e) writing the A-branch Lüders effects as aA + bB + c{A,B} + eI."""
    s = smearing(lam, d)
    return s.u**2 / d, s.v**2 / d, s.u * s.v / math.sqrt(d), 0.0


def vertex_coefficients(d: int) -> tuple[float, float, float, float]:
    c = 1.0 / ((d - 2) * (d - 1))
    return -c, -c, c, 1.0 / (d * (d - 2))

