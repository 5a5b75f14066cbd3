"""Compatibility-region geometry and extremality certificates for noisy MUB pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, OutOfRange, Unsupported
from .finite_group import AbelianGroup
from .haagerup import HaagerupSpectrum, fourier_spectrum_closed_form, has_minus_one, minus_one_multiplicity, spectrum
from .mub_catalog import MubPair, fourier_mub
from .numerics import DEFAULT_TOL, Tolerances, gram_rank, intersection_dims_batch, range_bases_batch, range_projector
from .povm import (
    ON_GAMMA_RESIDUAL,
    JointObservable,
    NoiseParams,
    Observable,
    ellipse_residual,
    k_matrix,
    luders_coefficients,
    luders_joint,
    on_gamma,
    qubit_noisy,
    smearing,
    vertex_coefficients,
    vertex_joint,
    _check_qubit_vectors,
)

ZERO_PARAM = 1e-12
REGION_TOL = 1e-9

INTERIOR = "interior"
ON_GAMMA_ARC = "on_gamma_arc"
VERTEX = "vertex"
BOUNDARY_SEGMENT = "boundary_segment"
OUTSIDE_REGION = "outside_region"
OUTSIDE_BOX = "outside_box"

EXTREMAL = "extremal"
NOT_EXTREMAL = "not_extremal"
NOT_COMPATIBLE = "not_compatible"
NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class RegionPoint:
    d: int
    lam: float
    mu: float
    classification: str
    ellipse_residual: float | None = None

    @property
    def inside(self) -> bool:
        return self.classification not in (OUTSIDE_REGION, OUTSIDE_BOX)

    @property
    def extreme(self) -> bool:
        """True for the extreme points of the region (arc, circle or vertex)."""
        return self.classification in (ON_GAMMA_ARC, VERTEX)


@dataclass
class Certificate:
    verdict: str
    d: int
    lam: float | None = None
    mu: float | None = None
    pair_label: str = ""
    reasons: list[dict] = field(default_factory=list)
    minus_one_distance: float | None = None
    gram_rank: int | None = None
    oracle_agreement: bool | None = None

    def add(self, kind: str, **evidence) -> None:
        self.reasons.append({"kind": kind, **evidence})

    def reason(self, kind: str) -> dict | None:
        return next((r for r in self.reasons if r["kind"] == kind), None)

    def to_dict(self) -> dict:
        return {
            "pair_label": self.pair_label,
            "d": self.d,
            "lambda": self.lam,
            "mu": self.mu,
            "verdict": self.verdict,
            "reasons": [_jsonable(r) for r in self.reasons],
            "minus_one_distance": self.minus_one_distance,
            "gram_rank": self.gram_rank,
            "oracle_agreement": self.oracle_agreement,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# -- region geometry -------------------------------------------------------------


def ellipse_gradient(d: int, lam: float, mu: float) -> np.ndarray:
    return np.array(
        [
            2 * d * lam + 2 * (d - 2) * mu - 2 * (d - 2),
            2 * d * mu + 2 * (d - 2) * lam - 2 * (d - 2),
        ]
    )


def region_contains(d: int, lam: float, mu: float, tol: float = REGION_TOL) -> RegionPoint:
    """Locate (lam, mu) relative to the compatibility region of the noisy pair.

    For d >= 3 the region is the box [1/(1-d), 1]^2 intersected with the
    union of the ellipse interior and the half-plane below the chord
    (d-1)(lam+mu) = d-3. For d = 2 it is the unit disk, whose boundary
    circle is reported as ``on_gamma_arc``.
    """
    if d < 2:
        raise Unsupported("the compatibility region needs d >= 2")
    lam, mu = float(lam), float(mu)
    if d == 2:
        if abs(lam) > 1 + tol or abs(mu) > 1 + tol:
            return RegionPoint(d, lam, mu, OUTSIDE_BOX)
        r = lam * lam + mu * mu - 1.0
        if abs(r) <= tol:
            cls = ON_GAMMA_ARC
        elif r < 0:
            cls = INTERIOR
        else:
            cls = OUTSIDE_REGION
        return RegionPoint(d, lam, mu, cls, r)

    lo = 1.0 / (1 - d)
    res = ellipse_residual(d, lam, mu)
    if not all(lo - tol <= t <= 1 + tol for t in (lam, mu)):
        return RegionPoint(d, lam, mu, OUTSIDE_BOX, res)
    chord = (d - 1) * (lam + mu) - (d - 3)
    if abs(lam - lo) <= tol and abs(mu - lo) <= tol:
        return RegionPoint(d, lam, mu, VERTEX, res)
    if abs(res) <= tol and chord >= -tol:
        return RegionPoint(d, lam, mu, ON_GAMMA_ARC, res)
    inside = res <= tol or chord <= tol
    if not inside:
        return RegionPoint(d, lam, mu, OUTSIDE_REGION, res)
    if abs(lam - lo) <= tol or abs(mu - lo) <= tol:
        return RegionPoint(d, lam, mu, BOUNDARY_SEGMENT, res)
    return RegionPoint(d, lam, mu, INTERIOR, res)


def gamma_parametrize(d: int, nu: float, branch: str = "A") -> tuple[float, float]:
    """Branch A gives (nu, gamma_nu); branch B gives (gamma_nu, nu)."""
    if d < 3:
        raise Unsupported("the elliptic arc exists for d >= 3")
    lo = 1.0 / (1 - d)
    if not lo - 1e-15 <= nu <= 1 + 1e-15:
        raise OutOfRange(f"arc parameter {nu!r} outside [{lo:.6g}, 1]")
    g = smearing(nu, d).gamma
    if branch == "A":
        return float(nu), g
    if branch == "B":
        return g, float(nu)
    raise InvalidArgument(f"branch must be 'A' or 'B', got {branch!r}")


def symmetric_arc_point(d: int) -> float:
    """The parameter nu with gamma_nu = nu; equals 1/sqrt(2) at d = 2."""
    return (d - 2 + math.sqrt(d)) / (2 * (d - 1))


def arc_endpoints(d: int) -> tuple[tuple[float, float], tuple[float, float]]:
    lo, hi = 1.0 / (1 - d), (d - 2) / (d - 1)
    return (hi, lo), (lo, hi)


def arc_polyline(d: int, n: int = 21) -> list[tuple[float, float]]:
    """Ordered points along the arc (or the circle for d = 2)."""
    if d == 2:
        return [(math.cos(t), math.sin(t)) for t in np.linspace(0.0, 2 * math.pi, n)]
    lo = 1.0 / (1 - d)
    # branch B runs (hi, lo) -> (1, 0) -> (0, 1); branch A continues to (lo, hi)
    pts = [gamma_parametrize(d, nu, "B") for nu in np.linspace(lo, 1.0, n)]
    pts += [gamma_parametrize(d, nu, "A") for nu in np.linspace(0.0, lo, n)[1:]]
    return pts


def vertex_point(d: int) -> tuple[float, float]:
    v = 1.0 / (1 - d)
    return v, v


# -- oracles ----------------------------------------------------------------------


@dataclass(frozen=True)
class IndependenceReport:
    rank: int
    independent: bool
    max_effect_rank: int
    n_effects: int


def independence_oracle(C: JointObservable, tol: Tolerances = DEFAULT_TOL) -> IndependenceReport:
    effects = C.flat_effects()
    r = gram_rank(effects, tol)
    max_rank = int(C.effect_ranks(tol).max())
    return IndependenceReport(r, r == len(effects), max_rank, len(effects))


def range_intersection_witness(C: JointObservable, tol: Tolerances = DEFAULT_TOL, exhaustive: bool = False):
    """Search (x, y1, y2) and (x1, x2, y) pairs whose effect ranges meet.

    Returns a list of witness dicts in search order: only the first hit
    unless ``exhaustive`` is set.
    """
    m1, m2 = C.effects.shape[:2]
    d = C.d
    keys = [(x, y) for x in range(m1) for y in range(m2)]
    bases = range_bases_batch(C.effects.reshape(m1 * m2, d, d), tol)
    proj = {k: range_projector(b, d) for k, b in zip(keys, bases)}
    candidates = [((x, y1), (x, y2)) for x in range(m1) for y1 in range(m2) for y2 in range(y1 + 1, m2)]
    candidates += [((x1, y), (x2, y)) for y in range(m2) for x1 in range(m1) for x2 in range(x1 + 1, m1)]
    if not candidates:
        return []
    dims = intersection_dims_batch(
        np.stack([proj[a] for a, _ in candidates]), np.stack([proj[b] for _, b in candidates]), tol
    )
    found = []
    for (a, b), dim in zip(candidates, dims):
        if dim > 0:
            found.append({"first": list(a), "second": list(b), "dim": int(dim)})
            if not exhaustive:
                break
    return found


# -- certification ------------------------------------------------------------------


def _new_certificate(pair: MubPair, lam, mu, verdict=NOT_APPLICABLE) -> Certificate:
    return Certificate(verdict, pair.d, lam, mu, pair.label)


def _geometry_reason(cert: Certificate, d: int, lam: float, mu: float) -> RegionPoint:
    pt = region_contains(d, lam, mu)
    cert.add(
        "geometry",
        classification=pt.classification,
        ellipse_residual=pt.ellipse_residual,
        chord_margin=(d - 1) * (lam + mu) - (d - 3) if d >= 3 else None,
        # negative noise weights are admitted but read differently physically
        negative_parameter=lam < 0 or mu < 0,
    )
    return pt


def certify_gamma_point(
    pair: MubPair,
    lam: float,
    mu: float,
    oracle: bool = False,
    tol: Tolerances = DEFAULT_TOL,
    spec: HaagerupSpectrum | None = None,
) -> Certificate:
    """Decide extremality of (A_lam, B_mu) for a point of the elliptic arc.

    Extremal iff both parameters are nonzero and -1 is not an eigenvalue
    of the Haagerup matrix. With ``oracle`` the Lüders joint observable is
    built and its effects' linear independence is checked by brute force.
    A spectrum already computed for ``pair`` can be passed as ``spec`` when
    certifying many points of the same arc.
    """
    d = pair.d
    lam, mu = float(lam), float(mu)
    cert = _new_certificate(pair, lam, mu)
    if d < 3:
        cert.add("dimension", message="the elliptic arc exists only for d >= 3")
        return cert
    pt = _geometry_reason(cert, d, lam, mu)
    if not on_gamma(d, lam, mu, ON_GAMMA_RESIDUAL):
        cert.verdict = NOT_COMPATIBLE if not pt.inside else NOT_APPLICABLE
        return cert

    nonzero = abs(lam) > ZERO_PARAM and abs(mu) > ZERO_PARAM
    cert.add("theorem-1-condition-i", satisfied=nonzero, lam=lam, mu=mu, threshold=ZERO_PARAM)

    if spec is None:
        spec = spectrum(pair, tol)
    elif spec.d != d:
        raise InvalidArgument(f"spectrum is for d = {spec.d}, pair has d = {d}")
    flag, dist = has_minus_one(spec, tol)
    mult = minus_one_multiplicity(spec, tol)
    cert.minus_one_distance = dist
    cert.add("minus-one-distance", distance=dist, has_minus_one=flag, multiplicity=mult, cluster_tol=tol.cluster)

    cert.verdict = EXTREMAL if (nonzero and not flag) else NOT_EXTREMAL

    if oracle:
        C = luders_joint(pair, NoiseParams(lam, mu, d), tol)
        rep = independence_oracle(C, tol)
        cert.gram_rank = rep.rank
        if rep.rank < d * d:
            cert.add("rank-deficit", gram_rank=rep.rank, expected=d * d, deficit=d * d - rep.rank)
        cert.add("effect-rank", max_effect_rank=rep.max_effect_rank)
        oracle_extremal = rep.independent and rep.max_effect_rank == 1
        cert.oracle_agreement = oracle_extremal == (cert.verdict == EXTREMAL)
        # K-matrix factorization of the same Lüders effects
        if C.kind == "luders-A-branch":
            a, b, c, e = luders_coefficients(lam, d)
        else:
            a_, b_, c, e = luders_coefficients(mu, d)
            a, b = b_, a_
        km = k_matrix(a, b, c, e, d, tol)
        cert.add(
            "k-matrix",
            invertible=km.invertible,
            spectral_values=[[v, m] for v, m in km.spectral_values],
            closed_form_mismatch=km.max_mismatch,
        )
    return cert


def certify_vertex(pair: MubPair, tol: Tolerances = DEFAULT_TOL) -> Certificate:
    """Extremality of (A_nu, B_nu) at the vertex nu = 1/(1-d)."""
    d = pair.d
    nu = 1.0 / (1 - d) if d > 1 else None
    cert = _new_certificate(pair, nu, nu)
    if d < 3:
        cert.add("dimension", message="the vertex point exists only for d >= 3")
        return cert
    cert.add("geometry", classification=VERTEX, negative_parameter=True)
    C = vertex_joint(pair)
    witnesses = range_intersection_witness(C, tol)
    if witnesses:
        w = witnesses[0]
        cert.add("range-intersection", x=w["first"][0], y1=w["first"][1], y2=w["second"][1], first=w["first"], second=w["second"], dim=w["dim"])
        cert.verdict = NOT_EXTREMAL
        cert.oracle_agreement = True
        return cert

    rep = independence_oracle(C, tol)
    cert.gram_rank = rep.rank
    cert.add("effect-rank", max_effect_rank=rep.max_effect_rank)
    spec = spectrum(pair, tol)
    flag, dist = has_minus_one(spec, tol)
    cert.minus_one_distance = dist
    cert.add("minus-one-distance", distance=dist, has_minus_one=flag, cluster_tol=tol.cluster)
    km = k_matrix(*vertex_coefficients(d), d, tol)
    cert.add("k-matrix", invertible=km.invertible, spectral_values=[[v, m] for v, m in km.spectral_values])
    factor_route = km.invertible and not flag
    if rep.max_effect_rank == 1:
        cert.verdict = EXTREMAL if rep.independent else NOT_EXTREMAL
        if not rep.independent:
            cert.add("rank-deficit", gram_rank=rep.rank, expected=d * d, deficit=d * d - rep.rank)
        cert.oracle_agreement = factor_route == rep.independent
    else:
        # no witness found and effects are not rank one: undecided
        cert.add("undecided", message="effects are not rank one and no range intersection was found")
        cert.verdict = NOT_APPLICABLE
    return cert


def certify_fourier(G: AbelianGroup, lam: float, mu: float, tol: Tolerances = DEFAULT_TOL, oracle: bool = False) -> Certificate:
    """Parity verdict for Fourier-conjugate pairs, cross-checked numerically."""
    pair = fourier_mub(G)
    d = G.order
    lam, mu = float(lam), float(mu)
    if d < 3 or not on_gamma(d, lam, mu) or abs(lam) <= ZERO_PARAM or abs(mu) <= ZERO_PARAM:
        return certify_gamma_point(pair, lam, mu, oracle=oracle, tol=tol)
    cert = _new_certificate(pair, lam, mu)
    _geometry_reason(cert, d, lam, mu)
    cert.add("theorem-1-condition-i", satisfied=True, lam=lam, mu=mu, threshold=ZERO_PARAM)
    parity_extremal = d % 2 == 1
    cert.add("parity", order=d, odd=parity_extremal)
    closed = fourier_spectrum_closed_form(G, tol)
    flag, dist = has_minus_one(closed, tol)
    cert.minus_one_distance = dist
    cert.add("minus-one-distance", distance=dist, has_minus_one=flag, source="closed-form")
    numeric_extremal = not flag
    cert.oracle_agreement = numeric_extremal == parity_extremal
    cert.verdict = EXTREMAL if numeric_extremal else NOT_EXTREMAL
    if oracle:
        C = luders_joint(pair, NoiseParams(lam, mu, d), tol)
        rep = independence_oracle(C, tol)
        cert.gram_rank = rep.rank
        ok = (rep.independent and rep.max_effect_rank == 1) == (cert.verdict == EXTREMAL)
        cert.oracle_agreement = cert.oracle_agreement and ok
    return cert


# -- the qubit case ---------------------------------------------------------------------


@dataclass(frozen=True)
class QubitWitness:
    plus: tuple[Observable, Observable]
    minus: tuple[Observable, Observable]
    norm_sums: tuple[float, float]
    bloch: dict


def busch_norm_sum(alpha, beta) -> float:
    """(1/2)|alpha + beta| + (1/2)|alpha - beta|; <= 1 iff the two unbiased qubit observables are compatible."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    return 0.5 * float(np.linalg.norm(alpha + beta)) + 0.5 * float(np.linalg.norm(alpha - beta))


def qubit_nonextremal_witness(a_vec, b_vec, lam: float, mu: float, tol: Tolerances = DEFAULT_TOL) -> QubitWitness:
    """Two distinct compatible pairs averaging to (A_lam, B_mu)."""
    a, b = _check_qubit_vectors(a_vec, b_vec, tol)
    if lam * lam + mu * mu > 1 + tol.psd:
        raise InvalidArgument(f"(lam, mu) = ({lam}, {mu}) is outside the unit disk")
    if abs(lam) <= ZERO_PARAM and abs(mu) <= ZERO_PARAM:
        raise InvalidArgument("degenerate point (0, 0): both halves coincide, no witness exists")
    vecs = {
        "A+": lam * a + mu * b,
        "B+": mu * b + lam * a,
        "A-": lam * a - mu * b,
        "B-": mu * b - lam * a,
    }
    plus = (qubit_noisy(vecs["A+"], 1.0), qubit_noisy(vecs["B+"], 1.0))
    minus = (qubit_noisy(vecs["A-"], 1.0), qubit_noisy(vecs["B-"], 1.0))
    sums = (busch_norm_sum(vecs["A+"], vecs["B+"]), busch_norm_sum(vecs["A-"], vecs["B-"]))
    return QubitWitness(plus, minus, sums, {k: v.tolist() for k, v in vecs.items()})


def certify_qubit(lam: float, mu: float, a_vec=(0.0, 0.0, 1.0), b_vec=(1.0, 0.0, 0.0), label: str = "", tol: Tolerances = DEFAULT_TOL) -> Certificate:
    cert = Certificate(NOT_APPLICABLE, 2, float(lam), float(mu), label)
    pt = region_contains(2, lam, mu)
    cert.add(
        "geometry",
        classification=pt.classification,
        circle_residual=pt.ellipse_residual,
        negative_parameter=lam < 0 or mu < 0,
    )
    if not pt.inside:
        cert.verdict = NOT_COMPATIBLE
        return cert
    if abs(lam) <= ZERO_PARAM and abs(mu) <= ZERO_PARAM:
        cert.add("degenerate", message="(0, 0) admits no two-sided decomposition of this form")
        return cert
    w = qubit_nonextremal_witness(a_vec, b_vec, lam, mu, tol)
    cert.add("explicit-decomposition", bloch=w.bloch, norm_sums=list(w.norm_sums))
    cert.verdict = NOT_EXTREMAL
    cert.oracle_agreement = all(s <= 1 + 1e-12 for s in w.norm_sums)
    return cert
