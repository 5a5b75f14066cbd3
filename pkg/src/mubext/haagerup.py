"""The Haagerup matrix of a MUB pair and its spectrum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .finite_group import AbelianGroup, pairing
from .mub_catalog import MubPair
from .numerics import DEFAULT_TOL, Tolerances, cluster_values, eig_sym, symmetrize


@dataclass(frozen=True)
class HaagerupSpectrum:
    eigenvalues: tuple[float, ...]
    clusters: tuple[tuple[float, int], ...]
    label: str = ""
    d: int = 0

    @property
    def nearest_to_minus_one(self) -> float:
        return float(min(abs(v + 1.0) for v in self.eigenvalues))

    def multiplicity(self, value: float, width: float) -> int:
        return sum(m for v, m in self.clusters if abs(v - value) <= width)

    def to_dict(self, tol: Tolerances = DEFAULT_TOL) -> dict:
        flag, dist = has_minus_one(self, tol)
        return {
            "label": self.label,
            "d": self.d,
            "eigenvalues": list(self.eigenvalues),
            "clusters": [{"value": v, "multiplicity": m} for v, m in self.clusters],
            "has_minus_one": flag,
            "distance_to_minus_one": dist,
        }


def haagerup_matrix(pair: MubPair) -> np.ndarray:
    """d^2 x d^2 matrix with rows (x, y) -> x*d + y.

    entry d * Re(conj(H[z,y]) H[z,t] conj(H[x,t]) H[x,y]).
    """
    H = pair.H
    d = pair.d
    T = np.einsum("zy,zt,xt,xy->xyzt", H.conj(), H, H.conj(), H)
    L = d * T.real.reshape(d * d, d * d)
    return symmetrize(L)


def _make_spectrum(values, tol: Tolerances, label: str, d: int) -> HaagerupSpectrum:
    vals = np.sort(np.asarray(values, dtype=float))
    return HaagerupSpectrum(
        tuple(float(v) for v in vals),
        tuple(cluster_values(vals, tol.cluster)),
        label,
        d,
    )


def spectrum(pair: MubPair, tol: Tolerances = DEFAULT_TOL) -> HaagerupSpectrum:
    return _make_spectrum(eig_sym(haagerup_matrix(pair), tol), tol, pair.label, pair.d)


def has_minus_one(spec: HaagerupSpectrum, tol: Tolerances = DEFAULT_TOL) -> tuple[bool, float]:
    dist = spec.nearest_to_minus_one
    return dist <= tol.cluster, dist


def minus_one_multiplicity(spec: HaagerupSpectrum, tol: Tolerances = DEFAULT_TOL) -> int:
    return sum(1 for v in spec.eigenvalues if abs(v + 1.0) <= tol.cluster)


def fourier_spectrum_closed_form(G: AbelianGroup, tol: Tolerances = DEFAULT_TOL) -> HaagerupSpectrum:
    """Multiset {Re <r, s>} over all pairs of group elements; no matrix is built."""
    els = G.elements
    vals = [pairing(G, r, s).real for r in els for s in els]
    return _make_spectrum(vals, tol, f"fourier-{G.label()}", G.order)
