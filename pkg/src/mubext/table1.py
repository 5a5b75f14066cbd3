"""Reference spectra of the catalog Hadamard matrices and a comparison routine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .haagerup import spectrum
from .mub_catalog import catalog_mub
from .numerics import DEFAULT_TOL, Tolerances

S2, S3, S7 = math.sqrt(2), math.sqrt(3), math.sqrt(7)

# Roots of this quartic each carry multiplicity 3 in the d7-m1 spectrum.
D7_M1_QUARTIC = (19208.0, 15092.0, -12642.0, -6167.0, 3031.0)
D7_M1_QUARTIC_CLUSTERS = 4
D7_M1_QUARTIC_MULT = 3


def f4_expected(a: float) -> list[tuple[float, int]]:
    s = abs(math.sin(a))
    return [(-1.0, 4), (-s, 2), (s, 2), (1.0, 8)]


D6_M1 = [(-1.0, 5), (-2.0 / 3.0, 6), (0.0, 10), (1.0, 15)]

_r = math.sqrt(7 * (7 - 4 * S3))
D6_M2 = [
    (-1.0, 5),
    (-(S3 - 1), 2),
    (-(_r + 2 * S3 - 3) / 2, 4),
    (-(2 - S3), 4),
    ((_r - 2 * S3 + 3) / 2, 4),
    (3 * S3 - 5, 2),
    (1.0, 15),
]

D6_M3 = [(-1.0, 9), (0.25, 16), (1.0, 11)]

_s22, _s65 = math.sqrt(22), math.sqrt(65)
D7_M1 = [
    (-1.0, 1),
    (-(9 + _s22) / 14, 2),
    (-(3 * _s65 + 1) / 28, 1),
    (-11 / 14, 1),
    (-(5 + 3 * S2) / 14, 5),
    (-0.5, 1),
    # printed with the opposite sign; its place in the ascending list fixes it as negative
    ((_s22 - 9) / 14, 2),
    (-(5 - 3 * S2) / 14, 5),
    ((3 * _s65 - 1) / 28, 1),
    (13 / 14, 2),
    (1.0, 16),
]

D7_M2 = [
    (-math.sqrt(57) / 8, 8),
    (-0.75, 8),
    (-S2 / 4, 6),
    (S2 / 4, 6),
    (math.sqrt(57) / 8, 8),
    (1.0, 13),
]

# a-grids avoid the collision points a = 0 (and pi/2 where |sin a| = 1 merges with +-1)
F4_GRID = tuple((k + 0.5) * math.pi / 8 for k in range(8))
D6_M1_GRID = tuple((k + 0.5) * 2 * math.pi / 8 for k in range(8))


def expected_clusters(id: str, a: float | None = None) -> list[tuple[float, int]]:
    if id == "d4-f4":
        return f4_expected(a)
    return {"d6-m1": D6_M1, "d6-m2": D6_M2, "d6-m3": D6_M3, "d7-m1": D7_M1, "d7-m2": D7_M2}[id]


def quartic(x: float) -> float:
    return float(np.polyval(D7_M1_QUARTIC, x))


@dataclass
class Comparison:
    entry: str
    passed: bool
    max_deviation: float
    messages: list[str] = field(default_factory=list)
    quartic_residuals: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "entry": self.entry,
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "messages": list(self.messages),
            "quartic_residuals": list(self.quartic_residuals),
        }


def compare_clusters(
    entry: str,
    computed: list[tuple[float, int]],
    expected: list[tuple[float, int]],
    value_tol: float = 1e-8,
    quartic_clusters: int = 0,
    quartic_tol: float = 1e-5,
) -> Comparison:
    """Match every expected (value, multiplicity) to a computed cluster.

    Computed clusters left over must be exactly ``quartic_clusters`` clusters
    of multiplicity 3 whose values are roots of the d7-m1 quartic.
    """
    remaining = list(computed)
    worst = 0.0
    msgs = []
    for value, mult in expected:
        best = min(range(len(remaining)), key=lambda i: abs(remaining[i][0] - value), default=None)
        if best is None or abs(remaining[best][0] - value) > value_tol:
            near = remaining[best][0] if best is not None else float("nan")
            msgs.append(f"missing eigenvalue {value:.12g} (nearest computed {near:.12g})")
            continue
        got_v, got_m = remaining.pop(best)
        worst = max(worst, abs(got_v - value))
        if got_m != mult:
            msgs.append(f"eigenvalue {value:.12g}: multiplicity {got_m}, expected {mult}")
    residuals = []
    if quartic_clusters:
        if len(remaining) != quartic_clusters:
            msgs.append(f"{len(remaining)} unmatched clusters, expected {quartic_clusters} quartic roots")
        for v, m in remaining:
            r = quartic(v)
            residuals.append(abs(r))
            if m != D7_M1_QUARTIC_MULT:
                msgs.append(f"quartic root {v:.12g}: multiplicity {m}, expected {D7_M1_QUARTIC_MULT}")
            if abs(r) >= quartic_tol:
                msgs.append(f"quartic residual {r:.3e} at {v:.12g}")
        remaining = []
    for v, m in remaining:
        msgs.append(f"unexpected cluster {v:.12g} (x{m})")
    return Comparison(entry, not msgs, worst, msgs, residuals)


def table1_entries(f4_grid=F4_GRID, d6_grid=D6_M1_GRID):
    """(label, catalog id, params, sign, expected, quartic clusters) for every checked entry."""
    for a in f4_grid:
        yield f"d4-f4(a={a:.6g})", "d4-f4", [a], None, f4_expected(a), 0
    for a in d6_grid:
        yield f"d6-m1(a={a:.6g})", "d6-m1", [a], None, D6_M1, 0
    for s in "+-":
        yield f"d6-m2({s})", "d6-m2", None, s, D6_M2, 0
    yield "d6-m3", "d6-m3", None, None, D6_M3, 0
    yield "d7-m1", "d7-m1", None, None, D7_M1, D7_M1_QUARTIC_CLUSTERS
    for s in "+-":
        yield f"d7-m2({s})", "d7-m2", None, s, D7_M2, 0


def check_entry(label, id, params, sign, expected, nquart, tol: Tolerances = DEFAULT_TOL, value_tol: float = 1e-8) -> Comparison:
    spec = spectrum(catalog_mub(id, params, sign, tol), tol)
    return compare_clusters(label, list(spec.clusters), expected, value_tol, nquart)


def run_table1(tol: Tolerances = DEFAULT_TOL, value_tol: float = 1e-8, **grids) -> list[Comparison]:
    return [check_entry(*e, tol=tol, value_tol=value_tol) for e in table1_entries(**grids)]
