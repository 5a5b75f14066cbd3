"""Finite abelian groups Z_{n_1} x ... x Z_{n_k} and their canonical bicharacter."""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Sequence

from .errors import InvalidArgument

Element = tuple[int, ...]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of an exhaustive check. ``checks`` maps check names to pass/fail."""

    passed: bool
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": dict(self.checks), "details": dict(self.details)}


@dataclass(frozen=True)
class AbelianGroup:
    factors: tuple[int, ...]

    @property
    def order(self) -> int:
        return math.prod(self.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    @cached_property
    def elements(self) -> tuple[Element, ...]:
        """All elements, lexicographic in the coordinate tuples."""
        return tuple(itertools.product(*(range(n) for n in self.factors)))

    @cached_property
    def _index(self) -> dict[Element, int]:
        return {x: i for i, x in enumerate(self.elements)}

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elements)

    def __len__(self) -> int:
        return self.order

    def element(self, coords: int | Sequence[int]) -> Element:
        if isinstance(coords, int):
            coords = (coords,)
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.rank:
            raise InvalidArgument(
                f"element has {len(coords)} coordinates, group has {self.rank} factors"
            )
        return tuple(c % n for c, n in zip(coords, self.factors))

    def index(self, x: int | Sequence[int]) -> int:
        return self._index[self.element(x)]

    @property
    def zero(self) -> Element:
        return (0,) * self.rank

    def label(self) -> str:
        return "x".join(f"Z{n}" for n in self.factors)

    def __str__(self) -> str:
        return self.label()


def make_group(factors: Sequence[int]) -> AbelianGroup:
    factors = list(factors)
    if not factors:
        raise InvalidArgument("a group needs at least one cyclic factor")
    for n in factors:
        if int(n) != n or n < 1:
            raise InvalidArgument(f"cyclic factor orders must be positive integers, got {n!r}")
    return AbelianGroup(tuple(int(n) for n in factors))


def parse_group(spec: str) -> AbelianGroup:
    """Parse a CLI group spec such as ``"2,4"``."""
    try:
        factors = [int(tok) for tok in spec.replace(" ", "").split(",") if tok]
    except ValueError as exc:
        raise InvalidArgument(f"bad group spec {spec!r}: {exc}") from None
    return make_group(factors)


def add(G: AbelianGroup, x, y) -> Element:
    x, y = G.element(x), G.element(y)
    return tuple((a + b) % n for a, b, n in zip(x, y, G.factors))


def neg(G: AbelianGroup, x) -> Element:
    return tuple((-a) % n for a, n in zip(G.element(x), G.factors))


def sub(G: AbelianGroup, x, y) -> Element:
    return add(G, x, neg(G, y))


def pairing_turns(G: AbelianGroup, x, y) -> tuple[int, int]:
    """Return (k, L) with <x,y> = exp(2 pi i k / L), 0 <= k < L, exactly."""
    x, y = G.element(x), G.element(y)
    L = math.lcm(*G.factors)
    k = sum(a * b * (L // n) for a, b, n in zip(x, y, G.factors)) % L
    return k, L


def unit_root(k: int, L: int) -> complex:
    """exp(2 pi i k/L), exact at multiples of a quarter turn."""
    k %= L
    if (4 * k) % L == 0:
        return (1.0, 1j, -1.0, -1j)[4 * k // L] + 0j
    return cmath.exp(2j * math.pi * k / L)


def pairing(G: AbelianGroup, x, y) -> complex:
    return unit_root(*pairing_turns(G, x, y))


def pairing_table(G: AbelianGroup) -> list[list[complex]]:
    els = G.elements
    return [[pairing(G, x, y) for y in els] for x in els]


def verify_bicharacter(
    G: AbelianGroup,
    tol: float = 1e-12,
    pairing_fn: Callable[[AbelianGroup, Element, Element], complex] | None = None,
) -> ValidationReport:
    """Exhaustively check symmetry, biadditivity and non-degeneracy.

    ``pairing_fn`` defaults to the canonical pairing; any other callable
    with the same signature can be audited.
    """
    pf = pairing_fn or pairing
    els = G.elements
    table = {(x, y): pf(G, x, y) for x in els for y in els}

    unimodular = max(abs(abs(v) - 1.0) for v in table.values())
    sym = max(abs(table[x, y] - table[y, x]) for x in els for y in els)
    biadd = 0.0
    for x1 in els:
        for x2 in els:
            s = add(G, x1, x2)
            for y in els:
                biadd = max(biadd, abs(table[s, y] - table[x1, y] * table[x2, y]))
    # x -> <x, .> injective: distinct x give distinct rows
    rows = [tuple(table[x, y] for y in els) for x in els]
    min_sep = math.inf
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            sep = max(abs(a - b) for a, b in zip(rows[i], rows[j]))
            min_sep = min(min_sep, sep)
    checks = {
        "unimodular": unimodular <= tol,
        "symmetric": sym <= tol,
        "biadditive": biadd <= tol,
        "nondegenerate": min_sep > tol,
    }
    return ValidationReport(
        all(checks.values()),
        checks,
        {
            "max_modulus_deviation": unimodular,
            "max_asymmetry": sym,
            "max_biadditivity_residual": biadd,
            "min_character_separation": min_sep if len(rows) > 1 else None,
        },
    )


def orthogonality_check(G: AbelianGroup, tol: float = 1e-12) -> ValidationReport:
    """Check sum_z <x - y, z> = d * delta_{x,y} for all x, y."""
    d = G.order
    els = G.elements
    worst = 0.0
    for x in els:
        for y in els:
            w = sub(G, x, y)
            total = sum(pairing(G, w, z) for z in els)
            target = d if x == y else 0
            worst = max(worst, abs(total - target))
    return ValidationReport(worst <= tol, {"orthogonality": worst <= tol}, {"max_residual": worst})
