"""MUB pairs stored through their Hadamard transition matrix H[x, y] = <phi_x|psi_y>.

The first basis is always the standard basis; the second basis is read off
the columns of H.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, InvalidMatrix, NotFound, ParseError
from .finite_group import AbelianGroup, ValidationReport, make_group, pairing
from .numerics import DEFAULT_TOL, Tolerances


@dataclass(frozen=True, eq=False)
class MubPair:
    H: np.ndarray
    label: str = ""

    def __post_init__(self):
        H = np.array(self.H, dtype=complex)
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    @property
    def d(self) -> int:
        return self.H.shape[0]

    @property
    def phi(self) -> np.ndarray:
        """Rows are the first-basis vectors (the standard basis)."""
        return np.eye(self.d, dtype=complex)

    @property
    def psi(self) -> np.ndarray:
        """Rows are the second-basis vectors, psi[y] = H[:, y]."""
        return self.H.T.copy()


def validate_mub(pair: MubPair | np.ndarray, tol: Tolerances = DEFAULT_TOL) -> ValidationReport:
    H = pair.H if isinstance(pair, MubPair) else np.asarray(pair, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
        return ValidationReport(False, {"square": False}, {"shape": tuple(H.shape)})
    d = H.shape[0]
    mod_dev = np.abs(np.abs(H) - 1.0 / math.sqrt(d))
    unit_dev = np.abs(H.conj().T @ H - np.eye(d))
    worst = np.unravel_index(int(np.argmax(mod_dev)), mod_dev.shape)
    checks = {
        "square": True,
        "unimodular_scaled": float(mod_dev.max()) <= tol.match,
        "unitary": float(unit_dev.max()) <= tol.match,
    }
    details = {
        "d": d,
        "max_modulus_deviation": float(mod_dev.max()),
        "max_unitarity_deviation": float(unit_dev.max()),
        "worst_entry": (int(worst[0]), int(worst[1])),
        "worst_entry_modulus": float(abs(H[worst])),
    }
    return ValidationReport(all(checks.values()), checks, details)


def hadamard_to_mub(H, label: str = "", tol: Tolerances = DEFAULT_TOL) -> MubPair:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidMatrix(f"Hadamard matrix must be square, got shape {H.shape}")
    report = validate_mub(H, tol)
    if not report.passed:
        i, j = report.details["worst_entry"]
        raise InvalidMatrix(
            f"not a scaled complex Hadamard matrix: |H[{i}][{j}]| = "
            f"{report.details['worst_entry_modulus']:.6g} vs 1/sqrt(d) = {1 / math.sqrt(H.shape[0]):.6g}, "
            f"max |H^H H - I| = {report.details['max_unitarity_deviation']:.3e}",
            report.details,
        )
    return MubPair(H, label)


def fourier_mub(G: AbelianGroup) -> MubPair:
    """H[x][y] = <x, y>/sqrt(d) with the canonical bicharacter of G."""
    els = G.elements
    d = G.order
    H = np.array([[pairing(G, x, y) for y in els] for x in els]) / math.sqrt(d)
    return MubPair(H, f"fourier-{G.label()}")


def fourier_matrix(d: int) -> np.ndarray:
    return fourier_mub(make_group([d])).H.copy()


# -- parametric and sporadic families ---------------------------------------


def family_f4(a: float) -> np.ndarray:
    """The one-parameter d=4 family; a is reduced into [0, pi)."""
    a = math.fmod(float(a), math.pi)
    if a < 0:
        a += math.pi
    p = 1j * np.exp(1j * a)
    H = np.array(
        [
            [1, 1, 1, 1],
            [1, p, -1, -p],
            [1, -1, 1, -1],
            [1, -p, -1, p],
        ],
        dtype=complex,
    )
    return H / 2.0


def _d6_m1(a: float) -> np.ndarray:
    a = math.fmod(float(a), 2 * math.pi)
    if a < 0:
        a += 2 * math.pi
    i = 1j
    e, f = np.exp(1j * a), np.exp(-1j * a)
    H = np.array(
        [
            [1, 1, 1, 1, 1, 1],
            [1, -1, i, -i, -i, i],
            [1, i, -1, i * e, -i * e, -i],
            [1, -i, i * f, -1, i, -i * f],
            [1, -i, -i * f, i, -1, i * f],
            [1, i, -i, -i * e, i * e, -1],
        ],
        dtype=complex,
    )
    return H / math.sqrt(6)


def _d6_m2(sign: int) -> np.ndarray:
    w = (1 - math.sqrt(3) + sign * 1j * 12**0.25) / 2
    c = w.conjugate()
    H = np.array(
        [
            [1, 1, 1, 1, 1, 1],
            [1, -1, -w, -(w**2), w**2, w],
            [1, -c, 1, w**2, -(w**3), w**2],
            [1, -(c**2), c**2, -1, w**2, -(w**2)],
            [1, c**2, -(c**3), c**2, 1, -w],
            [1, c, c**2, -(c**2), -c, -1],
        ],
        dtype=complex,
    )
    return H / math.sqrt(6)


def _d6_m3() -> np.ndarray:
    w = np.exp(2j * math.pi / 3)
    w2 = w * w
    H = np.array(
        [
            [1, 1, 1, 1, 1, 1],
            [1, 1, w, w, w2, w2],
            [1, w, 1, w2, w2, w],
            [1, w, w2, 1, w, w2],
            [1, w2, w2, w, 1, w],
            [1, w2, w, w2, w, 1],
        ],
        dtype=complex,
    )
    return H / math.sqrt(6)


# exponents of omega = exp(i pi / 3)
_D7_M1_POWERS = [
    [0, 0, 0, 0, 0, 0, 0],
    [0, 1, 4, 5, 3, 3, 1],
    [0, 4, 1, 3, 5, 3, 1],
    [0, 5, 3, 1, 4, 1, 3],
    [0, 3, 5, 4, 1, 1, 3],
    [0, 3, 3, 1, 1, 4, 5],
    [0, 1, 1, 3, 3, 5, 4],
]


def _d7_m1() -> np.ndarray:
    w = np.exp(1j * math.pi / 3)
    return w ** np.array(_D7_M1_POWERS) / math.sqrt(7)


def _d7_m2(sign: int) -> np.ndarray:
    w = (-3 + sign * 1j * math.sqrt(7)) / 4
    c = w.conjugate()
    H = np.array(
        [
            [1, 1, 1, 1, 1, 1, 1],
            [1, w, 1, c, w, c, 1],
            [1, w, w, c, 1, 1, c],
            [1, w**2, w**2, w, w, 1, w],
            [1, 1, w, 1, w, c, c],
            [1, w**2, w, w, w**2, w, 1],
            [1, w, w**2, 1, w**2, w, w],
        ],
        dtype=complex,
    )
    return H / math.sqrt(7)


TABLE1_IDS = ("d4-f4", "d6-m1", "d6-m2", "d6-m3", "d7-m1", "d7-m2")
_PARAMETRIC = {"d4-f4", "d6-m1"}
_SIGNED = {"d6-m2", "d7-m2"}


def _parse_sign(sign) -> int:
    if sign in (None, "+", 1, "plus"):
        return 1
    if sign in ("-", "−", -1, "minus"):
        return -1
    raise InvalidArgument(f"sign must be '+' or '-', got {sign!r}")


def table1_matrix(id: str, params: Sequence | None = None, sign=None) -> np.ndarray:
    """Catalog Hadamard matrix by identifier.

    ``params`` holds the real parameter ``a`` for ``d4-f4`` and ``d6-m1``;
    for ``d6-m2`` and ``d7-m2`` the branch is chosen by ``sign`` (default
    '+') or by a '+'/'-' entry in ``params``.
    """
    params = list(params or [])
    if id not in TABLE1_IDS:
        raise NotFound(f"unknown catalog id {id!r}; known: {', '.join(TABLE1_IDS)}")
    if id in _PARAMETRIC:
        if not params:
            raise InvalidArgument(f"catalog entry {id!r} needs the parameter a")
        a = params[0]
        return family_f4(a) if id == "d4-f4" else _d6_m1(a)
    if id in _SIGNED:
        if sign is None and params:
            sign = params[0]
        s = _parse_sign(sign)
        return _d6_m2(s) if id == "d6-m2" else _d7_m2(s)
    return _d6_m3() if id == "d6-m3" else _d7_m1()


def catalog_label(id: str, params: Sequence | None = None, sign=None) -> str:
    params = list(params or [])
    if id in _PARAMETRIC and params:
        return f"{id}(a={float(params[0]):.17g})"
    if id in _SIGNED:
        s = sign if sign is not None else (params[0] if params else "+")
        return f"{id}({'+' if _parse_sign(s) > 0 else '-'})"
    return id


def catalog_mub(id: str, params: Sequence | None = None, sign=None, tol: Tolerances = DEFAULT_TOL) -> MubPair:
    return hadamard_to_mub(table1_matrix(id, params, sign), catalog_label(id, params, sign), tol)


# -- JSON file format ---------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_hadamard(M, label: str = "") -> str:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidMatrix(f"Hadamard matrix must be square, got shape {M.shape}")
    rows = []
    for row in M:
        cells = ", ".join(f"[{_fmt(z.real)}, {_fmt(z.imag)}]" for z in row)
        rows.append(f"    [{cells}]")
    return (
        "{\n"
        f'  "d": {M.shape[0]},\n'
        f'  "label": {json.dumps(label)},\n'
        '  "entries": [\n' + ",\n".join(rows) + "\n  ]\n}\n"
    )


def save_hadamard(M, path, label: str = "") -> None:
    if isinstance(M, MubPair):
        label = label or M.label
        M = M.H
    Path(path).write_text(dumps_hadamard(M, label))


def loads_hadamard(text: str) -> tuple[np.ndarray, str]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    entries = doc.get("entries")
    if not isinstance(entries, list) or not entries:
        raise ParseError("missing or empty entries array", field="entries")
    d = doc.get("d", len(entries))
    if not isinstance(d, int) or isinstance(d, bool):
        raise ParseError("d must be an integer", field="d")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ParseError("label must be a string", field="label")
    width = None
    rows = []
    for i, row in enumerate(entries):
        if not isinstance(row, list):
            raise ParseError("row must be an array", field=f"entries[{i}]")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(
                f"row has {len(row)} entries, expected {width}", field=f"entries[{i}]"
            )
        out = []
        for j, cell in enumerate(row):
            ok = (
                isinstance(cell, list)
                and len(cell) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in cell)
            )
            if not ok:
                raise ParseError("entry must be [re, im]", field=f"entries[{i}][{j}]")
            out.append(complex(float(cell[0]), float(cell[1])))
        rows.append(out)
    M = np.array(rows, dtype=complex)
    if M.shape[0] != M.shape[1]:
        raise InvalidMatrix(f"Hadamard matrix must be square, got shape {M.shape}")
    if d != M.shape[0]:
        raise ParseError(f"d = {d} does not match {M.shape[0]} rows", field="d")
    return M, label


def load_hadamard(path) -> np.ndarray:
    return load_hadamard_labeled(path)[0]


def load_hadamard_labeled(path) -> tuple[np.ndarray, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return loads_hadamard(text)
