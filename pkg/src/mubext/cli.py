"""Command-line interface.

Exit codes: 0 success (or extremal verdict), 1 negative verdict or failed
comparison, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import extremality as ex
from .errors import MubError, NumericalFailure
from .finite_group import make_group, parse_group
from .haagerup import fourier_spectrum_closed_form, has_minus_one, spectrum
from .mub_catalog import TABLE1_IDS, catalog_mub, fourier_mub, hadamard_to_mub, load_hadamard_labeled
from .numerics import Tolerances
from .povm import PAULI
from .table1 import run_table1

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_SWEEP_EXTRAS = ((2, 2), (2, 2, 2), (2, 4), (3, 3))


class InputError(MubError):
    pass


def num(x) -> str:
    return format(float(x), ".17g")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([num(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _tolerances(args) -> Tolerances:
    tol = Tolerances.from_env()
    return tol.with_(cluster=getattr(args, "tol_cluster", None))


def _add_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pair source (exactly one)")
    g.add_argument("--catalog", metavar="ID", choices=TABLE1_IDS, help="catalog Hadamard matrix")
    g.add_argument("--param", type=float, metavar="A", help="parameter a of a parametric catalog family")
    g.add_argument("--sign", choices=["+", "-"], help="branch of d6-m2 / d7-m2 (default +)")
    g.add_argument("--group", metavar="N1,N2,...", help="Fourier pair of Z_N1 x Z_N2 x ...")
    g.add_argument("--file", metavar="PATH", help="Hadamard matrix JSON file")


def _add_common(p: argparse.ArgumentParser, default_format: str = "json") -> None:
    p.add_argument("--tol-cluster", type=float, metavar="X", help="eigenvalue clustering / -1 membership tolerance")
    p.add_argument("--format", choices=["json", "csv"], default=default_format)
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")


def _pair_from_args(args, tol: Tolerances):
    sources = [s for s in ("catalog", "group", "file") if getattr(args, s) is not None]
    if len(sources) != 1:
        raise InputError("give exactly one of --catalog, --group, --file")
    if args.catalog:
        params = [args.param] if args.param is not None else None
        return catalog_mub(args.catalog, params, args.sign, tol), None
    if args.group:
        G = parse_group(args.group)
        return fourier_mub(G), G
    H, label = load_hadamard_labeled(args.file)
    return hadamard_to_mub(H, label or args.file, tol), None


# -- commands -------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    tol = _tolerances(args)
    pair, _ = _pair_from_args(args, tol)
    spec = spectrum(pair, tol)
    if args.format == "json":
        _emit(_json(spec.to_dict(tol)), args.out)
    else:
        rows = [("eigenvalue", v, "") for v in spec.eigenvalues]
        rows += [("cluster", v, m) for v, m in spec.clusters]
        _emit(_csv(rows, ["kind", "value", "multiplicity"]), args.out)
    return EXIT_OK


def _qubit_bloch(pair) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([0.0, 0.0, 1.0])
    psi0 = pair.H[:, 0]
    b = np.array([np.real(psi0.conj() @ P @ psi0) for P in PAULI])
    return a, b


def cmd_certify(args) -> int:
    tol = _tolerances(args)
    pair, G = _pair_from_args(args, tol)
    d = pair.d
    modes = sum([args.vertex, args.arc_param is not None, args.lam is not None or args.mu is not None])
    if modes != 1:
        raise InputError("give exactly one of --lambda/--mu, --arc-param, --vertex")
    geometric_input_error = False
    if args.vertex:
        cert = ex.certify_vertex(pair, tol)
    else:
        if args.arc_param is not None:
            if d < 3:
                raise InputError("--arc-param needs d >= 3")
            lam, mu = ex.gamma_parametrize(d, args.arc_param, args.branch)
        else:
            if args.lam is None or args.mu is None:
                raise InputError("--lambda and --mu must be given together")
            lam, mu = args.lam, args.mu
        if d == 2:
            a, b = _qubit_bloch(pair)
            cert = ex.certify_qubit(lam, mu, a, b, pair.label, tol)
            geometric_input_error = cert.verdict == ex.NOT_COMPATIBLE
        else:
            if G is not None:
                cert = ex.certify_fourier(G, lam, mu, tol, oracle=args.oracle)
            else:
                cert = ex.certify_gamma_point(pair, lam, mu, oracle=args.oracle, tol=tol)
            geometric_input_error = cert.verdict in (ex.NOT_COMPATIBLE, ex.NOT_APPLICABLE)
    doc = cert.to_dict()
    if args.format == "json":
        _emit(_json(doc), args.out)
    else:
        rows = [(doc["pair_label"], d, doc["lambda"], doc["mu"], doc["verdict"], doc["minus_one_distance"], doc["gram_rank"], doc["oracle_agreement"])]
        _emit(_csv(rows, ["pair_label", "d", "lambda", "mu", "verdict", "minus_one_distance", "gram_rank", "oracle_agreement"]), args.out)
    if geometric_input_error:
        geo = cert.reason("geometry") or {}
        print(f"error: point ({cert.lam}, {cert.mu}) is not an arc point for d = {d}: {geo}", file=sys.stderr)
        return EXIT_INPUT
    if cert.oracle_agreement is False:
        print("warning: oracle disagrees with the verdict", file=sys.stderr)
    return EXIT_OK if cert.verdict == ex.EXTREMAL else EXIT_NEGATIVE


def region_rows(d: int, n: int, arc_points: int):
    lo = -1.0 if d == 2 else 1.0 / (1 - d)
    grid = np.linspace(lo, 1.0, n)
    rows = []
    for lam in grid:
        for mu in grid:
            pt = ex.region_contains(d, lam, mu)
            rows.append(("grid", float(lam), float(mu), pt.classification))
    for lam, mu in ex.arc_polyline(d, arc_points):
        rows.append(("arc", float(lam), float(mu), ex.region_contains(d, lam, mu).classification))
    if d >= 3:
        v = ex.vertex_point(d)
        rows.append(("vertex", v[0], v[1], ex.region_contains(d, *v).classification))
    return rows


def cmd_region(args) -> int:
    if args.dim < 2:
        raise InputError("--dim must be at least 2")
    if args.grid < 2 or args.arc_points < 2:
        raise InputError("grid counts must be at least 2")
    rows = region_rows(args.dim, args.grid, args.arc_points)
    if args.format == "csv":
        _emit(_csv(rows, ["kind", "lambda", "mu", "classification"]), args.out)
    else:
        _emit(_json({"d": args.dim, "points": [dict(zip(("kind", "lambda", "mu", "classification"), r)) for r in rows]}), args.out)
    return EXIT_OK


def cmd_table1(args) -> int:
    tol = _tolerances(args)
    results = run_table1(tol, value_tol=args.value_tol)
    if args.format == "json":
        _emit(_json([r.to_dict() for r in results]), args.out)
    else:
        rows = [(r.entry, "pass" if r.passed else "fail", r.max_deviation, "; ".join(r.messages)) for r in results]
        _emit(_csv(rows, ["entry", "status", "max_deviation", "messages"]), args.out)
    failed = [r.entry for r in results if not r.passed]
    if failed:
        print(f"table1 mismatch: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


def sweep_groups(max_order: int, extras) -> list:
    groups = [make_group([n]) for n in range(2, max_order + 1)]
    groups += [make_group(f) for f in extras if math.prod(f) <= max_order]
    return groups


def sweep_row(G, tol: Tolerances) -> dict:
    numeric = spectrum(fourier_mub(G), tol)
    closed = fourier_spectrum_closed_form(G, tol)
    flag, dist = has_minus_one(numeric, tol)
    even = G.order % 2 == 0
    same_clusters = len(numeric.clusters) == len(closed.clusters) and all(
        m1 == m2 and abs(v1 - v2) <= 1e-9 for (v1, m1), (v2, m2) in zip(numeric.clusters, closed.clusters)
    )
    return {
        "group": G.label(),
        "order": G.order,
        "parity": "even" if even else "odd",
        "has_minus_one": flag,
        "distance_to_minus_one": dist,
        "closed_form_match": same_clusters,
        "agree": (flag == even) and same_clusters,
    }


def cmd_fourier_sweep(args) -> int:
    if args.max_order < 2:
        raise InputError("--max-order must be at least 2")
    tol = _tolerances(args)
    extras = DEFAULT_SWEEP_EXTRAS
    if args.groups:
        extras = tuple(tuple(parse_group(s).factors) for s in args.groups.split(";") if s.strip())
    rows = [sweep_row(G, tol) for G in sweep_groups(args.max_order, extras)]
    if args.format == "json":
        _emit(_json(rows), args.out)
    else:
        keys = ["group", "order", "parity", "has_minus_one", "agree"]
        _emit(_csv([[r[k] for k in keys] for r in rows], keys), args.out)
    return EXIT_OK if all(r["agree"] for r in rows) else EXIT_NEGATIVE


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mubext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="spectrum of the Haagerup matrix of a pair")
    _add_source(p)
    _add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("certify", help="certify extremality of a noisy pair")
    _add_source(p)
    p.add_argument("--lambda", dest="lam", type=float, help="noise weight of the first observable")
    p.add_argument("--mu", type=float, help="noise weight of the second observable")
    p.add_argument("--arc-param", type=float, metavar="NU", help="arc point by its parameter nu in [1/(1-d), 1]")
    p.add_argument("--branch", choices=["A", "B"], default="A", help="A gives (nu, gamma_nu), B gives (gamma_nu, nu)")
    p.add_argument("--vertex", action="store_true", help="the point (1/(1-d), 1/(1-d))")
    p.add_argument("--oracle", action="store_true", help="cross-check with the brute-force independence oracle")
    _add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("region", help="sample the compatibility region and the arc")
    p.add_argument("-d", "--dim", type=int, required=True, help="Hilbert space dimension (>= 2)")
    p.add_argument("--grid", type=int, default=41, help="grid points per axis (>= 2)")
    p.add_argument("--arc-points", type=int, default=21, help="points per arc branch in the polyline")
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("table1", help="recompute the catalog spectra and compare with reference values")
    p.add_argument("--value-tol", type=float, default=1e-8, help="allowed eigenvalue deviation")
    _add_common(p, default_format="csv")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("fourier-sweep", help="parity check over Fourier pairs of small abelian groups")
    p.add_argument("--max-order", type=int, default=10, help="largest group order included")
    p.add_argument("--groups", metavar="F1;F2", help='extra factorizations, e.g. "2,2;2,4"')
    _add_common(p, default_format="csv")
    p.set_defaults(func=cmd_fourier_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MubError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
