"""Command-line interface.

Exit codes: 0 success (``verify``: unique for all volumes), 1 other errors,
2 malformed input, 3 volume above ``2^d det L``, 10 ``verify`` partial,
11 ``verify`` inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import IsodiaError, LatticeError, MinkowskiBoundError
from .isodiametric import (
    INCONCLUSIVE, UNIQUE_ALL_V, _jsonable, export_extremal_mesh, extremal_body,
    uniqueness_certificate,
)
from .lattice import Lattice, lattice_from_spec
from .metrics import metrics
from .volume import mc_radial_profile, volume
from .voronoi import FedorovType, belts, cached_cell, export_mesh, fedorov_classify

EXIT_INPUT, EXIT_MINKOWSKI, EXIT_PARTIAL, EXIT_INCONCLUSIVE = 2, 3, 10, 11


class InputError(Exception):
    pass


def load_spec(text: str) -> Lattice:
    """Inline JSON (starting with ``{``) or a path to a JSON file."""
    raw = text.strip()
    if not raw.startswith("{"):
        try:
            raw = Path(text).read_text()
        except OSError as exc:
            raise InputError(f"cannot read lattice spec {text!r}: {exc}") from None
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed lattice spec JSON: {exc}") from None
    try:
        return lattice_from_spec(obj)
    except (LatticeError, TypeError) as exc:
        raise InputError(f"invalid lattice spec: {exc}") from None


def _fmt(x):
    return f"{x:.12g}"


def _dump(obj, out):
    out.write(json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n")


def _is_z3(L: Lattice, cell) -> bool:
    return (L.dim == 3 and abs(L.det - 1) < 1e-12
            and fedorov_classify(cell) is FedorovType.CUBE and abs(cell.inradius - 1) < 1e-12)


def cmd_info(args, out):
    L = load_spec(args.spec)
    cell = cached_cell(L)
    m = metrics(L, cell)
    report = {"d": L.dim, "det": L.det, **{k: v for k, v in m.as_dict().items()},
              "facets": len(cell.facets), "vertices": len(cell.vertices)}
    if L.dim == 3:
        report["fedorov_type"] = str(fedorov_classify(cell))
        lengths = belts(cell).lengths()
        report["belts"] = {"4": lengths.count(4), "6": lengths.count(6)}
    if args.format == "text":
        for k, v in _jsonable(report).items():
            out.write(f"{k}: {v}\n")
    else:
        _dump(report, out)
    return 0


def _mc_kwargs(args):
    return {"samples": args.samples, "seed": args.seed, "workers": args.workers}


def cmd_extremal(args, out):
    L = load_spec(args.spec)
    cell = cached_cell(L)
    mc = _mc_kwargs(args)
    if args.volume is not None:
        V = args.volume
    else:
        r = args.radius if args.radius is not None else args.diameter / 2
        if not 0 < r <= cell.circumradius * (1 + 1e-12):
            raise InputError(f"radius {_fmt(r)} outside (0, {_fmt(cell.circumradius)}] "
                             "(diameter must not exceed 4 mu(L))")
        V = volume(L, r, cell=cell, **mc).value
    body = extremal_body(L, V, cell=cell, tol=args.tol, max_samples=args.max_samples, **mc)
    if args.diameter is not None or args.radius is not None:
        # Report the requested radius rather than the re-inverted one.
        body.r = r
        body.diameter = 2 * r
    report = {**body.as_dict(), "method": body.method, "error": body.error}
    if args.mesh:
        data = export_extremal_mesh(body, args.subdivision, fmt=Path(args.mesh).suffix.lstrip(".") or "obj")
        Path(args.mesh).write_bytes(data)
        report["mesh"] = args.mesh
    _dump(report, out)
    return 0


def cmd_curve(args, out):
    L = load_spec(args.spec)
    if args.points < 2:
        raise InputError("--points must be at least 2")
    cell = cached_cell(L)
    top = 2 * cell.circumradius
    D = [top * k / args.points for k in range(1, args.points + 1)]
    if _is_z3(L, cell):
        D += [2.0, 2 * math.sqrt(2.0)]
    D = sorted(set(D))
    rows = []
    if L.dim in (2, 3):
        for dk in D:
            est = volume(L, dk / 2, cell=cell)
            rows.append((dk, dk / 2, est.value, est.method, est.error))
    else:
        norms, vb = mc_radial_profile(L, args.samples, seed=args.seed, workers=args.workers, cell=cell)
        n = args.samples
        for dk in D:
            hits = int(np.searchsorted(norms, dk / 2, side="right"))
            p = hits / n
            rows.append((dk, dk / 2, vb * p, "montecarlo", 3 * vb * math.sqrt(p * (1 - p) / n)))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["D", "r", "V", "method", "error"])
    for dk, r, V, method, err in rows:
        writer.writerow([_fmt(dk), _fmt(r), _fmt(V), method, _fmt(err)])
    text = buf.getvalue()
    if args.out and args.out != "-":
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return 0


def cmd_verify(args, out):
    L = load_spec(args.spec)
    cert = uniqueness_certificate(L)
    _dump(cert.as_dict(), out)
    if cert.verdict == UNIQUE_ALL_V:
        return 0
    return EXIT_INCONCLUSIVE if cert.verdict == INCONCLUSIVE else EXIT_PARTIAL


def cmd_mesh(args, out):
    L = load_spec(args.spec)
    data = export_mesh(cached_cell(L), args.format)
    if args.out and args.out != "-":
        Path(args.out).write_bytes(data)
    else:
        out.write(data.decode("ascii"))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="isodia", description=(
        "Isodiametric problem with lattice-point constraints: extremal bodies "
        "B(r) ∩ DV(2L), volume/diameter curves and uniqueness certificates."))
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("spec", help="lattice spec: inline JSON or path to a JSON file")
        sp.set_defaults(func=func)
        return sp

    def add_mc(sp):
        sp.add_argument("--samples", type=int, default=10**6, help="Monte Carlo samples (d >= 4)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)

    sp = add("info", cmd_info, "lattice metrics and cell combinatorics")
    sp.add_argument("--format", choices=["json", "text"], default="json")

    sp = add("extremal", cmd_extremal, "extremal body for a volume or diameter")
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--volume", type=float)
    group.add_argument("--diameter", type=float)
    group.add_argument("--radius", type=float)
    sp.add_argument("--mesh", help="write an OBJ/OFF mesh of the body (d = 3)")
    sp.add_argument("--subdivision", type=int, default=8)
    sp.add_argument("--tol", type=float, default=None,
                    help="Monte Carlo volume tolerance; samples grow tenfold until met (d >= 4)")
    sp.add_argument("--max-samples", type=int, default=10**8)
    add_mc(sp)

    sp = add("curve", cmd_curve, "CSV of the volume-diameter curve")
    sp.add_argument("--points", type=int, default=50)
    sp.add_argument("--out", default="-")
    add_mc(sp)

    add("verify", cmd_verify, "uniqueness certificate (exit 0/10/11)")

    sp = add("mesh", cmd_mesh, "OBJ/OFF mesh of DV(2L) (d = 3)")
    sp.add_argument("--format", choices=["obj", "off"], default="obj")
    sp.add_argument("--out", default="-")
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MinkowskiBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MINKOWSKI
    except (IsodiaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
