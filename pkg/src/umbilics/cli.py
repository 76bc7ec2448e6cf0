"""Command-line front end.

    umbilics index  --surface S --curve auto|circle:R[@cx,cy] --route R [--route R ...]
    umbilics scan   --surface S --rect x0,x1,y0,y1 --grid N[,M]
    umbilics regularity --surface S [--limits]
    umbilics verify --suite indices|regularity|duality|ribaucour|umbilics|properties|all
    umbilics export --surface S --what field-csv|field-svg|mesh-obj|congruence-obj --out PATH

Exit codes: 0 success, 1 failed verification, 2 winding or numerical error,
3 parse error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from importlib import metadata

import numpy as np

from .catalog import SurfaceSpec, parse_surface
from .errors import ParseError, UmbilicsError
from .identifiers import (
    LINE_FIELDS,
    VECTOR_FIELDS,
    cartesian_identifiers,
    direction_field,
    hessian_identifier_cartesian,
    identifier_field,
    umbilic_candidates,
)
from .inversion import check_hatted_limits, check_regularity, export_inversion_obj
from .jets import eval_jet
from .ribaucour import export_congruence_obj
from .verification import SUITES, run_suite
from .winding import (
    HalfIndex,
    circle,
    find_small_radius,
    find_valid_radius,
    hessian_flow_index,
    parse_curve,
    sign_change_index,
    umbilic_index_direct,
    umbilic_index_via_D,
    umbilic_index_via_Delta,
)

EXIT_OK, EXIT_VERIFY, EXIT_WINDING, EXIT_PARSE, EXIT_IO = 0, 1, 2, 3, 4

ROUTES = ("D", "delta", "direct", "sign-change", "hessian-cartesian", "hessian-polar", "hessian-direct")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


class _Parser(argparse.ArgumentParser):
    """Usage errors are parse errors (exit 3), not winding errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _floats(text: str, n: int | tuple) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ParseError(f"expected comma-separated numbers, got {text!r}") from None
    ok = len(vals) in n if isinstance(n, tuple) else len(vals) == n
    if not ok:
        raise ParseError(f"expected {n} numbers, got {text!r}")
    return vals


# --------------------------------------------------------------------------
# index


def _auto_curve(f: SurfaceSpec, hessian: bool):
    """The radius search suited to the surface family."""
    if f.kind in ("Fm", "Gm"):
        search = find_valid_radius(f, which="delta_g" if hessian else "Delta", d1_sign=None if hessian else 1)
    elif f.kind == "LambdaM" or (f.kind == "Dual" and f.param("m") is not None):
        search = find_small_radius(f)
    else:
        raise ParseError(f"--curve auto needs a g_m, Lambda_m or dual surface, not {f.label}")
    return circle(search.radius), search.as_dict()


def _run_route(f: SurfaceSpec, curve, route: str):
    if route == "D":
        return "I", umbilic_index_via_D(f, curve)
    if route == "delta":
        return "I", umbilic_index_via_Delta(f, curve)
    if route == "direct":
        return "I", umbilic_index_direct(f, curve)
    if route == "sign-change":
        w0 = curve.winding_about_origin()
        return "I", HalfIndex(2 * w0 + sign_change_index(f, curve))
    kind = route.split("-", 1)[1]
    return "ind(H)", hessian_flow_index(f, curve, kind)


def cmd_index(args) -> int:
    f = parse_surface(args.surface)
    routes = args.route or ["delta"]
    report = {"command": "index", "surface": f.label, "curve": None, "indices": [], "diagnostics": {},
              "version": _version()}
    hessian = all(r.startswith("hessian") for r in routes)
    if args.curve == "auto":
        curve, search = _auto_curve(f, hessian)
        report["diagnostics"]["radius_search"] = search
    else:
        curve = parse_curve(args.curve)
    report["curve"] = curve.describe()
    print(f"surface {f.label}, curve {curve.describe()}")
    for route in routes:
        name, idx = _run_route(f, curve, route)
        rep = idx.report
        entry = {"route": route, "twice_index": idx.twice, "residual": rep.residual if rep else 0.0}
        report["indices"].append(entry)
        if rep is not None:
            report["diagnostics"][route] = rep.as_dict()
        extra = ""
        if route == "delta" and rep is not None:
            extra = f"  (ind(Delta) = {rep.index})"
        print(f"{name} = {idx}  [route {route}]{extra}")
    _maybe_json(args, report)
    return EXIT_OK


# --------------------------------------------------------------------------
# scan


def cmd_scan(args) -> int:
    f = parse_surface(args.surface)
    rect = _floats(args.rect, 4)
    g = [int(v) for v in _floats(args.grid, (1, 2))]
    grid = (g[0], g[-1])
    res = umbilic_candidates(f, rect, grid)
    print(f"surface {f.label}, rect {rect}, grid {grid[0]}x{grid[1]}")
    print(f"candidates: {len(res.candidates)}")
    for c in res.candidates:
        idx = "umbilic on a node" if c[4] is None else f"winding of D = {c[4]}"
        print(f"  x in [{c[0]:.6g}, {c[1]:.6g}], y in [{c[2]:.6g}, {c[3]:.6g}]: {idx}")
    print(f"d1 range: [{res.d1_range[0]:.6g}, {res.d1_range[1]:.6g}]")
    print(f"d2 range: [{res.d2_range[0]:.6g}, {res.d2_range[1]:.6g}], min |d2| = {res.min_abs_d2:.6g}")
    report = {"command": "scan", "surface": f.label, "curve": None, "indices": [], "diagnostics": res.as_dict(),
              "version": _version()}
    if f.kind == "GhomiHoward":
        x = np.linspace(rect[0], rect[1], 200)
        _, a = cartesian_identifiers(eval_jet(f, (x, np.zeros_like(x))))
        ymax = math.sqrt(max(0.0, -rect[0]))
        y = np.linspace(max(rect[2], -ymax), min(rect[3], ymax), 200)
        _, b = cartesian_identifiers(eval_jet(f, (-y * y, y)))
        print(f"min |d2| on y = 0: {np.min(np.abs(a)):.6g}; on x = -y^2: {np.min(np.abs(b)):.6g}")
        report["diagnostics"]["min_abs_d2_curves"] = [float(np.min(np.abs(a))), float(np.min(np.abs(b)))]
    _maybe_json(args, report)
    return EXIT_OK


# --------------------------------------------------------------------------
# regularity


def cmd_regularity(args) -> int:
    f = parse_surface(args.surface)
    rep = check_regularity(f, args.level, c=args.c)
    print(f"surface {f.label}: level {rep.level} (c = {rep.c:g})")
    for w in rep.witnesses:
        seq = ", ".join(f"{v:.3g}" for v in w.values)
        print(f"  {'pass' if w.passed else 'fail'}  {w.criterion}: {seq}")
    report = {"command": "regularity", "surface": f.label, "curve": None, "indices": [],
              "diagnostics": {"regularity": rep.as_dict()}, "version": _version()}
    if args.limits:
        lim = check_hatted_limits(f)
        print("limits at rho = " + ", ".join(f"{r:g}" for r in lim.sequences[0].rhos))
        for s in lim.sequences:
            print(f"  {'decreasing' if s.decreasing else 'not decreasing':>14}  {s.name}: "
                  + ", ".join(f"{v:.3g}" for v in s.values))
        k = lim.k_uv_check
        print(f"k_uv printed vs AD at (rho, theta) = ({k['rho']}, {k['theta']}): relative {k['relative']:.2e}")
        report["diagnostics"]["limits"] = lim.as_dict()
    _maybe_json(args, report)
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    results = run_suite(args.suite)
    for r in results:
        print(r.summary())
        if args.verbose or not r.passed:
            for line in r.lines:
                print("    " + line)
    n_ok = sum(r.passed for r in results)
    print(f"{n_ok}/{len(results)} criteria passed")
    report = {"command": "verify", "surface": None, "curve": None, "indices": [],
              "diagnostics": {"suite": args.suite, "criteria": [r.as_dict() for r in results]},
              "version": _version()}
    _maybe_json(args, report)
    return EXIT_OK if n_ok == len(results) else EXIT_VERIFY


# --------------------------------------------------------------------------
# export


def _region_points(args):
    """Sample points: a rectangle grid, or a polar grid on an annulus."""
    n = [int(v) for v in _floats(args.grid, (1, 2))]
    nx, ny = n[0], n[-1]
    if args.annulus:
        r0, r1 = _floats(args.annulus, 2)
        R, T = np.meshgrid(np.linspace(r0, r1, ny), np.linspace(0, 2 * math.pi, nx, endpoint=False), indexing="ij")
        return (R * np.cos(T)).ravel(), (R * np.sin(T)).ravel(), (-r1, r1, -r1, r1)
    x0, x1, y0, y1 = _floats(args.rect, 4)
    X, Y = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny), indexing="xy")
    return X.ravel(), Y.ravel(), (x0, x1, y0, y1)


def _field_samples(f: SurfaceSpec, which: str, x, y):
    """(angle, component1, component2, header names, is_line)."""
    if which in LINE_FIELDS:
        s = direction_field(f, which)(x, y)
        j = eval_jet(f, (x, y))
        comp = cartesian_identifiers(j) if which == "principal" else hessian_identifier_cartesian(j)
        names = ("d1", "d2") if which == "principal" else ("dg1", "dg2")
        return np.asarray(s.angle, dtype=float), comp[0], comp[1], names, True
    if which in VECTOR_FIELDS:
        v = identifier_field(f, which)(x, y)
        v1, v2 = np.asarray(v[0], dtype=float), np.asarray(v[1], dtype=float)
        return np.arctan2(v2, v1), v1, v2, ("v1", "v2"), False
    raise ParseError(f"unknown field {which!r}")


def _write_csv(path, x, y, angle, c1, c2, names) -> None:
    with open(path, "w") as fh:
        fh.write(f"x,y,dir_angle,{names[0]},{names[1]}\n")
        for row in zip(x, y, angle, np.broadcast_to(c1, x.shape), np.broadcast_to(c2, x.shape)):
            fh.write(",".join(f"{float(v):.17g}" for v in row) + "\n")


def _write_svg(path, x, y, angle, region, is_line: bool, step: float) -> None:
    x0, x1, y0, y1 = region
    w, h = x1 - x0, y1 - y0
    half = 0.4 * step
    sw = step * 0.06
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{x0:.9g} {-y1:.9g} {w:.9g} {h:.9g}">',
        f'<g stroke="black" stroke-width="{sw:.6g}" fill="none">',
    ]
    for px, py, a in zip(x, y, angle):
        if not math.isfinite(a):
            continue
        dx, dy = half * math.cos(a), half * math.sin(a)
        if is_line:
            lines.append(f'<polyline points="{px - dx:.9g},{-(py - dy):.9g} {px + dx:.9g},{-(py + dy):.9g}"/>')
        else:
            tx, ty = px + dx, py + dy
            hx, hy = 0.35 * half * math.cos(a + 2.6), 0.35 * half * math.sin(a + 2.6)
            kx, ky = 0.35 * half * math.cos(a - 2.6), 0.35 * half * math.sin(a - 2.6)
            lines.append(
                f'<polyline points="{px - dx:.9g},{-(py - dy):.9g} {tx:.9g},{-ty:.9g} '
                f'{tx + hx:.9g},{-(ty + hy):.9g} {tx:.9g},{-ty:.9g} {tx + kx:.9g},{-(ty + ky):.9g}"/>'
            )
    lines += ["</g>", "</svg>", ""]
    with open(path, "w") as fh:
        fh.write("\n".join(lines))


def cmd_export(args) -> int:
    f = parse_surface(args.surface)
    if args.what in ("field-csv", "field-svg"):
        x, y, region = _region_points(args)
        angle, c1, c2, names, is_line = _field_samples(f, args.field, x, y)
        if args.what == "field-csv":
            _write_csv(args.out, x, y, angle, c1, c2, names)
        else:
            n = [int(v) for v in _floats(args.grid, (1, 2))]
            step = min(region[1] - region[0], region[3] - region[2]) / max(n)
            _write_svg(args.out, x, y, angle, region, is_line, step)
        print(f"wrote {len(x)} samples of the {args.field} field to {args.out}")
    elif args.what == "mesh-obj":
        n = export_inversion_obj(f, args.out, args.rho_max, args.n_rho, args.n_theta)
        print(f"wrote inversion mesh with {n} vertices to {args.out}")
    elif args.what == "congruence-obj":
        if f.kind != "LambdaM":
            raise ParseError("congruence-obj needs a lambda:m=...,a=... surface")
        n = export_congruence_obj(f, args.out, args.rho_max, args.n_rho, args.n_theta)
        print(f"wrote sphere-congruence mesh with {n} vertices to {args.out}")
    report = {"command": "export", "surface": f.label, "curve": None, "indices": [],
              "diagnostics": {"what": args.what, "out": args.out}, "version": _version()}
    _maybe_json(args, report)
    return EXIT_OK


# --------------------------------------------------------------------------
# plumbing


def _maybe_json(args, report: dict) -> None:
    if getattr(args, "json", None):
        with open(args.json, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="umbilics", description="Umbilic and Hessian eigen-flow indices of graph surfaces.")
    p.add_argument("--version", action="version", version=_version())
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, surface=True):
        if surface:
            sp.add_argument("--surface", required=True, help="e.g. rez3, fm:m=4,a=0.2, lambda:m=3,a=0.5")
        sp.add_argument("--json", metavar="PATH", help="also write a JSON report")

    sp = sub.add_parser("index", help="index of a flow along a closed curve")
    common(sp)
    sp.add_argument("--curve", default="auto", help="auto or circle:R[@cx,cy]")
    sp.add_argument("--route", action="append", choices=ROUTES, help="repeatable; default delta")
    sp.set_defaults(func=cmd_index)

    sp = sub.add_parser("scan", help="grid cells that may contain umbilics")
    common(sp)
    sp.add_argument("--rect", default="-1,1,-1,1", help="x0,x1,y0,y1")
    sp.add_argument("--grid", default="50", help="nodes per axis: N or NX,NY")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("regularity", help="regularity ladder of the inverted graph")
    common(sp)
    sp.add_argument("--level", default="C2projection", choices=("C0", "Differentiable", "C1", "C2projection"))
    sp.add_argument("--c", type=float, default=None, help="exponent of the second-order bounds")
    sp.add_argument("--limits", action="store_true", help="also sample the limits at the origin")
    sp.set_defaults(func=cmd_regularity)

    sp = sub.add_parser("verify", help="run acceptance checks")
    common(sp, surface=False)
    sp.add_argument("--suite", default="all", choices=tuple(SUITES))
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("export", help="write fields or meshes")
    common(sp)
    sp.add_argument("--what", required=True, choices=("field-csv", "field-svg", "mesh-obj", "congruence-obj"))
    sp.add_argument("--out", required=True)
    sp.add_argument("--field", default="principal", choices=tuple(LINE_FIELDS) + tuple(VECTOR_FIELDS))
    sp.add_argument("--rect", default="-0.5,0.5,-0.5,0.5")
    sp.add_argument("--annulus", default=None, help="r0,r1 (polar sample grid instead of --rect)")
    sp.add_argument("--grid", default="50", help="N or NX,NY")
    sp.add_argument("--rho-max", type=float, default=0.5)
    sp.add_argument("--n-rho", type=int, default=200)
    sp.add_argument("--n-theta", type=int, default=720)
    sp.set_defaults(func=cmd_export)
    return p


_NUMERIC_LIST_FLAGS = ("--rect", "--annulus")


def _glue_negative_lists(argv: list[str]) -> list[str]:
    # argparse reads "-1,1,-1,1" as an option; attach it to its flag
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _NUMERIC_LIST_FLAGS and i + 1 < len(argv) and re.match(r"-[\d.]", argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_lists(argv))
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UmbilicsError, ArithmeticError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_WINDING


if __name__ == "__main__":
    sys.exit(main())
