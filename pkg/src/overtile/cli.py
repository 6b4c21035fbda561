"""Command-line entry point: ``overtile <command> ...``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib.resources import files
from pathlib import Path

from . import __version__, algebra, delone, gifs, render
from .adjacency import build_adjacency_graph, check_graph_consistency, to_dot
from .exactnum import DEFAULT_EPS, FloatModeUnsupported, Mode
from .exactnum import poly as P
from .geometry1d import (GeometryError, certify_consistency, fixed_point_seed, generate_tiling,
                         geom_to_json, patch_to_json, realize)
from .ruledsl import RuleError, RuleSyntaxError, SymbolicSubstitution, eval_number, parse_rules
from .spectral import NotPrimitive, SubstMatrix, char_poly, pf_data, pf_to_csv, pf_to_json, substitution_matrix
from .weighted import VanHoveWindow, WindowNotCovered, empirical_frequency

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class SessionConfig:
    mode: Mode | None = None          # None: decided by the input
    eps: float = DEFAULT_EPS
    out: Path = Path("overtile-out")
    params: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.eps <= 0:
            raise UsageError("--eps must be positive")

    def write(self, name: str, text: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text)
        return path

    def write_json(self, name: str, obj) -> Path:
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# --- inputs ----------------------------------------------------------------------------


def _data_file(spec: str, sub: str, suffix: str) -> tuple[str, str]:
    path = Path(spec)
    if path.is_file():
        return str(path), path.read_text()
    name = path.name if path.name.endswith(suffix) else path.name + suffix
    res = files("overtile") / "data"
    if sub:
        res = res / sub
    res = res / name
    if res.is_file():
        return f"<builtin>/{name}", res.read_text()
    raise UsageError(f"no such file: {spec}")


def load_rules(spec: str, cfg: SessionConfig) -> tuple[str, SymbolicSubstitution]:
    origin, text = _data_file(spec, "", ".rules")
    try:
        sub = parse_rules(text)
    except RuleSyntaxError as exc:
        raise UsageError(f"{origin}:{exc.line}:{exc.col}: {exc.msg}") from exc
    except RuleError as exc:
        raise UsageError(f"{origin}: {exc}") from exc
    if cfg.params:
        try:
            sub = sub.with_params(**cfg.params)
        except RuleError as exc:
            raise UsageError(f"{origin}: {exc}") from exc
    if cfg.mode is Mode.EXACT and sub.mode is Mode.FLOAT:
        raise UsageError("EXACT mode requested but the rules contain irrational weights")
    return origin, sub


def matrix_for(sub: SymbolicSubstitution, cfg: SessionConfig) -> SubstMatrix:
    M = substitution_matrix(sub)
    if cfg.mode is Mode.FLOAT and M.mode is Mode.EXACT:
        M = SubstMatrix(tuple(tuple(float(x) for x in r) for r in M.entries), Mode.FLOAT)
    return M


def _geometry(sub: SymbolicSubstitution, cfg: SessionConfig):
    M = matrix_for(sub, cfg)
    pf = pf_data(M)
    return M, pf, realize(sub, pf, cfg.eps)


# --- commands --------------------------------------------------------------------------


def cmd_check(args, cfg: SessionConfig) -> int:
    origin, sub = load_rules(args.rules, cfg)
    graph = build_adjacency_graph(sub, cfg.eps)
    report = check_graph_consistency(sub, graph, cfg.eps)
    print(f"{origin}: alphabet {' '.join(sub.alphabet)}; mode {sub.mode.value}")
    for k in range(1, graph.stabilized_at + 1):
        print(f"G{k}: " + " ".join(f"{e}{f}" for e, f in graph.named(k)))
    print(f"stabilized at k* = {graph.stabilized_at}")
    for line in report.lines():
        print("  " + line)
    cfg.write("graph.dot", to_dot(graph))
    cfg.write_json("check.json", {
        "levels": [[list(e) for e in graph.named(k)] for k in range(1, graph.stabilized_at + 1)],
        "stabilized_at": graph.stabilized_at,
        "passed": report.passed,
        "edges": report.lines(),
    })
    print("PASS" if report.passed else "FAIL")
    return OK if report.passed else FAIL


def cmd_matrix(args, cfg: SessionConfig) -> int:
    _, sub = load_rules(args.rules, cfg)
    M = matrix_for(sub, cfg)
    print("M =")
    for r in M.entries:
        print("  " + "  ".join(str(x) for x in r))
    if M.mode is Mode.EXACT:
        print(f"char poly: {P.format_poly(char_poly(M))}")
    pf = pf_data(M)
    beta, left, right = pf.floats()
    print(f"beta = {_show(pf.beta)}")
    print("l = (" + ", ".join(_show(x) for x in pf.left) + ")")
    print("r = (" + ", ".join(_show(x) for x in pf.right) + ")")
    print(f"primitive: M^{pf.primitivity_witness} > 0")
    cfg.write_json("pf.json", pf_to_json(M, pf, sub.alphabet))
    cfg.write("pf.csv", pf_to_csv(M, pf, sub.alphabet))
    return OK


def _show(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if hasattr(x, "coeffs") and x.ctx.degree == 1:
        return str(Fraction(x.coeff_vector(1)[0]))
    return f"{float(x):.12g}"


def cmd_realize(args, cfg: SessionConfig) -> int:
    _, sub = load_rules(args.rules, cfg)
    _, pf, g = _geometry(sub, cfg)
    print("tile  length")
    for a, l in zip(g.alphabet, g.lengths):
        print(f"{a:<5} {_show(l)}")
    for i, a in enumerate(g.alphabet):
        parts = ", ".join(f"[{_show(t.left)},{_show(g.right(t))}]^{g.alphabet[t.label]}" for t in g.rules[i])
        print(f"rho(T_{a}) = {{{parts}}}")
    cfg.write_json("geometry.json", geom_to_json(g))
    return OK


def cmd_certify(args, cfg: SessionConfig) -> int:
    _, sub = load_rules(args.rules, cfg)
    _, pf, g = _geometry(sub, cfg)
    cert = certify_consistency(g, sub)
    print(f"consistency: {cert.status} (stage {cert.stage}, k* = {cert.stabilized_at})")
    if cert.detail:
        print("  " + cert.detail)
    out = {"consistency": {"status": cert.status, "stage": cert.stage,
                           "stabilized_at": cert.stabilized_at, "levels": cert.levels, "detail": cert.detail}}
    ok = cert.passed
    if cert.passed and g.mode is Mode.EXACT:
        seed = fixed_point_seed(g)
        windows = [Fraction(args.window), Fraction(2 * args.window)]
        try:
            rep = algebra.certify_with_doubling(g, lambda W: generate_tiling(g, seed, W), windows)
        except (algebra.ModuleNotInvariant, algebra.EmptyModule, algebra.VerificationFailed) as exc:
            print(f"algebraic integer: FAIL ({exc})")
            out["algebraic"] = {"status": "FAIL", "detail": str(exc)}
            ok = False
        else:
            c = rep.certificates[-1]
            passed = rep.stable and c.passed
            print(f"algebraic integer: {'PASS' if passed else 'FAIL'}; poly {c.poly_text()}; "
                  f"module rank {rep.modules[-1].rank}; stable under doubling: {rep.stable}")
            out["algebraic"] = algebra.certificate_to_json(c, rep.modules[-1])
            out["algebraic"]["status"] = "PASS" if passed else "FAIL"
            out["algebraic"]["stable"] = rep.stable
            ok = ok and passed
    elif g.mode is Mode.FLOAT:
        print("algebraic integer: skipped (needs exact arithmetic)")
    cfg.write_json("certificate.json", out)
    return OK if ok else FAIL


def cmd_tile(args, cfg: SessionConfig) -> int:
    _, sub = load_rules(args.rules, cfg)
    _, pf, g = _geometry(sub, cfg)
    seed = fixed_point_seed(g)
    W = _number(args.window)
    p = generate_tiling(g, seed, W)
    print(f"seed T_{g.alphabet[seed.tile.label]} + {_show(seed.tile.left)} (period {seed.k}); "
          f"{len(p)} tiles in [-{args.window}, {args.window}]")
    print(p.word())
    cfg.write_json("tiling.json", patch_to_json(p))
    if args.svg:
        path = cfg.write("tiling.svg", render.svg_patch(p, window=(-W, W) if W else None))
        print(f"wrote {path}")
    if args.levels:
        for i, a in enumerate(g.alphabet):
            cfg.write(f"levels_{a}.svg", render.svg_levels(g, i, args.levels))
    return OK


def cmd_freq(args, cfg: SessionConfig) -> int:
    _, sub = load_rules(args.rules, cfg)
    _, pf, g = _geometry(sub, cfg)
    seed = fixed_point_seed(g)
    lengths = [_number(w) for w in args.windows]
    # pad by the longest tile so the cut tiling covers the largest window
    half = max(lengths) / 2 + math.ceil(max(g.dom.to_float(x) for x in g.lengths))
    p = generate_tiling(g, seed, half)
    wins = [VanHoveWindow(-w / 2, w / 2) for w in lengths]
    rep = empirical_frequency(p, wins, pf.right)
    for w in wins:
        dens = ", ".join(f"{x:.6f}" for x in rep.densities(w))
        print(f"|A| = {float(w.length):g}: densities ({dens}); max deviation {rep.max_deviation(w):.3e}")
    cfg.write("frequency.csv", rep.to_csv())
    devs = [rep.max_deviation(w) for w in wins]
    decreasing = all(b < a for a, b in zip(devs, devs[1:]))
    if args.tolerance is not None:
        within = all(r.deviation <= args.tolerance * r.expected for r in rep.rows if r.window == wins[-1])
        print(f"largest window within {args.tolerance:g} relative: {within}")
        return OK if within else FAIL
    return OK if decreasing else FAIL


def _number(text):
    v = eval_number(str(text))
    return v if isinstance(v, float) else Fraction(v)


def cmd_delone(args, cfg: SessionConfig) -> int:
    if args.lam == "golden":
        lam = delone.golden()
    else:
        lam = _number(args.lam)
        if cfg.mode is Mode.FLOAT:
            lam = float(lam)
    rep = delone.delone_pipeline(lam, args.m, _number(args.W), _number(args.L), eps=cfg.eps)
    for w, c, r in zip(rep.windows, rep.class_counts, rep.reports):
        print(f"W = {float(w):g}: {c} classes; well defined {r.well_defined}; fixed point {r.fixed_point}"
              + (f"; {r.detail}" if r.detail else ""))
    print(rep.status)
    cfg.write_json("delone.json", rep.summary())
    if rep.passed:
        cfg.write_json("rule_table.json", rep.tables[-1].to_json())
    return OK if rep.passed else FAIL


def cmd_gifs(args, cfg: SessionConfig) -> int:
    origin, text = _data_file(args.system, "gifs", ".json")
    try:
        sysm, U, seeds = gifs.load_system(json.loads(text))
    except (gifs.GifsError, KeyError, ValueError) as exc:
        raise UsageError(f"{origin}: {exc}") from exc
    if U is None:
        raise UsageError(f"{origin}: feasible polygons are required")
    osc = gifs.verify_osc(sysm, U, cfg.eps)
    lin = gifs.verify_linear_condition(sysm, U, cfg.eps)
    print(f"open set condition: {'PASS' if osc.passed else 'FAIL'}")
    for v in osc.vertices:
        for w in v.witnesses:
            print(f"  {v.vertex}: {w}")
    print(f"linear condition: {'PASS' if lin.passed else 'FAIL'}")
    for v in lin.vertices:
        if v.order:
            pts = "; ".join(f"({c.point[0]:.6g}, {c.point[1]:.6g})" for c in v.contacts)
            print(f"  {v.vertex}: path {'-'.join(v.order)}; meeting points {pts}")
        for w in v.witnesses:
            print(f"  {v.vertex}: {w}")
    approx = gifs.attractor_approx(sysm, args.depth, seeds, U)
    cfg.write_json("osc.json", gifs.osc_to_json(osc))
    cfg.write_json("linear.json", gifs.linear_to_json(lin))
    images = [[e.f(U.polygons[e.target]) for e in sysm.edges if e.source == i] for i in range(len(sysm.vertices))]
    cfg.write("gifs.svg", render.svg_gifs(U.polygons, images, [a["polyline"] for a in approx], sysm.vertices))
    return OK if osc.passed and lin.passed else FAIL


# --- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="overtile", description="Overlapping substitution tilings toolkit.")
    ap.add_argument("--version", action="version", version=f"overtile {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["EXACT", "FLOAT"], help="arithmetic mode (default: from input)")
    common.add_argument("--eps", type=float, default=DEFAULT_EPS, help="FLOAT tolerance")
    common.add_argument("--out", default="overtile-out", help="artifact directory")
    common.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                        help="rebind a rule parameter (also accepted as --NAME VALUE)")
    sub = ap.add_subparsers(dest="command", required=True)

    def rules_cmd(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.add_argument("rules", help="rules file or built-in fixture name")
        p.set_defaults(fn=fn)
        return p

    rules_cmd("check", cmd_check, "parse, adjacency graphs and graph consistency")
    rules_cmd("matrix", cmd_matrix, "substitution matrix and Perron-Frobenius data")
    rules_cmd("realize", cmd_realize, "tile lengths and rule patches")
    p = rules_cmd("certify", cmd_certify, "consistency and algebraic-integer certificates")
    p.add_argument("--window", type=int, default=20, help="half-width for the return module (doubled once)")
    p = rules_cmd("tile", cmd_tile, "generate the fixed-point tiling")
    p.add_argument("--window", default="20", help="half-width W of [-W, W]")
    p.add_argument("--svg", action="store_true", help="also write tiling.svg")
    p.add_argument("--levels", type=int, default=0, help="write stacked-row SVGs up to this level")
    p = rules_cmd("freq", cmd_freq, "empirical tile frequencies")
    p.add_argument("--windows", nargs="+", default=["24", "96", "384"], help="window lengths")
    p.add_argument("--tolerance", type=float, help="relative tolerance at the largest window")

    p = sub.add_parser("delone", parents=[common], help="derive a substitution from a spectrum")
    p.add_argument("--lambda", dest="lam", required=True, help="inflation: number, p/q, or 'golden'")
    p.add_argument("--m", type=int, default=1, help="largest digit")
    p.add_argument("-W", default="64", help="window")
    p.add_argument("--L", default="0", help="requested collar radius")
    p.set_defaults(fn=cmd_delone)

    p = sub.add_parser("gifs", parents=[common], help="open set and linear conditions for a GIFS")
    p.add_argument("system", help="system JSON file or built-in fixture name")
    p.add_argument("--depth", type=int, default=4, help="attractor approximation depth")
    p.set_defaults(fn=cmd_gifs)
    return ap


def _extra_params(rest: list[str]) -> dict[str, str]:
    """Turn leftover ``--r 1/2`` / ``--r=1/2`` tokens into parameter bindings."""
    out = {}
    it = iter(rest)
    for tok in it:
        if not tok.startswith("--") or len(tok) < 3:
            raise UsageError(f"unrecognized argument: {tok}")
        name = tok[2:]
        if "=" in name:
            name, value = name.split("=", 1)
        else:
            value = next(it, None)
            if value is None:
                raise UsageError(f"missing value for {tok}")
        out[name] = value
    return out


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args, rest = ap.parse_known_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        params = _extra_params(rest)
        for item in args.param:
            if "=" not in item:
                raise UsageError(f"--param expects NAME=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            params[k.strip()] = v.strip()
        mode = os.environ.get("OVERTILE_MODE") or args.mode
        if mode and mode.upper() not in ("EXACT", "FLOAT"):
            raise UsageError(f"unknown mode {mode!r}")
        cfg = SessionConfig(Mode(mode.upper()) if mode else None, args.eps, Path(args.out), params)
        if params and args.command in ("delone", "gifs"):
            raise UsageError(f"unrecognized arguments: {' '.join(rest)}")
        return args.fn(args, cfg)
    except UsageError as exc:
        print(f"overtile: error: {exc}", file=sys.stderr)
        return USAGE
    except (NotPrimitive, GeometryError, algebra.VerificationFailed, delone.WindowTooSmall,
            delone.NotWellDefined, FloatModeUnsupported, ArithmeticError, RuleError,
            WindowNotCovered) as exc:
        print(f"overtile: {type(exc).__name__}: {exc}", file=sys.stderr)
        return FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
