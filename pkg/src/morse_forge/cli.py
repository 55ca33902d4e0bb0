"""``morse-forge`` command line.

Exit codes:

==  =================================================================
0   success
1   any other library error
2   ParseError: malformed or missing OFF/CSV input
3   InvariantViolation: ``verify`` found a broken invariant
4   the requested pair is not cancelable (index gap, paths, orbit)
5   FrontierConflict: cancelable in principle, but no realization fit
64  usage error: bad flags or a bad MORSE_FORGE_LOG value
==  =================================================================
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from dataclasses import field as dc_field
from pathlib import Path

from . import io as mio
from .cancel import (
    cancel_1d,
    execute,
    is_cancelable,
    plan_record,
    sample_deformation,
    simplify,
)
from .complex import CellId, euler_characteristic
from .errors import FrontierConflict, InvariantViolation, MorseError, ParseError
from .field import ScalarField
from .gradient import build_gradient, connecting_paths, critical_cells, terminal_counts
from .persist import persistence_pairs
from .synth import mixture_field, two_bump_config
from .verify import verify

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_REJECTED = 4
EXIT_FRONTIER = 5
EXIT_USAGE = 64

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "trace": logging.DEBUG}
SYNTHETIC = ("two-bump",)

log = logging.getLogger("morse_forge")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    mesh: Path | None = None
    field_csv: Path | None = None
    values: Path | None = None
    cyclic: bool = False
    synthetic: str | None = None
    seed: int = 0
    flags: dict = dc_field(default_factory=dict)


def _add_input(sp, one_d_only: bool = False):
    if one_d_only:
        sp.add_argument("values", type=Path, help="CSV with one value per line")
        sp.add_argument("--cyclic", action="store_true", help="treat the profile as a cycle")
        return
    src = sp.add_argument_group("input (mesh + field, 1-D values, or a synthetic fixture)")
    src.add_argument("--mesh", type=Path, help="OFF triangle mesh")
    src.add_argument("--field", type=Path, help="CSV vertex_id,value")
    src.add_argument("--values", type=Path, help="1-D CSV, one value per line")
    src.add_argument("--cyclic", action="store_true", help="1-D input is a cycle graph")
    src.add_argument("--synthetic", choices=SYNTHETIC, help="seeded 32x32 fixture instead of files")
    src.add_argument("--seed", type=int, default=0, help="seed for --synthetic")


def _cell(text: str) -> CellId:
    try:
        return CellId.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected dim:index, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="morse-forge", description="Cancel critical pairs of discrete Morse functions.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("analyze", help="critical cells, census and connecting path counts as JSON")
    _add_input(sp)
    sp.add_argument("--report", type=Path, help="write JSON here instead of stdout")
    sp.add_argument("--svg", type=Path, help="schematic of critical cells and paths")

    sp = sub.add_parser("pairs", help="persistence pairs as CSV")
    _add_input(sp)
    sp.add_argument("--out", type=Path, help="write CSV here instead of stdout")

    sp = sub.add_parser("cancel-pair", help="cancel one (k+1, k) pair")
    _add_input(sp)
    sp.add_argument("--p", type=_cell, required=True, metavar="DIM:INDEX")
    sp.add_argument("--q", type=_cell, required=True, metavar="DIM:INDEX")
    sp.add_argument("--epsilon", type=float, help="band below value(q); adaptive if omitted")
    sp.add_argument("--out", type=Path, help="deformed field CSV")
    sp.add_argument("--report", type=Path, help="JSON report")
    sp.add_argument("--census-scan", type=int, metavar="N", help="also sample the deformation")
    sp.add_argument("--svg", type=Path)

    sp = sub.add_parser("simplify", help="cancel every cancelable pair up to a persistence threshold")
    _add_input(sp)
    sp.add_argument("--threshold", type=float, required=True)
    sp.add_argument("--epsilon", type=float, help="fixed per-step band; adaptive if omitted")
    sp.add_argument("--out", type=Path, help="simplified field CSV")
    sp.add_argument("--report", type=Path, help="JSON report")
    sp.add_argument("--census-scan", type=int, metavar="N", help="sample each deformation at N points")
    sp.add_argument("--svg", type=Path)

    sp = sub.add_parser("verify", help="re-check all invariants of a (mesh, field) pair")
    _add_input(sp)
    sp.add_argument("--report", type=Path)

    sp = sub.add_parser("cancel-1d", help="increasing minorant of a 1-D profile")
    _add_input(sp, one_d_only=True)
    sp.add_argument("--margin", type=int, default=1, help="samples kept equal at each end")
    sp.add_argument("--out", type=Path, help="write CSV here instead of stdout")
    return ap


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(ns).items()
             if k not in ("command", "mesh", "field", "values", "cyclic", "synthetic", "seed")}
    cfg = RunConfig(ns.command, getattr(ns, "mesh", None), getattr(ns, "field", None),
                    getattr(ns, "values", None), ns.cyclic, getattr(ns, "synthetic", None),
                    getattr(ns, "seed", 0), flags)
    if cfg.command == "cancel-1d":
        return cfg
    sources = [cfg.mesh is not None or cfg.field_csv is not None, cfg.values is not None, cfg.synthetic is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one input: --mesh with --field, --values, or --synthetic")
    if sources[0] and (cfg.mesh is None or cfg.field_csv is None):
        raise UsageError("--mesh and --field go together")
    if cfg.cyclic and cfg.values is None:
        raise UsageError("--cyclic only applies to --values")
    for key in ("census_scan",):
        if flags.get(key) is not None and flags[key] < 2:
            raise UsageError("--census-scan needs at least 2 samples")
    if flags.get("threshold") is not None and not flags["threshold"] >= 0:
        raise UsageError("--threshold must be >= 0")
    if flags.get("epsilon") is not None and not flags["epsilon"] > 0:
        raise UsageError("--epsilon must be positive")
    return cfg


def load_input(cfg: RunConfig) -> ScalarField:
    """Parse every input before anything is computed."""
    if cfg.synthetic is not None:
        return mixture_field(two_bump_config(cfg.seed))
    if cfg.values is not None:
        return mio.read_1d(cfg.values, cfg.cyclic)
    c = mio.read_off(cfg.mesh)
    return mio.read_field_csv(cfg.field_csv, c)


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _census(g) -> dict[str, int]:
    c0, c1, c2 = g.census()
    return {"c0": c0, "c1": c1, "c2": c2}


def analyze_report(f: ScalarField) -> dict:
    c = f.complex
    g = build_gradient(c, f)
    crit = critical_cells(g)
    crit_set = {cc.cell for cc in crit}
    census = _census(g)
    chi = euler_characteristic(c)
    paths = []
    for cc in crit:
        for term, n in sorted(terminal_counts(g, cc.cell).items()):
            if term in crit_set:
                paths.append({"p": str(cc.cell), "q": str(term), "count": n})
    return {
        "vertices": c.n_vertices,
        "edges": len(c.edges),
        "triangles": len(c.triangles),
        "census": census,
        "euler": chi,
        "morse_relation": census["c0"] - census["c1"] + census["c2"] == chi,
        "critical": [{"cell": str(cc.cell), "index": cc.morse_index, "value": cc.value} for cc in crit],
        "connecting_paths": paths,
    }


def _svg(f: ScalarField, path: Path):
    g = build_gradient(f.complex, f)
    crit = critical_cells(g)
    lines = []
    for p in crit:
        for q in crit:
            if q.morse_index == p.morse_index - 1:
                lines += connecting_paths(g, p, q)
    path.write_text(mio.svg_schematic(f, crit, lines))


def _run(cfg: RunConfig) -> int:
    fl = cfg.flags
    if cfg.command == "cancel-1d":
        h = mio.read_values_csv(cfg.values)
        prof = cancel_1d(h, fl["margin"])
        _emit(mio.format_values_csv(prof.h1), fl.get("out"))
        return EXIT_OK

    f = load_input(cfg)
    c = f.complex
    if cfg.command == "analyze":
        _emit(mio.format_json(analyze_report(f)), fl.get("report"))
        if fl.get("svg"):
            _svg(f, fl["svg"])
        return EXIT_OK

    if cfg.command == "pairs":
        _emit(mio.format_pairs_csv(persistence_pairs(c, f)), fl.get("out"))
        return EXIT_OK

    if cfg.command == "verify":
        checks = verify(f)
        _emit(mio.format_json({"checks": checks, "ok": True}), fl.get("report"))
        return EXIT_OK

    if cfg.command == "cancel-pair":
        g = build_gradient(c, f)
        plan = is_cancelable(g, f, fl["p"], fl["q"], fl.get("epsilon"))
        if not plan:
            log.warning("not cancelable: %s (%s)", plan.reason, plan.detail)
            print(f"rejected: {plan.reason}: {plan.detail}", file=sys.stderr)
            return EXIT_FRONTIER if plan.reason == "FrontierConflict" else EXIT_REJECTED
        f2, g2 = execute(g, f, plan)
        rec = plan_record(plan, f, f2)
        transitions = []
        if fl.get("census_scan"):
            transitions.append(sample_deformation(f, f2, plan, fl["census_scan"]).t_star)
        cen = _census(g2)
        report = {
            "plans": [rec],
            "final_census": cen,
            "euler": cen["c0"] - cen["c1"] + cen["c2"],
            "transitions": transitions,
        }
        if fl.get("out"):
            mio.write_field_csv(fl["out"], f2)
        _emit(mio.format_json(report), fl.get("report"))
        if fl.get("svg"):
            _svg(f2, fl["svg"])
        return EXIT_OK

    if cfg.command == "simplify":
        f2, report = simplify(c, f, fl["threshold"], fl.get("epsilon"), fl.get("census_scan"))
        log.info("executed %d plans, census %s", len(report.plans), report.final_census)
        if fl.get("out"):
            mio.write_field_csv(fl["out"], f2)
        _emit(mio.format_json(report.to_json()), fl.get("report"))
        if fl.get("svg"):
            _svg(f2, fl["svg"])
        return EXIT_OK
    raise UsageError(f"unknown command {cfg.command}")


def configure_logging(env=None):
    level = (env if env is not None else os.environ.get("MORSE_FORGE_LOG", "quiet")).strip().lower()
    if level not in LOG_LEVELS:
        raise UsageError(f"MORSE_FORGE_LOG must be one of {', '.join(LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("morse_forge").setLevel(LOG_LEVELS[level])


def main(argv=None) -> int:
    try:
        configure_logging()
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return _run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except FrontierConflict as exc:
        print(f"frontier conflict: {exc}", file=sys.stderr)
        return EXIT_FRONTIER
    except MorseError as exc:
        print(f"error: {exc.tag}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
