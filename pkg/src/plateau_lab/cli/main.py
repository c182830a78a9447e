"""Command line entry point: ``plateau-lab {run,list,table,plot}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError
from ..plmap import PLMap
from ..volume import ALL_VOLUMES, VolumeDefinition
from . import artifacts
from .runner import build_config, run_scenario
from .scenarios import REGISTRY, SCENARIOS


def _add_common(p):
    p.add_argument("--level", type=int, help="mesh level (scenarios with a level parameter)")
    p.add_argument("--mu", help="volume definition (scenarios with a mu parameter)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--out", help="output directory (default runs/)")
    p.add_argument("--tol-scale", type=float, dest="tol_scale", help="multiply every tolerance")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plateau-lab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenarios and write artifacts")
    run.add_argument("scenarios", nargs="*", help="scenario names, or 'all'")
    run.add_argument("--config", help="TOML config file")
    _add_common(run)

    ls = sub.add_parser("list", help="list shipped scenarios")
    ls.add_argument("-v", "--verbose", action="store_true", help="also print default parameters")

    tab = sub.add_parser("table", help="Jacobian constants as CSV")
    tab.add_argument("--norms", nargs="+", default=list(artifacts.NAMED_NORMS), choices=list(artifacts.NAMED_NORMS))
    tab.add_argument("--mu", nargs="+", default=[m.value for m in ALL_VOLUMES])
    tab.add_argument("--out", help="CSV path (default stdout)")

    pl = sub.add_parser("plot", help="SVG of a saved map (*.map.json)")
    pl.add_argument("map", help="map JSON written by `run`")
    pl.add_argument("--out", help="SVG path (default: next to the map)")
    pl.add_argument("--q-max", type=float, default=3.0, help="Q at the top of the colour scale")
    return ap


def cmd_run(args) -> int:
    names = args.scenarios
    if names == ["all"]:
        names = [s.name for s in SCENARIOS]
    if not names and not args.config:
        print("no scenario given", file=sys.stderr)
        return 2
    names = names or [None]
    ok = True
    for name in names:
        try:
            cfg = build_config(name, args.config, args.level, args.mu, args.seed, args.tol_scale, args.out)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        art = run_scenario(cfg)
        n_pass = sum(a["pass"] for a in art.payload["assertions"])
        n_all = len(art.payload["assertions"])
        print(f"{'PASS' if art.passed else 'FAIL'} {cfg.scenario}: {n_pass}/{n_all} assertions -> {art.result_json}")
        for a in art.payload["assertions"]:
            if not a["pass"]:
                print(f"    failed {a['name']}: got {a['got']!r}, expected {a['expected']!r}, tol {a['tol']!r}")
        ok &= art.passed
    return 0 if ok else 1


def cmd_list(args) -> int:
    for s in SCENARIOS:
        tag = f"[criterion {s.criterion}]" if s.criterion else ""
        print(f"{s.name:28s} {s.description} {tag}".rstrip())
        if args.verbose:
            for k, v in s.defaults.items():
                print(f"    {k} = {v!r}")
    return 0


def cmd_table(args) -> int:
    mus = [VolumeDefinition.parse(m) for m in args.mu]
    rows = artifacts.jacobian_rows([(n, artifacts.NAMED_NORMS[n]()) for n in args.norms], mus)
    text = artifacts.rows_to_csv(rows)
    if args.out:
        artifacts.write_text(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_plot(args) -> int:
    path = Path(args.map)
    u = PLMap.from_json(path.read_text(encoding="utf-8"))
    out = Path(args.out) if args.out else path.with_name(path.name.replace(".map.json", "") + ".svg")
    artifacts.write_text(out, artifacts.plot_map_svg(u, path.stem, q_hi=args.q_max))
    print(out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "list": cmd_list, "table": cmd_table, "plot": cmd_plot}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
