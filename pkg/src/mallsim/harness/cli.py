"""Command line entry points: run, serve, visgrid, validate."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import MallSimError
from ..geometry import perimeter_points
from ..svp import OccupancyGrid, SvpConfig, compute_visibility_grid
from .engine import Engine, load_bundled_map
from .scenario import load_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mallsim",
                                     description="Desk-scale mall guidance robot simulator")
    sub = parser.add_subparsers(dest="cmd", required=True)

    run_p = sub.add_parser("run", help="run a scenario headless and write the transcript")
    run_p.add_argument("--scenario", required=True, help="bundled scenario name or path")
    run_p.add_argument("--map", default=None, help="override the scenario map")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--out", default=None, help="transcript output path (JSONL)")
    run_p.add_argument("--lang", choices=("en", "fi"), default=None)

    serve_p = sub.add_parser("serve", help="run the tick loop with a WebSocket UI bridge")
    serve_p.add_argument("--scenario", required=True)
    serve_p.add_argument("--map", default=None)
    serve_p.add_argument("--seed", type=int, default=None)
    serve_p.add_argument("--port", type=int, default=8765)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--rate", type=float, default=None, help="ticks per second")
    serve_p.add_argument("--max-ticks", type=int, default=None)
    serve_p.add_argument("--lang", choices=("en", "fi"), default=None)

    vis_p = sub.add_parser("visgrid", help="compute and export a landmark visibility grid")
    vis_p.add_argument("--map", default="minimall")
    vis_p.add_argument("--landmark", required=True)
    vis_p.add_argument("--out", default=None, help="output basename (.pgm and .txt)")

    val_p = sub.add_parser("validate", help="check a map or scenario file")
    val_p.add_argument("--map", default=None)
    val_p.add_argument("--scenario", default=None)
    return parser


def _scenario_from_args(args) -> object:
    scenario = load_scenario(args.scenario)
    if getattr(args, "map", None):
        scenario.map_name = args.map
    if getattr(args, "seed", None) is not None:
        scenario.seed = args.seed
    if getattr(args, "lang", None):
        scenario.language = args.lang
    return scenario


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.cmd == "run":
            scenario = _scenario_from_args(args)
            transcript = Engine(scenario).run()
            out = args.out or f"{scenario.name}.jsonl"
            transcript.write(out)
            print(f"wrote {len(transcript.records)} records to {out}")
            return 0
        if args.cmd == "serve":
            from .server import serve

            scenario = _scenario_from_args(args)
            print(f"serving {scenario.name} on ws://{args.host}:{args.port}")
            serve(scenario, host=args.host, port=args.port, rate=args.rate,
                  max_ticks=args.max_ticks)
            return 0
        if args.cmd == "visgrid":
            smap = load_bundled_map(args.map)
            region_id = next(r for r in sorted(smap.regions) if smap.regions[r].grid is not None)
            grid = OccupancyGrid.from_region(smap.regions[region_id])
            cfg = SvpConfig()
            poly = smap.landmark_polygon(args.landmark, region=region_id)
            samples = perimeter_points(poly, cfg.samples_per_landmark)
            vis = compute_visibility_grid(grid, args.landmark, samples)
            base = args.out or f"visgrid_{args.landmark}"
            Path(f"{base}.pgm").write_bytes(vis.to_pgm())
            Path(f"{base}.txt").write_text(vis.to_text_matrix(), encoding="utf-8")
            print(f"wrote {base}.pgm and {base}.txt")
            return 0
        if args.cmd == "validate":
            if not args.map and not args.scenario:
                print("validate needs --map and/or --scenario", file=sys.stderr)
                return 2
            if args.map:
                path = Path(args.map)
                if path.exists():
                    from ..semantic_map import load_map

                    load_map(path.read_text(encoding="utf-8"))
                else:
                    load_bundled_map(args.map)
                print(f"map {args.map}: ok")
            if args.scenario:
                load_scenario(args.scenario)
                print(f"scenario {args.scenario}: ok")
            return 0
    except MallSimError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
