"""``rkrank`` command line: simulate, rank, track, spectrum."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ..errors import RankingError
from ..graph import erdos_renyi, laplacian_extreme_eigenvalues, read_edge_list
from .config import ESTIMATORS, STOP_RULES, ExperimentConfig, TrackConfig, read_config_file
from .ranking import cmd_rank, parse_match_file, ranking_csv
from .simulate import cmd_simulate, results_csv, results_json, write_results
from .track import cmd_track, track_csv, track_json

__all__ = ["main", "build_parser"]

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _flag_name(field: str) -> str:
    return "lambda" if field == "lam" else field.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rkrank", description="Rank aggregation with randomized Kaczmarz.")
    sub = parser.add_subparsers(dest="command", required=True)

    # defaults are None so that config-file values survive unless a flag is given
    sim = sub.add_parser("simulate", help="synthetic BTL experiments")
    sim.add_argument("--config", help="key=value file; flags override it")
    sim.add_argument("--n", type=int)
    sim.add_argument("--p", type=float)
    sim.add_argument("--graph-file", help="fixed edge-list graph instead of Erdős–Rényi draws")
    sim.add_argument("--k", help="comparisons per edge; comma-separated for several")
    sim.add_argument("--epsilon", type=float)
    sim.add_argument("--estimators", help=f"comma-separated subset of {','.join(ESTIMATORS)}")
    sim.add_argument("--lambda", dest="lam", type=float, help="ridge penalty for MLE")
    sim.add_argument("--stop", choices=STOP_RULES)
    sim.add_argument("--stop-window", type=int)
    sim.add_argument("--stop-tol", type=float)
    sim.add_argument("--stop-k", type=int, help="K for the topk rule")
    sim.add_argument("--stop-m", type=int, help="M for the topk rule")
    sim.add_argument("--max-iters", type=int)
    sim.add_argument("--trials", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--warm-start", action="store_const", const=True)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--out", help="CSV path; JSON and timing files are written next to it")

    rank = sub.add_parser("rank", help="rank players from a match file")
    rank.add_argument("--matches", required=True)
    rank.add_argument("--epsilon", type=float, default=1.0)
    rank.add_argument("--estimators", default="RK", choices=ESTIMATORS, type=str.upper)
    rank.add_argument("--lambda", dest="lam", type=float, default=0.0)
    rank.add_argument("--stop-window", type=int, default=500)
    rank.add_argument("--stop-tol", type=float, default=1e-10)
    rank.add_argument("--max-iters", type=int, default=200_000)
    rank.add_argument("--seed", type=int, default=0)
    rank.add_argument("--out")

    track = sub.add_parser("track", help="tracking under drifting weights")
    track.add_argument("--config")
    track.add_argument("--n", type=int)
    track.add_argument("--p", type=float)
    track.add_argument("--events", type=int)
    track.add_argument("--sigma", type=float)
    track.add_argument("--c", type=float, help="constant step size in [0, 1]")
    track.add_argument("--endpoint", choices=("min", "max", "random"))
    track.add_argument("--epsilon", type=float)
    track.add_argument("--seed", type=int)
    track.add_argument("--out")

    spec = sub.add_parser("spectrum", help="extreme Laplacian eigenvalues of a graph")
    spec.add_argument("--graph-file")
    spec.add_argument("--n", type=int)
    spec.add_argument("--p", type=float)
    spec.add_argument("--seed", type=int, default=0)
    return parser


def _coerce(field: dataclasses.Field, raw: str) -> Any:
    name = field.name
    if name in ("k", "estimators"):
        return raw
    default = field.default
    if isinstance(default, bool):
        low = raw.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise RankingError(f"{_flag_name(name)}: expected a boolean, got {raw!r}")
    if name in ("graph_file", "out"):
        return raw
    kind = type(default)
    try:
        return kind(raw)
    except ValueError:
        raise RankingError(f"{_flag_name(name)}: cannot parse {raw!r}") from None


def merge_config(cls: type, args: argparse.Namespace) -> Any:
    """Dataclass defaults, then the config file, then explicit flags."""
    fields = {f.name: f for f in dataclasses.fields(cls)}
    values: dict[str, Any] = {}
    if getattr(args, "config", None):
        for key, raw in read_config_file(args.config).items():
            key = "lam" if key == "lambda" else key
            if key not in fields:
                raise RankingError(f"{args.config}: unknown key {key!r}")
            values[key] = _coerce(fields[key], raw)
    for name in fields:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return cls(**values)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")


def _run(args: argparse.Namespace) -> None:
    if args.command == "simulate":
        config = merge_config(ExperimentConfig, args)
        result = cmd_simulate(config)
        if config.out is None:
            sys.stdout.write(results_csv(result))
            sys.stderr.write(results_json(result))
        else:
            write_results(result, config.out)
    elif args.command == "rank":
        rows = cmd_rank(parse_match_file(args.matches), epsilon=args.epsilon, estimator=args.estimators,
                        lam=args.lam, seed=args.seed, stop_window=args.stop_window, stop_tol=args.stop_tol,
                        max_iters=args.max_iters)
        _emit(ranking_csv(rows), args.out)
    elif args.command == "track":
        config = merge_config(TrackConfig, args)
        result = cmd_track(config)
        if config.out is None:
            sys.stdout.write(track_csv(result))
            sys.stderr.write(track_json(result))
        else:
            _emit(track_csv(result), config.out)
            _emit(track_json(result), str(Path(config.out).with_suffix(".json")))
    elif args.command == "spectrum":
        if args.graph_file:
            g = read_edge_list(args.graph_file)
        elif args.n is not None and args.p is not None:
            g = erdos_renyi(args.n, args.p, seed=args.seed)
        else:
            raise RankingError("spectrum needs --graph-file or both --n and --p")
        spec = laplacian_extreme_eigenvalues(g)
        d = g.degrees.astype(float)
        doc = {
            "n": g.n,
            "m": g.m,
            "connected": spec.connected,
            "lambda_min_nonzero": spec.lambda_min_nonzero,
            "lambda_max": spec.lambda_max,
            # per-step contraction factor of the expected squared error
            "kaczmarz_rate": spec.lambda_min_nonzero ** 2 / float(np.sum(d * d + d)),
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _run(args)
    except (RankingError, OSError) as exc:
        print(f"rkrank {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
