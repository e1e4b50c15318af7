"""Command-line entry point: ``setbo {run,kernel-bench,afo-bench,nn-search}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from ..boloop import BoConfig
from ..objectives import active_nn_search, linear_scan, make_point_cloud_pool, read_xyz
from .bench import AFO_BENCH_COLUMNS, KERNEL_BENCH_COLUMNS, afo_bench, kernel_bench
from .config import ConfigError, load_config
from .results import ResultTable
from .runner import EXIT_BAD_CONFIG, EXIT_OK, run_experiment

NN_COLUMNS = ("iteration", "candidate_index", "chamfer", "best_so_far")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _bench_dir(kind: str, args_dict: dict, base) -> tuple[Path, str]:
    digest = hashlib.sha256(json.dumps({"kind": kind, **args_dict}, sort_keys=True).encode()).hexdigest()
    out = Path(base) / f"{kind}-{digest[:12]}"
    out.mkdir(parents=True, exist_ok=True)
    return out, digest


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if args.seed is not None:
        cfg.seeds = [args.seed]
    return run_experiment(cfg, base=args.out, jobs=args.jobs)


def _cmd_kernel_bench(args) -> int:
    params = {"m": args.m, "d": args.d, "L": args.L, "repeats": args.repeats, "seed": args.seed}
    out, digest = _bench_dir("kernel-bench", params, args.out)
    rows = kernel_bench(args.m, args.d, args.L, args.repeats, seed=args.seed)
    ResultTable(KERNEL_BENCH_COLUMNS, digest, rows, path=str(out / "kernel_bench.csv"))
    for row in rows:
        print(
            f"L={row[0]:>5}  k = {row[2]:.4e} ± {row[3]:.3e}   "
            f"time = ({row[4]:.3e} ± {row[5]:.3e}) s"
        )
    print(f"exact value {rows[0][6]:.4e}; written to {out}")
    return EXIT_OK


def _cmd_afo_bench(args) -> int:
    params = {"m": args.m, "seeds": args.seeds, "n_obs": args.n_obs}
    out, digest = _bench_dir("afo-bench", params, args.out)
    table = ResultTable(AFO_BENCH_COLUMNS, digest, path=str(out / "afo_bench.csv"))
    wins = 0
    for row in afo_bench(args.m, args.seeds, args.n_obs):
        table.append(row)
        wins += row[4] <= row[5]
        print(f"m={row[0]:>3} seed={row[1]}  f(Xc)={row[4]:.4f}  f(Xu)={row[5]:.4f}")
    print(f"constrained <= unconstrained in {wins}/{len(table.rows)} cells; written to {out}")
    return EXIT_OK


def _cmd_nn_search(args) -> int:
    if args.pool_dir is not None:
        files = sorted(Path(args.pool_dir).glob("*.xyz"))
        if not files or args.query is None:
            print("error: --pool-dir needs *.xyz files and --query", file=sys.stderr)
            return EXIT_BAD_CONFIG
        pool = np.stack([read_xyz(f) for f in files])
        query = read_xyz(args.query)
    else:
        pool, query = make_point_cloud_pool(args.pool_size, args.points, args.seed)
    params = {
        "pool": args.pool_dir or args.pool_size,
        "query": args.query,
        "points": args.points,
        "budget": args.budget,
        "L": args.L,
        "seed": args.seed,
    }
    out, digest = _bench_dir("nn-search", params, args.out)
    L = None if args.L == 0 or args.L >= pool.shape[1] else args.L
    cfg = BoConfig(budget=args.budget, n_init=min(5, args.budget), L=L, seed=args.seed)
    best, history = active_nn_search(query, pool, args.budget, cfg)
    table = ResultTable(NN_COLUMNS, digest, path=str(out / "nn_search.csv"))
    for rec in history:
        table.append((rec.iteration, rec.candidate_index, rec.observed_y, rec.best_so_far))
    truth, dist = linear_scan(query, pool)
    print(f"selected {best}, true nearest neighbor {truth} (distance {dist:.4f}); written to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setbo", description="Bayesian optimization over sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the experiment described by a JSON config")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", default=None, help="output root (default: config 'out' or ./results)")
    p.add_argument("--seed", type=int, default=None, help="run only this seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("kernel-bench", help="subsampled kernel value and cost versus L")
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--L", type=_int_list, default=[1, 2, 5, 10, 20, 50, 100, 200, 500, 1000])
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    p.set_defaults(func=_cmd_kernel_bench)

    p = sub.add_parser("afo-bench", help="constrained vs unconstrained acquisition search")
    p.add_argument("--m", type=_int_list, default=[2, 4, 8, 16])
    p.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4])
    p.add_argument("--n-obs", type=int, default=20)
    p.add_argument("--out", default="results")
    p.set_defaults(func=_cmd_afo_bench)

    p = sub.add_parser("nn-search", help="active nearest-neighbor search over point clouds")
    p.add_argument("--pool-size", type=int, default=100)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--pool-dir", default=None, help="directory of .xyz clouds (overrides the synthetic pool)")
    p.add_argument("--query", default=None, help=".xyz query cloud for --pool-dir")
    p.add_argument("--budget", type=int, default=40)
    p.add_argument("--L", type=int, default=16, help="subset size (0 = exact kernel)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    p.set_defaults(func=_cmd_nn_search)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
