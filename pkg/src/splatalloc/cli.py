"""Command-line front end.

Subcommands wire the pyramid, allocation, budget, and fitting modules into
reproducible single-line pipelines.  Exit codes: 0 success, 2 usage or I/O
problems, 3 domain errors (budget out of range, degenerate baseline).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .budget import BudgetQuery, build_table, load_table, match_budget, save_table, save_table_json
from .cameras import align_target, estimate_alignment, pose_from_json, pose_to_json, transfer_focal
from .errors import BudgetRangeError, DegenerateBaselineError
from .fitting import FitConfig, run_strategy_experiment
from .grids import (
    StrategyKind,
    load_pyramid,
    save_pyramid,
    sobel_frequency_pyramid,
    uniform_random_pyramid,
)
from .masks import compute_masks, save_masks
from .pgm import read_image

_STRATEGIES = {
    "gradient": StrategyKind.GRADIENT_SCORE,
    "random": StrategyKind.UNIFORM_RANDOM,
    "sobel": StrategyKind.SOBEL_FREQUENCY,
}


def _fit_config(args) -> FitConfig:
    return FitConfig(
        iterations=args.iterations,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )


def cmd_score(args) -> int:
    if args.levels < 2:
        raise ValueError(f"--levels must be at least 2, got {args.levels}")
    image = read_image(args.image)
    if args.strategy == "sobel":
        pyramid = sobel_frequency_pyramid(image, args.levels)
    else:
        shrink = 2 ** (args.levels - 1)
        h, w = image.shape
        if h % shrink or w % shrink:
            raise ValueError(
                f"image {h}x{w} does not split into {args.levels} halving levels"
            )
        pyramid = uniform_random_pyramid(
            1, args.levels, h // shrink, w // shrink, args.seed
        )
    save_pyramid(pyramid, args.out)
    return 0


def cmd_table(args) -> int:
    table = build_table(load_pyramid(args.pyramid))
    save_table(table, args.out)
    if args.json:
        save_table_json(table, args.json)
    return 0


def cmd_match(args) -> int:
    if args.table:
        table = load_table(args.table)
    else:
        table = build_table(load_pyramid(args.pyramid))
    tau, achieved = match_budget(table, BudgetQuery(target=args.budget))
    print(f"tau={tau} achieved={achieved} slack={args.budget - achieved}")
    return 0


def cmd_alloc(args) -> int:
    pyramid = load_pyramid(args.pyramid)
    if args.budget is not None:
        tau, _ = match_budget(build_table(pyramid), BudgetQuery(target=args.budget))
    else:
        tau = args.tau
    masks = compute_masks(pyramid, tau)
    save_masks(masks, tau, args.out)
    return 0


def cmd_fit2d(args) -> int:
    target = read_image(args.image)
    report = run_strategy_experiment(
        target, args.budget_fraction, _STRATEGIES[args.strategy], _fit_config(args)
    )
    payload = json.dumps(report.to_json())
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(payload)
            fh.write("\n")
    print(payload)
    return 0


def cmd_compare(args) -> int:
    if not 0.0 < args.budget_fraction <= 1.0:
        raise ValueError(
            f"--budget-fraction must be in (0, 1], got {args.budget_fraction}"
        )
    if args.seeds < 1:
        raise ValueError(f"--seeds must be at least 1, got {args.seeds}")
    target = read_image(args.image)
    rows = []
    for name, kind in _STRATEGIES.items():
        for seed in range(args.seeds):
            config = FitConfig(
                iterations=args.iterations,
                learning_rate=args.learning_rate,
                seed=seed,
            )
            report = run_strategy_experiment(
                target, args.budget_fraction, kind, config
            )
            rows.append(report)
            print(f"{name} seed={seed} mse={report.final_mse:.8e}")
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write("strategy,seed,budget_fraction,achieved_count,tau,final_mse\n")
        for r in rows:
            fh.write(
                f"{r.strategy},{r.seed},{r.budget_fraction},"
                f"{r.achieved_count},{r.tau},{r.final_mse:.12e}\n"
            )
    return 0


def cmd_align(args) -> int:
    with open(args.bundle, encoding="ascii") as fh:
        bundle = json.load(fh)
    try:
        gt = [pose_from_json(m) for m in bundle["gt"]]
        pred = [pose_from_json(m) for m in bundle["pred"]]
        target = pose_from_json(bundle["target"])
    except KeyError as exc:
        raise ValueError(f"bundle is missing key {exc}") from None
    if len(gt) < 2 or len(pred) < 2:
        raise ValueError("bundle needs at least two gt and two pred poses")
    transform = estimate_alignment(gt[0], gt[1], pred[0], pred[1])
    aligned = align_target(transform, target)
    focal = None
    if "focals" in bundle:
        f = bundle["focals"]
        try:
            focal = transfer_focal(f["pred_n1"], f["gt_n1"], f["gt_target"])
        except KeyError as exc:
            raise ValueError(f"focals block is missing key {exc}") from None
    print(json.dumps({"pose": pose_to_json(aligned), "focal": focal}))
    return 0


def _add_fit_flags(parser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="experiment seed")
    parser.add_argument(
        "--iterations", type=int, default=150, help="gradient-descent steps per fit"
    )
    parser.add_argument(
        "--learning-rate", type=float, default=20.0, help="fixed descent step"
    )


def build_parser() -> argparse.ArgumentParser:
    version = argparse.ArgumentParser(add_help=False)
    version.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )

    parser = argparse.ArgumentParser(
        prog="splatalloc",
        description="Budgeted multi-level Gaussian allocation tools.",
        parents=[version],
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser(
        "score", parents=[version], help="build a score pyramid from an image"
    )
    p.add_argument("--image", required=True, help="input PGM or PPM")
    p.add_argument("--levels", type=int, required=True, help="pyramid levels, >= 2")
    p.add_argument("--strategy", choices=["sobel", "random"], required=True)
    p.add_argument("--seed", type=int, default=0, help="seed for random scores")
    p.add_argument("--out", required=True, help="output pyramid JSON")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser(
        "table", parents=[version], help="precompute the threshold-budget table"
    )
    p.add_argument("--pyramid", required=True, help="pyramid JSON")
    p.add_argument("--out", required=True, help="output binary table")
    p.add_argument("--json", help="optional JSON mirror path")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser(
        "match", parents=[version], help="find the threshold matching a budget"
    )
    p.add_argument("--pyramid", required=True, help="pyramid JSON")
    p.add_argument("--budget", type=int, required=True, help="target Gaussian count")
    p.add_argument("--table", help="reuse a saved binary table")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser(
        "alloc", parents=[version], help="write allocation masks for a threshold"
    )
    p.add_argument("--pyramid", required=True, help="pyramid JSON")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--tau", type=float, help="score threshold (inf allowed)")
    group.add_argument("--budget", type=int, help="Gaussian budget to match first")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_alloc)

    p = sub.add_parser(
        "fit2d", parents=[version], help="run one allocation-strategy experiment"
    )
    p.add_argument("--image", required=True, help="target PGM or PPM")
    p.add_argument(
        "--budget-fraction", type=float, required=True, help="budget as a fraction"
    )
    p.add_argument("--strategy", choices=sorted(_STRATEGIES), required=True)
    _add_fit_flags(p)
    p.add_argument("--out", help="optional report JSON path")
    p.set_defaults(func=cmd_fit2d)

    p = sub.add_parser(
        "compare", parents=[version], help="compare strategies across seeds"
    )
    p.add_argument("--image", required=True, help="target PGM or PPM")
    p.add_argument(
        "--budget-fraction", type=float, required=True, help="budget as a fraction"
    )
    p.add_argument("--seeds", type=int, required=True, help="number of seeds")
    p.add_argument("--iterations", type=int, default=150)
    p.add_argument("--learning-rate", type=float, default=20.0)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser(
        "align", parents=[version], help="align a ground-truth pose and focal"
    )
    p.add_argument(
        "--bundle",
        required=True,
        help="JSON with gt/pred pose lists, a target pose, and optional focals",
    )
    p.set_defaults(func=cmd_align)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (BudgetRangeError, DegenerateBaselineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
