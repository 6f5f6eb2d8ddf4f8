"""Command-line entry point.

Subcommands: train (the multi-run protocol on one model config),
evaluate (a checkpoint against a dataset, or a standalone prediction
file), and experiment (the paired plain-vs-mixing studies). Exit codes:
0 success, 2 usage or config error, 3 data or checkpoint error,
1 internal error.
"""

import argparse
import os
import sys
import traceback

from . import checkpoint as ckpt
from .config import RunConfig, flat_items, load_config_file, render_config
from .data import PROTECTED_COLUMNS, dump_encoded_csv, encode, parse_adult, split
from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    FairnormError,
)
from .experiments import EXPERIMENTS, run_experiment, train_config_from, model_config_from
from .metrics import PredictionSet, full_report, read_predictions_csv
from .numeric import sigmoid
from .output import atomic_write_text, write_csv_rows, write_json
from .training import run_protocol

TRAINLOG_FIELDS = ("epoch", "loss", "val_ap", "val_dp", "val_eop", "val_eod")
PER_RUN_FIELDS = ("run", "split_seed", "best_epoch", "ap", "dp", "eop", "eod")


def _add_config_flags(p):
    p.add_argument("--config", help="path to a key = value config file")
    p.add_argument("--data", help="dataset CSV path (data.path)")
    p.add_argument("--out", help="output directory (out)")
    p.add_argument("--seed", type=int, help="base seed (seed)")
    p.add_argument("--runs", type=int, help="independent runs (train.runs)")
    p.add_argument("--epochs", type=int, help="epochs per run (train.epochs)")
    p.add_argument("--batch-size", type=int, help="mini-batch size (train.batch_size)")
    p.add_argument("--lr", type=float, help="Adam learning rate (train.lr)")
    p.add_argument("--alpha", type=float, help="mixing concentration (mixnorm.alpha)")
    p.add_argument(
        "--protected-attr",
        choices=sorted(PROTECTED_COLUMNS),
        help="protected attribute (data.protected)",
    )
    p.add_argument("--threshold", type=float, help="hard-label threshold (eval.threshold)")
    p.add_argument(
        "--no-groupmixnorm",
        action="store_true",
        help="disable the mixing layers (model.groupmixnorm = false)",
    )
    p.add_argument(
        "--dump-encoded",
        action="store_true",
        help="also write the encoded dataset as CSV (data.dump_encoded)",
    )


def resolve_config(args):
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    overrides = {
        "data.path": args.data,
        "out": args.out,
        "seed": args.seed,
        "train.runs": args.runs,
        "train.epochs": args.epochs,
        "train.batch_size": args.batch_size,
        "train.lr": args.lr,
        "mixnorm.alpha": args.alpha,
        "data.protected": args.protected_attr,
        "eval.threshold": args.threshold,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if args.no_groupmixnorm:
        values["model.groupmixnorm"] = False
    if args.dump_encoded:
        values["data.dump_encoded"] = True
    return RunConfig(values)


def _require_data(cfg):
    if not cfg["data.path"]:
        raise ConfigError("data.path is required (set it or pass --data)")
    return cfg["data.path"]


def _prepare_out(cfg):
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    atomic_write_text(os.path.join(out, "resolved_config.txt"), render_config(cfg))
    return out


def _report_row(r):
    return {
        "run": r.run,
        "split_seed": r.split_seed,
        "best_epoch": r.best_epoch,
        "ap": r.report.ap,
        "dp": r.report.dp,
        "eop": r.report.eop,
        "eod": r.report.eod,
    }


def cmd_train(args):
    cfg = resolve_config(args)
    path = _require_data(cfg)
    out = _prepare_out(cfg)
    raw = parse_adult(path)
    result = run_protocol(
        raw,
        cfg["data.protected"],
        model_config_from(cfg, cfg["model.groupmixnorm"]),
        train_config_from(cfg),
    )
    if cfg["data.dump_encoded"]:
        dump_encoded_csv(encode(raw, cfg["data.protected"]), os.path.join(out, "encoded.csv"))
    doc = {
        "command": "train",
        "attribute": result.attribute,
        "threshold": result.threshold,
        "runs": len(result.per_run),
        "groupmixnorm": cfg["model.groupmixnorm"],
        "mean": result.mean,
        "std": result.std,
        "per_run": [
            dict(_report_row(r), report=r.report.to_dict()) for r in result.per_run
        ],
    }
    write_json(os.path.join(out, "aggregate.json"), doc)
    write_csv_rows(
        os.path.join(out, "per_run.csv"),
        PER_RUN_FIELDS,
        [_report_row(r) for r in result.per_run],
    )
    snapshot = flat_items(cfg)
    for r in result.per_run:
        write_csv_rows(
            os.path.join(out, f"trainlog_run{r.run}.csv"), TRAINLOG_FIELDS, r.log
        )
        ckpt.save(
            r.model.stack,
            dict(snapshot, **{"run.index": str(r.run), "run.split_seed": str(r.split_seed)}),
            os.path.join(out, f"checkpoint_run{r.run}.txt"),
        )
    print(f"wrote {out}/aggregate.json (mean AP {result.mean['ap']})")
    return 0


def _evaluate_checkpoint(args):
    stack, meta = ckpt.load(args.checkpoint)
    if not args.data:
        raise ConfigError("evaluate needs --data together with --checkpoint")
    raw = parse_adult(args.data)
    attribute = meta.get("data.protected", "gender")
    withheld = args.protected_attr == "none"
    ds = encode(raw, attribute)
    if args.split != "all":
        try:
            spec_args = {
                "train": float(meta["split.train"]),
                "val": float(meta["split.val"]),
                "test": float(meta["split.test"]),
                "seed": int(meta["run.split_seed"]),
            }
        except (KeyError, ValueError) as exc:
            raise CheckpointError(
                f"checkpoint lacks split metadata for --split {args.split}: {exc}"
            ) from None
        from .data import SplitSpec

        parts = split(ds, SplitSpec(**spec_args))
        ds = {"train": parts[0], "val": parts[1], "test": parts[2]}[args.split]
    if ds.n_features != stack.in_dim:
        raise CheckpointError(
            f"dataset encodes to {ds.n_features} features but the checkpoint "
            f"expects {stack.in_dim}"
        )
    threshold = args.threshold
    if threshold is None:
        threshold = float(meta.get("eval.threshold", 0.5))
    scores = sigmoid(stack.forward(ds.X, training=False)).reshape(-1)
    groups = ds.s
    if withheld:
        print(
            "warning: protected attribute withheld; fairness metrics are skipped",
            file=sys.stderr,
        )
        groups = [0] * ds.n_rows
    pred = PredictionSet(scores, ds.y, groups, threshold=threshold)
    return full_report(pred)


def cmd_evaluate(args):
    if bool(args.checkpoint) == bool(args.predictions):
        raise ConfigError("evaluate needs exactly one of --checkpoint or --predictions")
    if args.predictions:
        threshold = 0.5 if args.threshold is None else args.threshold
        pred = read_predictions_csv(args.predictions, threshold=threshold)
        report = full_report(pred)
    else:
        report = _evaluate_checkpoint(args)
    doc = report.to_dict()
    if args.out:
        write_json(args.out, doc)
        print(f"wrote {args.out}")
    else:
        import json

        print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_experiment(args):
    cfg = resolve_config(args)
    path = _require_data(cfg)
    out = _prepare_out(cfg)
    raw = parse_adult(path)
    result = run_experiment(args.name, raw, cfg)
    write_json(os.path.join(out, "aggregate.json"), result["doc"])
    rows = result["rows"]
    write_csv_rows(os.path.join(out, "per_run.csv"), list(rows[0]), rows)
    if "projections" in result:
        write_csv_rows(
            os.path.join(out, "projections.csv"),
            ("model", "pc1", "pc2", "y", "s"),
            result["projections"],
        )
        write_json(
            os.path.join(out, "probes.json"),
            {
                "cosine_per_run": result["doc"]["cosine_per_run"],
                "cosine_mean": result["doc"]["cosine_mean"],
            },
        )
    print(f"wrote {out}/aggregate.json")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fairnorm",
        description="Fair tabular classification via group-statistics mixing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run the multi-run training protocol")
    _add_config_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("evaluate", help="evaluate a checkpoint or prediction file")
    p_eval.add_argument("--checkpoint", help="checkpoint file written by train")
    p_eval.add_argument("--data", help="dataset CSV path")
    p_eval.add_argument("--predictions", help="CSV of score,y_true,group rows")
    p_eval.add_argument(
        "--protected-attr",
        choices=sorted(PROTECTED_COLUMNS) + ["none"],
        help="'none' withholds the protected attribute",
    )
    p_eval.add_argument("--split", choices=("train", "val", "test", "all"), default="test")
    p_eval.add_argument("--threshold", type=float)
    p_eval.add_argument("--out", help="write the report JSON here instead of stdout")
    p_eval.set_defaults(func=cmd_evaluate)

    p_exp = sub.add_parser("experiment", help="run a paired comparison study")
    p_exp.add_argument("name", choices=EXPERIMENTS)
    _add_config_flags(p_exp)
    p_exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FairnormError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
