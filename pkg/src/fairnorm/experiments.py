"""Paired plain-vs-mixing experiment drivers.

Each driver runs the multi-run protocol for a plain classifier and for
the same architecture with mixing layers enabled, on identical split
seeds, and returns a JSON-ready comparison document plus flat CSV rows.
"""

from dataclasses import replace

import numpy as np

from .analysis import auxiliary_probe, extract_embeddings, kernel_pca_sigmoid
from .data import SplitSpec, encode, group_ids_for, split
from .errors import DataError, DomainError
from .groupmix import MixNormConfig
from .metrics import PredictionSet, full_report
from .rng import stream
from .training import (
    ModelConfig,
    TrainConfig,
    finetune,
    run_protocol,
)

EXPERIMENTS = ("tradeoff", "newgroups", "debias", "representation")


def model_config_from(cfg, use_groupmixnorm):
    return ModelConfig(
        hidden_dims=tuple(cfg["model.hidden"]),
        use_groupmixnorm=use_groupmixnorm,
        mixnorm=MixNormConfig(
            alpha=cfg["mixnorm.alpha"], epsilon=cfg["mixnorm.epsilon"]
        ),
    )


def train_config_from(cfg):
    return TrainConfig(
        epochs=cfg["train.epochs"],
        batch_size=cfg["train.batch_size"],
        lr=cfg["train.lr"],
        runs=cfg["train.runs"],
        seed=cfg["seed"],
        split=SplitSpec(cfg["split.train"], cfg["split.val"], cfg["split.test"]),
        threshold=cfg["eval.threshold"],
    )


def _summary(result):
    return {"mean": result.mean, "std": result.std}


def _per_run_rows(tag, result):
    rows = []
    for r in result.per_run:
        rows.append(
            {
                "model": tag,
                "run": r.run,
                "split_seed": r.split_seed,
                "best_epoch": r.best_epoch,
                "ap": r.report.ap,
                "dp": r.report.dp,
                "eop": r.report.eop,
                "eod": r.report.eod,
            }
        )
    return rows


def paired_protocols(raw, cfg, attribute, train_group_filter=None):
    """The two protocols on identical seeds: mixing on, mixing off."""
    train_cfg = train_config_from(cfg)
    results = {}
    for tag, flag in (("groupmixnorm", True), ("plain", False)):
        results[tag] = run_protocol(
            raw,
            attribute,
            model_config_from(cfg, flag),
            train_cfg,
            train_group_filter=train_group_filter,
        )
    return results


def experiment_tradeoff(raw, cfg):
    """AP against the fairness gaps for both models on one attribute."""
    attribute = cfg["data.protected"]
    results = paired_protocols(raw, cfg, attribute)
    doc = {
        "experiment": "tradeoff",
        "attribute": attribute,
        "runs": cfg["train.runs"],
        "models": {tag: _summary(res) for tag, res in results.items()},
    }
    rows = _per_run_rows("groupmixnorm", results["groupmixnorm"]) + _per_run_rows(
        "plain", results["plain"]
    )
    return {"doc": doc, "rows": rows, "results": results}


def experiment_newgroups(raw, cfg):
    """Train on two race groups, evaluate on all three."""
    ids, names = group_ids_for(raw, "race")
    try:
        keep = {names.index("White"), names.index("Black")}
    except ValueError as exc:
        raise DataError(f"race groups missing from the data: {exc}") from None
    results = paired_protocols(raw, cfg, "race", train_group_filter=keep)
    pairwise = {
        tag: [r.report.dp for r in res.per_run] for tag, res in results.items()
    }
    doc = {
        "experiment": "newgroups",
        "attribute": "race",
        "train_groups": sorted(names[i] for i in keep),
        "test_groups": list(names),
        "runs": cfg["train.runs"],
        "models": {tag: _summary(res) for tag, res in results.items()},
        "dp_max_pairwise_per_run": pairwise,
    }
    rows = _per_run_rows("groupmixnorm", results["groupmixnorm"]) + _per_run_rows(
        "plain", results["plain"]
    )
    return {"doc": doc, "rows": rows, "results": results}


def experiment_debias(raw, cfg):
    """Fine-tune a pretrained plain model with mixing on the small split.

    The plain model is trained on the train split; mixing layers are
    then inserted and fine-tuned on the validation split only, and both
    variants are evaluated on the test split.
    """
    attribute = cfg["data.protected"]
    train_cfg = train_config_from(cfg)
    plain = run_protocol(raw, attribute, model_config_from(cfg, False), train_cfg)
    ds = encode(raw, attribute)
    gmn_cfg = model_config_from(cfg, True)
    rows = []
    for r in plain.per_run:
        spec = replace(train_cfg.split, seed=r.split_seed)
        _, val_ds, test_ds = split(ds, spec)
        # offset decouples the fine-tuning streams from the pretraining ones
        tuned = finetune(r.model, gmn_cfg, val_ds, train_cfg, run_index=r.run + 1000)
        scores = tuned.predict_scores(test_ds.X)
        post = full_report(
            PredictionSet(scores, test_ds.y, test_ds.s, threshold=train_cfg.threshold)
        )
        rows.append(
            {
                "run": r.run,
                "split_seed": r.split_seed,
                "ap_pretrained": r.report.ap,
                "dp_pretrained": r.report.dp,
                "eop_pretrained": r.report.eop,
                "eod_pretrained": r.report.eod,
                "ap_finetuned": post.ap,
                "dp_finetuned": post.dp,
                "eop_finetuned": post.eop,
                "eod_finetuned": post.eod,
            }
        )
    means = {
        key: float(np.mean([row[key] for row in rows]))
        for key in rows[0]
        if key not in ("run", "split_seed")
    }
    doc = {
        "experiment": "debias",
        "attribute": attribute,
        "runs": cfg["train.runs"],
        "finetune_split": "val",
        "mean": means,
    }
    return {"doc": doc, "rows": rows, "results": {"plain": plain}}


def experiment_representation(raw, cfg, max_projection_points=2000):
    """Probe cosines per run plus a kernel PCA projection export."""
    attribute = cfg["data.protected"]
    results = paired_protocols(raw, cfg, attribute)
    ds = encode(raw, attribute)
    train_cfg = train_config_from(cfg)
    rows = []
    projections = []
    for tag, res in results.items():
        for r in res.per_run:
            spec = replace(train_cfg.split, seed=r.split_seed)
            _, _, test_ds = split(ds, spec)
            emb = extract_embeddings(r.model, test_ds)
            probe_rng = stream(cfg["seed"], "probe", r.run)
            pair = auxiliary_probe(emb, probe_rng)
            rows.append(
                {
                    "model": tag,
                    "run": r.run,
                    "split_seed": r.split_seed,
                    "cosine": pair.cosine,
                }
            )
            if r.run == res.per_run[0].run:
                sub_rng = stream(cfg["seed"], "subsample", r.run)
                n = emb.H.shape[0]
                take = min(max_projection_points, n)
                idx = np.sort(sub_rng.choice(n, size=take, replace=False))
                proj = kernel_pca_sigmoid(emb.H[idx])
                for k in range(take):
                    projections.append(
                        {
                            "model": tag,
                            "pc1": float(proj[k, 0]),
                            "pc2": float(proj[k, 1]),
                            "y": int(emb.y[idx[k]]),
                            "s": int(emb.s[idx[k]]),
                        }
                    )
    cosines = {
        tag: [row["cosine"] for row in rows if row["model"] == tag]
        for tag in results
    }
    doc = {
        "experiment": "representation",
        "attribute": attribute,
        "runs": cfg["train.runs"],
        "cosine_mean": {tag: float(np.mean(v)) for tag, v in cosines.items()},
        "cosine_per_run": cosines,
        "models": {tag: _summary(res) for tag, res in results.items()},
    }
    return {
        "doc": doc,
        "rows": rows,
        "projections": projections,
        "results": results,
    }


def run_experiment(name, raw, cfg):
    if name == "tradeoff":
        return experiment_tradeoff(raw, cfg)
    if name == "newgroups":
        return experiment_newgroups(raw, cfg)
    if name == "debias":
        return experiment_debias(raw, cfg)
    if name == "representation":
        return experiment_representation(raw, cfg)
    raise DomainError(f"unknown experiment {name!r}")
