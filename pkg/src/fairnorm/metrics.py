"""Group-fairness metrics and average precision over model predictions.

The three gap metrics follow the hard-label definitions: predictions are
thresholded scores, and each metric is an absolute difference (or sum of
two absolute differences) of subgroup rates. With more than two groups
the headline value generalizes to the maximum pairwise gap; the binary
one-vs-rest value for a designated reference group is reported alongside.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, UndefinedMetricError
from .validation import as_binary_vector, as_group_vector, check_probability_scores


@dataclass
class PredictionSet:
    """Scores, truth and group ids for one evaluated model."""

    scores: np.ndarray
    y_true: np.ndarray
    groups: np.ndarray
    threshold: float = 0.5

    def __post_init__(self):
        self.scores = check_probability_scores(self.scores)
        n = self.scores.shape[0]
        self.y_true = as_binary_vector(self.y_true, n, "y_true")
        self.groups = as_group_vector(self.groups, n, "groups")
        if not 0.0 <= self.threshold <= 1.0:
            raise DomainError(f"threshold must lie in [0, 1], got {self.threshold}")

    def hard_labels(self):
        return (self.scores >= self.threshold).astype(np.int64)


@dataclass
class GroupCounts:
    """Confusion counts and rates of one group."""

    count: int
    tp: int
    fp: int
    tn: int
    fn: int
    positive_rate: float
    tpr: float | None
    fpr: float | None


def group_confusion(p):
    """Confusion counts per group id, in sorted id order."""
    yhat = p.hard_labels()
    out = {}
    for g in np.unique(p.groups):
        mask = p.groups == g
        y = p.y_true[mask]
        h = yhat[mask]
        tp = int(np.sum((y == 1) & (h == 1)))
        fp = int(np.sum((y == 0) & (h == 1)))
        tn = int(np.sum((y == 0) & (h == 0)))
        fn = int(np.sum((y == 1) & (h == 0)))
        npos = tp + fn
        nneg = fp + tn
        out[int(g)] = GroupCounts(
            count=int(mask.sum()),
            tp=tp,
            fp=fp,
            tn=tn,
            fn=fn,
            positive_rate=float(h.mean()),
            tpr=tp / npos if npos else None,
            fpr=fp / nneg if nneg else None,
        )
    return out


def _split_reference(p, reference=1):
    ref = p.groups == reference
    if not ref.any() or ref.all():
        raise UndefinedMetricError(
            f"both the group-{reference} and the complement subgroup must be non-empty"
        )
    return ref


def demographic_parity(p, reference=1):
    """|P(yhat=1 | S=ref) - P(yhat=1 | S!=ref)|."""
    ref = _split_reference(p, reference)
    yhat = p.hard_labels()
    return float(abs(yhat[ref].mean() - yhat[~ref].mean()))


def equal_opportunity(p, reference=1):
    """|TPR(S=ref) - TPR(S!=ref)|."""
    ref = _split_reference(p, reference)
    yhat = p.hard_labels()
    pos_ref = ref & (p.y_true == 1)
    pos_other = ~ref & (p.y_true == 1)
    if not pos_ref.any() or not pos_other.any():
        raise UndefinedMetricError("a subgroup has no positive samples")
    return float(abs(yhat[pos_ref].mean() - yhat[pos_other].mean()))


def equalized_odds(p, reference=1):
    """|TPR gap| + |FPR gap|; ranges over [0, 2]."""
    ref = _split_reference(p, reference)
    yhat = p.hard_labels()
    gaps = 0.0
    for label in (1, 0):
        a = ref & (p.y_true == label)
        b = ~ref & (p.y_true == label)
        if not a.any() or not b.any():
            raise UndefinedMetricError(
                f"a subgroup has no samples with label {label}"
            )
        gaps += abs(yhat[a].mean() - yhat[b].mean())
    return float(gaps)


def average_precision(p):
    """Step-interpolated area under the precision-recall curve.

    Ranks by descending score with ties broken by stable input order,
    then sums precision-weighted recall increments.
    """
    return ap_from_scores(p.scores, p.y_true)


def ap_from_scores(scores, y_true):
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(y_true).reshape(-1)
    n_pos = int(np.sum(y == 1))
    if n_pos == 0:
        raise UndefinedMetricError("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    hits = (y[order] == 1).astype(np.float64)
    tp = np.cumsum(hits)
    precision = tp / np.arange(1, len(y) + 1)
    return float(np.sum(precision * hits) / n_pos)


def _pairwise_max(values_by_group, combine):
    ids = sorted(values_by_group)
    best = None
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            gap = combine(values_by_group[a], values_by_group[b])
            if gap is not None and (best is None or gap > best):
                best = gap
    return best


@dataclass
class FairnessReport:
    """AP plus fairness gaps and per-group confusion counts.

    dp/eop/eod hold the binary definitions when exactly two groups are
    present and the maximum pairwise gap otherwise; the one-vs-rest
    variants use `reference_group`. Metrics that are undefined on the
    input are None, with the reason recorded in `undefined`.
    """

    n: int
    threshold: float
    ap: float | None
    dp: float | None
    eop: float | None
    eod: float | None
    dp_ovr: float | None
    eop_ovr: float | None
    eod_ovr: float | None
    reference_group: int
    definition: str  # "binary" or "max_pairwise"
    per_group: dict
    undefined: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "n": self.n,
            "threshold": self.threshold,
            "ap": self.ap,
            "dp": self.dp,
            "eop": self.eop,
            "eod": self.eod,
            "dp_ovr": self.dp_ovr,
            "eop_ovr": self.eop_ovr,
            "eod_ovr": self.eod_ovr,
            "reference_group": self.reference_group,
            "definition": self.definition,
            "undefined": dict(sorted(self.undefined.items())),
            "per_group": {
                str(g): {
                    "count": c.count,
                    "tp": c.tp,
                    "fp": c.fp,
                    "tn": c.tn,
                    "fn": c.fn,
                    "positive_rate": c.positive_rate,
                    "tpr": c.tpr,
                    "fpr": c.fpr,
                }
                for g, c in sorted(self.per_group.items())
            },
        }
        return d


def full_report(p, reference_group=1):
    """Compose every metric; undefined ones come back absent with a reason."""
    per_group = group_confusion(p)
    ids = sorted(per_group)
    undefined = {}

    try:
        ap = average_precision(p)
    except UndefinedMetricError as exc:
        ap = None
        undefined["ap"] = str(exc)

    if reference_group not in per_group:
        reference_group = ids[0]

    dp = eop = eod = None
    dp_ovr = eop_ovr = eod_ovr = None
    definition = "binary" if len(ids) == 2 else "max_pairwise"
    if len(ids) == 1:
        for name in ("dp", "eop", "eod", "dp_ovr", "eop_ovr", "eod_ovr"):
            undefined[name] = "single group"
    else:
        rates = {g: per_group[g].positive_rate for g in ids}
        dp = _pairwise_max(rates, lambda a, b: abs(a - b))

        tprs = {g: per_group[g].tpr for g in ids}
        eop = _pairwise_max(
            tprs, lambda a, b: None if a is None or b is None else abs(a - b)
        )
        if eop is None:
            undefined["eop"] = "a group has no positive samples"

        fprs = {g: per_group[g].fpr for g in ids}
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                if None in (tprs[a], tprs[b], fprs[a], fprs[b]):
                    continue
                gap = abs(tprs[a] - tprs[b]) + abs(fprs[a] - fprs[b])
                if eod is None or gap > eod:
                    eod = gap
        if eod is None:
            undefined["eod"] = "a group lacks positives or negatives"

        try:
            dp_ovr = demographic_parity(p, reference_group)
        except UndefinedMetricError as exc:
            undefined["dp_ovr"] = str(exc)
        try:
            eop_ovr = equal_opportunity(p, reference_group)
        except UndefinedMetricError as exc:
            undefined["eop_ovr"] = str(exc)
        try:
            eod_ovr = equalized_odds(p, reference_group)
        except UndefinedMetricError as exc:
            undefined["eod_ovr"] = str(exc)

    return FairnessReport(
        n=int(p.scores.shape[0]),
        threshold=float(p.threshold),
        ap=ap,
        dp=dp,
        eop=eop,
        eod=eod,
        dp_ovr=dp_ovr,
        eop_ovr=eop_ovr,
        eod_ovr=eod_ovr,
        reference_group=int(reference_group),
        definition=definition,
        per_group=per_group,
        undefined=undefined,
    )


def read_predictions_csv(path, threshold=0.5):
    """Standalone evaluator input: rows of score, y_true, group.

    A non-numeric first row is treated as a header.
    """
    with open(path, "r", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(f.strip() for f in row)]
    if not rows:
        raise DataError(f"{path}: no prediction rows")
    start = 0
    try:
        float(rows[0][0])
    except ValueError:
        start = 1
    scores, ys, groups = [], [], []
    for i, row in enumerate(rows[start:], start=start + 1):
        if len(row) != 3:
            raise DataError(f"{path}: row {i}: expected 3 columns, got {len(row)}")
        try:
            scores.append(float(row[0]))
            ys.append(int(float(row[1])))
            groups.append(int(float(row[2])))
        except ValueError as exc:
            raise DataError(f"{path}: row {i}: {exc}") from None
    return PredictionSet(
        np.array(scores), np.array(ys), np.array(groups), threshold=threshold
    )
