"""Census-income ingestion: raw CSV to model-ready matrices.

The expected file is the classic adult census layout: 14 comma-separated
attributes plus the income label, no header, '?' for missing fields.
Train and test files may be concatenated; comment lines starting with
'|' are skipped and the trailing '.' some label fields carry is
normalized away.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import DomainError, ParseError, SchemaError
from .rng import stream

COLUMNS = (
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
)
CONTINUOUS = (
    "age",
    "fnlwgt",
    "education-num",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
)
LABEL = "income"
POSITIVE_LABEL = ">50K"

# Protected attributes: column to read and how raw values map to groups.
# Race collapses the three small census categories into one group.
PROTECTED_COLUMNS = {"gender": "sex", "race": "race"}
RACE_OTHERS = ("Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other")


@dataclass
class RawTable:
    """Parsed rows (strings) plus the column schema."""

    columns: tuple
    rows: list
    n_dropped: int = 0

    @property
    def n_rows(self):
        return len(self.rows)

    def column(self, name):
        try:
            j = self.columns.index(name)
        except ValueError:
            raise SchemaError(f"column {name!r} not in schema") from None
        return [row[j] for row in self.rows]


def parse_adult(path):
    """Read an adult-layout CSV, dropping rows with missing fields.

    Rows containing '?' are excluded and counted in n_dropped. A row
    with the wrong field count raises ParseError with its line number.
    """
    rows = []
    dropped = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != len(COLUMNS):
                raise ParseError(
                    f"{path}: line {lineno}: expected {len(COLUMNS)} fields, "
                    f"got {len(fields)}"
                )
            if fields[-1].endswith("."):
                fields[-1] = fields[-1][:-1]
            if any(f == "?" for f in fields):
                dropped += 1
                continue
            rows.append(fields)
    return RawTable(columns=COLUMNS, rows=rows, n_dropped=dropped)


class ColumnEncoder(BaseEstimator, TransformerMixin):
    """Z-scores continuous columns, one-hot encodes categorical ones.

    Statistics and vocabularies are fitted on the rows passed to fit;
    categories unseen at transform time encode to all zeros. The
    protected column and the label are excluded from the feature matrix.
    """

    def __init__(self, protected_column):
        self.protected_column = protected_column

    def fit(self, rows, columns=COLUMNS):
        if len(rows) == 0:
            raise DomainError("cannot fit an encoder on zero rows")
        self.columns_ = tuple(columns)
        if self.protected_column not in self.columns_:
            raise SchemaError(f"protected column {self.protected_column!r} absent")
        self.cont_means_ = {}
        self.cont_stds_ = {}
        self.vocab_ = {}
        self.feature_names_ = []
        for j, name in enumerate(self.columns_):
            if name == LABEL or name == self.protected_column:
                continue
            values = [row[j] for row in rows]
            if name in CONTINUOUS:
                arr = np.array([float(v) for v in values])
                self.cont_means_[name] = float(arr.mean())
                self.cont_stds_[name] = float(arr.std())
                self.feature_names_.append(name)
            else:
                vocab = sorted(set(values))
                self.vocab_[name] = vocab
                self.feature_names_.extend(f"{name}={v}" for v in vocab)
        return self

    def transform(self, rows):
        if not hasattr(self, "feature_names_"):
            raise NotFittedError("ColumnEncoder is not fitted")
        n = len(rows)
        X = np.zeros((n, len(self.feature_names_)))
        col = 0
        for j, name in enumerate(self.columns_):
            if name == LABEL or name == self.protected_column:
                continue
            values = [row[j] for row in rows]
            if name in CONTINUOUS:
                arr = np.array([float(v) for v in values])
                X[:, col] = (arr - self.cont_means_[name]) / (
                    self.cont_stds_[name] + 1e-8
                )
                col += 1
            else:
                index = {v: k for k, v in enumerate(self.vocab_[name])}
                codes = np.array([index.get(v, -1) for v in values], dtype=np.int64)
                seen = np.flatnonzero(codes >= 0)
                X[seen, col + codes[seen]] = 1.0
                col += len(self.vocab_[name])
        return X

    def inverse_continuous(self, X):
        """Recover raw continuous values from the leading z-scored columns."""
        out = {}
        col = 0
        for name in self.columns_:
            if name == LABEL or name == self.protected_column:
                continue
            if name in CONTINUOUS:
                out[name] = X[:, col] * (self.cont_stds_[name] + 1e-8) + self.cont_means_[name]
                col += 1
            else:
                col += len(self.vocab_[name])
        return out


@dataclass
class Dataset:
    """Feature matrix, labels and group ids under one fitted encoder."""

    X: np.ndarray
    y: np.ndarray
    s: np.ndarray
    attribute: str
    encoder: ColumnEncoder
    feature_names: list
    group_names: list
    source: RawTable = field(repr=False, default=None)
    row_indices: np.ndarray = field(repr=False, default=None)

    @property
    def n_rows(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def n_groups(self):
        return len(self.group_names)


def group_ids_for(raw, attribute):
    """Group id per row plus the id -> name table (sorted names)."""
    if attribute not in PROTECTED_COLUMNS:
        raise SchemaError(f"unknown protected attribute {attribute!r}")
    values = raw.column(PROTECTED_COLUMNS[attribute])
    if attribute == "race":
        values = ["Others" if v in RACE_OTHERS else v for v in values]
    names = sorted(set(values))
    index = {v: k for k, v in enumerate(names)}
    return np.array([index[v] for v in values], dtype=np.int64), names


def encode(raw, attribute, fit_on=None):
    """Encode a raw table into a Dataset.

    fit_on restricts the rows used to fit the encoder (defaults to all);
    the transform always covers the whole table. Group ids come from the
    full table so they stay stable across splits.
    """
    if raw.n_rows == 0:
        raise DomainError("empty table")
    if attribute not in PROTECTED_COLUMNS:
        raise SchemaError(f"unknown protected attribute {attribute!r}")
    if fit_on is None:
        fit_on = np.arange(raw.n_rows)
    fit_on = np.asarray(fit_on, dtype=np.int64)
    if fit_on.size == 0:
        raise DomainError("fit_on must not be empty")
    encoder = ColumnEncoder(PROTECTED_COLUMNS[attribute])
    encoder.fit([raw.rows[i] for i in fit_on], raw.columns)
    X = encoder.transform(raw.rows)
    labels = raw.column(LABEL)
    y = np.array([1 if v == POSITIVE_LABEL else 0 for v in labels], dtype=np.int64)
    s, names = group_ids_for(raw, attribute)
    return Dataset(
        X=X,
        y=y,
        s=s,
        attribute=attribute,
        encoder=encoder,
        feature_names=list(encoder.feature_names_),
        group_names=names,
        source=raw,
        row_indices=np.arange(raw.n_rows),
    )


@dataclass
class SplitSpec:
    """Train/validation/test fractions plus the permutation seed."""

    train: float = 0.6
    val: float = 0.2
    test: float = 0.2
    seed: int = 0

    def __post_init__(self):
        for f in (self.train, self.val, self.test):
            if not f > 0.0:
                raise DomainError("split fractions must be positive")
        if abs(self.train + self.val + self.test - 1.0) > 1e-9:
            raise DomainError("split fractions must sum to 1")


def split(ds, spec):
    """Random disjoint train/val/test partition, encoder refitted on train.

    The permutation is drawn from the spec's seed alone, so a given
    (dataset, spec) pair always produces the same partition.
    """
    n = ds.n_rows
    if n < 10:
        raise DomainError(f"need at least 10 rows to split, got {n}")
    if ds.source is None:
        raise DomainError("dataset lost its raw source; cannot refit the encoder")
    rng = stream(spec.seed, "split")
    perm = rng.permutation(n)
    n_train = int(np.floor(spec.train * n))
    n_val = int(np.floor(spec.val * n))
    parts = (
        perm[:n_train],
        perm[n_train : n_train + n_val],
        perm[n_train + n_val :],
    )
    train_rows = ds.row_indices[parts[0]]
    refit = encode(ds.source, ds.attribute, fit_on=train_rows)
    out = []
    for part in parts:
        rows = ds.row_indices[part]
        out.append(
            replace(
                refit,
                X=refit.X[rows],
                y=refit.y[rows],
                s=refit.s[rows],
                row_indices=rows,
            )
        )
    return tuple(out)


def filter_groups(ds, keep):
    """Rows whose group id is in `keep`; ids keep their original values."""
    keep = set(int(k) for k in keep)
    if not keep:
        raise DomainError("keep must not be empty")
    mask = np.isin(ds.s, sorted(keep))
    if not mask.any():
        raise DomainError(f"no rows left after keeping groups {sorted(keep)}")
    return replace(
        ds,
        X=ds.X[mask],
        y=ds.y[mask],
        s=ds.s[mask],
        row_indices=None if ds.row_indices is None else ds.row_indices[mask],
    )


def dump_encoded_csv(ds, path):
    """Audit dump: encoded features with a column-name header."""
    header = ds.feature_names + ["label", "group"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(ds.n_rows):
            cells = [repr(v) for v in ds.X[i]]
            cells.append(str(int(ds.y[i])))
            cells.append(str(int(ds.s[i])))
            fh.write(",".join(cells) + "\n")
