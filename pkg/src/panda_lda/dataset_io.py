"""Two-class CSV datasets and the gene-expression style preprocessing pipeline.

Pipeline order: variance filter on the pooled data, stratified split,
t-statistic screening on the training split only, then fitting.
"""
import csv
from dataclasses import dataclass
import json
import logging
import math

import numpy as np

from .datagen import rng_for
from .errors import InsufficientDataError, InvalidInputError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RealDataset:
    x: np.ndarray
    labels: np.ndarray
    feature_names: tuple = None

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        labels = np.array(self.labels)
        if x.ndim != 2 or labels.shape != (x.shape[0],):
            raise InvalidInputError(f"x {x.shape} and labels {labels.shape} do not match")
        if not np.isin(labels, (0, 1)).all():
            raise InvalidInputError("labels must be 0 or 1")
        if not np.isfinite(x).all():
            rows = np.unique(np.nonzero(~np.isfinite(x))[0]).tolist()
            raise InvalidInputError(f"non-finite values in rows {rows}")
        names = None if self.feature_names is None else tuple(self.feature_names)
        if names is not None and len(names) != x.shape[1]:
            raise InvalidInputError("feature_names length differs from the number of columns")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "labels", labels.astype(int))
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    def names(self):
        return self.feature_names or tuple(f"x{j}" for j in range(self.p))

    def class_rows(self, label):
        return self.x[self.labels == label]

    def subset(self, rows=None, cols=None):
        rows = np.arange(self.n) if rows is None else np.asarray(rows, dtype=int)
        cols = np.arange(self.p) if cols is None else np.asarray(cols, dtype=int)
        names = tuple(self.names()[j] for j in cols) if self.feature_names else None
        return RealDataset(self.x[np.ix_(rows, cols)], self.labels[rows], names)


def load_csv(path, label_column="label", delimiter=","):
    """Read a headed CSV; every non-label column must parse as a finite float."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInputError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise InvalidInputError(f"{path}: label column {label_column!r} not in header")
        li = header.index(label_column)
        feat_idx = [j for j in range(len(header)) if j != li]
        xs, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise InvalidInputError(
                    f"{path}: row {lineno} has {len(row)} fields, header has {len(header)}")
            label = row[li].strip()
            if label not in ("0", "1"):
                raise InvalidInputError(f"{path}: row {lineno}: label {label!r} is not 0 or 1")
            vals = []
            for j in feat_idx:
                try:
                    v = float(row[j])
                except ValueError:
                    raise InvalidInputError(
                        f"{path}: row {lineno}, column {header[j]!r}: cannot parse {row[j]!r}") from None
                if not math.isfinite(v):
                    raise InvalidInputError(
                        f"{path}: row {lineno}, column {header[j]!r}: non-finite value {row[j]!r}")
                vals.append(v)
            xs.append(vals)
            labels.append(int(label))
    if not xs:
        raise InvalidInputError(f"{path}: no data rows")
    return RealDataset(np.array(xs), np.array(labels), tuple(header[j] for j in feat_idx))


def write_csv(data, path, label_column="label", delimiter=","):
    """Inverse of load_csv; floats written with repr so a reload is bit-identical."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(list(data.names()) + [label_column])
        for xrow, lab in zip(data.x, data.labels):
            w.writerow([repr(float(v)) for v in xrow] + [int(lab)])


def trim_count(p, fraction):
    """Number of features dropped at each end of the variance ranking."""
    return int(math.ceil(fraction * p - 1e-9)) if fraction > 0 else 0


def variance_quantile_filter(data, fraction=1 / 6):
    """Drop the lowest- and highest-variance features, ``fraction`` of them at each end.

    Sample variances (divisor n - 1) are computed on the pooled data. The
    cutoffs are nearest-rank: with k = ceil(fraction * p), the k smallest and
    the k largest variances are removed, ties ordered by column index.
    Returns the filtered dataset and the kept column indices.
    """
    if not 0 <= fraction < 0.5:
        raise InvalidInputError(f"fraction must lie in [0, 0.5), got {fraction}")
    k = trim_count(data.p, fraction)
    if k == 0:
        return data, np.arange(data.p)
    if data.p - 2 * k < 1:
        raise InsufficientDataError(f"filter would drop all {data.p} features")
    var = data.x.var(axis=0, ddof=1)
    order = np.argsort(var, kind="stable")
    keep = np.sort(order[k:data.p - k])
    log.info("variance filter: kept %d of %d features", len(keep), data.p)
    return data.subset(cols=keep), keep


def t_statistics(x0, x1):
    """Pooled-variance two-sample t statistic per column; 0/0 is defined as 0."""
    n0, n1 = len(x0), len(x1)
    if n0 < 1 or n1 < 1:
        raise InvalidInputError("both classes must be present")
    gap = x1.mean(axis=0) - x0.mean(axis=0)
    ss = ((x0 - x0.mean(axis=0)) ** 2).sum(axis=0) + ((x1 - x1.mean(axis=0)) ** 2).sum(axis=0)
    dof = n0 + n1 - 2
    pooled = ss / dof if dof > 0 else np.zeros_like(ss)
    se = np.sqrt(pooled * (1 / n0 + 1 / n1))
    t = np.zeros_like(gap)
    pos = se > 0
    t[pos] = gap[pos] / se[pos]
    # a constant feature with a nonzero gap separates the classes perfectly
    flat = ~pos & (gap != 0)
    t[flat] = np.sign(gap[flat]) * np.inf
    return t


def t_test_select(train, m=2000):
    """Indices of the m features with the largest |t| on the training split; ties to lower index."""
    x0, x1 = train.class_rows(0), train.class_rows(1)
    if len(x0) == 0 or len(x1) == 0:
        raise InvalidInputError("t-test selection needs both classes in the training split")
    if not 1 <= m <= train.p:
        raise InvalidInputError(f"m must lie in [1, {train.p}], got {m}")
    score = np.abs(t_statistics(x0, x1))
    order = np.argsort(-score, kind="stable")
    return order[:m]


@dataclass(frozen=True, eq=False)
class Split:
    train: RealDataset
    val: RealDataset
    test: RealDataset
    indices: dict

    def manifest_lines(self):
        return [json.dumps({"part": part, "rows": [int(i) for i in self.indices[part]]})
                for part in ("train", "val", "test")]

    def write_manifest(self, path):
        with open(path, "w") as fh:
            fh.write("\n".join(self.manifest_lines()) + "\n")


def stratified_split(data, counts, seed):
    """Random disjoint train/val/test split with per-class sizes
    counts = (train0, train1, val0, val1, test0, test1)."""
    if len(counts) != 6 or any(int(c) < 0 for c in counts):
        raise InvalidInputError("counts must be six nonnegative integers")
    tr0, tr1, va0, va1, te0, te1 = (int(c) for c in counts)
    rng = rng_for(seed)
    parts = {"train": [], "val": [], "test": []}
    for label, (a, b, c) in ((0, (tr0, va0, te0)), (1, (tr1, va1, te1))):
        rows = np.nonzero(data.labels == label)[0]
        if a + b + c > len(rows):
            raise InsufficientDataError(
                f"class {label}: requested {a + b + c} rows, only {len(rows)} available")
        perm = rng.permutation(rows)
        parts["train"].append(perm[:a])
        parts["val"].append(perm[a:a + b])
        parts["test"].append(perm[a + b:a + b + c])
    indices = {k: np.sort(np.concatenate(v)) for k, v in parts.items()}
    return Split(*(data.subset(rows=indices[k]) for k in ("train", "val", "test")), indices=indices)


@dataclass(frozen=True)
class PipelineConfig:
    variance_fraction: float = 1 / 6
    counts: tuple = (29, 15, 9, 5, 9, 5)
    n_features: int = 2000
    seed: int = 0


@dataclass(eq=False)
class PreparedData:
    train: RealDataset
    val: RealDataset
    test: RealDataset
    split: Split
    kept_after_filter: np.ndarray
    selected: np.ndarray
    stages: list

    def feature_names(self):
        return self.train.names()


def prepare(data, cfg=PipelineConfig()):
    """filter -> split -> t-select on train; returns matrices restricted to the selected features."""
    stages = []
    filtered, kept = variance_quantile_filter(data, cfg.variance_fraction)
    stages.append(("filter", filtered.p))
    split = stratified_split(filtered, cfg.counts, cfg.seed)
    stages.append(("split", (split.train.n, split.val.n, split.test.n)))
    m = min(cfg.n_features, filtered.p)
    selected = t_test_select(split.train, m)
    stages.append(("select", len(selected)))
    for name, info in stages:
        log.info("pipeline stage %s: %s", name, info)
    return PreparedData(
        train=split.train.subset(cols=selected), val=split.val.subset(cols=selected),
        test=split.test.subset(cols=selected), split=split, kept_after_filter=kept,
        selected=selected, stages=stages)
