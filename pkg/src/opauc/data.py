"""Sparse labeled datasets: LIBSVM text parsing, [-1, 1] scaling, streaming.

Feature indices are 1-based and strictly increasing within a line, as in the
LIBSVM text format.  Absent entries mean 0.  Datasets are immutable after
construction and safe to share across threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np


class ParseError(ValueError):
    """Malformed dataset text; the message carries the 1-based line number."""


@dataclass(frozen=True)
class Instance:
    """One labeled example: sparse feature map plus a label in {+1, -1}."""

    features: dict[int, float]
    label: int

    def to_dense(self, dim: int) -> np.ndarray:
        x = np.zeros(dim)
        for idx, val in self.features.items():
            if idx <= dim:
                x[idx - 1] = val
        return x


@dataclass(frozen=True)
class Dataset:
    instances: tuple[Instance, ...]
    dim: int
    pos_count: int
    neg_count: int

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def labels(self) -> np.ndarray:
        return np.array([inst.label for inst in self.instances], dtype=np.int64)

    def to_dense(self, dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Dense (X, y) arrays; rows follow instance order."""
        d = self.dim if dim is None else dim
        X = np.zeros((len(self.instances), d))
        for i, inst in enumerate(self.instances):
            for idx, val in inst.features.items():
                if idx <= d:
                    X[i, idx - 1] = val
        return X, self.labels.astype(float)

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return from_instances([self.instances[i] for i in indices], dim=self.dim)


def from_instances(instances: Iterable[Instance], dim: int | None = None) -> Dataset:
    insts = tuple(instances)
    max_idx = max((max(i.features) for i in insts if i.features), default=0)
    pos = sum(1 for i in insts if i.label > 0)
    return Dataset(
        instances=insts,
        dim=max(dim or 0, max_idx),
        pos_count=pos,
        neg_count=len(insts) - pos,
    )


def _decode_label(token: str, positive_labels: set[float] | None, lineno: int) -> int:
    try:
        raw = float(token)
    except ValueError:
        raise ParseError(f"line {lineno}: bad label {token!r}") from None
    if positive_labels is not None:
        return 1 if raw in positive_labels else -1
    if raw == 1.0:
        return 1
    if raw in (0.0, -1.0):
        return -1
    raise ParseError(
        f"line {lineno}: label {token!r} not in {{+1, 1, -1, 0}}; "
        "use a positive-label mapping for other encodings"
    )


def parse_libsvm(
    source: str | Iterable[str],
    positive_labels: Iterable[float] | None = None,
) -> Dataset:
    """Parse `<label> <idx>:<val> ...` lines into a Dataset.

    Labels +1/1 decode to +1 and 0/-1 to -1 unless an explicit positive-label
    set is given, in which case listed labels map to +1 and the rest to -1.
    Indices must be positive and strictly increasing within a line.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    pos_set = {float(v) for v in positive_labels} if positive_labels is not None else None
    instances: list[Instance] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        tokens = line.split()
        label = _decode_label(tokens[0], pos_set, lineno)
        feats: dict[int, float] = {}
        prev_idx = 0
        for tok in tokens[1:]:
            idx_s, _, val_s = tok.partition(":")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(f"line {lineno}: bad feature token {tok!r}") from None
            if idx <= 0:
                raise ParseError(f"line {lineno}: feature index {idx} must be positive")
            if idx <= prev_idx:
                raise ParseError(
                    f"line {lineno}: feature index {idx} not strictly increasing"
                )
            prev_idx = idx
            feats[idx] = val
        instances.append(Instance(features=feats, label=label))
    return from_instances(instances)


def load_libsvm(path: str, positive_labels: Iterable[float] | None = None) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh, positive_labels=positive_labels)


def serialize_libsvm(ds: Dataset) -> str:
    """Inverse of parse_libsvm up to number formatting; parses back to an
    identical Dataset."""
    lines = []
    for inst in ds.instances:
        parts = ["+1" if inst.label > 0 else "-1"]
        parts += [f"{idx}:{val!r}" for idx, val in sorted(inst.features.items())]
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class ScalingParams:
    """Per-feature min/max fitted on training data (absent entries count as 0)."""

    lo: np.ndarray
    hi: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.lo)

    def to_json(self) -> str:
        return json.dumps({str(i + 1): [self.lo[i], self.hi[i]] for i in range(self.dim)})

    @classmethod
    def from_json(cls, text: str) -> "ScalingParams":
        raw = json.loads(text)
        dim = max((int(k) for k in raw), default=0)
        lo = np.zeros(dim)
        hi = np.zeros(dim)
        for k, (a, b) in raw.items():
            lo[int(k) - 1] = a
            hi[int(k) - 1] = b
        return cls(lo=lo, hi=hi)


def fit_scaling(train: Dataset) -> ScalingParams:
    """Per-feature min/max over the training set only."""
    if len(train) == 0:
        raise ValueError("cannot fit scaling on an empty dataset")
    d = train.dim
    lo = np.full(d, np.inf)
    hi = np.full(d, -np.inf)
    seen = np.zeros(d, dtype=np.int64)
    for inst in train.instances:
        for idx, val in inst.features.items():
            j = idx - 1
            lo[j] = min(lo[j], val)
            hi[j] = max(hi[j], val)
            seen[j] += 1
    # Features absent from at least one instance include the implicit 0.
    partial = seen < len(train)
    lo = np.where(partial, np.minimum(lo, 0.0), lo)
    hi = np.where(partial, np.maximum(hi, 0.0), hi)
    return ScalingParams(lo=lo, hi=hi)


def apply_scaling(x: Instance, p: ScalingParams) -> Instance:
    """Map stored values into [-1, 1]; out-of-range test values are clamped.

    Only stored entries are transformed (absent entries stay 0, preserving
    sparsity).  Entries that scale to exactly 0 are dropped, as are indices
    beyond the fitted dimension.
    """
    feats: dict[int, float] = {}
    for idx, val in x.features.items():
        if idx > p.dim:
            continue
        lo, hi = p.lo[idx - 1], p.hi[idx - 1]
        if hi > lo:
            scaled = 2.0 * (val - lo) / (hi - lo) - 1.0
            scaled = min(1.0, max(-1.0, scaled))
        else:
            scaled = 0.0
        if scaled != 0.0:
            feats[idx] = scaled
    return Instance(features=feats, label=x.label)


def scale_dataset(ds: Dataset, p: ScalingParams) -> Dataset:
    return from_instances([apply_scaling(inst, p) for inst in ds.instances], dim=ds.dim)


def stream(ds: Dataset, shuffle_seed: int | None = None) -> Iterator[Instance]:
    """Yield each instance exactly once; a seed gives a reproducible shuffle."""
    if shuffle_seed is None:
        yield from ds.instances
        return
    order = np.random.default_rng(shuffle_seed).permutation(len(ds.instances))
    for i in order:
        yield ds.instances[i]
