"""Exact tie-aware AUC, the whole-sample surrogate objective, and loss traces."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, stream
from .exact import ExactModelState, StepPolicy, pair_loss, step


def average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing the average rank of their group."""
    scores = np.asarray(scores, dtype=float)
    n = len(scores)
    order = np.argsort(scores, kind="mergesort")
    ss = scores[order]
    new_group = np.r_[True, ss[1:] != ss[:-1]]
    # group boundaries in sorted order, then the mean 1-based rank per group
    starts = np.flatnonzero(np.r_[new_group, True])
    group_avg = (starts[:-1] + 1 + starts[1:]) / 2.0
    ranks = np.empty(n)
    ranks[order] = group_avg[np.cumsum(new_group) - 1]
    return ranks


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a random positive outranks a random negative, ties half.

    Computed via the rank statistic in O(n log n); equal to the explicit
    double sum over all positive/negative pairs.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels > 0
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: need at least one instance of each class")
    ranks = average_ranks(scores)
    pos_rank_sum = float(ranks[pos].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def model_auc(w: np.ndarray, ds: Dataset) -> float:
    X, y = ds.to_dense(dim=len(w))
    return auc(X @ w, y)


def surrogate_objective(
    w: np.ndarray, ds: Dataset, lam: float, method: str = "fast"
) -> float:
    """Ridge plus the average pairwise square loss over the whole sample.

    "pairwise" evaluates the literal double sum over all cross-class pairs;
    "fast" uses the identity expressing it through per-class score means and
    variances.  Both are exposed so either can check the other.
    """
    X, y = ds.to_dense(dim=len(w))
    u = X[y > 0] @ w
    v = X[y < 0] @ w
    if len(u) == 0 or len(v) == 0:
        raise ValueError("surrogate objective undefined: need both classes")
    ridge = 0.5 * lam * float(w @ w)
    if method == "pairwise":
        diffs = 1.0 - (u[:, None] - v[None, :])
        return ridge + 0.5 * float(np.mean(diffs**2))
    if method == "fast":
        gap = 1.0 - float(np.mean(u)) + float(np.mean(v))
        return ridge + 0.5 * (gap * gap + float(np.var(u)) + float(np.var(v)))
    raise ValueError(f"unknown method {method!r}")


@dataclass
class RegretTrace:
    """Cumulative per-step loss of the online iterates at checkpoints."""

    steps: list[int] = field(default_factory=list)
    cum_loss: list[float] = field(default_factory=list)
    reference_loss: float | None = None

    def avg_loss(self) -> list[float]:
        return [c / t for t, c in zip(self.steps, self.cum_loss)]

    def to_csv(self) -> str:
        lines = ["t,cum_loss,avg_loss"]
        for t, c in zip(self.steps, self.cum_loss):
            lines.append(f"{t},{c!r},{c / t!r}")
        return "\n".join(lines) + "\n"


def geometric_checkpoints(n: int) -> list[int]:
    """Powers of two up to n, plus n itself; keeps traces O(log n)."""
    marks = []
    t = 1
    while t < n:
        marks.append(t)
        t *= 2
    if n >= 1:
        marks.append(n)
    return marks


def regret_trace(
    ds: Dataset,
    lam: float,
    policy: StepPolicy = StepPolicy(),
    shuffle_seed: int | None = None,
    comparator: np.ndarray | None = None,
    checkpoints: list[int] | None = None,
) -> tuple[RegretTrace, ExactModelState]:
    """Run the exact learner once, recording cumulative pair loss.

    Each step's loss is evaluated at the weights in force when the instance
    arrives (before that step's update).  With a comparator, its cumulative
    loss over the same stream is recorded as reference_loss.
    """
    n = len(ds)
    marks = set(checkpoints) if checkpoints is not None else set(geometric_checkpoints(n))
    marks.add(n)
    state = ExactModelState.zeros(ds.dim, lam)
    eta = policy.stepsize(lam)
    trace = RegretTrace()
    cum = 0.0
    cum_ref = 0.0
    for t, inst in enumerate(stream(ds, shuffle_seed), start=1):
        x = inst.to_dense(state.dim)
        cum += pair_loss(state, x, inst.label, state.w)
        if comparator is not None:
            cum_ref += pair_loss(state, x, inst.label, comparator)
        step(state, inst, eta)
        if t in marks:
            trace.steps.append(t)
            trace.cum_loss.append(cum)
    if comparator is not None:
        trace.reference_loss = cum_ref
    return trace, state
