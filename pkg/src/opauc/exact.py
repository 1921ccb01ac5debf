"""One-pass AUC learner with exact per-class second-order statistics.

The pairwise square loss of the current instance against every earlier
instance of the other class collapses to an expression in the other class's
running mean and covariance.  Keeping those statistics incrementally lets a
single pass over the stream drive stochastic gradient descent without storing
any instances, at O(d^2) memory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, Instance, stream


class NoPairError(ValueError):
    """No opposite-class instance has been seen; the pair loss is undefined."""


@dataclass(frozen=True)
class StepPolicy:
    """Stepsize schedule for the one-pass learners.

    "constant" uses eta as-is for every step.  "smoothness" derives one
    constant stepsize 1 / (k + sqrt(k^2 + k*horizon*loss_budget/norm_bound^2))
    from the smoothness constant k = 4 + lambda, a horizon, a bound on the
    norm of the best fixed model, and a per-step loss budget (0 for separable
    data, giving 1 / (2k)).
    """

    kind: str = "constant"
    eta: float = 2.0**-6
    norm_bound: float = 1.0
    loss_budget: float = 0.0
    horizon: int = 1

    def stepsize(self, lam: float) -> float:
        if self.kind == "constant":
            return self.eta
        if self.kind == "smoothness":
            k = 4.0 + lam
            return 1.0 / (
                k + math.sqrt(k * k + k * self.horizon * self.loss_budget / self.norm_bound**2)
            )
        raise ValueError(f"unknown step policy kind {self.kind!r}")


@dataclass
class ExactModelState:
    """Weights plus running per-class means/covariances and counts."""

    dim: int
    lam: float
    w: np.ndarray
    c_pos: np.ndarray
    c_neg: np.ndarray
    S_pos: np.ndarray
    S_neg: np.ndarray
    t_pos: int = 0
    t_neg: int = 0

    @classmethod
    def zeros(cls, dim: int, lam: float) -> "ExactModelState":
        return cls(
            dim=dim,
            lam=lam,
            w=np.zeros(dim),
            c_pos=np.zeros(dim),
            c_neg=np.zeros(dim),
            S_pos=np.zeros((dim, dim)),
            S_neg=np.zeros((dim, dim)),
        )

    def opposite(self, y: int) -> tuple[np.ndarray, np.ndarray, int]:
        """(mean, covariance, count) of the class opposite to label y."""
        if y > 0:
            return self.c_neg, self.S_neg, self.t_neg
        return self.c_pos, self.S_pos, self.t_pos


def update_mean(c: np.ndarray, count_after: int, x: np.ndarray) -> np.ndarray:
    """Exact mean after folding in x as the count_after-th vector."""
    return c + (x - c) / count_after


def update_covariance(
    S: np.ndarray,
    c_before: np.ndarray,
    c_after: np.ndarray,
    count_after: int,
    x: np.ndarray,
) -> np.ndarray:
    """Running covariance (1/T normalization), exact for the seen prefix.

    Requires c_after to already be the mean including x.  The result equals
    the batch value (1/T) sum x x^T - c c^T up to round-off.
    """
    return S + (np.outer(x - c_before, x - c_after) - S) / count_after


def gradient(state: ExactModelState, x: np.ndarray, y: int) -> np.ndarray:
    """Stochastic gradient of the pair loss of (x, y) at the current weights.

    Statistics for x's own class must already include x; the opposite class's
    mean/covariance stand in for the average over its stored instances.
    """
    c_opp, S_opp, t_opp = state.opposite(y)
    if t_opp == 0:
        raise NoPairError("no opposite-class instance seen yet")
    v = x - c_opp
    return state.lam * state.w - y * v + v * (v @ state.w) + S_opp @ state.w


def pair_loss(state: ExactModelState, x: np.ndarray, y: int, w: np.ndarray) -> float:
    """Average pairwise square loss of (x, y) against the seen opposite class,
    plus the ridge term; 0 by convention when no pair exists yet."""
    c_opp, S_opp, t_opp = state.opposite(y)
    if t_opp == 0:
        return 0.0
    v = x - c_opp
    margin = y * (v @ w)
    return 0.5 * state.lam * float(w @ w) + 0.5 * (1.0 - margin) ** 2 + 0.5 * float(w @ (S_opp @ w))


def step(state: ExactModelState, inst: Instance, eta_t: float) -> ExactModelState:
    """Fold one instance into the statistics, then descend if a pair exists.

    The arriving instance's own class is updated first; the weight update is
    skipped entirely (no ridge shrink either) while the opposite class is
    still empty, since the loss is defined as 0 there.
    """
    x = inst.to_dense(state.dim)
    y = inst.label
    if y > 0:
        state.t_pos += 1
        c_before = state.c_pos
        state.c_pos = update_mean(c_before, state.t_pos, x)
        state.S_pos = update_covariance(state.S_pos, c_before, state.c_pos, state.t_pos, x)
    else:
        state.t_neg += 1
        c_before = state.c_neg
        state.c_neg = update_mean(c_before, state.t_neg, x)
        state.S_neg = update_covariance(state.S_neg, c_before, state.c_neg, state.t_neg, x)
    if state.opposite(y)[2] > 0:
        state.w = state.w - eta_t * gradient(state, x, y)
    return state


def train_exact(
    ds: Dataset,
    lam: float,
    policy: StepPolicy = StepPolicy(),
    shuffle_seed: int | None = None,
    dim: int | None = None,
) -> ExactModelState:
    """Single pass over the dataset; deterministic given inputs and seed."""
    state = ExactModelState.zeros(dim or ds.dim, lam)
    eta = policy.stepsize(lam)
    for inst in stream(ds, shuffle_seed):
        step(state, inst, eta)
    return state
