"""Low-rank variant of the one-pass AUC learner for high-dimensional data.

Instead of d x d covariances, each class keeps a d x tau sketch Z built from
one Gaussian row per arriving instance (scaled by 1/sqrt(tau), which makes
E[R R^T] the identity the covariance factorization needs).  The covariance
never gets materialized: every product against it factors through Z and a
rank-1 mean correction, so a gradient step costs O(tau * d) time and the
state costs O(tau * d) memory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, Instance, stream
from .exact import NoPairError, StepPolicy


@dataclass
class SketchModelState:
    """Weights, exact class means, and per-class sketches Z with row sums rho.

    rho accumulates the scaled Gaussian rows of a class, so the sketched mean
    is the implicit rank-1 matrix c * (rho/T)^T and is never stored.
    """

    dim: int
    tau: int
    lam: float
    seed: int
    w: np.ndarray
    c_pos: np.ndarray
    c_neg: np.ndarray
    Z_pos: np.ndarray
    Z_neg: np.ndarray
    rho_pos: np.ndarray
    rho_neg: np.ndarray
    rng: np.random.Generator
    t_pos: int = 0
    t_neg: int = 0

    @classmethod
    def zeros(cls, dim: int, tau: int, lam: float, seed: int = 0) -> "SketchModelState":
        if tau < 1:
            raise ValueError("sketch width must be at least 1")
        return cls(
            dim=dim,
            tau=tau,
            lam=lam,
            seed=seed,
            w=np.zeros(dim),
            c_pos=np.zeros(dim),
            c_neg=np.zeros(dim),
            Z_pos=np.zeros((dim, tau)),
            Z_neg=np.zeros((dim, tau)),
            rho_pos=np.zeros(tau),
            rho_neg=np.zeros(tau),
            rng=np.random.default_rng(seed),
        )

    def opposite(self, y: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
        if y > 0:
            return self.c_neg, self.Z_neg, self.rho_neg, self.t_neg
        return self.c_pos, self.Z_pos, self.rho_pos, self.t_pos


def draw_sketch_row(rng: np.random.Generator, tau: int) -> np.ndarray:
    """tau i.i.d. standard normal draws; exactly one row per instance."""
    return rng.standard_normal(tau)


def update_sketch(state: SketchModelState, inst: Instance) -> SketchModelState:
    """Fold one instance into its class's sketch, row sum, mean, and count.

    The rank-1 sketch update touches only nnz(x) * tau entries of Z.
    """
    r = draw_sketch_row(state.rng, state.tau) / math.sqrt(state.tau)
    y = inst.label
    if inst.features:
        idx = np.fromiter(inst.features.keys(), dtype=np.int64) - 1
        vals = np.fromiter(inst.features.values(), dtype=np.float64)
    else:
        idx = np.empty(0, dtype=np.int64)
        vals = np.empty(0)
    if y > 0:
        state.t_pos += 1
        state.c_pos = state.c_pos * (1.0 - 1.0 / state.t_pos)
        state.c_pos[idx] += vals / state.t_pos
        state.Z_pos[idx] += np.outer(vals, r)
        state.rho_pos += r
    else:
        state.t_neg += 1
        state.c_neg = state.c_neg * (1.0 - 1.0 / state.t_neg)
        state.c_neg[idx] += vals / state.t_neg
        state.Z_neg[idx] += np.outer(vals, r)
        state.rho_neg += r
    return state


def _sketched_quadratic(
    Z: np.ndarray, rho: np.ndarray, count: int, c: np.ndarray, w: np.ndarray
) -> np.ndarray:
    """(Z Z^T / T - chat chat^T) w without forming any d x d matrix."""
    zw = Z.T @ w
    mean_coef = float(rho @ rho) / (count * count) * float(c @ w)
    return Z @ zw / count - mean_coef * c


def gradient(state: SketchModelState, x: np.ndarray, y: int) -> np.ndarray:
    """Approximate pair-loss gradient, computed in O(tau * d)."""
    c_opp, Z_opp, rho_opp, t_opp = state.opposite(y)
    if t_opp == 0:
        raise NoPairError("no opposite-class instance seen yet")
    v = x - c_opp
    return (
        state.lam * state.w
        - y * v
        + v * (v @ state.w)
        + _sketched_quadratic(Z_opp, rho_opp, t_opp, c_opp, state.w)
    )


def pair_loss(state: SketchModelState, x: np.ndarray, y: int, w: np.ndarray) -> float:
    """Pair loss with the sketched covariance quadratic; 0 when no pair."""
    c_opp, Z_opp, rho_opp, t_opp = state.opposite(y)
    if t_opp == 0:
        return 0.0
    v = x - c_opp
    margin = y * (v @ w)
    zw = Z_opp.T @ w
    quad = float(zw @ zw) / t_opp - float(rho_opp @ rho_opp) / (t_opp * t_opp) * float(c_opp @ w) ** 2
    return 0.5 * state.lam * float(w @ w) + 0.5 * (1.0 - margin) ** 2 + 0.5 * quad


def step(state: SketchModelState, inst: Instance, eta_t: float) -> SketchModelState:
    """Sketch update for the arriving class, then a descent step if paired."""
    update_sketch(state, inst)
    y = inst.label
    if state.opposite(y)[3] > 0:
        x = inst.to_dense(state.dim)
        state.w = state.w - eta_t * gradient(state, x, y)
    return state


def train_sketch(
    ds: Dataset,
    lam: float,
    tau: int,
    policy: StepPolicy = StepPolicy(),
    seed: int = 0,
    shuffle_seed: int | None = None,
    dim: int | None = None,
) -> SketchModelState:
    """Single pass; the seed drives the Gaussian sketch stream only, so two
    learners given the same shuffle_seed see the same instance order."""
    state = SketchModelState.zeros(dim or ds.dim, tau, lam, seed=seed)
    eta = policy.stepsize(lam)
    for inst in stream(ds, shuffle_seed):
        step(state, inst, eta)
    return state
