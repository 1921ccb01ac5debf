"""Vectorized grid training: one stream pass updates every (eta, lambda) cell.

The class statistics (means, covariances, sketches) depend only on the data
order, never on the weights, so a whole hyperparameter grid can share one
pass: weights live in a d x G matrix with per-column stepsizes and ridge
strengths.  Columns match running the single-model trainers cell by cell up
to BLAS rounding.  Used by the cross-validation harness.
"""
from __future__ import annotations

import math

import numpy as np

from .baselines import MARGIN_CLIP


def sweep_exact(
    X: np.ndarray, ys: np.ndarray, etas: np.ndarray, lams: np.ndarray
) -> np.ndarray:
    """Exact-statistics learner over all cells; returns weights (d, G).

    Cells with absurd stepsizes may diverge to inf/nan; overflow is expected
    there and the harness scores such columns as useless.
    """
    n, d = X.shape
    W = np.zeros((d, len(etas)))
    c = {1: np.zeros(d), -1: np.zeros(d)}
    S = {1: np.zeros((d, d)), -1: np.zeros((d, d))}
    t = {1: 0, -1: 0}
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            x = X[i]
            y = 1 if ys[i] > 0 else -1
            t[y] += 1
            c_before = c[y]
            c[y] = c_before + (x - c_before) / t[y]
            S[y] += (np.outer(x - c_before, x - c[y]) - S[y]) / t[y]
            o = -y
            if t[o]:
                v = x - c[o]
                grad = W * lams - y * v[:, None] + v[:, None] * (v @ W)[None, :] + S[o] @ W
                W -= etas * grad
    return W


def sweep_univariate(
    X: np.ndarray,
    ys: np.ndarray,
    etas: np.ndarray,
    lams: np.ndarray,
    loss_kind: str,
) -> np.ndarray:
    n, d = X.shape
    W = np.zeros((d, len(etas)))
    t = {1: 0, -1: 0}
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            x = X[i]
            y = 1 if ys[i] > 0 else -1
            t[y] += 1
            weight = t[-y] / (t[1] + t[-1])
            margins = y * (x @ W)
            if loss_kind == "square":
                coef = -2.0 * weight * (1.0 - margins) * y
            else:
                coef = -weight * y * np.exp(-np.clip(margins, -MARGIN_CLIP, MARGIN_CLIP))
            W -= etas * (W * lams + x[:, None] * coef[None, :])
    return W


def sweep_sketch(
    X: np.ndarray,
    ys: np.ndarray,
    etas: np.ndarray,
    lams: np.ndarray,
    tau: int,
    seed: int,
) -> np.ndarray:
    """Sketched learner over all cells; the Gaussian stream is shared, so a
    single-model run with the same seed sees identical sketch rows."""
    n, d = X.shape
    rng = np.random.default_rng(seed)
    W = np.zeros((d, len(etas)))
    c = {1: np.zeros(d), -1: np.zeros(d)}
    Z = {1: np.zeros((d, tau)), -1: np.zeros((d, tau))}
    rho = {1: np.zeros(tau), -1: np.zeros(tau)}
    t = {1: 0, -1: 0}
    root_tau = math.sqrt(tau)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            x = X[i]
            y = 1 if ys[i] > 0 else -1
            r = rng.standard_normal(tau) / root_tau
            t[y] += 1
            c[y] = c[y] + (x - c[y]) / t[y]
            Z[y] += np.outer(x, r)
            rho[y] += r
            o = -y
            if t[o]:
                v = x - c[o]
                quad = Z[o] @ (Z[o].T @ W) / t[o]
                quad -= (rho[o] @ rho[o]) / (t[o] * t[o]) * np.outer(c[o], c[o] @ W)
                grad = W * lams - y * v[:, None] + v[:, None] * (v @ W)[None, :] + quad
                W -= etas * grad
    return W
