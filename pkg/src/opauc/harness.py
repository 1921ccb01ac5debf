"""Cross-validation benchmark harness: stratified folds, grid search, trials.

Every random choice (fold assignment, stream order, sketch rows, projection
maps) draws its seed from a stable derivation of (seed, trial, fold, role),
so a configuration maps to exactly one report no matter how many worker
threads run.  OPAUC_THREADS caps the number of concurrent (trial, fold) jobs.
"""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from . import sweep
from .baselines import make_wrapper, project_dataset, train_univariate
from .data import Dataset, fit_scaling, load_libsvm, scale_dataset
from .evaluation import auc
from .exact import StepPolicy, train_exact
from .models import Model, model_scores
from .sketch import train_sketch

ALGOS = ("opauc", "opauc-r", "uni-squ", "uni-exp", "opauc-f", "opauc-rp")

DEFAULT_ETA_GRID = tuple(2.0**k for k in range(-12, 11))
DEFAULT_LAMBDA_GRID = tuple(2.0**k for k in range(-10, 3))

INNER_FOLDS = 5


class HarnessError(RuntimeError):
    """Raised when a configuration cannot be evaluated on the given data."""


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: str
    algo: str = "opauc"
    eta_grid: tuple[float, ...] = DEFAULT_ETA_GRID
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    tau: int = 50
    proj_dim: int = 1000
    folds: int = 5
    trials: int = 5
    seed: int = 0
    positive_labels: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.folds < 2:
            raise ValueError("need at least 2 folds")
        if self.trials < 1:
            raise ValueError("need at least 1 trial")
        if not self.eta_grid or not self.lambda_grid:
            raise ValueError("hyperparameter grids must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        out = {
            "data_path": self.data_path,
            "algo": self.algo,
            "eta_grid": list(self.eta_grid),
            "lambda_grid": list(self.lambda_grid),
            "folds": self.folds,
            "trials": self.trials,
            "seed": self.seed,
        }
        if self.algo == "opauc-r":
            out["tau"] = self.tau
        if self.algo in ("opauc-f", "opauc-rp"):
            out["proj_dim"] = self.proj_dim
        if self.positive_labels is not None:
            out["positive_labels"] = list(self.positive_labels)
        return out


@dataclass
class EvalReport:
    config: dict[str, Any]
    cells: list[dict[str, float]]
    chosen: dict[str, float]
    per_fold: list[dict[str, Any]]
    outer_auc: list[float]
    mean: float
    std: float
    wall_time_sec: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config,
                "cells": self.cells,
                "chosen": self.chosen,
                "per_fold": self.per_fold,
                "outer_auc": self.outer_auc,
                "mean": self.mean,
                "std": self.std,
                "wall_time_sec": self.wall_time_sec,
            }
        )

    def to_csv(self) -> str:
        lines = ["trial,fold,eta,lambda,auc"]
        for row in self.per_fold:
            lines.append(
                f"{row['trial']},{row['fold']},{row['eta']!r},{row['lambda']!r},{row['auc']!r}"
            )
        return "\n".join(lines) + "\n"


def derive_seed(*keys: int) -> int:
    """Stable child seed from integer keys; independent of process or thread."""
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


def stratified_kfold(labels: np.ndarray, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Index arrays per fold with class ratios within one instance of global."""
    labels = np.asarray(labels)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in (1, -1):
        members = np.flatnonzero(labels == cls)
        perm = rng.permutation(len(members))
        for j, idx in enumerate(members[perm]):
            folds[j % k].append(int(idx))
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


def grid_select(
    inner_results: Iterable[tuple[float, float, float]]
) -> tuple[float, float]:
    """(eta, lambda) with the best mean inner AUC; ties prefer smaller eta,
    then smaller lambda."""
    cells = list(inner_results)
    if not cells:
        raise ValueError("no grid cells evaluated")
    best = min(cells, key=lambda c: (-c[2], c[0], c[1]))
    return float(best[0]), float(best[1])


def _cell_grids(config: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Flattened per-cell (eta, lambda) arrays in a fixed enumeration order."""
    etas, lams = [], []
    for eta in config.eta_grid:
        for lam in config.lambda_grid:
            etas.append(eta)
            lams.append(lam)
    return np.array(etas), np.array(lams)


def _sweep_weights(
    config: ExperimentConfig,
    train: Dataset,
    etas: np.ndarray,
    lams: np.ndarray,
    stream_seed: int,
    aux_seed: int,
) -> np.ndarray:
    """Grid weights (d, G) on one scaled training stream."""
    order = np.random.default_rng(stream_seed).permutation(len(train))
    X, ys = train.to_dense()
    X, ys = X[order], ys[order]
    if config.algo in ("opauc", "opauc-f", "opauc-rp"):
        return sweep.sweep_exact(X, ys, etas, lams)
    if config.algo == "opauc-r":
        return sweep.sweep_sketch(X, ys, etas, lams, config.tau, aux_seed)
    return sweep.sweep_univariate(
        X, ys, etas, lams, "square" if config.algo == "uni-squ" else "exponential"
    )


def _train_single(
    config: ExperimentConfig,
    train: Dataset,
    eta: float,
    lam: float,
    stream_seed: int,
    aux_seed: int,
) -> Model:
    policy = StepPolicy(kind="constant", eta=eta)
    if config.algo in ("opauc", "opauc-f", "opauc-rp"):
        return train_exact(train, lam, policy=policy, shuffle_seed=stream_seed)
    if config.algo == "opauc-r":
        return train_sketch(
            train, lam, config.tau, policy=policy, seed=aux_seed, shuffle_seed=stream_seed
        )
    kind = "square" if config.algo == "uni-squ" else "exponential"
    return train_univariate(train, lam, kind, policy=policy, shuffle_seed=stream_seed)


def _check_both_classes(ds: Dataset, what: str) -> None:
    if ds.pos_count == 0 or ds.neg_count == 0:
        raise HarnessError(f"{what} contains a single class; AUC is undefined")


def _outer_job(
    config: ExperimentConfig,
    ds: Dataset,
    trial: int,
    fold: int,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
) -> dict[str, Any]:
    etas, lams = _cell_grids(config)
    train_raw = ds.subset(train_idx)
    test_raw = ds.subset(test_idx)
    _check_both_classes(train_raw, f"trial {trial} fold {fold} training split")
    _check_both_classes(test_raw, f"trial {trial} fold {fold} test split")

    wrapper = None
    if config.algo in ("opauc-f", "opauc-rp"):
        mode = "subsample" if config.algo == "opauc-f" else "gaussian_projection"
        wrapper = make_wrapper(
            mode, ds.dim, config.proj_dim, derive_seed(config.seed, trial, fold, 7)
        )

    inner_rng = np.random.default_rng(derive_seed(config.seed, trial, fold, 1))
    inner_folds = stratified_kfold(train_raw.labels, INNER_FOLDS, inner_rng)
    cell_sum = np.zeros(len(etas))
    for g, val_rel in enumerate(inner_folds):
        tr_rel = np.setdiff1d(np.arange(len(train_raw)), val_rel)
        inner_train_raw = train_raw.subset(tr_rel)
        inner_val_raw = train_raw.subset(val_rel)
        _check_both_classes(inner_train_raw, f"trial {trial} fold {fold} inner split {g}")
        _check_both_classes(inner_val_raw, f"trial {trial} fold {fold} inner split {g}")
        params = fit_scaling(inner_train_raw)
        inner_train = scale_dataset(inner_train_raw, params)
        inner_val = scale_dataset(inner_val_raw, params)
        if wrapper is not None:
            inner_train = project_dataset(wrapper, inner_train)
            inner_val = project_dataset(wrapper, inner_val)
        W = _sweep_weights(
            config,
            inner_train,
            etas,
            lams,
            stream_seed=derive_seed(config.seed, trial, fold, g, 2),
            aux_seed=derive_seed(config.seed, trial, fold, g, 3),
        )
        X_val, y_val = inner_val.to_dense(dim=W.shape[0])
        scores = X_val @ W
        for j in range(len(etas)):
            col = scores[:, j]
            # diverged grid cells (inf/nan weights) rank as useless models
            cell_sum[j] += auc(col, y_val) if np.isfinite(col).all() else 0.0
    cell_auc = cell_sum / len(inner_folds)
    eta_star, lam_star = grid_select(zip(etas, lams, cell_auc))

    params = fit_scaling(train_raw)
    train = scale_dataset(train_raw, params)
    test = scale_dataset(test_raw, params)
    if wrapper is not None:
        train = project_dataset(wrapper, train)
    model = _train_single(
        config,
        train,
        eta_star,
        lam_star,
        stream_seed=derive_seed(config.seed, trial, fold, 4),
        aux_seed=derive_seed(config.seed, trial, fold, 5),
    )
    if wrapper is not None:
        wrapper.inner = model
        model = wrapper
    test_auc = auc(model_scores(model, test), test.labels)
    return {
        "trial": trial,
        "fold": fold,
        "eta": float(eta_star),
        "lambda": float(lam_star),
        "auc": float(test_auc),
        "cell_auc": cell_auc,
    }


def _thread_count() -> int:
    raw = os.environ.get("OPAUC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_cv(config: ExperimentConfig, ds: Dataset | None = None) -> EvalReport:
    """Stratified k-fold CV with per-fold inner grid search, over many trials.

    Deterministic end to end for a fixed config; only wall_time_sec varies.
    """
    started = time.perf_counter()
    if ds is None:
        ds = load_libsvm(config.data_path, positive_labels=config.positive_labels)
    _check_both_classes(ds, "dataset")

    jobs = []
    labels = ds.labels
    for trial in range(config.trials):
        fold_rng = np.random.default_rng(derive_seed(config.seed, trial, 0, 0))
        folds = stratified_kfold(labels, config.folds, fold_rng)
        all_idx = np.arange(len(ds))
        for fold, test_idx in enumerate(folds):
            train_idx = np.setdiff1d(all_idx, test_idx)
            jobs.append((trial, fold, train_idx, test_idx))

    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(lambda j: _outer_job(config, ds, j[0], j[1], j[2], j[3]), jobs)
            )
    else:
        rows = [_outer_job(config, ds, *job) for job in jobs]

    etas, lams = _cell_grids(config)
    cell_mean = np.mean([row.pop("cell_auc") for row in rows], axis=0)
    cells = [
        {"eta": float(e), "lambda": float(l), "inner_auc": float(a)}
        for e, l, a in zip(etas, lams, cell_mean)
    ]
    eta_star, lam_star = grid_select(zip(etas, lams, cell_mean))
    outer = [row["auc"] for row in rows]
    return EvalReport(
        config=config.to_dict(),
        cells=cells,
        chosen={"eta": float(eta_star), "lambda": float(lam_star)},
        per_fold=rows,
        outer_auc=outer,
        mean=float(np.mean(outer)),
        std=float(np.std(outer)),
        wall_time_sec=time.perf_counter() - started,
    )
