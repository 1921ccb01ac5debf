"""Online univariate baselines and cheap dimensionality-reduction ablations.

The univariate learners weight each example's loss by the running ratio of
the other class, mimicking cost-sensitive single-instance ranking.  The
projection wrappers shrink the feature space up front (coordinate subsample
or Gaussian random projection) and run the exact learner inside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, Instance, from_instances, stream
from .exact import ExactModelState, StepPolicy, train_exact

# exp() is clipped at this margin magnitude to avoid overflow
MARGIN_CLIP = 30.0


@dataclass
class UnivariateModel:
    dim: int
    lam: float
    loss_kind: str  # "square" | "exponential"
    w: np.ndarray
    t_pos: int = 0
    t_neg: int = 0

    @classmethod
    def zeros(cls, dim: int, lam: float, loss_kind: str) -> "UnivariateModel":
        if loss_kind not in ("square", "exponential"):
            raise ValueError(f"unknown univariate loss {loss_kind!r}")
        return cls(dim=dim, lam=lam, loss_kind=loss_kind, w=np.zeros(dim))


def univariate_loss(model: UnivariateModel, x: np.ndarray, y: int, w: np.ndarray) -> float:
    """Class-ratio-weighted single-instance loss plus the ridge term."""
    t = model.t_pos + model.t_neg
    weight = (model.t_neg if y > 0 else model.t_pos) / t
    margin = y * float(w @ x)
    if model.loss_kind == "square":
        core = (1.0 - margin) ** 2
    else:
        core = math.exp(-min(MARGIN_CLIP, max(-MARGIN_CLIP, margin)))
    return weight * core + 0.5 * model.lam * float(w @ w)


def univariate_gradient(model: UnivariateModel, x: np.ndarray, y: int) -> np.ndarray:
    t = model.t_pos + model.t_neg
    weight = (model.t_neg if y > 0 else model.t_pos) / t
    margin = y * float(model.w @ x)
    if model.loss_kind == "square":
        coef = -2.0 * weight * (1.0 - margin) * y
    else:
        coef = -weight * y * math.exp(-min(MARGIN_CLIP, max(-MARGIN_CLIP, margin)))
    return model.lam * model.w + coef * x


def univariate_step(model: UnivariateModel, x: np.ndarray, y: int, eta: float) -> UnivariateModel:
    """Update counts first, then descend the weighted loss."""
    if y > 0:
        model.t_pos += 1
    else:
        model.t_neg += 1
    model.w = model.w - eta * univariate_gradient(model, x, y)
    return model


def train_univariate(
    ds: Dataset,
    lam: float,
    loss_kind: str,
    policy: StepPolicy = StepPolicy(),
    shuffle_seed: int | None = None,
    dim: int | None = None,
) -> UnivariateModel:
    model = UnivariateModel.zeros(dim or ds.dim, lam, loss_kind)
    eta = policy.stepsize(lam)
    for inst in stream(ds, shuffle_seed):
        univariate_step(model, inst.to_dense(model.dim), inst.label, eta)
    return model


@dataclass
class ProjectionWrapper:
    """Fixed feature-space reduction wrapped around an exact-learner model.

    Either keeps a sorted subset of coordinates, or multiplies by a dense
    Gaussian matrix with N(0, 1/k) entries so the projection is an
    approximate isometry in expectation.
    """

    mode: str  # "subsample" | "gaussian_projection"
    dim: int
    proj_dim: int
    keep: np.ndarray | None = None  # sorted 1-based feature indices
    matrix: np.ndarray | None = None  # dim x proj_dim
    inner: ExactModelState | None = None


def make_wrapper(mode: str, dim: int, proj_dim: int, seed: int) -> ProjectionWrapper:
    if not 1 <= proj_dim < dim:
        raise ValueError(f"projection dim {proj_dim} must satisfy 1 <= k < {dim}")
    rng = np.random.default_rng(seed)
    if mode == "subsample":
        keep = np.sort(rng.choice(dim, size=proj_dim, replace=False)) + 1
        return ProjectionWrapper(mode=mode, dim=dim, proj_dim=proj_dim, keep=keep)
    if mode == "gaussian_projection":
        H = rng.standard_normal((dim, proj_dim)) / math.sqrt(proj_dim)
        return ProjectionWrapper(mode=mode, dim=dim, proj_dim=proj_dim, matrix=H)
    raise ValueError(f"unknown projection mode {mode!r}")


def project_instance(wrap: ProjectionWrapper, x: Instance) -> Instance:
    """Instance in the reduced space; costs O(nnz(x) * k) in projection mode."""
    if wrap.mode == "subsample":
        pos = {int(orig): j + 1 for j, orig in enumerate(wrap.keep)}
        feats = {pos[i]: v for i, v in x.features.items() if i in pos}
        return Instance(features=feats, label=x.label)
    xk = np.zeros(wrap.proj_dim)
    for idx, val in x.features.items():
        if idx <= wrap.dim:
            xk += val * wrap.matrix[idx - 1]
    feats = {j + 1: float(v) for j, v in enumerate(xk) if v != 0.0}
    return Instance(features=feats, label=x.label)


def project_dataset(wrap: ProjectionWrapper, ds: Dataset) -> Dataset:
    return from_instances(
        [project_instance(wrap, inst) for inst in ds.instances], dim=wrap.proj_dim
    )


def train_projected(
    ds: Dataset,
    lam: float,
    mode: str,
    proj_dim: int,
    policy: StepPolicy = StepPolicy(),
    seed: int = 0,
    shuffle_seed: int | None = None,
) -> ProjectionWrapper:
    """Draw the map from seed, transform the stream, train the exact learner."""
    wrap = make_wrapper(mode, ds.dim, proj_dim, seed)
    wrap.inner = train_exact(
        project_dataset(wrap, ds), lam, policy=policy, shuffle_seed=shuffle_seed, dim=proj_dim
    )
    return wrap
