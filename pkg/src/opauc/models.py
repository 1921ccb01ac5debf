"""Model JSON serialization and scoring shared across learner kinds."""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .baselines import ProjectionWrapper, UnivariateModel, project_dataset
from .data import Dataset
from .exact import ExactModelState
from .sketch import SketchModelState

Model = ExactModelState | SketchModelState | UnivariateModel | ProjectionWrapper


def to_dict(model: Model, include_cov: bool = False) -> dict[str, Any]:
    if isinstance(model, ExactModelState):
        out = {
            "kind": "opauc",
            "dim": model.dim,
            "lambda": model.lam,
            "w": model.w.tolist(),
            "c_pos": model.c_pos.tolist(),
            "c_neg": model.c_neg.tolist(),
            "t_pos": model.t_pos,
            "t_neg": model.t_neg,
        }
        if include_cov:
            out["S_pos"] = model.S_pos.tolist()
            out["S_neg"] = model.S_neg.tolist()
        return out
    if isinstance(model, SketchModelState):
        out = {
            "kind": "opauc-r",
            "dim": model.dim,
            "tau": model.tau,
            "lambda": model.lam,
            "seed": model.seed,
            "w": model.w.tolist(),
            "c_pos": model.c_pos.tolist(),
            "c_neg": model.c_neg.tolist(),
            "t_pos": model.t_pos,
            "t_neg": model.t_neg,
        }
        if include_cov:  # sketch matrices on demand, for debugging
            out["Z_pos"] = model.Z_pos.tolist()
            out["Z_neg"] = model.Z_neg.tolist()
            out["rho_pos"] = model.rho_pos.tolist()
            out["rho_neg"] = model.rho_neg.tolist()
        return out
    if isinstance(model, UnivariateModel):
        return {
            "kind": "uni-squ" if model.loss_kind == "square" else "uni-exp",
            "dim": model.dim,
            "lambda": model.lam,
            "w": model.w.tolist(),
            "t_pos": model.t_pos,
            "t_neg": model.t_neg,
        }
    if isinstance(model, ProjectionWrapper):
        out = {
            "kind": "opauc-f" if model.mode == "subsample" else "opauc-rp",
            "dim": model.dim,
            "proj_dim": model.proj_dim,
            "inner": to_dict(model.inner, include_cov=include_cov),
        }
        if model.keep is not None:
            out["keep"] = model.keep.tolist()
        if model.matrix is not None:
            out["matrix"] = model.matrix.tolist()
        return out
    raise TypeError(f"cannot serialize {type(model).__name__}")


def from_dict(raw: dict[str, Any]) -> Model:
    kind = raw["kind"]
    if kind == "opauc":
        state = ExactModelState.zeros(raw["dim"], raw["lambda"])
        state.w = np.asarray(raw["w"], dtype=float)
        state.c_pos = np.asarray(raw["c_pos"], dtype=float)
        state.c_neg = np.asarray(raw["c_neg"], dtype=float)
        state.t_pos = raw["t_pos"]
        state.t_neg = raw["t_neg"]
        if "S_pos" in raw:
            state.S_pos = np.asarray(raw["S_pos"], dtype=float)
            state.S_neg = np.asarray(raw["S_neg"], dtype=float)
        return state
    if kind == "opauc-r":
        state = SketchModelState.zeros(raw["dim"], raw["tau"], raw["lambda"], seed=raw["seed"])
        state.w = np.asarray(raw["w"], dtype=float)
        state.c_pos = np.asarray(raw["c_pos"], dtype=float)
        state.c_neg = np.asarray(raw["c_neg"], dtype=float)
        state.t_pos = raw["t_pos"]
        state.t_neg = raw["t_neg"]
        if "Z_pos" in raw:
            state.Z_pos = np.asarray(raw["Z_pos"], dtype=float)
            state.Z_neg = np.asarray(raw["Z_neg"], dtype=float)
            state.rho_pos = np.asarray(raw["rho_pos"], dtype=float)
            state.rho_neg = np.asarray(raw["rho_neg"], dtype=float)
        return state
    if kind in ("uni-squ", "uni-exp"):
        model = UnivariateModel.zeros(
            raw["dim"], raw["lambda"], "square" if kind == "uni-squ" else "exponential"
        )
        model.w = np.asarray(raw["w"], dtype=float)
        model.t_pos = raw["t_pos"]
        model.t_neg = raw["t_neg"]
        return model
    if kind in ("opauc-f", "opauc-rp"):
        wrap = ProjectionWrapper(
            mode="subsample" if kind == "opauc-f" else "gaussian_projection",
            dim=raw["dim"],
            proj_dim=raw["proj_dim"],
            keep=np.asarray(raw["keep"], dtype=np.int64) if "keep" in raw else None,
            matrix=np.asarray(raw["matrix"], dtype=float) if "matrix" in raw else None,
        )
        wrap.inner = from_dict(raw["inner"])
        return wrap
    raise ValueError(f"unknown model kind {kind!r}")


def to_json(model: Model, include_cov: bool = False) -> str:
    return json.dumps(to_dict(model, include_cov=include_cov))


def from_json(text: str) -> Model:
    return from_dict(json.loads(text))


def model_scores(model: Model, ds: Dataset) -> np.ndarray:
    """Decision scores w . x for each instance, projecting first if wrapped."""
    if isinstance(model, ProjectionWrapper):
        return model_scores(model.inner, project_dataset(model, ds))
    X, _ = ds.to_dense(dim=model.dim)
    return X @ model.w
