"""Bias-corrected Adam with global-norm gradient clipping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams


@dataclass
class AdamState:
    m: ModelParams
    v: ModelParams
    t: int = 0

    @classmethod
    def zeros(cls, params: ModelParams) -> "AdamState":
        return cls(params.zeros_like(), params.zeros_like(), 0)


def global_norm(grads: ModelParams) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.arrays())))


def clip_by_global_norm(grads: ModelParams, max_norm: float) -> tuple[ModelParams, float]:
    norm = global_norm(grads)
    if not np.isfinite(norm):
        raise FloatingPointError("non-finite gradient")
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        return ModelParams(*(g * scale for g in grads.arrays())), norm
    return grads, norm


def adam_step(params: ModelParams, grads: ModelParams, state: AdamState, config) -> tuple[ModelParams, AdamState]:
    """One in-place update of ``params`` and ``state``; both are returned for convenience."""
    grads, _ = clip_by_global_norm(grads, config.gradient_clip_norm)
    b1, b2 = config.beta1, config.beta2
    state.t += 1
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params.arrays(), grads.arrays(), state.m.arrays(), state.v.arrays()):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= config.learning_rate * (m / c1) / (np.sqrt(v / c2) + config.epsilon)
    return params, state
