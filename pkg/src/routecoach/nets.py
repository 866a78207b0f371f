"""Tiny differentiable function approximators, no autodiff.

One fixed architecture everywhere: input -> 128 -> 128 -> output with tanh
hidden activations, double precision.  Gradients are hand-derived for this
architecture, which keeps them exactly checkable against finite
differences.  The final layer starts at zero so an untrained policy is
exactly uniform over valid actions and an untrained value head outputs 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

HIDDEN = (128, 128)
CHECKPOINT_VERSION = 1


class NetError(ValueError):
    pass


@dataclass
class MlpParams:
    """Per-layer weights/biases; also used as the gradient container."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases):
            raise NetError("weights and biases must pair up")
        for w, b in zip(self.weights, self.biases):
            if w.shape[1] != b.shape[0]:
                raise NetError(f"bias shape {b.shape} does not match weight shape {w.shape}")

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.weights + self.biases])


@dataclass
class AdamState:
    m: MlpParams
    v: MlpParams
    t: int = 0


@dataclass(frozen=True)
class PolicyOutput:
    log_probs: np.ndarray  # (m,), -inf on masked slots
    probs: np.ndarray      # (m,), exactly 0 on masked slots
    entropy: float


def init_mlp(rng: np.random.Generator, in_dim: int, out_dim: int) -> MlpParams:
    """Scaled-uniform hidden layers, zero final layer, zero biases."""
    dims = (in_dim, *HIDDEN, out_dim)
    weights, biases = [], []
    for i in range(len(dims) - 1):
        fan_in, fan_out = dims[i], dims[i + 1]
        if i == len(dims) - 2:
            w = np.zeros((fan_in, fan_out))
        else:
            limit = np.sqrt(6.0 / fan_in)
            w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def init_adam(params: MlpParams) -> AdamState:
    zeros = MlpParams(
        [np.zeros_like(w) for w in params.weights],
        [np.zeros_like(b) for b in params.biases],
    )
    return AdamState(m=zeros, v=zeros.copy(), t=0)


# -- forward / backward ----------------------------------------------------

def _forward(params: MlpParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h1 = np.tanh(x @ params.weights[0] + params.biases[0])
    h2 = np.tanh(h1 @ params.weights[1] + params.biases[1])
    out = h2 @ params.weights[2] + params.biases[2]
    return h1, h2, out


def mlp_forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Raw network outputs for a single input (dim,) or a batch (N, dim)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return _forward(params, x[None, :])[2][0]
    return _forward(params, x)[2]


def mlp_backward(params: MlpParams, x: np.ndarray, upstream: np.ndarray) -> MlpParams:
    """Gradients of ``sum(upstream * outputs)`` w.r.t. every parameter.

    ``upstream`` has one row per batch element; gradients sum over the
    batch.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    upstream = np.atleast_2d(np.asarray(upstream, dtype=float))
    if x.shape[0] == 0:
        raise NetError("empty batch")
    if upstream.shape != (x.shape[0], params.out_dim):
        raise NetError(f"upstream shape {upstream.shape} does not match batch/out dims")
    h1, h2, _ = _forward(params, x)
    dW2 = h2.T @ upstream
    db2 = upstream.sum(axis=0)
    dz2 = (upstream @ params.weights[2].T) * (1.0 - h2 * h2)
    dW1 = h1.T @ dz2
    db1 = dz2.sum(axis=0)
    dz1 = (dz2 @ params.weights[1].T) * (1.0 - h1 * h1)
    dW0 = x.T @ dz1
    db0 = dz1.sum(axis=0)
    return MlpParams([dW0, dW1, dW2], [db0, db1, db2])


# -- masked categorical policy ----------------------------------------------

def masked_log_softmax(logits: np.ndarray, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(log_probs, probs, entropy) of a softmax restricted to mask-true slots.

    Masked slots get probability exactly 0 and log-probability -inf; they
    never influence the normalization, so a logit change there cannot
    change the output.
    """
    logits = np.atleast_2d(np.asarray(logits, dtype=float))
    masks = np.atleast_2d(np.asarray(masks, dtype=bool))
    if not masks.any(axis=1).all():
        raise NetError("all-false action mask")
    neg_inf = np.where(masks, logits, -np.inf)
    zmax = neg_inf.max(axis=1, keepdims=True)
    shifted = np.where(masks, logits - zmax, -np.inf)
    exp = np.where(masks, np.exp(np.where(masks, shifted, 0.0)), 0.0)
    total = exp.sum(axis=1, keepdims=True)
    probs = exp / total
    log_probs = np.where(masks, shifted - np.log(total), -np.inf)
    plogp = np.where(probs > 0, probs * np.where(masks, log_probs, 0.0), 0.0)
    entropy = -plogp.sum(axis=1)
    return log_probs, probs, entropy


def policy_forward(params: MlpParams, obs: np.ndarray, mask: np.ndarray) -> PolicyOutput:
    logits = mlp_forward(params, np.asarray(obs, dtype=float))
    log_probs, probs, entropy = masked_log_softmax(logits[None, :], np.asarray(mask)[None, :])
    return PolicyOutput(log_probs=log_probs[0], probs=probs[0], entropy=float(entropy[0]))


def policy_forward_batch(
    params: MlpParams, obs: np.ndarray, masks: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    logits = mlp_forward(params, obs)
    return masked_log_softmax(logits, masks)


def policy_backward(
    params: MlpParams,
    obs: np.ndarray,
    masks: np.ndarray,
    dlogp: np.ndarray,
    dentropy: np.ndarray | float = 0.0,
) -> MlpParams:
    """Gradients of ``sum(dlogp * log_probs) + sum(dentropy * entropy)``.

    ``dlogp`` is (N, m) upstream on the masked log-probabilities (entries
    for masked slots must be 0), ``dentropy`` is (N,) upstream on the
    per-sample policy entropy.  Chain rule through the masked softmax:

        d log p_a / d z_j = delta_aj - p_j
        d H / d z_j       = -p_j (log p_j + H)
    """
    obs = np.atleast_2d(np.asarray(obs, dtype=float))
    masks = np.atleast_2d(np.asarray(masks, dtype=bool))
    dlogp = np.atleast_2d(np.asarray(dlogp, dtype=float))
    dent = np.broadcast_to(np.asarray(dentropy, dtype=float), (obs.shape[0],))
    logits = mlp_forward(params, obs)
    log_probs, probs, entropy = masked_log_softmax(logits, masks)
    row_sum = dlogp.sum(axis=1, keepdims=True)
    up = dlogp - probs * row_sum
    safe_logp = np.where(masks, log_probs, 0.0)
    up = up + dent[:, None] * (-probs * (safe_logp + entropy[:, None]))
    up = np.where(masks, up, 0.0)
    return mlp_backward(params, obs, up)


# -- scalar value head -------------------------------------------------------

def value_forward(params: MlpParams, obs: np.ndarray) -> float | np.ndarray:
    """Scalar value of one observation, or a vector for a batch."""
    out = mlp_forward(params, obs)
    if out.ndim == 1:
        return float(out[0])
    return out[:, 0]


def value_backward(params: MlpParams, obs: np.ndarray, dvalues: np.ndarray) -> MlpParams:
    dvalues = np.asarray(dvalues, dtype=float).reshape(-1, 1)
    return mlp_backward(params, obs, dvalues)


# -- optimizer ----------------------------------------------------------------

def adam_step(
    params: MlpParams,
    grads: MlpParams,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[MlpParams, AdamState]:
    """One bias-corrected Adam update; fails fast on non-finite gradients."""
    for g in grads.weights + grads.biases:
        if not np.isfinite(g).all():
            raise NetError("non-finite gradient")
    t = state.t + 1
    new_w, new_b = [], []
    new_mw, new_mb, new_vw, new_vb = [], [], [], []
    for kind in ("weights", "biases"):
        for p, g, m, v in zip(
            getattr(params, kind), getattr(grads, kind),
            getattr(state.m, kind), getattr(state.v, kind),
        ):
            m2 = beta1 * m + (1 - beta1) * g
            v2 = beta2 * v + (1 - beta2) * g * g
            m_hat = m2 / (1 - beta1 ** t)
            v_hat = v2 / (1 - beta2 ** t)
            p2 = p - lr * m_hat / (np.sqrt(v_hat) + eps)
            if kind == "weights":
                new_w.append(p2); new_mw.append(m2); new_vw.append(v2)
            else:
                new_b.append(p2); new_mb.append(m2); new_vb.append(v2)
    return (
        MlpParams(new_w, new_b),
        AdamState(m=MlpParams(new_mw, new_mb), v=MlpParams(new_vw, new_vb), t=t),
    )


def neg(grads: MlpParams) -> MlpParams:
    return MlpParams([-w for w in grads.weights], [-b for b in grads.biases])


def add(a: MlpParams, b: MlpParams) -> MlpParams:
    return MlpParams(
        [wa + wb for wa, wb in zip(a.weights, b.weights)],
        [ba + bb for ba, bb in zip(a.biases, b.biases)],
    )


# -- checkpoints ---------------------------------------------------------------

def save_params(path: str | Path, params: MlpParams) -> None:
    arrays = {"version": np.array(CHECKPOINT_VERSION)}
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        arrays[f"w{i}"] = w
        arrays[f"b{i}"] = b
    np.savez(path, **arrays)


def load_params(path: str | Path) -> MlpParams:
    with np.load(path) as data:
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise NetError(f"unsupported checkpoint version {version}")
        weights, biases = [], []
        i = 0
        while f"w{i}" in data:
            weights.append(data[f"w{i}"].astype(float))
            biases.append(data[f"b{i}"].astype(float))
            i += 1
    return MlpParams(weights, biases)
