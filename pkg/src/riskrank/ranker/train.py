"""Pairwise training with relaxed (concrete) dropout gates.

During training every head gate is a concrete relaxation of a Bernoulli
drop mask, ``drop = logistic((logit_p + logit(u)) / t)`` with uniform noise
``u``, so the drop rate receives a gradient. Each pair sees one gate sample
per document. Gradients are derived by hand; see ``objective``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DomainError, TrainingError
from .model import MlpRanker, logistic, logit

log = logging.getLogger(__name__)

LOSSES = ("relaxed_hinge", "pairwise_ce")
_NOISE_EPS = 1e-7


@dataclass(frozen=True)
class TrainConfig:
    loss: str = "relaxed_hinge"
    learning_rate: float = 0.05
    epochs: int = 30
    batch_size: int = 64
    temperature: float = 0.1
    dropout_reg: float = 1e-4
    weight_decay: float = 1e-5
    tau: float = 1.0
    seed: int = 0
    # False trains a plain deterministic network (gates off, rates frozen).
    dropout: bool = True
    # False freezes the drop rates at their initial value.
    learn_rates: bool = True
    # Rescale each minibatch gradient to at most this global L2 norm (0 disables).
    clip_norm: float = 10.0

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise DomainError(f"unknown loss {self.loss!r}; expected one of {LOSSES}")
        positive = ("learning_rate", "epochs", "batch_size", "temperature", "tau")
        for name in positive:
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        if self.dropout_reg < 0 or self.weight_decay < 0 or self.clip_norm < 0:
            raise DomainError("regularizer weights and clip_norm must be non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class GateNoise:
    """Uniform noise for the two head gates of the positive and negative document."""

    pos_hidden: np.ndarray
    pos_out: np.ndarray
    neg_hidden: np.ndarray
    neg_out: np.ndarray

    @classmethod
    def draw(cls, rng: np.random.Generator, batch: int, k: int) -> "GateNoise":
        u = np.clip(rng.random((4, batch, k)), _NOISE_EPS, 1.0 - _NOISE_EPS)
        return cls(u[0], u[1], u[2], u[3])


def gaussian_nll(target, g, tau: float = 1.0):
    """Negative log-likelihood of ``target`` under N(g, 1/tau)."""
    return 0.5 * tau * (target - g) ** 2 - 0.5 * math.log(tau) + 0.5 * math.log(2.0 * math.pi)


def pair_loss(g, loss: str, tau: float = 1.0):
    """Data term of one pair given the score difference g = f(x+) - f(x-)."""
    g = np.asarray(g, dtype=np.float64)
    if loss == "relaxed_hinge":
        return 0.5 * tau * (1.0 - g) ** 2
    if loss == "pairwise_ce":
        return np.logaddexp(0.0, -g)
    raise DomainError(f"unknown loss {loss!r}")


def _pair_loss_grad(g: np.ndarray, loss: str, tau: float) -> np.ndarray:
    if loss == "relaxed_hinge":
        return -tau * (1.0 - g)
    return -logistic(-g)


def _gate(logit_p: float, u: np.ndarray | None, temperature: float):
    """Relaxed keep scale r = (1 - drop) / (1 - p) and dr/dlogit_p."""
    if u is None:
        return 1.0, None
    p, q = float(logistic(logit_p)), float(logistic(-logit_p))
    z = (logit_p + logit(u)) / temperature
    drop, keep = logistic(z), logistic(-z)
    r = keep / q
    dr = (-drop * keep / temperature) / q + keep * p / q
    return r, dr


def _forward(model: MlpRanker, x: np.ndarray, u_hidden, u_out, temperature: float):
    acts = [x]
    h = x
    for layer in model.trunk:
        h = np.maximum(layer(h), 0.0)
        acts.append(h)
    r1, dr1 = _gate(model.logit_p[0], u_hidden, temperature)
    x1 = h * r1
    a1 = model.hidden(x1)
    h1 = np.maximum(a1, 0.0)
    r2, dr2 = _gate(model.logit_p[1], u_out, temperature)
    x2 = h1 * r2
    f = x2 @ model.out.weight[:, 0] + model.out.bias[0]
    cache = dict(acts=acts, r1=r1, dr1=dr1, x1=x1, a1=a1, h1=h1, r2=r2, dr2=dr2, x2=x2)
    return f, cache


def _backward(model: MlpRanker, df: np.ndarray, cache: dict) -> list[np.ndarray]:
    grads_trunk = []
    g_out_w = (cache["x2"].T @ df)[:, None]
    g_out_b = np.array([df.sum()])
    dx2 = df[:, None] * model.out.weight[:, 0][None, :]
    dh1 = dx2 * cache["r2"]
    g_logit = np.zeros(2)
    if cache["dr2"] is not None:
        g_logit[1] = np.sum(dx2 * cache["h1"] * cache["dr2"])
    da1 = dh1 * (cache["a1"] > 0)
    g_hid_w = cache["x1"].T @ da1
    g_hid_b = da1.sum(axis=0)
    dx1 = da1 @ model.hidden.weight.T
    acts = cache["acts"]
    dh = dx1 * cache["r1"]
    if cache["dr1"] is not None:
        g_logit[0] = np.sum(dx1 * acts[-1] * cache["dr1"])
    for i in range(len(model.trunk) - 1, -1, -1):
        da = dh * (acts[i + 1] > 0)
        grads_trunk.append((acts[i].T @ da, da.sum(axis=0)))
        dh = da @ model.trunk[i].weight.T
    grads = []
    for gw, gb in reversed(grads_trunk):
        grads += [gw, gb]
    return grads + [g_hid_w, g_hid_b, g_out_w, g_out_b, g_logit]


def _add(acc: list[np.ndarray], more: list[np.ndarray]) -> list[np.ndarray]:
    return [a + b for a, b in zip(acc, more)]


def objective(
    model: MlpRanker,
    x_pos: np.ndarray,
    x_neg: np.ndarray,
    noise: GateNoise | None,
    config: TrainConfig,
) -> tuple[float, list[np.ndarray]]:
    """Mean pair loss plus regularizers, and its gradient per parameter array.

    Regularizers: ``weight_decay * ||theta||^2`` over all weights and biases
    (the L2 term standing in for the KL divergence) and, per gated layer,
    ``dropout_reg * (p log p + (1 - p) log(1 - p))``, i.e. minus the binary
    entropy of the drop rate. ``noise=None`` evaluates the ungated network.
    """
    t = config.temperature
    gated = noise is not None
    f_pos, c_pos = _forward(model, x_pos, noise.pos_hidden if gated else None, noise.pos_out if gated else None, t)
    f_neg, c_neg = _forward(model, x_neg, noise.neg_hidden if gated else None, noise.neg_out if gated else None, t)
    g = f_pos - f_neg
    n = g.size
    data = float(np.mean(pair_loss(g, config.loss, config.tau)))
    dg = _pair_loss_grad(g, config.loss, config.tau) / n
    grads = _add(_backward(model, dg, c_pos), _backward(model, -dg, c_neg))

    params = model.parameters()
    decay = 0.0
    for i, p in enumerate(params[:-1]):
        decay += float(np.sum(p * p))
        grads[i] = grads[i] + 2.0 * config.weight_decay * p
    loss = data + config.weight_decay * decay

    if gated:
        p = model.drop_rates
        q = model.keep_probs
        loss += config.dropout_reg * float(np.sum(p * np.log(p) + q * np.log(q)))
        # d/dl [p log p + (1-p) log(1-p)] = logit(p) * p (1 - p) = l * p (1 - p)
        grads[-1] = grads[-1] + config.dropout_reg * model.logit_p * p * q
    if not (gated and config.learn_rates):
        grads[-1] = np.zeros_like(grads[-1])
    return loss, grads


def train(
    model: MlpRanker,
    x_pos: np.ndarray,
    x_neg: np.ndarray,
    config: TrainConfig,
) -> tuple[MlpRanker, list[float]]:
    """Minibatch SGD on (positive, negative) feature pairs.

    Returns a trained copy of ``model`` and the per-epoch mean loss.
    """
    x_pos = np.asarray(x_pos, dtype=np.float64)
    x_neg = np.asarray(x_neg, dtype=np.float64)
    if x_pos.shape != x_neg.shape or x_pos.ndim != 2 or x_pos.shape[0] == 0:
        raise DomainError("training needs equally shaped, non-empty (pairs, dim) arrays")
    if x_pos.shape[1] != model.input_dim:
        raise DomainError(f"feature dimension {x_pos.shape[1]} does not match model input {model.input_dim}")
    model = model.copy()
    rng = np.random.default_rng(config.seed)
    params = model.parameters()
    k = model.hidden_dim
    trace = []
    for epoch in range(config.epochs):
        order = rng.permutation(x_pos.shape[0])
        losses, sizes = [], []
        for start in range(0, order.size, config.batch_size):
            idx = order[start : start + config.batch_size]
            noise = GateNoise.draw(rng, idx.size, k) if config.dropout else None
            loss, grads = objective(model, x_pos[idx], x_neg[idx], noise, config)
            if not math.isfinite(loss):
                raise TrainingError("loss is not finite", epoch)
            step = config.learning_rate
            if config.clip_norm:
                norm = math.sqrt(sum(float(np.sum(gr * gr)) for gr in grads))
                if norm > config.clip_norm:
                    step *= config.clip_norm / norm
            for p, gr in zip(params, grads):
                p -= step * gr
            losses.append(loss)
            sizes.append(idx.size)
        trace.append(float(np.average(losses, weights=sizes)))
        log.debug("epoch %d loss %.6f p=%s", epoch, trace[-1], model.drop_rates)
    return model, trace
