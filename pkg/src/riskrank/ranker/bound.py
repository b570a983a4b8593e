"""Gaussian view of the gated output layer and its confidence ceiling.

The final layer's effective weight is ``m * o`` with ``o ~ Bernoulli(q)``
per unit, where ``m = W / q`` undoes the mean-network scaling of the stored
weight ``W``. Its exact first two moments define a Gaussian over the weight
vector; a logistic classifier on a fixed feature map whose weights follow
that Gaussian can never be more confident than
``logistic(||mu|| / sqrt(pi / 8 * lambda_min))``, whatever the input scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateCovarianceError, DomainError
from .model import MlpRanker, logistic, penultimate_features

DEFAULT_DELTAS = (1.0, 10.0, 100.0, 1000.0, 10000.0)
EIGEN_FLOOR = 1e-12


def gaussian_moments(m, keep: float) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of ``m * o`` with independent ``o_k ~ Bernoulli(keep)``."""
    m = np.asarray(m, dtype=np.float64).reshape(-1)
    if not 0.0 < keep <= 1.0:
        raise DomainError(f"keep probability must lie in (0, 1], got {keep}")
    return keep * m, np.diag(m * m * keep * (1.0 - keep))


def last_layer_gaussian(model: MlpRanker) -> tuple[np.ndarray, np.ndarray]:
    keep = float(model.keep_probs[1])
    return gaussian_moments(model.out.weight[:, 0] / keep, keep)


def gaussian_confidence_bound(mu, sigma) -> float:
    """Ceiling ``logistic(||mu|| / sqrt(pi / 8 * lambda_min(sigma)))``."""
    lam = float(np.linalg.eigvalsh(np.asarray(sigma, dtype=np.float64))[0])
    if lam <= EIGEN_FLOOR:
        raise DegenerateCovarianceError(f"smallest covariance eigenvalue {lam:.3g} is not positive")
    return float(logistic(np.linalg.norm(mu) / math.sqrt(math.pi / 8.0 * lam)))


def confidence_bound(model: MlpRanker) -> float:
    return gaussian_confidence_bound(*last_layer_gaussian(model))


@dataclass(frozen=True)
class ProbeRow:
    delta: float
    confidence: float
    bound: float


def bound_probe(
    model: MlpRanker,
    x,
    deltas=DEFAULT_DELTAS,
    n: int = 1000,
    rng: np.random.Generator | None = None,
) -> list[ProbeRow]:
    """Monte Carlo confidence of the Gaussian output layer on ``delta * x``.

    For each scale the penultimate features ``phi`` of ``delta * x`` are
    fixed, ``n`` logits are drawn from N(mu . phi, phi' Sigma phi) (the
    output bias is left out, as the ceiling concerns a linear classifier),
    and the confidence is the larger of the mean logistic probability and
    its complement.
    """
    if n < 1:
        raise DomainError(f"number of samples must be >= 1, got {n}")
    if rng is None:
        rng = np.random.default_rng(model.seed)
    bound = confidence_bound(model)
    mu, sigma = last_layer_gaussian(model)
    x = np.asarray(x, dtype=np.float64)
    rows = []
    for delta in deltas:
        if delta < 0:
            raise DomainError(f"scales must be non-negative, got {delta}")
        phi = penultimate_features(model, float(delta) * x.reshape(1, -1))[0]
        mean = float(mu @ phi)
        std = math.sqrt(max(float(phi @ sigma @ phi), 0.0))
        p = float(np.mean(logistic(mean + std * rng.standard_normal(n))))
        rows.append(ProbeRow(float(delta), max(p, 1.0 - p), bound))
    return rows
