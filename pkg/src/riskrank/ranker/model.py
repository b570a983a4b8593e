"""ReLU feed-forward ranker whose last two layers carry dropout gates.

The trunk maps a d-dimensional (query, document) feature vector to K
hidden units with no dropout. The head is a [K, K] ReLU layer followed by
a [K, 1] linear layer; each head layer's input passes through a gate with
its own learnable drop rate ``p = logistic(logit_p)``. Sampled forward
passes use Bernoulli gates rescaled by 1 / (1 - p), so the deterministic
(mean) network simply leaves the gates out.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, ParseError

CHECKPOINT_MAGIC = "riskrank-mlp"
CHECKPOINT_VERSION = 1


def logistic(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out if out.ndim else float(out)


def logit(p):
    p = np.asarray(p, dtype=np.float64)
    return np.log(p) - np.log1p(-p)


@dataclass
class Dense:
    weight: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weight + self.bias

    def copy(self) -> "Dense":
        return Dense(self.weight.copy(), self.bias.copy())


@dataclass
class MlpRanker:
    trunk: list[Dense]
    hidden: Dense  # head layer [K, K]
    out: Dense  # head layer [K, 1]
    logit_p: np.ndarray = field(default_factory=lambda: np.full(2, float(logit(0.1))))
    seed: int = 0

    def __post_init__(self):
        self.logit_p = np.asarray(self.logit_p, dtype=np.float64).reshape(2)
        if not self.trunk:
            raise DomainError("the trunk needs at least one layer")
        k = self.trunk[-1].weight.shape[1]
        if self.hidden.weight.shape != (k, k) or self.out.weight.shape != (k, 1):
            raise DomainError(f"head shapes {self.hidden.weight.shape}, {self.out.weight.shape} do not match K={k}")
        for a, b in zip(self.trunk, self.trunk[1:]):
            if a.weight.shape[1] != b.weight.shape[0]:
                raise DomainError("trunk layer shapes do not chain")

    @property
    def input_dim(self) -> int:
        return self.trunk[0].weight.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.hidden.weight.shape[0]

    @property
    def depth(self) -> int:
        return len(self.trunk)

    @property
    def drop_rates(self) -> np.ndarray:
        return logistic(self.logit_p)

    @property
    def keep_probs(self) -> np.ndarray:
        return logistic(-self.logit_p)

    def layers(self) -> list[Dense]:
        return [*self.trunk, self.hidden, self.out]

    def parameters(self) -> list[np.ndarray]:
        """All trainable arrays in a fixed order; the rate logits come last."""
        params = []
        for layer in self.layers():
            params += [layer.weight, layer.bias]
        return params + [self.logit_p]

    def copy(self) -> "MlpRanker":
        return MlpRanker([l.copy() for l in self.trunk], self.hidden.copy(), self.out.copy(), self.logit_p.copy(), self.seed)

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, flat: np.ndarray) -> None:
        offset = 0
        for p in self.parameters():
            p[...] = flat[offset : offset + p.size].reshape(p.shape)
            offset += p.size


def init_ranker(
    input_dim: int,
    hidden_dim: int = 32,
    depth: int = 2,
    drop_rate: float = 0.1,
    seed: int = 0,
) -> MlpRanker:
    """He-initialized ranker with ``depth`` trunk layers."""
    if min(input_dim, hidden_dim, depth) < 1:
        raise DomainError("input_dim, hidden_dim and depth must be positive")
    if not 0.0 < drop_rate < 1.0:
        raise DomainError(f"drop rate must lie in (0, 1), got {drop_rate}")
    rng = np.random.default_rng(seed)

    def dense(fan_in, fan_out):
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        return Dense(w, np.zeros(fan_out))

    dims = [input_dim] + [hidden_dim] * depth
    trunk = [dense(a, b) for a, b in zip(dims, dims[1:])]
    return MlpRanker(trunk, dense(hidden_dim, hidden_dim), dense(hidden_dim, 1), np.full(2, float(logit(drop_rate))), seed)


def _check_features(model: MlpRanker, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.input_dim:
        raise DomainError(f"feature dimension {x.shape[-1]} does not match model input {model.input_dim}")
    return x


def trunk_features(model: MlpRanker, x) -> np.ndarray:
    """Deterministic ReLU feature map feeding the stochastic head."""
    h = _check_features(model, x)
    for layer in model.trunk:
        h = np.maximum(layer(h), 0.0)
    return h


def penultimate_features(model: MlpRanker, x) -> np.ndarray:
    """Input of the final [K, 1] layer under the mean network."""
    return np.maximum(model.hidden(trunk_features(model, x)), 0.0)


def head_sample(model: MlpRanker, h: np.ndarray, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Bernoulli-gated head passes on trunk features ``h`` of shape (rows, K).

    With ``n`` given, a single row of ``h`` is broadcast to ``n`` passes.
    Gates are 0/1 masks; the 1 / keep rescaling is applied after each
    product, which is the same map with fewer operations.
    """
    keep1, keep2 = model.keep_probs
    rows = h.shape[0] if n is None else n
    u = rng.random((2, rows, h.shape[1]))
    z = np.maximum((h * (u[0] < keep1)) @ model.hidden.weight * (1.0 / keep1) + model.hidden.bias, 0.0)
    return (z * (u[1] < keep2)) @ model.out.weight[:, 0] * (1.0 / keep2) + model.out.bias[0]


def forward_sample(model: MlpRanker, x, rng: np.random.Generator):
    """A single stochastic score for ``x`` (or one per row of a 2-D batch)."""
    x = _check_features(model, x)
    h = trunk_features(model, np.atleast_2d(x))
    s = head_sample(model, h, rng)
    return float(s[0]) if x.ndim == 1 else s


def forward_deterministic(model: MlpRanker, x):
    """Mean-network score: gates replaced by their expectation."""
    x = _check_features(model, x)
    z = penultimate_features(model, np.atleast_2d(x))
    s = z @ model.out.weight[:, 0] + model.out.bias[0]
    return float(s[0]) if x.ndim == 1 else s


def sample_scores(model: MlpRanker, x, n: int = 150, rng: np.random.Generator | None = None) -> np.ndarray:
    """``n`` MC-dropout scores for one feature vector.

    The trunk runs once; only the gated head is repeated, so the marginal
    cost of extra samples does not depend on trunk depth.
    """
    if n < 1:
        raise DomainError(f"number of samples must be >= 1, got {n}")
    if rng is None:
        rng = sampling_rng(model.seed)
    h = trunk_features(model, np.asarray(x, dtype=np.float64).reshape(1, -1))
    return head_sample(model, h, rng, n)


def sampling_rng(seed) -> np.random.Generator:
    """Generator used for gate draws; SFC64 produces uniforms markedly faster than PCG64."""
    return np.random.Generator(np.random.SFC64(seed))


def document_rng(seed: int, query_id: str, doc_id: str) -> np.random.Generator:
    """Generator owned by one (query, document) so any scheduling gives the same draws."""
    digest = hashlib.sha256(f"{query_id}\x1f{doc_id}".encode()).digest()
    return sampling_rng([seed, int.from_bytes(digest[:16], "little")])


# --- checkpoint -------------------------------------------------------------
#
# Text format, one header line then one block per array:
#   riskrank-mlp 1
#   dims <input_dim> <hidden_dim> <depth> seed <seed>
#   meta <key> <value>            (zero or more, ignored when loading)
#   array <name> <rows> <cols>
#   <row values separated by spaces, 17 significant digits>


def _write_array(buf: io.StringIO, name: str, arr: np.ndarray) -> None:
    arr2 = arr.reshape(1, -1) if arr.ndim == 1 else arr
    buf.write(f"array {name} {arr2.shape[0]} {arr2.shape[1]}\n")
    for row in arr2:
        buf.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def save_checkpoint(model: MlpRanker, meta: dict | None = None) -> str:
    """Serialize ``model``; ``meta`` entries are stored as provenance lines."""
    buf = io.StringIO()
    buf.write(f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\n")
    buf.write(f"dims {model.input_dim} {model.hidden_dim} {model.depth} seed {model.seed}\n")
    for key, value in (meta or {}).items():
        if any(c.isspace() for c in str(key)) or "\n" in str(value):
            raise DomainError(f"checkpoint meta key {key!r} or its value is not single-token/single-line")
        buf.write(f"meta {key} {value}\n")
    for i, layer in enumerate(model.trunk):
        _write_array(buf, f"trunk{i}.weight", layer.weight)
        _write_array(buf, f"trunk{i}.bias", layer.bias)
    for name, layer in (("hidden", model.hidden), ("out", model.out)):
        _write_array(buf, f"{name}.weight", layer.weight)
        _write_array(buf, f"{name}.bias", layer.bias)
    _write_array(buf, "logit_p", model.logit_p)
    return buf.getvalue()


def load_checkpoint(text: str | bytes) -> MlpRanker:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines()
    if not lines or lines[0].split() != [CHECKPOINT_MAGIC, str(CHECKPOINT_VERSION)]:
        raise ParseError("not a riskrank checkpoint", 1)
    head = lines[1].split()
    if len(head) != 6 or head[0] != "dims" or head[4] != "seed":
        raise ParseError("malformed dims header", 2)
    input_dim, hidden_dim, depth, seed = int(head[1]), int(head[2]), int(head[3]), int(head[5])
    arrays: dict[str, np.ndarray] = {}
    i = 2
    while i < len(lines):
        parts = lines[i].split()
        if parts and parts[0] == "meta":
            i += 1
            continue
        if len(parts) != 4 or parts[0] != "array":
            raise ParseError(f"expected array header, got {lines[i]!r}", i + 1)
        name, rows, cols = parts[1], int(parts[2]), int(parts[3])
        block = lines[i + 1 : i + 1 + rows]
        try:
            arr = np.array([[float(v) for v in row.split()] for row in block])
        except ValueError as exc:
            raise ParseError(str(exc), i + 2) from None
        if arr.shape != (rows, cols):
            raise ParseError(f"array {name} has shape {arr.shape}, header says {(rows, cols)}", i + 1)
        arrays[name] = arr
        i += 1 + rows

    def vec(name):
        return arrays[name].reshape(-1).copy()

    try:
        trunk = [Dense(arrays[f"trunk{j}.weight"].copy(), vec(f"trunk{j}.bias")) for j in range(depth)]
        model = MlpRanker(
            trunk,
            Dense(arrays["hidden.weight"].copy(), vec("hidden.bias")),
            Dense(arrays["out.weight"].copy(), vec("out.bias")),
            vec("logit_p"),
            seed,
        )
    except KeyError as exc:
        raise ParseError(f"missing array {exc.args[0]}") from None
    if model.input_dim != input_dim or model.hidden_dim != hidden_dim:
        raise ParseError("array shapes disagree with the dims header")
    return model
