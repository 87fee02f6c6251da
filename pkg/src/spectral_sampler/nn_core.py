"""Dense coordinate MLP with hand-written reverse-mode gradients and Adam.

Weights are stored as ``(fan_out, fan_in)`` matrices so a layer computes
``h @ W.T + b``.  Everything runs in float64.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .encoding import EncodingSpec, encode

HIDDEN_ACTIVATIONS = ("softplus", "sine")
OUTPUT_ACTIVATIONS = ("tanh", "identity")
INIT_SCHEMES = ("default-uniform", "xavier-uniform")

# softplus(x) = x once beta * x exceeds this
SOFTPLUS_THRESHOLD = 30.0


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int = 1
    num_hidden_layers: int = 8
    hidden_width: int = 512
    hidden_activation: str = "softplus"
    beta: float = 100.0
    omega: float = 30.0
    output_activation: str = "tanh"
    encoding: EncodingSpec = field(default_factory=EncodingSpec)
    init_scheme: str = "default-uniform"
    seed: int = 0

    def __post_init__(self):
        if self.input_dim not in (1, 2, 3):
            raise ValueError("input_dim must be 1, 2 or 3")
        if self.num_hidden_layers < 1:
            raise ValueError("need at least one hidden layer")
        if self.hidden_width < 1:
            raise ValueError("hidden_width must be >= 1")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        if self.init_scheme not in INIT_SCHEMES:
            raise ValueError(f"unknown init scheme {self.init_scheme!r}")
        if self.encoding.input_dim != self.input_dim:
            raise ValueError("encoding input_dim does not match network input_dim")

    @property
    def layer_dims(self) -> list[int]:
        return [self.encoding.output_dim] + [self.hidden_width] * self.num_hidden_layers + [1]

    def with_seed(self, seed: int) -> "NetworkConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "num_hidden_layers": self.num_hidden_layers,
            "hidden_width": self.hidden_width,
            "hidden_activation": self.hidden_activation,
            "beta": self.beta,
            "omega": self.omega,
            "output_activation": self.output_activation,
            "encoding": self.encoding.to_dict(),
            "init_scheme": self.init_scheme,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        d = dict(d)
        d["encoding"] = EncodingSpec.from_dict(d["encoding"])
        return cls(**d)


def pe_network(input_dim=1, layers=8, width=512, degree=5, seed=0, **kw) -> NetworkConfig:
    """Shorthand for a softplus/tanh MLP with sinusoidal PE."""
    enc = EncodingSpec("sinusoidal", input_dim=input_dim, degree=degree)
    return NetworkConfig(input_dim=input_dim, num_hidden_layers=layers, hidden_width=width,
                         encoding=enc, seed=seed, **kw)


@dataclass
class Mlp:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: NetworkConfig

    @property
    def params(self) -> list[np.ndarray]:
        """Flat parameter list ``[W_1, b_1, W_2, b_2, ...]``."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def with_params(self, params: list[np.ndarray]) -> "Mlp":
        return Mlp(list(params[0::2]), list(params[1::2]), self.config)

    def copy(self) -> "Mlp":
        return self.with_params([p.copy() for p in self.params])

    def to_json(self) -> str:
        doc = {
            "config": self.config.to_dict(),
            "layers": [
                {"in": int(w.shape[1]), "out": int(w.shape[0]),
                 "weight": w.ravel().tolist(), "bias": b.tolist()}
                for w, b in zip(self.weights, self.biases)
            ],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Mlp":
        doc = json.loads(text)
        config = NetworkConfig.from_dict(doc["config"])
        weights, biases = [], []
        for layer in doc["layers"]:
            w = np.asarray(layer["weight"], dtype=np.float64).reshape(layer["out"], layer["in"])
            weights.append(w)
            biases.append(np.asarray(layer["bias"], dtype=np.float64))
        dims = config.layer_dims
        if [w.shape[1] for w in weights] != dims[:-1] or [w.shape[0] for w in weights] != dims[1:]:
            raise ValueError("layer shapes do not match the embedded config")
        return cls(weights, biases, config)


def init_network(config: NetworkConfig) -> Mlp:
    rng = np.random.default_rng(config.seed)
    dims = config.layer_dims
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        if config.init_scheme == "default-uniform":
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        else:
            bound = np.sqrt(6.0) / np.sqrt(fan_in + fan_out)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
    return Mlp(weights, biases, config)


def softplus(z, beta):
    bz = beta * z
    safe = np.minimum(bz, SOFTPLUS_THRESHOLD)
    return np.where(bz > SOFTPLUS_THRESHOLD, z, np.log1p(np.exp(safe)) / beta)


def _softplus_grad(z, beta):
    # d/dz softplus = sigmoid(beta z); 1 above the linear threshold
    bz = beta * z
    sig = 0.5 * (1.0 + np.tanh(0.5 * bz))
    return np.where(bz > SOFTPLUS_THRESHOLD, 1.0, sig)


def _hidden(z, cfg):
    if cfg.hidden_activation == "softplus":
        return softplus(z, cfg.beta)
    return np.sin(cfg.omega * z)


def _hidden_grad(z, cfg):
    if cfg.hidden_activation == "softplus":
        return _softplus_grad(z, cfg.beta)
    return cfg.omega * np.cos(cfg.omega * z)


def _as_points(mlp: Mlp, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    dim = mlp.config.input_dim
    if x.ndim == 0 and dim == 1:
        return x.reshape(1, 1), True
    if x.ndim == 1 and x.shape[0] == dim:
        return x.reshape(1, dim), True
    if x.ndim == 1 and dim == 1:
        return x.reshape(-1, 1), False
    if x.ndim == 2 and x.shape[1] == dim:
        return x, False
    raise ValueError(f"cannot interpret shape {x.shape} as {dim}-d points")


def _forward_cache(mlp: Mlp, pts: np.ndarray):
    cfg = mlp.config
    h = encode(cfg.encoding, pts)
    acts, pre = [h], []
    last = len(mlp.weights) - 1
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        z = h @ w.T + b
        pre.append(z)
        if i < last:
            h = _hidden(z, cfg)
        else:
            h = np.tanh(z) if cfg.output_activation == "tanh" else z
        acts.append(h)
    return acts, pre


def forward(mlp: Mlp, x):
    """Evaluate the network on one point (returns float) or an ``(n, dim)`` batch."""
    pts, single = _as_points(mlp, x)
    acts, _ = _forward_cache(mlp, pts)
    y = acts[-1][:, 0]
    return float(y[0]) if single else y


def evaluate_batched(mlp: Mlp, pts, chunk: int = 16384) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, mlp.config.input_dim)
    out = [forward(mlp, pts[i:i + chunk]) for i in range(0, len(pts), chunk)]
    return np.concatenate(out) if out else np.zeros(0)


def loss_and_grad(mlp: Mlp, x, target) -> tuple[float, list[np.ndarray]]:
    """Mean L1 loss over the batch and its gradient in ``Mlp.params`` order.

    The subgradient of |r| at r == 0 is taken as 0.
    """
    pts, _ = _as_points(mlp, x)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if len(pts) == 0 or len(pts) != len(target):
        raise ValueError("batch must be non-empty with one target per point")
    cfg = mlp.config
    acts, pre = _forward_cache(mlp, pts)
    resid = acts[-1][:, 0] - target
    n = len(pts)
    loss = float(np.mean(np.abs(resid)))

    delta = (np.sign(resid) / n)[:, None]
    if cfg.output_activation == "tanh":
        delta = delta * (1.0 - acts[-1] ** 2)
    grads: list[np.ndarray] = [None] * (2 * len(mlp.weights))
    for i in range(len(mlp.weights) - 1, -1, -1):
        grads[2 * i] = delta.T @ acts[i]
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ mlp.weights[i]) * _hidden_grad(pre[i - 1], cfg)
    return loss, grads


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_network(cls, mlp: Mlp, **hyper) -> "AdamState":
        return cls([np.zeros_like(p) for p in mlp.params],
                   [np.zeros_like(p) for p in mlp.params], **hyper)


def adam_step(mlp: Mlp, state: AdamState, grads, lr: float) -> tuple[Mlp, AdamState]:
    """One bias-corrected Adam update; returns new network and state, inputs untouched."""
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(mlp.params, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        new_params.append(p - lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return mlp.with_params(new_params), AdamState(new_m, new_v, t, b1, b2, state.eps)
