"""Forecasting models with hand-written backward passes.

Models are plain records holding a ``params`` dict of numpy arrays. Forward
and backward are pure functions of (params, input); the trainer owns updates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidInput, ShapeMismatch
from .rng import XorShift64Star

CHECKPOINT_VERSION = 1

# ----------------------------------------------------------------- activations

ACTIVATIONS = ("relu", "tanh", "ricker")


@dataclass(frozen=True)
class ActivationKind:
    kind: str = "tanh"
    a: float = 1.0  # ricker scale

    def __post_init__(self):
        if self.kind not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.kind!r}")
        if not self.a > 0:
            raise ConfigError("ricker scale a must be > 0")


def activation(kind: ActivationKind, x):
    """Return ``(value, derivative)`` elementwise."""
    x = np.asarray(x, dtype=float)
    if kind.kind == "relu":
        return np.maximum(x, 0.0), (x > 0).astype(float)
    if kind.kind == "tanh":
        t = np.tanh(x)
        return t, 1.0 - t * t
    a = kind.a
    c = math.pi**0.25 / (15.0 * a)
    u = x / a
    g = np.exp(-0.5 * u * u)
    return c * (1.0 - u * u) * g, c * g * (u**3 - 3.0 * u) / a


# --------------------------------------------------------------- linear model


@lru_cache(maxsize=32)
def moving_average_matrix(T: int, kernel: int) -> np.ndarray:
    """``[T, T]`` operator of a centred moving average with replicated edges."""
    half = (kernel - 1) // 2
    M = np.zeros((T, T))
    for t in range(T):
        for j in range(t - half, t + half + 1):
            M[t, min(max(j, 0), T - 1)] += 1.0 / kernel
    M.setflags(write=False)
    return M


def decompose(x, kernel: int) -> tuple[np.ndarray, np.ndarray]:
    """Split ``x`` (time on axis -2) into moving-average trend and remainder."""
    x = np.asarray(x, dtype=float)
    trend = moving_average_matrix(x.shape[-2], kernel) @ x
    return trend, x - trend


@dataclass
class LinearForecaster:
    """Maps a ``[T, C]`` lookback window to a ``[S, C]`` forecast.

    ``plain``: ``out[:, c] = W @ x[:, c] + b``. ``decomposed`` (DLinear):
    ``W_trend @ trend + W_seasonal @ (x - trend) + b``. Weight arrays carry a
    leading group axis of size 1 when channels share weights, else C.
    """

    lookback: int
    horizon: int
    n_channels: int
    mode: str = "decomposed"
    channel_shared: bool = True
    ma_kernel: int = 25
    params: dict = field(default_factory=dict)

    kind = "linear"

    def __post_init__(self):
        if self.mode not in ("plain", "decomposed"):
            raise ConfigError(f"unknown linear mode {self.mode!r}")
        if self.mode == "decomposed" and (self.ma_kernel < 3 or self.ma_kernel % 2 == 0):
            raise ConfigError("ma_kernel must be odd and >= 3")

    @property
    def weight_names(self) -> tuple[str, ...]:
        return ("weight",) if self.mode == "plain" else ("weight_trend", "weight_seasonal")

    def config(self) -> dict:
        return {
            "kind": self.kind,
            "lookback": self.lookback,
            "horizon": self.horizon,
            "n_channels": self.n_channels,
            "mode": self.mode,
            "channel_shared": self.channel_shared,
            "ma_kernel": self.ma_kernel,
        }

    def predict(self, inputs):
        return linear_apply(self, inputs)

    def gradients(self, inputs, upstream):
        return linear_backprop(self, inputs, upstream)


def init_linear(
    lookback: int,
    horizon: int,
    n_channels: int,
    rng: XorShift64Star,
    mode: str = "decomposed",
    channel_shared: bool = True,
    ma_kernel: int = 25,
) -> LinearForecaster:
    m = LinearForecaster(lookback, horizon, n_channels, mode, channel_shared, ma_kernel)
    groups = 1 if channel_shared else n_channels
    bound = 1.0 / math.sqrt(lookback)
    params = {name: rng.uniform(-bound, bound, (groups, horizon, lookback)) for name in m.weight_names}
    params["bias"] = rng.uniform(-bound, bound, (groups, horizon))
    m.params = params
    return m


def _lift(inputs, T: int, C: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(inputs, dtype=float)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3 or x.shape[1:] != (T, C):
        raise ShapeMismatch(f"expected input [..., {T}, {C}], got {np.shape(inputs)}")
    return x, single


def _map(W: np.ndarray, x: np.ndarray) -> np.ndarray:
    # W [G, S, T], x [n, T, C] -> [n, S, C]
    if W.shape[0] == 1:
        return W[0] @ x
    return np.einsum("cst,ntc->nsc", W, x)


def _map_grad(g: np.ndarray, x: np.ndarray, groups: int) -> np.ndarray:
    if groups == 1:
        return np.tensordot(g, x, axes=([0, 2], [0, 2]))[None]
    return np.einsum("nsc,ntc->cst", g, x)


def _bias(b: np.ndarray) -> np.ndarray:
    # [G, S] -> broadcastable [S, G]
    return b.T


def linear_apply(m: LinearForecaster, inputs) -> np.ndarray:
    x, single = _lift(inputs, m.lookback, m.n_channels)
    p = m.params
    if m.mode == "plain":
        out = _map(p["weight"], x)
    else:
        trend, seasonal = decompose(x, m.ma_kernel)
        out = _map(p["weight_trend"], trend) + _map(p["weight_seasonal"], seasonal)
    out = out + _bias(p["bias"])
    return out[0] if single else out


def linear_backprop(m: LinearForecaster, inputs, upstream) -> dict[str, np.ndarray]:
    """Parameter gradients given ``upstream = dLoss/dOutput``."""
    x, single = _lift(inputs, m.lookback, m.n_channels)
    g = np.asarray(upstream, dtype=float)
    if single:
        g = g[None]
    if g.shape != (x.shape[0], m.horizon, m.n_channels):
        raise ShapeMismatch(f"upstream gradient shape {np.shape(upstream)} does not match output")
    groups = m.params["bias"].shape[0]
    grads = {}
    if m.mode == "plain":
        grads["weight"] = _map_grad(g, x, groups)
    else:
        trend, seasonal = decompose(x, m.ma_kernel)
        grads["weight_trend"] = _map_grad(g, trend, groups)
        grads["weight_seasonal"] = _map_grad(g, seasonal, groups)
    gb = g.sum(axis=0)  # [S, C]
    grads["bias"] = gb.sum(axis=1)[None] if groups == 1 else gb.T.copy()
    return grads


# ------------------------------------------------------------------------ MLP


@dataclass
class MLPRegressor:
    """Two-layer network ``W2 @ act(W1 @ x + b1) + b2``."""

    in_dim: int
    hidden: int
    out_dim: int
    act: ActivationKind = field(default_factory=ActivationKind)
    params: dict = field(default_factory=dict)

    kind = "mlp"

    def __post_init__(self):
        if self.hidden < 1 or self.in_dim < 1 or self.out_dim < 1:
            raise ConfigError("layer sizes must be >= 1")

    def config(self) -> dict:
        return {
            "kind": self.kind,
            "in_dim": self.in_dim,
            "hidden": self.hidden,
            "out_dim": self.out_dim,
            "activation": self.act.kind,
            "ricker_a": self.act.a,
        }

    def predict(self, inputs):
        return mlp_apply(self, inputs)

    def gradients(self, inputs, upstream):
        return mlp_backprop(self, inputs, upstream)


def init_mlp(in_dim: int, hidden: int, out_dim: int, rng: XorShift64Star, act: ActivationKind | None = None) -> MLPRegressor:
    m = MLPRegressor(in_dim, hidden, out_dim, act or ActivationKind())
    b1 = 1.0 / math.sqrt(in_dim)
    b2 = 1.0 / math.sqrt(hidden)
    m.params = {
        "w1": rng.uniform(-b1, b1, (hidden, in_dim)),
        "b1": rng.uniform(-b1, b1, (hidden,)),
        "w2": rng.uniform(-b2, b2, (out_dim, hidden)),
        "b2": rng.uniform(-b2, b2, (out_dim,)),
    }
    return m


def _mlp_input(m: MLPRegressor, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None]
    if x.ndim != 2 or x.shape[1] != m.in_dim:
        raise ShapeMismatch(f"expected input [..., {m.in_dim}], got {np.shape(x)}")
    return x, single


def mlp_apply(m: MLPRegressor, x) -> np.ndarray:
    x, single = _mlp_input(m, x)
    p = m.params
    h, _ = activation(m.act, x @ p["w1"].T + p["b1"])
    out = h @ p["w2"].T + p["b2"]
    return out[0] if single else out


def mlp_backprop(m: MLPRegressor, x, upstream) -> dict[str, np.ndarray]:
    x, single = _mlp_input(m, x)
    g = np.asarray(upstream, dtype=float)
    if single:
        g = g[None]
    if g.shape != (x.shape[0], m.out_dim):
        raise ShapeMismatch(f"upstream gradient shape {np.shape(upstream)} does not match output")
    p = m.params
    h, dh = activation(m.act, x @ p["w1"].T + p["b1"])
    gz = (g @ p["w2"]) * dh
    return {
        "w1": gz.T @ x,
        "b1": gz.sum(axis=0),
        "w2": g.T @ h,
        "b2": g.sum(axis=0),
    }


# ----------------------------------------------------------------- checkpoints


def with_params(model, params: dict):
    return replace(model, params={k: np.array(v, copy=True) for k, v in params.items()})


def model_from_config(cfg: dict, params: dict | None = None):
    cfg = dict(cfg)
    kind = cfg.pop("kind")
    if kind == "linear":
        m = LinearForecaster(**cfg)
    elif kind == "mlp":
        m = MLPRegressor(
            cfg["in_dim"], cfg["hidden"], cfg["out_dim"], ActivationKind(cfg["activation"], cfg["ricker_a"])
        )
    else:
        raise InvalidInput(f"unknown model kind {kind!r}")
    if params is not None:
        m.params = params
    return m


def save_checkpoint(path, model) -> None:
    """``.npz`` with one array per parameter plus a JSON header under ``__meta__``."""
    meta = json.dumps({"version": CHECKPOINT_VERSION, "config": model.config()}, sort_keys=True)
    with open(Path(path), "wb") as fh:
        np.savez(fh, __meta__=np.array(meta), **model.params)


def load_checkpoint(path):
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise InvalidInput(f"unsupported checkpoint version {meta.get('version')}")
        params = {k: data[k].copy() for k in data.files if k != "__meta__"}
    return model_from_config(meta["config"], params)
