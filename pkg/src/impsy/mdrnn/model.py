"""Mixture-density recurrent network: forward pass, sampling, likelihood.

The network models the performance stream autoregressively.  Each step it
consumes an M-vector (dt first, then the D musical values), runs it
through L stacked LSTM layers, and maps the top hidden vector to a
Gaussian mixture over the next M-vector.  Everything is plain float64
numpy; a float32 fast path is available by casting the params.

Gate order in every fused weight matrix is [input, forget, candidate,
output], with the forget-gate bias initialized to +1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..core import ContinuousFrame, clamp_frame, DT_MAX_DEFAULT

SIGMA_FLOOR = 1e-3

GATES = 4  # i, f, g, o


@dataclass(frozen=True)
class LayerParams:
    """One LSTM layer: fused input, recurrent, and bias weights.

    w_x is (in_width, 4H), w_h is (H, 4H), b is (4H,).
    """

    w_x: np.ndarray
    w_h: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class MdrnnParams:
    """All network weights.  Immutable once constructed; share freely."""

    D: int
    L: int
    H: int
    K: int
    layers: tuple[LayerParams, ...]
    w_pi: np.ndarray     # (H, K)
    b_pi: np.ndarray     # (K,)
    w_mu: np.ndarray     # (H, K*M)
    b_mu: np.ndarray     # (K*M,)
    w_sigma: np.ndarray  # (H, K*M)
    b_sigma: np.ndarray  # (K*M,)

    @property
    def M(self) -> int:
        return self.D + 1

    @property
    def dtype(self):
        return self.w_pi.dtype

    def tensors(self):
        """Yield (name, array) for every weight tensor in file order."""
        for l, layer in enumerate(self.layers):
            yield f"layers[{l}].w_x", layer.w_x
            yield f"layers[{l}].w_h", layer.w_h
            yield f"layers[{l}].b", layer.b
        yield "w_pi", self.w_pi
        yield "b_pi", self.b_pi
        yield "w_mu", self.w_mu
        yield "b_mu", self.b_mu
        yield "w_sigma", self.w_sigma
        yield "b_sigma", self.b_sigma

    def astype(self, dtype) -> "MdrnnParams":
        layers = tuple(
            LayerParams(
                w_x=l.w_x.astype(dtype), w_h=l.w_h.astype(dtype), b=l.b.astype(dtype)
            )
            for l in self.layers
        )
        return MdrnnParams(
            D=self.D, L=self.L, H=self.H, K=self.K, layers=layers,
            w_pi=self.w_pi.astype(dtype), b_pi=self.b_pi.astype(dtype),
            w_mu=self.w_mu.astype(dtype), b_mu=self.b_mu.astype(dtype),
            w_sigma=self.w_sigma.astype(dtype), b_sigma=self.b_sigma.astype(dtype),
        )

    def validate_shapes(self) -> None:
        m = self.M
        if len(self.layers) != self.L:
            raise ValueError(f"expected {self.L} layers, got {len(self.layers)}")
        for l, layer in enumerate(self.layers):
            in_w = m if l == 0 else self.H
            if layer.w_x.shape != (in_w, GATES * self.H):
                raise ValueError(f"layer {l} w_x shape {layer.w_x.shape}")
            if layer.w_h.shape != (self.H, GATES * self.H):
                raise ValueError(f"layer {l} w_h shape {layer.w_h.shape}")
            if layer.b.shape != (GATES * self.H,):
                raise ValueError(f"layer {l} b shape {layer.b.shape}")
        if self.w_pi.shape != (self.H, self.K) or self.b_pi.shape != (self.K,):
            raise ValueError("mixture-weight head shape mismatch")
        if self.w_mu.shape != (self.H, self.K * m) or self.b_mu.shape != (self.K * m,):
            raise ValueError("mean head shape mismatch")
        if self.w_sigma.shape != (self.H, self.K * m) or self.b_sigma.shape != (self.K * m,):
            raise ValueError("scale head shape mismatch")
        for name, t in self.tensors():
            if not np.all(np.isfinite(t)):
                raise ValueError(f"non-finite values in {name}")


@dataclass(frozen=True)
class MdrnnState:
    """Per-layer recurrent state plus the last realized frame (the next
    autoregressive input).  Treated as single-owner by the engine loop."""

    h: tuple[np.ndarray, ...]
    c: tuple[np.ndarray, ...]
    last_frame: ContinuousFrame


@dataclass(frozen=True)
class MixtureParams:
    """One prediction: component weights, means, and scales (K x M)."""

    pi: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray


def initial_state(params: MdrnnParams) -> MdrnnState:
    """Zeroed recurrent state; last_frame mid-range with dt 0."""
    h = tuple(np.zeros(params.H, dtype=params.dtype) for _ in range(params.L))
    c = tuple(np.zeros(params.H, dtype=params.dtype) for _ in range(params.L))
    return MdrnnState(h=h, c=c, last_frame=ContinuousFrame((0.5,) * params.D, 0.0))


def init_params(
    D: int,
    L: int = 2,
    H: int = 64,
    K: int = 5,
    rng: Optional[np.random.Generator] = None,
) -> MdrnnParams:
    """Fresh weights: fan-scaled uniform input/head weights, 1/sqrt(H)
    recurrent weights, forget-gate bias +1."""
    if D < 1:
        raise ValueError("D must be >= 1")
    if not 1 <= K <= 16:
        raise ValueError("K must be in 1..16")
    rng = np.random.default_rng() if rng is None else rng
    m = D + 1

    def glorot(fan_in, fan_out, shape):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-a, a, size=shape)

    layers = []
    for l in range(L):
        in_w = m if l == 0 else H
        w_x = glorot(in_w, H, (in_w, GATES * H))
        w_h = rng.uniform(-1.0, 1.0, size=(H, GATES * H)) / np.sqrt(H)
        b = np.zeros(GATES * H)
        b[H : 2 * H] = 1.0  # forget gate
        layers.append(LayerParams(w_x=w_x, w_h=w_h, b=b))
    params = MdrnnParams(
        D=D, L=L, H=H, K=K, layers=tuple(layers),
        w_pi=glorot(H, K, (H, K)), b_pi=np.zeros(K),
        w_mu=glorot(H, K * m, (H, K * m)), b_mu=np.zeros(K * m),
        w_sigma=glorot(H, K * m, (H, K * m)), b_sigma=np.zeros(K * m),
    )
    params.validate_shapes()
    return params


def softplus(x):
    return np.logaddexp(0.0, x)


def softmax(x, axis=-1):
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def lstm_cell(layer: LayerParams, x, h_prev, c_prev, hidden: int):
    """One LSTM step.  Works on (..., width) arrays so the same kernel
    serves both the live single-step path and batched training."""
    z = x @ layer.w_x + h_prev @ layer.w_h + layer.b
    i = 1.0 / (1.0 + np.exp(-z[..., :hidden]))
    f = 1.0 / (1.0 + np.exp(-z[..., hidden : 2 * hidden]))
    g = np.tanh(z[..., 2 * hidden : 3 * hidden])
    o = 1.0 / (1.0 + np.exp(-z[..., 3 * hidden :]))
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c, (i, f, g, o)


def mixture_head(params: MdrnnParams, h_top) -> MixtureParams:
    """Map the top hidden vector to mixture parameters.

    pi by softmax, sigma by softplus plus a small floor so no component
    can collapse to zero spread.
    """
    m = params.M
    pi = softmax(h_top @ params.w_pi + params.b_pi)
    mu = (h_top @ params.w_mu + params.b_mu).reshape(params.K, m)
    sigma = softplus(h_top @ params.w_sigma + params.b_sigma).reshape(params.K, m)
    sigma = sigma + np.asarray(SIGMA_FLOOR, dtype=sigma.dtype)
    return MixtureParams(pi=pi, mu=mu, sigma=sigma)


def forward_step(
    params: MdrnnParams, state: MdrnnState, x: np.ndarray
) -> tuple[MixtureParams, MdrnnState]:
    """Advance the network by one input vector.

    Returns the mixture prediction for the next vector and the new state.
    The input state is never mutated.
    """
    x = np.asarray(x, dtype=params.dtype)
    if x.shape != (params.M,):
        raise ValueError(f"input shape {x.shape}, expected ({params.M},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input vector")
    hs, cs = [], []
    inp = x
    for l in range(params.L):
        if state.h[l].shape != (params.H,) or state.c[l].shape != (params.H,):
            raise ValueError(f"state shape mismatch at layer {l}")
        h, c, _ = lstm_cell(params.layers[l], inp, state.h[l], state.c[l], params.H)
        hs.append(h)
        cs.append(c)
        inp = h
    mix = mixture_head(params, hs[-1])
    return mix, MdrnnState(h=tuple(hs), c=tuple(cs), last_frame=state.last_frame)


def nll(mix: MixtureParams, target: np.ndarray) -> float:
    """Negative log-likelihood of target under the mixture, via
    log-sum-exp over components."""
    target = np.asarray(target, dtype=mix.mu.dtype)
    log_norm = -0.5 * np.log(2.0 * np.pi) - np.log(mix.sigma) \
        - 0.5 * ((target - mix.mu) / mix.sigma) ** 2
    comp = np.log(mix.pi) + log_norm.sum(axis=-1)
    peak = np.max(comp)
    return float(-(peak + np.log(np.sum(np.exp(comp - peak)))))


def sample(
    mix: MixtureParams,
    pi_temp: float = 1.0,
    sigma_temp: float = 1.0,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Draw one M-vector from the mixture.

    pi_temp divides the component log-weights (low = greedy, high =
    uniform); sigma_temp scales each component's spread linearly, with 0
    returning the chosen component's mean exactly.  Deterministic given a
    seeded rng: one uniform for the component, M normals for the noise.
    """
    if pi_temp <= 0:
        raise ValueError("pi_temp must be > 0")
    if sigma_temp < 0:
        raise ValueError("sigma_temp must be >= 0")
    rng = np.random.default_rng() if rng is None else rng
    with np.errstate(divide="ignore"):
        logits = np.log(mix.pi) / pi_temp
    weights = softmax(logits)
    cum = np.cumsum(weights)
    k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    k = min(k, len(weights) - 1)
    z = rng.standard_normal(mix.mu.shape[-1])
    return mix.mu[k] + mix.sigma[k] * sigma_temp * z


def encode_frame(frame: ContinuousFrame) -> np.ndarray:
    """Frame -> model vector, dt first."""
    return np.array([frame.dt, *frame.values], dtype=np.float64)


def vector_to_frame(vec: np.ndarray, dt_max: float = DT_MAX_DEFAULT) -> ContinuousFrame:
    """Model vector -> frame, clamped into the frame invariants."""
    raw = ContinuousFrame(values=tuple(float(v) for v in vec[1:]), dt=max(0.0, float(vec[0])))
    return clamp_frame(raw, dt_max=dt_max)


def predict_next(
    params: MdrnnParams,
    state: MdrnnState,
    prev: ContinuousFrame,
    pi_temp: float = 1.0,
    sigma_temp: float = 1.0,
    rng: Optional[np.random.Generator] = None,
    dt_max: float = DT_MAX_DEFAULT,
) -> tuple[ContinuousFrame, MdrnnState]:
    """Condition on the previous frame and sample the next one.

    The sampled dt is floored at 0 before the dt_max cap; values are
    clipped to [0, 1].  The returned state carries the new frame as its
    autoregressive input.
    """
    mix, new_state = forward_step(params, state, encode_frame(prev))
    frame = vector_to_frame(sample(mix, pi_temp, sigma_temp, rng), dt_max=dt_max)
    return frame, replace(new_state, last_frame=frame)
