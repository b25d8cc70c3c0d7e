"""Training: truncated backpropagation through time over the mixture NLL.

Gradients are computed analytically (the whole point of keeping the
network small and hand-rolled) and checked against finite differences in
the test suite.  The optimizer is Adam-style adaptive steps with global
gradient-norm clipping; all math is float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import SIGMA_FLOOR, LayerParams, MdrnnParams

LOG_2PI = float(np.log(2.0 * np.pi))


class TrainingDiverged(RuntimeError):
    """Loss went non-finite; carries where it happened."""


@dataclass(frozen=True)
class TrainHyper:
    seq_len: int = 50
    batch_size: int = 64
    learning_rate: float = 1e-3
    epochs: int = 30
    clip_norm: float = 1.0
    val_split: float = 0.1

    def __post_init__(self):
        if self.seq_len < 1 or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("seq_len, batch_size must be >= 1 and epochs >= 0")
        if self.learning_rate <= 0 or self.clip_norm <= 0:
            raise ValueError("learning_rate and clip_norm must be > 0")
        if not 0.0 <= self.val_split < 1.0:
            raise ValueError("val_split must be in [0, 1)")


# --- batched forward / backward --------------------------------------------

def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _logsumexp(x, axis=-1, keepdims=False):
    peak = np.max(x, axis=axis, keepdims=True)
    out = peak + np.log(np.sum(np.exp(x - peak), axis=axis, keepdims=True))
    return out if keepdims else np.squeeze(out, axis=axis)


def _forward_layers(params: MdrnnParams, X: np.ndarray):
    """Run the LSTM stack over X (B, T, M); cache everything backward needs."""
    B, T, _ = X.shape
    H = params.H
    inputs = [np.ascontiguousarray(X[:, t, :]) for t in range(T)]
    caches = []
    for layer in params.layers:
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        ca = {
            "x": inputs, "h_prev": [], "c_prev": [],
            "i": [], "f": [], "g": [], "o": [], "tc": [], "h": [],
        }
        for t in range(T):
            ca["h_prev"].append(h)
            ca["c_prev"].append(c)
            z = inputs[t] @ layer.w_x + h @ layer.w_h + layer.b
            i = _sigmoid(z[:, :H])
            f = _sigmoid(z[:, H : 2 * H])
            g = np.tanh(z[:, 2 * H : 3 * H])
            o = _sigmoid(z[:, 3 * H :])
            c = f * c + i * g
            tc = np.tanh(c)
            h = o * tc
            ca["i"].append(i)
            ca["f"].append(f)
            ca["g"].append(g)
            ca["o"].append(o)
            ca["tc"].append(tc)
            ca["h"].append(h)
        inputs = ca["h"]
        caches.append(ca)
    h_top = np.stack(caches[-1]["h"], axis=0)  # (T, B, H)
    return caches, h_top


def _head_forward(params: MdrnnParams, h_top: np.ndarray, Y: np.ndarray):
    """Mixture head over every (t, b); returns loss and the head cache."""
    T, B, _ = h_top.shape
    K, M = params.K, params.M
    y = np.transpose(Y, (1, 0, 2))  # (T, B, M)
    logits = h_top @ params.w_pi + params.b_pi
    log_pi = logits - _logsumexp(logits, axis=-1, keepdims=True)
    mu = (h_top @ params.w_mu + params.b_mu).reshape(T, B, K, M)
    spre = (h_top @ params.w_sigma + params.b_sigma).reshape(T, B, K, M)
    sigma = np.logaddexp(0.0, spre) + SIGMA_FLOOR
    diff = y[:, :, None, :] - mu
    log_norm = -0.5 * LOG_2PI - np.log(sigma) - 0.5 * (diff / sigma) ** 2
    comp = log_pi + log_norm.sum(axis=-1)  # (T, B, K)
    loss = float(-np.mean(_logsumexp(comp, axis=-1)))
    cache = {
        "y": y, "logits": log_pi, "pi": np.exp(log_pi), "mu": mu,
        "spre": spre, "sigma": sigma, "diff": diff, "comp": comp,
    }
    return loss, cache


def _head_backward(params: MdrnnParams, h_top: np.ndarray, cache: dict):
    """Gradients of the mean NLL through the head; returns head grads and
    the gradient flowing into the top hidden sequence."""
    T, B, H = h_top.shape
    K, M = params.K, params.M
    scale = 1.0 / (T * B)
    comp = cache["comp"]
    resp = np.exp(comp - _logsumexp(comp, axis=-1, keepdims=True))  # responsibilities
    w = resp * scale

    d_logits = (cache["pi"] * np.sum(w, axis=-1, keepdims=True) - w)
    inv_s = 1.0 / cache["sigma"]
    d_mu = -w[..., None] * cache["diff"] * inv_s**2
    d_sigma = w[..., None] * (inv_s - cache["diff"] ** 2 * inv_s**3)
    d_spre = d_sigma * _sigmoid(cache["spre"])

    flat_h = h_top.reshape(T * B, H)
    d_logits_f = d_logits.reshape(T * B, K)
    d_mu_f = d_mu.reshape(T * B, K * M)
    d_spre_f = d_spre.reshape(T * B, K * M)
    grads = {
        "w_pi": flat_h.T @ d_logits_f,
        "b_pi": d_logits_f.sum(axis=0),
        "w_mu": flat_h.T @ d_mu_f,
        "b_mu": d_mu_f.sum(axis=0),
        "w_sigma": flat_h.T @ d_spre_f,
        "b_sigma": d_spre_f.sum(axis=0),
    }
    d_h_top = (
        d_logits @ params.w_pi.T + d_mu_f.reshape(T, B, K * M) @ params.w_mu.T
        + d_spre_f.reshape(T, B, K * M) @ params.w_sigma.T
    )
    return grads, d_h_top


def _layer_backward(layer: LayerParams, ca: dict, d_h_seq):
    """Backprop one LSTM layer through time.

    d_h_seq is the (T, B, H) gradient arriving at this layer's hidden
    outputs from above; returns weight grads and the gradient w.r.t. the
    layer's input sequence.
    """
    T = len(ca["h"])
    H = ca["h"][0].shape[1]
    d_wx = np.zeros_like(layer.w_x)
    d_wh = np.zeros_like(layer.w_h)
    d_b = np.zeros_like(layer.b)
    d_x_seq = [None] * T
    dh_carry = 0.0
    dc_carry = 0.0
    for t in reversed(range(T)):
        i, f, g, o = ca["i"][t], ca["f"][t], ca["g"][t], ca["o"][t]
        tc = ca["tc"][t]
        dh = d_h_seq[t] + dh_carry
        do = dh * tc
        dc = dc_carry + dh * o * (1.0 - tc**2)
        di = dc * g
        df = dc * ca["c_prev"][t]
        dg = dc * i
        dz = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), dg * (1 - g**2), do * o * (1 - o)],
            axis=1,
        )
        d_wx += ca["x"][t].T @ dz
        d_wh += ca["h_prev"][t].T @ dz
        d_b += dz.sum(axis=0)
        d_x_seq[t] = dz @ layer.w_x.T
        dh_carry = dz @ layer.w_h.T
        dc_carry = dc * f
    return d_wx, d_wh, d_b, d_x_seq


def _as_batch(arr) -> np.ndarray:
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim == 2:
        a = a[None, :, :]
    if a.ndim != 3:
        raise ValueError(f"expected (B, T, M) or (T, M) array, got shape {a.shape}")
    return a


def sequence_nll(params: MdrnnParams, X, Y) -> float:
    """Mean next-step NLL of targets Y given inputs X over a window batch."""
    X, Y = _as_batch(X), _as_batch(Y)
    _, h_top = _forward_layers(params, X)
    loss, _ = _head_forward(params, h_top, Y)
    return loss


def sequence_nll_and_grads(params: MdrnnParams, X, Y):
    """Loss plus analytic gradients for every weight tensor.

    Gradient keys match ``MdrnnParams.tensors()`` names exactly.
    """
    X, Y = _as_batch(X), _as_batch(Y)
    caches, h_top = _forward_layers(params, X)
    loss, head_cache = _head_forward(params, h_top, Y)
    grads, d_h = _head_backward(params, h_top, head_cache)
    for l in reversed(range(params.L)):
        d_wx, d_wh, d_b, d_x_seq = _layer_backward(params.layers[l], caches[l], d_h)
        grads[f"layers[{l}].w_x"] = d_wx
        grads[f"layers[{l}].w_h"] = d_wh
        grads[f"layers[{l}].b"] = d_b
        d_h = d_x_seq
    return loss, grads


# --- optimizer and loop -----------------------------------------------------

def _params_from_tensors(template: MdrnnParams, tensors: dict) -> MdrnnParams:
    layers = tuple(
        LayerParams(
            w_x=tensors[f"layers[{l}].w_x"],
            w_h=tensors[f"layers[{l}].w_h"],
            b=tensors[f"layers[{l}].b"],
        )
        for l in range(template.L)
    )
    return MdrnnParams(
        D=template.D, L=template.L, H=template.H, K=template.K, layers=layers,
        w_pi=tensors["w_pi"], b_pi=tensors["b_pi"],
        w_mu=tensors["w_mu"], b_mu=tensors["b_mu"],
        w_sigma=tensors["w_sigma"], b_sigma=tensors["b_sigma"],
    )


class _Adam:
    def __init__(self, names, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {n: 0.0 for n in names}
        self.v = {n: 0.0 for n in names}
        self.t = 0

    def step(self, tensors: dict, grads: dict) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, g in grads.items():
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / (1 - b1**self.t)
            v_hat = self.v[name] / (1 - b2**self.t)
            tensors[name] = tensors[name] - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _clip_global_norm(grads: dict, clip: float) -> None:
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > clip:
        factor = clip / total
        for name in grads:
            grads[name] = grads[name] * factor


def _build_windows(sequences, seq_len: int):
    """Cut sequences into (T+1)-frame windows with 50% overlap.

    T adapts downward so the longest sequence always yields at least one
    window; sequences shorter than T+1 are skipped.
    """
    lengths = [len(s) for s in sequences if len(s) >= 2]
    if not lengths:
        raise ValueError("dataset has no sequence of length >= 2")
    T = max(1, min(seq_len, max(lengths) - 1))
    windows = []
    for s in sequences:
        n = len(s)
        if n < T + 1:
            continue
        stride = max(1, T // 2)
        starts = list(range(0, n - T, stride))
        if starts[-1] != n - T - 1:
            starts.append(n - T - 1)
        for a in starts:
            windows.append(np.asarray(s[a : a + T + 1], dtype=np.float64))
    return windows


def _eval_windows(params: MdrnnParams, windows, batch_size: int) -> float:
    if not windows:
        return float("nan")
    total, count = 0.0, 0
    for off in range(0, len(windows), batch_size):
        chunk = np.stack(windows[off : off + batch_size])
        loss = sequence_nll(params, chunk[:, :-1, :], chunk[:, 1:, :])
        total += loss * len(chunk)
        count += len(chunk)
    return total / count


def train(
    dataset,
    hyper: TrainHyper,
    init: Optional[MdrnnParams] = None,
    rng: Optional[np.random.Generator] = None,
    D: Optional[int] = None,
    L: int = 2,
    H: int = 64,
    K: int = 5,
    progress=None,
):
    """Fit the network to a dataset of (N, M) float sequences (dt first).

    ``dataset`` is anything with a ``sequences`` attribute.  Returns the
    best-validation params and the loss history, where history index 0 is
    the pre-training evaluation, so ``epochs=0`` returns ``init`` (or a
    fresh initialization) untouched.
    """
    from .model import init_params  # local import keeps module load cheap

    rng = np.random.default_rng() if rng is None else rng
    sequences = list(dataset.sequences)
    if not sequences:
        raise ValueError("dataset is empty")
    windows = _build_windows(sequences, hyper.seq_len)
    if not windows:
        raise ValueError("dataset yields no training windows")

    if init is not None:
        params = init
    else:
        if D is None:
            D = windows[0].shape[1] - 1
        params = init_params(D=D, L=L, H=H, K=K, rng=rng)

    order = rng.permutation(len(windows))
    n_val = int(round(len(windows) * hyper.val_split))
    n_val = min(n_val, len(windows) - 1)
    val_windows = [windows[i] for i in order[:n_val]]
    train_windows = [windows[i] for i in order[n_val:]]

    tensors = {name: t.copy() for name, t in params.tensors()}
    opt = _Adam(tensors.keys(), hyper.learning_rate)

    def current():
        return _params_from_tensors(params, {n: t.copy() for n, t in tensors.items()})

    history = {"train": [], "val": []}
    train_eval = _eval_windows(_params_from_tensors(params, tensors), train_windows,
                               hyper.batch_size)
    val_eval = _eval_windows(_params_from_tensors(params, tensors), val_windows,
                             hyper.batch_size)
    history["train"].append(train_eval)
    history["val"].append(val_eval)
    best_score = val_eval if val_windows else train_eval
    best = current()

    for epoch in range(hyper.epochs):
        perm = rng.permutation(len(train_windows))
        epoch_loss, seen = 0.0, 0
        for off in range(0, len(perm), hyper.batch_size):
            idx = perm[off : off + hyper.batch_size]
            batch = np.stack([train_windows[i] for i in idx])
            live = _params_from_tensors(params, tensors)
            loss, grads = sequence_nll_and_grads(live, batch[:, :-1, :], batch[:, 1:, :])
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch + 1}, batch offset {off}"
                )
            _clip_global_norm(grads, hyper.clip_norm)
            opt.step(tensors, grads)
            epoch_loss += loss * len(idx)
            seen += len(idx)
        train_loss = epoch_loss / max(seen, 1)
        val_loss = _eval_windows(_params_from_tensors(params, tensors), val_windows,
                                 hyper.batch_size)
        history["train"].append(train_loss)
        history["val"].append(val_loss)
        score = val_loss if val_windows else train_loss
        if np.isfinite(score) and score < best_score:
            best_score = score
            best = current()
        if progress is not None:
            progress(epoch + 1, train_loss, val_loss)

    best.validate_shapes()
    return best, history
