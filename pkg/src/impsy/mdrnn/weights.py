"""Save and load network weights through the binary container.

Tensor order in the payload follows ``MdrnnParams.tensors()``: per layer
w_x, w_h, b, then the head tensors w_pi, b_pi, w_mu, b_mu, w_sigma,
b_sigma.  Shapes are reconstructed from the header dims, and a payload
whose size disagrees with them is rejected.
"""

from __future__ import annotations

import numpy as np

from .. import weightfile
from .model import GATES, LayerParams, MdrnnParams


def _tensor_shapes(D: int, L: int, H: int, K: int):
    m = D + 1
    shapes = []
    for l in range(L):
        in_w = m if l == 0 else H
        shapes.append((f"layers[{l}].w_x", (in_w, GATES * H)))
        shapes.append((f"layers[{l}].w_h", (H, GATES * H)))
        shapes.append((f"layers[{l}].b", (GATES * H,)))
    shapes.extend([
        ("w_pi", (H, K)), ("b_pi", (K,)),
        ("w_mu", (H, K * m)), ("b_mu", (K * m,)),
        ("w_sigma", (H, K * m)), ("b_sigma", (K * m,)),
    ])
    return shapes


def save_weights(params: MdrnnParams, path) -> None:
    params.validate_shapes()
    weightfile.write(
        path,
        (params.D, params.L, params.H, params.K),
        (t for _, t in params.tensors()),
    )


def load_weights(path) -> MdrnnParams:
    (d, l, h, k), flat = weightfile.read(path)
    shapes = _tensor_shapes(d, l, h, k)
    expected = sum(int(np.prod(s)) for _, s in shapes)
    if flat.size != expected:
        raise weightfile.WeightFileError(
            f"weight file {path} holds {flat.size} values, expected {expected}"
        )
    tensors = {}
    off = 0
    for name, shape in shapes:
        n = int(np.prod(shape))
        tensors[name] = flat[off : off + n].reshape(shape)
        off += n
    layers = tuple(
        LayerParams(
            w_x=tensors[f"layers[{i}].w_x"],
            w_h=tensors[f"layers[{i}].w_h"],
            b=tensors[f"layers[{i}].b"],
        )
        for i in range(l)
    )
    params = MdrnnParams(
        D=d, L=l, H=h, K=k, layers=layers,
        w_pi=tensors["w_pi"], b_pi=tensors["b_pi"],
        w_mu=tensors["w_mu"], b_mu=tensors["b_mu"],
        w_sigma=tensors["w_sigma"], b_sigma=tensors["b_sigma"],
    )
    params.validate_shapes()
    return params
