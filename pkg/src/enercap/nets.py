"""Desk-scale feed-forward networks with hand-written backprop.

Layers are bias-free FC / CONV (im2col) with ReLU in between and a linear
head; conv outputs flatten automatically when the next layer is FC.
Forward takes per-layer input masks (the trainable sparsity gates); the
backward pass returns gradients for every weight tensor and every mask.
"""

from dataclasses import dataclass, field

import numpy as np

from .layers import LayerSpec


def im2col(x: np.ndarray, layer: LayerSpec) -> np.ndarray:
    """(B, c, h, w) -> (B, h_out*w_out, c*r*r) patch matrix."""
    b = x.shape[0]
    p, s, r = layer.p, layer.s, layer.r
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    cols = np.empty((b, layer.c, r, r, layer.h_out, layer.w_out), dtype=x.dtype)
    for ky in range(r):
        for kx in range(r):
            cols[:, :, ky, kx] = xp[:, :, ky:ky + s * layer.h_out:s,
                                    kx:kx + s * layer.w_out:s]
    return cols.reshape(b, layer.c * r * r, -1).transpose(0, 2, 1)


def col2im(dcols: np.ndarray, layer: LayerSpec) -> np.ndarray:
    """Adjoint of im2col: scatter patch gradients back onto the input plane."""
    b = dcols.shape[0]
    p, s, r = layer.p, layer.s, layer.r
    dxp = np.zeros((b, layer.c, layer.h + 2 * p, layer.w + 2 * p),
                   dtype=dcols.dtype)
    grads = dcols.transpose(0, 2, 1).reshape(
        b, layer.c, r, r, layer.h_out, layer.w_out)
    for ky in range(r):
        for kx in range(r):
            dxp[:, :, ky:ky + s * layer.h_out:s, kx:kx + s * layer.w_out:s] += \
                grads[:, :, ky, kx]
    if p == 0:
        return dxp
    return dxp[:, :, p:-p, p:-p]


@dataclass
class TinyNet:
    """Weight tensors plus the layer specs that shape them."""

    specs: list
    weights: list = field(default_factory=list)

    @classmethod
    def initialize(cls, specs, seed: int = 0) -> "TinyNet":
        rng = np.random.default_rng(seed)
        weights = []
        for spec in specs:
            fan_in = spec.c if spec.kind == "fc" else \
                (spec.c // spec.groups) * spec.r * spec.r
            weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in),
                                      size=spec.weight_shape))
        return cls(list(specs), weights)

    @property
    def output_dim(self) -> int:
        last = self.specs[-1]
        if last.kind == "fc":
            return last.d
        return last.d * last.h_out * last.w_out

    def parameter_count(self) -> int:
        return int(sum(w.size for w in self.weights))

    def copy_weights(self) -> list:
        return [w.copy() for w in self.weights]

    def forward(self, x: np.ndarray, masks: dict | None = None,
                weights: list | None = None):
        """Returns (logits, cache); cache feeds backward()."""
        masks = masks or {}
        ws = self.weights if weights is None else weights
        a = np.asarray(x, dtype=float)
        cache = []
        for i, (spec, w) in enumerate(zip(self.specs, ws)):
            if i > 0:
                a = np.maximum(a, 0.0)  # ReLU on the previous pre-activation
            a = self._shape_for(spec, a)
            raw = a
            m = masks.get(i)
            if m is not None:
                a = a * m.values
            if spec.kind == "fc":
                z = a @ w
                cols = None
            else:
                cols = im2col(a, spec)
                z = (cols @ w.reshape(spec.d, -1).T).transpose(0, 2, 1)
                z = z.reshape(a.shape[0], spec.d, spec.h_out, spec.w_out)
            cache.append({"raw": raw, "masked": a, "cols": cols, "z": z,
                          "spec": spec, "w": w, "mask": m})
            a = z
        return a.reshape(a.shape[0], -1), cache

    @staticmethod
    def _shape_for(spec: LayerSpec, a: np.ndarray) -> np.ndarray:
        if spec.kind == "fc":
            a = a.reshape(a.shape[0], -1)
            if a.shape[1] != spec.c:
                raise ValueError(
                    f"fc layer expects {spec.c} features, got {a.shape[1]}")
            return a
        if a.ndim != 4 or a.shape[1:] != spec.input_shape:
            raise ValueError(
                f"conv layer expects {spec.input_shape}, got {a.shape[1:]}")
        return a

    def backward(self, cache: list, dlogits: np.ndarray):
        """Gradients of a scalar loss wrt every weight tensor and mask."""
        grads_w = [None] * len(self.specs)
        grads_m = {}
        last_z = cache[-1]["z"]
        da = dlogits.reshape(last_z.shape)
        for i in reversed(range(len(self.specs))):
            entry = cache[i]
            spec, w = entry["spec"], entry["w"]
            if spec.kind == "fc":
                grads_w[i] = entry["masked"].T @ da
                dinput = da @ w.T
            else:
                dz_mat = da.reshape(da.shape[0], spec.d, -1).transpose(0, 2, 1)
                dw_mat = np.einsum("bpk,bpd->kd", entry["cols"], dz_mat)
                grads_w[i] = dw_mat.T.reshape(spec.weight_shape)
                dcols = dz_mat @ w.reshape(spec.d, -1)
                dinput = col2im(dcols, spec)
            mask = entry["mask"]
            if mask is not None:
                grads_m[i] = np.sum(dinput * entry["raw"], axis=0)
                dinput = dinput * mask.values
            if i > 0:
                prev_z = cache[i - 1]["z"]
                dinput = dinput.reshape(prev_z.shape)
                da = dinput * (prev_z > 0)
            else:
                da = dinput
        return grads_w, grads_m
