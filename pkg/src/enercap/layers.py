"""Layer shape descriptions and binary sparsity patterns."""

from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """A tensor does not match the shape its layer requires."""

    def __init__(self, layer_id, what, expected, got):
        self.layer_id = layer_id
        super().__init__(
            f"layer {layer_id!r}: {what} has shape {got}, expected {expected}"
        )


@dataclass(frozen=True)
class LayerSpec:
    """One fully connected or convolutional layer.

    FC:   input dim c, output dim d; weight matrix is c x d.
    CONV: d filters, c input channels, r x r kernel, input c x h x w,
          padding p, stride s, channel groups.  Weight tensor is
          (d, c // groups, r, r).
    """

    kind: str  # "fc" | "conv"
    c: int
    d: int
    r: int = 1
    h: int = 1
    w: int = 1
    p: int = 0
    s: int = 1
    groups: int = 1
    layer_id: str = ""

    def __post_init__(self):
        if self.kind not in ("fc", "conv"):
            raise ValueError(f"layer kind must be 'fc' or 'conv', got {self.kind!r}")
        for name in ("c", "d", "r", "h", "w", "s", "groups"):
            if getattr(self, name) < 1:
                raise ValueError(f"layer field {name} must be >= 1")
        if self.p < 0:
            raise ValueError("padding must be >= 0")
        if self.kind == "conv":
            if self.r > self.h + 2 * self.p or self.r > self.w + 2 * self.p:
                raise ValueError("kernel larger than padded input")
            if self.c % self.groups or self.d % self.groups:
                raise ValueError("c and d must be divisible by groups")

    @property
    def h_out(self) -> int:
        return (self.h + 2 * self.p - self.r) // self.s + 1

    @property
    def w_out(self) -> int:
        return (self.w + 2 * self.p - self.r) // self.s + 1

    @property
    def weight_shape(self) -> tuple:
        if self.kind == "fc":
            return (self.c, self.d)
        return (self.d, self.c // self.groups, self.r, self.r)

    @property
    def input_shape(self) -> tuple:
        if self.kind == "fc":
            return (self.c,)
        return (self.c, self.h, self.w)

    @property
    def weight_size(self) -> int:
        return int(np.prod(self.weight_shape))

    @classmethod
    def from_dict(cls, d: dict, layer_id: str = "") -> "LayerSpec":
        kind = d.get("kind")
        if kind == "fc":
            return cls(kind="fc", c=int(d["c"]), d=int(d["d"]), layer_id=layer_id)
        if kind == "conv":
            return cls(
                kind="conv",
                c=int(d["c"]),
                d=int(d["d"]),
                r=int(d["r"]),
                h=int(d["h"]),
                w=int(d["w"]),
                p=int(d.get("p", 0)),
                s=int(d.get("s", 1)),
                groups=int(d.get("groups", 1)),
                layer_id=layer_id,
            )
        raise ValueError(f"layer {layer_id!r}: unknown kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "fc":
            return {"kind": "fc", "c": self.c, "d": self.d}
        return {
            "kind": "conv", "c": self.c, "d": self.d, "r": self.r,
            "h": self.h, "w": self.w, "p": self.p, "s": self.s,
            "groups": self.groups,
        }


@dataclass
class SupportPattern:
    """Binary occupancy tensor for a layer's weights or input."""

    layer_id: str
    mask: np.ndarray
    _nnz: int = field(default=-1, repr=False)

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self._nnz = int(self.mask.sum())

    @property
    def nnz(self) -> int:
        return self._nnz


def as_support(x, layer_id: str = "", expected_shape=None) -> np.ndarray:
    """Normalize a SupportPattern or array-like to a bool array, shape-checked."""
    arr = x.mask if isinstance(x, SupportPattern) else np.asarray(x) != 0
    if expected_shape is not None and arr.shape != tuple(expected_shape):
        raise ShapeError(layer_id, "support", tuple(expected_shape), arr.shape)
    return arr


def dense_support(shape) -> np.ndarray:
    return np.ones(shape, dtype=bool)
