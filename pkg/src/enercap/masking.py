"""Trainable input masks: elementwise gating, clamping, rounding, and the
hard sparsity projection used in the mask phase of training."""

from dataclasses import dataclass, field

import numpy as np


def apply_mask(x: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Elementwise product; masked-off positions are zero no matter the input.

    The mask has one sample's shape; a leading batch axis on x broadcasts.
    """
    x = np.asarray(x)
    m = np.asarray(m)
    if x.shape[-m.ndim:] != m.shape:
        raise ValueError(f"mask shape {m.shape} does not match input {x.shape}")
    return x * m


def l0_project(m: np.ndarray, q: int) -> np.ndarray:
    """Nearest point with at most q nonzeros: keep the q largest magnitudes.

    Ties at the cutoff keep the lowest flat index.  Idempotent.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    m = np.asarray(m)
    flat = m.reshape(-1)
    if q >= flat.size:
        return m.copy()
    out = np.zeros_like(flat)
    if q > 0:
        order = np.argsort(-np.abs(flat), kind="stable")
        keep = order[:q]
        out[keep] = flat[keep]
    return out.reshape(m.shape)


def clamp01(m: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(m), 0.0, 1.0)


def round_binary(m: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """1 where m >= threshold, else 0."""
    return (np.asarray(m) >= threshold).astype(float)


def decay_q(q: int, dq: int) -> int:
    """Shrink the sparsity allowance, floored at zero."""
    if dq <= 0:
        raise ValueError("decay step must be positive")
    return max(q - dq, 0)


@dataclass
class Mask:
    """Mask state for one layer input during training."""

    layer_id: str
    values: np.ndarray
    q: int
    dq: int

    nnz: int = field(init=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.nnz = int(np.count_nonzero(self.values))

    def project(self):
        self.values = l0_project(clamp01(self.values), self.q)
        self.nnz = int(np.count_nonzero(self.values))

    def round(self):
        self.values = round_binary(self.values)
        self.nnz = int(np.count_nonzero(self.values))

    def support(self) -> np.ndarray:
        return self.values != 0

    def decay(self):
        if self.dq > 0:
            self.q = decay_q(self.q, self.dq)
