"""Local gate application on register tensors (qubit 0 is axis 0)."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def contract(t: np.ndarray, g: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply a (2, 2, 2, 2) two-qubit gate to the given pair of tensor axes."""
    out = np.tensordot(g, t, axes=([2, 3], list(axes)))
    return np.moveaxis(out, [0, 1], list(axes))


def conjugate_edge(t: np.ndarray, g: np.ndarray, c: int, tgt: int, m: int) -> np.ndarray:
    """``U t U^dagger`` on an ``m``-qubit operator tensor of shape ``(2,)*2m``."""
    t = contract(t, g, (c, tgt))
    return contract(t, g.conj(), (m + c, m + tgt))
