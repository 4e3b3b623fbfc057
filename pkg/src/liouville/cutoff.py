"""Smooth radial cutoff ``sigma`` (1 on |x|<1, 0 on |x|>2) and its derivatives.

The bridge is the classical partition ``g(2-r) / (g(2-r) + g(r-1))`` with
``g(t) = exp(-1/t)``.  Writing it as ``expit(-phi)`` with
``phi = 1/(2-r) - 1/(r-1)`` keeps every derivative finite near the ends of
the bridge, where the exponential flatness beats the poles of ``phi``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import expit

from .grid import Grid


def profile(s: np.ndarray, order: int = 0) -> np.ndarray:
    """``sigma(s)`` or its ``order``-th derivative (``order <= 3``)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    if order == 0:
        out[s <= 1] = 1.0
    bridge = (s > 1) & (s < 2)
    if not np.any(bridge):
        return out
    a = s[bridge] - 1.0
    b = 2.0 - s[bridge]
    phi = 1.0 / b - 1.0 / a
    S = expit(-phi)
    if order == 0:
        out[bridge] = S
        return out
    q = S * expit(phi)  # S (1 - S) without cancellation
    d1 = 1 / a**2 + 1 / b**2
    if order == 1:
        out[bridge] = -q * d1
        return out
    d2 = -2 / a**3 + 2 / b**3
    S2 = q * (1 - 2 * S)
    if order == 2:
        out[bridge] = S2 * d1**2 - q * d2
        return out
    if order == 3:
        d3 = 6 / a**4 + 6 / b**4
        S3 = -q * (1 - 6 * q)
        out[bridge] = S3 * d1**3 + 3 * S2 * d1 * d2 - q * d3
        return out
    raise ValueError("order must be 0..3")


def smooth_step(r: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """Radial weight equal to 1 for ``r <= inner`` and 0 for ``r >= outer``."""
    return profile(1.0 + (np.asarray(r) - inner) / (outer - inner))


@dataclass(frozen=True, eq=False)
class CutoffFamily:
    """``sigma_R(x) = sigma(|x|/R)`` sampled on a grid with exact derivatives."""

    R: float
    grid: Grid

    @cached_property
    def _r(self):
        return self.grid.radius

    def _radial(self, order):
        return profile(self._r / self.R, order) / self.R**order

    @cached_property
    def values(self) -> np.ndarray:
        return self._radial(0)

    @cached_property
    def gradient(self) -> np.ndarray:
        d1 = self._radial(1)
        r = np.where(self._r > 0, self._r, 1.0)
        return np.stack([d1 * c / r for c in self.grid.coords])

    @cached_property
    def hessian(self) -> np.ndarray:
        """Shape ``(N, N, n, ..., n)``."""
        N = self.grid.dims
        d1, d2 = self._radial(1), self._radial(2)
        r = np.where(self._r > 0, self._r, 1.0)
        x = self.grid.coords
        H = np.empty((N, N, *self.grid.shape))
        for a in range(N):
            for b in range(a, N):
                xx = x[a] * x[b] / r**2
                H[a, b] = d2 * xx + d1 * ((a == b) - xx) / r
                H[b, a] = H[a, b]
        return H

    @cached_property
    def laplacian(self) -> np.ndarray:
        r = np.where(self._r > 0, self._r, 1.0)
        return self._radial(2) + (self.grid.dims - 1) * self._radial(1) / r

    @cached_property
    def grad_laplacian(self) -> np.ndarray:
        N = self.grid.dims
        r = np.where(self._r > 0, self._r, 1.0)
        d1, d2, d3 = self._radial(1), self._radial(2), self._radial(3)
        dlap = d3 + (N - 1) * (d2 / r - d1 / r**2)
        return np.stack([dlap * c / r for c in self.grid.coords])
