"""Real solid harmonics and the interior/exterior split of a harmonic field.

On an annulus ``r_in <= |x| <= r_out`` a harmonic function is uniquely the
sum of a part regular at the origin (``r^l Y_l``) and a part decaying at
infinity (``r^{-l}`` in 2D, ``r^{-l-1}`` in 3D).  The periodic-box pressure outside the support of the stress is
exactly such a sum: the decaying part is the whole-space pressure and the
regular part is the field of the periodic images plus the zero-mode shift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import sph_harm_y


def angular_basis(dims: int, lmax: int, unit: np.ndarray) -> tuple[list[int], np.ndarray]:
    """Real orthogonal angular functions on the unit sphere.

    ``unit`` has shape ``(dims, P)``.  Returns the degree of each function and
    an array of shape ``(F, P)``.
    """
    if dims == 2:
        theta = np.arctan2(unit[1], unit[0])
        degrees, rows = [0], [np.ones_like(theta)]
        for l in range(1, lmax + 1):
            degrees += [l, l]
            rows += [np.cos(l * theta), np.sin(l * theta)]
        return degrees, np.array(rows)
    polar = np.arccos(np.clip(unit[2], -1.0, 1.0))
    azim = np.arctan2(unit[1], unit[0])
    degrees, rows = [], []
    for l in range(lmax + 1):
        for m in range(-l, l + 1):
            y = sph_harm_y(l, abs(m), polar, azim)
            if m > 0:
                rows.append(np.sqrt(2.0) * y.real)
            elif m < 0:
                rows.append(np.sqrt(2.0) * y.imag)
            else:
                rows.append(y.real)
            degrees.append(l)
    return degrees, np.array(rows)


# the pressure is a second derivative of a potential, so its decaying part
# starts at degree 2 (no log/monopole or dipole terms)
MIN_EXTERIOR_DEGREE = 2


def _radial(dims, degrees, r, r_in, r_out):
    deg = np.asarray(degrees)[:, None]
    interior = (r[None, :] / r_out) ** deg
    ext_power = deg if dims == 2 else deg + 1
    exterior = (r_in / r[None, :]) ** ext_power
    exterior[deg[:, 0] < MIN_EXTERIOR_DEGREE] = 0.0
    return interior, exterior


@dataclass(frozen=True)
class HarmonicSplit:
    """Least-squares interior/exterior harmonic expansion fitted on an annulus."""

    dims: int
    lmax: int
    r_in: float
    r_out: float
    interior_coeffs: np.ndarray
    exterior_coeffs: np.ndarray
    fit_rms: float
    scale: float

    def _evaluate(self, points: np.ndarray, which: str) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        r = np.sqrt(np.sum(points**2, axis=0))
        safe = np.where(r > 0, r, 1.0)
        degrees, ang = angular_basis(self.dims, self.lmax, points / safe)
        if which == "interior":
            # 0**0 == 1 keeps the constant term at the origin
            radial = (r[None, :] / self.r_out) ** np.asarray(degrees)[:, None]
            return self.interior_coeffs @ (radial * ang)
        _, exterior = _radial(self.dims, degrees, safe, self.r_in, self.r_out)
        return self.exterior_coeffs @ (exterior * ang)

    def interior(self, points) -> np.ndarray:
        """Regular part at ``points`` (shape ``(dims, P)``), valid for ``|x| <= r_out``."""
        return self._evaluate(points, "interior")

    def exterior(self, points) -> np.ndarray:
        """Decaying part, valid for ``|x| >= r_in`` including beyond the box."""
        return self._evaluate(points, "exterior")


def fit_split(points: np.ndarray, values: np.ndarray, r_in: float, r_out: float, lmax: int) -> HarmonicSplit:
    dims = points.shape[0]
    r = np.sqrt(np.sum(points**2, axis=0))
    degrees, ang = angular_basis(dims, lmax, points / r)
    interior, exterior = _radial(dims, degrees, r, r_in, r_out)
    keep = np.asarray(degrees) >= MIN_EXTERIOR_DEGREE
    design = np.concatenate([interior * ang, (exterior * ang)[keep]]).T
    scale = float(np.max(np.abs(values))) or 1.0
    coeffs, *_ = np.linalg.lstsq(design, values / scale, rcond=None)
    resid = design @ coeffs - values / scale
    F = len(degrees)
    ext = np.zeros(F)
    ext[keep] = coeffs[F:]
    return HarmonicSplit(
        dims=dims,
        lmax=lmax,
        r_in=r_in,
        r_out=r_out,
        interior_coeffs=coeffs[:F] * scale,
        exterior_coeffs=ext * scale,
        fit_rms=float(np.sqrt(np.mean(resid**2)) * scale),
        scale=scale,
    )


def sphere_quadrature(dims: int, n_ang: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions and weights integrating exactly over the unit sphere
    (trapezoid in angle; Gauss-Legendre in cos(polar) for 3D)."""
    if dims == 2:
        theta = 2 * np.pi * np.arange(n_ang) / n_ang
        return np.array([np.cos(theta), np.sin(theta)]), np.full(n_ang, 2 * np.pi / n_ang)
    nz = max(n_ang // 4, 8)
    mu, wmu = np.polynomial.legendre.leggauss(nz)
    phi = 2 * np.pi * np.arange(2 * nz) / (2 * nz)
    MU, PHI = np.meshgrid(mu, phi, indexing="ij")
    s = np.sqrt(1 - MU**2)
    pts = np.array([s * np.cos(PHI), s * np.sin(PHI), MU]).reshape(3, -1)
    w = (wmu[:, None] * np.full(PHI.shape[1], 2 * np.pi / PHI.shape[1])[None, :]).ravel()
    return pts, w
