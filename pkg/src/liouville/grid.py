"""Periodic-box discretization of rapidly decaying fields on R^N.

The box ``[-L/2, L/2)^N`` is sampled at ``n`` points per axis. Fields that
decay well inside the box are treated as fields on the whole space; all
integrals are Riemann sums, which are spectrally accurate for such fields.

Fourier convention::

    f_hat(k) = h^N * sum_x f(x) exp(-i k.x),   k = 2 pi m / L

so that ``f_hat`` approximates the continuum transform ``int f exp(-i xi.x) dx``
directly.  :func:`nudft` evaluates the same sum at arbitrary ``xi``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "SpectralField",
    "make_grid",
    "integrate",
    "to_spectral",
    "from_spectral",
    "derivative",
    "gradient",
    "divergence",
    "laplacian",
    "leray_project",
    "nudft",
    "write_lvf1",
    "read_lvf1",
]


@dataclass(frozen=True)
class Grid:
    dims: int
    n: int
    L: float

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dims

    @property
    def cell_volume(self) -> float:
        return self.h**self.dims

    @cached_property
    def x(self) -> np.ndarray:
        """1D coordinates ``-L/2 + i h``."""
        return -0.5 * self.L + self.h * np.arange(self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.x] * self.dims), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords))

    @cached_property
    def m(self) -> np.ndarray:
        """Integer wave indices in FFT order, ``[-n/2, n/2)``."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    @cached_property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * self.m / self.L

    @cached_property
    def kvec(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.k] * self.dims), indexing="ij"))

    @cached_property
    def k2(self) -> np.ndarray:
        return sum(kk * kk for kk in self.kvec)

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i k L/2) = (-1)^m per axis; n is even so the sign is well defined
        sign = np.where(self.m % 2 == 0, 1.0, -1.0)
        out = np.ones(self.shape)
        for axis in range(self.dims):
            idx = [None] * self.dims
            idx[axis] = slice(None)
            out = out * sign[tuple(idx)]
        return out

    @cached_property
    def _nyquist_free(self) -> tuple[np.ndarray, ...]:
        # first-derivative symbols with the unpaired Nyquist mode removed
        out = []
        for kk, mm in zip(self.kvec, np.meshgrid(*([self.m] * self.dims), indexing="ij")):
            out.append(np.where(mm == -self.n // 2, 0.0, kk))
        return tuple(out)


def make_grid(N: int, n: int, L: float) -> Grid:
    """Build a centered periodic grid; ``n`` must be a power of two >= 16."""
    if N not in (2, 3):
        raise ValueError(f"dims must be 2 or 3, got {N}")
    if n < 16 or n & (n - 1):
        raise ValueError(f"n must be a power of two >= 16, got {n}")
    if not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    return Grid(int(N), int(n), float(L))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")

    def __add__(self, other):
        return ScalarField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - _vals(other))

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * _vals(other))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class VectorField:
    """``components`` has shape ``(N, n, ..., n)``."""

    grid: Grid
    components: np.ndarray

    def __post_init__(self):
        if self.components.shape != (self.grid.dims, *self.grid.shape):
            raise ValueError("component array does not match grid")

    @classmethod
    def from_scalars(cls, fields) -> "VectorField":
        fields = list(fields)
        return cls(fields[0].grid, np.stack([f.values for f in fields]))

    def __getitem__(self, j: int) -> ScalarField:
        return ScalarField(self.grid, self.components[j])

    def __iter__(self):
        return (self[j] for j in range(self.grid.dims))

    def __add__(self, other):
        return VectorField(self.grid, self.components + _vals(other))

    def __sub__(self, other):
        return VectorField(self.grid, self.components - _vals(other))

    def __mul__(self, scalar):
        return VectorField(self.grid, self.components * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(self.grid, -self.components)

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.components**2, axis=0))

    def max_abs(self) -> float:
        return float(self.magnitude().max())

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.components**2) * self.grid.cell_volume))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients in numpy FFT ordering, convention as in the module doc."""

    grid: Grid
    coeffs: np.ndarray = field(repr=False)

    def at(self, m) -> complex:
        """Coefficient at integer wavevector ``m`` (each entry in ``[-n/2, n/2)``)."""
        return complex(self.coeffs[tuple(int(mi) % self.grid.n for mi in m)])


def _vals(obj):
    if isinstance(obj, ScalarField):
        return obj.values
    if isinstance(obj, VectorField):
        return obj.components
    return obj


def integrate(f) -> float:
    """Riemann sum ``h^N * sum f``; accepts a ScalarField or a raw array."""
    if isinstance(f, ScalarField):
        return float(np.sum(f.values) * f.grid.cell_volume)
    raise TypeError("integrate expects a ScalarField")


def _fft(grid: Grid, values: np.ndarray) -> np.ndarray:
    axes = tuple(range(values.ndim - grid.dims, values.ndim))
    return np.fft.fftn(values, axes=axes) * (grid._phase * grid.cell_volume)


def _ifft(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    axes = tuple(range(coeffs.ndim - grid.dims, coeffs.ndim))
    return np.fft.ifftn(coeffs / (grid._phase * grid.cell_volume), axes=axes).real


def to_spectral(f: ScalarField) -> SpectralField:
    return SpectralField(f.grid, _fft(f.grid, f.values))


def from_spectral(F: SpectralField) -> ScalarField:
    return ScalarField(F.grid, _ifft(F.grid, F.coeffs))


def derivative(f: ScalarField, axis: int) -> ScalarField:
    g = f.grid
    return ScalarField(g, np.fft.ifftn(1j * g._nyquist_free[axis] * np.fft.fftn(f.values)).real)


def gradient(f: ScalarField) -> VectorField:
    return VectorField.from_scalars(derivative(f, a) for a in range(f.grid.dims))


def divergence(v: VectorField) -> ScalarField:
    g = v.grid
    vh = np.fft.fftn(v.components, axes=tuple(range(1, g.dims + 1)))
    s = sum(1j * g._nyquist_free[a] * vh[a] for a in range(g.dims))
    return ScalarField(g, np.fft.ifftn(s).real)


def laplacian(f: ScalarField) -> ScalarField:
    g = f.grid
    return ScalarField(g, np.fft.ifftn(-g.k2 * np.fft.fftn(f.values)).real)


def leray_project(v: VectorField) -> VectorField:
    """Remove the gradient part: ``v_hat - k (k.v_hat)/|k|^2``; zero mode kept."""
    g = v.grid
    axes = tuple(range(1, g.dims + 1))
    vh = np.fft.fftn(v.components, axes=axes)
    kk = np.stack(g._nyquist_free)
    k2 = np.sum(kk * kk, axis=0)
    inv = np.divide(1.0, k2, out=np.zeros_like(k2), where=k2 > 0)
    kdotv = np.sum(kk * vh, axis=0)
    out = vh - kk * (kdotv * inv)
    return VectorField(g, np.fft.ifftn(out, axes=axes).real)


def nudft(f: ScalarField, xi) -> complex:
    """Direct transform ``h^N sum f(x) exp(-i xi.x)`` at an arbitrary frequency."""
    g = f.grid
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (g.dims,):
        raise ValueError(f"xi must have shape ({g.dims},)")
    out = f.values.astype(complex)
    # contract one axis at a time; the phase factor is separable
    for a in range(g.dims):
        out = np.tensordot(np.exp(-1j * xi[a] * g.x), out, axes=([0], [0]))
    return complex(out * g.cell_volume)


_MAGIC = b"LVF1"


def write_lvf1(path, grid: Grid, data: np.ndarray) -> None:
    """Write ``data`` of shape ``(c, n, ..., n)`` (or a single field) as LVF1."""
    data = np.asarray(data, dtype="<f8")
    if data.shape == grid.shape:
        data = data[None]
    if data.shape[1:] != grid.shape:
        raise ValueError("data does not match grid")
    header = _MAGIC + struct.pack("<IIdI", grid.dims, grid.n, grid.L, data.shape[0])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(data).tobytes())


def read_lvf1(path) -> tuple[Grid, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path}: not an LVF1 file")
    N, n, L, c = struct.unpack_from("<IIdI", raw, 4)
    grid = make_grid(N, n, L)
    offset = 4 + struct.calcsize("<IIdI")
    count = c * n**N
    if len(raw) - offset != 8 * count:
        raise ValueError(f"{path}: truncated LVF1 payload")
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    return grid, data.reshape((c, *grid.shape)).copy()
