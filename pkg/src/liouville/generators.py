"""Divergence-free test fields built from stream functions / vector potentials.

Every field is ``polynomial * exp(-|x|^2 / width^2)`` differentiated
spectrally: ``v = grad^perp psi`` in 2D and ``v = curl A`` in 3D, so the
discrete divergence vanishes to roundoff.

Random coefficients come from numpy's PCG64 bit generator seeded with
``GeneratorSpec.seed`` and drawn in a fixed monomial order, which makes the
fields reproducible across platforms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField, VectorField, derivative

KINDS = ("stream2d", "potential3d", "random_divfree")
SYMMETRIES = ("none", "c4", "cubic")

# fields must fall below this fraction of their peak outside radius L/3
SUPPORT_TOL = 1e-8


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a divergence-free field.

    ``terms`` lists ``(coefficient, exponents)`` for a stream function, or
    ``(coefficient, component, exponents)`` for a 3D vector potential.
    ``symmetry="c4"`` averages a 2D stream function over quarter turns and
    ``"cubic"`` averages a 3D potential over the tetrahedral rotation group;
    both make the momentum tensor a multiple of the identity.
    """

    kind: str = "stream2d"
    width: float = 1.0
    terms: tuple = ((1.0, (0, 0)),)
    degree: int = 3
    seed: int = 0
    symmetry: str = "none"
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.symmetry not in SYMMETRIES:
            raise ValueError(f"unknown symmetry {self.symmetry!r}")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.degree < 0:
            raise ValueError("degree must be >= 0")


def radial_stream(amplitude=1.0) -> GeneratorSpec:
    """psi = exp(-|x|^2): isotropic momentum tensor."""
    return GeneratorSpec("stream2d", terms=((1.0, (0, 0)),), amplitude=amplitude)


def dipole_stream(amplitude=1.0) -> GeneratorSpec:
    """psi = x1 exp(-|x|^2): M = diag(pi/8, 3 pi/8)."""
    return GeneratorSpec("stream2d", terms=((1.0, (1, 0)),), amplitude=amplitude)


def octupole_stream(amplitude=1.0) -> GeneratorSpec:
    """psi = x1 x2 (x1^2 - x2^2) exp(-|x|^2), invariant under quarter turns."""
    return GeneratorSpec("stream2d", terms=((1.0, (3, 1)), (-1.0, (1, 3))), amplitude=amplitude)


def _envelope(coords, width):
    return np.exp(-sum(c * c for c in coords) / width**2)


def _poly(coords, terms):
    out = np.zeros_like(coords[0])
    for coef, exps in terms:
        mono = np.full_like(coords[0], float(coef))
        for c, e in zip(coords, exps):
            if e:
                mono = mono * c**e
        out = out + mono
    return out


def _monomials(dims, degree):
    return [e for d in range(degree + 1) for e in itertools.product(range(d + 1), repeat=dims) if sum(e) == d]


def _random_terms(spec: GeneratorSpec, dims: int):
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    monos = _monomials(dims, spec.degree)
    # scale monomials with the envelope so the polynomial stays O(1) over the bump
    scale = lambda e: spec.width ** (-sum(e))  # noqa: E731
    if dims == 2:
        return tuple((float(c) * scale(e), e) for c, e in zip(rng.standard_normal(len(monos)), monos))
    out = []
    for comp in range(3):
        for c, e in zip(rng.standard_normal(len(monos)), monos):
            out.append((float(c) * scale(e), comp, e))
    return tuple(out)


_QUARTER_TURNS = [np.array(m, dtype=float) for m in ([[1, 0], [0, 1]], [[0, -1], [1, 0]], [[-1, 0], [0, -1]], [[0, 1], [-1, 0]])]


def _tetrahedral_rotations():
    perms = [np.eye(3)[list(p)] for p in ((0, 1, 2), (1, 2, 0), (2, 0, 1))]
    signs = [np.diag(s) for s in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))]
    return [s @ p for p in perms for s in signs]


def _transformed(coords, mat):
    """Coordinates ``mat^{-1} x`` (rotations: the transpose)."""
    inv = mat.T
    return tuple(sum(inv[i, j] * coords[j] for j in range(len(coords))) for i in range(len(coords)))


def stream_function(spec: GeneratorSpec, grid: Grid) -> ScalarField:
    """Sampled 2D stream function for ``stream2d`` / 2D ``random_divfree``."""
    if grid.dims != 2:
        raise ValueError("stream functions are 2D")
    terms = _random_terms(spec, 2) if spec.kind == "random_divfree" else spec.terms
    mats = _QUARTER_TURNS if spec.symmetry == "c4" else _QUARTER_TURNS[:1]
    psi = np.zeros(grid.shape)
    for mat in mats:
        c = _transformed(grid.coords, mat)
        psi += _poly(c, terms) * _envelope(c, spec.width)
    return ScalarField(grid, spec.amplitude * psi / len(mats))


def vector_potential(spec: GeneratorSpec, grid: Grid) -> VectorField:
    if grid.dims != 3:
        raise ValueError("vector potentials are 3D")
    terms = _random_terms(spec, 3) if spec.kind == "random_divfree" else spec.terms
    mats = _tetrahedral_rotations() if spec.symmetry == "cubic" else [np.eye(3)]
    A = np.zeros((3, *grid.shape))
    for mat in mats:
        c = _transformed(grid.coords, mat)
        env = _envelope(c, spec.width)
        local = np.stack([_poly(c, [(t[0], t[2]) for t in terms if t[1] == comp]) * env for comp in range(3)])
        # A_g(x) = g A(g^{-1} x)
        A += np.tensordot(mat, local, axes=([1], [0]))
    return VectorField(grid, spec.amplitude * A / len(mats))


def perp_gradient(psi: ScalarField) -> VectorField:
    """(-d2 psi, d1 psi)."""
    return VectorField.from_scalars([-derivative(psi, 1), derivative(psi, 0)])


def curl(A: VectorField) -> VectorField:
    d = lambda f, a: derivative(A[f], a)  # noqa: E731
    return VectorField.from_scalars([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)])


def gen_divfree(spec: GeneratorSpec, grid: Grid) -> VectorField:
    """Generate a divergence-free field; rejects envelopes too wide for the box."""
    if spec.width > grid.L / 6:
        raise ValueError(f"envelope width {spec.width} exceeds L/6 = {grid.L / 6}")
    if spec.kind == "stream2d" and grid.dims != 2:
        raise ValueError("stream2d needs a 2D grid")
    if spec.kind == "potential3d" and grid.dims != 3:
        raise ValueError("potential3d needs a 3D grid")
    if spec.symmetry == "c4" and grid.dims != 2 or spec.symmetry == "cubic" and grid.dims != 3:
        raise ValueError(f"symmetry {spec.symmetry!r} does not apply in {grid.dims}D")
    if grid.dims == 2:
        v = perp_gradient(stream_function(spec, grid))
    else:
        v = curl(vector_potential(spec, grid))
    peak = v.max_abs()
    if peak > 0:
        tail = v.magnitude()[grid.radius > grid.L / 3]
        if tail.size and tail.max() > SUPPORT_TOL * peak:
            raise ValueError(
                f"envelope too wide for the box: |v| outside L/3 is {tail.max() / peak:.1e} of peak"
            )
    return v
