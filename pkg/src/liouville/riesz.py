"""Pressure from velocity through the double Riesz transform, and diagnostics.

``compute_pressure`` returns the periodic-box pressure with its zero mode set
to zero.  On the box this differs from the whole-space pressure by a function
that is harmonic near the origin (the constant shift from the zero mode plus
the field of the periodic images).  Outside the support of ``v`` both are
harmonic, so an interior/exterior harmonic fit on an annulus recovers the
whole-space pressure exactly (``free_space_pressure``), and the mean value
property gives the principal-value integral without any fit at all
(``pv_integral``).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .cutoff import smooth_step
from .grid import Grid, ScalarField, VectorField, laplacian, nudft
from .harmonics import HarmonicSplit, fit_split, sphere_quadrature

log = logging.getLogger(__name__)

L1_CLASSES = ("integrable", "log_divergent", "undetermined")

# harmonic window: |lap p| below this fraction of its peak counts as harmonic.
# Compact data meets the first level; evolved 2D flows carry algebraic
# velocity tails and need a looser one.
HARMONIC_TOLS = (1e-9, 1e-8, 1e-7, 1e-6)
MIN_ANNULUS = 1.2
# fit residual (relative to max |p|) above which the split is not trusted
FIT_TOL = 1e-4
OUTER_FRACTION = 0.45
DECAY_FACTOR = 1.5
PLATEAU_BAND = 0.2
# annular sums below this fraction of the core integral count as zero
NEGLIGIBLE = 1e-9
N_ANNULI = 5


class Undetermined(RuntimeError):
    """A diagnostic could not reach a verdict on the given box."""


def support_warning(v: VectorField, tol: float = 1e-8) -> bool:
    """Warn when ``v`` is not effectively supported inside radius L/3."""
    peak = v.max_abs()
    if peak == 0:
        return False
    tail = v.magnitude()[v.grid.radius > v.grid.L / 3]
    bad = tail.size > 0 and tail.max() > tol * peak
    if bad:
        warnings.warn(
            f"field not supported in radius L/3 (tail {tail.max() / peak:.1e} of peak); "
            "periodization error may dominate the pressure",
            stacklevel=3,
        )
    return bad


def stress_tensor(v: VectorField) -> np.ndarray:
    """``W[j, k] = v^j v^k`` with shape ``(N, N, n, ..., n)``."""
    return v.components[:, None] * v.components[None, :]


def _symbol_sum(grid: Grid, What: np.ndarray) -> np.ndarray:
    s = np.zeros(grid.shape, dtype=complex)
    for j in range(grid.dims):
        for k in range(grid.dims):
            s += grid.kvec[j] * grid.kvec[k] * What[j, k]
    return s


def pressure_from_stress(grid: Grid, W: np.ndarray) -> ScalarField:
    """Box solution of ``lap p = -d_j d_k W_jk`` with ``p_hat(0) = 0``."""
    What = np.fft.fftn(W, axes=tuple(range(2, 2 + grid.dims)))
    s = _symbol_sum(grid, What)
    k2 = grid.k2
    p_hat = np.divide(-s, k2, out=np.zeros_like(s), where=k2 > 0)
    return ScalarField(grid, np.fft.ifftn(p_hat).real)


def compute_pressure(v: VectorField) -> ScalarField:
    """``p = sum_jk R_j R_k (v^j v^k)`` on the periodic box (mean zero)."""
    support_warning(v)
    return pressure_from_stress(v.grid, stress_tensor(v))


@dataclass(frozen=True)
class MomentumTensor:
    M: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.M))

    @property
    def energies(self) -> np.ndarray:
        return 0.5 * np.diag(self.M)

    def deviatoric(self) -> np.ndarray:
        N = self.M.shape[0]
        return self.M - np.trace(self.M) / N * np.eye(N)

    def quadratic_form(self, e) -> float:
        e = np.asarray(e, dtype=float)
        return float(e @ self.M @ e)


def momentum_tensor(v: VectorField) -> MomentumTensor:
    N = v.grid.dims
    M = np.empty((N, N))
    for j in range(N):
        for k in range(j, N):
            M[j, k] = M[k, j] = np.sum(v.components[j] * v.components[k]) * v.grid.cell_volume
    return MomentumTensor(M)


def pressure_transform(v: VectorField, xi) -> float:
    """Continuum-convention transform of the whole-space pressure at ``xi != 0``."""
    xi = np.asarray(xi, dtype=float)
    xi2 = float(xi @ xi)
    if xi2 == 0:
        raise ValueError("the pressure symbol has no value at xi = 0")
    total = 0.0
    N = v.grid.dims
    for j in range(N):
        for k in range(j, N):
            w = nudft(ScalarField(v.grid, v.components[j] * v.components[k]), xi)
            total += (1 if j == k else 2) * xi[j] * xi[k] * w.real
    return -total / xi2


def directional_pressure_limit(v: VectorField, e, t0: float | None = None, levels: int = 6) -> float:
    """``lim_{t->0+} p_hat(t e)`` by Richardson extrapolation on ``t0 / 2^k``."""
    e = np.asarray(e, dtype=float)
    if abs(np.linalg.norm(e) - 1) > 1e-12:
        raise ValueError("direction must be a unit vector")
    if t0 is None:
        t0 = 0.25 * 2 * np.pi / v.grid.L
    ts = t0 / 2.0 ** np.arange(levels)
    table = [[pressure_transform(v, t * e)] for t in ts]
    for i in range(1, levels):
        for j in range(1, i + 1):
            prev, left = table[i][j - 1], table[i - 1][j - 1]
            table[i].append(prev + (prev - left) / (2.0**j - 1))
    best, runner = table[-1][-1], table[-1][-2]
    scale = max(abs(best), abs(table[0][0]), 1e-300)
    if abs(best - runner) > 1e-6 * scale:
        raise Undetermined(f"directional limit did not converge: {best} vs {runner}")
    return float(best)


def harmonic_window(p: ScalarField) -> tuple[float, float]:
    """Annulus where ``p`` is harmonic: beyond the support of its Laplacian.

    Uses the strictest level of ``HARMONIC_TOLS`` that leaves an annulus
    with ``r_out >= MIN_ANNULUS * r_in``.
    """
    g = p.grid
    lap = np.abs(laplacian(p).values)
    peak = lap.max()
    r_out = OUTER_FRACTION * g.L
    if peak == 0:
        return 4 * g.h, r_out
    r_in = r_out
    for tol in HARMONIC_TOLS:
        r_in = max(float(g.radius[lap > tol * peak].max()), 4 * g.h)
        if r_out >= MIN_ANNULUS * r_in:
            break
    return r_in, r_out


def harmonic_split(p: ScalarField, lmax: int | None = None) -> HarmonicSplit:
    g = p.grid
    r_in, r_out = harmonic_window(p)
    if r_out < MIN_ANNULUS * r_in:
        raise Undetermined(f"no harmonic annulus: support radius {r_in:.3g} vs box limit {r_out:.3g}")
    if lmax is None:
        lmax = 24 if g.dims == 2 else 8
    mask = (g.radius >= r_in) & (g.radius <= r_out)
    pts = np.array([c[mask] for c in g.coords])
    return fit_split(pts, p.values[mask], r_in, r_out, lmax)


def free_space_pressure(p: ScalarField, split: HarmonicSplit | None = None) -> ScalarField:
    """Whole-space pressure from a box pressure (or any pressure harmonic
    outside a central ball): subtract the regular harmonic part inside the
    fit window, use the decaying expansion outside it."""
    g = p.grid
    if not np.any(p.values):
        return p
    split = split or harmonic_split(p)
    out = p.values.copy()
    inside = g.radius <= split.r_out
    pts_in = np.array([c[inside] for c in g.coords])
    out[inside] -= split.interior(pts_in)
    pts_out = np.array([c[~inside] for c in g.coords])
    if pts_out.size:
        out[~inside] = split.exterior(pts_out)
    return ScalarField(g, out)


def pv_integral(p: ScalarField, window: tuple[float, float] | None = None, count: int = 5) -> tuple[float, float]:
    """Principal-value integral ``lim int_{B_R} p`` and the fit residual.

    For radial weights ``w`` whose plateau covers the support, the decaying
    part contributes exactly its principal value and the regular part
    contributes ``h(0) int w``; a line fit in ``int w`` separates them.
    """
    g = p.grid
    if not np.any(p.values):
        return 0.0, 0.0
    r_in, r_out = window or harmonic_window(p)
    width = (r_out - r_in) / 3
    rows = []
    for R in np.linspace(r_in, r_out - width, count):
        w = smooth_step(g.radius, R, R + width)
        rows.append((np.sum(w) * g.cell_volume, np.sum(p.values * w) * g.cell_volume))
    rows = np.array(rows)
    A = np.column_stack([np.ones(count), rows[:, 0]])
    coef, *_ = np.linalg.lstsq(A, rows[:, 1], rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - rows[:, 1]) ** 2)))
    return float(coef[0]), rms


def _shell_values(split: HarmonicSplit, radius: float, n_ang: int = 256):
    dirs, w = sphere_quadrature(split.dims, n_ang)
    return dirs, w, split.exterior(radius * dirs)


def annular_sums(split: HarmonicSplit, radii, nodes: int = 24) -> np.ndarray:
    """``int_{R<|x|<2R} |p|`` from the decaying expansion, for each ``R``."""
    u, wu = np.polynomial.legendre.leggauss(nodes)
    out = []
    for R in radii:
        # integrate in log r: dr r^{N-1} = r^N dlog r
        s = 0.5 * (u + 1) * np.log(2.0)
        total = 0.0
        for si, wi in zip(s, wu):
            r = R * np.exp(si)
            _, w, vals = _shell_values(split, r)
            total += 0.5 * np.log(2.0) * wi * r**split.dims * np.sum(w * np.abs(vals))
        out.append(total)
    return np.array(out)


@dataclass(frozen=True)
class L1Report:
    classification: str
    pv_estimate: float
    log_slope: float
    fit_rms: float
    annular_sums: tuple = ()
    radii: tuple = ()


def _classify_sums(sums: np.ndarray, ref: float) -> str:
    tail = sums[-3:]
    negligible = tail <= NEGLIGIBLE * ref
    if np.all(negligible):
        return "integrable"
    decays = all(
        negligible[i + 1] or (not negligible[i] and tail[i] >= DECAY_FACTOR * tail[i + 1])
        for i in range(len(tail) - 1)
    )
    if decays:
        return "integrable"
    mean = tail.mean()
    if not np.any(negligible) and np.all(np.abs(tail / mean - 1) <= PLATEAU_BAND):
        return "log_divergent"
    return "undetermined"


def l1_diagnostic(p: ScalarField) -> L1Report:
    """Is ``p`` integrable on the whole space?  Dyadic annular sums of the
    decaying part decide: geometric decay means integrable, a plateau means
    an ``|x|^{-N}`` tail and a logarithmically divergent ``int |p|``."""
    g = p.grid
    if not np.any(p.values):
        return L1Report("integrable", 0.0, 0.0, 0.0)
    try:
        split = harmonic_split(p)
    except Undetermined as exc:
        log.info("l1 diagnostic undetermined: %s", exc)
        return L1Report("undetermined", float("nan"), float("nan"), float("nan"))
    pv, _ = pv_integral(p, (split.r_in, split.r_out))
    radii = split.r_in * 2.0 ** np.arange(N_ANNULI)
    sums = annular_sums(split, radii)
    core = free_space_pressure(p, split).values
    ref = float(np.sum(np.abs(core[g.radius < split.r_in])) * g.cell_volume)
    cumulative = np.cumsum(sums)
    log_slope = float(np.polyfit(np.log(2 * radii[-3:]), cumulative[-3:], 1)[0])
    classification = _classify_sums(sums, ref)
    if split.fit_rms > FIT_TOL * split.scale:
        classification = "undetermined"
    return L1Report(classification, pv, log_slope, split.fit_rms, tuple(sums), tuple(radii))


def tensor_pattern(M: MomentumTensor, points: np.ndarray) -> np.ndarray:
    """Leading far field ``-sum M_jk d_j d_k G`` with ``lap G = delta``."""
    N = M.M.shape[0]
    r2 = np.sum(points**2, axis=0)
    omega = 2 * np.pi if N == 2 else 4 * np.pi
    dev = M.deviatoric()
    # the trace part drops out because lap G vanishes away from the origin
    quad = np.einsum("jk,jp,kp->p", dev, points, points)
    return N * quad / (omega * r2 ** (N / 2 + 1))


@dataclass(frozen=True)
class FarField:
    exponent: float
    pattern_correlation: float | None
    shell_radii: tuple = ()
    shell_means: tuple = ()


def farfield_analysis(p: ScalarField, M: MomentumTensor, shells: int = 8) -> FarField:
    """Radial decay exponent of shell-averaged ``|p|`` and agreement of the
    outermost resolved shell with the momentum-tensor prediction."""
    if not np.any(p.values):
        raise Undetermined("zero pressure has no far field")
    split = harmonic_split(p)
    radii = split.r_in * (split.r_out / split.r_in) ** (np.arange(shells) / (shells - 1))
    floor = 1e-10 * np.max(np.abs(p.values))
    means = []
    for r in radii:
        _, w, vals = _shell_values(split, r)
        means.append(np.sum(w * np.abs(vals)) / np.sum(w))
    means = np.array(means)
    ok = means > floor
    if ok.sum() >= 2:
        exponent = float(np.polyfit(np.log(radii[ok]), np.log(means[ok]), 1)[0])
    else:
        exponent = float("-inf")
    correlation = None
    dev = np.linalg.norm(M.deviatoric())
    if dev > 1e-9 * max(M.trace, 1e-300) and ok.any():
        r_last = radii[ok][-1]
        dirs, w, measured = _shell_values(split, r_last)
        predicted = tensor_pattern(M, r_last * dirs)
        num = np.sum(w * measured * predicted)
        den = np.sqrt(np.sum(w * measured**2) * np.sum(w * predicted**2))
        correlation = float(num / den)
    return FarField(exponent, correlation, tuple(radii), tuple(means))
