"""Term-by-term ledgers of the localized weak form.

With a gradient test field ``phi = grad psi`` the time-derivative and viscous
terms drop out and the weak form reduces to the static identity::

    sum_ab int W_ab d_a d_b psi  +  int q lap psi  =  0,

for ``W = v (x) v`` and ``q = p``.  For ``psi = x_j^2/2 sigma_R`` the
left side splits into ``I1..I6``; for ``psi = x_j x_k sigma_R`` into
``J1..J8``.  The grouping follows exact second derivatives of ``psi``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .cutoff import CutoffFamily
from .grid import Grid, ScalarField, VectorField, derivative
from .riesz import compute_pressure, free_space_pressure, momentum_tensor, stress_tensor

MAX_SUPPORT_FRACTION = 0.45


def check_radius(R: float, grid: Grid) -> None:
    if not R > 0:
        raise ValueError("R must be positive")
    if 2 * R > MAX_SUPPORT_FRACTION * grid.L * (1 + 1e-12):
        raise ValueError(f"cutoff support 2R = {2 * R} exceeds {MAX_SUPPORT_FRACTION} L")


@dataclass(frozen=True, eq=False)
class QuadraticTest:
    """``psi = P sigma_R`` for ``P = x_j^2/2`` (``k is None``) or ``P = x_j x_k``."""

    cut: CutoffFamily
    j: int
    k: int | None = None

    @property
    def grid(self) -> Grid:
        return self.cut.grid

    def _P(self):
        x = self.grid.coords
        return 0.5 * x[self.j] ** 2 if self.k is None else x[self.j] * x[self.k]

    def _dP(self, a):
        x = self.grid.coords
        if self.k is None:
            return x[self.j] if a == self.j else 0.0
        return (x[self.k] if a == self.j else 0.0) + (x[self.j] if a == self.k else 0.0)

    def _ddP(self, a, b):
        if self.k is None:
            return 1.0 if a == b == self.j else 0.0
        return float((a, b) in ((self.j, self.k), (self.k, self.j)))

    @property
    def psi(self) -> np.ndarray:
        return self._P() * self.cut.values

    def gradient(self) -> np.ndarray:
        c = self.cut
        return np.stack([self._dP(a) * c.values + self._P() * c.gradient[a] for a in range(self.grid.dims)])

    def hessian(self, a, b) -> np.ndarray:
        c = self.cut
        return (
            self._ddP(a, b) * c.values
            + self._dP(a) * c.gradient[b]
            + self._dP(b) * c.gradient[a]
            + self._P() * c.hessian[a, b]
        )

    def laplacian(self) -> np.ndarray:
        return sum(self.hessian(a, a) for a in range(self.grid.dims))

    def grad_laplacian(self) -> np.ndarray:
        c, N = self.cut, self.grid.dims
        lapP = sum(self._ddP(a, a) for a in range(N))
        out = []
        for e in range(N):
            term = lapP * c.gradient[e] + self._dP(e) * c.laplacian + self._P() * c.grad_laplacian[e]
            for a in range(N):
                term = term + 2 * (self._ddP(e, a) * c.gradient[a] + self._dP(a) * c.hessian[e, a])
            out.append(term)
        return np.stack(out)


def test_function_diag(j: int, R: float, grid: Grid) -> tuple[ScalarField, VectorField]:
    """``psi = x_j^2/2 sigma_R`` and its exact gradient (axes are 0-based)."""
    check_radius(R, grid)
    t = QuadraticTest(CutoffFamily(R, grid), j)
    return ScalarField(grid, t.psi), VectorField(grid, t.gradient())


def test_function_offdiag(j: int, k: int, R: float, grid: Grid) -> tuple[ScalarField, VectorField]:
    if j == k:
        raise ValueError("off-diagonal test function needs j != k")
    check_radius(R, grid)
    t = QuadraticTest(CutoffFamily(R, grid), j, k)
    return ScalarField(grid, t.psi), VectorField(grid, t.gradient())


def _int(grid, arr):
    return float(np.sum(arr) * grid.cell_volume)


def diag_terms(W: np.ndarray, q: np.ndarray, j: int, cut: CutoffFamily) -> np.ndarray:
    """``I1..I6`` for stress ``W`` and scalar ``q`` (pressure, or total pressure in MHD)."""
    g = cut.grid
    N = g.dims
    x = g.coords
    s, ds, dds, lap = cut.values, cut.gradient, cut.hessian, cut.laplacian
    xj = x[j]
    others = [a for a in range(N) if a != j]
    I1 = _int(g, W[j, j] * s)
    I2 = _int(g, q * s)
    I3 = _int(g, W[j, j] * (2 * xj * ds[j] + 0.5 * xj**2 * dds[j, j]))
    I4 = 2 * sum(_int(g, W[j, a] * (xj * ds[a] + 0.5 * xj**2 * dds[j, a])) for a in others)
    I5 = sum(_int(g, W[a, b] * 0.5 * xj**2 * dds[a, b]) for a in others for b in others)
    I6 = _int(g, q * (2 * xj * ds[j] + 0.5 * xj**2 * lap))
    return np.array([I1, I2, I3, I4, I5, I6])


def offdiag_terms(W: np.ndarray, q: np.ndarray, j: int, k: int, cut: CutoffFamily) -> np.ndarray:
    """``J1..J8`` for ``psi = x_j x_k sigma_R``."""
    g = cut.grid
    N = g.dims
    x = g.coords
    s, ds, dds, lap = cut.values, cut.gradient, cut.hessian, cut.laplacian
    xj, xk = x[j], x[k]
    rest = [m for m in range(N) if m not in (j, k)]
    J1 = 2 * _int(g, W[j, k] * s)
    J2 = _int(g, W[j, j] * (2 * xk * ds[j] + xj * xk * dds[j, j]))
    J3 = _int(g, W[k, k] * (2 * xj * ds[k] + xj * xk * dds[k, k]))
    J4 = _int(g, W[j, k] * (2 * xj * ds[j] + 2 * xk * ds[k] + 2 * xj * xk * dds[j, k]))
    J5 = 2 * sum(_int(g, W[j, m] * (xk * ds[m] + xj * xk * dds[j, m])) for m in rest)
    J6 = 2 * sum(_int(g, W[k, m] * (xj * ds[m] + xj * xk * dds[k, m])) for m in rest)
    J7 = sum(_int(g, W[a, b] * xj * xk * dds[a, b]) for a in rest for b in rest)
    J8 = _int(g, q * (2 * xk * ds[j] + 2 * xj * ds[k] + xj * xk * lap))
    return np.array([J1, J2, J3, J4, J5, J6, J7, J8])


def weakform_terms_diag(v: VectorField, p: ScalarField, j: int, R: float) -> np.ndarray:
    """``[I1, ..., I6]``; they sum to zero for the Riesz pressure of ``v``."""
    check_radius(R, v.grid)
    return diag_terms(stress_tensor(v), p.values, j, CutoffFamily(R, v.grid))


def weakform_terms_offdiag(v: VectorField, p: ScalarField, j: int, k: int, R: float) -> np.ndarray:
    """``[J1, ..., J8]``; ``J1 -> 2 int v^j v^k`` when the cutoff terms vanish."""
    if j == k:
        raise ValueError("off-diagonal ledger needs j != k")
    check_radius(R, v.grid)
    return offdiag_terms(stress_tensor(v), p.values, j, k, CutoffFamily(R, v.grid))


def gradient_orthogonality(v: VectorField, j: int, k: int | None, R: float) -> tuple[float, float]:
    """``int v . grad psi`` and ``int v . grad(lap psi)``; both vanish for div-free ``v``."""
    check_radius(R, v.grid)
    t = QuadraticTest(CutoffFamily(R, v.grid), j, k)
    g = v.grid
    return (
        _int(g, np.sum(v.components * t.gradient(), axis=0)),
        _int(g, np.sum(v.components * t.grad_laplacian(), axis=0)),
    )


def annulus_energy(v: VectorField, R: float) -> float:
    """``int_{R<|x|<2R} |v|^2``."""
    r = v.grid.radius
    mask = (r > R) & (r < 2 * R)
    return _int(v.grid, np.sum(v.components**2, axis=0) * mask)


def support_radius(v: VectorField, tail: float = 1e-3) -> float:
    """Smallest radius outside which at most ``tail`` of ``int |v|^2`` lies."""
    g = v.grid
    e = np.sum(v.components**2, axis=0).ravel()
    total = e.sum()
    if total == 0:
        return 0.0
    r = g.radius.ravel()
    order = np.argsort(r)
    outside = total - np.cumsum(e[order])
    idx = np.searchsorted(-outside, -tail * total)
    return float(r[order][min(idx, r.size - 1)])


def _flag(values: np.ndarray, scale: float) -> str:
    """``decays`` / ``plateau`` / ``mixed`` for a sequence of cutoff terms."""
    a = np.abs(values)
    if a.size == 0:
        return "mixed"
    floor = 1e-9 * scale
    if a[-1] <= floor or (a.size > 1 and np.all(np.diff(a) <= 0) and a[-1] * 1.5 <= a[0]):
        return "decays"
    tail = a[-3:]
    if np.all(tail > floor) and np.all(np.abs(tail / tail.mean() - 1) <= 0.2):
        return "plateau"
    return "mixed"


@dataclass
class ScanTable:
    case: tuple
    radii: np.ndarray
    terms: np.ndarray
    labels: tuple
    flags: dict = field(default_factory=dict)
    I2_limit: float | None = None

    @property
    def totals(self) -> np.ndarray:
        return self.terms.sum(axis=1)

    @property
    def cutoff_residue(self) -> np.ndarray:
        """Sum of the terms that carry cutoff derivatives."""
        return self.terms[:, 2:].sum(axis=1) if self.case[0] == "diag" else self.terms[:, 1:].sum(axis=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["R", *self.labels, "cutoff_sum", "total"])
        for R, row, cres, tot in zip(self.radii, self.terms, self.cutoff_residue, self.totals):
            w.writerow([f"{x:.17e}" for x in (R, *row, cres, tot)])
        return buf.getvalue()


def case_label(case) -> str:
    return f"diag({case[1] + 1})" if case[0] == "diag" else f"offdiag({case[1] + 1},{case[2] + 1})"


def r_scan(v: VectorField, case, R_list, p: ScalarField | None = None) -> ScanTable:
    """Ledger terms for each ``R`` in ``R_list``.

    ``case`` is ``("diag", j)`` or ``("offdiag", j, k)`` with 0-based axes.
    Without ``p`` the whole-space pressure of ``v`` is used.
    """
    R_list = np.asarray(list(R_list), dtype=float)
    if R_list.size == 0 or np.any(np.diff(R_list) <= 0):
        raise ValueError("R_list must be nonempty and increasing")
    check_radius(R_list[-1], v.grid)
    if p is None:
        p = free_space_pressure(compute_pressure(v))
    W = stress_tensor(v)
    rows = []
    for R in R_list:
        cut = CutoffFamily(R, v.grid)
        if case[0] == "diag":
            rows.append(diag_terms(W, p.values, case[1], cut))
        else:
            rows.append(offdiag_terms(W, p.values, case[1], case[2], cut))
    terms = np.array(rows)
    prefix = "I" if case[0] == "diag" else "J"
    labels = tuple(f"{prefix}{m + 1}" for m in range(terms.shape[1]))
    scale = max(momentum_tensor(v).trace, 1e-300)
    first_cutoff = 2 if case[0] == "diag" else 1
    flags = {labels[m]: _flag(terms[:, m], scale) for m in range(first_cutoff, terms.shape[1])}
    I2_limit = float(terms[-1, 1]) if case[0] == "diag" else None
    return ScanTable(tuple(case), R_list, terms, labels, flags, I2_limit)


def derivative_check(psi: ScalarField, grad: VectorField) -> float:
    """Max difference between the exact gradient and the spectral one."""
    spectral = np.stack([derivative(psi, a).values for a in range(psi.grid.dims)])
    return float(np.max(np.abs(spectral - grad.components)))
