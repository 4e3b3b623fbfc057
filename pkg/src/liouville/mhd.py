"""Static integral identities for magnetohydrodynamic snapshots.

The total pressure ``P = p + |b|^2/2`` solves the Riesz relation for the
stress ``v (x) v - b (x) b``; everything else mirrors the hydrodynamic
case with that stress and ``P`` in place of ``p``.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .cutoff import CutoffFamily
from .grid import ScalarField, VectorField, divergence
from .identity import FALSIFICATION_EPS
from .riesz import (
    Undetermined,
    free_space_pressure,
    l1_diagnostic,
    momentum_tensor,
    pressure_from_stress,
    pv_integral,
    stress_tensor,
    support_warning,
)
from .weakform import check_radius, diag_terms

log = logging.getLogger(__name__)

DIV_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MHDState:
    v: VectorField
    b: VectorField

    def __post_init__(self):
        if self.v.grid != self.b.grid:
            raise ValueError("v and b must share a grid")
        g = self.v.grid
        for name, f in (("v", self.v), ("b", self.b)):
            # relative to the largest resolvable gradient
            scale = f.max_abs() * np.pi / g.h
            if scale > 0 and divergence(f).max_abs() > DIV_TOL * scale:
                raise ValueError(f"{name} is not divergence-free")

    @property
    def grid(self):
        return self.v.grid

    @property
    def dims(self) -> int:
        return self.v.grid.dims

    def magnetic_energy(self) -> float:
        """``int |b|^2``."""
        return float(np.sum(self.b.components**2) * self.grid.cell_volume)


def mhd_stress(state: MHDState) -> np.ndarray:
    return stress_tensor(state.v) - stress_tensor(state.b)


def total_pressure(state: MHDState) -> ScalarField:
    """Box total pressure ``P = p + |b|^2/2`` (zero mode removed)."""
    support_warning(state.v)
    support_warning(state.b)
    return pressure_from_stress(state.grid, mhd_stress(state))


def mhd_pressure(state: MHDState) -> ScalarField:
    P = total_pressure(state)
    return ScalarField(state.grid, P.values - 0.5 * np.sum(state.b.components**2, axis=0))


def mhd_component_identity(state: MHDState, j: int, R: float | None = None, p: ScalarField | None = None) -> float:
    """Residual of ``int (v^j)^2 - int (b^j)^2 + 1/2 int |b|^2 + int p = 0``.

    Without ``R`` the principal value of ``int p`` is used (the limit form).
    With ``R`` the residual is ``I1 + I2`` of the cutoff ledger on the
    magnetic stress with the whole-space total pressure, i.e. minus the
    cutoff residue at that radius.
    """
    p = mhd_pressure(state) if p is None else p
    if R is None:
        Mv, Mb = momentum_tensor(state.v).M, momentum_tensor(state.b).M
        pv, _ = pv_integral(p)
        return float(Mv[j, j] - Mb[j, j] + 0.5 * state.magnetic_energy() + pv)
    check_radius(R, state.grid)
    bsq = 0.5 * np.sum(state.b.components**2, axis=0)
    P = ScalarField(state.grid, p.values + bsq)
    if np.any(P.values):
        P = free_space_pressure(P)
    terms = diag_terms(mhd_stress(state), P.values, j, CutoffFamily(R, state.grid))
    return float(terms[0] + terms[1])


@dataclass(frozen=True)
class MHDVerdict:
    pressure_integral: float
    sum_identity_residual: float
    component_residuals: tuple
    b_equipartition_defect: float | None
    l1_class: str
    falsification: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["component_residuals"] = list(self.component_residuals)
        return d


def pv_sum_rule(state: MHDState) -> float:
    """Predicted ``PV int p = -(tr M_v - tr M_b)/N - 1/2 int |b|^2``."""
    N = state.dims
    return -(momentum_tensor(state.v).trace - momentum_tensor(state.b).trace) / N - 0.5 * state.magnetic_energy()


def mhd_classify(state: MHDState, eps: float = FALSIFICATION_EPS) -> MHDVerdict:
    N = state.dims
    p = mhd_pressure(state)
    report = l1_diagnostic(p)
    if report.classification == "undetermined":
        raise Undetermined("pressure integrability could not be decided on this box")
    pv = report.pv_estimate
    Mv, Mb = momentum_tensor(state.v), momentum_tensor(state.b)
    bb = state.magnetic_energy()
    comps = tuple(float(Mv.M[j, j] - Mb.M[j, j] + 0.5 * bb + pv) for j in range(N))
    sum_res = float(Mv.trace + 0.5 * (N - 2) * bb + N * pv)
    b_defect = float(abs(Mb.M[0, 0] - Mb.M[1, 1])) if N == 2 else None
    vnorm, bnorm = state.v.l2_norm(), state.b.l2_norm()
    bad = report.classification == "integrable" and pv >= eps
    if N >= 3:
        bad = bad and vnorm + bnorm > eps
    else:
        bad = bad and (vnorm > eps or b_defect > eps)
    if bad:
        log.error("FALSIFICATION: integrable nonnegative MHD pressure with nontrivial state")
    note = ""
    if vnorm <= eps and bnorm > eps:
        note = "v = 0: the induction equation reduces to the heat equation for b (not evolved)"
    return MHDVerdict(pv, sum_res, comps, b_defect, report.classification, bad, note)
