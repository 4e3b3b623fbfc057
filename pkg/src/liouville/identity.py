"""Check a velocity snapshot against the Liouville / equipartition dichotomy.

* integrable pressure with nonnegative integral: the velocity must vanish;
* integrable pressure with negative integral: every component energy equals
  ``-1/2 int p`` and the off-diagonal momentum moments vanish;
* otherwise the pressure is not integrable and nothing is asserted.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .grid import ScalarField, VectorField, integrate
from .riesz import Undetermined, compute_pressure, l1_diagnostic, momentum_tensor

log = logging.getLogger(__name__)

CASES = ("trivial_forced", "equipartition_case", "not_L1")

# "v = 0 a.e." in the discrete setting
ZERO_VELOCITY = 1e-8
FALSIFICATION_EPS = 1e-6


@dataclass(frozen=True)
class ComponentEnergies:
    E: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.E))


def component_energies(v: VectorField) -> ComponentEnergies:
    return ComponentEnergies(momentum_tensor(v).energies)


@dataclass(frozen=True)
class LiouvilleVerdict:
    l1_class: str
    pressure_integral: float
    case: str
    equipartition_defect: float
    cross_defect: float

    def to_dict(self) -> dict:
        return asdict(self)


def classify_state(v: VectorField, p: ScalarField | None = None) -> LiouvilleVerdict:
    """Evaluate both conclusions of the theorem on one snapshot.

    Raises :class:`Undetermined` when the L1 diagnostic cannot decide.
    """
    p = compute_pressure(v) if p is None else p
    report = l1_diagnostic(p)
    if report.classification == "undetermined":
        raise Undetermined("pressure integrability could not be decided on this box")
    M = momentum_tensor(v)
    E = M.energies
    pv = report.pv_estimate
    N = v.grid.dims
    equip = float(np.max(np.abs(E + 0.5 * pv)))
    off = [abs(M.M[j, k]) for j in range(N) for k in range(N) if j != k]
    cross = float(max(off))
    if report.classification == "integrable":
        case = "trivial_forced" if pv >= 0 else "equipartition_case"
    else:
        case = "not_L1"
    verdict = LiouvilleVerdict(report.classification, pv, case, equip, cross)
    if is_falsification(verdict, v):
        log.error("FALSIFICATION: integrable nonnegative pressure with nonzero velocity %s", verdict)
    return verdict


def is_falsification(verdict: LiouvilleVerdict, v: VectorField, eps: float = FALSIFICATION_EPS) -> bool:
    """A state that would contradict the Liouville property."""
    return verdict.l1_class == "integrable" and verdict.pressure_integral >= eps and v.l2_norm() > eps


@dataclass(frozen=True)
class HardyEstimate:
    norm_proxy: float
    slope: float
    mean: float
    proxies: tuple
    scales: tuple

    @property
    def growing(self) -> bool:
        return self.slope >= HARDY_SLOPE


HARDY_SLOPE = 0.05


def dyadic_scales(grid) -> list[float]:
    """``2h, 4h, ...`` up to ``L/4``."""
    out, t = [], 2 * grid.h
    while t <= grid.L / 4 * (1 + 1e-12):
        out.append(t)
        t *= 2
    return out


def hardy_norm_estimate(f: ScalarField, scales=None) -> HardyEstimate:
    """Proxy for the H^1 norm via the Gaussian maximal function.

    The maximal function is the pointwise max of ``|f * phi_t|`` over the
    scale list (unit-mass Gaussian ``phi``).  ``norm_proxy`` integrates it
    with all scales included; ``slope`` is the relative growth of that
    integral over the last doubling of the largest scale.  A stable proxy
    is what H^1 membership looks like on a finite box.
    """
    g = f.grid
    scales = dyadic_scales(g) if scales is None else list(scales)
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    ratios = np.array(scales[1:]) / np.array(scales[:-1])
    if np.any(np.abs(ratios - 2) > 1e-9):
        raise ValueError("scales must be dyadic")
    if scales[0] < 2 * g.h * (1 - 1e-12) or scales[-1] > g.L / 4 * (1 + 1e-12):
        raise ValueError("scales must lie in [2h, L/4]")
    F = np.fft.fftn(f.values)
    maximal = np.abs(f.values)
    proxies = []
    for t in scales:
        smooth = np.fft.ifftn(F * np.exp(-0.5 * t * t * g.k2)).real
        maximal = np.maximum(maximal, np.abs(smooth))
        proxies.append(float(np.sum(maximal) * g.cell_volume))
    top, prev = proxies[-1], proxies[-2]
    slope = (top - prev) / top if top > 0 else 0.0
    return HardyEstimate(top, slope, integrate(f), tuple(proxies), tuple(scales))
