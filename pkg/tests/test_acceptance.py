"""Acceptance criteria, one test each, at the stated tolerances.

Each test appends a PASS/FAIL line that is echoed in the terminal summary.
"""

import warnings

import numpy as np
import pytest

from liouville.cli import main
from liouville.config import RunConfig
from liouville.evolution import SimulationConfig, initial_state, run_simulation, self_convergence
from liouville.generators import GeneratorSpec, gen_divfree, octupole_stream
from liouville.grid import ScalarField, VectorField, make_grid
from liouville.identity import classify_state, hardy_norm_estimate, is_falsification
from liouville.mhd import MHDState, mhd_classify, mhd_pressure, pv_sum_rule
from liouville.riesz import (
    compute_pressure,
    directional_pressure_limit,
    farfield_analysis,
    l1_diagnostic,
    momentum_tensor,
)
from liouville.weakform import gradient_orthogonality, r_scan, support_radius

from conftest import ACCEPTANCE_LINES, M_DIPOLE, M_RADIAL

PI = np.pi


def record(number, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def random_field(seed, grid, width=0.8, **kw):
    return gen_divfree(GeneratorSpec("random_divfree", width=width, seed=seed, **kw), grid)


@pytest.fixture(scope="module")
def sweep(grid):
    """200 random fields, quarter-turn symmetric for odd seeds."""
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for seed in range(200):
            v = random_field(seed, grid, symmetry="c4" if seed % 2 else "none")
            out.append((seed, v, classify_state(v), momentum_tensor(v).trace))
    return out


def test_criterion_01_moment_anchors(radial, dipole):
    M_r, M_d = momentum_tensor(radial).M, momentum_tensor(dipole).M
    errs = [
        abs(M_r[0, 0] - M_RADIAL) / M_RADIAL,
        abs(M_r[1, 1] - M_RADIAL) / M_RADIAL,
        abs(M_d[0, 0] - M_DIPOLE[0]) / M_DIPOLE[0],
        abs(M_d[1, 1] - M_DIPOLE[1]) / M_DIPOLE[1],
        abs(M_r[0, 1]) / (2 * M_RADIAL),
        abs(M_d[0, 1]) / sum(M_DIPOLE),
    ]
    record(1, "moment anchors", max(errs) <= 1e-8, f"max relative error {max(errs):.2e} (tol 1e-8)")


def test_criterion_02_directional_limits(radial, dipole):
    rng = np.random.default_rng(2)
    dirs = rng.normal(size=(8, 2))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs = np.vstack([np.eye(2), dirs])
    worst = 0.0
    for v in (radial, dipole):
        M = momentum_tensor(v)
        for e in dirs:
            worst = max(worst, abs(directional_pressure_limit(v, e) + M.quadratic_form(e)))
    a = directional_pressure_limit(dipole, [1.0, 0.0])
    b = directional_pressure_limit(dipole, [0.0, 1.0])
    axes_ok = abs(a + PI / 8) <= 1e-4 and abs(b + 3 * PI / 8) <= 1e-4
    record(2, "directional limit", worst <= 1e-4 and axes_ok, f"max |lim + e.Me| {worst:.2e} (tol 1e-4); dipole axes {a:.6f}, {b:.6f}")


def test_criterion_03_equipartition_when_integrable(sweep):
    integrable = [(s, vd, tr) for s, _, vd, tr in sweep if vd.l1_class == "integrable"]
    eq = max(vd.equipartition_defect / tr for _, vd, tr in integrable)
    cross = max(vd.cross_defect / tr for _, vd, tr in integrable)
    ok = bool(integrable) and eq <= 1e-3 and cross <= 1e-6
    record(3, "equipartition", ok, f"{len(integrable)} integrable fields; max equipartition {eq:.2e} (1e-3), cross {cross:.2e} (1e-6) relative to trM")


def test_criterion_04_falsification_guard(sweep):
    hits = [s for s, v, vd, _ in sweep if is_falsification(vd, v)]
    undetermined = sum(vd.l1_class == "undetermined" for _, _, vd, _ in sweep)
    classes = {c: sum(vd.l1_class == c for _, _, vd, _ in sweep) for c in ("integrable", "log_divergent")}
    record(4, "falsification guard", not hits and not undetermined, f"{len(sweep)} seeds, {len(hits)} occurrences, classes {classes}")


def test_criterion_05_ledger_exactness(radial, dipole, octupole, grid):
    fields = [radial, dipole, octupole] + [random_field(s, grid) for s in range(20)]
    cfg = RunConfig()
    worst = worst_orth = 0.0
    for v in fields:
        radii = cfg.radii(support_radius(v))
        tr = momentum_tensor(v).trace
        for case in (("diag", 0), ("diag", 1), ("offdiag", 0, 1)):
            worst = max(worst, float(np.max(np.abs(r_scan(v, case, radii).totals))) / tr)
        for R in radii:
            worst_orth = max(worst_orth, *map(abs, gradient_orthogonality(v, 0, 1, R)))
    ok = worst <= 1e-8 and worst_orth <= 1e-10
    record(5, "ledger exactness", ok, f"{len(fields)} fields; max |sum|/trM {worst:.2e} (1e-8), orthogonality {worst_orth:.2e} (1e-10)")


def test_criterion_06_ledger_limits(radial, dipole, grid):
    worst = 0.0
    for v in (radial, dipole, random_field(4, grid)):
        M = momentum_tensor(v).M
        radii = RunConfig().radii(support_radius(v))
        for j in range(2):
            worst = max(worst, float(np.max(np.abs(r_scan(v, ("diag", j), radii).terms[:, 0] - M[j, j]))))
        worst = max(worst, float(np.max(np.abs(r_scan(v, ("offdiag", 0, 1), radii).terms[:, 0] - 2 * M[0, 1]))))
    table = r_scan(dipole, ("diag", 0), RunConfig().radii(support_radius(dipole)))
    residue, pint = float(table.cutoff_residue[-1]), float(table.terms[-1, 1])
    ok = worst <= 1e-6 and abs(residue - PI / 8) <= 1e-3 and abs(pint + PI / 4) <= 1e-3
    record(6, "ledger limits", ok, f"max |I1 - Mjj|, |J1 - 2Mjk| {worst:.2e} (1e-6); residue {residue:.6f} vs pi/8, int p sigma {pint:.6f} vs -pi/4")


def test_criterion_07_l1_dichotomy(radial, dipole, octupole):
    cls_r = l1_diagnostic(compute_pressure(radial)).classification
    cls_d = l1_diagnostic(compute_pressure(dipole)).classification
    ff_r = farfield_analysis(compute_pressure(radial), momentum_tensor(radial))
    ff_o = farfield_analysis(compute_pressure(octupole), momentum_tensor(octupole))
    ff_d = farfield_analysis(compute_pressure(dipole), momentum_tensor(dipole))
    ok = (
        cls_r == "integrable" and ff_r.exponent <= -3 and ff_o.exponent <= -3
        and cls_d == "log_divergent" and abs(ff_d.exponent + 2) <= 0.1 and ff_d.pattern_correlation >= 0.99
    )
    record(7, "L1 dichotomy", ok, f"radial {cls_r} exponent {ff_r.exponent}, octupole {ff_o.exponent:.2f}; dipole {cls_d} exponent {ff_d.exponent:.4f} correlation {ff_d.pattern_correlation:.6f}")


def test_criterion_08_evolution(grid):
    cfg = SimulationConfig(grid, octupole_stream(), nu=0.01, dt=0.01, T=2.0, snapshots=10)
    series = run_simulation(cfg)
    eq = cross = 0.0
    ok_class = True
    for r in series.records:
        tr = r.M[0][0] + r.M[1][1]
        ok_class &= r.l1_class == "integrable"
        eq, cross = max(eq, r.equipartition_defect / tr), max(cross, r.cross_defect / tr)
    law = series.energy_law_residual / series.energy0
    order, _ = self_convergence(initial_state(octupole_stream(), grid, 0.01))
    ok = ok_class and series.valid and len(series.records) == 10 and eq <= 1e-3 and cross <= 1e-6 and law <= 1e-4 and order >= 3.8
    record(8, "evolution persistence", ok, f"equipartition {eq:.2e}, cross {cross:.2e}, energy law {law:.2e} (1e-4), RK4 order {order:.3f} (3.8)")


def test_criterion_09_mhd(radial, dipole, grid):
    zero = VectorField(grid, np.zeros((2, *grid.shape)))
    iso = mhd_classify(MHDState(zero, radial))
    aniso = mhd_classify(MHDState(zero, dipole))
    gap = abs(aniso.component_residuals[1] - aniso.component_residuals[0])
    ok_static = (
        iso.b_equipartition_defect <= 1e-6 and abs(iso.pressure_integral) <= 1e-3
        and aniso.l1_class == "log_divergent" and abs(gap - (3 * PI / 8 - PI / 8)) <= 1e-3
    )
    worst = 0.0
    for seed in range(50):
        state = MHDState(random_field(2 * seed, grid, width=1.0), random_field(2 * seed + 1, grid, width=1.0))
        worst = max(worst, abs(l1_diagnostic(mhd_pressure(state)).pv_estimate - pv_sum_rule(state)))
    g3 = make_grid(3, 64, 12.0)
    s3 = MHDState(random_field(5, g3, degree=2), random_field(6, g3, degree=2))
    v3 = mhd_classify(s3)
    res3 = abs(v3.pressure_integral - pv_sum_rule(s3))
    ok = ok_static and worst <= 1e-3 and res3 <= 1e-3
    record(9, "MHD identities", ok, f"radial b defect {iso.b_equipartition_defect:.1e}, PV {iso.pressure_integral:.1e}; anisotropic gap {gap:.6f}; 2D sweep {worst:.1e}; 3D sum rule {res3:.1e} (1e-3)")


def test_criterion_10_hardy(grid):
    x1 = grid.coords[0]
    g = np.exp(-(grid.radius**2))
    stable = hardy_norm_estimate(ScalarField(grid, -2 * x1 * g))
    grows = hardy_norm_estimate(ScalarField(grid, g))
    ok = not stable.growing and abs(stable.mean) <= 1e-10 and grows.growing and abs(grows.mean - PI) <= 1e-10
    record(10, "Hardy diagnostic", ok, f"derivative: slope {stable.slope:.3f}, mean {stable.mean:.1e}; Gaussian: slope {grows.slope:.3f}, mean {grows.mean:.12f}")


# (output subdirectory, argv); report re-renders the scan directory
RUNS = [
    ("field", ["gen-field"]),
    ("pressure", ["pressure", "--set", "terms=1:1,0", "--set", "plots=true"]),
    ("verify", ["verify", "--set", "kind=random_divfree", "--set", "width=0.8", "--set", "symmetry=c4", "--set", "seed=3"]),
    ("scan", ["scan", "--set", "terms=1:1,0"]),
    ("evolve", ["evolve", "--set", "terms=1:3,1;-1:1,3", "--set", "T=0.4", "--set", "snapshots=4", "--set", "plots=true", "--set", "dump_snapshots=true"]),
    ("mhd", ["mhd-verify", "--set", "kind=random_divfree", "--set", "b_kind=random_divfree", "--set", "seed=7", "--set", "b_seed=8"]),
    ("scan", ["report"]),
]


def test_criterion_11_reproducibility(tmp_path, monkeypatch):
    trees, codes = [], []
    for name in ("first", "second"):
        monkeypatch.chdir(tmp_path)
        for sub, argv in RUNS:
            codes.append(main([*argv, "-o", f"{name}/{sub}"]))
        # the out_dir echo in manifest.json is the only intended difference
        trees.append({
            p.relative_to(tmp_path / name).as_posix(): p.read_bytes().replace(name.encode(), b"RUN")
            for p in sorted((tmp_path / name).rglob("*")) if p.is_file()
        })
    same = trees[0] == trees[1]
    data = [k for k in trees[0] if k.endswith((".csv", ".json"))]
    record(11, "reproducibility", same and not any(codes), f"{len(trees[0])} artifacts ({len(data)} CSV/JSON) byte-identical: {same}; exit codes {sorted(set(codes))}")
