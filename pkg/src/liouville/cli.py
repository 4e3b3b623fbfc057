"""Command-line driver.

Exit codes: 0 all checks pass, 1 falsification or tolerance failure,
2 invalid configuration or violated precondition, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import matplotlib
import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .evolution import CFLViolation, SimulationConfig, initial_state, max_stable_dt, run_simulation, self_convergence
from .generators import gen_divfree
from .grid import VectorField, divergence, write_lvf1
from .identity import FALSIFICATION_EPS, classify_state, is_falsification
from .mhd import MHDState, mhd_classify, pv_sum_rule
from .report import dumps, plot_scan, plot_series, plot_shells, read_csv, render_directory, table_csv, write_text
from .riesz import (
    Undetermined,
    compute_pressure,
    directional_pressure_limit,
    farfield_analysis,
    l1_diagnostic,
    momentum_tensor,
)
from .weakform import case_label, gradient_orthogonality, r_scan, support_radius

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

COMMANDS = {
    "gen-field": "generate the velocity field and write it as LVF1",
    "pressure": "Riesz pressure, L1 class, far field and directional limits",
    "verify": "evaluate the Liouville/equipartition verdict",
    "scan": "cutoff ledger over a list of radii",
    "evolve": "2D Navier-Stokes run with per-snapshot diagnostics",
    "mhd-verify": "static MHD identities for (v, b)",
    "report": "render SVG figures from CSV files in out_dir",
}


def _check(value, tol, ok=None) -> dict:
    value = float(value)
    return {"value": value, "tolerance": float(tol), "pass": bool(value <= tol if ok is None else ok)}


class Run:
    def __init__(self, cfg: RunConfig, overrides: dict, command: str):
        self.cfg = cfg
        self.overrides = overrides
        self.command = command
        self.out = Path(cfg.out_dir)
        self.artifacts: list[str] = []

    def write(self, name: str, text: str) -> None:
        write_text(self.out / name, text)
        self.artifacts.append(name)

    def velocity(self) -> VectorField:
        try:
            return gen_divfree(self.cfg.generator(), self.cfg.grid)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def magnetic(self) -> VectorField:
        g = self.cfg.grid
        if self.cfg.b_kind == "none":
            return VectorField(g, np.zeros((g.dims, *g.shape)))
        try:
            return gen_divfree(self.cfg.generator("b_"), g)
        except ValueError as exc:
            raise ConfigError(f"b: {exc}") from exc

    def finish(self, verdict: dict) -> int:
        checks = verdict.get("checks", {})
        passed = all(c["pass"] for c in checks.values())
        verdict["passed"] = passed
        self.write("verdict.json", dumps(verdict))
        self.manifest()
        return EXIT_OK if passed else EXIT_FAIL

    def manifest(self) -> None:
        cfg = self.cfg
        doc = {
            "command": self.command,
            "version": __version__,
            "dependencies": {"numpy": np.__version__, "scipy": scipy.__version__, "matplotlib": matplotlib.__version__},
            "seed": cfg.seed,
            "config": cfg.to_dict(),
            "overrides": self.overrides,
            "tolerances": cfg.tolerances(),
            "artifacts": sorted(self.artifacts + ["manifest.json"]),
        }
        write_text(self.out / "manifest.json", dumps(doc))


def cmd_gen_field(run: Run) -> int:
    v = run.velocity()
    write_lvf1(run.out / "field.lvf1", v.grid, v.components)
    run.artifacts.append("field.lvf1")
    scale = max(v.max_abs() * np.pi / v.grid.h, 1e-300)
    return run.finish({
        "l2_norm": v.l2_norm(),
        "max_abs": v.max_abs(),
        "checks": {"divergence": _check(divergence(v).max_abs() / scale, 1e-12)},
    })


def cmd_pressure(run: Run) -> int:
    cfg = run.cfg
    v = run.velocity()
    p = compute_pressure(v)
    write_lvf1(run.out / "pressure.lvf1", p.grid, p.values)
    run.artifacts.append("pressure.lvf1")
    M = momentum_tensor(v)
    report = l1_diagnostic(p)
    out = {
        "momentum_tensor": M.M.tolist(),
        "l1": {
            "classification": report.classification,
            "pv_estimate": report.pv_estimate,
            "log_slope": report.log_slope,
            "fit_rms": report.fit_rms,
            "annular_sums": list(report.annular_sums),
            "radii": list(report.radii),
        },
    }
    checks = {}
    scale = max(M.trace, 1e-300)
    if report.classification != "undetermined":
        checks["pv_trace"] = _check(abs(report.pv_estimate + M.trace / cfg.N) / scale, cfg.tol_pv)
    limits = []
    for j in range(cfg.N):
        e = np.eye(cfg.N)[j]
        try:
            lim = directional_pressure_limit(v, e)
        except Undetermined:
            lim = float("nan")
        limits.append(lim)
        checks[f"directional_{j + 1}"] = _check(abs(lim + M.quadratic_form(e)), cfg.tol_directional, np.isfinite(lim) and abs(lim + M.quadratic_form(e)) <= cfg.tol_directional)
    out["directional_limits"] = limits
    if np.any(p.values) and report.classification != "undetermined":
        ff = farfield_analysis(p, M)
        out["farfield"] = {"exponent": ff.exponent, "pattern_correlation": ff.pattern_correlation}
        run.write("shells.csv", table_csv(["r", "mean_abs_p"], zip(map(float, ff.shell_radii), map(float, ff.shell_means))))
        if cfg.plots:
            plot_shells(ff.shell_radii, ff.shell_means, run.out / "shells.svg", ff.exponent)
            run.artifacts.append("shells.svg")
    else:
        checks["determined"] = _check(1.0, 0.0, report.classification != "undetermined")
    out["checks"] = checks
    return run.finish(out)


def _verdict_checks(cfg, verdict, v, trace) -> dict:
    checks = {"falsification": _check(float(is_falsification(verdict, v)), 0.0)}
    if verdict.l1_class == "integrable":
        scale = max(trace, 1e-300)
        checks["equipartition"] = _check(verdict.equipartition_defect / scale, cfg.tol_equipartition)
        checks["cross"] = _check(verdict.cross_defect / scale, cfg.tol_cross)
    return checks


def cmd_verify(run: Run) -> int:
    v = run.velocity()
    try:
        verdict = classify_state(v)
    except Undetermined as exc:
        return run.finish({"l1_class": "undetermined", "reason": str(exc), "checks": {"determined": _check(1.0, 0.0, False)}})
    out = verdict.to_dict()
    out["checks"] = _verdict_checks(run.cfg, verdict, v, momentum_tensor(v).trace)
    return run.finish(out)


def cmd_scan(run: Run) -> int:
    cfg = run.cfg
    v = run.velocity()
    case = cfg.case()
    rs = support_radius(v)
    radii = cfg.radii(rs)
    try:
        table = r_scan(v, case, radii)
    except Undetermined as exc:
        return run.finish({"case": case_label(case), "reason": str(exc), "checks": {"determined": _check(1.0, 0.0, False)}})
    run.write("scan.csv", table.to_csv())
    if cfg.plots:
        header, rows = read_csv(run.out / "scan.csv")
        plot_scan(header, rows, run.out / "scan.svg")
        run.artifacts.append("scan.svg")
    trace = max(momentum_tensor(v).trace, 1e-300)
    k = case[2] if case[0] == "offdiag" else None
    ortho = gradient_orthogonality(v, case[1], k, radii[-1])
    out = {
        "case": case_label(case),
        "support_radius": rs,
        "radii": list(table.radii),
        "flags": table.flags,
        "final_terms": dict(zip(table.labels, table.terms[-1].tolist())),
        "cutoff_residue": float(table.cutoff_residue[-1]),
        "I2_limit": table.I2_limit,
        "checks": {
            "ledger": _check(float(np.max(np.abs(table.totals))) / trace, cfg.tol_ledger),
            "orthogonality": _check(max(abs(x) for x in ortho), cfg.tol_orthogonality),
        },
    }
    return run.finish(out)


def cmd_evolve(run: Run) -> int:
    cfg = run.cfg
    if cfg.N != 2:
        raise ConfigError("evolve: N must be 2")
    spec = cfg.generator()
    state = initial_state(spec, cfg.grid, cfg.nu)
    limit = max_stable_dt(state)
    if cfg.dt > limit:
        raise CFLViolation(f"dt = {cfg.dt} exceeds CFL limit {limit:.4g}")
    sim = SimulationConfig(cfg.grid, spec, cfg.nu, cfg.dt, cfg.T, cfg.snapshots)

    def dump(i, snap):
        if cfg.dump_snapshots:
            name = f"snapshot_{i:03d}.lvf1"
            write_lvf1(run.out / name, snap.grid, snap.omega.values)
            run.artifacts.append(name)

    series = run_simulation(sim, state, dump)
    run.write("series.csv", series.to_csv())
    if cfg.plots:
        header, rows = read_csv(run.out / "series.csv")
        plot_series(header, rows, run.out / "series.svg")
        run.artifacts.append("series.svg")
    checks = {
        "energy_law": _check(series.energy_law_residual / max(series.energy0, 1e-300), cfg.tol_energy_law),
        "support": _check(float(not series.valid), 0.0),
    }
    worst_eq = worst_cross = 0.0
    bad = 0
    for r in series.records:
        trace = max(sum(r.M[j][j] for j in range(2)), 1e-300)
        if r.l1_class == "integrable":
            worst_eq = max(worst_eq, r.equipartition_defect / trace)
            worst_cross = max(worst_cross, r.cross_defect / trace)
            bad += r.pv_estimate >= FALSIFICATION_EPS and 2 * r.energy > FALSIFICATION_EPS**2
    checks["equipartition"] = _check(worst_eq, cfg.tol_equipartition)
    checks["cross"] = _check(worst_cross, cfg.tol_cross)
    checks["falsification"] = _check(float(bad), 0.0)
    checks["determined"] = _check(float(sum(r.l1_class == "undetermined" for r in series.records)), 0.0)
    out = {
        "snapshots": len(series.records),
        "energy0": series.energy0,
        "energy_law_residual": series.energy_law_residual,
        "l1_classes": [r.l1_class for r in series.records],
        "cases": [r.case for r in series.records],
    }
    if cfg.convergence_check and series.energy0 > 0:
        order, diffs = self_convergence(state)
        out["convergence_order"] = order
        out["convergence_diffs"] = diffs
        checks["convergence_order"] = _check(order, cfg.tol_order, order >= cfg.tol_order)
    out["checks"] = checks
    return run.finish(out)


def cmd_mhd(run: Run) -> int:
    cfg = run.cfg
    state = MHDState(run.velocity(), run.magnetic())
    try:
        verdict = mhd_classify(state)
    except Undetermined as exc:
        return run.finish({"l1_class": "undetermined", "reason": str(exc), "checks": {"determined": _check(1.0, 0.0, False)}})
    out = verdict.to_dict()
    predicted = pv_sum_rule(state)
    out["pv_sum_rule_prediction"] = predicted
    out["checks"] = {
        "falsification": _check(float(verdict.falsification), 0.0),
        "pv_sum_rule": _check(abs(verdict.pressure_integral - predicted), cfg.tol_pv),
        "sum_identity": _check(abs(verdict.sum_identity_residual), cfg.N * cfg.tol_pv),
    }
    return run.finish(out)


def cmd_report(run: Run) -> int:
    made = render_directory(run.out)
    if not made:
        print(f"error: no scan.csv, series.csv or shells.csv in {run.out}", file=sys.stderr)
        return EXIT_IO
    run.artifacts.extend(p.name for p in made)
    run.manifest()
    return EXIT_OK


HANDLERS = {
    "gen-field": cmd_gen_field,
    "pressure": cmd_pressure,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "evolve": cmd_evolve,
    "mhd-verify": cmd_mhd,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="flat key=value config file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    common.add_argument("-o", "--out-dir", help="shorthand for --set out_dir=DIR")
    parser = argparse.ArgumentParser(prog="liouville", description="Pressure-sign Liouville checks for incompressible flows.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def run_pipeline(command: str, cfg: RunConfig, overrides: dict | None = None) -> int:
    run = Run(cfg, overrides or {}, command)
    try:
        run.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {run.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return HANDLERS[command](run)
    except (ConfigError, CFLViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.out_dir:
        overrides.append(f"out_dir={args.out_dir}")
    try:
        cfg, applied = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_pipeline(args.command, cfg, applied)


if __name__ == "__main__":
    sys.exit(main())
