"""Command-line runner: one subcommand per experiment, plus ``verify``.

Every subcommand writes its artifacts under ``--out`` and exits 0 only when
its own checks pass. Module errors exit with status 2 and a diagnostic line.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, dump_config, load_config
from .errors import ConfigError, TransmissionLabError
from .fields import BoundaryField, ScalarField, write_scalar_csv, write_vector_csv
from .geometry import Boundary, Subdomain, build_disk_in_disk_mesh, boundary_integral, write_mesh

INNER, OUTER = Boundary.INNER, Boundary.OUTER
HEART, TORSO = Subdomain.HEART, Subdomain.TORSO


def _json(path: Path, payload: dict) -> None:
    def conv(v):
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
        if isinstance(v, float) and not math.isfinite(v):
            return str(v)
        return v

    path.write_text(json.dumps({k: conv(v) for k, v in payload.items()}, indent=2, sort_keys=True) + "\n")


def _mesh(cfg: ScenarioConfig, h: float | None = None):
    g = cfg.geometry
    return build_disk_in_disk_mesh(g.r_inner, g.r_outer, h or g.h)


def _setup(cfg: ScenarioConfig, mesh=None):
    from .transmission import TransmissionSetup

    return TransmissionSetup(mesh or _mesh(cfg), *cfg.tensors())


def _outer_data(cfg: ScenarioConfig, mesh):
    """f0 = f0_amp cos(theta), f1 = f1_amp cos(theta) on the outer circle."""
    ids = mesh.boundary_vertices(OUTER)
    x, y = mesh.vertices[ids].T
    c = np.cos(np.arctan2(y, x))
    return BoundaryField(cfg.experiment.f0_amp * c, OUTER), BoundaryField(cfg.experiment.f1_amp * c, OUTER)


def _spectral_ub(cfg: ScenarioConfig, setup):
    """Torso field of the mode expansion of the configured outer data (isotropic tensors)."""
    from .spectral import spectral_disk_oracle

    Mi, Me, Mb = cfg.tensors()
    if not (Mi.is_isotropic() and Me.is_isotropic() and Mb.is_isotropic()):
        raise ConfigError("conductivities: the spectral oracle needs isotropic tensors")
    coeffs = cfg.transmission_coefficients()
    vals = 0.0
    for m in cfg.experiment.modes:
        f1 = 0.0 if m == 0 else cfg.experiment.f1_amp
        tr = spectral_disk_oracle(m, coeffs, cfg.experiment.f0_amp, f1, setup.mesh.r_inner, setup.mesh.r_outer,
                                  Mi.m11, Me.m11, Mb.m11)
        vals = vals + tr.on_mesh(setup.mesh).u_b.values
    return ScalarField(vals, TORSO)


# ---------------------------------------------------------------------------
# subcommands


def cmd_mesh(cfg, out: Path) -> bool:
    m = _mesh(cfg)
    write_mesh(m, out / "mesh.txt")
    summary = {"vertices": len(m.vertices), "triangles": len(m.triangles), "h": m.h,
               "heart_vertices": m.sub(HEART).n, "torso_vertices": m.sub(TORSO).n,
               "inner_perimeter": boundary_integral(m, 1.0, INNER), "outer_perimeter": boundary_integral(m, 1.0, OUTER)}
    _json(out / "mesh_summary.json", summary)
    print(f"mesh: {summary['vertices']} vertices, {summary['triangles']} triangles")
    return True


def cmd_neumann_demo(cfg, out: Path) -> bool:
    from .acceptance import manufactured_errors
    from .elliptic import assemble, solve_neumann
    from .errors import IncompatibleData

    m = _mesh(cfg)
    Mi = cfg.tensors()[0]
    try:
        solve_neumann(assemble(m, Mi, HEART), 0.0, 1.0)
        gate = False
    except IncompatibleData as exc:
        gate = True
        print(f"compatibility gate: {exc}")
    h = cfg.geometry.h
    e1, e2 = manufactured_errors(h, Mi), manufactured_errors(h / 2, Mi)
    with open(out / "neumann_demo.csv", "w") as fh:
        fh.write("h,solver,l2_error\n")
        for hh, e in ((h, e1), (h / 2, e2)):
            for k, v in e.items():
                fh.write(f"{hh:.10g},{k},{v:.17g}\n")
    ratios = {k: e1[k] / e2[k] for k in e1}
    for k, r in ratios.items():
        print(f"{k}: error ratio {r:.3f}")
    return gate and min(ratios.values()) >= 3.0


def cmd_cauchy_sweep(cfg, out: Path) -> bool:
    from .cauchy import CauchySolver, cauchy_data_from_solution, trace_recovery_error

    m = _mesh(cfg)
    Mb = cfg.tensors()[2]
    solver = CauchySolver(m, Mb)
    fn = lambda x, y: x
    data = cauchy_data_from_solution(m, fn, lambda x, y: (np.ones_like(x), np.zeros_like(y)), Mb)
    rows = []
    for lam in sorted(cfg.experiment.lambdas, reverse=True):
        sol = solver.solve(data, lam)
        rows.append((lam, sol.misfit, trace_recovery_error(m, sol, fn)))
    with open(out / "cauchy_sweep.csv", "w") as fh:
        fh.write("lambda,misfit,recovery_error\n")
        for r in rows:
            fh.write(",".join(f"{v:.17g}" for v in r) + "\n")
            print(f"lambda={r[0]:.1e} misfit={r[1]:.3e} recovery_error={r[2]:.3e}")
    zero = max(float(np.max(np.abs(solver.solve(data.scaled(0.0), lam).field.values))) for lam in cfg.experiment.lambdas)
    misfits = [r[1] for r in rows]
    monotone = all(a >= b - 1e-14 * max(1.0, a) for a, b in zip(misfits, misfits[1:]))
    return zero == 0.0 and monotone


def cmd_nullspace_demo(cfg, out: Path) -> bool:
    from .transmission import (calibration_residual, existence_condition, make_h20_bump, nullspace_generate,
                               transmission_residuals)

    setup = _setup(cfg)
    coeffs = cfg.transmission_coefficients()
    e = cfg.experiment
    u = make_h20_bump(setup.mesh, e.bump_center, e.bump_radius, e.bump_amplitude)
    t = nullspace_generate(setup, u, e.h0, coeffs)
    res = transmission_residuals(setup, t, coeffs)
    cal = calibration_residual(setup.mesh, t.u_i, t.u_e, coeffs.c0)
    ex = existence_condition(setup, None, None, coeffs)
    for name, fld in (("u_i", t.u_i), ("u_e", t.u_e), ("u_b", t.u_b)):
        write_scalar_csv(setup.mesh, fld, out / f"nullspace_{name}.csv")
    norm = setup.sys_e.l2(u.values)
    _json(out / "nullspace_summary.json", res | {"existence_condition": ex, "calibration": cal, "norm_u": norm})
    bound = 10.0 * setup.mesh.h * norm
    for k, v in res.items():
        print(f"{k} = {v:.3e}")
    print(f"calibration = {cal:.3e} (h0 = {e.h0})")
    perim = boundary_integral(setup.mesh, 1.0, INNER)
    cal_ok = cal <= 1e-8 * max(1.0, norm) * perim if e.h0 == 0 else cal > 0.1 * abs(e.h0) * perim
    return max(res.values()) <= bound and cal_ok


def cmd_existence_check(cfg, out: Path) -> bool:
    from .transmission import existence_condition

    setup = _setup(cfg)
    coeffs = cfg.transmission_coefficients()
    rng = np.random.default_rng(cfg.run.seed)
    f = ScalarField(rng.standard_normal(setup.sys_b.n), TORSO)
    _, f1 = _outer_data(cfg, setup.mesh)
    f1 = f1 + BoundaryField(np.full(len(f1.values), 0.25), OUTER)
    val = existence_condition(setup, f, f1, coeffs)
    status = "identically satisfied" if coeffs.prefactor == 0 else ("satisfied" if abs(val) <= 1e-12 else "violated")
    _json(out / "existence_check.json", {"prefactor": coeffs.prefactor, "existence_condition": val, "status": status})
    print(f"existence condition: {val:.6e} ({status})")
    return True


def cmd_supplement_solve(cfg, out: Path) -> bool:
    from .transmission import calibration_residual, supplement_solve, transmission_residuals

    setup = _setup(cfg)
    coeffs = cfg.transmission_coefficients()
    ub = _spectral_ub(cfg, setup)
    res = supplement_solve(setup, ub, 0.0, coeffs, degree=cfg.experiment.degree)
    t = res.triple
    r = transmission_residuals(setup, t, coeffs)
    cal = calibration_residual(setup.mesh, t.u_i, t.u_e, coeffs.c0)
    for name, fld in (("u_i", t.u_i), ("u_e", t.u_e), ("u_b", t.u_b)):
        write_scalar_csv(setup.mesh, fld, out / f"supplement_{name}.csv")
    _json(out / "supplement_summary.json", r | {"h0": res.h0, "calibration": cal,
                                                  "min_pivot_ratio": res.min_pivot_ratio,
                                                  "condition_estimate": res.condition_estimate})
    print(f"h0={res.h0:.6e} calibration={cal:.3e} min pivot ratio={res.min_pivot_ratio:.3e}")
    scale = max(1.0, float(np.max(np.abs(t.u_i.values))))
    return res.min_pivot_ratio > 1e-14 and cal <= 1e-8 * scale * boundary_integral(setup.mesh, 1.0, INNER)


def cmd_cardio_operator(cfg, out: Path) -> bool:
    from .transmission import cardio_fourth_order_operator

    setup = _setup(cfg)
    consts = cfg.cardio_constants()
    op = cardio_fourth_order_operator(setup, consts, degree=cfg.experiment.degree)
    expected = consts.sigma_i * consts.sigma_e * consts.eps_eps0 / (consts.sigma_e + consts.sigma_i)
    err = abs(op.leading_coefficient - expected) / expected
    asym = float(abs(op.matrix - op.matrix.T).max())
    summary = {"leading_coefficient": op.leading_coefficient, "expected": expected, "relative_error": err,
               "ndof": op.space.ndof, "nnz": int(op.matrix.nnz), "asymmetry": asym}
    _json(out / "cardio_operator.json", summary)
    print(f"leading coefficient {op.leading_coefficient:.15g} (expected {expected:.15g}), ndof {op.space.ndof}")
    return err <= 1e-14


def cmd_elasticity_demo(cfg, out: Path) -> bool:
    from . import elasticity as el
    from .transmission import TransmissionCoefficients

    m = _mesh(cfg)
    p_i, p_e, p_b = cfg.lame_parameters()
    e = cfg.experiment
    coeffs = TransmissionCoefficients(1.0, 1.0, 1.0, 0.0)
    t, res = el.elastic_transmission_demo(m, coeffs, p_i, p_e, p_b, center=e.bump_center, radius=e.bump_radius,
                                          amplitude=e.bump_amplitude, h0=(e.h0, 0.0))
    for name, fld in (("u_i", t.u_i), ("u_e", t.u_e), ("u_b", t.u_b)):
        write_vector_csv(m, fld, out / f"elastic_{name}.csv")
    norm = el.assemble_lame(m, p_e, HEART).l2(t.u_e.flat)
    rng = np.random.default_rng(cfg.run.seed)
    ann = max(el.kelvin_annihilation(rng.uniform(0.2, 2.0, 2), np.zeros(2), p_e) for _ in range(10))
    rec = el.symbol_check(p_e, rng.standard_normal(2), rng.standard_normal(2) + 1j * rng.standard_normal(2))
    _json(out / "elasticity_summary.json", res | {"norm_u_e": norm, "kelvin_annihilation": ann,
                                                  "symbol_det": rec.det_value.real, "symbol_det_closed": rec.det_closed})
    bound = 10.0 * m.h * norm
    worst = max(res.values())
    print(f"largest residual {worst:.3e} (bound {bound:.3e}); Kelvin annihilation {ann:.2e}")
    return worst <= bound and ann <= 1e-6


def cmd_parabolic_demo(cfg, out: Path) -> bool:
    from . import parabolic as pa
    from .acceptance import caloric_field
    from .transmission import make_h20_bump

    m = _mesh(cfg)
    c = cfg.cable_coefficients()
    Me = cfg.tensors()[1]
    F, fn = caloric_field(m, c, Me)
    gi, go = pa.green_heat_residual(m, F, c, Me, u_exact=fn)
    e = cfg.experiment
    cab = cfg.cable
    bump = make_h20_bump(m, e.bump_center, e.bump_radius, e.bump_amplitude)
    op = pa.build_cable_operator(c, Me, m)
    pa.evolve(op, bump, cab.dt, cab.n_steps, cab.theta).write_csv(out / "cable_evolution.csv")
    rows = []
    for amp in (0.0, 0.1, 1.0, 10.0):
        rows.append((amp, pa.uniqueness_probe(bump.values * amp, c, Me, m, cab.n_steps, cab.dt, cab.theta)))
    with open(out / "probe.csv", "w") as fh:
        fh.write("amplitude,probe_value\n")
        for a, v in rows:
            fh.write(f"{a:.10g},{v:.17g}\n")
    _json(out / "parabolic_summary.json", {"green_inside": gi, "green_outside": go, "kappa": c.kappa,
                                           "classification": c.classification})
    print(f"Green formula: inside {gi:.3e}, outside {go:.3e}; probe values {[f'{v:.3e}' for _, v in rows]}")
    return gi <= 0.02 and go <= 0.02 and rows[0][1] == 0.0 and all(v > 0 for _, v in rows[1:])


def cmd_verify(cfg, out: Path) -> bool:
    from .acceptance import run_all

    results = run_all(seed=cfg.run.seed)
    lines = ["criterion_id,status,value,tolerance"] + [r.line() for r in results]
    (out / "report.csv").write_text("\n".join(lines) + "\n")
    for r in results:
        print(f"{r.line()}  # {r.name} ({r.seconds:.1f} s)")
    return all(r.passed for r in results)


COMMANDS = {
    "mesh": cmd_mesh,
    "neumann-demo": cmd_neumann_demo,
    "cauchy-sweep": cmd_cauchy_sweep,
    "nullspace-demo": cmd_nullspace_demo,
    "existence-check": cmd_existence_check,
    "supplement-solve": cmd_supplement_solve,
    "cardio-operator": cmd_cardio_operator,
    "elasticity-demo": cmd_elasticity_demo,
    "parabolic-demo": cmd_parabolic_demo,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="transmission-lab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, default=None, help="INI scenario file (defaults built in)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--seed", type=int, default=None, help="overrides run.seed")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed)
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "config_used.ini").write_text(dump_config(cfg))
        ok = COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TransmissionLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
