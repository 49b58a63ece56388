"""Command-line entry point: ``ibsh <subcommand> ...``.

Every subcommand ends its standard output with a one-line JSON summary
and exits 0 exactly when its assertions held.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import entropy as ent
from . import harness, io, monitors
from .grid import make_grid
from .hyperbolic import evaluate, riemann_datum, riemann_exact, solve_reference, verify_riemann
from .regularized import BlowUpError, RegParams, TimeControls, integrate

log = logging.getLogger("ibsh")

SUBCOMMANDS = ("solve", "reference", "riemann", "sweep", "entropy-check")


@dataclass
class RunConfig:
    subcommand: str
    options: dict = field(default_factory=dict)
    out: Path | None = None
    verbosity: int = 0
    plot: bool = False

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None


def _kv(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), float(v)


def _add_datum(p: argparse.ArgumentParser):
    p.add_argument("--datum", default="gaussian", choices=("gaussian", "riemann", "box", "sine", "file"))
    p.add_argument("--param", action="append", type=_kv, default=[], metavar="K=V", help="datum parameter")
    p.add_argument("--input", help="CSV with u or (x, u) columns for --datum file")
    p.add_argument("--x-min", type=float, default=-20.0)
    p.add_argument("--x-max", type=float, default=20.0)
    p.add_argument("--n", type=int, default=512)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ibsh", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("solve", help="integrate the regularized equation")
    _add_datum(s)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--n-out", type=int, default=100)
    s.add_argument("--scheme", choices=("rk4", "imex"), default="rk4")
    s.add_argument("--cfl", type=float, default=0.5)
    s.add_argument("--mollify", action="store_true", help="mollify the datum first")
    s.add_argument("--out", default=".")
    s.add_argument("--plot", action="store_true")

    r = sub.add_parser("reference", help="Godunov entropy solution")
    _add_datum(r)
    r.add_argument("--t-end", type=float, required=True)
    r.add_argument("--n-out", type=int, default=100)
    r.add_argument("--cfl", type=float, default=0.9)
    r.add_argument("--nonperiodic", action="store_true", help="zero-gradient ends")
    r.add_argument("--out", default=".")
    r.add_argument("--plot", action="store_true")

    m = sub.add_parser("riemann", help="exact Riemann solution")
    m.add_argument("--ul", type=float, required=True)
    m.add_argument("--ur", type=float, required=True)
    m.add_argument("--t", type=float, required=True)
    m.add_argument("--x-min", type=float, default=-2.0)
    m.add_argument("--x-max", type=float, default=1.0)
    m.add_argument("--samples", type=int, default=201)
    m.add_argument("--out", default=None, help="also write the samples here")

    w = sub.add_parser("sweep", help="vanishing diffusion-dispersion sweep")
    w.add_argument("--config", required=True)
    w.add_argument("--out", default=".")
    w.add_argument("--plot", action="store_true")
    w.add_argument("--assert-convergence", action="store_true", help="require strictly decreasing L1 errors")

    e = sub.add_parser("entropy-check", help="entropy production of a stored trajectory")
    e.add_argument("--trajectory", required=True)
    e.add_argument("--window", type=float, nargs=2, default=None, metavar=("A", "B"))
    e.add_argument("--tol", type=float, default=1e-3)
    e.add_argument("--out", default=None)
    return ap


def parse_cli(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    sub = ns.pop("subcommand")
    verbosity = ns.pop("verbose")
    plot = ns.pop("plot", False)
    out = ns.pop("out", None)
    if "param" in ns:
        ns["param"] = dict(ns["param"])
    cfg = RunConfig(sub, ns, Path(out) if out else None, verbosity, plot)
    if cfg.out is not None and sub != "riemann" and sub != "entropy-check":
        cfg.out.mkdir(parents=True, exist_ok=True)
    return cfg


def _summary(**kw) -> str:
    return json.dumps(kw, sort_keys=True, default=float)


def _datum(cfg: RunConfig):
    grid = make_grid(cfg.x_min, cfg.x_max, cfg.n)
    return harness.make_datum(grid, cfg.datum, cfg.input, **cfg.param)


def _xu_rows(x, u):
    return ({"x": float(a), "u": float(b)} for a, b in zip(x, u))


def cmd_solve(cfg: RunConfig) -> dict:
    p = RegParams(cfg.eps, cfg.beta)
    u0 = _datum(cfg)
    if cfg.mollify:
        u0 = harness.mollify_initial(u0, p)
    controls = TimeControls.uniform(cfg.t_end, cfg.n_out, scheme=cfg.scheme, cfl_safety=cfg.cfl)
    try:
        traj = integrate(u0, p, controls)
    except BlowUpError as exc:
        return {"ok": False, "error": str(exc), "t": exc.t}
    report = monitors.energy_report(traj)
    io.save_run(cfg.out / "trajectory.npz", traj)
    io.write_energy_csv(report, cfg.out / "energy.csv")
    io.write_csv(cfg.out / "final.csv", ("x", "u"), _xu_rows(traj.grid.x, traj.final.values))
    io.write_metadata(cfg.out / "metadata.json", command="solve", options=cfg.options)
    if cfg.plot:
        io.write_svg([("E(t)", report.times, report.l2_sq)], cfg.out / "energy.svg", "L2 energy", "t", "||u||^2")
    l2 = monitors.lemma21_identity_residual(report, p)
    agmon = monitors.agmon_violations(traj)
    nonincreasing = bool(np.all(np.diff(report.l2_sq) <= 1e-10 * report.l2_sq[0]))
    return {
        "ok": agmon == 0 and nonincreasing,
        "steps": traj.steps,
        "l2_identity_relative": l2.relative,
        "agmon_violations": agmon,
        "boundary_flag": traj.boundary_flag,
    }


def cmd_reference(cfg: RunConfig) -> dict:
    u0 = _datum(cfg)
    outputs = np.linspace(0.0, cfg.t_end, cfg.n_out + 1)
    times, states = solve_reference(u0, cfg.t_end, cfg.cfl, not cfg.nonperiodic, outputs)
    io.save_trajectory(cfg.out / "reference.npz", times, states, meta={"solver": "godunov"})
    io.write_csv(cfg.out / "reference.csv", ("x", "u"), _xu_rows(u0.grid.x, states[-1].values))
    io.write_metadata(cfg.out / "metadata.json", command="reference", options=cfg.options)
    if cfg.plot:
        io.write_svg([("u(T)", u0.grid.x, states[-1].values)], cfg.out / "reference.svg", "reference", "x", "u")
    total = [s.integral() for s in states]
    return {"ok": bool(np.all(np.isfinite(states[-1].values))), "mass_change": total[-1] - total[0]}


def cmd_riemann(cfg: RunConfig, stdout) -> dict:
    sol = riemann_exact(cfg.ul, cfg.ur)
    check = verify_riemann(sol)
    for w in sol.waves:
        print(f"{w.kind} s=[{w.s_lo:.17g}, {w.s_hi:.17g}] u=[{w.u_lo:.17g}, {w.u_hi:.17g}]", file=stdout)
    x = np.linspace(cfg.x_min, cfg.x_max, cfg.samples)
    u = evaluate(sol, x, cfg.t)
    print("x,u", file=stdout)
    for a, b in zip(x, u):
        print(f"{io.fmt(float(a))},{io.fmt(float(b))}", file=stdout)
    if cfg.out is not None:
        io.write_csv(cfg.out, ("x", "u"), _xu_rows(x, u))
    return {
        "ok": check["ok"],
        "waves": [w.kind for w in sol.waves],
        "rh_max": check["rh_max"],
        "oleinik_min": check["oleinik_min"],
    }


def cmd_sweep(cfg: RunConfig) -> dict:
    sc = harness.load_config(cfg.config)
    try:
        report = harness.run_sweep(sc)
    except BlowUpError as exc:
        return {"ok": False, "error": str(exc)}
    io.write_report(report, cfg.out / "report.csv")
    for r in report.rows:
        if r.energy is not None:
            io.write_energy_csv(r.energy, cfg.out / f"energy_{r.run_id}.csv")
    (cfg.out / "config.txt").write_text(harness.config_text(sc))
    io.write_metadata(cfg.out / "metadata.json", command="sweep", config=str(cfg.config))
    if cfg.plot:
        eps = report.column_eps()
        io.write_svg(
            [(f"p={p:g}", eps, report.errors(p)) for p in sc.p_list],
            cfg.out / "errors.svg", "error vs eps", "eps", "L^p error", logx=True, logy=True,
        )
        io.write_svg(
            [(r.run_id, r.energy.times, r.energy.l2_sq) for r in report.rows if r.energy is not None],
            cfg.out / "energy.svg", "E(t)", "t", "||u||^2",
        )
    errors = report.errors(1.0) if 1.0 in sc.p_list else report.errors(sc.p_list[0])
    ok = all(r.status == "ok" or sc.regime == "free" for r in report.rows)
    ok &= all(r.agmon_violations == 0 for r in report.rows if r.status == "ok")
    if cfg.assert_convergence:
        ok &= bool(np.all(np.diff(errors) < 0.0))
    return {"ok": bool(ok), "rows": len(report.rows), "rates": {str(k): v for k, v in report.rates().items()}}


def cmd_entropy_check(cfg: RunConfig, stdout) -> dict:
    times, states, _ = io.load_trajectory(cfg.trajectory)
    grid = states[0].grid
    if cfg.window is not None:
        window = tuple(cfg.window)
    else:
        q = 0.25 * grid.length
        window = (grid.x_min + q, grid.x_max - q)
    pairs = ent.standard_suite()
    phis = ent.standard_phi_suite(window, float(times[-1]))
    rows = [
        (pair.name, phi.name, ent.entropy_production((times, states), pair, phi))
        for pair in pairs
        for phi in phis
    ]
    print(",".join(io.ENTROPY_COLUMNS), file=stdout)
    for pair_id, phi_id, prod in rows:
        print(f"{pair_id},{phi_id},{io.fmt(prod)}", file=stdout)
    if cfg.out is not None:
        io.write_entropy_csv(rows, cfg.out)
    worst = max(r[2] for r in rows)
    return {"ok": worst <= cfg.tol, "max_production": worst, "tol": cfg.tol}


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    cfg = parse_cli(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(cfg.verbosity, 2), format="%(levelname)s %(message)s")
    try:
        if cfg.subcommand == "solve":
            result = cmd_solve(cfg)
        elif cfg.subcommand == "reference":
            result = cmd_reference(cfg)
        elif cfg.subcommand == "riemann":
            result = cmd_riemann(cfg, stdout)
        elif cfg.subcommand == "sweep":
            result = cmd_sweep(cfg)
        else:
            result = cmd_entropy_check(cfg, stdout)
    except (ValueError, OSError) as exc:
        result = {"ok": False, "error": str(exc)}
    print(_summary(command=cfg.subcommand, **result), file=stdout)
    return 0 if result["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
