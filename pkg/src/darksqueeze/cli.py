"""Command line entry point ``darksqueeze``.

Every subcommand writes its datasets into the output directory and a
``<name>_checks.json`` file listing the invariants it verified.  Exit codes:
0 success, 2 invalid input, 3 a numerical check failed, 1 anything else.
"""

from __future__ import annotations

import argparse
import math
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .bdg import CertifyConfig, CompletenessGrid, SigmaGrid, certify
from .bdg.certify import entry, mode_profile_dataset, zero_profile_dataset
from .bdg.modes import eigenvalue_minus, eigenvalue_plus
from .config import RunConfig, linspace_spec
from .dynamics import (DB_CONVENTION, min_squeeze_curves, monte_carlo_variance, optimum_angle,
                       squeeze_grid, squeezing_ratio, to_db, variance_closed_form)
from .errors import ConfigError, DarkSqueezeError
from .medium import C_CM, MHZ, medium_coefficients, region_classify, soliton_velocity
from .oracles import (PropagationConfig, continuous_mode_phase_check, convergence_order,
                      mirrored_soliton, propagate_nls, soliton_propagation_check, zero_mode_drift)
from .output import base_metadata, write_json, write_table
from .soliton import DarkSolitonParams, nls_residual, profile_dataset
from .spin import (ASSUMPTIONS, SpinModel, min_spin_squeezing, min_spin_squeezing_search,
                   monte_carlo_spin_variance, spin_quadrature_stats)

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_CHECK = 0, 1, 2, 3

EXECUTION_ONLY = ("workers", "output")

NORMALIZATION = "zero mode scaled so <Phi1|Psi1> = 1; continuous modes delta-normalised"


class Context:
    """Per-run state shared by the subcommands."""

    def __init__(self, cfg: RunConfig, out: Path, dump_history: bool = False):
        self.cfg = cfg
        self.out = out
        self.dump_history = dump_history
        self.fmt = cfg["output"]["format"]
        self._coeffs = None

    @property
    def params(self):
        return self.cfg.atomic()

    @property
    def coeffs(self):
        if self._coeffs is None:
            self._coeffs = medium_coefficients(self.params)
        return self._coeffs

    def meta(self, command: str, **extra) -> dict:
        # output location and worker count cannot change any value
        data = {k: v for k, v in self.cfg.data.items() if k not in EXECUTION_ONLY}
        data["output"] = {"format": self.fmt}
        return base_metadata(data, subcommand=command, seed=self.cfg.seed,
                             db_convention=DB_CONVENTION, normalization=NORMALIZATION, **extra)

    def table(self, command, name, columns, rows, **extra):
        return write_table(self.out, name, self.meta(command, **extra), columns, rows, self.fmt)

    def checks(self, command, checks) -> bool:
        passed = all(c["pass"] is not False for c in checks)
        write_json(self.out / f"{command.replace('-', '_')}_checks.json",
                   {"meta": self.meta(command), "passed": passed, "checks": checks})
        return passed


def _rel(value, ref):
    return abs(value - ref) / abs(ref)


# -- subcommands ------------------------------------------------------------

def cmd_medium(ctx: Context) -> bool:
    c = ctx.coeffs
    sol = ctx.cfg.soliton(c)
    v, frac = soliton_velocity(c, sol.A, sol.theta)
    v_ref, frac_ref = soliton_velocity(c, 1.0, math.pi / 2)
    rows = [
        ("Re K0", c.K0.real, "cm^-1"), ("Im K0", c.K0.imag, "cm^-1"),
        ("Re K1", c.K1.real, "cm^-1 s"), ("Im K1", c.K1.imag, "cm^-1 s"),
        ("Re K2", c.K2.real, "cm^-1 s^2"), ("Im K2", c.K2.imag, "cm^-1 s^2"),
        ("Re W", c.W.real, "cm^-1 s^2"), ("Im W", c.W.imag, "cm^-1 s^2"),
        ("chi3", c.chi3, "m^2 V^-2"), ("Ldisp", c.Ldisp, "cm"), ("Lnln", c.Lnln, "cm"),
        ("Labs", c.Labs, "cm"), ("g", c.g, "1"), ("nu", c.nu, "1"), ("Vg", c.Vg, "cm s^-1"),
        ("Vg/c", c.Vg / C_CM, "1"), ("n0", c.n0, "1"), ("|g_p|^2", c.gp_sq, "s^-2"),
        ("V_sol", v, "cm s^-1"), ("V_sol/c", frac, "1"),
        ("V_sol/c (A=1, theta=pi/2)", frac_ref, "1"),
    ]
    ctx.table("medium", "medium_coefficients", ["quantity", "value", "unit"], rows,
              soliton={"A": sol.A, "g": sol.g, "theta": sol.theta})
    checks = [
        entry("Vg positive", c.Vg, 0.0, c.Vg > 0),
        entry("Labs positive", c.Labs, 0.0, c.Labs > 0),
        entry("Ldisp finite", c.Ldisp, None, bool(np.isfinite(c.Ldisp))),
    ]
    return ctx.checks("medium", checks)


def cmd_region_map(ctx: Context) -> bool:
    g = ctx.cfg["grids"]
    th = ctx.cfg["thresholds"]
    d3 = linspace_spec(g["region_delta3_mhz"])
    d2 = linspace_spec(g["region_delta2_mhz"])
    rm = region_classify(ctx.params, d3 * MHZ, d2 * MHZ, nu_max=th["nu_max"], eta=th["eta"],
                         workers=ctx.cfg.workers)
    rows = []
    for i, y in enumerate(d2):
        for j, x in enumerate(d3):
            rows.append((float(x), float(y), rm.labels[i, j], rm.flags[i, j],
                         float(rm.sign_ratio[i, j]), float(rm.nu[i, j]),
                         float(rm.lnln_over_ldisp[i, j])))
    ctx.table("region-map", "region_map",
              ["delta3_mhz", "delta2_mhz", "label", "flag", "re_w_over_re_k2", "nu",
               "lnln_over_ldisp"], rows, n0=rm.n0, nu_max=rm.nu_max, eta=rm.eta)
    labels = rm.labels
    checks = [
        entry("DS region nonempty", int((labels == "DS").sum()), None, bool((labels == "DS").any())),
        entry("BS region nonempty", int((labels == "BS").sum()), None, bool((labels == "BS").any())),
    ]
    zero = np.isclose(d2, 0.0)
    if zero.any():
        bad = np.isin(labels[zero], ["DS", "BS"]).sum()
        checks.append(entry("delta2 = 0 never soliton", int(bad), 0, bool(bad == 0)))
    return ctx.checks("region-map", checks)


def cmd_soliton(ctx: Context) -> bool:
    g = ctx.cfg["grids"]
    sol = ctx.cfg.soliton(ctx.coeffs)
    rows = profile_dataset(g["profile_thetas"], A=sol.A, g=sol.g, count=g["profile_points"],
                           span=g["profile_span"])
    ctx.table("soliton", "soliton_profiles", ["theta", "tau", "intensity", "phase"], rows)
    checks = []
    tau = np.linspace(-5, 5, 201)
    s = np.linspace(0, 1, 11)[:, None]
    for th in g["profile_thetas"]:
        p = DarkSolitonParams(A=sol.A, g=sol.g, theta=float(th))
        r = nls_residual(p, s, tau[None, :])
        checks.append(entry(f"NLS residual theta={th:.6g}", r, 1e-10, r < 1e-10))
    return ctx.checks("soliton", checks)


def cmd_modes(ctx: Context) -> bool:
    g = ctx.cfg["grids"]
    gamma = math.tan(g["mode_theta"])
    sigma = linspace_spec(g["mode_sigma"])
    k = g["mode_k"]
    ctx.table("modes", "mode_continuous", ["sigma", "re_u", "im_u", "re_v", "im_v"],
              mode_profile_dataset(gamma, k, sigma), k=k, gamma=gamma)
    ctx.table("modes", "mode_zero", ["sigma", "re_u", "im_u", "re_v", "im_v"],
              zero_profile_dataset(gamma, sigma), gamma=gamma)
    ks = np.linspace(-5, 5, 201)
    ks = ks[ks != 0]
    rows = [(float(x), float(eigenvalue_plus(gamma, x)), float(eigenvalue_minus(gamma, x)))
            for x in ks]
    ctx.table("modes", "mode_dispersion", ["k", "e_plus", "e_minus"], rows, gamma=gamma)
    pos = all(r[1] > 0 for r in rows)
    return ctx.checks("modes", [entry("E+ positive", min(r[1] for r in rows), 0.0, pos)])


def cmd_certify(ctx: Context) -> bool:
    g = ctx.cfg["grids"]
    cc = CertifyConfig(grid=SigmaGrid(g["sigma_half_width"], g["sigma_points"]),
                       completeness=CompletenessGrid(k_floor=ctx.cfg["thresholds"]["k_floor"]),
                       seed=ctx.cfg.seed)
    rep = certify(cc, workers=ctx.cfg.workers)
    write_json(ctx.out / "certification.json", {"meta": ctx.meta("certify"), **rep.as_dict()})
    return rep.passed


def cmd_squeeze(ctx: Context) -> bool:
    g = ctx.cfg["grids"]
    th = ctx.cfg["thresholds"]
    sol = ctx.cfg.soliton(ctx.coeffs)
    c0 = sol.prefactor
    s = linspace_spec(g["s"])
    theta = linspace_spec(g["theta"])
    grid = squeeze_grid(s, theta, c0)
    rows = [(float(s[i]), float(theta[j]), float(grid.variance[i, j]), float(grid.ratio_db[i, j]))
            for i in range(s.size) for j in range(theta.size)]
    extra = {"c0": c0, "soliton": {"A": sol.A, "g": sol.g, "theta": sol.theta}}
    ctx.table("squeeze", "squeeze_heatmap", ["s", "theta", "variance", "ratio_db"], rows, **extra)
    rows = [(float(sv), float(t), float(squeezing_ratio(t, sv, c0)[1]))
            for sv in g["line_s"] for t in theta]
    ctx.table("squeeze", "squeeze_vs_theta", ["s", "theta", "ratio_db"], rows, **extra)
    rows = [(float(t), float(sv), float(squeezing_ratio(t, sv, c0)[1]))
            for t in g["line_theta"] for sv in s]
    ctx.table("squeeze", "squeeze_vs_s", ["theta", "s", "ratio_db"], rows, **extra)
    rows = [(float(sv), float(grid.theta_opt[i]), float(grid.rmin_db[i])) for i, sv in enumerate(s)]
    ctx.table("squeeze", "theta_opt", ["s", "theta_opt", "rmin_db"], rows, **extra)
    cases = [(sol.A, sol.g, float(b)) for b in g["rmin_thetas"]]
    curves = min_squeeze_curves(s, cases)
    rows = [(case[2], float(sv), float(r), float(to_db(r)))
            for case in cases for sv, r in zip(s, curves[case])]
    ctx.table("squeeze", "rmin_blackness", ["blackness", "s", "rmin", "rmin_db"], rows,
              A=sol.A, g=sol.g)
    cases_g = [(sol.A, float(x), sol.theta) for x in g["rmin_gs"]]
    curves_g = min_squeeze_curves(s, cases_g)
    rows = [(case[1], float(sv), float(r), float(to_db(r)))
            for case in cases_g for sv, r in zip(s, curves_g[case])]
    ctx.table("squeeze", "rmin_nonlinearity", ["g", "s", "rmin", "rmin_db"], rows,
              A=sol.A, blackness=sol.theta)

    # Monte-Carlo oracle on a few interior grid points
    npts = th["monte_carlo_points"]
    pts = [(float(s[int(i)]), float(theta[int(j)]))
           for i, j in zip(np.linspace(s.size // 5, s.size - 1, npts),
                           np.linspace(theta.size // 7, theta.size - 2, npts))]
    mc_rows, checks = [], []
    for n, (sv, t) in enumerate(pts):
        mc = monte_carlo_variance(c0, t, sv, n=th["monte_carlo_samples"], seed=ctx.cfg.seed + n)
        mc_rows.append((sv, t, mc.estimate, mc.exact, mc.std_error, mc.sigmas))
        checks.append(entry(f"Monte-Carlo variance s={sv:.4g} theta={t:.4g}", mc.sigmas, 3.0,
                            mc.sigmas < 3.0))
    ctx.table("squeeze", "squeeze_monte_carlo",
              ["s", "theta", "estimate", "exact", "std_error", "sigmas"], mc_rows, **extra)
    v0 = variance_closed_form(c0, theta, 0.0)
    checks += [
        entry("two-path variance agreement", grid.two_path_max_diff, 1e-12,
              grid.two_path_max_diff < 1e-12),
        entry("vacuum variance at s = 0", float(np.max(np.abs(v0 - 0.5))), 0.0,
              bool(np.all(v0 == 0.5))),
        entry("variance at theta = pi/2", float(np.max(np.abs(
            variance_closed_form(c0, math.pi / 2, s) - 0.5))), 0.0,
            bool(np.all(variance_closed_form(c0, math.pi / 2, s) == 0.5))),
    ]
    _, vmin = optimum_angle(float(s[-1]), c0)
    checks.append(entry("minimum variance at s_max below vacuum", vmin, 0.5,
                        vmin < 0.5 or c0 == 0))
    return ctx.checks("squeeze", checks)


def cmd_spin(ctx: Context) -> bool:
    g = ctx.cfg["grids"]
    sp = ctx.cfg["spin"]
    sol = ctx.cfg.soliton(ctx.coeffs)
    model = SpinModel.from_medium(ctx.params, sol, window=sp["window"], nodes=sp["nodes"])
    s = linspace_spec(g["spin_s"])
    rows, xi = [], []
    for sv in s:
        x, t = min_spin_squeezing(model, float(sv), return_angle=True)
        xi.append(x)
        rows.append((float(sv), x, 10.0 * math.log10(x), t))
    meta = {"assumptions": list(ASSUMPTIONS), "kappa": model.kappa,
            "population_z": model.population_z, "window": model.window}
    ctx.table("spin", "spin_squeezing", ["s", "xi2", "xi2_db", "theta_opt"], rows, **meta)
    xi = np.array(xi)
    checks = [entry("xi2(0) = 1", float(xi[0]), 1.0, bool(s[0] != 0 or xi[0] == 1.0))]
    pos = s > 0
    if sol.prefactor > 0:
        checks.append(entry("xi2 < 1 for s > 0", float(xi[pos].max()), 1.0,
                            bool(np.all(xi[pos] < 1.0))))
    checks.append(entry("xi2 nonincreasing", float(np.max(np.diff(xi))), 0.0,
                        bool(np.all(np.diff(xi) <= 0.0))))
    sv = float(s[len(s) // 2])
    xs, ts = min_spin_squeezing_search(model, sv)
    x, t = min_spin_squeezing(model, sv, return_angle=True)
    dth = abs((ts - t + math.pi / 2) % math.pi - math.pi / 2)
    checks.append(entry("closed form vs search angle", dth, 1e-8, dth < 1e-8 or sol.prefactor == 0))
    est, exact, se = monte_carlo_spin_variance(model, 0.5, math.pi / 4, n=10 ** 5, seed=ctx.cfg.seed)
    checks.append(entry("Monte-Carlo spin variance", abs(est - exact) / se, 3.0,
                        abs(est - exact) < 3 * se))
    mean, var = spin_quadrature_stats(model, 0.0, math.pi / 4)
    checks.append(entry("vacuum spin variance = <s_z>/2", float(var), model.population_z / 2,
                        bool(math.isclose(var, model.population_z / 2, rel_tol=1e-15))))
    return ctx.checks("spin", checks)


def cmd_oracle(ctx: Context) -> bool:
    o = ctx.cfg["oracle"]
    sol = ctx.cfg.soliton(ctx.coeffs)
    pc = PropagationConfig(o["half_width"], o["points"], o["ds"])
    grey = sol.with_(theta=o["theta"])
    black = sol.with_(theta=0.0)
    rg = soliton_propagation_check(grey, pc, o["s_final"])
    rb = soliton_propagation_check(black, pc, o["s_final"])
    vel_err = _rel(rg.velocity, rg.expected_velocity) if rg.expected_velocity else rg.velocity_error
    checks = [
        entry("grey dip velocity (relative)", vel_err, 0.01, vel_err < 0.01),
        entry("black soliton stationarity", rb.intensity_error, 1e-6, rb.intensity_error < 1e-6),
        entry("edge background", max(rg.edge_deviation, rb.edge_deviation), 1e-8,
              max(rg.edge_deviation, rb.edge_deviation) < 1e-8),
        entry("renormalised power drift per unit s", max(rg.power_drift, rb.power_drift), 1e-8,
              max(rg.power_drift, rb.power_drift) < 1e-8),
    ]
    u0 = mirrored_soliton(grey, pc) * (1 + 0.1 * np.exp(-pc.grid.points ** 2 / 4))
    order = convergence_order(u0, grey.g, grey.mu, PropagationConfig(pc.half_width, pc.count, 0.01),
                              0.5)
    checks.append(entry("Strang order", order, 2.0, abs(order - 2.0) < 0.2))
    c0 = black.prefactor if black.prefactor > 0 else 1.0
    drift, expect = zero_mode_drift(c0)
    d_err = abs(drift - expect) / abs(expect)
    checks.append(entry("zero-mode secular drift (relative)", d_err, 0.02, d_err < 0.02))
    for gamma in (0.0, grey.gamma):
        pr = continuous_mode_phase_check(gamma, 2.0, c0)
        err = float(pr.deviation.max())
        checks.append(entry(f"continuous-mode phase rotation gamma={gamma:.6g}", err, 0.01,
                            err < 0.01))
    rows = [(c["check"], c["value"], c["threshold"], c["pass"]) for c in checks]
    ctx.table("oracle", "oracle_summary", ["check", "value", "threshold", "pass"], rows)
    if ctx.dump_history:
        res = propagate_nls(mirrored_soliton(grey, pc), grey.g, grey.mu, pc, o["s_final"],
                            record_every=max(1, int(round(o["s_final"] / pc.ds)) // 100))
        np.save(ctx.out / "oracle_history_s.npy", res.s)
        np.save(ctx.out / "oracle_history_tau.npy", res.tau)
        np.save(ctx.out / "oracle_history_field.npy", res.fields)
    return ctx.checks("oracle", checks)


COMMANDS = {
    "medium": cmd_medium,
    "region-map": cmd_region_map,
    "soliton": cmd_soliton,
    "modes": cmd_modes,
    "certify": cmd_certify,
    "squeeze": cmd_squeeze,
    "spin": cmd_spin,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="darksqueeze",
                                     description="Slow-light dark soliton squeezing datasets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["all"]:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--out", type=Path, help="output directory (overrides output.directory)")
        p.add_argument("--seed", type=int, help="random seed (overrides seed)")
        p.add_argument("--workers", type=int, help="process cap (overrides workers)")
        p.add_argument("--dump-history", action="store_true",
                       help="save propagation histories as .npy files")
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.out is not None:
        out["output"] = {"directory": str(args.out)}
    if args.seed is not None:
        out["seed"] = args.seed
    if args.workers is not None:
        out["workers"] = args.workers
    return out


def _fail(out: Path, command: str, exc: BaseException, code: int) -> int:
    record = {"subcommand": command, "error": type(exc).__name__, "message": str(exc),
              "exit_code": code}
    if isinstance(exc, ConfigError):
        record["field"] = exc.field
    try:
        write_json(out / "error.json", record)
    except OSError:
        pass
    print(f"darksqueeze {command}: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out if args.out is not None else Path("out")
    try:
        overrides = _overrides(args)
        cfg = (RunConfig.from_file(args.config, overrides) if args.config
               else RunConfig.from_dict({}, overrides))
        out = Path(cfg["output"]["directory"])
        out.mkdir(parents=True, exist_ok=True)
        ctx = Context(cfg, out, args.dump_history)
        names = list(COMMANDS) if args.command == "all" else [args.command]
        failed = []
        for name in names:
            if not COMMANDS[name](ctx):
                failed.append(name)
        if failed:
            print(f"darksqueeze: numerical checks failed in: {', '.join(failed)}", file=sys.stderr)
            return EXIT_CHECK
        return EXIT_OK
    except ConfigError as exc:
        return _fail(out, args.command, exc, EXIT_INVALID)
    except DarkSqueezeError as exc:
        return _fail(out, args.command, exc, EXIT_ERROR)
    except Exception as exc:  # noqa: BLE001
        traceback.print_exc()
        return _fail(out, args.command, exc, EXIT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
