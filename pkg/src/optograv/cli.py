"""Command-line interface.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
failure, 4 reproduction check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .errors import ConfigError, OptogravError
from .gravity import (
    SCENARIOS,
    Scenario,
    WavepacketSpec,
    branch_centers,
    force_density_quadrature,
    force_gaussian_quadrature,
    force_point_exact,
    probe_position,
    scenario_force_set,
    semiclassical_packets,
)
from .langevin import SimConfig, simulate, validate_against_frequency_domain
from .merit import theta_result
from .params import ParameterSet, preset, validate
from .spectrum import spectrum_curve, variance
from .steady import select_branch, solve_steady, stability_check
from .sweep import SweepSpec, reproduce_reference, run_sweep

EXIT_REPRO = 4


def _g(v):
    return format(float(v), ".17g")


def _load_params(args) -> ParameterSet:
    if args.config and args.preset:
        raise ConfigError("--config and --preset are mutually exclusive")
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from None
        params = ParameterSet.from_json(text)
    else:
        params = preset(args.preset or "A")
    report = validate(params)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    report.raise_for_errors()
    return params


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_g(v) for v in r])
    return buf.getvalue()


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, Scenario):
        return o.value
    raise TypeError(type(o))


# --------------------------------------------------------------------------
# subcommands


def cmd_steady(args):
    params = _load_params(args)
    states = solve_steady(params)
    chosen = select_branch(params, states)
    if args.json:
        data = []
        for st in states:
            d = st.to_dict()
            d["stability_margin"] = stability_check(params, st).margin
            d["selected"] = st == chosen
            data.append(d)
        _emit(_dumps(data), args.out)
        return 0
    lines = [f"{'branch':>6} {'Delta [rad/s]':>16} {'n_photons':>14} {'x2_bar [m]':>14} "
             f"{'omega_0 [rad/s]':>20} {'stable':>7}"]
    for i, st in enumerate(states):
        mark = "*" if st == chosen else " "
        lines.append(f"{i:>5}{mark} {st.Delta:>16.8g} {st.n_photons:>14.6g} {st.x2_bar:>14.6g} "
                     f"{st.omega_0:>20.12g} {str(st.stable):>7}")
    lines.append(f"branch count (with multiplicity): {states[0].branch_count}; * = selected")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_gravity(args):
    params = _load_params(args)
    st = select_branch(params)
    forces = scenario_force_set(params, st)
    probe = probe_position(params, st.x2_bar)
    centers = branch_centers(params)
    sigma = args.sigma if args.sigma else params.dx / 50 if params.dx > 0 else params.dy * 1e-4
    out = {"x2_bar": st.x2_bar, "forces": {}, "oracles": {}}
    for s in SCENARIOS:
        out["forces"][s.value] = forces[s].f
    for s, c in centers.items():
        exact = force_point_exact(params, probe, c, s).f
        quad = force_gaussian_quadrature(params, probe, WavepacketSpec(tuple(c), sigma, params.m1))
        out["oracles"][s.value] = {
            "linearized": forces[s].f,
            "point_exact": exact,
            "rel_linearized_vs_exact": abs(forces[s].f / exact - 1) if exact else None,
            "gaussian_quadrature": quad.f,
            "quadrature_error": quad.error,
        }
    mix = force_density_quadrature(params, probe, semiclassical_packets(params, sigma))
    avg = np.mean([out["oracles"][s.value]["gaussian_quadrature"] for s in centers])
    out["oracles"]["Semiclassical"] = {
        "linearized": forces[Scenario.SEMICLASSICAL].f,
        "mixture_quadrature": mix.f,
        "branch_average": float(avg),
        "rel_mixture_vs_average": abs(mix.f / avg - 1) if avg else None,
    }
    out["sigma"] = sigma
    if args.json:
        _emit(_dumps(out), args.out)
        return 0
    lines = [f"x2_bar = {st.x2_bar:.6g} m, packet sigma = {sigma:.3g} m", ""]
    lines.append(f"{'scenario':<14} {'linearized f [N]':>18} {'point exact [N]':>18} {'quadrature [N]':>18}")
    for s in centers:
        o = out["oracles"][s.value]
        lines.append(f"{s.value:<14} {o['linearized']:>18.8g} {o['point_exact']:>18.8g} "
                     f"{o['gaussian_quadrature']:>18.8g}")
    o = out["oracles"]["Semiclassical"]
    lines.append(f"{'Semiclassical':<14} {o['linearized']:>18.8g} {'':>18} {o['mixture_quadrature']:>18.8g}")
    lines.append(f"mixture vs branch average: relative difference {o['rel_mixture_vs_average']:.3g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_spectrum(args):
    params = _load_params(args)
    st = select_branch(params)
    w = np.geomspace(args.omega_min, args.omega_max, args.points)
    data = spectrum_curve(params, st, w, args.thermal, not args.no_optical_noise)
    _emit(_csv_text(("omega_rad_s", "S_m2_s"), data), args.out)
    return 0


def cmd_variance(args):
    params = _load_params(args)
    st = select_branch(params)
    rep = variance(params, st, scenario_force_set(params, st), thermal=args.thermal,
                   optical_noise=not args.no_optical_noise)
    _emit(_dumps(rep.to_dict()), args.out)
    return 0


def cmd_theta(args):
    params = _load_params(args)
    st = select_branch(params)
    res = theta_result(params, st, (args.omega_min, args.omega_max), args.points)
    summary = {
        "theta_star_full_over_G": res.theta_star_full / params.G,
        "theta_star_simplified_over_G": res.theta_star_simplified / params.G,
        "argmax_omega": res.argmax_omega,
        "theta_max_over_G": res.theta_max / params.G,
        "multimodal": res.multimodal,
        "theta_literal_D0_over_G": res.literal_constant / params.G,
    }
    text = _csv_text(("omega_rad_s", "theta_over_G"), res.curve)
    if args.out:
        _emit(text, args.out)
        sys.stdout.write(_dumps(summary))
    elif args.json:
        sys.stdout.write(_dumps(summary))
    else:
        sys.stdout.write(text)
    return 0


def cmd_simulate(args):
    params = _load_params(args)
    st = select_branch(params)
    scenario = None if args.scenario in (None, "none") else Scenario.parse(args.scenario)
    cfg = SimConfig.default(params, seed=args.seed, scenario=scenario, record_stride=args.stride)
    changes = {}
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.t_total is not None:
        changes["t_total"] = args.t_total
    cfg = SimConfig(**{**cfg.__dict__, **changes})
    if args.validate:
        verdict = validate_against_frequency_domain(params, st, cfg, n_seeds=args.validate)
        sys.stdout.write(_dumps(verdict.to_dict()))
        return 0 if verdict.passed else 3
    traj = simulate(params, st, cfg)
    _emit(_csv_text(("t_s", "dx2_m", "dp2", "re_da", "im_da"), traj.to_rows()), args.out)
    summary = {"seed": traj.seed, "mean_dx2": traj.mean, "var_dx2": traj.var,
               "n_stats": traj.n_stats, "force": traj.force}
    print(json.dumps(summary), file=sys.stderr)
    return 0


def cmd_sweep(args):
    if not args.spec:
        raise ConfigError("sweep needs --spec <path to sweep JSON>")
    try:
        with open(args.spec) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read sweep spec: {exc}") from None
    if args.out:
        data["output"] = args.out
    spec = SweepSpec.from_dict(data)
    records = run_sweep(spec)
    if args.json:
        sys.stdout.write(_dumps([r.to_dict() for r in records]))
    else:
        n_ok = sum(r.status == "ok" for r in records)
        print(f"{len(records)} points, {n_ok} ok, {len(records) - n_ok} failed"
              + (f"; written to {spec.output}" if spec.output else ""))
    return 0


def cmd_reproduce(args):
    rep = reproduce_reference(args.out)
    if args.json:
        sys.stdout.write(_dumps(rep.to_dict()))
    else:
        print(rep.table())
        for f in rep.files:
            print(f"wrote {f}")
    return 0 if rep.passed else EXIT_REPRO


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="parameter set JSON file")
    common.add_argument("--preset", choices=["A", "B"], help="built-in parameter set (default A)")
    common.add_argument("--json", action="store_true", help="machine-readable JSON output")
    common.add_argument("--out", help="output path (file, or directory for reproduce)")

    parser = argparse.ArgumentParser(prog="optograv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady", parents=[common], help="steady-state branches")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("gravity", parents=[common], help="scenario forces and oracle checks")
    p.add_argument("--sigma", type=float, help="wavepacket width for quadrature [m]")
    p.set_defaults(func=cmd_gravity)

    def freq_opts(p, n):
        p.add_argument("--omega-min", type=float, default=1e5)
        p.add_argument("--omega-max", type=float, default=1e10)
        p.add_argument("--points", type=int, default=n)

    def noise_opts(p):
        p.add_argument("--thermal", choices=["quantum", "classical"], default="quantum")
        p.add_argument("--no-optical-noise", action="store_true")

    p = sub.add_parser("spectrum", parents=[common], help="baseline position spectrum (CSV)")
    freq_opts(p, 2001)
    noise_opts(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("variance", parents=[common], help="variance report (JSON)")
    noise_opts(p)
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("theta", parents=[common], help="figure of merit curve (CSV) and summary")
    freq_opts(p, 2001)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("simulate", parents=[common], help="time-domain Langevin trajectory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-total", type=float)
    p.add_argument("--scenario", default=None, help="alpha | beta | cl | none")
    p.add_argument("--stride", type=int, default=100000)
    p.add_argument("--validate", type=int, metavar="N_SEEDS",
                   help="compare against the frequency domain over N seeds instead")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep from a JSON spec")
    p.add_argument("--spec", help="sweep specification JSON")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", parents=[common], help="reference-value reproduction table")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OptogravError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:  # bad scenario names, packet widths, ranges
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
