"""Command-line front-end: every workflow as a subcommand writing artifacts.

Parameters are accepted in the dimensionless ratios used throughout
(delta/gamma1, eta/eta_c, n_ex) with gamma1 = 1 as the default unit; raw
rates are accepted as overrides.  Outputs are CSV files with a single
'#'-prefixed JSON provenance line (or JSON documents with a 'meta' key),
written atomically.  Exit codes: 0 ok, 2 usage, 3 numeric failure,
4 wrong regime, 5 insufficient statistics.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .artifacts import provenance, write_csv, write_json
from .errors import SqvdpError, UsageError, WrongRegimeError
from .fock import build_fock_space, coherent_state, default_cutoff
from .params import ModelParams

__all__ = ["main", "build_parser", "run"]


# ---------------------------------------------------------------------------
# argument plumbing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqvdp",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--gamma1", type=float, default=1.0)
    common.add_argument("--nex", type=float, help="mean-field excitation number")
    common.add_argument("--gamma2", type=float, help="two-boson rate (alternative to --nex)")
    common.add_argument("--delta-ratio", type=float, default=0.1)
    common.add_argument("--eta-ratio", type=float, help="eta / eta_c")
    common.add_argument("--eta", type=float, help="raw squeezing rate")
    common.add_argument("--omega-s", type=float, default=0.0)
    common.add_argument("--cutoff", type=int, help="Fock cutoff override")
    common.add_argument("--trunc-m", type=int, default=64, help="phase-operator truncation")
    common.add_argument("--dt", type=float)
    common.add_argument("--seed", type=int, default=1234)
    common.add_argument("--grid", help="eta-ratio grid start:stop:count")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="Liouvillian eigenvalues")
    p.add_argument("--n-eigs", type=int, help="keep only the leading eigenvalues")
    p.add_argument("--sectors", default="even,odd")

    p = sub.add_parser("bands", parents=[common], help="frequency-band table")
    p.add_argument("--n-bands", type=int, default=4)

    p = sub.add_parser("meanfield", parents=[common], help="classical flow")
    p.add_argument("--t-end", type=float, default=100.0)
    p.add_argument("--alpha0", help="initial amplitude re,im (default sqrt(nex))")

    p = sub.add_parser("semiclassical", parents=[common], help="phase operator spectra")
    p.add_argument("--modes", type=int, default=4, help="perturbative constants to report")

    p = sub.add_parser("langevin", parents=[common], help="stochastic ensembles")
    p.add_argument("--process", choices=("phase", "intensity", "amplitude"), default="phase")
    p.add_argument("--n-steps", type=int, default=100_000)
    p.add_argument("--n-traj", type=int, default=200)
    p.add_argument("--store-every", type=int, default=10)
    p.add_argument("--dump-raw", action="store_true", help="also write raw paths (large)")

    p = sub.add_parser("dynamics", parents=[common], help="quantum trajectories")
    p.add_argument("--frame", choices=("rotating", "lab", "stroboscopic"), default="rotating")
    p.add_argument("--t-end", type=float, default=100.0)
    p.add_argument("--n-times", type=int, default=400)
    p.add_argument("--n-max", type=int, default=2000, help="stroboscopic periods")
    p.add_argument(
        "--initial",
        default="coherent-nex",
        choices=("coherent-nex", "coherent-alpha-plus", "vacuum", "steady"),
    )

    p = sub.add_parser("occupation", parents=[common], help="steady occupation scan")
    p.add_argument("--nex-list", default="1,5,10,20")

    p = sub.add_parser("ep", parents=[common], help="exceptional point tools")
    p.add_argument("--method", choices=("liouvillian", "semiclassical"), default="liouvillian")
    p.add_argument("--eta-bracket", default="1.0:2.0", help="bracket in units of eta_c")
    p.add_argument("--scan", action="store_true", help="scaling fit over --nex-list")
    p.add_argument("--nex-list", default="500,1000,2000,5000,10000")
    p.add_argument("--delta-ratios", default="0.05,0.1,0.2")

    p = sub.add_parser("ssb", parents=[common], help="symmetry-broken states")
    p.add_argument("--nex-list", default="5,10,15,20")

    p = sub.add_parser("fig", parents=[common], help="bundled data pipelines 1..7")
    p.add_argument("number", type=int, choices=range(1, 8))

    return parser


def _apply_config_file(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from a flat key=value file (flags win)."""
    if not getattr(args, "config", None):
        return args
    if not os.path.exists(args.config):
        raise UsageError(f"config file not found: {args.config}")
    with open(args.config) as handle:
        for line in handle:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"bad config line (need key=value): {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            dest = key.replace("-", "_")
            if not hasattr(args, dest):
                raise UsageError(f"unknown config key {key!r}")
            if getattr(args, dest) in (None, _UNSET.get(dest)):
                try:
                    parsed = int(value)
                except ValueError:
                    try:
                        parsed = float(value)
                    except ValueError:
                        parsed = value
                setattr(args, dest, parsed)
    return args


# defaults that a config file is allowed to override
_UNSET = {"gamma1": 1.0, "delta_ratio": 0.1, "omega_s": 0.0, "seed": 1234,
          "trunc_m": 64, "out": "out", "format": "csv"}


def _params_from_args(args, require_drive: bool = False) -> ModelParams:
    if (args.nex is None) == (args.gamma2 is None):
        raise UsageError("give exactly one of --nex or --gamma2")
    if args.nex is not None:
        n_ex = args.nex
    else:
        n_ex = args.gamma1 / (2.0 * args.gamma2)
    if (args.eta_ratio is None) and (args.eta is None):
        raise UsageError("give one of --eta-ratio or --eta")
    if (args.eta_ratio is not None) and (args.eta is not None):
        raise UsageError("--eta-ratio and --eta are mutually exclusive")
    if require_drive and args.omega_s <= 0:
        raise UsageError("this command needs --omega-s > 0")
    return ModelParams.from_ratios(
        n_ex=n_ex,
        delta_ratio=args.delta_ratio,
        eta_ratio=args.eta_ratio,
        eta=args.eta,
        gamma1=args.gamma1,
        omega_s=args.omega_s,
    )


def _effective_cutoff(args, params: ModelParams) -> int:
    if args.cutoff is not None:
        return args.cutoff
    target = params.n_ex
    if params.eta > params.eta_c:
        from .meanfield import fixed_points

        target = abs(fixed_points(params)[0]) ** 2
    return default_cutoff(target)


def _parse_grid(spec: str) -> np.ndarray:
    try:
        start, stop, count = spec.split(":")
        return np.linspace(float(start), float(stop), int(count))
    except ValueError as exc:
        raise UsageError(f"bad grid spec {spec!r}; expected start:stop:count") from exc


def _parse_list(spec: str) -> list[float]:
    try:
        return [float(x) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad list {spec!r}") from exc


def _outpath(args, name: str) -> str:
    return os.path.join(args.out, name)


# ---------------------------------------------------------------------------
# subcommand runners


def _run_spectrum(args) -> list[str]:
    from .liouvillian import build_rotating_liouvillian
    from .spectral import diagonalize, spectrum_records

    params = _params_from_args(args)
    d = _effective_cutoff(args, params)
    space = build_fock_space(d)
    superop = build_rotating_liouvillian(params, space)
    sectors = tuple(s.strip() for s in args.sectors.split(",") if s.strip())
    dec = diagonalize(superop, want_modes=False, sectors=sectors)
    records = spectrum_records(dec)
    if args.n_eigs:
        records = records[: args.n_eigs]
    meta = provenance("spectrum", params, cutoff=d, sectors=list(sectors))
    path = _outpath(args, "spectrum.json")
    write_json(path, {"cutoff": d, "params": params.as_dict(), "eigenvalues": records}, meta)
    written = [path]
    if args.format == "csv":
        cols = {
            "re": [r[0] for r in records],
            "im": [r[1] for r in records],
            "parity": [r[2] for r in records],
        }
        path = _outpath(args, "spectrum.csv")
        write_csv(path, cols, meta)
        written.append(path)
    return written


def _run_bands(args) -> list[str]:
    from .liouvillian import build_rotating_liouvillian
    from .meanfield import limit_cycle_frequency
    from .spectral import band_structure, diagonalize

    params = _params_from_args(args)
    omega = limit_cycle_frequency(params)
    d = _effective_cutoff(args, params)
    superop = build_rotating_liouvillian(params, build_fock_space(d))
    dec = diagonalize(superop, want_modes=False)
    bands = band_structure(dec, omega, n_bands=args.n_bands)
    cols = {
        "band": list(range(1, args.n_bands + 1)),
        "frequency": bands.band_frequencies,
        "fundamental_rate": list(bands.fundamental_rates),
        "second_rate": list(bands.second_rates),
        "n_members": [len(b) for b in bands.bands],
    }
    meta = provenance("bands", params, cutoff=d, omega=omega, tolerance=bands.tolerance)
    path = _outpath(args, "bands.csv")
    write_csv(path, cols, meta)
    return [path]


def _run_meanfield(args) -> list[str]:
    from .meanfield import classify_bifurcation, integrate_mf

    params = _params_from_args(args)
    bif = classify_bifurcation(params)
    payload = {"regime": bif.regime, "eta_c": bif.eta_c}
    if bif.omega is not None:
        payload["omega"] = bif.omega
    if bif.fixed_points is not None:
        payload["fixed_points"] = [
            [fp.real, fp.imag] for fp in bif.fixed_points
        ]
    meta = provenance("meanfield", params)
    written = [_outpath(args, "bifurcation.json")]
    write_json(written[0], payload, meta)

    if args.alpha0:
        re, im = (float(x) for x in args.alpha0.split(","))
        alpha0 = complex(re, im)
    else:
        alpha0 = complex(math.sqrt(params.n_ex), 0.0)
    dt = args.dt if args.dt else 5e-3 / params.gamma1
    traj = integrate_mf(alpha0, params, args.t_end / params.gamma1, dt)
    stride = max(1, traj.times.size // 4000)
    cols = {
        "t": traj.times[::stride],
        "re_alpha": traj.alpha[::stride].real,
        "im_alpha": traj.alpha[::stride].imag,
        "N": traj.intensity[::stride],
        "phi": traj.phase[::stride],
    }
    path = _outpath(args, "meanfield_trajectory.csv")
    write_csv(path, cols, meta)
    written.append(path)
    return written


def _run_semiclassical(args) -> list[str]:
    from .semiclassical import (
        build_phase_fp,
        kramers_rates,
        perturbative_cn,
        phase_spectrum,
    )

    params = _params_from_args(args)
    written = []
    rows = {"n_ex": [], "sector": [], "mode": [], "re_nu": [], "im_nu": []}
    for sector in ("even", "odd"):
        op = build_phase_fp(params, sector, args.trunc_m)
        spectrum = phase_spectrum(op)
        for idx, nu in enumerate(spectrum):
            rows["n_ex"].append(params.n_ex)
            rows["sector"].append(sector)
            rows["mode"].append(idx)
            rows["re_nu"].append(nu.real)
            rows["im_nu"].append(nu.imag)
    meta = provenance("semiclassical", params, trunc_m=args.trunc_m)
    path = _outpath(args, "phase_spectrum.csv")
    write_csv(path, rows, meta)
    written.append(path)

    if params.eta < params.eta_c:
        c_values, diag = perturbative_cn(params, args.trunc_m, args.modes)
        cols = {
            "eta_ratio": [params.eta_ratio] * args.modes,
            "n": list(range(1, args.modes + 1)),
            "c_n": list(c_values),
        }
        path = _outpath(args, "cn_table.csv")
        write_csv(path, cols, provenance("semiclassical", params, diagnostics=diag))
        written.append(path)
    else:
        rates = kramers_rates(params)
        path = _outpath(args, "kramers.json")
        write_json(
            path,
            {
                "gamma_right": rates.gamma_right,
                "gamma_left": rates.gamma_left,
                "gamma_gap": rates.gamma_gap,
                "suppression_ratio": rates.suppression_ratio,
            },
            meta,
        )
        written.append(path)
    return written


def _run_langevin(args) -> list[str]:
    from .langevin import (
        LangevinConfig,
        estimate_jump_rate,
        estimate_oscillation_lifetime,
        simulate_amplitude,
        simulate_intensity,
        simulate_phase,
    )
    from .meanfield import phase_potential_extrema

    params = _params_from_args(args)
    dt = args.dt if args.dt else 1e-3 / params.gamma1
    config = LangevinConfig(
        dt=dt,
        n_steps=args.n_steps,
        n_trajectories=args.n_traj,
        seed=args.seed,
        store_every=args.store_every,
    )
    estimators = []
    if args.process == "phase":
        phi0 = 0.0
        if params.eta > params.eta_c:
            phi0 = float(phase_potential_extrema(params)[0][0])
        ensemble = simulate_phase(params, config, initial_phase=phi0)
        if params.eta > params.eta_c:
            est = estimate_jump_rate(ensemble, params)
            estimators.append(("jump_rate", est.rate, est.stderr))
            estimators.append(("jump_frequency", est.jump_frequency,
                               math.sqrt(max(est.n_jumps, 1)) / est.total_time))
            estimators.append(("directionality", est.directionality, math.nan))
        else:
            est = estimate_oscillation_lifetime(ensemble, params)
            estimators.append(("oscillation_decay_rate", est.decay_rate, est.stderr))
    elif args.process == "intensity":
        ensemble = simulate_intensity(params, config)
        late = ensemble.values[:, -1]
        estimators.append(("stationary_variance", float(np.var(late)), math.nan))
        estimators.append(("stationary_mean", float(np.mean(late)), math.nan))
    else:
        alpha0 = complex(math.sqrt(params.n_ex), 0.0)
        ensemble = simulate_amplitude(params, config, initial_alpha=alpha0)
        late = np.abs(ensemble.values[:, ensemble.values.shape[1] // 2 :]) ** 2
        estimators.append(("mean_intensity", float(late.mean()), float(late.std())))
    meta = provenance(
        "langevin",
        params,
        process=args.process,
        dt=dt,
        n_steps=args.n_steps,
        n_trajectories=args.n_traj,
        seed=args.seed,
        backend=ensemble.backend,
    )
    cols = {
        "estimator": [e[0] for e in estimators],
        "value": [e[1] for e in estimators],
        "stderr": [e[2] for e in estimators],
        "n_trajectories": [args.n_traj] * len(estimators),
        "seed": [args.seed] * len(estimators),
    }
    path = _outpath(args, f"langevin_{args.process}.csv")
    write_csv(path, cols, meta)
    written = [path]
    if args.dump_raw:
        n_traj, n_stored = ensemble.values.shape
        raw = {
            "t": np.tile(ensemble.times, n_traj),
            "trajectory": np.repeat(np.arange(n_traj), n_stored),
        }
        if np.iscomplexobj(ensemble.values):
            raw["re"] = ensemble.values.real.ravel()
            raw["im"] = ensemble.values.imag.ravel()
        else:
            raw["value"] = ensemble.values.ravel()
        path = _outpath(args, f"langevin_{args.process}_raw.csv")
        write_csv(path, raw, meta)
        written.append(path)
    return written


def _initial_state(args, params: ModelParams, space):
    from .meanfield import fixed_points
    from .spectral import steady_state_direct

    if args.initial == "vacuum":
        return coherent_state(space, 0.0), "vacuum"
    if args.initial == "coherent-nex":
        return coherent_state(space, math.sqrt(params.n_ex)), "coherent(sqrt(n_ex))"
    if args.initial == "coherent-alpha-plus":
        alpha_plus, _ = fixed_points(params)
        return coherent_state(space, alpha_plus), "coherent(alpha_plus)"
    return steady_state_direct(params, space), "steady"


def _run_dynamics(args) -> list[str]:
    from .dynamics import evolve_lab, evolve_rotating, stroboscopic_series
    from .liouvillian import build_rotating_liouvillian

    params = _params_from_args(args, require_drive=args.frame != "rotating")
    d = _effective_cutoff(args, params)
    space = build_fock_space(d)
    rho0, label = _initial_state(args, params, space)
    meta = provenance(
        "dynamics", params, cutoff=d, frame=args.frame, initial_state=label
    )
    if args.frame == "rotating":
        t_grid = np.linspace(0.0, args.t_end / params.gamma1, args.n_times)
        superop = build_rotating_liouvillian(params, space)
        result = evolve_rotating(rho0, superop, t_grid, observables={"a": space.a})
        values = result.observables["a"]
        times = t_grid
    elif args.frame == "lab":
        t_grid = np.linspace(0.0, args.t_end / params.gamma1, args.n_times)
        result = evolve_lab(
            rho0, params, space, t_grid, dt=args.dt, observables={"a": space.a}
        )
        values = result.observables["a"]
        times = t_grid
    else:
        traj = stroboscopic_series(rho0, params, space, args.n_max)
        values = traj.values
        times = traj.times
    cols = {
        "t": times,
        "re": values.real,
        "im": values.imag,
        "frame": [args.frame] * len(times),
    }
    path = _outpath(args, f"dynamics_{args.frame}.csv")
    write_csv(path, cols, meta)
    return [path]


def _run_occupation(args) -> list[str]:
    from .dynamics import stationary_occupation_scan

    eta_grid = _parse_grid(args.grid) if args.grid else np.linspace(0.0, 2.0, 11)
    nex_list = _parse_list(args.nex_list)
    rows = stationary_occupation_scan(
        nex_list, eta_grid, delta_ratio=args.delta_ratio,
        gamma1=args.gamma1, cutoff=args.cutoff,
    )
    cols = {key: [row[key] for row in rows] for key in rows[0]}
    meta = provenance(
        "occupation", None, delta_ratio=args.delta_ratio,
        gamma1=args.gamma1, nex_list=nex_list, eta_grid=list(map(float, eta_grid)),
    )
    path = _outpath(args, "occupation.csv")
    write_csv(path, cols, meta)
    return [path]


def _run_ep(args) -> list[str]:
    from .semiclassical import detect_ep_semiclassical
    from .spectral import detect_ep, ep_scaling_fit

    if args.scan:
        nex_list = _parse_list(args.nex_list)
        delta_ratios = _parse_list(args.delta_ratios)
        rows = {"delta_ratio": [], "n_ex": [], "eta_ep": [], "eta_c": [], "delta_eta": []}
        fits = {}
        for dr in delta_ratios:
            points = []
            for n_ex in nex_list:
                base = ModelParams.from_ratios(
                    n_ex=n_ex, delta_ratio=dr, eta_ratio=1.0, gamma1=args.gamma1
                )
                trunc = max(args.trunc_m, 160 if n_ex > 2000 else 96)
                res = detect_ep_semiclassical(
                    base, (base.eta_c, 1.5 * base.eta_c), trunc, rel_tol=1e-6
                )
                points.append((n_ex, res.eta_ep))
                rows["delta_ratio"].append(dr)
                rows["n_ex"].append(n_ex)
                rows["eta_ep"].append(res.eta_ep)
                rows["eta_c"].append(base.eta_c)
                rows["delta_eta"].append(res.eta_ep - base.eta_c)
            fit = ep_scaling_fit(points, base.eta_c)
            fits[str(dr)] = {
                "beta": fit.beta,
                "beta_stderr": fit.beta_stderr,
                "prefactor": fit.prefactor,
            }
        meta = provenance("ep", None, method="semiclassical", scan=True,
                          gamma1=args.gamma1)
        paths = [_outpath(args, "ep_scaling.csv"), _outpath(args, "ep_fits.json")]
        write_csv(paths[0], rows, meta)
        write_json(paths[1], {"fits": fits}, meta)
        return paths

    if args.eta_ratio is None and args.eta is None:
        args.eta_ratio = 1.0  # eta is the bisection variable, not an input
    params = _params_from_args(args)
    lo_ratio, hi_ratio = (float(x) for x in args.eta_bracket.split(":"))
    bracket = (lo_ratio * params.eta_c, hi_ratio * params.eta_c)
    if args.method == "liouvillian":
        d = _effective_cutoff(args, params)
        res = detect_ep(params, build_fock_space(d), bracket)
        extra = {"cutoff": d}
    else:
        res = detect_ep_semiclassical(params, bracket, args.trunc_m)
        extra = {"trunc_m": args.trunc_m}
    meta = provenance("ep", params, method=args.method, **extra)
    path = _outpath(args, "ep.json")
    write_json(
        path,
        {
            "eta_ep": res.eta_ep,
            "eta_c": params.eta_c,
            "eta_ep_over_eta_c": res.eta_ep / params.eta_c,
            "iterations": res.iterations,
            "bracket": [res.eta_lo, res.eta_hi],
            "coalescence": res.coalescence,
        },
        meta,
    )
    return [path]


def _run_ssb(args) -> list[str]:
    from .liouvillian import build_rotating_liouvillian
    from .meanfield import fixed_points
    from .spectral import diagonalize, liouvillian_gap, symmetry_broken_states

    nex_list = _parse_list(args.nex_list)
    rows = {k: [] for k in (
        "n_ex", "cutoff", "gap", "trace_distance", "re_a_plus", "im_a_plus",
        "re_alpha_mf", "im_alpha_mf", "scale",
    )}
    gamma1 = args.gamma1
    for n_ex in nex_list:
        params = ModelParams.from_ratios(
            n_ex=n_ex, delta_ratio=args.delta_ratio,
            eta_ratio=args.eta_ratio if args.eta_ratio is not None else 2.0,
            eta=args.eta, gamma1=gamma1,
        )
        if params.eta <= params.eta_c:
            raise WrongRegimeError("ssb requires eta > eta_c")
        d = args.cutoff or default_cutoff(abs(fixed_points(params)[0]) ** 2)
        space = build_fock_space(d)
        dec = diagonalize(build_rotating_liouvillian(params, space))
        pair = symmetry_broken_states(dec)
        a_plus = complex(np.trace(space.a @ pair.rho_plus.rho))
        alpha_mf = fixed_points(params)[0]
        rows["n_ex"].append(n_ex)
        rows["cutoff"].append(d)
        rows["gap"].append(liouvillian_gap(dec).gap)
        rows["trace_distance"].append(pair.trace_distance_ss_xi)
        rows["re_a_plus"].append(a_plus.real)
        rows["im_a_plus"].append(a_plus.imag)
        rows["re_alpha_mf"].append(alpha_mf.real)
        rows["im_alpha_mf"].append(alpha_mf.imag)
        rows["scale"].append(pair.scale)
    meta = provenance(
        "ssb", None, delta_ratio=args.delta_ratio, gamma1=gamma1,
        eta_ratio=args.eta_ratio if args.eta_ratio is not None else 2.0,
        nex_list=nex_list,
    )
    path = _outpath(args, "ssb.csv")
    write_csv(path, rows, meta)
    return [path]


def _run_fig(args) -> list[str]:
    from . import figpipe

    return figpipe.run_figure(args)


_RUNNERS = {
    "spectrum": _run_spectrum,
    "bands": _run_bands,
    "meanfield": _run_meanfield,
    "semiclassical": _run_semiclassical,
    "langevin": _run_langevin,
    "dynamics": _run_dynamics,
    "occupation": _run_occupation,
    "ep": _run_ep,
    "ssb": _run_ssb,
    "fig": _run_fig,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config_file(args)
    os.makedirs(args.out, exist_ok=True)
    written = _RUNNERS[args.subcommand](args)
    for path in written:
        print(path)
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except SqvdpError as exc:
        print(f"sqvdp: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, PermissionError) as exc:
        print(f"sqvdp: io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
