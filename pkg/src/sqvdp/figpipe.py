"""Bundled data pipelines behind the `fig <n>` subcommand.

Each pipeline reruns the workflows behind one of the package's seven
standard demonstration figures at desk scale and writes a manifest
(`manifest.json`) listing every artifact with full provenance, so the
plotting layer can consume a directory without knowing how it was made.
Pipelines write only data; rendering lives in the separate figures
package.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .artifacts import provenance, write_csv, write_json
from .fock import build_fock_space, coherent_state, default_cutoff
from .params import ModelParams

__all__ = ["run_figure"]


def _fig_params(n_ex, delta_ratio, eta_ratio, gamma1=1.0, omega_s=0.0):
    return ModelParams.from_ratios(
        n_ex=n_ex, delta_ratio=delta_ratio, eta_ratio=eta_ratio,
        gamma1=gamma1, omega_s=omega_s,
    )


def _finish(outdir: str, number: int, artifacts: dict[str, str], meta: dict):
    manifest = os.path.join(outdir, "manifest.json")
    write_json(manifest, {"figure": number, "artifacts": artifacts}, meta)
    return [manifest] + [os.path.join(outdir, rel) for rel in artifacts.values()]


def run_figure(args) -> list[str]:
    outdir = os.path.join(args.out, f"fig{args.number}")
    os.makedirs(outdir, exist_ok=True)
    runner = {
        1: _fig1, 2: _fig2, 3: _fig3, 4: _fig4, 5: _fig5, 6: _fig6, 7: _fig7,
    }[args.number]
    return runner(args, outdir)


# -- figure 1: bifurcation diagram and occupation collapse ------------------


def _fig1(args, outdir):
    from .dynamics import stationary_occupation_scan

    delta_ratio = args.delta_ratio
    eta_grid = np.linspace(0.0, 2.0, 41)
    # period-averaged mean-field intensity over n_ex: 1 below the
    # bifurcation, 1 + 2 sqrt(4 eta^2 - delta^2)/gamma1 above (n_ex-free)
    ratio = np.ones_like(eta_grid)
    delta = delta_ratio * args.gamma1
    for i, er in enumerate(eta_grid):
        eta = er * abs(delta) / 2.0
        if 4.0 * eta**2 > delta**2:
            ratio[i] = 1.0 + 2.0 * math.sqrt(4.0 * eta**2 - delta**2) / args.gamma1
    meta = provenance("fig1", None, delta_ratio=delta_ratio, gamma1=args.gamma1)
    write_csv(
        os.path.join(outdir, "meanfield_curve.csv"),
        {"eta_ratio": eta_grid, "intensity_over_n_ex": ratio},
        meta,
    )
    nex_list = [1.0, 5.0, 10.0]
    rows = stationary_occupation_scan(
        nex_list, np.linspace(0.0, 2.0, 11), delta_ratio=delta_ratio,
        gamma1=args.gamma1,
    )
    write_csv(
        os.path.join(outdir, "occupation.csv"),
        {key: [row[key] for row in rows] for key in rows[0]},
        provenance("fig1", None, delta_ratio=delta_ratio, nex_list=nex_list),
    )
    return _finish(outdir, 1, {
        "meanfield_curve": "meanfield_curve.csv",
        "occupation": "occupation.csv",
    }, meta)


# -- figure 2: continuous time-crystal signatures ---------------------------


def _fig2(args, outdir):
    from .dynamics import evolve_rotating
    from .liouvillian import build_rotating_liouvillian
    from .meanfield import integrate_mf, limit_cycle_frequency
    from .spectral import band_structure, diagonalize, spectrum_records
    from .semiclassical import build_phase_fp, phase_spectrum, perturbative_cn

    artifacts = {}
    meta_all = provenance("fig2", None, delta_ratio=args.delta_ratio)
    t_grid = np.linspace(0.0, 120.0 / args.gamma1, 481)

    for tag, eta_ratio in (("a", 0.4), ("b", 0.8)):
        for n_ex in (5.0, 10.0, 20.0):
            params = _fig_params(n_ex, args.delta_ratio, eta_ratio, args.gamma1)
            d = default_cutoff(n_ex)
            space = build_fock_space(d)
            superop = build_rotating_liouvillian(params, space)
            rho0 = coherent_state(space, math.sqrt(n_ex))
            result = evolve_rotating(rho0, superop, t_grid, observables={"a": space.a})
            name = f"quantum_{tag}_nex{int(n_ex)}"
            write_csv(
                os.path.join(outdir, f"{name}.csv"),
                {
                    "t": t_grid,
                    "re": result.observables["a"].real,
                    "im": result.observables["a"].imag,
                    "frame": ["rotating"] * t_grid.size,
                },
                provenance("fig2", params, cutoff=d, initial_state="coherent(sqrt(n_ex))"),
            )
            artifacts[name] = f"{name}.csv"
        params = _fig_params(20.0, args.delta_ratio, eta_ratio, args.gamma1)
        mf = integrate_mf(math.sqrt(20.0), params, 120.0 / args.gamma1, 5e-3)
        stride = max(1, mf.times.size // 2000)
        name = f"meanfield_{tag}"
        write_csv(
            os.path.join(outdir, f"{name}.csv"),
            {
                "t": mf.times[::stride],
                "re_alpha": mf.alpha[::stride].real,
                "im_alpha": mf.alpha[::stride].imag,
                "N": mf.intensity[::stride],
                "phi": mf.phase[::stride],
            },
            provenance("fig2", params),
        )
        artifacts[name] = f"{name}.csv"

    # panel (c): leading eigenvalues at two sizes
    for n_ex in (10.0, 20.0):
        params = _fig_params(n_ex, args.delta_ratio, 0.4, args.gamma1)
        d = default_cutoff(n_ex)
        dec = diagonalize(
            build_rotating_liouvillian(params, build_fock_space(d)), want_modes=False
        )
        name = f"spectrum_nex{int(n_ex)}"
        write_json(
            os.path.join(outdir, f"{name}.json"),
            {"cutoff": d, "params": params.as_dict(),
             "eigenvalues": spectrum_records(dec)[:120]},
            provenance("fig2", params, cutoff=d),
        )
        artifacts[name] = f"{name}.json"

    # panel (d): fundamental-band rates vs n_ex, quantum and semiclassical
    rows = {"n_ex": [], "band": [], "rate": [], "source": []}
    for n_ex in (5.0, 10.0, 15.0, 20.0):
        params = _fig_params(n_ex, args.delta_ratio, 0.4, args.gamma1)
        d = default_cutoff(n_ex)
        dec = diagonalize(
            build_rotating_liouvillian(params, build_fock_space(d)), want_modes=False
        )
        bands = band_structure(dec, limit_cycle_frequency(params), n_bands=4)
        for n, rate in enumerate(bands.fundamental_rates, start=1):
            rows["n_ex"].append(n_ex)
            rows["band"].append(n)
            rows["rate"].append(rate)
            rows["source"].append("liouvillian")
    for n_ex in np.geomspace(5.0, 500.0, 10):
        params = _fig_params(n_ex, args.delta_ratio, 0.4, args.gamma1)
        rates = []
        for sector in ("even", "odd"):
            w = phase_spectrum(build_phase_fp(params, sector, args.trunc_m))
            decay = -w.real
            rates.extend(decay[decay > 1e-12])
        for n, rate in enumerate(sorted(rates)[:8:2], start=1):
            # conjugate pairs double every rate; take every other
            rows["n_ex"].append(float(n_ex))
            rows["band"].append(n)
            rows["rate"].append(float(rate))
            rows["source"].append("phase_fp")
    params = _fig_params(50.0, args.delta_ratio, 0.4, args.gamma1)
    c_values, _ = perturbative_cn(params, args.trunc_m, 4)
    write_csv(
        os.path.join(outdir, "band_rates.csv"), rows,
        provenance("fig2", None, delta_ratio=args.delta_ratio, eta_ratio=0.4),
    )
    write_csv(
        os.path.join(outdir, "cn.csv"),
        {"n": [1, 2, 3, 4], "c_n": list(c_values)},
        provenance("fig2", params, trunc_m=args.trunc_m),
    )
    artifacts["band_rates"] = "band_rates.csv"
    artifacts["cn"] = "cn.csv"
    return _finish(outdir, 2, artifacts, meta_all)


# -- figure 3: gap closure in the parity-broken phase ------------------------


def _fig3(args, outdir):
    from .liouvillian import build_rotating_liouvillian
    from .meanfield import fixed_points
    from .semiclassical import kramers_rates, phase_gap
    from .spectral import sector_eigenvalues

    artifacts = {}
    meta = provenance("fig3", None, delta_ratio=args.delta_ratio)

    rows = {"n_ex": [], "eta_ratio": [], "gamma1_rate": [], "gamma2_rate": [],
            "kramers": [], "fp_gap": []}
    for eta_ratio in (2.0, 3.0):
        for n_ex in (5.0, 10.0, 15.0, 20.0):
            params = _fig_params(n_ex, args.delta_ratio, eta_ratio, args.gamma1)
            d = default_cutoff(abs(fixed_points(params)[0]) ** 2)
            w = sector_eigenvalues(
                build_rotating_liouvillian(params, build_fock_space(d)), "odd"
            )
            rows["n_ex"].append(n_ex)
            rows["eta_ratio"].append(eta_ratio)
            rows["gamma1_rate"].append(-w[0].real)
            rows["gamma2_rate"].append(-w[1].real)
            rows["kramers"].append(kramers_rates(params).gamma_gap)
            rows["fp_gap"].append(phase_gap(params, args.trunc_m))
    write_csv(os.path.join(outdir, "gap_vs_nex.csv"), rows, meta)
    artifacts["gap_vs_nex"] = "gap_vs_nex.csv"

    rows = {"eta_ratio": [], "gap": [], "fp_gap": [], "kramers": []}
    n_ex = 10.0
    d = default_cutoff(abs(fixed_points(
        _fig_params(n_ex, args.delta_ratio, 3.0, args.gamma1)
    )[0]) ** 2)
    space = build_fock_space(d)
    for eta_ratio in np.linspace(1.05, 3.0, 11):
        params = _fig_params(n_ex, args.delta_ratio, float(eta_ratio), args.gamma1)
        w = sector_eigenvalues(build_rotating_liouvillian(params, space), "odd")
        rows["eta_ratio"].append(float(eta_ratio))
        rows["gap"].append(-w[0].real)
        rows["fp_gap"].append(phase_gap(params, args.trunc_m))
        rows["kramers"].append(
            kramers_rates(params).gamma_gap if params.eta > params.eta_c else math.nan
        )
    write_csv(
        os.path.join(outdir, "gap_vs_eta.csv"), rows,
        provenance("fig3", None, n_ex=n_ex, cutoff=d, delta_ratio=args.delta_ratio),
    )
    artifacts["gap_vs_eta"] = "gap_vs_eta.csv"
    return _finish(outdir, 3, artifacts, meta)


# -- figure 4: discrete time crystal in the lab frame ------------------------


def _fig4(args, outdir):
    from .dynamics import evolve_lab, stroboscopic_series
    from .liouvillian import build_rotating_liouvillian
    from .meanfield import fixed_points
    from .semiclassical import kramers_rates
    from .spectral import diagonalize, liouvillian_gap

    omega_s = args.omega_s if args.omega_s > 0 else 20.0 * math.pi * args.gamma1
    params = _fig_params(20.0, args.delta_ratio, 2.0, args.gamma1, omega_s=omega_s)
    d = args.cutoff or default_cutoff(abs(fixed_points(params)[0]) ** 2)
    space = build_fock_space(d)
    rho0 = coherent_state(space, fixed_points(params)[0])
    period = params.period
    meta = provenance("fig4", params, cutoff=d, initial_state="coherent(alpha_plus)")

    n_periods_full = 60
    t_grid = period * np.arange(0, n_periods_full + 1, 0.25)
    result = evolve_lab(rho0, params, space, t_grid, dt=period / 400.0,
                        observables={"a": space.a})
    write_csv(
        os.path.join(outdir, "dynamics_full.csv"),
        {
            "t": t_grid,
            "re": result.observables["a"].real,
            "im": result.observables["a"].imag,
            "frame": ["lab"] * t_grid.size,
        },
        meta,
    )

    dec = diagonalize(build_rotating_liouvillian(params, space))
    traj = stroboscopic_series(rho0, params, space, 3000, dec=dec)
    write_csv(
        os.path.join(outdir, "stroboscopic.csv"),
        {
            "t": traj.times,
            "re": traj.values.real,
            "im": traj.values.imag,
            "frame": ["lab_stroboscopic"] * traj.times.size,
        },
        meta,
    )
    write_json(
        os.path.join(outdir, "envelope.json"),
        {
            "gamma_gap_kramers": kramers_rates(params).gamma_gap,
            "gamma_1": liouvillian_gap(dec).gap,
            "period": period,
        },
        meta,
    )
    return _finish(outdir, 4, {
        "dynamics_full": "dynamics_full.csv",
        "stroboscopic": "stroboscopic.csv",
        "envelope": "envelope.json",
    }, meta)


# -- figure 5: exceptional point and scaling law ------------------------------


def _fig5(args, outdir):
    from .liouvillian import build_rotating_liouvillian
    from .semiclassical import build_phase_fp, detect_ep_semiclassical, phase_spectrum
    from .spectral import ep_scaling_fit, sector_eigenvalues

    artifacts = {}
    n_ex = 20.0
    params0 = _fig_params(n_ex, args.delta_ratio, 1.0, args.gamma1)
    d = args.cutoff or default_cutoff(n_ex * 1.4)
    space = build_fock_space(d)
    rows = {"eta_ratio": [], "re1": [], "im1": [], "re2": [], "im2": [],
            "fp_re1": [], "fp_im1": [], "fp_re2": [], "fp_im2": []}
    for eta_ratio in np.linspace(1.0, 1.6, 11):
        params = _fig_params(n_ex, args.delta_ratio, float(eta_ratio), args.gamma1)
        w = sector_eigenvalues(build_rotating_liouvillian(params, space), "odd")
        fp = phase_spectrum(build_phase_fp(params, "odd", args.trunc_m))
        rows["eta_ratio"].append(float(eta_ratio))
        rows["re1"].append(w[0].real)
        rows["im1"].append(w[0].imag)
        rows["re2"].append(w[1].real)
        rows["im2"].append(w[1].imag)
        rows["fp_re1"].append(fp[0].real)
        rows["fp_im1"].append(fp[0].imag)
        rows["fp_re2"].append(fp[1].real)
        rows["fp_im2"].append(fp[1].imag)
    meta = provenance("fig5", params0, cutoff=d, n_ex=n_ex)
    write_csv(os.path.join(outdir, "collision.csv"), rows, meta)
    artifacts["collision"] = "collision.csv"

    scan_rows = {"delta_ratio": [], "n_ex": [], "eta_ep": [], "eta_c": [],
                 "delta_eta": []}
    fits = {}
    for dr in (0.05, 0.1, 0.2):
        points = []
        for nex in (500.0, 1000.0, 2000.0, 5000.0, 10000.0):
            base = ModelParams.from_ratios(
                n_ex=nex, delta_ratio=dr, eta_ratio=1.0, gamma1=args.gamma1
            )
            trunc = 160 if nex > 2000 else 96
            res = detect_ep_semiclassical(
                base, (base.eta_c, 1.5 * base.eta_c), trunc, rel_tol=1e-6
            )
            points.append((nex, res.eta_ep))
            scan_rows["delta_ratio"].append(dr)
            scan_rows["n_ex"].append(nex)
            scan_rows["eta_ep"].append(res.eta_ep)
            scan_rows["eta_c"].append(base.eta_c)
            scan_rows["delta_eta"].append(res.eta_ep - base.eta_c)
        fit = ep_scaling_fit(points, base.eta_c)
        fits[str(dr)] = {"beta": fit.beta, "beta_stderr": fit.beta_stderr,
                         "prefactor": fit.prefactor}
    write_csv(os.path.join(outdir, "ep_scaling.csv"), scan_rows,
              provenance("fig5", None, method="semiclassical"))
    write_json(os.path.join(outdir, "ep_fits.json"), {"fits": fits},
               provenance("fig5", None, method="semiclassical"))
    artifacts["ep_scaling"] = "ep_scaling.csv"
    artifacts["ep_fits"] = "ep_fits.json"
    return _finish(outdir, 5, artifacts, meta)


# -- figure 6: approach to the perturbative phase-diffusion regime ------------


def _fig6(args, outdir):
    from .semiclassical import build_phase_fp, perturbative_cn, phase_spectrum

    artifacts = {}
    meta = provenance("fig6", None, delta_ratio=args.delta_ratio)
    rows = {"eta_ratio": [], "n_ex": [], "fp_rate": [], "perturbative_rate": []}
    c1_values = {}
    for eta_ratio in (0.6, 0.9):
        params_c = _fig_params(100.0, args.delta_ratio, eta_ratio, args.gamma1)
        c1 = perturbative_cn(params_c, args.trunc_m, 1)[0][0]
        c1_values[str(eta_ratio)] = float(c1)
        for n_ex in np.geomspace(10.0, 3000.0, 12):
            params = _fig_params(float(n_ex), args.delta_ratio, eta_ratio, args.gamma1)
            w = phase_spectrum(build_phase_fp(params, "odd", args.trunc_m))
            rows["eta_ratio"].append(eta_ratio)
            rows["n_ex"].append(float(n_ex))
            rows["fp_rate"].append(-w[0].real)
            rows["perturbative_rate"].append(c1 * args.gamma1 / n_ex)
    write_csv(os.path.join(outdir, "fp_rate_vs_nex.csv"), rows, meta)
    write_json(os.path.join(outdir, "c1.json"), {"c1": c1_values}, meta)
    artifacts["fp_rate_vs_nex"] = "fp_rate_vs_nex.csv"
    artifacts["c1"] = "c1.json"
    return _finish(outdir, 6, artifacts, meta)


# -- figure 7: symmetry-broken states -----------------------------------------


def _fig7(args, outdir):
    import argparse as _argparse

    from .cli import _run_ssb

    ssb_args = _argparse.Namespace(
        nex_list="5,10,15,20",
        delta_ratio=args.delta_ratio,
        eta_ratio=2.0,
        eta=None,
        gamma1=args.gamma1,
        cutoff=args.cutoff,
        out=outdir,
    )
    written = _run_ssb(ssb_args)
    meta = provenance("fig7", None, delta_ratio=args.delta_ratio, eta_ratio=2.0)
    return _finish(outdir, 7, {"ssb": os.path.basename(written[0])}, meta)
