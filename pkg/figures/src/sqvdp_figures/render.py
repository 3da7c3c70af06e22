"""The seven figure layouts.

Each renderer maps one pipeline manifest to a matplotlib figure: data
series come straight from the artifact columns, analytic overlays (decay
envelopes, activation-rate lines, fitted power laws) come from values
stored in the same pipeline, and the only processing applied here is
axis scaling.  Images are written atomically; a failed render leaves no
partial file.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .artifacts import ArtifactError, MissingInputError, read_csv, read_json, require_columns

__all__ = ["FigureSpec", "load_manifest", "render"]


@dataclass(frozen=True)
class FigureSpec:
    figure: int
    data_dir: str
    artifacts: dict[str, str]

    def path(self, name: str) -> str:
        if name not in self.artifacts:
            raise MissingInputError(f"manifest lists no artifact {name!r}")
        return os.path.join(self.data_dir, self.artifacts[name])


def load_manifest(data_dir: str, figure: int) -> FigureSpec:
    manifest_path = os.path.join(data_dir, "manifest.json")
    doc = read_json(manifest_path)
    if doc.get("figure") != figure:
        raise ArtifactError(
            f"{manifest_path}: manifest describes figure {doc.get('figure')}, "
            f"not {figure}"
        )
    return FigureSpec(figure=figure, data_dir=data_dir, artifacts=doc["artifacts"])


def render(spec: FigureSpec, out_path: str) -> str:
    """Render one figure to ``out_path``; returns the path written."""
    renderer = _RENDERERS.get(spec.figure)
    if renderer is None:
        raise ArtifactError(f"no renderer for figure {spec.figure}")
    fig = renderer(spec)
    directory = os.path.dirname(os.path.abspath(out_path)) or "."
    os.makedirs(directory, exist_ok=True)
    suffix = os.path.splitext(out_path)[1] or ".png"
    handle, tmp = tempfile.mkstemp(dir=directory, suffix=suffix)
    os.close(handle)
    try:
        fig.savefig(tmp, dpi=150, bbox_inches="tight")
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    finally:
        plt.close(fig)
    return out_path


def _fig1(spec: FigureSpec):
    path = spec.path("meanfield_curve")
    _, mf = read_csv(path)
    require_columns(path, mf, ["eta_ratio", "intensity_over_n_ex"])
    path = spec.path("occupation")
    _, occ = read_csv(path)
    require_columns(path, occ, ["n_ex", "eta_ratio", "occupation_over_n_ex"])
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(mf["eta_ratio"], mf["intensity_over_n_ex"], "k-", lw=1.8,
            label="mean field (period avg.)")
    for n_ex in sorted(set(occ["n_ex"])):
        sel = occ["n_ex"] == n_ex
        ax.plot(occ["eta_ratio"][sel], occ["occupation_over_n_ex"][sel], "--",
                marker="o", ms=3, label=rf"$\bar n_\mathrm{{ex}}={n_ex:g}$")
    ax.axvline(1.0, color="gray", lw=0.8, ls=":")
    ax.set_xlabel(r"$\eta/\eta_c$")
    ax.set_ylabel(r"$\langle \hat n \rangle_\mathrm{ss}/\bar n_\mathrm{ex}$")
    ax.legend(fontsize=7, frameon=False)
    return fig


def _fig2(spec: FigureSpec):
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.4))
    for ax, tag in zip(axes[0], ("a", "b")):
        for name in sorted(spec.artifacts):
            if not name.startswith(f"quantum_{tag}_"):
                continue
            path = spec.path(name)
            meta, cols = read_csv(path)
            require_columns(path, cols, ["t", "im"])
            n_ex = meta["params"]["n_ex"]
            ax.plot(cols["t"], cols["im"] / math.sqrt(n_ex), lw=1.0,
                    label=rf"$\bar n_\mathrm{{ex}}={n_ex:g}$")
        path = spec.path(f"meanfield_{tag}")
        mf_meta, mf = read_csv(path)
        require_columns(path, mf, ["t", "im_alpha"])
        scale = math.sqrt(mf_meta["params"]["n_ex"])
        ax.plot(mf["t"], mf["im_alpha"] / scale, "k--", lw=1.0, label="mean field")
        ax.set_xlabel(r"$\gamma_1 t$")
        ax.set_ylabel(r"$\mathrm{Im}\,\langle \hat a\rangle/\sqrt{\bar n_\mathrm{ex}}$")
        ax.legend(fontsize=6, frameon=False)

    ax = axes[1][0]
    for name, marker in (("spectrum_nex10", "^"), ("spectrum_nex20", "v")):
        doc = read_json(spec.path(name))
        eigs = np.array(doc["eigenvalues"])
        ax.plot(eigs[:, 0], eigs[:, 1], marker, ms=4, mfc="none",
                label=rf"$\bar n_\mathrm{{ex}}={doc['params']['n_ex']:g}$")
    ax.set_xlabel(r"$\mathrm{Re}\,\lambda/\gamma_1$")
    ax.set_ylabel(r"$\mathrm{Im}\,\lambda/\gamma_1$")
    ax.set_xlim(right=0.02)
    ax.legend(fontsize=7, frameon=False)

    ax = axes[1][1]
    path = spec.path("band_rates")
    _, rates = read_csv(path)
    require_columns(path, rates, ["n_ex", "band", "rate", "source"])
    path = spec.path("cn")
    _, cn = read_csv(path)
    require_columns(path, cn, ["n", "c_n"])
    for band in (1, 2, 3, 4):
        sel = (rates["band"] == band) & (rates["source"] == "liouvillian")
        ax.loglog(rates["n_ex"][sel], rates["rate"][sel], "o", ms=4)
        sel = (rates["band"] == band) & (rates["source"] == "phase_fp")
        ax.loglog(rates["n_ex"][sel], rates["rate"][sel], "o", ms=4, mfc="none")
        c_val = cn["c_n"][int(band) - 1]
        grid = np.geomspace(rates["n_ex"].min(), rates["n_ex"].max(), 50)
        ax.loglog(grid, c_val / grid, "k--", lw=0.8)
    ax.set_xlabel(r"$\bar n_\mathrm{ex}$")
    ax.set_ylabel(r"$\Gamma_n/\gamma_1$")
    fig.tight_layout()
    return fig


def _fig3(spec: FigureSpec):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    path = spec.path("gap_vs_nex")
    _, gaps = read_csv(path)
    require_columns(path, gaps, ["n_ex", "eta_ratio", "gamma1_rate", "gamma2_rate", "kramers"])
    ax = axes[0]
    for eta_ratio, filled in ((2.0, True), (3.0, False)):
        sel = gaps["eta_ratio"] == eta_ratio
        style = dict(mfc="none") if not filled else {}
        ax.semilogy(gaps["n_ex"][sel], gaps["gamma1_rate"][sel], "s", ms=5,
                    label=rf"$\Gamma_1$, $\eta/\eta_c={eta_ratio:g}$", **style)
        ax.semilogy(gaps["n_ex"][sel], gaps["gamma2_rate"][sel], "^", ms=5, **style)
        order = np.argsort(gaps["n_ex"][sel])
        ax.semilogy(gaps["n_ex"][sel][order], gaps["kramers"][sel][order],
                    "k--" if filled else "k-.", lw=1.0)
    ax.set_xscale("log")
    ax.set_xlabel(r"$\bar n_\mathrm{ex}$")
    ax.set_ylabel(r"$\Gamma/\gamma_1$")
    ax.legend(fontsize=7, frameon=False)

    ax = axes[1]
    path = spec.path("gap_vs_eta")
    _, sweep = read_csv(path)
    require_columns(path, sweep, ["eta_ratio", "gap", "fp_gap", "kramers"])
    ax.semilogy(sweep["eta_ratio"], sweep["gap"], "b-", lw=1.4, label="Liouvillian")
    ax.semilogy(sweep["eta_ratio"], sweep["fp_gap"], "r--", lw=1.2, label="phase FP")
    finite = np.isfinite(sweep["kramers"])
    ax.semilogy(sweep["eta_ratio"][finite], sweep["kramers"][finite], "k:",
                lw=1.2, label="activation rate")
    ax.set_xlabel(r"$\eta/\eta_c$")
    ax.set_ylabel(r"$\Gamma_1/\gamma_1$")
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    return fig


def _fig4(spec: FigureSpec):
    path = spec.path("dynamics_full")
    meta, full = read_csv(path)
    require_columns(path, full, ["t", "re"])
    path = spec.path("stroboscopic")
    _, strobo = read_csv(path)
    require_columns(path, strobo, ["t", "re"])
    envelope = read_json(spec.path("envelope"))
    fig, ax = plt.subplots(figsize=(7, 3.2))
    period = envelope["period"]
    ax.plot(full["t"] / period, full["re"], "-", color="tab:blue", lw=0.7,
            label=r"$\langle\hat a\rangle_L$ (full)")
    n_show = full["t"].max() / period
    sel = strobo["t"] <= n_show * period
    ax.plot(strobo["t"][sel] / period, strobo["re"][sel], "s", ms=3.5,
            color="tab:orange", label="stroboscopic")
    rate = envelope["gamma_gap_kramers"]
    amp = np.abs(strobo["re"][0])
    grid = np.linspace(0.0, n_show * period, 200)
    ax.plot(grid / period, amp * np.exp(-rate * grid), "k--", lw=1.0,
            label="activation envelope")
    ax.plot(grid / period, -amp * np.exp(-rate * grid), "k-.", lw=1.0)
    ax.set_xlabel(r"$t/T$")
    ax.set_ylabel(r"$\mathrm{Re}\,\langle \hat a\rangle_L$")
    ax.legend(fontsize=7, frameon=False, loc="upper right")
    return fig


def _fig5(spec: FigureSpec):
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
    path = spec.path("collision")
    _, coll = read_csv(path)
    require_columns(
        path, coll,
        ["eta_ratio", "re1", "im1", "re2", "im2", "fp_re1", "fp_im1", "fp_re2", "fp_im2"],
    )
    for ax, part in zip(axes[:2], ("im", "re")):
        for idx in ("1", "2"):
            ax.plot(coll["eta_ratio"], coll[f"{part}{idx}"], "b-", lw=1.3)
            ax.plot(coll["eta_ratio"], coll[f"fp_{part}{idx}"], "r--", lw=1.1)
        ax.set_xlabel(r"$\eta/\eta_c$")
        label = r"$\mathrm{Im}\,\lambda_{1,2}$" if part == "im" else r"$\mathrm{Re}\,\lambda_{1,2}$"
        ax.set_ylabel(label + r"$/\gamma_1$")

    ax = axes[2]
    path = spec.path("ep_scaling")
    _, scan = read_csv(path)
    require_columns(path, scan, ["delta_ratio", "n_ex", "delta_eta"])
    fits = read_json(spec.path("ep_fits"))["fits"]
    for delta_ratio in sorted(set(scan["delta_ratio"])):
        sel = scan["delta_ratio"] == delta_ratio
        ax.loglog(scan["n_ex"][sel], scan["delta_eta"][sel], "o", ms=4, mfc="none",
                  label=rf"$\Delta/\gamma_1={delta_ratio:g}$")
        fit = fits[f"{delta_ratio:g}"]
        grid = np.geomspace(scan["n_ex"][sel].min(), scan["n_ex"][sel].max(), 40)
        ax.loglog(grid, fit["prefactor"] * grid ** (-fit["beta"]), "k--", lw=0.9)
    ax.set_xlabel(r"$\bar n_\mathrm{ex}$")
    ax.set_ylabel(r"$\Delta\eta_c/\gamma_1$")
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    return fig


def _fig6(spec: FigureSpec):
    path = spec.path("fp_rate_vs_nex")
    _, rates = read_csv(path)
    require_columns(path, rates, ["eta_ratio", "n_ex", "fp_rate", "perturbative_rate"])
    ratios = sorted(set(rates["eta_ratio"]))
    fig, axes = plt.subplots(1, len(ratios), figsize=(4.5 * len(ratios), 3.2))
    axes = np.atleast_1d(axes)
    for ax, eta_ratio in zip(axes, ratios):
        sel = rates["eta_ratio"] == eta_ratio
        ax.loglog(rates["n_ex"][sel], rates["fp_rate"][sel], "o", ms=4, mfc="none",
                  color="tab:red", label="phase FP")
        ax.loglog(rates["n_ex"][sel], rates["perturbative_rate"][sel], "k--",
                  lw=1.0, label="first order")
        ax.set_title(rf"$\eta/\eta_c = {eta_ratio:g}$", fontsize=9)
        ax.set_xlabel(r"$\bar n_\mathrm{ex}$")
        ax.set_ylabel(r"$\Gamma_1/\gamma_1$")
        ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    return fig


def _fig7(spec: FigureSpec):
    path = spec.path("ssb")
    _, ssb = read_csv(path)
    require_columns(path, ssb, ["n_ex", "trace_distance", "re_a_plus", "re_alpha_mf"])
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    axes[0].loglog(ssb["n_ex"], ssb["trace_distance"], "o-", ms=4)
    axes[0].set_xlabel(r"$\bar n_\mathrm{ex}$")
    axes[0].set_ylabel(r"$D(\hat\rho_\mathrm{ss}, \hat\xi)$")
    axes[1].plot(ssb["n_ex"], ssb["re_a_plus"], "o", ms=4, label=r"$\mathrm{Re}\langle\hat a\rangle_+$")
    axes[1].plot(ssb["n_ex"], ssb["re_alpha_mf"], "k-", lw=1.0, label=r"$\mathrm{Re}\,\alpha_+$")
    axes[1].set_xlabel(r"$\bar n_\mathrm{ex}$")
    axes[1].legend(fontsize=7, frameon=False)
    fig.tight_layout()
    return fig


_RENDERERS = {1: _fig1, 2: _fig2, 3: _fig3, 4: _fig4, 5: _fig5, 6: _fig6, 7: _fig7}
