"""Acceptance report rendering: delimited table plus diagnostic figures.

The `report` CLI path runs the acceptance bundle and writes, into one
output directory, `acceptance_report.csv` (one row per criterion), a
`summary.json` echoing the configuration, and a set of PNG figures
comparing empirical histograms against the exact laws.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import acceptance, theory
from .simulate import StatsReport

plt.rcParams.update(
    {
        "figure.dpi": 130,
        "savefig.bbox": "tight",
        "axes.grid": True,
        "grid.alpha": 0.3,
        "axes.spines.right": False,
        "axes.spines.top": False,
    }
)


def write_table(results: list[acceptance.CriterionResult], path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["criterion", "name", "status", "seconds", "details"])
        for res in results:
            detail = "; ".join(
                f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                for k, v in sorted(res.scalar_details().items())
            )
            writer.writerow(
                [res.number, res.name, res.status, f"{res.seconds:.1f}", detail]
            )


def _fig_reset_intervals(outdir: Path) -> list[str]:
    names = []
    for n in (2, 3, 5):
        rep: StatsReport = acceptance.base_run(n)
        hist = {int(k): v for k, v in rep.hists["reset_intervals"].items()}
        total = sum(hist.values())
        p0 = float(theory.reset_probability(n))
        kmax = min(max(hist), int(np.ceil(np.log(1e-5) / np.log(1 - p0))) + 1)
        ks = np.arange(1, kmax + 1)
        emp = np.array([hist.get(int(k), 0) / total for k in ks])
        geo = p0 * (1 - p0) ** (ks - 1)
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.bar(ks, emp, width=0.8, alpha=0.6, label="simulated")
        ax.plot(ks, geo, "ko-", ms=3, lw=1, label=f"Geo({p0:.3g})")
        ax.set_yscale("log")
        ax.set_xlabel("renewal interval (layers)")
        ax.set_ylabel("probability")
        ax.set_title(f"reset intervals, n={n}")
        ax.legend()
        name = f"reset_intervals_n{n}.png"
        fig.savefig(outdir / name)
        plt.close(fig)
        names.append(name)
    return names


def _fig_clt(outdir: Path) -> list[str]:
    names = []
    specs = (
        ("loop count", 4, acceptance.SEED_CLT_LOOPS, "loops",
         float(theory.loop_rate(4)), float(theory.loop_rate_variance(4)),
         "loop_clt_n4.png"),
        ("string length", 3, acceptance.SEED_CLT_STRING, "string_verts",
         float(theory.transverse_per_level_mean(3)),
         float(theory.transverse_clt_variance(3)),
         "string_clt_n3.png"),
    )
    t = acceptance.CLT_T
    for label, n, seed, attr, mu, sigma2, name in specs:
        vals = acceptance._replica_finals(n, t, acceptance.CLT_REPLICAS, seed, attr)
        std = (np.array(vals) - mu * t) / np.sqrt(sigma2 * t)
        xs = np.linspace(-4, 4, 200)
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.hist(std, bins=40, density=True, alpha=0.6, label="standardized replicas")
        ax.plot(xs, np.exp(-xs**2 / 2) / np.sqrt(2 * np.pi), "k-", lw=1.2,
                label="N(0,1)")
        ax.set_xlabel("standardized value")
        ax.set_ylabel("density")
        ax.set_title(f"{label} CLT, n={n}, t={t}")
        ax.legend()
        fig.savefig(outdir / name)
        plt.close(fig)
        names.append(name)
    return names


def _fig_local_laws(outdir: Path) -> list[str]:
    names = []
    for n in (3, 5):
        rep = acceptance.local_law_report(n)
        fig, axes = plt.subplots(1, 2, figsize=(8, 3.2))
        for ax, key, law in (
            (axes[0], "V", theory.level_occupancy_dist(n)),
            (axes[1], "E", theory.layer_crossing_dist(n)),
        ):
            hist = {int(k): v for k, v in rep.hists[key].items()}
            total = sum(hist.values())
            support = law.support
            emp = [hist.get(v, 0) / total for v in support]
            exact = [float(p) for _, p in law.probs]
            x = np.arange(len(support))
            ax.bar(x - 0.2, emp, width=0.4, label="simulated")
            ax.bar(x + 0.2, exact, width=0.4, label="exact")
            ax.set_xticks(x, [str(v) for v in support])
            ax.set_xlabel(key)
            ax.set_ylabel("probability")
            ax.legend()
        fig.suptitle(f"string local laws, n={n}")
        name = f"local_laws_n{n}.png"
        fig.savefig(outdir / name)
        plt.close(fig)
        names.append(name)
    return names


def _fig_shape_series(outdir: Path) -> list[str]:
    ells = np.arange(1, 21)
    gaps = []
    partial = 0.0
    for ell in ells:
        word = "A" * (ell - 1) + "B" + "A" * (ell - 1) + "B"
        partial += float(theory.shape_rate(2, word).mu)
        gaps.append(float(theory.loop_rate(2)) - partial)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.semilogy(ells, gaps, "o-", ms=4)
    ax.set_xlabel("ladder shapes summed")
    ax.set_ylabel("gap to total loop rate")
    ax.set_title("shape-rate series at n=2")
    name = "shape_series_n2.png"
    fig.savefig(outdir / name)
    plt.close(fig)
    return [name]


def render_report(
    outdir: Path,
    numbers: Optional[list[int]] = None,
    figures: bool = True,
    progress=None,
) -> tuple[list[acceptance.CriterionResult], list[str]]:
    """Run the acceptance bundle and write table, summary, and figures."""
    outdir.mkdir(parents=True, exist_ok=True)
    results = acceptance.run_criteria(numbers, progress=progress)
    write_table(results, outdir / "acceptance_report.csv")
    fig_names: list[str] = []
    if figures and (numbers is None):
        fig_names += _fig_reset_intervals(outdir)
        fig_names += _fig_clt(outdir)
        fig_names += _fig_local_laws(outdir)
        fig_names += _fig_shape_series(outdir)
    summary = {
        "criteria": [
            {
                "number": r.number,
                "name": r.name,
                "status": r.status,
                "details": r.scalar_details(),
            }
            for r in results
        ],
        "figures": fig_names,
        "all_passed": all(r.passed for r in results),
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return results, fig_names
