"""Summary tables, CSV plot data, and figure rendering for experiments."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import lut, problems
from .indicators import BEST, TIE, label_table


def collect_hv_samples(cfg) -> dict:
    """Final-generation HV per (problem, algorithm) from the record files."""
    from .runner import read_record, record_path

    samples = {}
    for pid in cfg.problems:
        per_algo = {}
        for algo in cfg.algorithms:
            values = []
            for k in range(cfg.runs):
                rec = read_record(record_path(cfg, pid, algo, k))
                values.append(rec["generations"][-1]["hv"])
            per_algo[algo] = values
        samples[pid] = per_algo
    return samples


def build_summary(cfg) -> dict:
    samples = collect_hv_samples(cfg)
    table = {}
    for pid, per_algo in samples.items():
        labels = label_table(per_algo)
        table[str(pid)] = {
            algo: {"mean": round(mean, 4), "std": round(std, 4), "label": label}
            for algo, (mean, std, label) in labels.items()
        }
    return {
        "config": {
            "problems": list(cfg.problems),
            "algorithms": list(cfg.algorithms),
            "runs": cfg.runs,
            "evaluations": cfg.evaluations,
            "seed_base": cfg.seed_base,
            "perturb": cfg.perturb,
        },
        "hypervolume": table,
    }


def format_summary_text(summary: dict) -> str:
    """Aligned text table: one problem per row, 'mean (std)label' per cell.

    The best algorithm and its statistical ties carry a leading '*'.
    """
    algos = summary["config"]["algorithms"]
    width = max(20, max(len(a) for a in algos) + 2)
    header = "Problem".ljust(10) + "".join(a.ljust(width) for a in algos)
    lines = [header, "-" * len(header)]
    for pid in summary["config"]["problems"]:
        row = summary["hypervolume"][str(pid)]
        cells = []
        for algo in algos:
            e = row[algo]
            bold = "*" if e["label"] in (BEST, TIE) else " "
            cells.append(f"{bold}{e['mean']:.4f} ({e['std']:.4f}){e['label']}".ljust(width))
        lines.append(f"MOP{pid}".ljust(10) + "".join(cells))
    return "\n".join(lines) + "\n"


def write_summary(output_dir: Path, summary: dict):
    output_dir = Path(output_dir)
    with open(output_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
    with open(output_dir / "summary.txt", "w") as fh:
        fh.write(format_summary_text(summary))


# -- sampling CSV + figures ---------------------------------------------------

def write_sample_csv(path: Path, genotypes, table: lut.CostTable,
                     metrics=lut.METRICS):
    columns = {m: lut.compose_batch(genotypes, m, table) for m in metrics}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(metrics))
        for i in range(len(genotypes)):
            writer.writerow([repr(float(columns[m][i])) for m in metrics])
    return columns


def render_sample_figures(out_dir: Path, columns: dict) -> list:
    """Histograms of flops/params and the flops-vs-energy scatter."""
    out_dir = Path(out_dir)
    paths = []
    for metric in (lut.FLOPS, lut.PARAMS):
        if metric not in columns:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.hist(columns[metric], bins=60, color="steelblue")
        ax.set_xlabel(metric)
        ax.set_ylabel("architectures")
        ax.set_title(f"Distribution of {metric} over random samples")
        p = out_dir / f"sample_hist_{metric}.png"
        fig.savefig(p, dpi=120, bbox_inches="tight")
        plt.close(fig)
        paths.append(p)
    if lut.FLOPS in columns and lut.ENERGY_H2 in columns:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.scatter(columns[lut.FLOPS], columns[lut.ENERGY_H2], s=4, alpha=0.4)
        ax.set_xlabel(lut.FLOPS)
        ax.set_ylabel(lut.ENERGY_H2)
        ax.set_title("Edge-device energy vs FLOPs")
        p = out_dir / "sample_scatter_flops_energy.png"
        fig.savefig(p, dpi=120, bbox_inches="tight")
        plt.close(fig)
        paths.append(p)
    return paths


# -- experiment report figures ------------------------------------------------

def render_report_figures(cfg, out_dir: Path) -> list:
    """HV trajectories (mean over runs) and final fronts for 2-D problems."""
    from .runner import read_record, record_path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for pid in cfg.problems:
        fig, ax = plt.subplots(figsize=(6, 4))
        for algo in cfg.algorithms:
            traces = []
            for k in range(cfg.runs):
                rec = read_record(record_path(cfg, pid, algo, k))
                traces.append([g["hv"] for g in rec["generations"]])
            n_gen = min(len(t) for t in traces)
            mean = np.mean([t[:n_gen] for t in traces], axis=0)
            evals = [g["evals"] for g in rec["generations"][:n_gen]]
            ax.plot(evals, mean, label=algo)
        ax.set_xlabel("evaluations")
        ax.set_ylabel("hypervolume")
        ax.set_title(f"MOP{pid}: mean HV trajectory over {cfg.runs} runs")
        ax.legend(fontsize=8)
        p = out_dir / f"hv_trajectory_p{pid:02d}.png"
        fig.savefig(p, dpi=120, bbox_inches="tight")
        plt.close(fig)
        paths.append(p)

        problem = problems.get_problem(pid)
        if problem.M == 2:
            fig, ax = plt.subplots(figsize=(6, 4))
            for algo in cfg.algorithms:
                rec = read_record(record_path(cfg, pid, algo, 0))
                front = np.asarray(rec["final"]["front"])
                order = np.argsort(front[:, 0])
                ax.plot(front[order, 0], front[order, 1], "o-", ms=3, lw=0.8, label=algo)
            ax.set_xlabel(problem.objectives[0])
            ax.set_ylabel(problem.objectives[1])
            ax.set_title(f"MOP{pid}: final non-dominated fronts (run 0)")
            ax.legend(fontsize=8)
            p = out_dir / f"front_p{pid:02d}.png"
            fig.savefig(p, dpi=120, bbox_inches="tight")
            plt.close(fig)
            paths.append(p)
    return paths


def write_hv_csv(cfg, out_path: Path):
    """Delimited per-run final HV values alongside the rendered figures."""
    samples = collect_hv_samples(cfg)
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["problem", "algorithm", "run", "hv"])
        for pid, per_algo in samples.items():
            for algo, values in per_algo.items():
                for k, hv in enumerate(values):
                    writer.writerow([pid, algo, k, repr(float(hv))])
