"""File-based figure rendering for the CLI.

Each save_* function takes the same data its CSV counterpart serializes and
writes a PNG next to it. Rendering is headless (Agg); nothing here opens a
window or touches global pyplot state beyond the figure it creates.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_problem_figure(problem, svd, path):
    """Solution/data profiles plus the singular-value decay."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    idx = np.arange(1, problem.n + 1)
    ax1.plot(idx, problem.x_true, label="x_true")
    ax1.plot(np.arange(1, problem.m + 1), problem.y_exact, label="y_exact")
    ax1.set_xlabel("index")
    ax1.set_title(problem.name)
    ax1.legend()
    ax2.semilogy(np.arange(1, svd.rank + 1), svd.s, ".")
    ax2.set_xlabel("k")
    ax2.set_ylabel("singular value")
    return _finish(fig, path)


def save_solve_figure(problem, x_hat, label, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    idx = np.arange(1, problem.n + 1)
    ax.plot(idx, problem.x_true, label="x_true")
    ax.plot(idx, x_hat, label=label)
    ax.set_xlabel("index")
    ax.set_title(problem.name)
    ax.legend()
    return _finish(fig, path)


def save_mc_figure(report, path):
    """One panel per (problem, noise level): mean error bars by method/rule."""
    cells = {}
    for row in report.rows:
        if row.rep_count > 0:
            cells.setdefault((row.problem, row.noise_level), []).append(row)
    panels = sorted(cells)
    fig, axes = plt.subplots(len(panels), 1, figsize=(7, 2.8 * len(panels)), squeeze=False)
    for ax, key in zip(axes.ravel(), panels):
        rows = cells[key]
        methods = sorted({r.method for r in rows})
        rules_here = sorted({r.rule for r in rows})
        width = 0.8 / len(rules_here)
        for j, rule in enumerate(rules_here):
            xs, ys = [], []
            for i, method in enumerate(methods):
                match = [r for r in rows if r.method == method and r.rule == rule]
                if match and math.isfinite(match[0].e_mean):
                    xs.append(i + j * width)
                    ys.append(match[0].e_mean)
            ax.bar(xs, ys, width=width, label=rule)
        ax.set_xticks(np.arange(len(methods)) + 0.4 - width / 2)
        ax.set_xticklabels(methods)
        ax.set_ylabel("mean rel. error")
        ax.set_title(f"{key[0]}, noise {key[1]:g}")
        ax.legend(fontsize="small", ncols=min(len(rules_here), 4))
    return _finish(fig, path)


def save_curve_figure(curves, path):
    """curves: mapping method -> rows of (alpha, cond, rel_error)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for kind, rows in curves.items():
        cond = [row[1] for row in rows]
        err = [row[2] for row in rows]
        ax.loglog(cond, err, label=kind)
    ax.set_xlabel("conditioning")
    ax.set_ylabel("relative error")
    ax.legend()
    return _finish(fig, path)


def save_rules_figure(outcome, label, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    trace = outcome.objective_trace
    order = np.argsort(trace[:, 0])
    ax.loglog(trace[order, 0], trace[order, 1], ".-", label="objective")
    ax.axvline(outcome.param, color="tab:red", linestyle="--",
               label=f"chosen {outcome.param:.3g}")
    ax.set_xlabel("parameter")
    ax.set_ylabel("objective")
    ax.set_title(label)
    ax.legend()
    return _finish(fig, path)


def save_verify_figure(report, path):
    fig, ax = plt.subplots(figsize=(7, 0.5 * max(len(report.rows), 4) + 1))
    labels = [f"{row.check} {row.parameter}" for row in report.rows]
    values = [row.worst_slack_or_band for row in report.rows]
    colors = ["tab:green" if row.passed else "tab:red" for row in report.rows]
    ax.barh(np.arange(len(labels)), values, color=colors)
    ax.set_yticks(np.arange(len(labels)))
    ax.set_yticklabels(labels, fontsize="small")
    ax.set_xscale("symlog", linthresh=1e-12)
    ax.set_xlabel("slack / band")
    ax.set_title(report.name)
    return _finish(fig, path)
