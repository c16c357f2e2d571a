"""Report figures rendered next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_training_curve(log_csv_path, out_path) -> None:
    """Loss-vs-step curve from a training CSV log."""
    steps, losses = [], []
    with open(log_csv_path) as f:
        next(f)  # header
        for line in f:
            parts = line.strip().split(",")
            steps.append(int(parts[0]))
            losses.append(float(parts[1]))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(steps, losses, lw=0.8)
    ax.set_xlabel("step")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def plot_metric_report(reports, out_path) -> None:
    """Grouped bars: one panel per metric, one bar per benchmark arm."""
    metrics = ["psnr", "ssim", "perceptual", "semantic"]
    fig, axes = plt.subplots(1, len(metrics), figsize=(4 * len(metrics), 3.5))
    arms = [r.condition for r in reports]
    for ax, metric in zip(axes, metrics):
        vals = [getattr(r, metric) for r in reports]
        ax.bar(range(len(arms)), vals, color="steelblue")
        ax.set_xticks(range(len(arms)))
        ax.set_xticklabels(arms, rotation=20, ha="right", fontsize=8)
        ax.set_title(metric)
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def plot_per_frame_psnr(reports, out_path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for r in reports:
        if r.per_frame_psnr:
            ax.plot(np.arange(len(r.per_frame_psnr)), r.per_frame_psnr,
                    marker="o", ms=3, label=r.condition)
    ax.set_xlabel("frame")
    ax.set_ylabel("PSNR (dB)")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
