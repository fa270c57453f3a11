"""Report figures rendered next to the delimited outputs.

Every function takes already-computed report data and writes one PNG; no
statistics are computed here.  The Agg backend keeps rendering headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .coverage import AuditReport
from .metrics import RegressionFit, TokenStats
from .tokenizer import Vocabulary


def save_audit_figure(report: AuditReport, path: str) -> None:
    """Grouped bars: out-of-vocabulary percentage per probe set, one group
    color per tokenizer."""
    tokenizers = list(dict.fromkeys(row.tokenizer for row in report.rows))
    sets = list(dict.fromkeys(row.probe_set for row in report.rows))
    table = {(r.tokenizer, r.probe_set): r.oov_percent for r in report.rows}
    x = np.arange(len(sets))
    width = 0.8 / max(len(tokenizers), 1)
    fig, ax = plt.subplots(figsize=(1.8 + 1.1 * len(sets), 4.0))
    for k, name in enumerate(tokenizers):
        heights = [table.get((name, s), 0.0) for s in sets]
        ax.bar(x + (k - (len(tokenizers) - 1) / 2) * width, heights, width,
               label=name)
    ax.set_xticks(x, sets, rotation=20, ha="right")
    ax.set_ylabel("OOV %")
    ax.set_ylim(0, 105)
    ax.legend(fontsize="small")
    ax.set_title("unknown-token emission by probe set")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_stats_figure(stats: TokenStats, vocab: Vocabulary, path: str) -> None:
    """Token usage curve: information content -ln p against frequency rank,
    the most frequent tokens labelled."""
    order = sorted(stats.counts, key=lambda i: (-stats.counts[i], i))
    info = [stats.information[i] for i in order]
    ranks = np.arange(1, len(order) + 1)
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.step(ranks, info, where="mid")
    for rank, token_id in enumerate(order[:12], start=1):
        ax.annotate(vocab.token_of(token_id), (rank, stats.information[token_id]),
                    textcoords="offset points", xytext=(2, 4), fontsize=7)
    ax.set_xlabel("token rank")
    ax.set_ylabel("information $-\\ln p$ (nats)")
    ax.set_title(
        f"token usage: {stats.tokens_used}/{stats.vocab_size} ids, "
        f"entropy {stats.entropy:.3f} nats"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_eval_figure(rows: list[dict], path: str) -> None:
    """Cross-entropy against model order, one point per evaluated model."""
    rows = sorted(rows, key=lambda r: r["order"])
    orders = [r["order"] for r in rows]
    per_mol = [r["nats_per_molecule"] for r in rows]
    per_tok = [r["nats_per_token"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.6, 3.8))
    ax1.plot(orders, per_mol, marker="o")
    ax1.set_xlabel("order N")
    ax1.set_ylabel("nats / molecule")
    ax2.plot(orders, per_tok, marker="o", color="tab:orange")
    ax2.set_xlabel("order N")
    ax2.set_ylabel("nats / token")
    for ax in (ax1, ax2):
        ax.set_xticks(orders)
    fig.suptitle("held-out cross-entropy by model order")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_info_loss_figure(rows: list[dict], path: str, max_curves: int = 8) -> None:
    """Left: per-molecule KL information loss.  Right: per-position log-odds
    shift for the first few molecules."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.2, 4.0))
    losses = [r["info_loss_nats"] for r in rows]
    ax1.bar(np.arange(len(losses)), losses, color="tab:red")
    ax1.set_xlabel("molecule index")
    ax1.set_ylabel("information loss (nats)")
    for r in rows[:max_curves]:
        if r.get("odds_track"):
            ax2.plot(r["odds_track"], alpha=0.7, label=r["smiles"][:18])
    ax2.axhline(0.0, color="grey", lw=0.6)
    ax2.set_xlabel("token position")
    ax2.set_ylabel("log-odds shift (actual token)")
    if rows[:max_curves]:
        ax2.legend(fontsize=6)
    fig.suptitle("masking cost under the bidirectional model")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_fertility_loss_figure(
    points: list[tuple[float, float]], fit: RegressionFit, path: str
) -> None:
    """Scatter of (fertility, cross-entropy) with the least-squares line."""
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    ax.scatter(xs, ys, s=18)
    grid = np.linspace(xs.min(), xs.max(), 50)
    ax.plot(grid, fit.intercept + fit.slope * grid, color="tab:red",
            label=f"slope {fit.slope:.3f} ± {fit.standard_error:.3f}")
    ax.set_xlabel("fertility (tokens / molecule)")
    ax.set_ylabel("cross-entropy (nats / molecule)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
