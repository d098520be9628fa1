"""Figures for the report paths of the CLI. Always rendered to files."""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .colength import ColengthResult  # noqa: E402
from .hkfit import HKFit, HKSample  # noqa: E402

__all__ = ["plot_periodic_part", "plot_degree_profile"]


def plot_periodic_part(samples: Sequence[HKSample], fit: HKFit, path: str | os.PathLike, title: str = "") -> None:
    """``phi(q) - e_HK q^2`` against ``e`` with the fitted gamma table overlaid."""
    es = [s.e for s in samples]
    resid = [float(s.phi - fit.e_hk * s.q * s.q) for s in samples]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(es, resid, "o", color="k", label="measured")
    fitted = [(e, float(fit.gamma_at(e))) for e in es if e >= fit.e0]
    if fitted:
        ax.step(*zip(*fitted), where="mid", color="tab:red", lw=1, label=f"gamma, period {fit.tau}")
    ax.set_xlabel("e")
    ax.set_ylabel(r"$\varphi(p^e) - e_{HK}\,p^{2e}$")
    ax.set_xticks(es)
    ax.set_title(title or f"e_HK = {fit.e_hk}")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_degree_profile(results: Sequence[tuple[int, ColengthResult]], path: str | os.PathLike) -> None:
    """Graded pieces of ``R/I^[q]``, one curve per ``e``, degree scaled by ``q``."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for e, res in results:
        q = res.q
        xs = [m / q for m in range(len(res.per_degree))]
        ys = [d / q for d in res.per_degree]
        ax.plot(xs, ys, lw=1, label=f"e={e}")
    ax.set_xlabel("m / q")
    ax.set_ylabel(r"$\dim (R/I^{[q]})_m / q$")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
