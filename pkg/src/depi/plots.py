"""Figure rendering for the CLI report paths (Agg backend, files only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path: str) -> None:
    fig.savefig(path, dpi=130, metadata={"Software": None}, bbox_inches="tight")
    plt.close(fig)


def render_invariants(report: dict, path: str) -> None:
    """Drift of |P|, <M,P> and the energy proxy along a trajectory."""
    series = report["series"]
    ks = np.arange(len(series["P_norm"]))
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 7.5), sharex=True)
    axes[0].plot(ks, np.asarray(series["P_norm"]) - series["P_norm"][0], lw=0.8)
    axes[0].set_ylabel("|P| - |P0|")
    axes[1].plot(ks, np.asarray(series["MP_pairing"]) - series["MP_pairing"][0], lw=0.8)
    axes[1].set_ylabel("<M,P> drift")
    axes[2].plot(ks[: len(series["energy_proxy"])], series["energy_proxy"], lw=0.8)
    axes[2].set_ylabel("energy proxy")
    axes[2].set_xlabel("step k")
    axes[0].set_title(f"{report['system']}  eps={report['eps']:g}  invariant audit")
    for ax in axes:
        ax.grid(alpha=0.3)
    _save(fig, path)


def render_convergence(report: dict, path: str) -> None:
    """Log-log error against step size with the fitted slope."""
    eps = np.asarray(report["eps"], dtype=float)
    err = np.asarray(report["errors"], dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(eps, np.maximum(err, 1e-300), "o-", label="measured")
    if report.get("slope") is not None:
        ref = err[0] * (eps / eps[0]) ** 1.0
        ax.loglog(eps, ref, "--", label="slope 1 reference")
        ax.set_title(f"convergence, fitted slope {report['slope']:.3f}")
    else:
        ax.set_title("convergence (exact regime, errors at reference floor)")
    ax.set_xlabel("step size eps")
    ax.set_ylabel("max state error")
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    _save(fig, path)


def render_verification(report: dict, path: str) -> None:
    """Residual-vs-tolerance bars for every verification check."""
    checks = report["checks"]
    names = [c["name"] for c in checks]
    residuals = [max(c["max_residual"], 1e-18) for c in checks]
    tols = [c["tol"] for c in checks]
    y = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(7.0, 0.5 * len(names) + 1.5))
    colors = ["tab:blue" if c["pass"] else "tab:red" for c in checks]
    ax.barh(y, residuals, color=colors)
    for yi, tol in zip(y, tols):
        ax.plot([tol, tol], [yi - 0.4, yi + 0.4], color="k", lw=1.0)
    ax.set_yticks(y)
    ax.set_yticklabels(names)
    ax.set_xscale("log")
    ax.set_xlabel("max residual (bar) vs tolerance (tick)")
    ax.invert_yaxis()
    ax.grid(alpha=0.3, axis="x")
    _save(fig, path)
