"""Figures for the CLI ``--plot`` flag.  matplotlib is imported on first use."""

from __future__ import annotations

import math

import numpy as np

FIG_SIZE = (5.0, 3.2)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({
        "font.size": 9,
        "axes.linewidth": 0.6,
        "lines.linewidth": 1.0,
        "legend.fontsize": 8,
        "savefig.dpi": 150,
    })
    return plt


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    import matplotlib.pyplot as plt

    plt.close(fig)


def plot_curves(samples, path):
    plt = _pyplot()
    fig, (ax_r, ax_c) = plt.subplots(1, 2, figsize=(FIG_SIZE[0] * 1.6, FIG_SIZE[1]))
    names = sorted({s.curve for s in samples})
    for name in names:
        pts = [s for s in samples if s.curve == name]
        if pts[0].mu is None:
            ax_c.plot([p.lam.real for p in pts], [p.lam.imag for p in pts], ".", ms=2, label=name)
            if name == "Gamma":
                ax_c.plot([p.lam.real for p in pts], [-p.lam.imag for p in pts], ".", ms=2, color="C0")
        else:
            ax_r.plot([p.lam.real for p in pts], [p.mu.real for p in pts], label=name)
    ax_r.plot([0, 1], [0, 1], "k:", lw=0.6)
    ax_r.set_xlabel(r"$\lambda$")
    ax_r.set_ylabel(r"$\mu$")
    ax_c.set_xlabel(r"Re $\lambda$")
    ax_c.set_ylabel(r"Im $\lambda$")
    for ax in (ax_r, ax_c):
        if ax.lines:
            ax.legend(frameon=False)
    _save(fig, path)


def plot_samples(records, path, title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    for k in sorted({r["k"] for r in records}):
        rs = [r for r in records if r["k"] == k]
        ax.plot([r["h_re"] for r in rs], [r["val_re"] for r in rs], ".-", ms=2, label=f"$I_{k}$")
        if any(abs(r["val_im"]) > 0 for r in rs):
            ax.plot([r["h_re"] for r in rs], [r["val_im"] for r in rs], "--", label=f"Im $I_{k}$")
    ax.set_xlabel("$h$")
    ax.set_title(title)
    ax.legend(frameon=False)
    _save(fig, path)


def plot_F(h, F, path, zeros=(), level=None):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.plot(h, F, lw=1)
    if level is not None:
        ax.axhline(level, color="k", lw=0.5, ls=":")
    for z in zeros:
        ax.axvline(z, color="C3", lw=0.5)
    ax.set_xlabel("$h$")
    ax.set_ylabel("$I_1/I_0$")
    _save(fig, path)


def plot_levels(t, v, path, zeros=()):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.semilogx(t, np.sign(v) * np.log10(1 + np.abs(v) / max(np.min(np.abs(v)), 1e-300)), lw=1)
    for z in zeros:
        ax.axvline(z, color="C3", lw=0.5)
    ax.axhline(0, color="k", lw=0.5)
    ax.set_xlabel("$t$")
    ax.set_ylabel("signed log size")
    _save(fig, path)


def plot_delta(samples, path):
    plt = _pyplot()
    fig, (a1, a2) = plt.subplots(2, 1, sharex=True, figsize=(FIG_SIZE[0], FIG_SIZE[1] * 1.5))
    h = [s.h for s in samples]
    a1.semilogy(h, [abs(s.delta) for s in samples])
    a1.set_ylabel(r"$|\Delta(h)|$")
    a2.plot(h, [s.im_F for s in samples])
    a2.axhline(0, color="k", lw=0.5)
    a2.set_ylabel("Im $F$")
    a2.set_xlabel("$h$")
    _save(fig, path)


def plot_winding(result, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    vals = []
    for pt in result.path:
        j0, j1 = pt.values[0], pt.values[1]
        vals.append(j0 if result.which == "I0" else j1 / j0)
    vals = np.array(vals)
    ax.plot(vals.real, vals.imag, lw=0.8)
    ax.plot([0], [0], "k+")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(f"{result.which}: total {result.total / math.pi:+.3f}" + r"$\pi$")
    _save(fig, path)


def plot_scan(rows, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    good = [r for r in rows if r.max_zeros is not None]
    for n in sorted({r.max_zeros for r in good}):
        rs = [r for r in good if r.max_zeros == n]
        if rs[0].point.is_real:
            ax.plot([r.point.lam.real for r in rs], [r.point.mu.real for r in rs], "o", ms=3, label=f"{n} zeros")
        else:
            ax.plot([r.point.lam.real for r in rs], [r.point.lam.imag for r in rs], "o", ms=3, label=f"{n} zeros")
    ax.legend(frameon=False)
    _save(fig, path)
