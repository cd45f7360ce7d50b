"""Report figures written straight to files.

Figures are built on bare ``matplotlib.figure.Figure`` objects with the Agg
canvas, so nothing touches pyplot's global state and the functions are safe
to call from worker threads.  PNG metadata is stripped so reruns produce
identical files.
"""

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

__all__ = [
    "STYLE",
    "new_figure",
    "save",
    "plot_profile",
    "plot_trajectory",
    "plot_spectrum",
    "plot_slopes",
    "plot_criterion_sweep",
    "plot_illposed",
]

STYLE = {
    "figsize": (6.0, 3.8),
    "dpi": 120,
    "colors": ("#08589e", "#d95f02", "#1b9e77", "#7570b3"),
}


def new_figure(nrows=1, ncols=1, **kw):
    fig = Figure(figsize=kw.pop("figsize", STYLE["figsize"]), dpi=STYLE["dpi"])
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, ncols, squeeze=False, **kw)
    for ax in axes.flat:
        for side in ("top", "right"):
            ax.spines[side].set_visible(False)
        ax.tick_params(direction="out", length=3)
    return fig, axes


def save(fig, path):
    fig.tight_layout()
    fmt = str(path).rsplit(".", 1)[-1].lower()
    meta = {"Software": None} if fmt == "png" else None
    fig.savefig(path, metadata=meta)
    return path


def plot_profile(path, xi, phi, n, title=None):
    """Wave amplitude ``phi`` and long wave ``n`` over one period."""
    fig, ax = new_figure(2, 1, sharex=True, figsize=(6.0, 4.5))
    c = STYLE["colors"]
    ax[0, 0].plot(xi, phi, color=c[0])
    ax[0, 0].set_ylabel(r"$\varphi$")
    ax[1, 0].plot(xi, n, color=c[1])
    ax[1, 0].set_ylabel("$n$")
    ax[1, 0].set_xlabel(r"$\xi$")
    if title:
        ax[0, 0].set_title(title)
    return save(fig, path)


def plot_trajectory(path, traj, columns=("E1", "E2", "E3"), distance="orbit_dist"):
    """Relative drifts of the invariants and, when recorded, the orbit distance."""
    t = traj.column("t")
    have_dist = distance in traj.records[0]
    fig, ax = new_figure(2 if have_dist else 1, 1, sharex=True, figsize=(6.0, 4.5))
    for col, color in zip(columns, STYLE["colors"]):
        y = traj.column(col)
        scale = max(abs(y[0]), np.finfo(float).tiny)
        ax[0, 0].semilogy(t, np.maximum(np.abs(y - y[0]) / scale, 1e-18), color=color, label=col)
    ax[0, 0].set_ylabel("relative drift")
    ax[0, 0].legend(frameon=False, fontsize=8)
    if have_dist:
        ax[1, 0].semilogy(t, np.maximum(traj.column(distance), 1e-18), color=STYLE["colors"][3])
        ax[1, 0].set_ylabel("orbit distance")
    ax[-1, 0].set_xlabel("$t$")
    return save(fig, path)


def plot_spectrum(path, eigenvalues, reference=None, label="L1"):
    """Lowest eigenvalues, with optional closed-form markers."""
    fig, ax = new_figure()
    a = ax[0, 0]
    idx = np.arange(len(eigenvalues))
    a.plot(idx, eigenvalues, "o", color=STYLE["colors"][0], label=f"{label} (Fourier)")
    if reference is not None:
        a.plot(np.arange(len(reference)), reference, "x", ms=9, color=STYLE["colors"][1],
               label="closed form")
    a.axhline(0.0, color="0.6", lw=0.6)
    a.set_xlabel("index")
    a.set_ylabel(r"$\lambda$")
    a.legend(frameon=False, fontsize=8)
    return save(fig, path)


def plot_slopes(path, results):
    """Log-log norm growth for each necessity sweep, annotated with fitted slopes."""
    fig, ax = new_figure(1, len(results), figsize=(4.0 * len(results), 3.6))
    for a, res in zip(ax.flat, results):
        N = np.asarray(res.N, dtype=float)
        for vals, name, color, slope in zip(
            (res.norm_product, res.norm_u, res.norm_v),
            ("product", res.modes[0], res.modes[1]),
            STYLE["colors"],
            res.slopes,
        ):
            a.loglog(N, vals, "o-", ms=3, color=color, label=f"{name}: {slope:.3f}")
        a.set_title(f"{res.kind} pair {res.pair}", fontsize=9)
        a.set_xlabel("$N$")
        a.legend(frameon=False, fontsize=7)
    return save(fig, path)


def plot_criterion_sweep(path, reports):
    """``det d''`` (closed form and finite differences) across a sweep."""
    fig, ax = new_figure()
    a = ax[0, 0]
    k2 = np.array([r.kappa2 for r in reports])
    order = np.argsort(k2)
    a.plot(k2[order], [reports[i].det_d for i in order], "o", color=STYLE["colors"][0],
           label="closed form")
    a.plot(k2[order], [reports[i].det_d_fd for i in order], "x", color=STYLE["colors"][1],
           label="finite differences")
    a.set_yscale("symlog")
    a.axhline(0.0, color="0.6", lw=0.6)
    a.set_xlabel(r"$\kappa^2$")
    a.set_ylabel(r"$\det d''$")
    a.legend(frameon=False, fontsize=8)
    return save(fig, path)


def plot_illposed(path, reports):
    """Initial versus final H^r distances along a sequence of N."""
    fig, ax = new_figure()
    a = ax[0, 0]
    N = [r.N for r in reports]
    a.loglog(N, [r.initial_u_dist2 for r in reports], "o-", color=STYLE["colors"][0],
             label="initial $u$ distance$^2$")
    a.loglog(N, [r.initial_v_dist2 for r in reports], "s-", color=STYLE["colors"][2],
             label="initial $v$ distance$^2$")
    a.loglog(N, [r.final_u_dist2 for r in reports], "^-", color=STYLE["colors"][1],
             label=r"distance$^2$ at $t^*$")
    a.set_xlabel("$N$")
    a.legend(frameon=False, fontsize=8)
    return save(fig, path)
