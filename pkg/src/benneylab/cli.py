"""Command-line front end: ``benneylab <command> --config FILE --out DIR``.

Config files are flat ``key = value`` text (``#`` starts a comment).  Every
command has typed defaults; the resolved configuration is echoed into the
run manifest ``run.json`` next to the data files.  Data files (CSV/JSON) are
byte-identical for identical configuration and seed; the manifest also holds
wall-clock time and is therefore not.

Exit codes: 0 success, 2 invalid configuration or parameters, 3 numerical
failure.
"""

import argparse
import hashlib
import json
import os
import sys
import time
from importlib import metadata

import numpy as np

__all__ = ["main", "parse_config", "ConfigError", "COMMANDS", "DEFAULTS"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (type, default); None means "derived at run time"
DEFAULTS = {
    "wave": {
        "omega": (float, -2.5), "c": (float, 2.0), "beta": (float, 0.0),
        "L": (float, 2.0 * np.pi), "n_modes": (int, 512),
    },
    "evolve": {
        "initial": (str, "dnoidal"),
        "omega": (float, -2.5), "c": (float, 2.0), "beta": (float, 0.0),
        "L": (float, 2.0 * np.pi), "n_modes": (int, 128),
        "T": (float, None), "dt": (float, None), "samples": (int, 20),
        "epsilon": (float, 0.0), "max_mode": (int, 8),
        "a": (float, 1.0), "N": (int, 3), "gamma": (float, 0.7),
    },
    "spectrum": {
        "omega": (float, -2.5), "c": (float, 2.0), "beta": (float, 0.0),
        "L": (float, 2.0 * np.pi), "M": (int, 64), "operator": (str, "L1"),
        "n_eigs": (int, 9),
    },
    "criterion": {
        "omega": (float, -2.5), "c": (float, 2.0), "beta": (float, 0.0),
        "L": (float, 2.0 * np.pi), "M": (int, 64),
        "sweep_sigma": (_floats, []), "sweep_c": (_floats, []), "sweep_beta": (_floats, []),
    },
    "bourgain": {
        "r": (float, 1.0), "s": (float, 0.0), "b1": (float, 0.6), "b2": (float, 0.6),
        "N_list": (_ints, [2**j for j in range(4, 11)]),
    },
    "illposed": {
        "r": (float, -0.5), "nu": (float, 0.25), "delta": (float, 1.0),
        "alpha1": (float, 1.0), "beta": (float, 1.0),
        "N_list": (_ints, [16, 32, 64, 128, 256]),
        "crosscheck": (_bool, True), "crosscheck_N": (int, 16),
        "crosscheck_modes": (int, 64), "crosscheck_dt": (float, 2e-4),
    },
}
COMMANDS = tuple(DEFAULTS)


def parse_config(text, command):
    """Parse flat ``key = value`` lines against the command's typed defaults."""
    spec = DEFAULTS[command]
    out = {k: v[1] for k, v in spec.items()}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in spec:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} for '{command}' (known: {', '.join(spec)})"
            )
        try:
            out[key] = spec[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return out


# ----------------------------------------------------------------------------
# output helpers: everything is computed first, then written


class Outputs:
    def __init__(self, directory):
        self.dir = directory
        self.files = {}

    def path(self, name):
        return os.path.join(self.dir, name)

    def text(self, name, content):
        self.files[name] = ("text", content)

    def json(self, name, obj):
        self.files[name] = ("text", json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def figure(self, name, draw):
        self.files[name] = ("figure", draw)

    def flush(self):
        manifest = []
        for name, (kind, payload) in self.files.items():
            p = self.path(name)
            if kind == "text":
                with open(p, "w", newline="\n") as fh:
                    fh.write(payload)
            else:
                payload(p)
            with open(p, "rb") as fh:
                digest = hashlib.sha256(fh.read()).hexdigest()
            manifest.append({"path": name, "sha256": digest})
        return manifest


def _csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(x if isinstance(x, str) else repr(x) for x in row))
    return "\n".join(lines) + "\n"


def _f(x):
    return float(x)


# ----------------------------------------------------------------------------
# commands


def cmd_wave(cfg, out, args):
    from .grid import GridSpec
    from .waves import make_wave, ode_residual, sample_profile

    p = make_wave(cfg["omega"], cfg["c"], cfg["beta"], cfg["L"])
    g = GridSpec(p.L, cfg["n_modes"])
    prof = sample_profile(p, g)
    r1, r2 = ode_residual(prof, p)
    out.text("profile.csv", _csv(("xi", "phi", "n"),
                                 [(_f(x), _f(a), _f(b)) for x, a, b in zip(g.x, prof.phi, prof.n)]))
    out.json("params.json", {"params": p.to_dict(), "n_modes": g.n_modes,
                             "residual_ode": _f(r1), "residual_first_integral": _f(r2)})
    if args.plot:
        from .plotting import plot_profile

        out.figure("profile.png", lambda path: plot_profile(path, g.x, prof.phi, prof.n))
    print(f"kappa^2 = {p.kappa2:.15g}  residual_ode = {r1:.3e}  residual_first_integral = {r2:.3e}")


def cmd_evolve(cfg, out, args):
    from .dynamics import (conserved_observer, default_dt, evolve, orbit_observer,
                           plane_wave_exact, plane_wave_state, random_perturbation,
                           travelling_wave_state)
    from .grid import GridSpec, State

    g = GridSpec(cfg["L"], cfg["n_modes"])
    beta = cfg["beta"]
    kind = cfg["initial"]
    observers = [conserved_observer(beta)]
    params = None
    if kind == "dnoidal":
        from .waves import make_wave

        params = make_wave(cfg["omega"], cfg["c"], beta, cfg["L"])
        s0 = travelling_wave_state(params, g)
        if cfg["epsilon"] > 0:
            du, dv = random_perturbation(g, cfg["epsilon"], args.seed, cfg["max_mode"])
            s0 = State(s0.u + du, s0.v + dv, g)
        observers.append(orbit_observer(params))
        T = cfg["T"] if cfg["T"] is not None else params.temporal_period
    elif kind == "plane":
        s0 = plane_wave_state(g, cfg["a"], cfg["N"], cfg["gamma"], beta=beta)
        T = cfg["T"] if cfg["T"] is not None else 1.0
    elif kind == "zero":
        s0 = State(np.zeros(g.n_modes), np.zeros(g.n_modes), g)
        T = cfg["T"] if cfg["T"] is not None else 1.0
    else:
        raise ConfigError(f"initial must be dnoidal, plane or zero, got {kind!r}")
    if not T > 0:
        raise ConfigError(f"T must be positive, got {T}")
    dt = cfg["dt"] if cfg["dt"] is not None else default_dt(s0, beta)
    nsteps = int(np.ceil(T / dt - 1e-12))
    stride = max(1, nsteps // max(1, cfg["samples"]))
    traj = evolve(s0, T, dt, beta, observers=observers, stride=stride)
    cols = ("t", "E1", "E2", "E3") + (("orbit_dist",) if params is not None else ())
    out.text("trajectory.csv", _csv(cols, [[_f(r[c]) for c in cols] for r in traj.records]))
    summary = {"T": T, "dt": traj.dt, "steps": traj.steps, "n_modes": g.n_modes}
    first, last = traj.records[0], traj.records[-1]
    for c in ("E1", "E2", "E3"):
        summary[f"{c}_drift"] = _f(last[c] - first[c])
    if kind == "plane":
        u, v = plane_wave_exact(g, cfg["a"], cfg["N"], cfg["gamma"], traj.final.t, beta)
        summary["max_error_u"] = _f(np.max(np.abs(traj.final.u - u)))
        summary["max_error_v"] = _f(np.max(np.abs(traj.final.v - v)))
    if params is not None:
        summary["max_orbit_dist"] = _f(max(r["orbit_dist"] for r in traj.records))
    out.json("summary.json", summary)
    if args.plot:
        from .plotting import plot_trajectory

        out.figure("trajectory.png", lambda path: plot_trajectory(path, traj))
    print(" ".join(f"{k} = {v:.6g}" if isinstance(v, float) else f"{k} = {v}"
                   for k, v in summary.items()))


def cmd_spectrum(cfg, out, args):
    from .hill import HillOperatorSpec, lame_eigenvalues_L1, spectrum, spectrum_to_json
    from .waves import make_wave

    p = make_wave(cfg["omega"], cfg["c"], cfg["beta"], cfg["L"])
    ops = ("L1", "L2") if cfg["operator"] == "both" else (cfg["operator"],)
    for op in ops:
        if op not in ("L1", "L2"):
            raise ConfigError(f"operator must be L1, L2 or both, got {cfg['operator']!r}")
    lame = lame_eigenvalues_L1(p)
    for op in ops:
        sp = spectrum(HillOperatorSpec(op, p, cfg["M"]), n_eigs=cfg["n_eigs"])
        rec = spectrum_to_json(sp)
        if op == "L1":
            rec["lame_closed_form"] = [float(x) for x in lame]
        out.json(f"spectrum_{op}.json", rec)
        if args.plot:
            from .plotting import plot_spectrum

            ref = lame if op == "L1" else None
            out.figure(f"spectrum_{op}.png",
                       lambda path, sp=sp, ref=ref, op=op: plot_spectrum(path, sp.eigenvalues, ref, op))
        print(f"{op}: n_negative = {sp.n_negative} kernel_dim = {sp.kernel_dim_numeric} "
              f"lowest = {', '.join(f'{x:.10g}' for x in sp.eigenvalues[:3])}")


def cmd_criterion(cfg, out, args):
    from .criterion import SWEEP_COLUMNS, report_to_json, sweep, verdict

    rep = verdict(cfg["omega"], cfg["c"], cfg["beta"], cfg["L"], truncation=cfg["M"])
    out.json("report.json", report_to_json(rep))
    print(f"det_d = {rep.det_d:.10g} det_d_fd = {rep.det_d_fd:.10g} B = {rep.B_value:.6g} "
          f"n_H = {rep.n_H} p_d = {rep.p_d} verdict = {rep.verdict}")
    if cfg["sweep_sigma"] or cfg["sweep_c"] or cfg["sweep_beta"]:
        sig = cfg["sweep_sigma"] or [-cfg["omega"] - cfg["c"] ** 2 / 4.0]
        cs = cfg["sweep_c"] or [cfg["c"]]
        bs = cfg["sweep_beta"] or [cfg["beta"]]
        pts = [(-s - c * c / 4.0, c, b) for s in sig for c in cs for b in bs]
        reps = sweep(pts, cfg["L"], threads=args.threads, truncation=cfg["M"])
        rows = [(r.omega, r.c, r.beta, r.kappa2, r.det_d, r.det_d_fd, r.B_value, r.verdict)
                for r in reps]
        out.text("sweep.csv", _csv(SWEEP_COLUMNS, rows))
        if args.plot:
            from .plotting import plot_criterion_sweep

            out.figure("sweep.png", lambda path: plot_criterion_sweep(path, reps))
        print(f"sweep: {len(reps)} points, "
              f"{sum(r.verdict == 'stable-by-theorem' for r in reps)} stable-by-theorem")


def cmd_bourgain(cfg, out, args):
    from .bourgain import SWEEP_COLUMNS, necessity_sweep_derivative, necessity_sweep_uv, wellposed_region

    if len(cfg["N_list"]) < 2 or min(cfg["N_list"]) < 1:
        raise ConfigError("N_list needs at least two positive integers")
    kw = dict(r=cfg["r"], s=cfg["s"], b1=cfg["b1"], b2=cfg["b2"], threads=args.threads)
    results = necessity_sweep_uv(cfg["N_list"], **kw) + necessity_sweep_derivative(cfg["N_list"], **kw)
    summary = {"region": wellposed_region(cfg["r"], cfg["s"]), "sweeps": []}
    for res in results:
        rows = [(N, _f(p), _f(u), _f(v), _f(res.slopes[0]))
                for N, p, u, v in zip(res.N, res.norm_product, res.norm_u, res.norm_v)]
        out.text(f"sweep_{res.kind}_pair{res.pair}.csv", _csv(SWEEP_COLUMNS, rows))
        summary["sweeps"].append({"kind": res.kind, "pair": res.pair, "modes": list(res.modes),
                                  "slopes": list(res.slopes), "targets": list(res.targets),
                                  "max_deviation": res.max_deviation})
        print(f"{res.kind} pair {res.pair}: slopes {np.round(res.slopes, 4).tolist()} "
              f"targets {list(res.targets)}")
    out.json("summary.json", summary)
    if args.plot:
        from .plotting import plot_slopes

        out.figure("slopes.png", lambda path: plot_slopes(path, results))
    print(f"(r, s) = ({cfg['r']}, {cfg['s']}): {summary['region']}")


def cmd_illposed(cfg, out, args):
    from .bourgain import illposedness_experiment, solver_crosscheck

    kw = dict(r=cfg["r"], nu=cfg["nu"], delta=cfg["delta"], alpha1=cfg["alpha1"], beta=cfg["beta"])
    reps = [illposedness_experiment(N=N, **kw) for N in cfg["N_list"]]
    rec = {"experiments": [r.to_dict() for r in reps]}
    if cfg["crosscheck"]:
        chk = solver_crosscheck(illposedness_experiment(N=cfg["crosscheck_N"], **kw),
                                n_modes=cfg["crosscheck_modes"], dt=cfg["crosscheck_dt"])
        rec["crosscheck"] = chk.to_dict()
        print(f"solver cross-check at N = {chk.N}: |difference| = {chk.solver_abs_error:.3e}")
    out.json("report.json", rec)
    if args.plot:
        from .plotting import plot_illposed

        out.figure("illposed.png", lambda path: plot_illposed(path, reps))
    for r in reps:
        print(f"N = {r.N}: t* = {r.t_star:.4g} initial {r.initial_u_dist2:.3e} "
              f"final {r.final_u_dist2:.4f} >= {r.lower_bound:.4f}: {r.separated}")


HANDLERS = {
    "wave": cmd_wave, "evolve": cmd_evolve, "spectrum": cmd_spectrum,
    "criterion": cmd_criterion, "bourgain": cmd_bourgain, "illposed": cmd_illposed,
}


def _version():
    try:
        return metadata.version("benneylab")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
        return "unknown"


def build_parser():
    ap = argparse.ArgumentParser(prog="benneylab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} command")
        sp.add_argument("--config", help="flat key = value file (defaults used if omitted)")
        sp.add_argument("--out", default=".", help="existing output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--plot", action="store_true", help="also render PNG figures")
    return ap


def main(argv=None):
    from .dynamics import BlowUpError
    from .elliptic import EllipticDomainError
    from .waves import AdmissibilityError, ConvergenceError, PeriodicityError

    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        text = ""
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
        cfg = parse_config(text, args.command)
        if not os.path.isdir(args.out):
            raise ConfigError(f"output directory {args.out!r} does not exist")
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        out = Outputs(args.out)
        HANDLERS[args.command](cfg, out, args)
        manifest = out.flush()
    except (ConfigError, AdmissibilityError, PeriodicityError, EllipticDomainError, OSError) as exc:
        print(f"benneylab {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, ConvergenceError, FloatingPointError, np.linalg.LinAlgError,
            RuntimeError) as exc:
        print(f"benneylab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"benneylab {args.command}: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    record = {
        "command": args.command,
        "config": cfg,
        "seed": args.seed,
        "threads": args.threads,
        "version": _version(),
        "wall_clock_s": time.perf_counter() - t0,
        "outputs": manifest,
    }
    with open(out.path("run.json"), "w", newline="\n") as fh:
        fh.write(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
