"""Command-line scenario runner.

    lzsm simulate --config run.cfg --out results/
    lzsm figure fig7 --out results/ --jobs 4

Exit status: 0 success, 2 bad configuration or arguments (nothing written),
3 numerical abort (partial outputs and manifest kept).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .analytics import fit_theta_curve, plateau_average, plateau_windows
from .ansatz import cat_fock_vector
from .config import ConfigError, ScenarioConfig, format_value, load_config, parse_text
from .dynamics import IntegrationAborted, integrate
from .model import LinearDrive, ModelParams, fock_index
from .observables import moving_average, records_to_arrays
from .spectrum import (adiabatic_levels, ed_evolve, find_avoided_crossings, gap_period_regression,
                       oscillation_period, pair_gap, write_crossings_csv, write_levels_csv)

log = logging.getLogger("lzsm")

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 2, 3
DT_HALVING_TOL = 1e-3  # sup-norm change of P_LZ allowed when dt is halved


class _Aborted(Exception):
    def __init__(self, message, partial):
        super().__init__(message, partial)  # both in args so the exception pickles
        self.message = message
        self.partial = partial

    def __str__(self):
        return self.message


def _fmt(x) -> str:
    return f"{x:.12g}"


# --- runs -------------------------------------------------------------------

def run_d2(cfg: ScenarioConfig, M: int | None = None, dt: float | None = None) -> dict:
    """One variational trajectory as column arrays; raises :class:`_Aborted`."""
    params = cfg.model()
    try:
        records = integrate(cfg.initial_state(M=M), params, cfg.integrator(dt=dt))
    except IntegrationAborted as exc:
        raise _Aborted(str(exc), records_to_arrays(exc.records)) from exc
    return records_to_arrays(records)


def initial_fock_vector(cfg: ScenarioConfig, n_trunc: int) -> np.ndarray:
    if cfg.model().n_modes != 1:
        raise ConfigError("exact diagonalization needs a single mode")
    if cfg["initial.kind"] == "cat":
        return cat_fock_vector(cfg.cat(), n_trunc)
    vec = np.zeros(2 * (n_trunc + 1), dtype=complex)
    vec[fock_index(0, "up")] = 1.0
    return vec


def run_ed(cfg: ScenarioConfig, dt: float | None = None):
    n = cfg["ed.n_trunc"]
    ic = cfg.integrator(dt=dt)
    return ed_evolve(cfg.model(), initial_fock_vector(cfg, n), ic.t0, ic.t1, ic.dt,
                     ic.n_report, ic.record_stride)


def crossing_time(params: ModelParams) -> float:
    """omega / v for the linear drive."""
    if not isinstance(params.drive, LinearDrive):
        raise ConfigError("plateau analysis needs a linear drive")
    return params.modes[0].omega / params.drive.v


def plateaus(cfg: ScenarioConfig, arrays: dict):
    w1, w2 = plateau_windows(crossing_time(cfg.model()), cfg["integrator.t1"], cfg["sweep.plateau_core"])
    return plateau_average(arrays["t"], arrays["p_lz"], w1), plateau_average(arrays["t"], arrays["p_lz"], w2)


def _sweep_point(cfg: ScenarioConfig):
    arrays = run_d2(cfg)
    p1, p2 = plateaus(cfg, arrays)
    return p1, p2, arrays


def _map(func, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


# --- writers ----------------------------------------------------------------

def write_trajectory_csv(path, arrays: dict) -> None:
    n = arrays["p_up"].shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "p_lz", "norm2", "energy", "mean_n", "mandel_q"]
                   + [f"p_up_{k}" for k in range(n)] + [f"p_down_{k}" for k in range(n)])
        for i in range(arrays["t"].size):
            row = [arrays[c][i] for c in ("t", "p_lz", "norm2", "energy", "mean_n", "mandel_q")]
            row += list(arrays["p_up"][i]) + list(arrays["p_down"][i])
            w.writerow([_fmt(x) for x in row])


def write_columns_csv(path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([x if isinstance(x, str) else _fmt(x) for x in row])


class Output:
    """Tracks written files under one directory and emits the manifest."""

    def __init__(self, root, command, cfg: ScenarioConfig | None):
        self.root = root
        self.command = command
        self.cfg = cfg
        self.files = []
        self.summary = {}
        self.scenarios = None

    def path(self, name):
        full = os.path.join(self.root, name)
        os.makedirs(os.path.dirname(full), exist_ok=True)
        self.files.append(name)
        return full

    def manifest(self, status="ok", extra_configs=None):
        data = {
            "command": self.command,
            "version": __version__,
            "status": status,
            "config": ({k: format_value(v) for k, v in self.cfg.resolved().items()}
                       if self.cfg is not None else None),
            "outputs": sorted(set(self.files)),
            "summary": self.summary,
        }
        if extra_configs:
            data["scenarios"] = {name: {k: format_value(v) for k, v in c.resolved().items()}
                                 for name, c in sorted(extra_configs.items())}
        os.makedirs(self.root, exist_ok=True)
        with open(os.path.join(self.root, "manifest.json"), "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True, default=_json_default)
            fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(type(obj))


def _float_summary(x):
    return float(f"{x:.12g}")


# --- subcommands ------------------------------------------------------------

def cmd_simulate(cfg, out: Output, args):
    try:
        arrays = run_d2(cfg)
    except _Aborted as exc:
        write_trajectory_csv(out.path("trajectory.csv"), exc.partial)
        out.summary["error"] = str(exc)
        raise
    write_trajectory_csv(out.path("trajectory.csv"), arrays)
    out.summary["final_p_lz"] = _float_summary(arrays["p_lz"][-1])
    out.summary["max_norm_drift"] = _float_summary(np.max(np.abs(arrays["norm2"] - 1)))


def cmd_spectrum(cfg, out: Output, args):
    grid = np.linspace(cfg["spectrum.t0"], cfg["spectrum.t1"], cfg["spectrum.n_points"])
    spec = adiabatic_levels(cfg.model(), grid, cfg["spectrum.n_trunc"])
    k = min(cfg["spectrum.n_levels"], spec.levels.shape[1])
    write_levels_csv(out.path("levels.csv"), spec, k)
    crossings = find_avoided_crossings(spec, max_levels=k)
    write_crossings_csv(out.path("crossings.csv"), crossings)
    out.summary["n_crossings"] = len(crossings)


def theta_grid(n):
    return 2 * np.pi * np.arange(n) / n


def cmd_sweep_theta(cfg, out: Output, args):
    thetas = theta_grid(cfg["sweep.n_theta"])
    cfgs = [cfg.with_overrides(initial__theta=float(th), initial__kind="cat") for th in thetas]
    results = _map(_sweep_point, cfgs, args.jobs)
    p1 = [r[0] for r in results]
    p2 = [r[1] for r in results]
    write_columns_csv(out.path("plateaus.csv"), ["theta", "plateau1", "spread1", "plateau2", "spread2"],
                      [thetas, [p.mean for p in p1], [p.spread for p in p1],
                       [p.mean for p in p2], [p.spread for p in p2]])
    a2 = abs(cfg["initial.alpha"]) ** 2
    fits = [fit_theta_curve(thetas, [p.mean for p in pl], a2) for pl in (p1, p2)]
    write_columns_csv(out.path("fit.csv"), ["quantity", "alpha2", "F0", "F1", "residual"],
                      [["plateau1", "plateau2"], [a2, a2], [f.F0 for f in fits],
                       [f.F1 for f in fits], [f.residual for f in fits]])
    out.summary["F0"] = _float_summary(fits[0].F0)
    out.summary["F1"] = _float_summary(fits[0].F1)


def cmd_fit(cfg, out: Output, args):
    with open(args.input, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "theta" not in rows[0] or args.column not in rows[0]:
        raise ConfigError(f"{args.input}: need columns 'theta' and {args.column!r}")
    th = np.array([float(r["theta"]) for r in rows])
    p = np.array([float(r[args.column]) for r in rows])
    fit = fit_theta_curve(th, p, args.alpha2)
    write_columns_csv(out.path("fit.csv"), ["quantity", "alpha2", "F0", "F1", "residual"],
                      [[args.column], [args.alpha2], [fit.F0], [fit.F1], [fit.residual]])
    out.summary.update(F0=_float_summary(fit.F0), F1=_float_summary(fit.F1))


def compare_with_ed(cfg):
    d2 = run_d2(cfg)
    ed = run_ed(cfg)
    if ed.t.shape != d2["t"].shape:
        raise RuntimeError("record grids differ between the variational and exact runs")
    return d2, ed


def cmd_oracle_compare(cfg, out: Output, args):
    d2, ed = compare_with_ed(cfg)
    diff = np.abs(d2["p_lz"] - ed.p_lz)
    write_columns_csv(out.path("comparison.csv"), ["t", "p_lz_d2", "p_lz_ed", "abs_diff"],
                      [d2["t"], d2["p_lz"], ed.p_lz, diff])
    out.summary["max_abs_diff"] = _float_summary(diff.max())


def convergence_scan(cfg, jobs=1):
    """P_LZ(t) for every multiplicity, plus the dt-halving difference at initial.M."""
    Ms = list(cfg["convergence.multiplicities"])
    series = _map(_run_for_m, [(cfg, M) for M in Ms], jobs)
    half = cfg.with_overrides(integrator__record_stride=2 * cfg["integrator.record_stride"])
    fine = run_d2(half, dt=cfg["integrator.dt"] / 2)
    coarse = run_d2(cfg)
    halving = float(np.max(np.abs(fine["p_lz"] - coarse["p_lz"])))
    return Ms, series, halving


def _run_for_m(item):
    cfg, M = item
    return run_d2(cfg, M=M)


def cmd_convergence(cfg, out: Output, args):
    Ms, series, halving = convergence_scan(cfg, args.jobs)
    t = series[0]["t"]
    write_columns_csv(out.path("convergence_series.csv"), ["t"] + [f"p_lz_M{M}" for M in Ms],
                      [t] + [s["p_lz"] for s in series])
    labels, values = [], []
    for a, b, sa, sb in zip(Ms, Ms[1:], series, series[1:]):
        labels.append(f"sup|M{a}-M{b}|")
        values.append(float(np.max(np.abs(sa["p_lz"] - sb["p_lz"]))))
    labels.append("sup|dt-dt/2|")
    values.append(halving)
    write_columns_csv(out.path("convergence.csv"), ["quantity", "value"], [labels, values])
    out.summary.update({k: _float_summary(v) for k, v in zip(labels, values)})
    out.summary["dt_halving_ok"] = halving < DT_HALVING_TOL
    if halving >= DT_HALVING_TOL:
        log.warning("halving dt moved P_LZ by %.3g (tolerance %g); the step is too coarse",
                    halving, DT_HALVING_TOL)


# --- bundled figure scenarios -----------------------------------------------

_YS = "initial.kind = cat\ninitial.alpha = 1\ninitial.theta = pi/2\ninitial.M = 8\n"
_SIN = ("model.drive = sinusoidal\nmodel.eps0 = 0\nmodel.Omega = pi/200\nmodel.phi0 = pi/2\n"
        "model.gamma = 0.05\nintegrator.t0 = -400\nintegrator.t1 = 400\nintegrator.record_stride = 5\n"
        "spectrum.t0 = -400\nspectrum.t1 = 400\nspectrum.n_points = 8001\n")

SCENARIOS = {
    "fig2": "model.v = 0.01\nmodel.gamma = 0.12\ninitial.kind = vacuum\ninitial.M = 6\n",
    "fig4": _YS + "model.v = 0.01\nmodel.gamma = 0.05\n",
    "fig6": _YS + _SIN + "model.A = 0.7\n",
    "fig7": _YS + _SIN + "model.A = 1.1\ned.n_trunc = 40\n",
    "fig8": _YS + _SIN + "model.A = 1.3\n",
}
FIG3_SPEEDS = (1.0, 0.01, 0.0025)
FIG3_RATIOS = (1.0, 0.25, 0.01)
FIG5_ALPHA2 = (1.0, 0.1, 0.01)
FIG9_ALPHAS = (1.0, 2.0, 3.0, 4.0)
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "figS1", "figS2")


def scenario(tag: str) -> ScenarioConfig:
    """Bundled configuration behind a figure tag (fig2, fig4, fig6, fig7, fig8)."""
    return parse_text(SCENARIOS[tag])


def fig3_config(v, ratio) -> ScenarioConfig:
    span = max(3.0 / v, 30.0)
    return parse_text(_YS + f"model.v = {v!r}\nmodel.gamma = {math.sqrt(ratio * v)!r}\n"
                            f"integrator.t0 = {-span!r}\nintegrator.t1 = {span!r}\n")


def gap_period_table(cfg: ScenarioConfig, arrays: dict, ns=(1, 2, 3, 4), t_gap=-28.0,
                     window=80.0, smooth=math.pi):
    """Gap of the avoided-crossing pair holding |n, down> at ``t_gap`` and the
    oscillation period of P_{n,down} within |t| < ``window``.

    A centered running mean over ``smooth`` (one period of the 2 omega ripple)
    is removed from consideration before peaks are located.
    """
    params = cfg.model()
    gaps, periods = [], []
    for n in ns:
        gaps.append(pair_gap(params, t_gap, (n - 1, "up"), (n, "down"), cfg["spectrum.n_trunc"]))
        _, y = moving_average(arrays["t"], arrays["p_down"][:, n], smooth)
        periods.append(oscillation_period(arrays["t"], y, -window, window))
    return np.array(gaps), np.array(periods)


def _figure_tasks(tag):
    """(name, config, kind) triples; kind in {'d2', 'ed'}."""
    if tag in ("fig2", "fig4", "fig6", "fig7", "fig8"):
        base = scenario(tag)
        if tag == "fig4":
            return [(f"theta_{name}", base.with_overrides(initial__theta=th), "d2")
                    for name, th in (("0", 0.0), ("pi_2", math.pi / 2), ("pi", math.pi))]
        tasks = [("trajectory", base, "d2")]
        if tag == "fig7":
            tasks.append(("ed", base, "ed"))
        return tasks
    if tag == "fig3":
        return [(f"v{v:g}_ratio{r:g}", fig3_config(v, r), "d2") for r in FIG3_RATIOS for v in FIG3_SPEEDS]
    if tag == "fig5":
        base = scenario("fig4")
        return [(f"alpha2_{a2:g}_theta{k:02d}",
                 base.with_overrides(initial__alpha=math.sqrt(a2), initial__theta=float(th)), "d2")
                for a2 in FIG5_ALPHA2 for k, th in enumerate(theta_grid(base["sweep.n_theta"]))]
    if tag == "fig9":
        base = scenario("fig8")
        return [(f"alpha{a:g}", base.with_overrides(initial__alpha=a), "d2") for a in FIG9_ALPHAS]
    if tag == "figS1":
        tasks = []
        for case in ("vacuum", "ys"):
            base = scenario("fig2") if case == "vacuum" else scenario("fig4")
            for M in (6, 8, 10):
                tasks.append((f"{case}_M{M}", base.with_overrides(initial__M=M), "d2"))
            tasks.append((f"{case}_ed", base, "ed"))
        return tasks
    if tag == "figS2":
        return [("trajectory", scenario("fig7"), "d2")]
    raise ConfigError(f"unknown figure tag {tag!r}; choose from {', '.join(FIGURES)}")


def _run_task(item):
    name, cfg, kind = item
    if kind == "ed":
        r = run_ed(cfg)
        return {"t": r.t, "p_lz": r.p_lz, "p_up": r.p_up, "p_down": r.p_down, "norm2": r.norm2}
    return run_d2(cfg)


def cmd_figure(_cfg, out: Output, args):
    tag = args.tag
    tasks = _figure_tasks(tag)
    if args.dt is not None:
        tasks = [(n, c.with_overrides(integrator__dt=args.dt), k) for n, c, k in tasks]
    if args.seed is not None:
        tasks = [(n, c.with_overrides(initial__seed=args.seed), k) for n, c, k in tasks]
    out.scenarios = {n: c for n, c, _ in tasks}
    results = dict(zip([t[0] for t in tasks], _map(_run_task, tasks, args.jobs)))
    for (name, cfg, kind) in tasks:
        arr = results[name]
        if kind == "ed":
            write_columns_csv(out.path(f"{tag}/{name}.csv"), ["t", "p_lz"], [arr["t"], arr["p_lz"]])
        else:
            write_trajectory_csv(out.path(f"{tag}/{name}.csv"), arr)

    first = tasks[0][1]
    if tag in ("fig2", "fig6", "fig7", "fig8"):
        cmd_spectrum(first, _Sub(out, f"{tag}/"), args)
    if tag == "fig6":
        arr = results["trajectory"]
        t, avg = moving_average(arr["t"], arr["p_lz"], 200.0)
        write_columns_csv(out.path("fig6/moving_average.csv"), ["t", "p_lz_avg"], [t, avg])
    if tag in ("fig3", "fig4", "fig5"):
        rows = []
        for name, cfg, _ in tasks:
            p1, p2 = plateaus(cfg, results[name])
            rows.append((name, cfg["initial.theta"], abs(cfg["initial.alpha"]) ** 2, p1.mean, p1.spread,
                         p2.mean, p2.spread))
        cols = list(zip(*rows))
        write_columns_csv(out.path(f"{tag}/plateaus.csv"),
                          ["run", "theta", "alpha2", "plateau1", "spread1", "plateau2", "spread2"], cols)
        if tag == "fig5":
            fits = []
            for a2 in FIG5_ALPHA2:
                sel = [r for r in rows if abs(r[2] - a2) < 1e-12]
                th = [r[1] for r in sel]
                for q, idx in (("plateau1", 3), ("plateau2", 5)):
                    f = fit_theta_curve(th, [r[idx] for r in sel], a2)
                    fits.append((q, a2, f.F0, f.F1, f.residual))
            write_columns_csv(out.path("fig5/fit.csv"), ["quantity", "alpha2", "F0", "F1", "residual"],
                              list(zip(*fits)))
    if tag == "figS1":
        for case in ("vacuum", "ys"):
            t = results[f"{case}_M6"]["t"]
            write_columns_csv(out.path(f"figS1/{case}_overlay.csv"),
                              ["t", "p_lz_M6", "p_lz_M8", "p_lz_M10", "p_lz_ed"],
                              [t] + [results[f"{case}_M{M}"]["p_lz"] for M in (6, 8, 10)]
                              + [results[f"{case}_ed"]["p_lz"]])
    if tag == "figS2":
        gaps, periods = gap_period_table(first, results["trajectory"])
        slope, icpt, r2 = gap_period_regression(gaps, periods)
        write_columns_csv(out.path("figS2/gap_period.csv"), ["n", "gap", "inv_gap", "period"],
                          [[1, 2, 3, 4], gaps, 1 / gaps, periods])
        write_columns_csv(out.path("figS2/regression.csv"), ["slope", "intercept", "r_squared"],
                          [[slope], [icpt], [r2]])
        out.summary["r_squared"] = _float_summary(r2)


class _Sub:
    """Output view writing into a subdirectory of a parent Output."""

    def __init__(self, parent, prefix):
        self.parent = parent
        self.prefix = prefix
        self.summary = parent.summary

    def path(self, name):
        return self.parent.path(self.prefix + name)


# --- entry point ------------------------------------------------------------

COMMANDS = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "sweep-theta": cmd_sweep_theta,
    "fit": cmd_fit,
    "oracle-compare": cmd_oracle_compare,
    "figure": cmd_figure,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lzsm", description="Driven qubit-cavity LZSM simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "figure":
            p.add_argument("tag", choices=FIGURES)
        elif name == "fit":
            p.add_argument("--input", required=True, help="CSV with a theta column")
            p.add_argument("--column", default="plateau1")
            p.add_argument("--alpha2", type=float, required=True)
        else:
            p.add_argument("--config", required=True)
        p.add_argument("--out", default="out")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int)
        p.add_argument("--dt", type=float)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _resolve_config(args) -> ScenarioConfig | None:
    if not hasattr(args, "config"):
        return None
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["initial__seed"] = args.seed
    if args.dt is not None:
        if not args.dt > 0:
            raise ConfigError("--dt must be positive")
        overrides["integrator__dt"] = args.dt
    return cfg.with_overrides(**overrides) if overrides else cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        cfg = _resolve_config(args)
        if args.command == "fit" and not os.path.isfile(args.input):
            raise ConfigError(f"cannot read {args.input}")
        if args.command == "figure":
            _figure_tasks(args.tag)  # validates the bundled scenarios before writing
    except ConfigError as exc:
        print(f"lzsm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Output(args.out, [args.command] + ([args.tag] if args.command == "figure" else []), cfg)
    try:
        COMMANDS[args.command](cfg, out, args)
    except _Aborted as exc:
        print(f"lzsm: numerical abort: {exc}", file=sys.stderr)
        out.manifest("aborted", out.scenarios)
        return EXIT_ABORT
    except ConfigError as exc:
        print(f"lzsm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out.manifest("ok", out.scenarios)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
