"""Batch front-end: ``mesonfringe {basis,potential,interfere,probe} --config cfg.json``.

Exit codes: 0 success, 2 config error, 3 infeasible or oversized model,
4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analysis
from .config import ExperimentConfig, read_config
from .errors import (AmbiguousFrequency, ConfigError, DimensionExceeded, FitDiverged,
                     InfeasibleCharges, InsufficientPoints, NoConvergence, NotInBasis,
                     PathInvalid)
from .gauge import ChargeConfig, build_lattice, enumerate_sector
from .protocol import meson_sector, prepare, run_fringe
from .svgplot import fringe_svg

EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_NUMERIC = 0, 2, 3, 4


def fmt(x) -> str:
    return format(float(x), ".17g")


def _clean(obj):
    """Make an object JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2)
        fh.write("\n")


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _pool_map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class Context:
    def __init__(self, cfg: ExperimentConfig, out: str, threads: int, svg: bool):
        self.cfg = cfg
        self.out = out
        self.threads = max(1, threads)
        self.svg = svg or cfg.output.svg
        os.makedirs(out, exist_ok=True)

    def path(self, name):
        return os.path.join(self.out, name)

    def lattice(self):
        self.cfg.require_lattice()
        return build_lattice(self.cfg.lattice.dims, self.cfg.lattice.boundary), \
            self.cfg.group.build()

    def prep_kwargs(self):
        e, p = self.cfg.engine, self.cfg.protocol
        return {"anchor": p.anchor, "axis": p.axis, "seed": e.seed, "tol": e.tol,
                "dense_threshold": e.dense_threshold, "max_dim": e.max_dim}

    def times(self, omega_estimate):
        t = self.cfg.protocol.times
        if t.stop is None:
            grid = analysis.default_times(omega_estimate, t.count)
            return grid + t.start
        return np.linspace(t.start, t.stop, t.count)

    def fit(self, series):
        a = self.cfg.analysis
        return analysis.fit_fringe(series, max_iter=a.max_iter, step_tol=a.step_tol,
                                   ambiguity=a.ambiguity)


def cmd_basis(ctx: Context) -> int:
    spec, group = ctx.lattice()
    p = ctx.cfg.protocol
    seps = sorted(set(p.R_list) | {r + l for r in p.R_list for l in p.L_list})
    sectors = []
    for sep in seps:
        try:
            sector = meson_sector(spec, group, sep, p.anchor, p.axis, ctx.cfg.engine.max_dim)
        except ValueError as exc:
            raise ConfigError(f"protocol: {exc}") from None
        sectors.append((f"R={sep}", sector))
    vacuum = enumerate_sector(spec, group, ChargeConfig(), max_dim=ctx.cfg.engine.max_dim)
    sectors.insert(0, ("vacuum", vacuum))
    report = []
    for name, sector in sectors:
        print(f"sector {name}: dim {sector.dim}")
        entry = json.loads(sector.to_json(ctx.cfg.output.basis_dump))
        entry["sector"] = name
        report.append(entry)
    write_json(ctx.path("basis.json"), {"config": ctx.cfg.to_dict(), "sectors": report})
    return EXIT_OK


def cmd_potential(ctx: Context) -> int:
    spec, group = ctx.lattice()
    ctx.cfg.protocol.require("R")
    couplings = ctx.cfg.couplings.build()
    R_list = ctx.cfg.protocol.R_list

    def run(c):
        try:
            return analysis.static_potential(spec, group, c, R_list, **ctx.prep_kwargs())
        except ValueError as exc:
            raise ConfigError(f"protocol: {exc}") from None

    tables = _pool_map(run, couplings, ctx.threads)
    rows, fits = [], []
    for c, table in zip(couplings, tables):
        for R, E0, V in zip(table.R, table.E0, table.V):
            rows.append((c.g2, int(R), E0, V))
        entry = {"g2": c.g2, "diagnostics": table.diagnostics}
        try:
            entry.update(table.fit().to_dict())
        except InsufficientPoints as exc:
            entry["fit"] = None
            entry["fit_error"] = str(exc)
        fits.append(entry)
        if "gamma" in entry:
            print(f"g2={c.g2:g}: gamma={entry['gamma']:.12g}")
    write_csv(ctx.path("potential.csv"), ["g2", "R", "E0", "V"],
              [(float(g), r, float(e), float(v)) for g, r, e, v in rows])
    summary = {"config": ctx.cfg.to_dict(), "potentials": fits}
    if len(fits) == 1:
        summary.update({k: fits[0].get(k) for k in ("gamma", "intercept", "residual")})
    write_json(ctx.path("potential.json"), summary)
    return EXIT_OK


def _interfere_task(ctx, spec, group, c, R, L):
    params = ctx.cfg.engine.evolve_params()
    try:
        register = prepare(spec, group, c, R, L, ctx.cfg.protocol.mode, **ctx.prep_kwargs())
    except ValueError as exc:
        raise ConfigError(f"protocol: {exc}") from None
    estimate = analysis.strong_coupling_omega(group, c, L)
    times = ctx.times(estimate)
    warnings = []
    if len(times) > 1 and not analysis.below_nyquist(times, estimate):
        warnings.append(f"expected omega {estimate:.6g} is above the Nyquist limit of the T grid")
    results = run_fringe(register, times, params)
    series = analysis.FringeSeries.from_results(results, R=R, L=L, g2=c.g2,
                                                mode=ctx.cfg.protocol.mode)
    entry = {"g2": c.g2, "R": R, "L": L, "delta_e": register.delta_e,
             "energies": list(register.energies),
             "leakage_max": series.metadata["leakage_max"],
             "sectors": register.diagnostics, "warnings": warnings}
    fit = None
    try:
        fit = ctx.fit(series)
        entry["fit"] = fit.to_dict()
        tension = analysis.extract_tension(fit, L)
        entry["gamma"] = tension.gamma
        entry["gamma_sigma"] = tension.sigma
    except InsufficientPoints as exc:
        entry["fit"] = None
        entry["fit_error"] = str(exc)
    return results, series, fit, entry


def cmd_interfere(ctx: Context) -> int:
    spec, group = ctx.lattice()
    p = ctx.cfg.protocol
    p.require("R", "L")
    tasks = [(c, R, L) for c in ctx.cfg.couplings.build() for R in p.R_list for L in p.L_list]
    outcomes = _pool_map(lambda t: _interfere_task(ctx, spec, group, *t), tasks, ctx.threads)

    rows, entries, panels = [], [], []
    for (c, R, L), (results, series, fit, entry) in zip(tasks, outcomes):
        for w in entry["warnings"]:
            print(f"warning: g2={c.g2:g} R={R} L={L}: {w}", file=sys.stderr)
        for r in results:
            rec = r.as_record()
            rows.append((c.g2, R, L, *[float(v) for v in rec.values()]))
        entries.append(entry)
        if fit is not None:
            print(f"g2={c.g2:g} R={R} L={L}: omega={fit.omega:.12g} "
                  f"gamma={entry['gamma']:.12g}")
        if ctx.svg:
            ft = fp = None
            if fit is not None and len(series) > 1:
                ft = np.linspace(series.times[0], series.times[-1], 400)
                fp = fit.model(ft)
            panels.append((f"g2={c.g2:g} R={R} L={L}", series.times, series.p_r, ft, fp))
    header = ["g2", "R", "L", "T", "P_R", "P_RL", "leakage",
              "amp_R_re", "amp_R_im", "amp_RL_re", "amp_RL_im"]
    write_csv(ctx.path("fringe.csv"), header,
              [(float(r[0]), *r[1:3], *r[3:]) for r in rows])
    summary = {"config": ctx.cfg.to_dict(), "fringes": entries}
    if len(entries) == 1:
        summary["omega"] = (entries[0]["fit"] or {}).get("omega")
        summary["gamma"] = entries[0].get("gamma")
    write_json(ctx.path("interfere.json"), summary)
    if ctx.svg:
        with open(ctx.path("fringe.svg"), "w") as fh:
            fh.write(fringe_svg(panels, title="interference fringes"))
    return EXIT_OK


def cmd_probe(ctx: Context) -> int:
    cfg = ctx.cfg
    p = cfg.protocol
    p.require("R", "L")
    threshold = cfg.analysis.area_law_threshold
    rows, reports = [], []
    if cfg.toy is not None:
        betas = cfg.toy.beta if isinstance(cfg.toy.beta, list) else [cfg.toy.beta]
        count = p.times.count

        def run(beta):
            return analysis.toy_area_law_probe(cfg.toy.gamma, beta, p.R_list, p.L_list,
                                               count=count, threshold=threshold)
        for beta, rep in zip(betas, _pool_map(run, betas, ctx.threads)):
            reports.append({"beta": beta, "gamma": cfg.toy.gamma, **rep.to_dict()})
            rows += [("toy", beta, R, L, rep.omega[i, j], rep.omega[i, j] / L)
                     for i, R in enumerate(p.R_list) for j, L in enumerate(p.L_list)]
            print(f"beta={beta:g}: {rep.verdict}")
    else:
        spec, group = ctx.lattice()
        couplings = cfg.couplings.build()
        tasks = [(c, R, L) for c in couplings for R in p.R_list for L in p.L_list]
        outcomes = _pool_map(lambda t: _interfere_task(ctx, spec, group, *t), tasks, ctx.threads)
        fits = {(t[0].g2, t[1], t[2]): o[2] for t, o in zip(tasks, outcomes)}
        for c in couplings:
            omega = np.array([[fits[(c.g2, R, L)].omega if fits[(c.g2, R, L)] else math.nan
                               for L in p.L_list] for R in p.R_list])
            rep = analysis.area_law_verdict(p.R_list, p.L_list, omega, threshold)
            reports.append({"g2": c.g2, **rep.to_dict()})
            rows += [("lattice", c.g2, R, L, omega[i, j], omega[i, j] / L)
                     for i, R in enumerate(p.R_list) for j, L in enumerate(p.L_list)]
            print(f"g2={c.g2:g}: {rep.verdict}")
    write_csv(ctx.path("omega_matrix.csv"), ["source", "parameter", "R", "L", "omega",
                                             "omega_over_L"],
              [(s, float(x), R, L, float(w), float(r)) for s, x, R, L, w, r in rows])
    summary = {"config": cfg.to_dict(), "probes": reports}
    if len(reports) == 1:
        summary["verdict"] = reports[0]["verdict"]
    write_json(ctx.path("probe.json"), summary)
    return EXIT_OK


COMMANDS = {"basis": cmd_basis, "potential": cmd_potential, "interfere": cmd_interfere,
            "probe": cmd_probe}


def build_parser():
    parser = argparse.ArgumentParser(prog="mesonfringe",
                                     description="Meson interferometry on abelian lattice gauge theories.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default="-", help="JSON config file, '-' for stdin")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--svg", action="store_true", help="also write fringe.svg")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None, help="overrides engine.seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = read_config(sys.stdin if args.config == "-" else args.config)
        if args.seed is not None:
            cfg.engine.seed = args.seed
            cfg.engine.validate("engine")
        if args.out is not None:
            cfg.output.directory = args.out
        ctx = Context(cfg, cfg.output.directory, args.threads, args.svg)
        return COMMANDS[args.command](ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleCharges, DimensionExceeded, PathInvalid, NotInBasis) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (NoConvergence, FitDiverged, AmbiguousFrequency) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
