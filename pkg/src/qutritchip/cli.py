"""Command-line workflows: spectra, fringes, tomography, inequalities, metrology, graphs.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import ring as ringmod
from . import tomography as tomo
from .analysis import bell, contextuality, graphs, metrology, qkd
from .config import ConfigError, RunConfig, dump_json, load_config, resolve_seed
from .errors import NumericalError
from .experiment import PAIRS, fit_fringe, qubit_fringe, rhom_fringe
from .qcore import fidelity, i_concurrence_lower_bound, max_entangled

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ output

class Writer:
    """Collects output files and writes them in a fixed order."""

    def __init__(self, out_dir: Path, gnuplot: bool):
        self.out = out_dir
        self.gnuplot = gnuplot
        self.written: list[Path] = []

    def text(self, name: str, content: str):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(content)
        self.written.append(path)
        return path

    def csv(self, name: str, header, rows, plot: tuple[str, list[str]] | None = None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        self.text(name, buf.getvalue())
        if self.gnuplot:
            self.text(Path(name).stem + ".gp", gnuplot_stub(name, header, plot))

    def json(self, name: str, obj):
        self.text(name, dump_json(obj))


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return x


def gnuplot_stub(csv_name: str, header, plot=None) -> str:
    """A plain gnuplot script plotting every column against the first one."""
    xlabel = header[0]
    cols = plot[1] if plot else list(header[1:])
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{xlabel}'",
        f"set title '{plot[0] if plot else Path(csv_name).stem}'",
    ]
    parts = [f"'{csv_name}' using 1:{header.index(c) + 1} with lines" for c in cols]
    lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


def _need_seed(seed):
    if seed is None:
        raise ConfigError("this command is stochastic: give --seed, QSIM_SEED or \"seed\" in the config")
    return seed


# ----------------------------------------------------------------- commands

def cmd_spectrum(cfg: RunConfig, w: Writer, source: int = 1, start: float | None = None,
                 stop: float | None = None, n_points: int | None = None) -> dict:
    p = cfg.ring(source)
    start = cfg.spectrum.start_nm if start is None else start
    stop = cfg.spectrum.stop_nm if stop is None else stop
    n = cfg.spectrum.n_points if n_points is None else n_points
    if not start < stop:
        raise UsageError(f"empty wavelength range [{start}, {stop}]")
    if n < 2:
        raise UsageError("need at least two points")
    spec = ringmod.sweep_spectrum(p, start, stop, n)
    name = f"spectrum_source{source}"
    w.text(name + ".csv", spec.to_csv())
    if w.gnuplot:
        w.text(name + ".gp", gnuplot_stub(name + ".csv",
                                          ["wavelength_nm", "drop_power", "through_power"]))
    res = ringmod.find_resonances(p, start, stop)
    rows = []
    for r in res:
        try:
            regime = ringmod.classify_coupling(p, r.wavelength_nm)
            fwhm = ringmod.linewidth(p, r.wavelength_nm)
        except (ringmod.NotAResonanceError, ValueError):
            regime, fwhm = None, None
        rows.append({"wavelength_nm": r.wavelength_nm, "through_power": r.through_power,
                     "drop_power": r.drop_power, "fwhm_pm": None if fwhm is None else fwhm * 1e3,
                     "regime": regime})
    spacing = np.diff([r.wavelength_nm for r in res])
    report = {"source": source, "resonances": rows,
              "fsr_nm": float(spacing.mean()) if len(spacing) else None,
              "ring_fsr_model_nm": p.ring_fsr_nm, "files": [name + ".csv"]}
    w.json(name + ".json", report)
    return report


def _fringe_counts(f, cfg: RunConfig, rng):
    eff = np.asarray(cfg.noise.port_efficiencies)
    scale = cfg.counts.pair_rate_hz * cfg.counts.fringe_integration_s
    acc = cfg.noise.accidental_rate * cfg.counts.fringe_integration_s
    out = {}
    for k, v in f.values.items():
        eta = eff[int(k[0]) - 1] * eff[int(k[1]) - 1]
        out[k] = rng.poisson(scale * eta * np.asarray(v) + acc).astype(float)
    return out


def cmd_fringes(cfg: RunConfig, w: Writer, kind: str, pair: str, seed: int) -> dict:
    if kind not in ("rhom", "qubit"):
        raise UsageError(f"unknown fringe kind {kind!r}")
    if pair not in PAIRS:
        raise UsageError(f"unknown source pair {pair!r}; choose from {sorted(PAIRS)}")
    period = np.pi if kind == "rhom" else 2 * np.pi
    scan = np.linspace(0, 2 * np.pi, 2 * cfg.counts.fringe_points - 1)
    make = rhom_fringe if kind == "rhom" else qubit_fringe
    f = make(pair, scan, cfg.noise)
    rng = np.random.default_rng(seed)
    counts = _fringe_counts(f, cfg, rng)
    keys = list(f.values)
    header = ["phase_rad"] + [f"cc_{k}" for k in keys]
    w.csv(f"fringe_{kind}_{pair}.csv", header,
          [[ph] + [counts[k][n] for k in keys] for n, ph in enumerate(scan)],
          plot=(f"{kind} fringe, sources {pair}", header[1:]))
    per_key = {}
    for k in keys:
        fit = fit_fringe(scan, counts[k], period)
        boot = [fit_fringe(scan, rng.poisson(counts[k]), period).visibility
                for _ in range(cfg.counts.mc_samples)]
        per_key[k] = {"visibility": fit.visibility, "visibility_std": float(np.std(boot, ddof=1)),
                      "visibility_model": fit_fringe(scan, f.values[k], period).visibility,
                      "fit_phase_rad": fit.phase, "degenerate": fit.degenerate}
    main = per_key[keys[0]]
    report = {"kind": kind, "pair": pair, "period_rad": period, "seed": seed,
              "visibility": main["visibility"], "std": main["visibility_std"],
              "visibility_model": main["visibility_model"], "detector_pairs": per_key,
              "files": [f"fringe_{kind}_{pair}.csv"]}
    w.json(f"fringe_{kind}_{pair}.json", report)
    return report


def cmd_tomography(cfg: RunConfig, w: Writer, seed: int, threads: int = 1) -> dict:
    target = max_entangled()
    rho_true = cfg.noise.state(cfg.pump)
    ss = np.random.SeedSequence(seed)
    data_seed, mc_seed = ss.spawn(2)
    counts = tomo.simulate_counts(rho_true, cfg.counts.tomography_counts_per_setting,
                                  np.random.default_rng(data_seed))
    opts = dict(method=cfg.tomography.method, projection=cfg.tomography.projection,
                normalization=cfg.tomography.normalization)
    res = tomo.analyze(counts, cfg.counts.mc_samples, mc_seed, target, threads=threads, **opts)
    sched = tomo.schedule_81()
    w.csv("tomography_counts.csv", ["setting", "signal_state", "idler_state", "counts"],
          [[k, *s.label.split("|"), c] for k, (s, c) in enumerate(zip(sched, counts))])
    rho = res.rho
    w.csv("rho.csv", ["row", "col", "real", "imag"],
          [[r, c, rho[r, c].real, rho[r, c].imag] for r in range(9) for c in range(9)])
    w.json("rho.json", {"real": rho.real, "imag": rho.imag, "index": "3*signal+idler"})
    report = {"seed": seed, "fidelity": res.fidelity_to_target, "fidelity_std": res.fidelity_std,
              "purity": res.purity, "max_imag": res.max_imag, "mc_samples": res.mc_samples,
              "i_concurrence_lower_bound": i_concurrence_lower_bound(rho),
              "true_fidelity": fidelity(rho_true, target), **opts,
              "counts_per_setting": cfg.counts.tomography_counts_per_setting,
              "files": ["tomography_counts.csv", "rho.csv", "rho.json"]}
    w.json("tomography.json", report)
    return report


def _cglmp(cfg: RunConfig, w: Writer, seed: int) -> dict:
    rho = cfg.noise.state(cfg.pump)
    ideal = bell.all_tables(max_entangled())
    exact = bell.all_tables(rho)
    n = cfg.counts.inequality_counts_per_setting
    rng = np.random.default_rng(seed)

    def draw(tables):
        return {ab: rng.poisson(n * t) for ab, t in tables.items()}

    def norm(counts):
        return {ab: c / c.sum() for ab, c in counts.items()}

    measured = draw(exact)
    est = norm(measured)
    boots = [norm({ab: rng.poisson(c) for ab, c in measured.items()})
             for _ in range(cfg.counts.mc_samples)]
    rows = []
    for (label, ab, k), (_, e) in zip(bell.TABLE_ROWS, bell.cglmp_table(ideal)):
        val = bell.p_shift(est[ab], k)
        std = float(np.std([bell.p_shift(b[ab], k) for b in boots], ddof=1))
        rows.append([label, val, std, e])
    w.csv("cglmp_table.csv", ["probability", "result", "std", "expected"], rows)
    i3 = bell.cglmp_i3(est)
    report = {"seed": seed, "I3": i3, "I3_std": float(np.std([bell.cglmp_i3(b) for b in boots], ddof=1)),
              "I3_model": bell.cglmp_i3(exact), "I3_expected": bell.cglmp_i3(ideal),
              "classical_bound": 2.0, "counts_per_setting_pair": n, "files": ["cglmp_table.csv"]}
    w.json("cglmp.json", report)
    return report


def _ks(cfg: RunConfig, w: Writer, seed: int) -> dict:
    n = cfg.counts.inequality_counts_per_setting
    lhs_ideal, cond_ideal = contextuality.ks_lhs(max_entangled())
    ss = np.random.SeedSequence(seed)
    data_seed, boot_seed = ss.spawn(2)
    tables = contextuality.simulate_contexts(cfg.pump.ket(), n, data_seed, cfg.noise)
    lhs, cond = contextuality.ks_lhs_from_counts(tables)
    ns = contextuality.no_signalling_checks(tables)
    rng = np.random.default_rng(boot_seed)
    boot_cond, boot_lhs, boot_ns = [], [], []
    for _ in range(cfg.counts.mc_samples):
        bt = [contextuality.ContextCounts(t.context, rng.poisson(t.counts)) for t in tables]
        l, c = contextuality.ks_lhs_from_counts(bt)
        boot_lhs.append(l)
        boot_cond.append(c)
        boot_ns.append([v for _, v in contextuality.no_signalling_checks(bt)])
    labels = {"D1_A": "P(D1_A=1|D0_B=1)", "T0_A": "P(T0_A=1|D0_B=1)", "T1_A": "P(T1_A=1|D0_B=1)"}
    w.csv("ks_table.csv", ["conditional_probability", "result", "std", "expected"],
          [[labels[k], cond[k], float(np.std([b[k] for b in boot_cond], ddof=1)), cond_ideal[k]]
           for k in labels])
    ns_std = np.std(np.array(boot_ns), axis=0, ddof=1)
    w.csv("no_signalling_table.csv", ["contexts", "result", "std"],
          [[name, v, s] for (name, v), s in zip(ns, ns_std)])
    report = {"seed": seed, "lhs": lhs, "lhs_std": float(np.std(boot_lhs, ddof=1)),
              "lhs_model": contextuality.ks_lhs(cfg.noise.state(cfg.pump))[0],
              "lhs_expected": lhs_ideal, "conditionals": cond, "conditionals_expected": cond_ideal,
              "no_signalling": dict(ns), "counts_per_context": n,
              "files": ["ks_table.csv", "no_signalling_table.csv"]}
    w.json("ks.json", report)
    return report


def _qkd(cfg: RunConfig, w: Writer, f: float | None) -> dict:
    if f is None:
        f = fidelity(cfg.noise.state(cfg.pump), max_entangled())
    if not 0 <= f <= 1:
        raise UsageError("fidelity must lie in [0, 1]")
    rep = qkd.qkd_report(f)
    rep["verdict"] = "secure" if rep["secure"] else "insecure"
    w.csv("qkd.csv", ["fidelity", "error_rate", "bound", "verdict"],
          [[rep["fidelity"], rep["error_rate"], rep["bound"], rep["verdict"]]])
    rep["files"] = ["qkd.csv"]
    w.json("qkd.json", rep)
    return rep


def cmd_inequalities(cfg: RunConfig, w: Writer, which: str, seed: int | None,
                     qkd_fidelity: float | None = None) -> dict:
    if which == "cglmp":
        return _cglmp(cfg, w, _need_seed(seed))
    if which == "ks":
        return _ks(cfg, w, _need_seed(seed))
    if which == "qkd":
        return _qkd(cfg, w, qkd_fidelity)
    raise UsageError(f"unknown inequality {which!r}")


def cmd_metrology(cfg: RunConfig, w: Writer) -> dict:
    g = np.linspace(-np.pi, np.pi, cfg.metrology.grid_points)
    scan = metrology.pump_phase_map(g, g, cfg.noise)
    pairs = metrology.ALL_PAIRS
    w.csv("metrology_map.csv", ["pz1_rad", "pz2_rad"] + [f"cc_{p}" for p in pairs],
          [[a, b] + [scan[p][i, j] for p in pairs] for i, a in enumerate(g) for j, b in enumerate(g)])
    cut = metrology.sensitivity_scan(
        grid=np.linspace(-np.pi / 2, np.pi / 2, cfg.metrology.cut_points), noise=cfg.noise)
    w.csv("metrology_cut.csv", ["phi_rad"] + [f"cc_{p}" for p in cut.curves],
          [[ph] + [c[n] for c in cut.curves.values()] for n, ph in enumerate(cut.phases)])
    groups = metrology.degenerate_groups(scan)
    spread = max(float(np.max(np.abs(scan[ps[0]] - scan[q]))) for ps in groups for q in ps)
    reference = 1.476     # reported experimental mean sensitivity
    report = {"sensitivity": cut.sensitivity, "averages": cut.averages,
              "reference": reference,
              "within_0.1_of_reference": {k: bool(abs(v - reference) <= 0.1)
                                          for k, v in cut.averages.items()},
              "benchmarks": {"two_path": metrology.TWO_PATH_BENCHMARK,
                             "three_path": metrology.THREE_PATH_BENCHMARK},
              "degenerate_groups": groups, "max_group_spread": spread,
              "files": ["metrology_map.csv", "metrology_cut.csv"]}
    w.json("metrology.json", report)
    return report


def cmd_graph(path: str, w: Writer) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"graph file not found: {p}")
    try:
        g = graphs.Graph.from_json(p.read_text())
    except (json.JSONDecodeError, ValueError, TypeError, KeyError) as e:
        raise ConfigError(f"malformed graph file: {e}") from e
    count = graphs.perfect_matchings(g)
    terms = graphs.state_terms(g)
    report = {"vertices": len(g.vertices), "edges": len(g.edges), "perfect_matchings": count,
              "terms": terms}
    if not g.vertices:
        report["note"] = "empty graph: the empty matching counts once"
    amps = graphs.chip_state_from_graph(g)
    if amps is not None:
        from .experiment import build_state, coincidence_probs
        probs = coincidence_probs(build_state(amps), np.eye(3), np.eye(3))
        report["engine_terms"] = int(np.count_nonzero(probs > 1e-12))
        report["engine_agrees"] = report["engine_terms"] == len(set(terms))
    w.json("graph.json", report)
    return report


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="RNG seed (overrides QSIM_SEED and config)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="parallelism cap")
    common.add_argument("--gnuplot-stub", action="store_true", help="also write gnuplot scripts")

    ap = argparse.ArgumentParser(prog="qutritchip", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("spectrum", parents=[common])
    s.add_argument("--source", type=int, default=1)
    s.add_argument("--range", nargs=2, type=float, metavar=("START_NM", "STOP_NM"))
    s.add_argument("--points", type=int)
    f = sub.add_parser("fringes", parents=[common])
    f.add_argument("--kind", required=True)
    f.add_argument("--pair", required=True)
    sub.add_parser("tomography", parents=[common])
    i = sub.add_parser("inequalities", parents=[common])
    i.add_argument("--which", required=True)
    i.add_argument("--fidelity", type=float, help="fidelity for the qkd estimate")
    sub.add_parser("metrology", parents=[common])
    g = sub.add_parser("graph", parents=[common])
    g.add_argument("graph_file")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = load_config(args.config)
        seed = resolve_seed(args.seed, cfg)
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        w = Writer(Path(args.out or cfg.output_dir), args.gnuplot_stub)
        c = args.command
        if c == "spectrum":
            lo, hi = args.range if args.range else (None, None)
            rep = cmd_spectrum(cfg, w, args.source, lo, hi, args.points)
        elif c == "fringes":
            rep = cmd_fringes(cfg, w, args.kind, args.pair, _need_seed(seed))
        elif c == "tomography":
            rep = cmd_tomography(cfg, w, _need_seed(seed), args.threads)
        elif c == "inequalities":
            rep = cmd_inequalities(cfg, w, args.which, seed, args.fidelity)
        elif c == "metrology":
            rep = cmd_metrology(cfg, w)
        else:
            rep = cmd_graph(args.graph_file, w)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, UsageError, ValueError, KeyError) as e:
        # DomainError and other invalid-input errors derive from ValueError
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(dump_json(rep), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
