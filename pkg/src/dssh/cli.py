"""
Command-line front end: ``dssh <command> --config run.cfg [--out dir]``.

A config is a flat ``key = value`` file.  Values are Python literals or
arithmetic in numbers and ``pi`` (``alpha = pi/2``); anything else is taken
as a bare string (``model = dssh``).  Unknown keys are an error.  Every
number is written with 17 significant digits so outputs round-trip and
repeated runs are byte-identical.

Exit codes: 0 success, 2 bad config, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import csv
import json
import math
import operator
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from dssh import circuit, edgeskin, photonic, topology
from dssh.hamiltonians import Boundary, ChainTermination, LatticeParams, ModelKind, build_model
from dssh.spectral import DefectiveMatrixError, eig_biorthogonal, eigenvalues, gamma_r_modes

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

LATTICE_KEYS = ("n_cells", "t1", "t2", "gamma1", "gamma2", "gamma", "delta1", "delta2", "g_mag", "alpha")
CIRCUIT_KEYS = ("l1", "l2", "c1", "c2", "r1", "r2", "rc1", "rc2")

# key -> accepted kind
SCHEMA = {
    "model": "str",
    "boundary": "str",
    "termination": "str",
    "n_cells": "int",
    "t1": "float",
    "t2": "float",
    "gamma1": "float",
    "gamma2": "float",
    "gamma": "float",
    "delta1": "float",
    "delta2": "float",
    "g_mag": "float",
    "alpha": "float",
    "sweep_param": "str",
    "sweep_values": "list",
    "sweep_start": "float",
    "sweep_stop": "float",
    "sweep_step": "float",
    "edge_tol": "float",
    "alpha_min": "float",
    "alpha_max": "float",
    "n_alpha": "int",
    "g_min": "float",
    "g_max": "float",
    "n_g": "int",
    "l1": "float",
    "l2": "float",
    "c1": "float",
    "c2": "float",
    "r1": "float",
    "r2": "float",
    "rc1": "float",
    "rc2": "float",
    "t_end": "float",
    "dt": "float",
    "traj_stride": "int",
    "g": "float",
    "kappa1": "float",
    "kappa2": "float",
    "n_k": "int",
    "seed": "int",
    "format": "str",
}

SWEEPABLE = ("t1", "t2", "gamma1", "gamma2", "gamma", "delta1", "delta2", "g_mag", "alpha")


class ConfigError(ValueError):
    pass


_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, str, bool)):
        return node.value
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, (ast.List, ast.Tuple)):
        return [_eval(e) for e in node.elts]
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.operand))
    raise ValueError("unsupported expression")


def parse_value(text: str):
    """Literal or ``pi`` arithmetic; otherwise the stripped text itself."""
    text = text.strip()
    try:
        return _eval(ast.parse(text, mode="eval"))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError):
        return text


def _coerce(key, value):
    kind = SCHEMA[key]
    if kind == "str":
        if not isinstance(value, str):
            value = str(value)
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{key}: expected a finite number, got {value!r}")
        return float(value)
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"{key}: expected a list of numbers, got {value!r}")
    return [float(v) for v in value]


def load_config(path) -> dict:
    """Read and validate a flat ``key = value`` file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if parser.sections() != ["run"]:
        raise ConfigError(f"{path}: sections are not allowed, the config is a flat key = value list")
    cfg = {}
    for key, raw in parser["run"].items():
        if key not in SCHEMA:
            raise ConfigError(f"{path}: unknown key {key!r}")
        cfg[key] = _coerce(key, parse_value(raw))
    return cfg


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_table(out: Path, name: str, header, rows, form: str) -> Path:
    """Write rows as ``name.csv`` or ``name.json`` (list of records)."""
    out.mkdir(parents=True, exist_ok=True)
    if form == "json":
        path = out / f"{name}.json"
        recs = [dict(zip(header, _jsonable(list(r)))) for r in rows]
        path.write_text(json.dumps(recs, indent=1) + "\n")
        return path
    path = out / f"{name}.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def write_json(out: Path, name: str, payload) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def _enum(cls, value, key):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(f"{key}: {value!r} is not one of {choices}") from None


def lattice_from(cfg, **defaults) -> LatticeParams:
    kw = {k: cfg.get(k, defaults.get(k, getattr(LatticeParams, k))) for k in LATTICE_KEYS}
    kw["boundary"] = _enum(Boundary, cfg.get("boundary", defaults.get("boundary", "open")), "boundary")
    try:
        return LatticeParams(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _model(cfg, default="nonreciprocal_dssh"):
    return _enum(ModelKind, cfg.get("model", default), "model")


def _sweep_values(cfg):
    if "sweep_values" in cfg:
        vals = cfg["sweep_values"]
    elif any(k in cfg for k in ("sweep_start", "sweep_stop", "sweep_step")):
        try:
            start, stop, step = cfg["sweep_start"], cfg["sweep_stop"], cfg["sweep_step"]
        except KeyError as exc:
            raise ConfigError(f"sweep range needs sweep_start, sweep_stop and sweep_step (missing {exc})") from None
        if step <= 0 or stop < start:
            raise ConfigError("sweep range needs sweep_step > 0 and sweep_stop >= sweep_start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        vals = [round(start + i * step, 12) for i in range(n)]
    else:
        raise ConfigError("sweep_param given without sweep_values or a sweep range")
    if not vals:
        raise ConfigError("sweep has no values")
    return vals


def _pool_map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _spectrum_rows(ws, tag=None):
    rows = []
    for i, e in enumerate(ws):
        row = [i, e.real, e.imag, abs(e)]
        rows.append(row if tag is None else [tag] + row)
    return rows


def cmd_spectrum(cfg, out: Path, form: str, threads: int = 1):
    """Open and periodic spectra, or a parameter sweep of both."""
    model = _model(cfg)
    base = lattice_from(cfg)
    sweep = cfg.get("sweep_param")
    written = []
    if not sweep:
        for bc, name in ((Boundary.OPEN, "spectrum_obc"), (Boundary.PERIODIC, "spectrum_pbc")):
            ws = eigenvalues(build_model(model, base.with_(boundary=bc)))
            written.append(write_table(out, name, ["index", "re", "im", "abs"], _spectrum_rows(ws), form))
        return written
    if sweep not in SWEEPABLE:
        raise ConfigError(f"sweep_param must be one of {', '.join(SWEEPABLE)}, got {sweep!r}")
    vals = _sweep_values(cfg)
    try:
        points = [base.with_(**{sweep: v}) for v in vals]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    def run(p):
        return (
            eigenvalues(build_model(model, p.with_(boundary=Boundary.OPEN))),
            eigenvalues(build_model(model, p.with_(boundary=Boundary.PERIODIC))),
        )

    results = _pool_map(run, points, threads)
    header = ["param", "index", "re", "im", "abs"]
    obc = [r for v, (wo, _) in zip(vals, results) for r in _spectrum_rows(wo, v)]
    pbc = [r for v, (_, wp) in zip(vals, results) for r in _spectrum_rows(wp, v)]
    written.append(write_table(out, "sweep", header, obc, form))
    written.append(write_table(out, "sweep_pbc", header, pbc, form))
    return written


def cmd_phase_diagram(cfg, out: Path, form: str, threads: int = 1):
    """Phase boundaries and region labels on an (alpha, |G|) grid."""
    n_a, n_g = cfg.get("n_alpha", 101), cfg.get("n_g", 101)
    if n_a < 1 or n_g < 1:
        raise ConfigError("n_alpha and n_g must be >= 1")
    gamma2 = cfg.get("gamma2", 2.0)
    if gamma2 <= 0:
        raise ConfigError("gamma2 must be positive")
    alphas = np.linspace(cfg.get("alpha_min", 0.0), cfg.get("alpha_max", math.pi), n_a)
    gs = np.linspace(cfg.get("g_min", 0.0), cfg.get("g_max", 4.0), n_g)
    rows_by_alpha = _pool_map(lambda a: topology.phase_diagram([a], gs, gamma2), alphas, threads)
    rows = [[c.alpha, c.g_mag, c.a_plus, c.a_minus, c.region.value] for block in rows_by_alpha for c in block]
    return [write_table(out, "phase_diagram", ["alpha", "g", "a_plus", "a_minus", "region"], rows, form)]


def cmd_edge_modes(cfg, out: Path, form: str, threads: int = 1):
    """Biorthogonal cell profiles of every mode and the flagged edge pair."""
    p = lattice_from(cfg, boundary="open")
    if p.boundary is not Boundary.OPEN:
        raise ConfigError("edge-modes needs boundary = open")
    term = _enum(ChainTermination, cfg.get("termination", "full"), "termination")
    tol = cfg.get("edge_tol", 1e-3)
    n = p.n_cells
    written = []
    if term is not ChainTermination.FULL:
        st = edgeskin.broken_chain_states(p, term)
        prof = edgeskin.projection_profile(st.left, st.right, n, term)
        rows = [[0, c + 1, abs(v)] for c, v in enumerate(prof)]
        written.append(write_table(out, "edge_modes", ["mode", "cell", "abs_pi"], rows, form))
        flags = [[0, st.eigenvalue.real, st.eigenvalue.imag, True]]
        written.append(write_table(out, "edge_flags", ["mode", "re", "im", "edge"], flags, form))
        written.append(write_json(out, "edge_summary", {"termination": term.value, "z": st.z, "n_edge": 1, "analytic": True}))
        return written
    spec = eig_biorthogonal(build_model(_model(cfg), p))
    flagged = set(gamma_r_modes(spec, p.gamma_r, tol))
    rows, flags = [], []
    for m in range(len(spec)):
        prof = edgeskin.projection_profile(spec.left[:, m], spec.right[:, m], n)
        rows.extend([m, c + 1, abs(v)] for c, v in enumerate(prof))
        e = spec.eigenvalues[m]
        flags.append([m, e.real, e.imag, m in flagged])
    written.append(write_table(out, "edge_modes", ["mode", "cell", "abs_pi"], rows, form))
    written.append(write_table(out, "edge_flags", ["mode", "re", "im", "edge"], flags, form))
    summary = {"termination": term.value, "n_edge": len(flagged), "edge_tol": tol}
    if p.gamma2 > 0:
        summary["z"] = p.z
        summary["edge_modes_predicted"] = topology.edge_modes_predicted(p)
    written.append(write_json(out, "edge_summary", summary))
    return written


def cmd_skin(cfg, out: Path, form: str, threads: int = 1):
    """Component magnitudes of unit right eigenvectors plus localization metrics."""
    p = lattice_from(cfg, boundary="open")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        spec = eig_biorthogonal(build_model(_model(cfg), p), on_defective="warn")
    rep = edgeskin.skin_report(spec)
    r = np.abs(spec.unit_right())
    rows = [[m, s + 1, r[s, m]] for m in range(r.shape[1]) for s in range(r.shape[0])]
    written = [write_table(out, "skin", ["mode", "site", "abs_component"], rows, form)]
    summary = rep.summary()
    summary["biorthonormal"] = spec.biorthonormal
    summary["warnings"] = sorted({str(w.message) for w in caught})
    summary["per_mode"] = {
        "center_of_mass": rep.center_of_mass.tolist(),
        "edge_weight_left": rep.edge_weight_left.tolist(),
        "edge_weight_right": rep.edge_weight_right.tolist(),
        "participation_ratio": rep.participation_ratio.tolist(),
    }
    written.append(write_json(out, "skin_summary", summary))
    return written


def circuit_from(cfg) -> circuit.CircuitParams:
    base = circuit.desk_params(cfg.get("n_cells", 1))
    kw = {k: cfg[k] for k in CIRCUIT_KEYS if k in cfg}
    kw["boundary"] = _enum(Boundary, cfg.get("boundary", "open"), "boundary")
    try:
        return base.with_(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_circuit(cfg, out: Path, form: str, threads: int = 1):
    """Kirchhoff trajectory from a unit kick and extracted poles vs envelope prediction."""
    p = circuit_from(cfg)
    try:
        m = circuit.build_circuit_system(p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    dt = cfg.get("dt", circuit.default_step(m))
    t_end = cfg.get("t_end", 30.0 / min(p.gamma_c1, p.gamma_c2))
    stride = cfg.get("traj_stride", 10)
    try:
        traj = circuit.integrate(m, circuit.unit_kick(p), t_end, dt)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    n = p.n_cells
    header = ["t"] + [f"{s}_{i + 1}" for i in range(n) for s in ("V", "Vb")]
    keep = slice(None, None, max(1, stride))
    rows = [[t] + list(v) for t, v in zip(traj.times[keep], traj.voltages[keep])]
    written = [write_table(out, "trajectory", header, rows, form)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        poles = circuit.spectral_extract(traj)
        predicted = circuit.envelope_poles(p)
    pairs = sorted(circuit.match_poles(poles, predicted), key=lambda ep: (ep[1].real, ep[1].imag))
    prow = []
    for i, (e, q) in enumerate(pairs):
        prow.append([i, e.real, -e.imag, q.real, -q.imag, abs(e.real - q.real) / abs(q.real), abs(e.imag - q.imag) / abs(q.imag)])
    hdr = ["index", "freq", "decay", "envelope_freq", "envelope_decay", "rel_err_freq", "rel_err_decay"]
    written.append(write_table(out, "poles", hdr, prow, form))
    meta = dict(traj.metadata)
    meta.update(
        {
            "omega0": p.omega0,
            "coupling_ratio": max(p.gamma_c1, p.gamma_c2) / p.omega0,
            "weak_coupling": p.weak_coupling,
            "n_extracted": len(poles),
            "n_predicted": len(predicted),
            "warnings": sorted({str(w.message) for w in caught}),
        }
    )
    written.append(write_json(out, "circuit_summary", meta))
    return written


def photonic_from(cfg) -> photonic.PhotonicParams:
    kw = {
        "n_cells": cfg.get("n_cells", 25),
        "g": cfg.get("g", 0.01),
        "kappa1": cfg.get("kappa1", 1.0),
        "kappa2": cfg.get("kappa2", 0.5),
        "gamma": cfg.get("gamma", 0.0),
        "delta1": cfg.get("delta1", 0.0),
        "delta2": cfg.get("delta2", 0.0),
        "g_mag": cfg.get("g_mag", 0.0),
        "alpha": cfg.get("alpha", 0.0),
        "boundary": _enum(Boundary, cfg.get("boundary", "periodic"), "boundary"),
    }
    try:
        return photonic.PhotonicParams(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_eliminate(cfg, out: Path, form: str, threads: int = 1):
    """Entrywise comparison of the eliminated chain with the closed-form Bloch matrix."""
    p = photonic_from(cfg)
    if p.boundary is not Boundary.PERIODIC:
        raise ConfigError("eliminate needs boundary = periodic")
    rep = photonic.effective_bloch_error(p, cfg.get("n_k", 64))
    rows = [[k, e, num.real, num.imag, ana.real, ana.imag, err] for k, e, num, ana, err in rep.table]
    hdr = ["k", "entry", "numeric_re", "numeric_im", "analytic_re", "analytic_im", "abs_err"]
    written = [write_table(out, "elimination", hdr, rows, form)]
    summary = {"max_abs_error": rep.max_abs_error, "max_rel_error": rep.max_rel_error, "weak_coupling": p.weak_coupling}
    if p.n_cells >= 2:
        s, f = photonic.slow_fast_indices(p.n_cells)
        g1, g2 = photonic.fitted_rates(photonic.adiabatic_eliminate(photonic.build_full_linear(p), s, f), p.n_cells)
        summary.update({"fitted_gamma1": g1, "fitted_gamma2": g2, "expected_gamma1": p.g**2 / p.kappa1, "expected_gamma2": p.g**2 / p.kappa2})
    written.append(write_json(out, "elimination_summary", summary))
    return written


FIGURE_SETS = {
    "hermitian_edge": ("spectrum", {"model": "hermitian_ssh", "n_cells": 25, "t1": 0.5, "t2": 1.0}),
    "dssh_sweep": (
        "spectrum",
        {"model": "dssh", "n_cells": 25, "gamma": 3.0, "gamma2": 2.0, "sweep_param": "gamma1", "sweep_start": 0.0, "sweep_stop": 4.0, "sweep_step": 0.05},
    ),
    "nonreciprocal_sweep": (
        "spectrum",
        {
            "model": "nonreciprocal_dssh",
            "n_cells": 25,
            "gamma": 3.0,
            "gamma2": 2.0,
            "g_mag": 3.0,
            "alpha": math.pi / 2,
            "sweep_param": "gamma1",
            "sweep_start": 0.0,
            "sweep_stop": 4.0,
            "sweep_step": 0.02,
        },
    ),
    "phase_diagram": ("phase-diagram", {"gamma2": 2.0}),
    "edge_trivial": ("edge-modes", {"n_cells": 25, "gamma1": 0.5, "gamma2": 2.0, "gamma": 3.0, "g_mag": 3.0, "alpha": math.pi / 2}),
    "edge_topological": ("edge-modes", {"n_cells": 25, "gamma1": 2.7, "gamma2": 2.0, "gamma": 3.0, "g_mag": 3.0, "alpha": math.pi / 2}),
    "edge_broken": (
        "edge-modes",
        {"n_cells": 25, "gamma1": 2.7, "gamma2": 2.0, "gamma": 3.0, "g_mag": 3.0, "alpha": math.pi / 2, "termination": "broken_b"},
    ),
    "skin_nonreciprocal": ("skin", {"n_cells": 25, "gamma1": 0.5, "gamma2": 2.0, "gamma": 3.0, "g_mag": 3.0, "alpha": math.pi / 2}),
    "skin_reciprocal": ("skin", {"n_cells": 25, "gamma1": 0.5, "gamma2": 2.0, "gamma": 3.0, "g_mag": 3.0, "alpha": 0.0}),
    "skin_extreme": ("skin", {"n_cells": 25, "gamma1": 3.0, "gamma2": 2.0, "gamma": 3.0, "g_mag": 3.0, "alpha": math.pi / 2}),
    "circuit_dimer": ("circuit", {"n_cells": 1}),
    "eliminate": ("eliminate", {"n_cells": 25, "g": 0.01, "kappa1": 1.0, "kappa2": 0.5}),
}


def cmd_figures(cfg, out: Path, form: str, threads: int = 1):
    """Every figure dataset, one subdirectory each; config keys override all presets."""
    written = []
    for name, (command, preset) in FIGURE_SETS.items():
        merged = dict(preset)
        merged.update(cfg)
        written.extend(COMMANDS[command](merged, out / name, form, threads))
    return written


COMMANDS = {
    "spectrum": cmd_spectrum,
    "phase-diagram": cmd_phase_diagram,
    "edge-modes": cmd_edge_modes,
    "skin": cmd_skin,
    "circuit": cmd_circuit,
    "eliminate": cmd_eliminate,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dssh", description="Dissipatively coupled SSH lattices: spectra, topology, edge states, circuits.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="flat key = value run file (optional for 'figures')")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    ap.add_argument("--format", choices=("csv", "json"), default=None, help="table format (default csv)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None and args.command != "figures":
            raise ConfigError(f"{args.command} needs --config")
        cfg = load_config(args.config) if args.config else {}
        form = args.format or cfg.pop("format", "csv")
        cfg.pop("format", None)
        if form not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {form!r}")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        written = COMMANDS[args.command](cfg, Path(args.out), form, args.threads)
    except ConfigError as exc:
        print(f"dssh: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DefectiveMatrixError, topology.PhaseBoundaryError, edgeskin.DegenerateEdgeStateError, edgeskin.SelfOrthogonalError) as exc:
        print(f"dssh: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"dssh: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
