"""Command-line entry point: analyze | sweep | check-props | transport."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from . import checks, hyperbolic as hyp, projection, stability
from .config import ConfigError, RunConfig, load, validate
from .moving_planes import EngineError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

ENGINE_ERRORS = (EngineError, stability.NonIntersectionError, stability.NotAGraphError,
                 stability.SamplerError, RuntimeError, FloatingPointError,
                 projection.SectionError, projection.TransversalityError)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "nan" if math.isnan(x) else f"{x:.17g}"
    return str(x)


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not math.isfinite(x) else x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(files: dict):
    """Write each file atomically; callers build every text before calling."""
    for path, text in files.items():
        write_atomic(path, text)


def svg_scatter(rows, slope=None):
    """Log-log scatter of gap against osc(H) from sweep CSV rows."""
    pts = [(float(r["osc_H"]), float(r["gap"])) for r in rows
           if float(r["osc_H"]) > 0 and float(r["gap"]) > 0]
    W, H, m = 480, 360, 50
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>']
    if pts:
        lx = [math.log10(a) for a, _ in pts]
        ly = [math.log10(b) for _, b in pts]
        x0, x1 = min(lx) - 0.1, max(lx) + 0.1
        y0, y1 = min(ly) - 0.1, max(ly) + 0.1
        X = lambda v: m + (v - x0) / (x1 - x0) * (W - 2 * m)
        Y = lambda v: H - m - (v - y0) / (y1 - y0) * (H - 2 * m)
        out.append(f'<line x1="{m}" y1="{H - m}" x2="{W - m}" y2="{H - m}" stroke="black"/>')
        out.append(f'<line x1="{m}" y1="{m}" x2="{m}" y2="{H - m}" stroke="black"/>')
        for a, b in zip(lx, ly):
            out.append(f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="4" fill="steelblue"/>')
        if slope is not None and math.isfinite(slope) and len(pts) > 1:
            c = np.polyfit(lx, ly, 1)
            out.append(f'<line x1="{X(x0):.2f}" y1="{Y(np.polyval(c, x0)):.2f}" '
                       f'x2="{X(x1):.2f}" y2="{Y(np.polyval(c, x1)):.2f}" stroke="firebrick"/>')
        out.append(f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle">log10 osc(H)</text>')
        out.append(f'<text x="15" y="{H / 2}" transform="rotate(-90 15 {H / 2})" '
                   f'text-anchor="middle">log10 (R - r)</text>')
        if slope is not None:
            out.append(f'<text x="{m + 10}" y="{m}">slope {slope:.3f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

DIRECTION_HEADER = ["index", "omega", "m", "kind", "plane_dist", "sup_defect",
                    "neighborhood_defect", "margin_min", "flagged"]
SWEEP_HEADER = ["eps", "osc_H", "r", "R", "gap", "C_emp", "max_plane_dist", "sup_defect", "slope_so_far"]
PROPS_HEADER = ["config_id", "bound_id", "worst_slack", "n_samples", "violated"]
CORE_HEADER = ["suite", "max_residual", "tolerance", "n_cases", "violated"]


def _omega_str(w):
    return " ".join(fmt(float(v)) for v in w)


def report_dict(rep: stability.StabilityReport):
    return {
        "eps": rep.eps, "osc_H": rep.osc_H, "O": rep.O, "r": rep.r, "R": rep.R, "gap": rep.gap,
        "C_emp": rep.C_emp, "max_plane_dist": rep.max_plane_dist, "sup_defect": rep.sup_defect,
        "neighborhood_defect": rep.neighborhood_defect, "center_residuals": rep.center_residuals,
        "directions": [
            {"index": d.index, "omega": d.omega, "m": d.m, "kind": d.kind, "plane_dist": d.plane_dist,
             "sup_defect": d.sup_defect, "neighborhood_defect": d.neighborhood_defect,
             "margin_min": d.margin_min, "flagged": d.flagged}
            for d in rep.directions
        ],
    }


def cmd_analyze(cfg: RunConfig, threads=1):
    S = cfg.surface()
    rep = stability.analyze(S, cfg.directions, tol_s=cfg.tol_s, threads=threads, eps=cfg.eps)
    rows = [[d.index, _omega_str(d.omega), d.m, d.kind, d.plane_dist, d.sup_defect,
             d.neighborhood_defect, d.margin_min, d.flagged] for d in rep.directions]
    info = report_dict(rep)
    if cfg.mc_samples > 0:
        rng = np.random.default_rng([cfg.seed, 1])
        pts = stability.sample_body(S, cfg.mc_samples, rng)
        cm = stability.center_of_mass(pts, rep.O)
        info["center_of_mass"] = {"O_cm": cm.O_cm, "stderr": cm.stderr, "grad_norm": cm.grad_norm,
                                  "iterations": cm.iterations, "dist_to_O": float(hyp.dist(cm.O_cm, rep.O))}
    g = stability.sphere_graph(S, rep.O, rep.r)
    info["sphere_graph"] = {"sup": g.sup, "lipschitz": g.lipschitz}
    info["config"] = vars(cfg)
    files = {
        os.path.join(cfg.out, "report.csv"): csv_text(DIRECTION_HEADER, rows),
        os.path.join(cfg.out, "report.json"): json.dumps(_jsonable(info), indent=2, sort_keys=True) + "\n",
    }
    write_outputs(files)
    print(f"osc_H={fmt(rep.osc_H)} gap={fmt(rep.gap)} max_plane_dist={fmt(rep.max_plane_dist)} "
          f"sup_defect={fmt(rep.sup_defect)}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, threads=1):
    reports, slopes = stability.run_sweep(cfg.template(), cfg.eps_grid, cfg.directions, cfg.samples,
                                          cfg.tol_s, threads)
    rows = [[r.eps, r.osc_H, r.r, r.R, r.gap, r.C_emp, r.max_plane_dist, r.sup_defect, s]
            for r, s in zip(reports, slopes)]
    text = csv_text(SWEEP_HEADER, rows)
    files = {
        os.path.join(cfg.out, "report.csv"): text,
        os.path.join(cfg.out, "report.json"): json.dumps(
            _jsonable({"rows": [report_dict(r) for r in reports], "slope": slopes[-1],
                       "config": vars(cfg)}), indent=2, sort_keys=True) + "\n",
    }
    if cfg.svg:
        parsed = list(csv.DictReader(io.StringIO(text)))
        files[os.path.join(cfg.out, "gap_vs_osc.svg")] = svg_scatter(parsed, slopes[-1])
    write_outputs(files)
    for r, s in zip(reports, slopes):
        print(f"eps={fmt(r.eps)} osc_H={fmt(r.osc_H)} gap={fmt(r.gap)} C_emp={fmt(r.C_emp)} slope={fmt(s)}")
    return EXIT_OK


def cmd_check_props(cfg: RunConfig, threads=1):
    inject = 0.3 if cfg.negative_control else 0.0
    batch = projection.run_batch(cfg.configs, cfg.seed, margin=cfg.margin, inject=inject)
    rows = [[r[k] for k in PROPS_HEADER] for r in batch.rows]
    core = checks.core_suite(cfg.seed, cfg.n)
    crow = [[c.suite, c.max_residual, c.tolerance, c.n_cases, c.violated] for c in core]
    write_outputs({
        os.path.join(cfg.out, "props.csv"): csv_text(PROPS_HEADER, rows),
        os.path.join(cfg.out, "core_props.csv"): csv_text(CORE_HEADER, crow),
    })
    bad = batch.violations + sum(c.violated for c in core)
    print(f"configurations={cfg.configs} skipped={batch.skipped} section_violations={batch.violations} "
          f"core_violations={sum(c.violated for c in core)}")
    return EXIT_FAIL if bad else EXIT_OK


def _vec(text):
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_transport(args):
    q, p, v = args.q, args.p, args.v
    if not (len(q) == len(p) == len(v)):
        raise ConfigError("q, p and v must have the same dimension")
    out = hyp.parallel_transport(q, p, v)
    ode = hyp.parallel_transport_ode(q, p, v)
    print("transported", " ".join(fmt(float(x)) for x in out))
    print("ode_discrepancy", fmt(float(hyp.norm(p, out - ode))))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _threads(value):
    if value is not None:
        return value
    env = os.environ.get("ALEXLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"ALEXLAB_THREADS: expected an integer, got {env!r}") from None
    return 1


def build_parser():
    ap = argparse.ArgumentParser(prog="alexlab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("analyze", "sweep", "check-props"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="TOML configuration file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="master RNG seed")
        sp.add_argument("--threads", type=int, help="worker threads (default: $ALEXLAB_THREADS or 1)")
        sp.add_argument("--svg", action="store_true", help="also write an SVG plot (sweep)")
        if name == "check-props":
            sp.add_argument("--negative-control", action="store_true",
                            help="perturb surface normals; violations are expected")
    sp = sub.add_parser("transport", help="parallel transport of v from q to p")
    sp.add_argument("--q", type=_vec, required=True)
    sp.add_argument("--p", type=_vec, required=True)
    sp.add_argument("--v", type=_vec, required=True)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "transport":
            try:
                return cmd_transport(args)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        cfg = load(args.config) if args.config else validate(RunConfig())
        if args.out:
            cfg = replace(cfg, out=args.out)
        if args.seed is not None:
            cfg = validate(replace(cfg, seed=args.seed))
        if args.svg:
            cfg = replace(cfg, svg=True)
        if getattr(args, "negative_control", False):
            cfg = replace(cfg, negative_control=True)
        threads = _threads(args.threads)
        if threads < 1:
            raise ConfigError("--threads must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "analyze":
            return cmd_analyze(cfg, threads)
        if args.command == "sweep":
            return cmd_sweep(cfg, threads)
        return cmd_check_props(cfg, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"engine failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ENGINE_ERRORS as exc:
        print(f"engine failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
