"""Command-line entry point: ``jumpdecay {model,params,spectrum,mc,decay,suite}``.

Exit codes: 0 pass, 1 fail, 2 configuration error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import jsonschema
import numpy as np

from . import __version__, acceptance, decay, mc, params, spectral
from .levy import LevyModel, fourier_density, tail_mass
from .outputs import RunManifest, emit_plotdata, write_csv, write_json

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_INCONCLUSIVE = 0, 1, 2, 3

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

MODEL_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "required": ["preset"],
            "properties": {"preset": {"enum": ["stable", "relativistic"]}, "alpha": {"type": "number",
                           "exclusiveMinimum": 0, "exclusiveMaximum": 2}, "m": _POS, "dimension": {"enum": [1, 2, 3]}},
            "additionalProperties": False,
        },
        {
            "type": "object",
            "required": ["profile"],
            "properties": {
                "dimension": {"enum": [1, 2, 3]},
                "diffusion": {"type": "number", "minimum": 0},
                "profile": {"type": "object", "required": ["family"],
                            "properties": {"family": {"type": "string"}}},
                "scale": {"type": ["number", "null"]},
                "comparability": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                "weak_scaling": {"type": ["array", "null"]},
                "closed_form": {"type": ["object", "null"]},
            },
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "model": MODEL_SCHEMA,
        "potential": {"type": "object", "required": ["kind"], "properties": {"kind": {"type": "string"}}},
        "grid": {"type": "object", "properties": {"L": _POS, "N": {"type": "integer", "minimum": 4, "multipleOf": 2},
                                                   "tol": _POS, "k": {"type": "integer", "minimum": 1}},
                 "additionalProperties": False},
        "mc": {"type": "object", "properties": {
            "paths": {"type": "integer", "minimum": 2}, "eps": _POS, "dt": _POS, "horizon": _POS,
            "seed": {"type": "integer", "minimum": 0}, "eta": {"oneOf": [_POS, {"type": "array", "items": _POS,
                                                                             "minItems": 1}]},
            "radius": _POS, "from": {"type": "array", "items": _NUM, "minItems": 1},
            "sampler": {"enum": list(mc.SAMPLERS)}}, "additionalProperties": False},
        "analysis": {"type": "object", "properties": {
            "window": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
            "family": {"enum": ["power", "exp", "stretched-exp"]}, "cap": _POS,
            "density_t": _POS}, "additionalProperties": False},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
    },
    "additionalProperties": False,
}


class ConfigFailure(Exception):
    pass


def _pointer(err):
    path = "/".join(str(p) for p in err.absolute_path)
    return "/" + path


def validate_config(cfg):
    v = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errs = sorted(v.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        # oneOf failures hide the useful message one level down
        ctx = sorted(e.context, key=lambda c: -len(c.absolute_path)) if e.context else []
        best = ctx[0] if ctx else e
        raise ConfigFailure(f"config error at {_pointer(best)}: {best.message}")
    return cfg


def load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigFailure(f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    except OSError as exc:
        raise ConfigFailure(f"cannot read config: {exc}")


def build_model(doc) -> LevyModel:
    doc = dict(doc or {"preset": "stable", "alpha": 1.0})
    try:
        if doc.get("preset") == "stable":
            return LevyModel.stable(float(doc.get("alpha", 1.0)), int(doc.get("dimension", 1)))
        if doc.get("preset") == "relativistic":
            return LevyModel.relativistic(float(doc.get("m", 1.0)), int(doc.get("dimension", 1)))
        return LevyModel.from_dict(doc)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigFailure(f"config error at /model: {exc}")


def build_potential(doc):
    try:
        return spectral.potential_from_dict(doc or {"kind": "zero"})
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigFailure(f"config error at /potential: {exc}")


def _merge(cfg, section, **flags):
    sec = dict(cfg.get(section, {}))
    sec.update({k: v for k, v in flags.items() if v is not None})
    if sec:
        cfg[section] = sec
    return cfg


def _floats(s):
    return [float(v) for v in s.split(",") if v.strip()]


def _out_dir(cfg, args):
    d = args.out or cfg.get("output") or "."
    os.makedirs(d, exist_ok=True)
    cfg["output"] = d
    return d


def _combine(verdicts):
    vs = list(verdicts)
    if any(v == "fail" for v in vs):
        return EXIT_FAIL
    if any(v == "inconclusive" for v in vs):
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


# ----------------------------------------------------------------------------
# subcommands


def cmd_model(args, cfg, man, out):
    model = build_model(cfg.get("model"))
    with man.stage("model"):
        doc = {"config_header": cfg, "model": model.to_dict(), "intensity": model.intensity, "c5": model.c5,
               "tail_mass": {str(s): tail_mass(model, s) for s in (1.0, 2.0, 4.0, 8.0)}}
        man.add_file(write_json(os.path.join(out, "model.json"), doc))
    t = cfg.get("analysis", {}).get("density_t")
    if t is not None:
        with man.stage("density"):
            g = spectral.Grid1D(float(cfg.get("grid", {}).get("L", 32.0)), int(cfg.get("grid", {}).get("N", 2048)))
            dens = fourier_density(model, float(t), g.x)
            man.add_file(write_csv(os.path.join(out, "density.csv"), ["x", "value"], zip(g.x, dens)))
    man.verdicts["model"] = "pass"
    return EXIT_PASS


def cmd_params(args, cfg, man, out):
    model = build_model(cfg.get("model"))
    with man.stage("condition_report"):
        rep = params.condition_report(model)
    doc = rep.to_dict()
    doc["config_header"] = cfg
    man.add_file(write_json(os.path.join(out, "params.json"), doc))
    man.add_file(write_csv(os.path.join(out, "K1.csv"), ["s", "value", "uncertainty"],
                           [(r["s"], r["value"], 0.0 if r["stabilized"] else math.inf) for r in rep.k1_samples]))
    man.add_file(write_csv(os.path.join(out, "K2.csv"), ["s", "value", "uncertainty"],
                           [(r["s"][0], r["value"], 0.0) for r in rep.k2_samples]))
    if rep.k3_upper:
        man.add_file(write_csv(os.path.join(out, "K3.csv"), ["s", "value", "uncertainty"],
                               [(r["s"], r["bound"], 0.0) for r in rep.k3_upper]))
    e0 = rep.eta0
    man.add_file(write_csv(os.path.join(out, "eta0.csv"), ["s", "value", "uncertainty"],
                           [(1.0, e0["value"], 0.5 * (e0["interval"][1] - e0["interval"][0]))]))
    man.verdicts = {k: v["verdict"] for k, v in rep.verdicts.items()}
    return _combine(man.verdicts.values())


def _grid(cfg):
    g = cfg.get("grid", {})
    return spectral.Grid1D(float(g.get("L", 64.0)), int(g.get("N", 2**13)))


def cmd_spectrum(args, cfg, man, out):
    model = build_model(cfg.get("model"))
    V = build_potential(cfg.get("potential"))
    grid = _grid(cfg)
    g = cfg.get("grid", {})
    tol, k = float(g.get("tol", 1e-8)), int(g.get("k", 1))
    with man.stage("solve"):
        res = (spectral.ground_state(model, V, grid, tol=tol) if k == 1
               else spectral.excited_states(model, V, grid, k=k, tol=tol))
    doc = res.to_dict()
    doc["lambda0"] = res.lambda0
    doc["config_header"] = cfg
    man.add_file(write_json(os.path.join(out, "spectrum.json"), doc))
    for n, vec in enumerate(res.vectors):
        man.add_file(write_csv(os.path.join(out, f"phi_{n}.csv"), ["x", "value"], zip(grid.x, vec)))
    man.verdicts["spectrum"] = "pass" if all(r <= max(tol, 1e-8) * 10 for r in res.residuals) else "inconclusive"
    man.verdicts["discrete"] = bool(res.discrete)
    return _combine([man.verdicts["spectrum"]])


def _path_config(cfg, n_default=10_000):
    m = cfg.get("mc", {})
    return mc.PathConfig(epsilon=float(m.get("eps", 0.1)), dt=float(m.get("dt", 0.01)),
                         horizon=float(m.get("horizon", 10.0)), n_paths=int(m.get("paths", n_default)),
                         seed=int(m.get("seed", cfg.get("seed", 0))),
                         sampler=m.get("sampler", "compound-poisson-gaussian"))


def cmd_mc(args, cfg, man, out):
    model = build_model(cfg.get("model"))
    pc = _path_config(cfg)
    try:
        pc.validate(model)
    except mc.ConfigError as exc:
        raise ConfigFailure(f"config error at /mc: {exc}")
    m = cfg.get("mc", {})
    eta = m.get("eta", 1.0)
    etas = eta if isinstance(eta, list) else [eta]
    xs = m.get("from", [8.0, 16.0, 32.0])
    r = float(m.get("radius", 1.0))
    with man.stage("laplace_hitting"):
        ests = mc.laplace_hitting(model, pc, xs, r, etas)
    flat = [e for per_x in ests for e in per_x]
    cols = ["x", "r", "eta", "value", "ci_halfwidth", "hit_fraction", "censored_fraction", "horizon", "n_paths"]
    man.add_file(write_csv(os.path.join(out, "hitting.csv"), cols, [[getattr(e, c) for c in cols] for e in flat]))
    unresolved = [e.x for e in flat
                  if e.censored_fraction * math.exp(-e.eta * e.horizon) >= 0.1 * max(e.ci_halfwidth, 1e-300)]
    summary = {"config_header": cfg, "estimates": [e.to_dict() for e in flat], "unresolved_censoring": unresolved}
    first = [per_x[0] for per_x in ests]
    if len(first) >= 1 and model.d == 1:
        summary["overlay"] = decay.hitting_overlay(first, model)
    man.add_file(write_json(os.path.join(out, "mc.json"), summary))
    man.verdicts["censoring"] = "inconclusive" if unresolved else "pass"
    return _combine(man.verdicts.values())


def _read_series(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(v) for v in r] for r in rows[1:]], float)
    return data[:, 0], data[:, 1]


def cmd_decay(args, cfg, man, out):
    model = build_model(cfg.get("model"))
    if not args.spectrum:
        raise ConfigFailure("config error at /: decay needs --spectrum pointing at a spectrum output directory")
    sdir = args.spectrum
    try:
        with open(os.path.join(sdir, "spectrum.json")) as fh:
            sdoc = json.load(fh)
        x, phi = _read_series(os.path.join(sdir, "phi_0.csv"))
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigFailure(f"config error at --spectrum: {exc}")
    grid = decay.grid_from_nodes(x)
    an = cfg.get("analysis", {})
    window = tuple(an.get("window", (0.15 * grid.L, 0.45 * grid.L)))
    with man.stage("decay_report"):
        try:
            rep = decay.decay_report(phi, model, grid, window, float(sdoc["lambda0"]), family=an.get("family"),
                                     cap=float(an.get("cap", decay.COMPARABILITY_CAP)))
        except (decay.WindowError, decay.FitError) as exc:
            raise ConfigFailure(f"config error at /analysis/window: {exc}")
    doc = rep.to_dict()
    doc["config_header"] = cfg
    doc["lambda0"] = sdoc["lambda0"]
    fit = decay.Fit(**{**rep.fit, "window": tuple(rep.fit["window"])})
    C = float(rep.ratio_stats["median"])
    if args.hitting:
        hx, hv = [], []
        with open(args.hitting) as fh:
            for row in csv.DictReader(fh):
                hx.append(float(row["x"]))
                hv.append(float(row["value"]))
        doc["hitting"] = [{"x": a, "value": b, "ratio": b / float(model.nu_radial(a))} for a, b in zip(hx, hv)]
    rows = decay.overlay_rows(np.abs(phi), model, grid, window, fit, C=C)
    p = os.path.join(out, "overlay.csv")
    decay.write_overlay_csv(p, rows)
    man.add_file(p)
    for f in emit_plotdata(rows, os.path.join(out, "overlay"), svg=not args.no_svg, title="phi vs C nu"):
        man.add_file(f)
    man.add_file(write_json(os.path.join(out, "decay.json"), doc))
    regime = rep.regime["regime"]
    man.verdicts["ratio"] = rep.ratio_stats["verdict"]
    man.verdicts["regime"] = regime
    return EXIT_INCONCLUSIVE if regime == "inconclusive" else EXIT_PASS


def cmd_suite(args, cfg, man, out):
    if args.criteria:
        numbers = [int(v) for v in args.criteria.split(",")]
        bad = [n for n in numbers if n not in acceptance.CRITERIA]
        if bad:
            raise ConfigFailure(f"config error at --criteria: unknown criteria {bad}")
    else:
        numbers = acceptance.PRESETS[args.preset]
    results = []
    for n in numbers:
        with man.stage(f"criterion_{n}"):
            r = acceptance.run_criterion(n)
        print(r.line(), flush=True)
        results.append(r)
        man.verdicts[str(n)] = r.verdict
    passed = sum(r.verdict == "pass" for r in results)
    print(f"{passed}/{len(results)} criteria pass")
    man.add_file(write_json(os.path.join(out, "suite.json"),
                            {"preset": args.preset, "results": [{k: v for k, v in r.to_dict().items() if k != "seconds"}
                                                                for r in results]}))
    return _combine(r.verdict for r in results)


COMMANDS = {"model": cmd_model, "params": cmd_params, "spectrum": cmd_spectrum, "mc": cmd_mc,
            "decay": cmd_decay, "suite": cmd_suite}


def make_parser():
    p = argparse.ArgumentParser(prog="jumpdecay", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="experiment config (JSON)")
        sp.add_argument("--out", help="output directory")
        return sp

    common(sub.add_parser("model", help="validate a model and export its summary"))
    common(sub.add_parser("params", help="parameter functions and condition verdicts"))
    sp = common(sub.add_parser("spectrum", help="ground state (and excited states) on a periodic grid"))
    sp.add_argument("--L", type=float)
    sp.add_argument("--N", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--k", type=int)
    sp = common(sub.add_parser("mc", help="Laplace transforms of hitting times"))
    sp.add_argument("--paths", type=int)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--eta", type=str, help="one value or a comma list")
    sp.add_argument("--radius", type=float)
    sp.add_argument("--from", dest="from_", type=str, help='starting points "x1,x2,..."')
    sp = common(sub.add_parser("decay", help="tail analysis of a computed ground state"))
    sp.add_argument("--spectrum", help="directory written by the spectrum subcommand")
    sp.add_argument("--hitting", help="hitting.csv written by the mc subcommand")
    sp.add_argument("--window", type=str, help='"lo,hi"')
    sp.add_argument("--no-svg", action="store_true")
    sp = common(sub.add_parser("suite", help="run the acceptance criteria"))
    sp.add_argument("--preset", choices=sorted(acceptance.PRESETS), default="all")
    sp.add_argument("--criteria", help="comma list of criterion numbers (overrides --preset)")
    return p


def _apply_flags(args, cfg):
    if args.command == "spectrum":
        _merge(cfg, "grid", L=args.L, N=args.N, tol=args.tol, k=args.k)
    elif args.command == "mc":
        eta = None
        if args.eta:
            vals = _floats(args.eta)
            eta = vals[0] if len(vals) == 1 else vals
        _merge(cfg, "mc", paths=args.paths, eps=args.eps, dt=args.dt, horizon=args.horizon, seed=args.seed,
               eta=eta, radius=args.radius, **{"from": _floats(args.from_) if args.from_ else None})
    elif args.command == "decay" and args.window:
        _merge(cfg, "analysis", window=_floats(args.window))
    return cfg


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = _apply_flags(args, load_config(args.config))
        if not isinstance(cfg, dict):
            raise ConfigFailure("config error at /: top level must be an object")
        validate_config(cfg)
        out = _out_dir(cfg, args)
        man = RunManifest(__version__, args.command, cfg)
        code = COMMANDS[args.command](args, cfg, man, out)
    except ConfigFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    man.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
