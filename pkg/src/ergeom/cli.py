"""Command-line runner: one subcommand per experiment, CSV out, manifest alongside.

Settings come from built-in defaults, then a ``--config`` file, then the
``ERGEOM_WORKERS`` environment variable (worker count only), then
command-line flags. A config file is either flat ``key=value`` lines
(``#`` starts a comment) or a previous run's ``manifest.json``, whose
``config`` block is reused so the run can be repeated exactly.

Exit codes: 0 success, 1 computation error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import experiments as exp
from .exceptions import ErgeomError
from .generators import GenSpec, OffspringLaw, gen_fixture, realization_seed
from .graph import giant_component, write_edge_list
from .hyperbolicity import MODES, plateau, rescale_collapse
from .mckay import bulk_distance, mckay_table
from .spectral import DENSE_CAP, _measure_from, atom_mass, cheeger_exact, cheeger_sandwich_check

WORKERS_ENV = "ERGEOM_WORKERS"


class ConfigError(Exception):
    def __init__(self, key, message):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


# -- value parsers -----------------------------------------------------------------------

def _int(s):
    if isinstance(s, bool):
        raise ValueError("expected an integer")
    if isinstance(s, int):
        return s
    try:
        return int(str(s).strip())
    except ValueError:
        f = float(s)
        if not f.is_integer():
            raise ValueError("expected an integer") from None
        return int(f)


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("expected a finite number")
    return v


def _bool(s):
    if isinstance(s, bool):
        return s
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def _list(item):
    def parse(s):
        if isinstance(s, (list, tuple)):
            return [item(x) for x in s]
        parts = [x for x in str(s).replace(" ", "").split(",") if x]
        if not parts:
            raise ValueError("expected a comma-separated list")
        return [item(x) for x in parts]
    return parse


def _opt(item):
    def parse(s):
        if s is None or (isinstance(s, str) and s.strip().lower() in ("", "none")):
            return None
        return item(s)
    return parse


def _str(s):
    return str(s).strip()


def _triples(s):
    """``n,d,Delta`` points separated by ``;``."""
    if isinstance(s, (list, tuple)):
        pts = [tuple(p) for p in s]
    else:
        pts = [tuple(x.split(",")) for x in str(s).replace(" ", "").split(";") if x]
    out = []
    for p in pts:
        if len(p) != 3:
            raise ValueError("expected n,d,Delta triples separated by ';'")
        out.append([int(p[0]), float(p[1]), int(p[2])])
    return out


# -- per-subcommand settings ---------------------------------------------------------------

COMMON = {
    "seed": (_int, 0, "master seed (nonnegative integer)"),
    "workers": (_int, 1, f"worker processes; {WORKERS_ENV} is used when this flag is absent"),
    "out": (_str, "out", "output directory"),
}

SETTINGS = {
    "spectrum": {
        "family": (_str, "gnp", "gnp, truncated_tree or galton_watson"),
        "n": (_opt(_int), 1200, "vertices (gnp)"),
        "d": (_opt(_float), 5.0, "mean degree (gnp), tree degree, or Poisson offspring mean"),
        "p": (_opt(_float), None, "edge probability (gnp); overrides d"),
        "depth": (_opt(_int), 10, "tree depth (truncated_tree, galton_watson)"),
        "max_nodes": (_int, 10**5, "node cap for galton_watson"),
        "realizations": (_int, 40, "number of realizations R"),
        "bins": (_int, 100, "histogram bins on [0, 2]"),
        "dense_cap": (_int, DENSE_CAP, "largest matrix handed to the dense eigensolver"),
        "mckay_d": (_opt(_int), None, "McKay reference degree (defaults to d when d is an integer >= 3)"),
        "mckay_points": (_int, 401, "grid points of mckay.csv over [0, 2]"),
        "margin": (_float, 0.1, "bulk margin for the L1 distance"),
    },
    "gap-scan": {
        "family": (_str, "gnp", "gnp, path or cycle"),
        "ns": (_list(_int), [200, 400, 800], "ascending vertex counts"),
        "d": (_float, 3.0, "mean degree"),
        "realizations": (_int, 20, "seeds per n"),
        "dense_cap": (_int, DENSE_CAP, "largest matrix handed to the dense eigensolver"),
    },
    "curvature": {
        "family": (_str, "gnp", "gnp, truncated_tree or a fixture family"),
        "ns": (_list(_int), [1000, 2000, 4000], "vertex counts"),
        "d": (_float, 2.0, "mean degree (tree degree for truncated_tree)"),
        "depth": (_opt(_int), None, "tree depth (truncated_tree)"),
        "realizations": (_int, 40, "realizations per n"),
        "triangles": (_int, 100000, "triangles per realization"),
        "collapse": (_bool, True, "fit the rescaled collapse across n"),
        "collapse_l_min": (_int, 1, "smallest side length used in the collapse"),
        "collapse_min_count": (_int, 1, "smallest bin population used in the collapse"),
        "plateau_top": (_int, 3, "bins pooled into the plateau estimate"),
    },
    "theory": {
        "ds": (_list(_float), [1.5, 2.0, 3.0, 5.0], "mean degrees"),
        "Deltas": (_list(_int), [3, 6, 12], "loop lengths"),
        "ns": (_list(_int), [1000, 10000, 100000, 1000000], "vertex counts"),
        "mc": (_bool, False, "also run the Monte Carlo loop-probability check"),
        "mc_points": (_triples, [[10, 2.0, 3]], "Monte Carlo points n,d,Delta;..."),
        "mc_samples": (_int, 10**7, "Monte Carlo samples per point"),
    },
    "cheeger": {
        "fixtures": (_list(_str), ["path:4", "cycle:4", "complete:4", "star:5"], "fixture graphs kind:dims"),
        "n": (_opt(_int), 14, "vertices of the random graphs (0 or none to skip)"),
        "d": (_float, 3.0, "mean degree of the random graphs"),
        "realizations": (_int, 50, "random graphs"),
        "exact": (_bool, False, "require the exhaustive Cheeger constant"),
    },
    "generate": {
        "family": (_str, "gnp", "any graph family"),
        "n": (_opt(_int), 1000, "vertices"),
        "d": (_opt(_float), 3.0, "mean degree"),
        "p": (_opt(_float), None, "edge probability (overrides d)"),
        "depth": (_opt(_int), None, "tree depth"),
        "dims": (_opt(_list(_int)), None, "fixture dimensions"),
        "realization": (_int, 0, "realization index"),
        "giant": (_bool, False, "keep only the giant component"),
    },
}


def _schema(command):
    return {**COMMON, **SETTINGS[command]}


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None
        return dict(data.get("config", data))
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"line {lineno} is not key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve(command, config_file=None, overrides=None, env=None) -> dict:
    """Merge defaults, config file, environment and flags; parse and check every value."""
    schema = _schema(command)
    raw = {k: v[1] for k, v in schema.items()}
    if config_file:
        cfg = read_config_file(config_file)
        cfg.pop("command", None)
        for key, value in cfg.items():
            if key not in schema:
                raise ConfigError(key, f"unknown key for '{command}'")
            raw[key] = value
    env = os.environ if env is None else env
    if env.get(WORKERS_ENV):
        raw["workers"] = env[WORKERS_ENV]
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    out = {}
    for key, (parse, _, _) in schema.items():
        try:
            out[key] = parse(raw[key]) if raw[key] is not None else None
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, f"bad value {raw[key]!r} ({exc})") from None
    _check(command, out)
    return out


def _check(command, cfg):
    if not 0 <= cfg["seed"] < 2**64:
        raise ConfigError("seed", "must lie in [0, 2**64)")
    if cfg["workers"] < 1:
        raise ConfigError("workers", "must be >= 1")
    for key in ("realizations", "bins", "triangles", "dense_cap", "mckay_points", "mc_samples", "plateau_top"):
        if key in cfg and cfg[key] is not None and cfg[key] < 1:
            raise ConfigError(key, "must be >= 1")
    if "ns" in cfg:
        if any(n < 1 for n in cfg["ns"]):
            raise ConfigError("ns", "vertex counts must be positive")
        if command == "gap-scan" and cfg["ns"] != sorted(cfg["ns"]):
            raise ConfigError("ns", "must be ascending")
    if command == "spectrum" and cfg["family"] not in ("gnp", "truncated_tree", "galton_watson"):
        raise ConfigError("family", "must be gnp, truncated_tree or galton_watson")
    if command == "gap-scan" and cfg["family"] not in ("gnp", "path", "cycle"):
        raise ConfigError("family", "must be gnp, path or cycle")


# -- output ----------------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path, columns, rows, meta=None):
    """Header row after ``# key=value`` metadata lines; floats written with full precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k}={_fmt(v)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            values = [row[c] for c in columns] if isinstance(row, dict) else row
            w.writerow([_fmt(v) for v in values])


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _seed_record(seed, count, *stream):
    """First state word of each realization's stream, for the manifest."""
    return [int(realization_seed(seed, r, *stream).generate_state(1)[0]) for r in range(count)]


def write_manifest(out, command, cfg, files, started, extra=None):
    manifest = {
        "command": command,
        "version": __version__,
        "config": {k: v for k, v in cfg.items() if k not in ("out",)},
        "derived_seeds": (extra or {}).pop("derived_seeds", []),
        "duration_seconds": round(time.monotonic() - started, 3),
        "outputs": {Path(f).name: _sha256(f) for f in files},
    }
    manifest.update(extra or {})
    path = Path(out) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def _meta(command, cfg, keys):
    m = {"command": command, "version": __version__, "seed": cfg["seed"]}
    m.update({k: (",".join(map(str, cfg[k])) if isinstance(cfg[k], list) else cfg[k]) for k in keys})
    return m


# -- subcommands ------------------------------------------------------------------------------

def _spectrum_spec(cfg):
    fam = cfg["family"]
    if fam == "gnp":
        return GenSpec("gnp", n=cfg["n"], d=cfg["d"], p=cfg["p"], seed=cfg["seed"])
    if fam == "truncated_tree":
        if cfg["d"] is None or not float(cfg["d"]).is_integer():
            raise ConfigError("d", "truncated_tree needs an integer degree")
        return GenSpec("truncated_tree", d=int(cfg["d"]), depth=cfg["depth"], seed=cfg["seed"])
    return GenSpec("galton_watson", d=cfg["d"], depth=cfg["depth"], max_nodes=cfg["max_nodes"], seed=cfg["seed"])


def cmd_spectrum(cfg, out):
    spec = _spectrum_spec(cfg)
    r = cfg["realizations"]
    spectra = exp.spectra(spec, r, cfg["workers"], cfg["dense_cap"])
    values = np.concatenate(spectra)
    weights = np.concatenate([np.full(len(ev), 1.0 / (r * len(ev))) for ev in spectra])
    measure = _measure_from(values, weights, r)
    meta = _meta("spectrum", cfg, ["family", "n", "d", "p", "depth", "realizations", "bins"])

    edges, dens = measure.histogram(cfg["bins"])
    hist_rows = [(edges[i], edges[i + 1], dens[i]) for i in range(len(dens))]
    write_csv(out / "histogram.csv", ("bin_left", "bin_right", "density"), hist_rows, meta)
    ev_rows = [(k, i, v) for k, ev in enumerate(spectra) for i, v in enumerate(ev)]
    write_csv(out / "eigenvalues.csv", ("realization", "index", "eigenvalue"), ev_rows, meta)
    files = [out / "histogram.csv", out / "eigenvalues.csv"]

    mck = cfg["mckay_d"]
    if mck is None and cfg["d"] is not None and float(cfg["d"]).is_integer() and cfg["d"] >= 3:
        mck = int(cfg["d"])
    extra = {"atom_mass_at_1": atom_mass(measure, 1.0, 1e-9), "vertices": [len(ev) for ev in spectra]}
    if mck is not None:
        grid = np.linspace(0.0, 2.0, cfg["mckay_points"])
        write_csv(out / "mckay.csv", ("x", "pdf", "cdf"), mckay_table(mck, grid), {**meta, "mckay_d": mck})
        files.append(out / "mckay.csv")
        extra["bulk_distance"] = {
            "mckay_d": mck,
            "l1_bulk": bulk_distance(measure, mck, "l1", cfg["bins"], cfg["margin"]),
            "l1_support": bulk_distance(measure, mck, "l1", cfg["bins"], 0.0),
            "ks": bulk_distance(measure, mck, "ks"),
        }
    extra["derived_seeds"] = _seed_record(cfg["seed"], r) if spec.family != "truncated_tree" else []
    return files, extra


def cmd_gap_scan(cfg, out):
    rows = exp.gap_scan(cfg["ns"], cfg["d"], cfg["realizations"], cfg["seed"], cfg["workers"],
                        cfg["family"], cfg["dense_cap"])
    verdict = exp.trend_verdict(rows)
    meta = _meta("gap-scan", cfg, ["family", "ns", "d", "realizations"])
    meta["trend"] = verdict if verdict is not None else "undefined"
    write_csv(out / "gap.csv", ("n", "median", "q1", "q3", "realizations"),
              [(r.n, r.median, r.q1, r.q3, len(r.values)) for r in rows], meta)
    return [out / "gap.csv"], {"trend": verdict,
                               "derived_seeds": _seed_record(cfg["seed"], cfg["realizations"])}


def cmd_curvature(cfg, out):
    runs = [exp.curvature_run(n, cfg["d"], cfg["realizations"], cfg["triangles"], cfg["seed"], cfg["workers"],
                              cfg["family"], cfg["depth"]) for n in cfg["ns"]]
    meta = _meta("curvature", cfg, ["family", "ns", "d", "realizations", "triangles"])
    meta["sampling"] = "uniform iid vertex triples, repeated vertices discarded"
    rows = []
    plateaus = {}
    for run in runs:
        for mode in MODES:
            p = run.profile(mode)
            for l, c, m, se in zip(p.bins, p.count, p.mean_delta, p.std_error):
                rows.append((run.n, run.d, p.realization_count, mode, l, m, se, c))
        short = run.profile("shortest_side")
        mean, se, bins = plateau(short, cfg["plateau_top"])
        plateaus[str(run.n)] = {"mean": mean, "std_error": se, "bins": bins.tolist(), "discarded": short.discarded}
    write_csv(out / "curvature.csv", ("n", "d", "seed_count", "mode", "l_bin", "mean_delta", "std_error", "count"),
              rows, meta)

    cmeta = dict(meta)
    crows = []
    extra = {"plateau": plateaus}
    if cfg["collapse"] and len(runs) >= 2 and cfg["family"] == "gnp":
        try:
            res = rescale_collapse([r.profile("shortest_side") for r in runs], min_count=cfg["collapse_min_count"],
                                   l_min=cfg["collapse_l_min"])
        except ErgeomError as exc:
            cmeta["collapse"] = f"failed: {exc}"
        else:
            cmeta.update(c1=res.c1, c2=res.c2, residual=res.residual, baseline_residual=res.baseline_residual,
                         n_ref=res.n_ref)
            extra["collapse"] = {"c1": res.c1, "c2": res.c2, "residual": res.residual,
                                 "baseline_residual": res.baseline_residual, "n_ref": res.n_ref}
            for n, xs, ys in res.curves:
                crows.extend((n, x, y) for x, y in zip(xs, ys))
    else:
        cmeta["collapse"] = "skipped"
    write_csv(out / "collapse.csv", ("n", "l_shifted", "delta_shifted"), crows, cmeta)
    extra["derived_seeds"] = _seed_record(cfg["seed"], cfg["realizations"])
    return [out / "curvature.csv", out / "collapse.csv"], extra


def cmd_theory(cfg, out):
    rows = exp.theory_grid(cfg["ds"], cfg["Deltas"], cfg["ns"])
    meta = _meta("theory", cfg, ["ds", "Deltas", "ns"])
    write_csv(out / "theory.csv", exp.THEORY_COLUMNS, rows, meta)
    files = [out / "theory.csv"]
    extra = {}
    if cfg["mc"]:
        mrows = []
        for i, (n, d, D) in enumerate(cfg["mc_points"]):
            try:
                q = asy.loop_probability(asy.LoopParams(n, d, D)).q
                mc = asy.loop_probability_mc(n, d, D, cfg["mc_samples"], seed=cfg["seed"], stream=(i,))
            except ErgeomError as exc:
                mrows.append((n, d, D, "", "", "", "", f"{type(exc).__name__}: {exc}"))
                continue
            z = (mc.estimate - q) / mc.std_error
            mrows.append((n, d, D, q, mc.estimate, mc.std_error, z, "ok" if abs(z) <= 4 else "disagree"))
        write_csv(out / "theory_mc.csv", ("n", "d", "Delta", "q", "mc_estimate", "mc_std_error", "z", "status"),
                  mrows, {**meta, "mc_samples": cfg["mc_samples"]})
        files.append(out / "theory_mc.csv")
    return files, extra


def _fixture(token):
    kind, _, dims = token.partition(":")
    try:
        dims = tuple(int(x) for x in dims.split("x")) if dims else ()
    except ValueError:
        raise ConfigError("fixtures", f"bad fixture {token!r}; use kind:dims such as grid:3x4") from None
    return gen_fixture(kind, *dims)


def cmd_cheeger(cfg, out):
    rows = []
    for token in cfg["fixtures"]:
        g = _fixture(token)
        if cfg["exact"]:
            cheeger_exact(g)
        rep = cheeger_sandwich_check(g, raise_on_violation=False)
        rows.append((token, g.n, "", rep.h, rep.exact, rep.lambda0, rep.left_bound, rep.right_bound, rep.holds))
    seeds = []
    if cfg["n"]:
        specs = [GenSpec("gnp", n=cfg["n"], d=cfg["d"], seed=cfg["seed"], realization_index=r)
                 for r in range(cfg["realizations"])]
        res = exp.parallel_map(partial(exp.realization_sandwich, exact_only=cfg["exact"]), specs, cfg["workers"])
        for r, (size, rep) in enumerate(res):
            rows.append((f"gnp:{cfg['n']}", size, r, rep.h, rep.exact, rep.lambda0, rep.left_bound,
                         rep.right_bound, rep.holds))
        seeds = _seed_record(cfg["seed"], cfg["realizations"])
    meta = _meta("cheeger", cfg, ["fixtures", "n", "d", "realizations"])
    meta["bounds"] = "left_bound=2h right_bound=1-sqrt(1-h^2); seed is the realization index"
    write_csv(out / "cheeger.csv", ("graph", "n", "seed", "h_value", "exact_flag", "lambda0",
                                    "left_bound", "right_bound", "sandwich_ok"), rows, meta)
    return [out / "cheeger.csv"], {"all_hold": all(r[-1] for r in rows), "derived_seeds": seeds}


def cmd_generate(cfg, out):
    fam = cfg["family"]
    law = None
    if fam == "galton_watson":
        law = OffspringLaw.poisson(cfg["d"])
    dims = tuple(cfg["dims"]) if cfg["dims"] else ()
    try:
        spec = GenSpec(fam, n=cfg["n"], d=cfg["d"], p=cfg["p"], depth=cfg["depth"], law=law, dims=dims,
                       seed=cfg["seed"], realization_index=cfg["realization"])
    except ErgeomError as exc:
        raise ConfigError("family", str(exc)) from None
    g = spec.generate()
    if cfg["giant"]:
        g, _ = giant_component(g)
    write_edge_list(g, out / "graph.txt")
    return [out / "graph.txt"], {"vertices": g.n, "edges": g.edge_count,
                                 "derived_seeds": _seed_record(cfg["seed"], cfg["realization"] + 1)[-1:]}


COMMANDS = {
    "spectrum": cmd_spectrum,
    "gap-scan": cmd_gap_scan,
    "curvature": cmd_curvature,
    "theory": cmd_theory,
    "cheeger": cmd_cheeger,
    "generate": cmd_generate,
}

HELP = {
    "spectrum": "averaged normalized-Laplacian spectrum with McKay overlay",
    "gap-scan": "median spectral gap of the giant component across n",
    "curvature": "insize curvature profiles and rescaled collapse",
    "theory": "loop-probability bounds over a (d, Delta, n) grid",
    "cheeger": "Cheeger constants and the spectral sandwich",
    "generate": "write one graph as an edge list",
}


def _show(v):
    if isinstance(v, list):
        return (";" if v and isinstance(v[0], list) else ",").join(_show(x) for x in v)
    return str(v)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergeom", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        p.add_argument("--config", metavar="PATH", help="key=value file or a previous manifest.json")
        for key, (_, default, text) in _schema(name).items():
            shown = _show(default)
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar=key.upper(),
                           help=f"{text} (default: {shown})")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    started = time.monotonic()
    try:
        cfg = resolve(command, args.config, overrides)
        out = Path(cfg["out"])
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError("out", f"cannot create {out}: {exc}") from None
        files, extra = COMMANDS[command](cfg, out)
        write_manifest(out, command, cfg, files, started, extra)
    except ConfigError as exc:
        print(f"ergeom {command}: {exc}", file=sys.stderr)
        return 2
    except (ErgeomError, ValueError, ArithmeticError) as exc:
        print(f"ergeom {command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {', '.join(str(f) for f in files)} and {out / 'manifest.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
