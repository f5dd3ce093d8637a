"""Command-line front end.

    hjlab <command> --config run.json [--out DIR] [--seed N] [--threads N] [--format csv|json]

A config is one JSON document: shared keys at the top level plus one
section per command. Unknown keys are rejected. Every output file carries
the tool version and a hash of the resolved config, and contains nothing
that varies between runs of the same config.

Exit codes: 0 ok, 2 config or precondition error, 3 numeric failure,
4 a verdict failed.
"""

import argparse
import copy
import csv
import hashlib
import io
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, NumericError
from .hamiltonian import ConvexityModuli, LagrangianView, model_from_config, numeric_legendre

log = logging.getLogger("hjlab")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERDICT = 0, 2, 3, 4
COMMANDS = ("solve", "bv-check", "entropy", "counterexample", "legendre", "moduli")
SHARED = {"hamiltonian": None, "seed": 0, "threads": 1, "format": "csv"}

# per-command defaults; a key missing here is not accepted in the section
SECTIONS = {
    "solve": {"datum": {"family": "linear", "a": [1.0]}, "grid": {"lo": [-1.0], "hi": [1.0], "n": 201},
              "t": 1.0},
    "bv-check": {"datum": {"family": "random_pl"}, "n_seeds": 50, "seeds": None, "M": 1.0, "t": 1.0,
                 "omega": {"lo": [-1.0], "hi": [1.0]}, "n": 201},
    "entropy": {"T": 1.0, "R": 1.0, "m": 1.0, "M": 1.0, "eps_grid": None, "metric": "W11",
                "n_members": 24, "n_grid": 33},
    "counterexample": {"ell": 0.25, "deltas": [0.04, 0.02, 0.01, 0.005], "variants": ["stated"],
                       "cell_points": 12, "doubling_delta": None, "target": 1 / 3, "tolerance": 0.15},
    "legendre": {"points": [[1.0]], "compare_quartic": False},
    "moduli": {"M": [1.0], "R": [1.0]},
}

DATUM_KEYS = {
    "linear": {"a", "c0"},
    "constant": {"c", "dim"},
    "cone": {"slope", "dim"},
    "semiconvex": {"pbar", "K"},
    "random_pl": {"seed", "dim", "M", "m", "n_breaks", "span", "n_ridges"},
}


class VerdictFailure(Exception):
    pass


# ---------------------------------------------------------------- config


def find_config(path: str) -> Path:
    """The given path, or a packaged config with the same file name."""
    p = Path(path)
    if p.exists():
        return p
    packaged = resources.files("hjlab") / "configs" / p.name
    if packaged.is_file():
        log.info("using packaged config %s", p.name)
        return Path(str(packaged))
    raise InputError(f"config not found: {path}")


def packaged_configs() -> list:
    return sorted(f.name for f in (resources.files("hjlab") / "configs").iterdir() if f.name.endswith(".json"))


def resolve_config(raw: dict, command: str, overrides: dict) -> dict:
    if not isinstance(raw, dict):
        raise InputError("config must be a JSON object")
    allowed = set(SHARED) | set(SECTIONS)
    unknown = set(raw) - allowed
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    section = raw.get(command, {})
    if not isinstance(section, dict):
        raise InputError(f"section {command!r} must be an object")
    defaults = SECTIONS[command]
    unknown = set(section) - set(defaults)
    if unknown:
        raise InputError(f"unknown keys in {command!r}: {sorted(unknown)}")
    out = {k: copy.deepcopy(raw.get(k, v)) for k, v in SHARED.items()}
    for k, v in overrides.items():
        if v is not None:
            out[k] = v
    body = copy.deepcopy(defaults)
    body.update(copy.deepcopy(section))
    out["command"] = command
    out[command] = body
    if out["format"] not in ("csv", "json"):
        raise InputError("format must be csv or json")
    return out


def config_hash(cfg: dict) -> str:
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _model(cfg):
    if cfg["hamiltonian"] is None:
        raise InputError("config needs a 'hamiltonian' section")
    return model_from_config(cfg["hamiltonian"])


def datum_from_config(dc: dict, dim: int, seed: int = 0):
    from . import hopflax as hl

    dc = dict(dc)
    family = dc.pop("family", None)
    if family not in DATUM_KEYS:
        raise InputError(f"unknown datum family {family!r}")
    unknown = set(dc) - DATUM_KEYS[family]
    if unknown:
        raise InputError(f"unknown keys for datum {family!r}: {sorted(unknown)}")
    if family == "linear":
        datum = hl.linear_datum(dc.get("a", [0.0] * dim), float(dc.get("c0", 0.0)))
    elif family == "constant":
        datum = hl.constant_datum(float(dc.get("c", 0.0)), int(dc.get("dim", dim)))
    elif family == "cone":
        datum = hl.cone_datum(int(dc.get("dim", dim)), float(dc.get("slope", 1.0)))
    elif family == "semiconvex":
        datum = hl.semiconvex_datum(dc.get("pbar", [0.0] * dim), float(dc.get("K", 1.0)))
    else:
        kw = {k: dc[k] for k in ("M", "m", "n_breaks", "span", "n_ridges") if k in dc}
        datum = hl.random_piecewise_linear(int(dc.get("seed", seed)), int(dc.get("dim", dim)), **kw)
    if datum.dim != dim:
        raise InputError(f"datum dimension {datum.dim} does not match the model dimension {dim}")
    return datum


# ---------------------------------------------------------------- output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no inf/nan; keep them readable and parseable
        return v if math.isfinite(v) else str(v)
    return obj


class Writer:
    def __init__(self, out_dir, cfg):
        self.out = Path(out_dir)
        self.cfg = cfg
        self.hash = config_hash(cfg)
        self.files = []

    def header(self) -> dict:
        return {"tool": "hjlab", "version": __version__, "config_sha256": self.hash}

    def csv(self, name: str, columns: list, rows: list):
        buf = io.StringIO()
        buf.write(f"# hjlab {__version__} config_sha256={self.hash}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
        self._write(name, buf.getvalue())

    def json(self, name: str, payload: dict):
        doc = dict(self.header(), config=self.cfg, **payload)
        self._write(name, json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")

    def table(self, stem: str, columns: list, rows: list, summary: dict):
        """CSV + JSON sidecar, or a single JSON carrying the rows."""
        if self.cfg["format"] == "csv":
            self.csv(stem + ".csv", columns, rows)
            self.json(stem + ".json", dict(summary, table=stem + ".csv"))
        else:
            self.json(stem + ".json", dict(summary, columns=columns, rows=[[r[c] for c in columns] for r in rows]))

    def _write(self, name, text):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text)
        self.files.append(str(path))


# ---------------------------------------------------------------- commands


def cmd_solve(cfg, w: Writer) -> int:
    from .grid import GridSpec
    from .hopflax import solve

    sec = cfg["solve"]
    model = _model(cfg)
    view = LagrangianView(model)
    d = model.dim
    g = sec["grid"]
    if set(g) - {"lo", "hi", "n"}:
        raise InputError("grid keys are lo, hi, n")
    spec = GridSpec.box(g["lo"], g["hi"], g["n"])
    if spec.dim != d:
        raise InputError("grid dimension does not match the model")
    t = float(sec["t"])
    if not t > 0:
        raise InputError("t must be positive")
    datum = datum_from_config(sec["datum"], d, cfg["seed"])
    res = solve(datum, view, t, spec)
    X = spec.points()
    cols = [f"x{i}" for i in range(d)] + ["u"] + [f"b{i}" for i in range(d)] + [f"du{i}" for i in range(d)]
    B, G = res.b.flat(), res.grad_u.flat()
    U = res.u.flat()
    rows = []
    for j in range(spec.size):
        r = {f"x{i}": X[j, i] for i in range(d)}
        r["u"] = U[j]
        r.update({f"b{i}": B[j, i] for i in range(d)})
        r.update({f"du{i}": G[j, i] for i in range(d)})
        rows.append(r)
    summary = {"t": t, "grid": spec.describe(), "Lambda_M": res.Lambda_M, "datum": datum.name,
               "datum_params": datum.params, "speed_excess": res.speed_excess(), "model": model.describe()}
    w.table("solve", cols, rows, summary)
    return EXIT_OK


def cmd_bv_check(cfg, w: Writer) -> int:
    from .bv import bv_bound_check
    from .grid import GridSpec
    from .hopflax import solve

    sec = cfg["bv-check"]
    model = _model(cfg)
    view = LagrangianView(model)
    moduli = ConvexityModuli(view)
    d = model.dim
    om = sec["omega"]
    lo = np.broadcast_to(np.asarray(om["lo"], float), (d,))
    hi = np.broadcast_to(np.asarray(om["hi"], float), (d,))
    omega = (lo.tolist(), hi.tolist())
    spec = GridSpec.box(lo, hi, sec["n"])
    t = float(sec["t"])
    if not t > 0:
        raise InputError("t must be positive")
    if sec["seeds"] is not None:
        seeds = [int(s) for s in sec["seeds"]]
    else:
        rng = np.random.default_rng(cfg["seed"])
        seeds = [int(s) for s in rng.integers(0, 2 ** 31, int(sec["n_seeds"]))]
    rows = []
    for s in seeds:
        dc = dict(sec["datum"])
        if dc.get("family") == "random_pl":
            dc.setdefault("M", sec["M"])
            dc["seed"] = s
        datum = datum_from_config(dc, d, s)
        v = bv_bound_check(solve(datum, view, t, spec, moduli=moduli), moduli, datum.M, omega)
        rows.append({"seed": s, "lhs": v.lhs, "rhs": v.rhs, "slack": v.slack, "holds": v.holds,
                     "applicable": v.applicable, "gamma_M": v.constants["gamma_M"],
                     "Lambda_M": v.constants["Lambda_M"]})
    failed = [r["seed"] for r in rows if r["applicable"] and not r["holds"]]
    cols = ["seed", "lhs", "rhs", "slack", "holds", "applicable", "gamma_M", "Lambda_M"]
    w.table("bv_check", cols, rows, {"t": t, "omega": omega, "n_runs": len(rows), "failed_seeds": failed,
                                     "all_hold": not failed, "model": model.describe()})
    if failed:
        raise VerdictFailure(f"bound exceeded for seeds {failed}")
    return EXIT_OK


def theoretical_exponent(model) -> float:
    """(2k - 1) d for power-norm models; nan when no closed form is known."""
    desc = model.describe()
    if desc.get("kind") == "power_norm":
        return float((2 * int(desc["k"]) - 1) * model.dim)
    return math.nan


def cmd_entropy(cfg, w: Writer) -> int:
    from .entropy import bound_constants, bound_slopes, entropy_report, packing_count, solution_set_sample

    sec = cfg["entropy"]
    eps_grid = sec["eps_grid"]
    if not eps_grid:
        raise InputError("eps_grid is empty")
    eps_grid = sorted(float(e) for e in eps_grid)
    if eps_grid[0] <= 0:
        raise InputError("eps values must be positive")
    model = _model(cfg)
    view = LagrangianView(model)
    moduli = ConvexityModuli(view)
    T, R, m, M = (float(sec[k]) for k in ("T", "R", "m", "M"))
    sample = solution_set_sample(view, T, R, m, M, int(sec["n_members"]), int(sec["n_grid"]), cfg["seed"], moduli)
    rep = entropy_report(sample, eps_grid, sec["metric"], moduli, T, R, m, M)
    expo = theoretical_exponent(model)
    rows = []
    for i, e in enumerate(rep.eps):
        rows.append({"epsilon": e, "N_cover": rep.covering[i], "P_pack": rep.packing[i],
                     "P_pack_2eps": packing_count(sample, 2 * e, sec["metric"]), "lower_bound": rep.lower[i],
                     "upper_bound": rep.upper[i], "theoretical_exponent": expo})
    consts = bound_constants(moduli, T, R, m, M)
    slopes = bound_slopes(moduli, T, R, m, M, consts.eps_window * 1e-3)
    cols = ["epsilon", "N_cover", "P_pack", "P_pack_2eps", "lower_bound", "upper_bound", "theoretical_exponent"]
    w.table("entropy", cols, rows, {
        "model": model.describe(), "metric": sec["metric"], "members": len(sample), "fit": rep.fit,
        "constants": consts.to_dict(), "theoretical_exponent": expo,
        "bound_slopes": {"eps_range": [float(slopes["eps"][0]), float(slopes["eps"][-1])],
                         "lower": slopes["slope_lower"], "upper": slopes["slope_upper"],
                         "ordered": slopes["ordered"], "sweep_eps": slopes["eps"],
                         "sweep_lower": slopes["lower"], "sweep_upper": slopes["upper"]},
        "sandwich_ok": all(r["P_pack_2eps"] <= r["N_cover"] <= r["P_pack"] for r in rows),
    })
    return EXIT_OK


def cmd_counterexample(cfg, w: Writer) -> int:
    from .counterexample import LatticeDatumSpec, blowup_exponent, legendre_discrepancy, solve_and_measure

    sec = cfg["counterexample"]
    ell = float(sec["ell"])
    rows, fits = [], {}
    for variant in sec["variants"]:
        fit = blowup_exponent(ell, sec["deltas"], variant, int(sec["cell_points"]))
        band = _slope_band(fit.rows)
        ok = fit.monotone and abs(fit.exponent - sec["target"]) <= sec["tolerance"]
        fits[variant] = dict(fit.to_dict(), band95=band, within_target=ok)
        for r in fit.rows:
            rows.append(dict(r, variant=variant, h=max(r["h1"], r["h2"])))
    summary = {"ell": ell, "fits": {k: {kk: v for kk, v in f.items() if kk != "rows"} for k, f in fits.items()},
               "target": sec["target"], "tolerance": sec["tolerance"], "legendre": legendre_discrepancy()}
    if sec["doubling_delta"] is not None:
        dd = float(sec["doubling_delta"])
        cp = int(sec["cell_points"])
        base = solve_and_measure(LatticeDatumSpec(dd, ell, sec["variants"][0], h=dd ** (2 / 3) / cp))
        twice = solve_and_measure(LatticeDatumSpec(dd, 2 * ell, sec["variants"][0], h=dd ** (2 / 3) / cp))
        ratio = twice.tv_b / base.tv_b
        summary["doubling"] = {"delta": dd, "tv_b": base.tv_b, "tv_b_doubled": twice.tv_b, "ratio": ratio,
                               "within_target": abs(ratio - 4) <= 0.3 * 4}
    cols = ["variant", "delta", "h", "tv_b", "tv_du", "tv_b_jump", "cell_identity"]
    w.table("counterexample", cols, rows, summary)
    bad = [k for k, f in fits.items() if not f["within_target"]]
    if "doubling" in summary and not summary["doubling"]["within_target"]:
        bad.append("doubling")
    if bad:
        raise VerdictFailure(f"scaling verdict failed for {bad}")
    return EXIT_OK


def _slope_band(rows):
    """95% band of the fitted log-log slope from the residual scatter."""
    x = np.log(1 / np.array([r["delta"] for r in rows]))
    y = np.log(np.array([r["tv_b"] for r in rows]))
    _, cov = np.polyfit(x, y, 1, cov=True)
    from scipy import stats

    half = float(stats.t.ppf(0.975, len(x) - 2) * math.sqrt(cov[0, 0]))
    slope = float(np.polyfit(x, y, 1)[0])
    return [slope - half, slope + half]


def cmd_legendre(cfg, w: Writer) -> int:
    from .counterexample import legendre_discrepancy

    sec = cfg["legendre"]
    model = _model(cfg)
    view = LagrangianView(model)
    d = model.dim
    Q = np.asarray(sec["points"], dtype=float)
    if Q.ndim != 2 or Q.shape[1] != d:
        raise InputError(f"points must be a list of {d}-vectors")
    closed = view.kernel_params() is not None
    rows = []
    for q in Q:
        val, p = numeric_legendre(model, q)
        r = {f"q{i}": q[i] for i in range(d)}
        r["L_numeric"] = val
        r["L_closed"] = float(view.L(q[None])[0]) if closed else math.nan
        r.update({f"p{i}": p[i] for i in range(d)})
        rows.append(r)
    cols = [f"q{i}" for i in range(d)] + ["L_numeric", "L_closed"] + [f"p{i}" for i in range(d)]
    summary = {"model": model.describe()}
    if sec["compare_quartic"]:
        summary["quartic_discrepancy"] = legendre_discrepancy()
    w.table("legendre", cols, rows, summary)
    return EXIT_OK


def cmd_moduli(cfg, w: Writer) -> int:
    sec = cfg["moduli"]
    model = _model(cfg)
    moduli = ConvexityModuli(LagrangianView(model))
    rows = []
    for M in sec["M"]:
        M = float(M)
        rows.append({"kind": "M", "value": M, "Lambda_M": moduli.Lambda_M(M), "gamma_M": moduli.gamma_M(M),
                     "lambda_M": moduli.lambda_M(M), "lambda_R": math.nan, "degenerate": False})
    for R in sec["R"]:
        R = float(R)
        a = moduli.convexity_audit(R)
        rows.append({"kind": "R", "value": R, "Lambda_M": math.nan, "gamma_M": math.nan, "lambda_M": math.nan,
                     "lambda_R": a["lambda_fine"], "degenerate": a["degenerate"]})
    cols = ["kind", "value", "Lambda_M", "gamma_M", "lambda_M", "lambda_R", "degenerate"]
    w.table("moduli", cols, rows, {"model": model.describe()})
    return EXIT_OK


HANDLERS = {"solve": cmd_solve, "bv-check": cmd_bv_check, "entropy": cmd_entropy,
            "counterexample": cmd_counterexample, "legendre": cmd_legendre, "moduli": cmd_moduli}


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hjlab", description="Hopf-Lax solvers, BV and entropy diagnostics.")
    ap.add_argument("--version", action="version", version=f"hjlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config (packaged configs are found by file name)")
        p.add_argument("--out", default="hjlab_out")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def _set_threads(n: int):
    # the kernels are serial; the value is validated and recorded in the config
    if n < 1:
        raise InputError("threads must be >= 1")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        raw = json.loads(find_config(args.config).read_text())
        cfg = resolve_config(raw, args.command, {"seed": args.seed, "threads": args.threads, "format": args.format})
        _set_threads(int(cfg["threads"]))
        w = Writer(args.out, cfg)
        code = HANDLERS[args.command](cfg, w)
    except VerdictFailure as e:
        print(f"verdict failed: {e}", file=sys.stderr)
        return EXIT_VERDICT
    except ValueError as e:  # InputError and JSON syntax errors included
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    for f in w.files:
        print(f)
    return code


if __name__ == "__main__":
    sys.exit(main())
