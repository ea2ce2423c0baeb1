"""Command-line experiments: ``sjl <command> [options]``.

Settings come from built-in defaults, then an optional ``--config`` file
(``key = value`` lines mirroring the flags, or a JSON document previously
written by this tool), then the command-line flags. The effective config is
echoed into every output. Exit codes: 0 success, 1 runtime or budget
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from importlib import metadata

import numpy as np

from .bounds import (ThresholdQuery, dimension_lower, eval_f_fkl, eval_g, eval_h,
                     eval_moment_lower, eval_moment_upper, even_ceiling, kn_dimension)
from .core import (BoundConstants, ConfigurationError, DimensionError, SjlParams, basis_vector,
                   hard_vector, make_unit_vector)
from .exact import BudgetExceededError, EnumerationBudget, exact_moment, exact_tail
from .matrix_io import format_matrix, read_matrix
from .montecarlo import (compare_gaussian, empirical_threshold, mc_moment, mc_tail, snap_even)
from .sampler import Seed, error_sample, project, sample_matrix

SEED_ENV = "SJL_SEED"
COMMANDS = ("sample", "project", "moments", "tail", "threshold-sweep", "moment-check",
            "appendix-a", "bounds")

DEFAULTS = {
    "n": None,
    "m": "16",
    "s": "1",
    "flavor": "uniform",
    "eps": "0.5",
    "delta": "0.05",
    "q": "2",
    "trials": "100000",
    "seed": "0",
    "v-grid": "1,0.7071067811865476,0.5,0.3535533905932738,0.25,0.1767766952966369,0.125",
    "constants": "",
    "format": "csv",
    "budget": "100000000",
    "workers": "1",
    "x": "random",
    "method": "both",
    "matrix": None,
    "control": "false",
    "out": None,
}

def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# config ------------------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    """Parse a config file: JSON (optionally with a ``config`` key) or key=value lines."""
    stripped = text.strip()
    if stripped.startswith("{"):
        data = json.loads(stripped)
        data = data.get("config", data)
        return {_norm_key(k): _to_text(v) for k, v in data.items() if k != "command"}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigurationError(f"config line {lineno}: expected 'key = value'")
        key, value = line.split(sep, 1)
        out[_norm_key(key)] = value.strip()
    return out


def _norm_key(key: str) -> str:
    key = key.strip().lstrip("-").replace("_", "-")
    if key not in DEFAULTS:
        raise ConfigurationError(f"unknown config key {key!r}")
    return key


def _to_text(value) -> str | None:
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ",".join(_to_text(v) for v in value)
    if isinstance(value, dict):
        return ",".join(f"{k}={v!r}" for k, v in value.items())
    return str(value)


def _parse_seed(text: str) -> int:
    text = str(text).strip().lower()
    return int(text, 16) if text.startswith("0x") else int(text)


def _parse_list(text: str, cast) -> list:
    items = [t for t in str(text).replace(" ", "").split(",") if t]
    if not items:
        raise ConfigurationError("empty list")
    return [cast(t) for t in items]


def _parse_constants(text: str) -> BoundConstants:
    overrides = {}
    for item in filter(None, (t.strip() for t in str(text or "").split(","))):
        if "=" not in item:
            raise ConfigurationError(f"constant override {item!r} is not name=value")
        name, value = item.split("=", 1)
        overrides[name.strip()] = float(value)
    return BoundConstants().with_overrides(overrides)


def _as_bool(text) -> bool:
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def resolve_config(command: str, flags: dict) -> tuple[dict, dict]:
    """Merge defaults, config file and flags. Returns (typed config, echo)."""
    raw = dict(DEFAULTS)
    if os.environ.get(SEED_ENV):
        raw["seed"] = os.environ[SEED_ENV]
    if flags.get("config"):
        with open(flags["config"], encoding="utf-8") as fh:
            raw.update(parse_config_text(fh.read()))
    for key, value in flags.items():
        if key != "config" and value is not None:
            raw[_norm_key(key)] = value
    try:
        cfg = {
            "n": int(raw["n"]) if raw["n"] not in (None, "", "None") else None,
            "m": _parse_list(raw["m"], int),
            "s": _parse_list(raw["s"], int),
            "flavor": raw["flavor"],
            "eps": _parse_list(raw["eps"], float),
            "delta": _parse_list(raw["delta"], float),
            "q": _parse_list(raw["q"], float),
            "trials": int(raw["trials"]),
            "seed": _parse_seed(raw["seed"]),
            "v-grid": _parse_list(raw["v-grid"], float),
            "constants": _parse_constants(raw["constants"]),
            "format": raw["format"],
            "budget": int(float(raw["budget"])),
            "workers": int(raw["workers"]),
            "x": raw["x"],
            "method": raw["method"],
            "matrix": raw["matrix"] or None,
            "control": _as_bool(raw["control"]),
            "out": raw["out"] or None,
        }
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from None
    if cfg["format"] not in ("csv", "json"):
        raise ConfigurationError(f"--format must be csv or json, got {cfg['format']!r}")
    if cfg["flavor"] not in ("uniform", "block"):
        raise ConfigurationError(f"--flavor must be uniform or block, got {cfg['flavor']!r}")
    if cfg["method"] not in ("exact", "mc", "both"):
        raise ConfigurationError("--method must be exact, mc or both")
    if cfg["workers"] < 1:
        raise ConfigurationError("--workers must be >= 1")
    echo = {"command": command}
    for key in DEFAULTS:
        if key in ("out", "format", "workers"):
            continue  # presentation settings do not change results
        value = cfg[key]
        if key == "constants":
            value = value.as_dict()
        elif key == "seed":
            value = f"{value:#x}"
        echo[key] = value
    return cfg, echo


def _single(cfg: dict, key: str):
    values = cfg[key]
    if len(values) != 1:
        raise ConfigurationError(f"--{key} takes a single value for this command")
    return values[0]


def _params(cfg: dict, n: int | None = None) -> SjlParams:
    n = n if n is not None else cfg["n"]
    if n is None:
        n = 16
    return SjlParams(n, _single(cfg, "m"), _single(cfg, "s"), cfg["flavor"])


def build_vector(spec: str, n: int, seed: Seed):
    """x specs: ``e<k>`` (1-based basis vector), ``hard:<v>``, ``random``, ``values:a;b;c``."""
    spec = spec.strip()
    if spec == "random":
        rng = seed.child(0x5EC7).generator()
        return make_unit_vector(rng.standard_normal(n))
    if spec.startswith("e") and spec[1:].isdigit():
        k = int(spec[1:])
        if not 1 <= k <= n:
            raise DimensionError(f"basis index {k} outside 1..{n}")
        return basis_vector(n, k - 1)
    if spec.startswith("hard:"):
        return hard_vector(float(spec[5:]), n)
    if spec.startswith("values:"):
        vals = [float(t) for t in spec[7:].replace(";", " ").split()]
        if len(vals) != n:
            raise DimensionError(f"x has {len(vals)} values, n={n}")
        return make_unit_vector(vals)
    raise ConfigurationError(f"unrecognised x spec {spec!r}")


def _default_n_for_x(spec: str) -> int | None:
    spec = spec.strip()
    if spec.startswith("values:"):
        return len(spec[7:].replace(";", " ").split())
    if spec.startswith("hard:"):
        v = float(spec[5:])
        return max(1, int(round(1 / (v * v))))
    return None


# output -------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def render(echo: dict, columns: list[str], rows: list[dict], summary: dict, fmt: str) -> tuple[str, str | None]:
    """Return (primary text, summary JSON text or None)."""
    meta = {"config": echo, "version": _version()}
    summary_text = None
    if summary:
        summary_text = json.dumps(_jsonable({**meta, "summary": summary}), sort_keys=True, indent=2) + "\n"
    if fmt == "json":
        doc = {**meta, "columns": columns, "rows": [[r.get(c) for c in columns] for r in rows],
               "summary": summary}
        return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n", None
    buf = io.StringIO()
    buf.write("# " + json.dumps(_jsonable(meta), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue(), summary_text


def _emit(cfg, echo, columns, rows, summary=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    text, summary_text = render(echo, columns, rows, summary or {}, cfg["format"])
    out = cfg["out"]
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        if summary_text:
            with open(out + ".summary.json", "w", encoding="utf-8", newline="\n") as fh:
                fh.write(summary_text)
    else:
        stdout.write(text)
        if summary_text:
            stderr.write(summary_text)


# commands -------------------------------------------------------------------------

def cmd_sample(cfg, echo, stdout, stderr):
    params = _params(cfg)
    seed = Seed(cfg["seed"])
    A = sample_matrix(params, seed)
    text = format_matrix(A, seed.hex())
    sizes = [len(set(r.tolist())) for r in A.rows]
    audit = (f"sparsity audit: {params.n} columns, {sum(sz == params.s for sz in sizes)} with "
             f"exactly s={params.s} distinct rows, nnz={sum(sizes)}\n")
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        stdout.write(audit)
    else:
        stdout.write(text)
        stderr.write(audit)


def _vector_and_params(cfg):
    n = cfg["n"] if cfg["n"] is not None else _default_n_for_x(cfg["x"])
    params = _params(cfg, n)
    x = build_vector(cfg["x"], params.n, Seed(cfg["seed"]))
    return params, x


def cmd_project(cfg, echo, stdout, stderr):
    seed = Seed(cfg["seed"])
    if cfg["matrix"]:
        A, tag = read_matrix(cfg["matrix"])
        x = build_vector(cfg["x"], A.params.n, seed)
    else:
        params, x = _vector_and_params(cfg)
        A, tag = sample_matrix(params, seed), seed.hex()
    y = project(A, x)
    rows = [{"row": i, "value": float(v), "seed": tag} for i, v in enumerate(y)]
    err = error_sample(A, x)
    summary = {"error": err, "norm_sq": err + 1.0, "seed": tag,
               "linf_ratio": x.linf_ratio}
    _emit(cfg, echo, ["row", "value", "seed"], rows, summary, stdout, stderr)


def _budget(cfg):
    return EnumerationBudget(cfg["budget"])


def cmd_moments(cfg, echo, stdout, stderr):
    params, x = _vector_and_params(cfg)
    seed = Seed(cfg["seed"])
    rows = []
    for i, q in enumerate(cfg["q"]):
        if cfg["method"] in ("exact", "both"):
            est = exact_moment(params, x, q, _budget(cfg))
            rows.append({"q": q, "method": "exact", "value": est.value, "std_error": 0.0,
                         "trials": 0, "seed": ""})
        if cfg["method"] in ("mc", "both"):
            sub = seed.child(i)
            est = mc_moment(params, x, q, cfg["trials"], sub, workers=cfg["workers"])
            rows.append({"q": q, "method": "monte-carlo", "value": est.value,
                         "std_error": est.std_error, "trials": est.trials, "seed": sub.hex()})
    _emit(cfg, echo, ["q", "method", "value", "std_error", "trials", "seed"], rows,
          stdout=stdout, stderr=stderr)


def cmd_tail(cfg, echo, stdout, stderr):
    params, x = _vector_and_params(cfg)
    seed = Seed(cfg["seed"])
    rows = []
    for i, eps in enumerate(cfg["eps"]):
        if cfg["method"] in ("exact", "both"):
            rate = exact_tail(params, x, eps, _budget(cfg))
            rows.append({"eps": eps, "method": "exact", "failure_rate": rate, "ci_lo": rate,
                         "ci_hi": rate, "trials": 0, "seed": ""})
        if cfg["method"] in ("mc", "both"):
            sub = seed.child(i)
            est = mc_tail(params, x, eps, cfg["trials"], sub, workers=cfg["workers"])
            rows.append({"eps": eps, "method": "monte-carlo", "failure_rate": est.failure_rate,
                         "ci_lo": est.wilson_ci_95[0], "ci_hi": est.wilson_ci_95[1],
                         "trials": est.trials, "seed": sub.hex()})
    _emit(cfg, echo, ["eps", "method", "failure_rate", "ci_lo", "ci_hi", "trials", "seed"],
          rows, stdout=stdout, stderr=stderr)


THRESHOLD_COLUMNS = ["m", "eps", "delta", "s", "v_nominal", "v_effective", "N", "failure_rate",
                     "ci_lo", "ci_hi", "g_value", "g_branch", "h_value", "h_branch", "seed",
                     "trials"]


def cmd_threshold_sweep(cfg, echo, stdout, stderr):
    grid = cfg["v-grid"]
    n = cfg["n"] if cfg["n"] is not None else max(snap_even(v) for v in grid)
    rows, curves = [], []
    for m in cfg["m"]:
        for s in cfg["s"]:
            for eps in cfg["eps"]:
                for delta in cfg["delta"]:
                    curve = empirical_threshold(m, eps, delta, s, n, grid, cfg["trials"],
                                                Seed(cfg["seed"]), cfg["flavor"],
                                                workers=cfg["workers"])
                    query = ThresholdQuery(m, eps, delta, s, cfg["constants"])
                    g, h = eval_g(query), eval_h(query)
                    for pt in curve.grid:
                        est = pt.estimate
                        rows.append({"m": m, "eps": eps, "delta": delta, "s": s,
                                     "v_nominal": pt.v_nominal, "v_effective": pt.v_effective,
                                     "N": pt.N, "failure_rate": est.failure_rate,
                                     "ci_lo": est.wilson_ci_95[0], "ci_hi": est.wilson_ci_95[1],
                                     "g_value": g.value, "g_branch": g.branch_id,
                                     "h_value": h.value, "h_branch": h.branch_id,
                                     "seed": pt.seed.hex(), "trials": est.trials})
                    curves.append({"m": m, "eps": eps, "delta": delta, "s": s,
                                   "v_hat": curve.v_hat, "g": g.as_dict(), "h": h.as_dict(),
                                   "note": "v_hat is measured on hard vectors only: an upper "
                                           "bound witness for the threshold"})
    _emit(cfg, echo, THRESHOLD_COLUMNS, rows, {"curves": curves}, stdout, stderr)


MOMENT_CHECK_COLUMNS = ["q", "exact", "mc", "mc_stderr", "upper", "upper_branch", "lower",
                        "lower_branch", "ratio_upper", "ratio_lower", "flags", "seed", "trials"]


def _ratio(num, den):
    if den is None or den <= 0:
        return None
    return num / den


def cmd_moment_check(cfg, echo, stdout, stderr):
    params, x = _vector_and_params(cfg)
    seed = Seed(cfg["seed"])
    v = x.linf_ratio
    is_hard = cfg["x"].strip().startswith("hard:")
    rows = []
    for i, q in enumerate(cfg["q"]):
        flags = []
        exact = None
        if cfg["method"] in ("exact", "both"):
            try:
                exact = exact_moment(params, x, q, _budget(cfg)).value
            except BudgetExceededError as exc:
                raise BudgetExceededError(
                    f"{exc}; rerun with --method mc for Monte Carlo only") from None
        row = {"q": q, "exact": exact, "seed": "", "trials": 0}
        if cfg["method"] in ("mc", "both") and q <= 16:
            sub = seed.child(i)
            est = mc_moment(params, x, q, cfg["trials"], sub, workers=cfg["workers"])
            row.update(mc=est.value, mc_stderr=est.std_error, seed=sub.hex(), trials=est.trials)
        upper = lower = None
        if q == int(q) and int(q) % 2 == 0 and 2 <= q <= params.m:
            rep = eval_moment_upper(params.m, params.s, v, int(q), cfg["constants"])
            row["upper_branch"] = rep.branch_id
            if rep.applicable:
                upper = rep.value
                row["upper"] = upper
        else:
            row["upper_branch"] = "n/a"
        if is_hard:
            rep = eval_moment_lower(params.m, params.s, v, int(q) if q == int(q) else q,
                                    cfg["constants"])
            row["lower_branch"] = rep.branch_id
            if rep.applicable:
                lower = rep.value
                row["lower"] = lower
            flags += list(rep.flags)
        else:
            row["lower_branch"] = "n/a"
            flags.append("lower:not-a-hard-vector")
        if exact == 0.0:
            flags.append("degenerate:exact-moment-zero")
        if exact is not None:
            row["ratio_upper"] = _ratio(exact, upper)
            row["ratio_lower"] = _ratio(exact, lower)
        row["flags"] = ";".join(flags)
        rows.append(row)
    _emit(cfg, echo, MOMENT_CHECK_COLUMNS, rows, stdout=stdout, stderr=stderr)


APPENDIX_COLUMNS = ["m", "p", "v_nominal", "v_effective", "N", "rademacher", "rademacher_stderr",
                    "gaussian", "gaussian_stderr", "ratio", "ratio_stderr", "in_regime", "x_spec",
                    "seed", "trials"]


def appendix_vector_ratio(m: int, eps: float, p: int) -> float:
    """``sqrt(eps) ln(m eps / p) / p``: the s = 1 threshold candidate."""
    return math.sqrt(eps) * math.log(m * eps / p) / p


def cmd_appendix_a(cfg, echo, stdout, stderr):
    if _single(cfg, "s") != 1:
        raise ConfigurationError("appendix-a runs at s = 1")
    eps, delta = _single(cfg, "eps"), _single(cfg, "delta")
    p = even_ceiling(math.log(1 / delta))
    seed = Seed(cfg["seed"])
    rows = []
    for i, m in enumerate(cfg["m"]):
        v = appendix_vector_ratio(m, eps, p)
        row = {"m": m, "p": p, "v_nominal": v, "x_spec": "hard"}
        if not 0 < v <= 1:
            row["in_regime"] = False
            rows.append(row)
            continue
        big_n = snap_even(v)
        n = max(cfg["n"] or big_n, big_n)
        x = hard_vector(1 / math.sqrt(big_n), n)
        in_regime = (math.log(m * eps / p) <= math.sqrt(p)
                     and p * m * x.linf_ratio**2 / math.e >= 1)
        sub = seed.child(i)
        cmp = compare_gaussian(SjlParams(n, m, 1), x, p, cfg["trials"], sub, workers=cfg["workers"])
        row.update(v_effective=x.linf_ratio, N=big_n, rademacher=cmp.rademacher.value,
                   rademacher_stderr=cmp.rademacher.std_error, gaussian=cmp.gaussian.value,
                   gaussian_stderr=cmp.gaussian.std_error, ratio=cmp.ratio,
                   ratio_stderr=cmp.ratio_std_error, in_regime=in_regime, seed=sub.hex(),
                   trials=cfg["trials"])
        rows.append(row)
        if cfg["control"]:
            ctrl = compare_gaussian(SjlParams(n, m, 1), basis_vector(n), p, cfg["trials"], sub)
            rows.append({"m": m, "p": p, "v_nominal": 1.0, "v_effective": 1.0, "N": 1,
                         "rademacher": ctrl.rademacher.value, "rademacher_stderr": 0.0,
                         "gaussian": ctrl.gaussian.value, "gaussian_stderr": 0.0,
                         "ratio": None, "ratio_stderr": None, "in_regime": False,
                         "x_spec": "e1", "seed": sub.hex(), "trials": cfg["trials"]})
    _emit(cfg, echo, APPENDIX_COLUMNS, rows, stdout=stdout, stderr=stderr)


BOUNDS_COLUMNS = ["m", "eps", "delta", "s", "p", "g_value", "g_branch", "h_value", "h_branch",
                  "f_value", "f_branch", "kn_dimension", "kn_branch", "dimension_lower",
                  "dimension_lower_branch", "flags"]


def cmd_bounds(cfg, echo, stdout, stderr):
    c = cfg["constants"]
    rows, reports = [], []
    for m in cfg["m"]:
        for s in cfg["s"]:
            for eps in cfg["eps"]:
                for delta in cfg["delta"]:
                    query = ThresholdQuery(m, eps, delta, s, c)
                    g, h, f = eval_g(query), eval_h(query), eval_f_fkl(m, eps, delta, c)
                    kn, low = kn_dimension(eps, delta, s, c), dimension_lower(eps, delta, s, c)
                    flags = sorted({f"{name}:{fl}" for name, rep in
                                    (("g", g), ("h", h), ("f", f), ("kn", kn), ("lower", low))
                                    for fl in rep.flags})
                    rows.append({"m": m, "eps": eps, "delta": delta, "s": s, "p": query.p,
                                 "g_value": g.value, "g_branch": g.branch_id,
                                 "h_value": h.value, "h_branch": h.branch_id,
                                 "f_value": f.value, "f_branch": f.branch_id,
                                 "kn_dimension": kn.value, "kn_branch": kn.branch_id,
                                 "dimension_lower": low.value,
                                 "dimension_lower_branch": low.branch_id,
                                 "flags": ";".join(flags)})
                    reports.append({"m": m, "eps": eps, "delta": delta, "s": s,
                                    "g": g.as_dict(), "h": h.as_dict(), "f": f.as_dict(),
                                    "kn_dimension": kn.as_dict(),
                                    "dimension_lower": low.as_dict()})
    _emit(cfg, echo, BOUNDS_COLUMNS, rows, {"reports": reports}, stdout, stderr)


HANDLERS = {
    "sample": cmd_sample,
    "project": cmd_project,
    "moments": cmd_moments,
    "tail": cmd_tail,
    "threshold-sweep": cmd_threshold_sweep,
    "moment-check": cmd_moment_check,
    "appendix-a": cmd_appendix_a,
    "bounds": cmd_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    opt = common.add_argument
    opt("--config", help="key = value file (or JSON output of this tool)")
    opt("--n", help="ambient dimension")
    opt("--m", help="target dimension (comma list for sweeps)")
    opt("--s", help="nonzeros per column (comma list for sweeps)")
    opt("--flavor", help="uniform or block")
    opt("--eps", help="distortion (comma list)")
    opt("--delta", help="failure probability (comma list)")
    opt("--q", help="moment orders (comma list)")
    opt("--trials", help="Monte Carlo trials")
    opt("--seed", help=f"root seed, decimal or 0x-hex (default ${SEED_ENV} or 0)")
    opt("--v-grid", dest="v_grid", help="l_inf/l_2 grid for threshold-sweep")
    opt("--constants", help="constant overrides name=value,...")
    opt("--out", help="output path (default stdout)")
    opt("--format", help="csv or json")
    opt("--budget", help="enumeration budget (configurations)")
    opt("--workers", help="threads for Monte Carlo blocks")
    opt("--x", help="vector: random, e<k>, hard:<v>, values:a;b;...")
    opt("--method", help="exact, mc or both")
    opt("--matrix", help="matrix file for project")
    opt("--control", help="appendix-a: add an e1 control row (true/false)")
    parser = argparse.ArgumentParser(prog="sjl", description="Sparse JL experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = {k.replace("_", "-"): v for k, v in vars(args).items() if k != "command"}
    start = time.perf_counter()
    try:
        cfg, echo = resolve_config(args.command, flags)
        HANDLERS[args.command](cfg, echo, stdout, stderr)
    except (ConfigurationError, DimensionError) as exc:
        stderr.write(f"sjl {args.command}: configuration error: {exc}\n")
        return 2
    except BudgetExceededError as exc:
        stderr.write(f"sjl {args.command}: {exc}\n")
        return 1
    except (ValueError, OSError, RuntimeError) as exc:
        stderr.write(f"sjl {args.command}: error: {exc}\n")
        return 1
    stderr.write(f"sjl {args.command}: done in {time.perf_counter() - start:.2f}s\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
