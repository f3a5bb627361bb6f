"""Command-line front end.

Subcommands: centering, test, power, experiment, mp-info. Parameters come
from flags and/or a JSON file given with --config; flags win. Output goes
to --out (``-`` for stdout) as JSON or CSV.

Exit codes: 0 success, 1 numerical or internal failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .centering import centering_value, closed_form_lrt_g, closed_form_log, closed_form_mean
from .clt_test import clt_params_g, null_centering_g, one_spike_power, power, run_test
from .errors import NumericalError, SpectralError
from .functions import from_name
from .mc_lab import ENTRY_DISTS, ExperimentConfig, empirical_size_power, run_clt_experiment
from .spike_model import new_model, parse_spikes
from .stieltjes import mp_support

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class InputError(ValueError):
    """Collected validation problems; the message lists all of them."""

    def __init__(self, problems: List[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


# ---------------------------------------------------------------- parameters


def _load_config(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise InputError([f"config file not found: {path}"]) from None
    except json.JSONDecodeError as exc:
        raise InputError([f"config file {path} is not valid JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise InputError(["config file must hold a JSON object"])
    return {k.replace("-", "_"): v for k, v in data.items()}


def _merge(args: argparse.Namespace, keys) -> Dict[str, Any]:
    params = _load_config(getattr(args, "config", None))
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    return params


def _spikes_from(value, problems: List[str]):
    if value is None:
        return []
    if isinstance(value, str):
        value = [value]
    out = []
    for item in value:
        if isinstance(item, str):
            try:
                out.extend(parse_spikes(item))
            except ValueError as exc:
                problems.append(str(exc))
        elif isinstance(item, (list, tuple)) and len(item) == 2:
            out.append((item[0], item[1]))
        else:
            problems.append(f"cannot read spike entry {item!r}; use \"a:mult\" or [a, mult]")
    return out


def _int_field(params, key, problems, required=True, minimum=1):
    val = params.get(key)
    if val is None:
        if required:
            problems.append(f"missing required parameter '{key}'")
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float, str)):
        problems.append(f"'{key}' must be an integer, got {val!r}")
        return None
    try:
        as_int = int(val)
        if as_int != float(val):
            raise ValueError
    except (TypeError, ValueError):
        problems.append(f"'{key}' must be an integer, got {val!r}")
        return None
    if as_int < minimum:
        problems.append(f"'{key}' must be at least {minimum}, got {as_int}")
        return None
    return as_int


def _float_field(params, key, problems, default=None, lo=None, hi=None):
    val = params.get(key, default)
    if val is None:
        problems.append(f"missing required parameter '{key}'")
        return None
    try:
        x = float(val)
    except (TypeError, ValueError):
        problems.append(f"'{key}' must be a number, got {val!r}")
        return None
    if (lo is not None and not x > lo) or (hi is not None and not x < hi):
        problems.append(f"'{key}' must lie in ({lo}, {hi}), got {x:g}")
        return None
    return x


def _model_from(params, problems):
    p = _int_field(params, "p", problems)
    n = _int_field(params, "n", problems)
    spikes = _spikes_from(params.get("spike", params.get("spikes")), problems)
    if p is None or n is None:
        return None
    try:
        return new_model(p, n, spikes)
    except ValueError as exc:
        problems.append(str(exc))
        return None


def _model_dict(model):
    return {
        "p": model.p,
        "n": model.n,
        "y_n": model.y,
        "spikes": [[a, m] for a, m in model.spikes],
    }


def _function_from(params, problems, key="f", default=None):
    name = params.get(key, default)
    if name is None:
        problems.append(f"missing required parameter '{key}'")
        return None
    try:
        return from_name(str(name))
    except ValueError as exc:
        problems.append(str(exc))
        return None


def _raise_if(problems):
    if problems:
        raise InputError(problems)


# ---------------------------------------------------------------- output


def _clean(obj):
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_json(payload) -> str:
    return json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return " ".join(_csv_cell(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def to_csv(rows: List[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    fields = list(rows[0].keys())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_csv_cell(_clean(row.get(k))) for k in fields])
    return buf.getvalue()


def _flat_row(payload):
    row = {}
    for k, v in payload.items():
        if k == "model":
            row.update({"p": v["p"], "n": v["n"], "y_n": v["y_n"]})
            row["spikes"] = ",".join(f"{a!r}:{m}" for a, m in v["spikes"])
        elif k != "rows":
            row[k] = v
    return row


def _emit(args, payload, rows=None):
    fmt = getattr(args, "format", "json") or "json"
    if fmt == "csv":
        text = to_csv(rows if rows is not None else [_flat_row(payload)])
    else:
        text = to_json(payload)
    out = getattr(args, "out", "-") or "-"
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _header(command):
    return {"schema_version": SCHEMA_VERSION, "command": command}


# ---------------------------------------------------------------- commands


def cmd_centering(args) -> int:
    params = _merge(args, ["p", "n", "spike", "f", "margin"])
    problems: List[str] = []
    model = _model_from(params, problems)
    f = _function_from(params, problems)
    margin = _float_field(params, "margin", problems, default=0.5, lo=0.0)
    _raise_if(problems)

    res = centering_value(f, model, margin=margin)
    oracle = None
    if f.name == "x":
        oracle = closed_form_mean(model)
    elif f.name in ("log", "lrt_g") and model.y < 1:
        oracle = closed_form_log(model) if f.name == "log" else closed_form_lrt_g(model)
    payload = _header("centering")
    payload.update(
        model=_model_dict(model),
        function=f.name,
        term1=res.term1,
        term2=res.term2,
        base=res.base,
        spike_sum=res.spike_sum,
        total=res.total,
        est_error=res.est_error,
        quadrature_nodes_used=res.quadrature_nodes_used,
        oracle=oracle,
        gap=abs(res.total - oracle) if oracle is not None else None,
    )
    _emit(args, payload)
    return EXIT_OK


def read_observations(path, header=False, transpose=False, delimiter=","):
    """Read a numeric CSV into an (observations x variables) array."""
    problems = []
    rows = []
    try:
        fh = sys.stdin if path == "-" else open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError([f"cannot open {path}: {exc.strerror}"]) from None
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        width = None
        for lineno, raw in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not raw or all(not c.strip() for c in raw):
                continue
            if width is None:
                width = len(raw)
            elif len(raw) != width:
                problems.append(f"line {lineno}: expected {width} columns, found {len(raw)}")
                continue
            try:
                rows.append([float(c) for c in raw])
            except ValueError:
                bad = next(c for c in raw if not _is_float(c))
                problems.append(f"line {lineno}: non-numeric cell {bad!r}")
            if len(problems) >= 20:
                problems.append("too many errors; stopping")
                break
    _raise_if(problems)
    if not rows:
        raise InputError([f"{path}: no data rows"])
    X = np.array(rows, dtype=float)
    if not np.all(np.isfinite(X)):
        raise InputError([f"{path}: data contains inf or nan"])
    return X.T if transpose else X


def _is_float(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_test(args) -> int:
    params = _merge(args, ["csv", "alpha", "header", "center", "transpose"])
    problems: List[str] = []
    alpha = _float_field(params, "alpha", problems, default=0.05, lo=0.0, hi=1.0)
    if not params.get("csv"):
        problems.append("missing CSV path")
    _raise_if(problems)

    X = read_observations(params["csv"], bool(params.get("header")), bool(params.get("transpose")))
    n, p = X.shape
    if p >= n:
        raise InputError([f"need more observations than variables (n={n}, p={p})"])
    if params.get("center"):
        X = X - X.mean(axis=0)
    S = X.T @ X / n
    lam = np.linalg.eigvalsh(S)
    out = run_test(lam, p, n, alpha)
    payload = _header("test")
    payload.update(out.to_dict(), p=p, n=n, centered_data=bool(params.get("center")))
    _emit(args, payload)
    return EXIT_OK


def _alphas(value, problems):
    if value is None:
        return [0.01, 0.05, 0.1]
    if isinstance(value, str):
        items = [s for s in value.split(",") if s.strip()]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [value]
    out = []
    for s in items:
        try:
            a = float(s)
        except (TypeError, ValueError):
            problems.append(f"bad alpha {s!r}")
            continue
        if not 0 < a < 1:
            problems.append(f"alpha must lie in (0, 1), got {a:g}")
            continue
        out.append(a)
    if not out and not problems:
        problems.append("empty alpha grid")
    return sorted(set(out))


def cmd_power(args) -> int:
    params = _merge(args, ["p", "n", "spike", "alphas"])
    problems: List[str] = []
    model = _model_from(params, problems)
    alphas = _alphas(params.get("alphas"), problems)
    if model is not None and not 0 < model.y < 1:
        problems.append(f"power needs p < n (y_n={model.y:g})")
    _raise_if(problems)

    single = model.k == 1 and model.spikes[0][1] == 1
    rows = []
    for a in alphas:
        row = {"alpha": a, "beta": power(model, a)}
        if single:
            row["beta_one_spike"] = one_spike_power(model.spikes[0][0], model.y, a)
        rows.append(row)
    payload = _header("power")
    payload.update(model=_model_dict(model), rows=rows)
    _emit(args, payload, rows=rows)
    return EXIT_OK


def cmd_mp_info(args) -> int:
    params = _merge(args, ["p", "n"])
    problems: List[str] = []
    p = _int_field(params, "p", problems)
    n = _int_field(params, "n", problems)
    _raise_if(problems)
    y = p / n
    a, b = mp_support(y)
    payload = _header("mp-info")
    payload.update(p=p, n=n, y_n=y, a_y=a, b_y=b, atom_at_zero=max(0.0, 1.0 - 1.0 / y))
    if y < 1:
        m_g, v_g = clt_params_g(y)
        g0 = null_centering_g(y)
        payload.update(m_g=m_g, v_g=v_g, null_centering_g=g0, p_times_null_centering=p * g0)
    else:
        payload.update(m_g=None, v_g=None, null_centering_g=None, p_times_null_centering=None)
    _emit(args, payload)
    return EXIT_OK


EXPERIMENT_KINDS = ("clt", "size_power")


def _experiment_config(params):
    problems: List[str] = []
    known = {
        "kind", "p", "n", "spike", "spikes", "reps", "seed", "entry_dist",
        "function", "f", "alpha", "threads", "config", "out", "format", "dump_reps",
    }
    for key in params:
        if key not in known:
            problems.append(f"unknown config key '{key}'")
    kind = params.get("kind", "clt")
    if kind not in EXPERIMENT_KINDS:
        problems.append(f"'kind' must be one of {EXPERIMENT_KINDS}, got {kind!r}")
    model = _model_from(params, problems)
    reps = _int_field(params, "reps", problems)
    seed = _int_field(params, "seed", problems, required=False, minimum=0)
    threads = _int_field(params, "threads", problems, required=False)
    alpha = _float_field(params, "alpha", problems, default=0.05, lo=0.0, hi=1.0)
    entry = params.get("entry_dist", "gaussian")
    if entry not in ENTRY_DISTS:
        problems.append(f"'entry_dist' must be one of {ENTRY_DISTS}, got {entry!r}")
    fname = params.get("function", params.get("f", "lrt_g"))
    _function_from({"function": fname}, problems, key="function")
    if kind == "size_power":
        if fname != "lrt_g":
            problems.append("size_power experiments use the lrt_g statistic")
        if entry != "gaussian":
            problems.append("size_power experiments need gaussian entries")
    if model is not None and kind == "size_power" and not 0 < model.y < 1:
        problems.append(f"size_power needs p < n (y_n={model.y:g})")
    _raise_if(problems)
    return kind, ExperimentConfig(
        model=model,
        reps=reps,
        seed=seed if seed is not None else 0,
        entry_dist=entry,
        test_function=fname,
        alpha=alpha,
        threads=threads,
    )


def cmd_experiment(args) -> int:
    params = _merge(args, ["kind", "p", "n", "spike", "reps", "seed", "entry_dist", "f", "alpha", "threads"])
    kind, cfg = _experiment_config(params)
    report = run_clt_experiment(cfg) if kind == "clt" else empirical_size_power(cfg)

    payload = _header("experiment")
    payload.update(
        model=_model_dict(cfg.model),
        experiment=kind,
        seed=cfg.seed,
        entry_dist=cfg.entry_dist,
        function=cfg.test_function,
        alpha=cfg.alpha,
        report=report.to_dict(),
    )
    if args.dump_reps:
        rows = [
            {"rep": r.rep, "statistic": r.statistic, "centered": r.centered, "reject": "" if r.reject is None else int(r.reject)}
            for r in report.records
        ]
        with open(args.dump_reps, "w", encoding="utf-8", newline="") as fh:
            fh.write(to_csv(rows))
    if getattr(args, "format", "json") == "csv":
        row = {k: v for k, v in payload.items() if k not in ("model", "report")}
        row.update(_flat_row({"model": payload["model"]}))
        row.update(report.to_dict())
        _emit(args, payload, rows=[row])
    else:
        _emit(args, payload)
    print(_summary_line(kind, report), file=sys.stderr)
    return EXIT_OK


def _summary_line(kind, r):
    if kind == "clt":
        if r.theory_mean is None:
            return f"clt: reps={r.reps} mean={r.emp_mean:.6g} var={_fmt(r.emp_var)} (no closed-form theory for this function)"
        return (
            f"clt: reps={r.reps} mean={r.emp_mean:.6g} (theory {r.theory_mean:.6g}, se {_fmt(r.mean_se)}) "
            f"var={_fmt(r.emp_var)} (theory {r.theory_var:.6g})"
        )
    return (
        f"{r.kind}: reps={r.reps} reject_rate={r.reject_rate:.4f} "
        f"(theory {r.theory_reject_rate:.4f}, se {r.reject_se:.4f})"
    )


def _fmt(x):
    return "n/a" if x is None else f"{x:.6g}"


# ---------------------------------------------------------------- parser


def _add_common(sp, model=True):
    sp.add_argument("--config", help="JSON file with parameters; flags override it")
    sp.add_argument("--out", default="-", help="output path, '-' for stdout (default)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    if model:
        sp.add_argument("--p", type=int, help="dimension")
        sp.add_argument("--n", type=int, help="sample size")
        sp.add_argument(
            "--spike",
            action="append",
            help="spikes as value:multiplicity[,value:multiplicity...]; repeatable",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectral-clt",
        description="Centering, sphericity test and power for spiked sample covariance matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("centering", help="centering term F^{y_n,H_n}(f) and its decomposition")
    _add_common(sp)
    sp.add_argument("--f", help="x, x2, log, lrt_g or poly:c0,c1,... (ascending powers)")
    sp.add_argument("--margin", type=float, help="contour margin (default 0.5)")
    sp.set_defaults(func=cmd_centering)

    sp = sub.add_parser("test", help="likelihood-ratio sphericity test on a data CSV")
    _add_common(sp, model=False)
    sp.add_argument("csv", nargs="?", help="CSV file, rows are observations ('-' for stdin)")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--header", action="store_true", default=None, help="skip the first line")
    sp.add_argument("--center", action="store_true", default=None, help="subtract column means (still divides by n)")
    sp.add_argument("--transpose", action="store_true", default=None, help="rows are variables instead")
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("power", help="asymptotic power curve over a grid of levels")
    _add_common(sp)
    sp.add_argument("--alphas", help="comma-separated significance levels (default 0.01,0.05,0.1)")
    sp.set_defaults(func=cmd_power)

    sp = sub.add_parser("experiment", help="Monte Carlo CLT or size/power experiment")
    _add_common(sp)
    sp.add_argument("--kind", choices=EXPERIMENT_KINDS)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--entry-dist", dest="entry_dist", choices=ENTRY_DISTS)
    sp.add_argument("--f", help="test function for clt experiments (default lrt_g)")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--dump-reps", dest="dump_reps", help="write per-replicate CSV here")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("mp-info", help="MP support edges and null test constants")
    _add_common(sp, model=False)
    sp.add_argument("--p", type=int)
    sp.add_argument("--n", type=int)
    sp.set_defaults(func=cmd_mp_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        for msg in exc.problems:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (SpectralError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
