"""Builtins callable from experiment scripts, grouped by capability.

Groups: core (pure helpers), lab (instrument traffic), storage (dataset
persistence), analysis (numerics). ``invoke`` is always available; it is the
only way a script can run other registered or memorized code.
"""

from __future__ import annotations

import math

import numpy as np

from .. import analysis
from ..virtlab.datasets import Dataset, DatasetError
from ..virtlab.instruments import LabError
from .errors import ScriptError
from .interp import Interpreter, format_value, run_nested, type_name
from .parser import parse


def _fail(line, message):
    raise ScriptError("builtin", message, line)


def _need(cond, line, message):
    if not cond:
        _fail(line, message)


def _number(value, line, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(line, f"{what} must be a number, got {type_name(value)}")
    return float(value)


def _number_list(value, line, what):
    _need(isinstance(value, list), line, f"{what} must be a list")
    return [_number(v, line, f"{what} element") for v in value]


def _map_arg(args, line, name):
    _need(len(args) == 1 and isinstance(args[0], dict), line,
          f"{name} takes a single map argument")
    return args[0]


# -- core ------------------------------------------------------------------

def _bi_len(interp, line, args):
    _need(len(args) == 1, line, "len takes one argument")
    v = args[0]
    _need(isinstance(v, (list, dict, str)), line,
          f"len needs a list, map, or string, got {type_name(v)}")
    return float(len(v))


def _bi_range(interp, line, args):
    _need(1 <= len(args) <= 3, line, "range takes 1 to 3 arguments")
    nums = [_number(a, line, "range argument") for a in args]
    if len(nums) == 1:
        start, stop, step = 0.0, nums[0], 1.0
    elif len(nums) == 2:
        start, stop, step = nums[0], nums[1], 1.0
    else:
        start, stop, step = nums
    _need(step != 0.0, line, "range step must not be zero")
    count = max(0, math.ceil((stop - start) / step - 1e-12))
    _need(count <= 10_000_000, line, "range too large")
    interp.ctx.steps += count  # materializing the list costs budget
    return [start + i * step for i in range(count)]


def _bi_abs(interp, line, args):
    _need(len(args) == 1, line, "abs takes one argument")
    return abs(_number(args[0], line, "abs argument"))


def _bi_log10(interp, line, args):
    _need(len(args) == 1, line, "log10 takes one argument")
    v = _number(args[0], line, "log10 argument")
    _need(v > 0.0, line, "log10 needs a positive number")
    return math.log10(v)


def _bi_str(interp, line, args):
    _need(len(args) == 1, line, "str takes one argument")
    return format_value(args[0])


def _minmax(fn, name, interp, line, args):
    if len(args) == 1 and isinstance(args[0], list):
        values = args[0]
        _need(len(values) > 0, line, f"{name} of an empty list")
    else:
        values = args
        _need(len(values) >= 2, line, f"{name} takes a list or two+ numbers")
    return fn(_number(v, line, f"{name} argument") for v in values)


def _bi_min(interp, line, args):
    return _minmax(min, "min", interp, line, args)


def _bi_max(interp, line, args):
    return _minmax(max, "max", interp, line, args)


def _bi_sum(interp, line, args):
    _need(len(args) == 1 and isinstance(args[0], list), line,
          "sum takes a list")
    return float(sum(_number(v, line, "sum element") for v in args[0]))


def _bi_print(interp, line, args):
    interp.ctx.log.append(" ".join(format_value(a) for a in args))
    return None


# -- lab ---------------------------------------------------------------------

def _lab(interp, line):
    lab = interp.env.lab
    _need(lab is not None, line, "no lab connection configured")
    return lab


def _bi_vna_sweep(interp, line, args):
    req = dict(_map_arg(args, line, "vna_sweep"))
    if "seed" not in req:
        req["seed"] = interp.env.next_lab_seeds("sweep")
    try:
        return _lab(interp, line).sweep(req)
    except LabError as exc:
        _fail(line, f"vna_sweep rejected: {exc.message}")


def _bi_qubit_sequence(interp, line, args):
    req = dict(_map_arg(args, line, "qubit_sequence"))
    flags = req.pop("pi_flags", None)
    if flags is None:
        # Convenience: draw a random pulse pattern from the session stream.
        n = int(_number(req.pop("n_pulses", 0.0), line, "n_pulses"))
        _need(n >= 1, line, "qubit_sequence needs pi_flags or n_pulses >= 1")
        rng = np.random.Generator(np.random.PCG64(
            interp.env.next_lab_seeds("flags")))
        flags = [bool(v) for v in rng.integers(0, 2, size=n)]
    else:
        _need(isinstance(flags, list) and all(isinstance(f, bool)
                                              for f in flags),
              line, "pi_flags must be a list of booleans")
    req["pi_flags"] = flags
    if "seed" not in req:
        req["seed"] = interp.env.next_lab_seeds("sequence")
    try:
        reply = _lab(interp, line).sequence(req)
    except LabError as exc:
        _fail(line, f"qubit_sequence rejected: {exc.message}")
    return {"bits": reply["bits"], "pi_flags": flags}


# -- storage -----------------------------------------------------------------

def _bi_save_dataset(interp, line, args):
    _need(len(args) == 2 and isinstance(args[0], str)
          and isinstance(args[1], dict), line,
          "save_dataset takes (label, dataset map)")
    storage = interp.env.storage
    _need(storage is not None, line, "no storage configured")
    payload = args[1]
    dataset = Dataset(meta=dict(payload.get("meta", {})),
                      columns=dict(payload.get("columns", {})))
    try:
        return storage.save(interp.env.session_id, args[0], dataset)
    except DatasetError as exc:
        _fail(line, f"save_dataset failed: {exc}")


def _bi_load_dataset(interp, line, args):
    _need(len(args) == 1 and isinstance(args[0], str), line,
          "load_dataset takes a path string")
    storage = interp.env.storage
    _need(storage is not None, line, "no storage configured")
    try:
        ds = storage.load(args[0])
    except DatasetError as exc:
        _fail(line, f"load_dataset failed: {exc}")
    return {"meta": dict(ds.meta), "columns": {k: list(v)
                                               for k, v in ds.columns.items()}}


# -- analysis ----------------------------------------------------------------

def _magnitude(arg, line):
    re = np.asarray(_number_list(arg["s21_re"], line, "s21_re"))
    im = np.asarray(_number_list(arg["s21_im"], line, "s21_im"))
    _need(re.size == im.size, line, "s21_re and s21_im lengths differ")
    return np.hypot(re, im)


def _bi_find_resonances(interp, line, args):
    arg = _map_arg(args, line, "find_resonances")
    _need("freq" in arg, line, "find_resonances needs a freq column")
    freq = _number_list(arg["freq"], line, "freq")
    if "s21_mag" in arg:
        mag = np.asarray(_number_list(arg["s21_mag"], line, "s21_mag"))
    else:
        _need("s21_re" in arg and "s21_im" in arg, line,
              "find_resonances needs s21_mag or s21_re/s21_im")
        mag = _magnitude(arg, line)
    opts = {}
    for key in ("prominence_db", "min_separation_pts", "baseline_window_pts"):
        if key in arg:
            value = _number(arg[key], line, key)
            opts[key] = value if key == "prominence_db" else int(value)
    try:
        return [float(f) for f in
                analysis.find_resonances(freq, mag, **opts)]
    except ValueError as exc:
        _fail(line, f"find_resonances failed: {exc}")


def _bi_fit_resonator(interp, line, args):
    arg = _map_arg(args, line, "fit_resonator")
    for key in ("freq", "s21_re", "s21_im"):
        _need(key in arg, line, f"fit_resonator needs {key}")
    try:
        fit = analysis.fit_resonator(
            _number_list(arg["freq"], line, "freq"),
            _number_list(arg["s21_re"], line, "s21_re"),
            _number_list(arg["s21_im"], line, "s21_im"))
    except (ValueError, analysis.SingularFitError, analysis.DomainError) as exc:
        _fail(line, f"fit_resonator failed: {exc}")
    return fit.as_dict()


def _bi_correlation_series(interp, line, args):
    arg = _map_arg(args, line, "correlation_series")
    _need("pi_flags" in arg and "bits" in arg, line,
          "correlation_series needs pi_flags and bits")
    try:
        series = analysis.correlation_series(arg["pi_flags"], arg["bits"])
    except ValueError as exc:
        _fail(line, f"correlation_series failed: {exc}")
    return series.as_dict()


def _bi_fit_leakage(interp, line, args):
    arg = _map_arg(args, line, "fit_leakage")
    _need("j" in arg and "c_avg" in arg, line, "fit_leakage needs j and c_avg")
    j = _number_list(arg["j"], line, "j")
    c_avg = _number_list(arg["c_avg"], line, "c_avg")
    _need(len(j) == len(c_avg), line, "j and c_avg lengths differ")
    n = arg.get("n_samples", [1] * len(j))
    c_cov = None
    if "c_cov" in arg:
        _need(isinstance(arg["c_cov"], list), line, "c_cov must be a matrix")
        rows = [_number_list(row, line, "c_cov row") for row in arg["c_cov"]]
        _need(all(len(row) == len(j) for row in rows) and len(rows) == len(j),
              line, "c_cov must be square and match j")
        c_cov = np.asarray(rows)
    series = analysis.CorrelationSeries(
        j=np.asarray(j), c_avg=np.asarray(c_avg),
        n_samples=np.asarray(_number_list(n, line, "n_samples")),
        c_cov=c_cov)
    try:
        fit = analysis.fit_leakage(series)
    except (ValueError, analysis.SingularFitError, analysis.DomainError) as exc:
        _fail(line, f"fit_leakage failed: {exc}")
    return fit.as_dict()


def _bi_readout_metrics(interp, line, args):
    arg = _map_arg(args, line, "readout_metrics")
    for key in ("prep0_bits", "prep1_bits", "pairs"):
        _need(key in arg, line, f"readout_metrics needs {key}")
    try:
        return analysis.readout_metrics(arg["prep0_bits"], arg["prep1_bits"],
                                        arg["pairs"])
    except ValueError as exc:
        _fail(line, f"readout_metrics failed: {exc}")


# -- invoke ------------------------------------------------------------------

def extract_script_block(body: str) -> str | None:
    """First fenced code block of a document body, if any."""
    lines = body.splitlines()
    start = None
    for i, raw in enumerate(lines):
        if raw.strip().startswith("```"):
            if start is None:
                start = i
            else:
                return "\n".join(lines[start + 1:i]) + "\n"
    return None


def _bi_invoke(interp: Interpreter, line, args):
    _need(len(args) == 1 and isinstance(args[0], str), line,
          "invoke takes a script id")
    script_id = args[0]
    script = interp.env.registry.get(script_id)
    program = script.ast if script is not None else None
    if program is None and interp.env.kb is not None:
        doc = interp.env.kb.get(script_id)
        if doc is not None and doc.kind == "example":
            source = extract_script_block(doc.body)
            if source is None:
                _fail(line, f"document {script_id!r} has no script block")
            try:
                program = parse(source)
            except Exception as exc:
                _fail(line, f"document {script_id!r} script does not parse: {exc}")
    if program is None:
        raise ScriptError("name", f"unknown script id {script_id!r}", line)
    run_nested(interp, program, line)
    return None


def default_builtins() -> dict:
    """name -> (capability group, callable)."""
    return {
        "len": ("core", _bi_len),
        "range": ("core", _bi_range),
        "abs": ("core", _bi_abs),
        "log10": ("core", _bi_log10),
        "str": ("core", _bi_str),
        "min": ("core", _bi_min),
        "max": ("core", _bi_max),
        "sum": ("core", _bi_sum),
        "print": ("core", _bi_print),
        "vna_sweep": ("lab", _bi_vna_sweep),
        "qubit_sequence": ("lab", _bi_qubit_sequence),
        "save_dataset": ("storage", _bi_save_dataset),
        "load_dataset": ("storage", _bi_load_dataset),
        "find_resonances": ("analysis", _bi_find_resonances),
        "fit_resonator": ("analysis", _bi_fit_resonator),
        "fit_leakage": ("analysis", _bi_fit_leakage),
        "correlation_series": ("analysis", _bi_correlation_series),
        "readout_metrics": ("analysis", _bi_readout_metrics),
        "invoke": ("always", _bi_invoke),
    }
