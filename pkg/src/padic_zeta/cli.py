"""Batch front-end.

    padic-zeta {lsy,zeta,trace-check,partition,dim} --config job.json [--out report.json]

Config and reports are JSON.  Rationals are strings "a/b" (or integers);
p-adic numbers are objects {valuation, digits, abs_precision}.  Exit codes:
0 verified, 1 a checked identity failed, 2 invalid input or a violated
hypothesis.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import jsonschema

from .dynamics import RationalMapSpec
from .errors import ConfigError, PadicZetaError
from .hausdorff import DimensionProblem, solve_dimension
from .lsy import UNRESOLVED, lsy_verify
from .markov import (
    DEFAULT_ESCAPE_VALUATION,
    DEFAULT_LEVELS,
    DEFAULT_T_ESC,
    MarkovPartition,
    build_partition,
    chart_data_from_json,
    chart_data_to_json,
    find_partition,
    verify_markov,
)
from .padic import INFINITE, PadicContext, PadicNumber, is_prime
from .transfer import (
    DEFAULT_J,
    WeightSpec,
    correction_factor,
    det_series,
    subhyperbolic_zeta,
    trace_via_matrix,
    trace_via_periodic_points,
    truncate_operator,
    zeta_series,
)

COMMANDS = ("lsy", "zeta", "trace-check", "partition", "dim")
EXIT_OK, EXIT_MISMATCH, EXIT_INVALID = 0, 1, 2
TRACE_SLACK = 2

RATIONAL = {"anyOf": [{"type": "integer"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*-?\d+)?\s*$"}]}
PADIC = {
    "type": "object",
    "required": ["valuation", "digits", "abs_precision"],
    "properties": {
        "valuation": {"type": ["integer", "null"]},
        "digits": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "abs_precision": {"type": ["integer", "null"]},
    },
}
NUMBER = {"anyOf": [RATIONAL, PADIC]}
CHART_ORBIT = {
    "type": "object",
    "required": ["center", "period", "multiplier"],
    "properties": {
        "center": NUMBER,
        "period": {"type": "integer", "minimum": 1},
        "multiplier": NUMBER,
        "psi_product": NUMBER,
        "degree": {"type": "integer", "minimum": 1},
        "root": NUMBER,
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["prime"],
    "properties": {
        "prime": {"type": "integer", "minimum": 2},
        "precision": {"type": "integer", "minimum": 1},
        "map": {
            "type": "object",
            "required": ["numerator"],
            "properties": {
                "numerator": {"type": "array", "items": RATIONAL, "minItems": 1},
                "denominator": {"type": "array", "items": RATIONAL, "minItems": 1},
            },
            "additionalProperties": False,
        },
        "weight": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["CONSTANT_ONE", "POLYNOMIAL_PER_BLOCK", "LOCALLY_CONSTANT"]},
                "data": {"type": "array"},
                "beta": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "orders": {
            "type": "object",
            "properties": {
                "N_z": {"type": "integer", "minimum": 1},
                "M": {"type": "integer", "minimum": 0},
                "J": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "partition": {
            "type": "object",
            "properties": {
                "level": {"type": "integer", "minimum": 1},
                "T_esc": {"type": "integer", "minimum": 0},
                "escape_valuation": {"type": "integer", "maximum": -1},
                "blocks": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["center", "radius_valuation"],
                        "properties": {"center": RATIONAL, "radius_valuation": {"type": "integer"}},
                    },
                },
                "transition": {"type": "array", "items": {"type": "array", "items": {"type": ["integer", "boolean"]}}},
                "derivative_valuations": {"type": "array", "items": {"type": "integer"}},
                "slack": {"type": "integer", "minimum": 0},
            },
            "dependentRequired": {"blocks": ["transition", "derivative_valuations"]},
            "additionalProperties": False,
        },
        "charts": {
            "type": "object",
            "properties": {
                "infinite": {"type": "array", "items": CHART_ORBIT},
                "exceptional": {"type": "array", "items": CHART_ORBIT},
            },
            "additionalProperties": False,
        },
        "direct_traces": {"type": "array", "items": NUMBER},
        "dimension": {
            "type": "object",
            "required": ["valuation_matrix"],
            "properties": {
                "valuation_matrix": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": ["integer", "null"]}},
                }
            },
        },
        "lsy": {
            "type": "object",
            "properties": {"max_order": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

REPORT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["command", "exit_code", "config", "disclosures"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "exit_code": {"enum": [EXIT_OK, EXIT_MISMATCH, EXIT_INVALID]},
        "status": {"type": "string"},
        "config": {"type": "object"},
        "result": {"type": "object"},
        "error": {
            "type": "object",
            "required": ["type", "message"],
            "properties": {"type": {"type": "string"}, "field": {"type": ["string", "null"]},
                           "message": {"type": "string"}},
        },
        "precision": {"type": "object"},
        "disclosures": {"type": "object"},
    },
    "additionalProperties": False,
}


@dataclass
class JobConfig:
    prime: int
    precision: int = 20
    map: RationalMapSpec | None = None
    weight: WeightSpec = field(default_factory=WeightSpec)
    N_z: int = 4
    M: int = 10
    J: int = DEFAULT_J
    level: int | None = None
    T_esc: int = DEFAULT_T_ESC
    escape_valuation: int = DEFAULT_ESCAPE_VALUATION
    partition_data: dict | None = None
    charts_data: dict | None = None
    direct_traces: list | None = None
    valuation_matrix: list | None = None
    lsy_max_order: int | None = None
    raw: dict = field(default_factory=dict)

    @property
    def ctx(self) -> PadicContext:
        return PadicContext(self.prime, self.precision)


def _rational(value, where: str) -> Fraction:
    try:
        if isinstance(value, str) and "/" in value:
            num, den = value.split("/")
            if int(den) == 0:
                raise ConfigError(where, f"zero denominator in {value!r}")
        return Fraction(value) if not isinstance(value, str) else Fraction(value.replace(" ", ""))
    except ConfigError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(where, f"not an exact rational: {value!r}") from exc


def _check_rationals(obj, path: str):
    """Walk the config and reject rational strings that fail to parse (e.g. zero denominators)."""
    if isinstance(obj, dict):
        if {"valuation", "digits", "abs_precision"} <= obj.keys():
            return
        for k, v in obj.items():
            _check_rationals(v, f"{path}.{k}" if path else k)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _check_rationals(v, f"{path}[{i}]")
    elif isinstance(obj, str):
        _rational(obj, path)


def parse_config(raw: dict) -> JobConfig:
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(where, exc.message) from None
    _check_rationals({k: v for k, v in raw.items() if k not in ("weight",)}, "")
    if "weight" in raw:
        _check_rationals(raw["weight"].get("data", []), "weight.data")
    if not is_prime(raw["prime"]):
        raise ConfigError("prime", f"{raw['prime']} is not prime")
    cfg = JobConfig(prime=raw["prime"], precision=raw.get("precision", 20), raw=raw)
    if "map" in raw:
        m = raw["map"]
        num = [_rational(c, f"map.numerator[{i}]") for i, c in enumerate(m["numerator"])]
        den = [_rational(c, f"map.denominator[{i}]") for i, c in enumerate(m.get("denominator", [1]))]
        if not any(den):
            raise ConfigError("map.denominator", "denominator is identically zero")
        cfg.map = RationalMapSpec(num, den)
    if "weight" in raw:
        w = raw["weight"]
        try:
            cfg.weight = WeightSpec(w.get("kind", "CONSTANT_ONE"), w.get("data", []), w.get("beta", 0))
        except (ValueError, PadicZetaError) as exc:
            raise ConfigError("weight", str(exc)) from None
    orders = raw.get("orders", {})
    cfg.N_z = orders.get("N_z", cfg.N_z)
    cfg.M = orders.get("M", cfg.M)
    cfg.J = orders.get("J", cfg.J)
    part = raw.get("partition", {})
    cfg.level = part.get("level")
    cfg.T_esc = part.get("T_esc", cfg.T_esc)
    cfg.escape_valuation = part.get("escape_valuation", cfg.escape_valuation)
    if "blocks" in part:
        cfg.partition_data = part
    cfg.charts_data = raw.get("charts")
    cfg.direct_traces = raw.get("direct_traces")
    if "dimension" in raw:
        cfg.valuation_matrix = raw["dimension"]["valuation_matrix"]
    cfg.lsy_max_order = raw.get("lsy", {}).get("max_order")
    return cfg


def _require_map(cfg: JobConfig) -> RationalMapSpec:
    if cfg.map is None:
        raise ConfigError("map", "this command needs a map")
    return cfg.map


def _partition(cfg: JobConfig) -> MarkovPartition:
    ctx = cfg.ctx
    if cfg.partition_data is not None:
        data = dict(cfg.partition_data, prime=cfg.prime, precision=cfg.precision)
        return MarkovPartition.from_json(data, ctx)
    f = _require_map(cfg)
    if cfg.level is not None:
        return build_partition(f, ctx, cfg.level, cfg.T_esc, cfg.escape_valuation)
    return find_partition(f, ctx, DEFAULT_LEVELS, cfg.T_esc, cfg.escape_valuation)


def _prec(x):
    return None if x == INFINITE else int(x)


# ---------------------------------------------------------------------------
# commands


def cmd_lsy(cfg: JobConfig):
    f = _require_map(cfg)
    rep = lsy_verify(f, cfg.N_z, max_order=cfg.lsy_max_order)
    code = EXIT_OK if rep.verified else EXIT_MISMATCH
    disclosures = {
        "convention": rep.convention,
        "convention_resolved": rep.convention != UNRESOLVED,
        "exact": True,
    }
    return code, rep.to_json(), {"field": "RATIONAL (exact)"}, disclosures


def cmd_partition(cfg: JobConfig):
    f = _require_map(cfg)
    part = _partition(cfg)
    rep = verify_markov(f, part)
    code = EXIT_OK if rep.ok else EXIT_MISMATCH
    result = {"partition": part.to_json(), "verification": rep.to_json()}
    return code, result, {"working_precision": cfg.precision}, {"chart_slack_levels": part.slack}


def cmd_trace_check(cfg: JobConfig):
    f = _require_map(cfg)
    part = _partition(cfg)
    L = truncate_operator(f, part, cfg.weight, cfg.M)
    v_min = min((abs(v) for v in part.derivative_valuations), default=0)
    bound = (cfg.M + 1) * v_min - TRACE_SLACK
    rows, ok, worst = [], True, INFINITE
    for n in range(1, cfg.N_z + 1):
        a = trace_via_matrix(L, n)
        b = trace_via_periodic_points(f, part, cfg.weight, n)
        d = a - b
        agree = d.is_zero() or d.valuation >= bound
        ok &= agree
        worst = min(worst, a.abs_precision, b.abs_precision)
        rows.append({
            "n": n,
            "matrix": a.to_json(),
            "periodic_points": b.to_json(),
            "delta": d.to_json(),
            "delta_valuation_lower_bound": _prec(min(d.valuation, d.abs_precision)),
            "agree": agree,
        })
    result = {"partition": part.to_json(), "rows": rows, "required_delta_valuation": bound}
    precision = {"working_precision": cfg.precision, "min_abs_precision": _prec(worst)}
    disclosures = {
        "taylor_degree": cfg.M,
        "truncation_tail": f"matrix traces omit Taylor degrees > {cfg.M}; expected error valuation >= "
                           f"(M+1)*|v_min| - {TRACE_SLACK} = {bound}",
    }
    return (EXIT_OK if ok else EXIT_MISMATCH), result, precision, disclosures


def cmd_zeta(cfg: JobConfig):
    f = _require_map(cfg)
    ctx = cfg.ctx
    part = _partition(cfg)
    L = truncate_operator(f, part, cfg.weight, cfg.M)
    N_z = cfg.N_z
    traces = [trace_via_matrix(L, n) for n in range(1, N_z + 1)]
    zeta = zeta_series(traces, N_z, ctx)
    det = det_series(L, N_z)
    prod = zeta * det
    duality = all(prod[k].is_zero() for k in range(1, N_z + 1)) and (prod[0] - 1).is_zero()
    result: dict[str, Any] = {
        "partition": part.to_json(),
        "traces": [t.to_json() for t in traces],
        "zeta_series": zeta.to_json(),
        "det_series": det.to_json(),
        "duality_holds": duality,
    }
    ok = duality
    disclosures: dict[str, Any] = {
        "taylor_degree": cfg.M,
        "truncation_tail": f"operator truncated at Taylor degree {cfg.M}; series truncated at z^{N_z}",
    }
    if cfg.charts_data is not None:
        charts = chart_data_from_json(cfg.charts_data, ctx)
        problems = charts.validate(f)
        if problems:
            raise ConfigError("charts", "; ".join(problems))
        corr = correction_factor(charts, cfg.weight.beta, cfg.J, N_z)
        direct = None
        if cfg.direct_traces is not None:
            direct = [_number(x, ctx) for x in cfg.direct_traces]
        sub = subhyperbolic_zeta(det, corr, direct)
        result["charts"] = chart_data_to_json(charts)
        result["correction_factor"] = corr.to_json()
        result["factorization"] = sub.to_json()
        disclosures["j_product_truncation"] = {
            "J": cfg.J,
            "tail_valuation": None if corr.tail_valuation == INFINITE else corr.tail_valuation,
        }
        if sub.consistent is False:
            ok = False
    precision = {"working_precision": cfg.precision, "min_abs_precision": _prec(min(zeta.min_abs_precision(),
                                                                                   det.min_abs_precision()))}
    return (EXIT_OK if ok else EXIT_MISMATCH), result, precision, disclosures


def _number(x, ctx):
    if isinstance(x, dict):
        return PadicNumber.from_json(ctx, x)
    return ctx(_rational(x, "direct_traces"))


def cmd_dim(cfg: JobConfig):
    if cfg.valuation_matrix is not None:
        prob = DimensionProblem(cfg.valuation_matrix, cfg.prime)
        part_json = None
    else:
        part = _partition(cfg)
        prob = DimensionProblem.from_partition(part)
        part_json = part.to_json()
    res = solve_dimension(prob)
    ok = res.witness_residual <= 1e-9
    result = {"problem": prob.to_json(), "solution": res.to_json()}
    if part_json is not None:
        result["partition"] = part_json
    disclosures = {"floating_point": "beta and lambda are floats (bisection to 1e-12); Q(t) is exact"}
    return (EXIT_OK if ok else EXIT_MISMATCH), result, {"bisection_tolerance": "1e-12"}, disclosures


HANDLERS = {
    "lsy": cmd_lsy,
    "zeta": cmd_zeta,
    "trace-check": cmd_trace_check,
    "partition": cmd_partition,
    "dim": cmd_dim,
}


def run(command: str, raw_config: dict, overrides: dict | None = None) -> tuple[dict, int]:
    """Execute one job and return (report, exit code)."""
    if command not in HANDLERS:
        raise ValueError(f"unknown command {command!r}")
    raw = json.loads(json.dumps(raw_config))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, name = key.split(".")
        raw.setdefault(section, {})[name] = value
    report: dict[str, Any] = {"command": command, "config": raw, "disclosures": {}}
    try:
        cfg = parse_config(raw)
        code, result, precision, disclosures = HANDLERS[command](cfg)
        report.update(result=result, precision=precision, disclosures=disclosures)
        report["status"] = "verified" if code == EXIT_OK else "mismatch"
    except ConfigError as exc:
        code = EXIT_INVALID
        report["error"] = {"type": "ConfigError", "field": exc.field, "message": str(exc)}
        report["status"] = "invalid input"
    except (PadicZetaError, ValueError, ArithmeticError) as exc:
        code = EXIT_INVALID
        report["error"] = {"type": type(exc).__name__, "field": None, "message": str(exc)}
        report["status"] = "hypothesis violation"
    report["exit_code"] = code
    report = json.loads(json.dumps(report, sort_keys=True))
    jsonschema.validate(report, REPORT_SCHEMA)
    return report, code


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="padic-zeta", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON job file")
    ap.add_argument("--order", type=int, help="series order N_z")
    ap.add_argument("--taylor-degree", type=int, help="Taylor truncation M")
    ap.add_argument("--level", type=int, help="partition level r")
    ap.add_argument("--out", help="write the report here instead of stdout")
    args = ap.parse_args(argv)
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        report = {"command": args.command, "config": {}, "disclosures": {}, "exit_code": EXIT_INVALID,
                  "status": "invalid input",
                  "error": {"type": type(exc).__name__, "field": "--config", "message": str(exc)}}
        code = EXIT_INVALID
    else:
        overrides = {"orders.N_z": args.order, "orders.M": args.taylor_degree, "partition.level": args.level}
        report, code = run(args.command, raw, overrides)
    text = dumps(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
