"""Command-line front end: ``qbirthdeath {eval,kernel,verify,simulate}``.

Settings come from three layers, later ones winning: built-in defaults, the
``[run]`` section of an INI file given by ``--config``, and explicit flags. Keys
in the file are the long flag names with dashes replaced by underscores::

    [run]
    q = 1/2
    nu = 1
    window = -12:48
    r = 0
    t = 0.5

Every CSV artifact starts with ``#`` comment lines that hold the effective
settings in this same format, so stripping the leading ``# `` gives a config file
that reproduces the artifact. JSON artifacts carry the same settings under
``"config"``. Exit status: 0 success, 1 a check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
from mpmath import mpf

from . import __version__
from .bdkernel import chapman_kolmogorov_defect, stationary_weight, transition_row
from .config import DEFAULT_TOLERANCES
from .ctmcsim import SimConfig, empirical_vs_analytic, simulate_ensemble
from .qbessel import delta_q, jnu_at_exponent, jnu_series
from .qcore import GridWindow, QParams, c_constant, default_window, exact, make_params
from .qfourier import transform_matrix
from .verify import CHECKS, make_context, run_suite

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2

CONFIG_SECTION = "run"

# key -> (converter, default); None means "derived from other settings"
SETTINGS = {
    "q": (str, "1/2"),
    "nu": (str, "0"),
    "precision_bits": (int, 192),
    "window": (str, None),
    "r": (int, 0),
    "t": (str, "1"),
    "s": (str, None),
    "n_paths": (int, 100_000),
    "seed": (int, 20261018),
    "guard": (str, None),
    "max_events": (int, 1_000_000),
    "checks": (str, None),
}

COMMAND_KEYS = {
    "eval": ("q", "nu", "precision_bits"),
    "kernel": ("q", "nu", "precision_bits", "window", "r", "t", "s"),
    "verify": ("q", "nu", "precision_bits", "window", "seed", "checks"),
    "simulate": ("q", "nu", "precision_bits", "window", "r", "t", "n_paths", "seed", "guard", "max_events"),
}

# simulate defaults to the documented Monte Carlo scenario
SIMULATE_DEFAULTS = {"nu": "1", "t": "0.5"}


class InvalidInput(ValueError):
    """Bad user input; reported with exit status 2."""


def fmt_value(x, digits: int) -> str:
    """Decimal string with ``digits`` significant digits."""
    return mpmath.nstr(mpf(x), digits)


def fmt_exact(x: Fraction, digits: int) -> str:
    """A rational printed exactly when its decimal expansion terminates, else to ``digits`` digits."""
    d = x.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d != 1:
        return fmt_value(mpf(x.numerator) / x.denominator, digits)
    scale = 0
    while (x * 10**scale).denominator != 1:
        scale += 1
    digits_str = str(abs(int(x * 10**scale))).rjust(scale + 1, "0")
    head, tail = digits_str[: len(digits_str) - scale], digits_str[len(digits_str) - scale :]
    sign = "-" if x < 0 else ""
    return sign + head + ("." + tail if tail else "")


def _exact_power(params: QParams, exponent: Fraction) -> Fraction | None:
    return params.q ** int(exponent) if exponent.denominator == 1 else None


# ---------------------------------------------------------------- settings


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read config file: {exc}") from exc
    except configparser.Error as exc:
        raise InvalidInput(f"malformed config file: {exc}") from exc
    if not parser.has_section(CONFIG_SECTION):
        raise InvalidInput(f"config file has no [{CONFIG_SECTION}] section")
    values = dict(parser.items(CONFIG_SECTION))
    values.pop("command", None)
    unknown = sorted(set(values) - set(SETTINGS))
    if unknown:
        raise InvalidInput(f"unknown config keys: {', '.join(unknown)}")
    return values


def effective_settings(args: argparse.Namespace) -> dict:
    """Merge defaults, the config file and flags for ``args.command``."""
    file_values = _read_config(args.config)
    out = {}
    for key in COMMAND_KEYS[args.command]:
        conv, default = SETTINGS[key]
        if args.command == "simulate":
            default = SIMULATE_DEFAULTS.get(key, default)
        value = getattr(args, key, None)
        if value is None:
            value = file_values.get(key, default)
        if value is not None:
            try:
                value = conv(value)
            except ValueError as exc:
                raise InvalidInput(f"invalid value for {key}: {value!r}") from exc
        out[key] = value
    return out


def _params(cfg: dict) -> QParams:
    try:
        return make_params(exact(cfg["q"]), exact(cfg["nu"]), cfg["precision_bits"])
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(str(exc)) from exc


def _window(text: str | None, params: QParams) -> GridWindow:
    if text is None:
        return default_window(params)
    try:
        return GridWindow.parse(text)
    except ValueError as exc:
        raise InvalidInput(f"invalid window {text!r}: expected LO:HI") from exc


def _time(text: str, name: str) -> str:
    try:
        value = exact(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"invalid {name}: {text!r}") from exc
    if value < 0:
        raise InvalidInput(f"{name} must be nonnegative, got {text}")
    return text


def _canonical(cfg: dict, params: QParams, window: GridWindow | None) -> dict:
    """Settings as echoed into artifacts: exact rationals, resolved window."""
    out = dict(cfg)
    out["q"] = str(params.q)
    out["nu"] = str(params.nu)
    if "window" in out:
        out["window"] = str(window)
    return {k: v for k, v in out.items() if v is not None}


def _header(command: str, cfg: dict) -> list[str]:
    lines = [f"qbirthdeath {__version__}", f"[{CONFIG_SECTION}]", f"command = {command}"]
    lines += [f"{k} = {v}" for k, v in cfg.items()]
    return ["# " + line for line in lines]


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _csv(header: list[str], columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write("\n".join(header) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------- commands


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = effective_settings(args)
    params = _params(cfg)
    digits = params.certified_digits
    queries = args.queries or []
    if not queries:
        raise InvalidInput("nothing to evaluate: give --c-constant, --j, --j-exp, --delta or --pi")
    records = []
    for kind, arg in queries:
        with params.workprec():
            if kind == "c":
                value = c_constant(params)
            elif kind == "j":
                try:
                    value = jnu_series(exact(arg), params)
                except (ValueError, ZeroDivisionError) as exc:
                    raise InvalidInput(f"invalid --j argument {arg!r}: {exc}") from exc
            elif kind == "jexp":
                value, _ = jnu_at_exponent(exact(arg), params)
            elif kind == "delta":
                i, j = arg
                w = _exact_power(params, i * params.weight_exponent)
                value = Fraction(0) if i != j else (None if w is None else 1 / ((1 - params.q) * w))
                if value is None:
                    value = delta_q(i, j, params)
            else:
                value = _exact_power(params, arg * params.weight_exponent)
                if value is None:
                    value = stationary_weight(arg, params)
            text = fmt_exact(value, digits) if isinstance(value, Fraction) else fmt_value(value, digits)
            records.append({"quantity": kind, "argument": _arg_text(arg), "value": text})
    sys.stdout.write("".join(r["value"] + "\n" for r in records))
    if args.out:
        report = {
            "tool": "qbirthdeath",
            "version": __version__,
            "command": "eval",
            "config": _canonical(cfg, params, None),
            "digits": digits,
            "values": records,
        }
        _emit(_json(report), args.out)
    return EXIT_OK


def _arg_text(arg) -> str:
    if arg is None:
        return ""
    if isinstance(arg, tuple):
        return " ".join(str(a) for a in arg)
    return str(arg)


def cmd_kernel(args: argparse.Namespace) -> int:
    cfg = effective_settings(args)
    params = _params(cfg)
    window = _window(cfg["window"], params)
    r = cfg["r"]
    if r not in window:
        raise InvalidInput(f"start r={r} outside window {window}")
    t = _time(cfg["t"], "t")
    M = transform_matrix(window, params)
    row = transition_row(r, t, M)
    digits = params.certified_digits
    rows = []
    with params.workprec():
        cumulative = mpf(0)
        for n, p in zip(window, row.probs):
            cumulative += p
            rows.append((n, fmt_exact(params.q**n, digits), fmt_value(p, digits), fmt_value(cumulative, digits)))
    header = _header("kernel", _canonical(cfg, params, window))
    _emit(_csv(header, ["n", "x", "p_nr", "cumulative"], rows), args.out)
    sys.stderr.write(f"row-sum defect: {mpmath.nstr(row.defect, 6)}\n")
    ok = row.defect <= DEFAULT_TOLERANCES.eps_mass
    if cfg["s"] is not None:
        s = _time(cfg["s"], "s")
        ck = chapman_kolmogorov_defect(r, t, s, M)
        sys.stderr.write(f"chapman-kolmogorov defect: {mpmath.nstr(ck, 6)}\n")
        ok = ok and ck <= DEFAULT_TOLERANCES.eps_ck
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = effective_settings(args)
    params = _params(cfg)
    window = _window(cfg["window"], params)
    names = None
    if cfg["checks"]:
        names = [n.strip() for n in cfg["checks"].split(",") if n.strip()]
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            raise InvalidInput(f"unknown checks: {', '.join(unknown)}; choose from {', '.join(CHECKS)}")
    ctx = make_context(params, window, seed=cfg["seed"])
    report = run_suite(ctx, names)
    out = {
        "tool": "qbirthdeath",
        "version": __version__,
        "command": "verify",
        "config": _canonical(cfg, params, window),
        "tolerances": {k: fmt_value(v, 6) for k, v in DEFAULT_TOLERANCES.as_dict().items()},
        "checks": [r.as_dict() for r in report.results],
        "pass": report.passed,
    }
    _emit(_json(out), args.out)
    for r in report.results:
        sys.stderr.write(f"{'PASS' if r.passed else 'FAIL'} {r.name}\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = effective_settings(args)
    params = _params(cfg)
    window = _window(cfg["window"], params)
    guard = _window(cfg["guard"], params) if cfg["guard"] else window
    cfg["guard"] = str(guard)
    r = cfg["r"]
    if r not in window:
        raise InvalidInput(f"start r={r} outside window {window}")
    t = _time(cfg["t"], "t")
    try:
        sim = SimConfig(params, r, float(exact(t)), cfg["n_paths"], cfg["seed"], guard, cfg["max_events"])
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    stats = simulate_ensemble(sim, workers=args.workers or 1)
    row = transition_row(r, t, transform_matrix(window, params))
    rep = empirical_vs_analytic(stats, row)
    canon = _canonical(cfg, params, window)
    rows = [(n, repr(freq), fmt_value(p, 17), repr(z)) for n, freq, p, z in rep.table]
    _emit(_csv(_header("simulate", canon), ["n", "empirical", "analytic", "z"], rows), args.out)
    report = {
        "tool": "qbirthdeath",
        "version": __version__,
        "command": "simulate",
        "config": canon,
        "tv": rep.tv,
        "threshold": rep.threshold,
        "K": rep.K,
        "max_abs_z": rep.max_abs_z,
        "pass": rep.passed,
        "n_valid": rep.n_valid,
        "n_guard": rep.n_guard,
        "n_maxed": rep.n_maxed,
        "seed": sim.seed,
    }
    text = _json(report)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    elif args.out:
        Path(args.out).with_suffix(".json").write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------- parser


def _query(kind, conv=str):
    def parse(text):
        try:
            return (kind, conv(text))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from exc

    return parse


class _DeltaAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        items = getattr(namespace, self.dest) or []
        items.append(("delta", (values[0], values[1])))
        setattr(namespace, self.dest, items)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbirthdeath", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"qbirthdeath {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", help="base q in (0, 1); decimals are read exactly (default 1/2)")
    common.add_argument("--nu", help="order nu > -1 (default 0; 1 for simulate)")
    common.add_argument("--precision-bits", dest="precision_bits", help="working precision (default 192)")
    common.add_argument("--config", help="INI file with a [run] section; flags override it")
    common.add_argument("--out", help="output path (default: standard output)")

    p_eval = sub.add_parser("eval", parents=[common], help="evaluate j_nu, delta_q, c_{q,nu} or pi_n")
    p_eval.add_argument("--c-constant", dest="queries", action="append_const", const=("c", None))
    p_eval.add_argument("--j", dest="queries", action="append", type=_query("j"), metavar="X",
                        help="j_nu(X, q^2) for X > 0")
    p_eval.add_argument("--j-exp", dest="queries", action="append", type=_query("jexp", int), metavar="M",
                        help="j_nu(q^M, q^2)")
    p_eval.add_argument("--delta", dest="queries", action=_DeltaAction, nargs=2, type=int, metavar=("I", "J"),
                        help="grid delta delta_q(q^I, q^J)")
    p_eval.add_argument("--pi", dest="queries", action="append", type=_query("pi", int), metavar="N",
                        help="stationary weight pi_N")

    win = argparse.ArgumentParser(add_help=False)
    win.add_argument("--window", help="grid exponents LO:HI, written --window=LO:HI when LO is negative "
                     "(default -12:48, widened upward until the top measure weight is below 1e-28)")

    p_kernel = sub.add_parser("kernel", parents=[common, win], help="transition row p_nr(t) as CSV")
    p_kernel.add_argument("--r", type=int, help="start exponent (default 0)")
    p_kernel.add_argument("--t", help="time t >= 0 (default 1)")
    p_kernel.add_argument("--s", help="also report the Chapman-Kolmogorov defect of p(t+s) against p(t) p(s)")

    p_verify = sub.add_parser("verify", parents=[common, win], help="run the invariant suite, JSON report")
    p_verify.add_argument("--seed", type=int, help="seed for random test functions (default 20261018)")
    p_verify.add_argument("--checks", help=f"comma-separated subset of: {', '.join(CHECKS)}")

    p_sim = sub.add_parser("simulate", parents=[common, win], help="Monte Carlo against the analytic row")
    p_sim.add_argument("--r", type=int, help="start exponent (default 0)")
    p_sim.add_argument("--t", help="end time (default 0.5)")
    p_sim.add_argument("--n-paths", dest="n_paths", type=int, help="number of paths (default 100000)")
    p_sim.add_argument("--seed", type=int, help="ensemble seed (default 20261018)")
    p_sim.add_argument("--guard", help="absorbing guard window, --guard=LO:HI (default: the grid window)")
    p_sim.add_argument("--max-events", dest="max_events", type=int, help="per-path event cap (default 1000000)")
    p_sim.add_argument("--workers", type=int, help="worker processes; results do not depend on it")
    p_sim.add_argument("--report", help="JSON report path (default: --out with .json suffix, else stderr)")
    return parser


COMMANDS = {"eval": cmd_eval, "kernel": cmd_kernel, "verify": cmd_verify, "simulate": cmd_simulate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InvalidInput as exc:
        sys.stderr.write(f"qbirthdeath {args.command}: error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
