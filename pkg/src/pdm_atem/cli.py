"""
Command line interface.

    pdm-atem solve --mass "1+gamma*x^2" --potential "0.5*x^2" --param gamma=0.1 \\
        --ordering BDD --iterations 20,30,40,50,60 --range 0:5.5

Subcommands: solve, converge-table, wavefunction, oracle-check, presets.
Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 oracle disagreement.

Expressions use ``+ - * / ^`` (integer exponents), unary minus, parentheses,
``exp sqrt sin cos``; ``x`` is the coordinate and other names are parameters
bound with ``--param name=value``.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import atem
from . import wavefunction as wf
from ._validation import check_k_list, check_ordering, check_precision, check_range
from .exceptions import AtemError, ConfigError, ExprError
from .expr import parameters, parse
from .hamiltonian import GAUSSIAN, PRESET_FORMS, PRESETS, build_ode, mass_power_gauge
from .oracle import GridSpec, discretize, lowest_eigenvalues

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ORACLE = 0, 1, 2, 3
SIG_DIGITS = 12


def fmt(v):
    """Round to 12 significant digits; None and non-finite pass through."""
    if v is None:
        return None
    v = float(v)
    if not math.isfinite(v):
        return None
    return float(f"{v:.{SIG_DIGITS}g}")


@dataclass
class RunConfig:
    """Everything that determines a run.  Keys match the long flag names."""

    mass: str = "1"
    potential: str = "0.5*x^2"
    param: dict = field(default_factory=dict)
    ordering: str = "BDD"
    iterations: list = field(default_factory=lambda: [20, 30, 40, 50, 60])
    range: tuple = (0.0, 5.5)
    threshold: int = 10
    precision: str = "double"
    gauge_power: float = 0.0
    grid_step: float = 0.05
    grid_L: float = 12.0
    grid_N: int = 4001
    refine: bool = True

    def validate(self):
        try:
            m, v = parse(self.mass), parse(self.potential)
        except ExprError as err:
            raise ConfigError(f"bad expression: {err}") from None
        missing = (parameters(m) | parameters(v)) - set(self.param)
        if missing:
            raise ConfigError(f"unbound parameters: {', '.join(sorted(missing))}")
        check_ordering(self.ordering)
        self.iterations = check_k_list(self.iterations)
        self.range = check_range(self.range)
        check_precision(self.precision)
        if self.threshold < 0:
            raise ConfigError("threshold must be non-negative")
        if not self.grid_step > 0:
            raise ConfigError("grid step must be positive")
        try:
            GridSpec(self.grid_L, self.grid_N)
        except ValueError as err:
            raise ConfigError(str(err)) from None
        return self

    def to_mapping(self):
        d = asdict(self)
        d["range"] = list(self.range)
        d["param"] = {k: self.param[k] for k in sorted(self.param)}
        return d

    @classmethod
    def from_mapping(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls(**data)
        cfg.range = tuple(cfg.range)
        return cfg.validate()

    def to_text(self):
        """The flat ``key=value`` form read by ``--config``."""
        lines = []
        for key, value in self.to_mapping().items():
            flag = key.replace("_", "-")
            if key == "param":
                lines += [f"param={k}={v!r}" for k, v in value.items()]
            elif key == "iterations":
                lines.append(f"{flag}=" + ",".join(str(k) for k in value))
            elif key == "range":
                lines.append(f"{flag}={value[0]!r}:{value[1]!r}")
            elif key == "refine":
                lines.append(f"{flag}={'true' if value else 'false'}")
            else:
                lines.append(f"{flag}={value}")
        return "\n".join(lines) + "\n"

    @property
    def bindings(self):
        return dict(self.param)

    def gauge(self):
        if self.gauge_power:
            return mass_power_gauge(self.mass, self.gauge_power, self.bindings)
        return GAUSSIAN

    def build_ode(self):
        return build_ode(self.mass, self.potential, self.bindings, self.ordering,
                         capacity=self.iterations[-1] + 4, gauge=self.gauge(),
                         precision=self.precision)


def _ordering_meta(cfg):
    spec = check_ordering(cfg.ordering)
    return {"name": spec.label, "eta": spec.eta, "eps": spec.eps, "rho": spec.rho}


def _meta(cfg, **extra):
    meta = {
        "ordering": _ordering_meta(cfg),
        "gamma": fmt(cfg.param.get("gamma")) if "gamma" in cfg.param else None,
        "k_list": list(cfg.iterations),
        "precision": cfg.precision,
        "config": cfg.to_mapping(),
    }
    meta.update(extra)
    return meta


def _dump_json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_solve(cfg, args):
    report = atem.converge(cfg.build_ode(), cfg.range, cfg.iterations, cfg.threshold)
    states = [{"n": s.index, "E": fmt(s.energy), "digits": s.digits, "m": s.k,
               "parity": s.parity} for s in report.accepted]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "E", "digits", "m", "parity"])
        for s in states:
            w.writerow([s["n"], repr(s["E"]), s["digits"], s["m"], s["parity"]])
        _emit(buf.getvalue(), args.output)
    else:
        _emit(_dump_json({"states": states, "meta": _meta(cfg)}), args.output)
    return EXIT_OK


def cmd_converge_table(cfg, args):
    report = atem.converge(cfg.build_ode(), cfg.range, cfg.iterations, cfg.threshold)
    rows = report.matched if args.matched else report.table
    if args.format == "json":
        table = [[fmt(v) for v in row] for row in rows]
        _emit(_dump_json({"k": list(cfg.iterations), "table": table,
                          "meta": _meta(cfg, matched=bool(args.matched))}), args.output)
        return EXIT_OK
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n"] + [str(k) for k in cfg.iterations])
    for n, row in enumerate(rows):
        w.writerow([n] + ["" if v is None else repr(fmt(v)) for v in row])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_wavefunction(cfg, args):
    ode = cfg.build_ode()
    report = atem.converge(ode, cfg.range, cfg.iterations, cfg.threshold)
    by_index = {s.index: s for s in report.accepted}
    if args.state not in by_index:
        sys.stderr.write(f"state {args.state} is not among the accepted states "
                         f"{sorted(by_index)}\n")
        return EXIT_NUMERIC
    state = by_index[args.state]
    gauge = cfg.gauge()
    trace = atem.iterate(ode, state.energy, state.k)
    w = wf.build_f(trace, n=args.state, gauge=gauge, L=args.L, degree_cap=args.degree)
    x, psi = wf.psi_samples(w, gauge, L=args.L, count=args.count)
    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.join(args.out_dir, f"{args.prefix}n{args.state}")
    meta = _meta(cfg, E=fmt(state.energy), n=args.state, m=state.k)
    coeffs = {"degree": list(range(w.degree_cap + 1)),
              "coefficient": [fmt(c) for c in w.truncated()],
              "boundary": [fmt(v) for v in w.boundary],
              "parity": w.parity, "meta": meta}
    with open(stem + "_coeffs.json", "w") as fh:
        fh.write(_dump_json(coeffs))
    with open(stem + "_psi.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["x", "psi"])
        for xi, pi in zip(x, psi):
            wr.writerow([repr(fmt(xi)), repr(fmt(pi))])
    with open(stem + "_psi.json", "w") as fh:
        fh.write(_dump_json({"x": [fmt(v) for v in x], "psi": [fmt(v) for v in psi],
                             "nodes": wf.count_nodes(psi), "meta": meta}))
    sys.stdout.write(f"{stem}_coeffs.json\n{stem}_psi.csv\n{stem}_psi.json\n")
    return EXIT_OK


def cmd_oracle_check(cfg, args):
    report = atem.converge(cfg.build_ode(), cfg.range, cfg.iterations, cfg.threshold)
    states = [s for s in report.accepted if s.index is not None]
    if args.states:
        states = [s for s in states if s.index < args.states]
    if not states:
        sys.stderr.write("no accepted states to compare\n")
        return EXIT_ORACLE
    count = min(max(s.index for s in states) + 1, 10)
    grid = GridSpec(cfg.grid_L, cfg.grid_N)
    T = discretize(cfg.mass, cfg.potential, cfg.ordering, grid, cfg.bindings)
    ref = lowest_eigenvalues(T, count, cfg.refine)
    rows, ok = [], True
    for s in states:
        if s.index >= count:
            continue
        diff = abs(s.energy - ref[s.index])
        ok &= diff <= args.tol
        rows.append({"n": s.index, "E_atem": fmt(s.energy), "E_grid": fmt(ref[s.index]),
                     "abs_diff": fmt(diff), "pass": bool(diff <= args.tol)})
    if args.format == "json":
        _emit(_dump_json({"states": rows, "tol": args.tol, "pass": bool(ok),
                          "meta": _meta(cfg)}), args.output)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "E_atem", "E_grid", "abs_diff", "pass"])
        for r in rows:
            w.writerow([r["n"], repr(r["E_atem"]), repr(r["E_grid"]),
                        repr(r["abs_diff"]), "yes" if r["pass"] else "no"])
        _emit(buf.getvalue(), args.output)
    return EXIT_OK if ok else EXIT_ORACLE


def cmd_presets(cfg, args):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "eta", "eps", "rho", "operator"])
    for name, spec in PRESETS.items():
        w.writerow([name, spec.eta, spec.eps, spec.rho, PRESET_FORMS[name]])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _pair(text):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter value {value!r} is not a number") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _energy_range(text):
    lo, sep, hi = text.partition(":")
    try:
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _add_problem_flags(p):
    d = RunConfig()
    p.add_argument("--config", help="key=value file; keys are flag names without dashes")
    p.add_argument("--mass", default=d.mass, help="mass profile m(x)")
    p.add_argument("--potential", default=d.potential, help="potential V(x)")
    p.add_argument("--param", action="append", type=_pair, default=None,
                   metavar="NAME=VALUE", help="bind a parameter (repeatable)")
    p.add_argument("--ordering", default=d.ordering,
                   help="BDD, MM, ZK, LK-sym or a custom triple eta,eps,rho")
    p.add_argument("--iterations", type=_int_list, default=d.iterations,
                   help="ascending iteration counts, e.g. 20,30,40")
    p.add_argument("--range", type=_energy_range, default=d.range, metavar="LO:HI",
                   help="energy search interval")
    p.add_argument("--threshold", type=int, default=d.threshold,
                   help="matched significant digits needed to accept a state")
    p.add_argument("--precision", choices=("double", "dd"), default=d.precision,
                   help="recurrence arithmetic; dd is double-double")
    p.add_argument("--gauge-power", type=float, default=d.gauge_power,
                   help="use the gauge m(x)^s exp(-x^2/2) with this s")
    p.add_argument("--grid-step", type=float, default=d.grid_step,
                   help="energy scan step")
    p.add_argument("--grid-L", type=float, default=d.grid_L, help="oracle half-width")
    p.add_argument("--grid-N", type=int, default=d.grid_N, help="oracle grid points (odd)")
    p.add_argument("--refine", type=_bool, default=d.refine,
                   help="Richardson-refine the oracle (true/false)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--output", "-o", default=None, help="output file (default stdout)")


def build_parser():
    parser = _Parser(prog="pdm-atem", description=__doc__.split("\n\n")[0].strip(),
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="stabilized eigenvalues")
    _add_problem_flags(p)
    p.set_defaults(func=cmd_solve, default_format="json")

    p = sub.add_parser("converge-table", help="eigenvalue estimates for every k")
    _add_problem_flags(p)
    p.add_argument("--matched", action="store_true",
                   help="follow states by nearest-value pairing instead of root index")
    p.set_defaults(func=cmd_converge_table, default_format="csv")

    p = sub.add_parser("wavefunction", help="coefficients and samples of one state")
    _add_problem_flags(p)
    p.add_argument("--state", type=int, required=True, help="state index n")
    p.add_argument("--L", type=float, default=wf.DEFAULT_L, help="sampling half-width")
    p.add_argument("--count", type=int, default=wf.DEFAULT_COUNT, help="odd sample count")
    p.add_argument("--degree", type=int, default=None, help="degree of the printed polynomial")
    p.add_argument("--out-dir", default=".", help="directory for the output files")
    p.add_argument("--prefix", default="state_", help="file name prefix")
    p.set_defaults(func=cmd_wavefunction, default_format="json")

    p = sub.add_parser("oracle-check", help="compare with the finite-difference solver")
    _add_problem_flags(p)
    p.add_argument("--tol", type=float, default=1e-6, help="allowed |E_atem - E_grid|")
    p.add_argument("--states", type=int, default=None, help="compare only n < STATES")
    p.set_defaults(func=cmd_oracle_check, default_format="csv")

    p = sub.add_parser("presets", help="list the ordering presets")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_presets, default_format="csv")
    return parser


def read_config_file(path):
    """Turn a ``key=value`` file into command line tokens."""
    tokens = []
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from None
    for num, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{num}: expected key=value")
        tokens += ["--" + key.strip().replace("_", "-"), value.strip()]
    return tokens


def _config_from_args(args):
    if args.command == "presets":
        return None
    cfg = RunConfig(
        mass=args.mass, potential=args.potential,
        param=dict(args.param or []), ordering=args.ordering,
        iterations=args.iterations, range=args.range, threshold=args.threshold,
        precision=args.precision, gauge_power=args.gauge_power,
        grid_step=args.grid_step, grid_L=args.grid_L, grid_N=args.grid_N,
        refine=args.refine)
    return cfg.validate()


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                raise ConfigError("--config needs a file name")
            extra = read_config_file(argv[i + 1])
            # file values first so explicit flags win
            argv = argv[:1] + extra + argv[1:i] + argv[i + 2:]
        try:
            args = parser.parse_args(argv)
        except SystemExit as stop:
            return stop.code if isinstance(stop.code, int) else EXIT_CONFIG
        if getattr(args, "format", None) is None:
            args.format = args.default_format
        cfg = _config_from_args(args)
        with np.errstate(all="ignore"):
            return args.func(cfg, args)
    except (ConfigError, ExprError, ValueError) as err:
        sys.stderr.write(f"configuration error: {err}\n")
        return EXIT_CONFIG
    except (AtemError, ArithmeticError) as err:
        sys.stderr.write(f"numerical failure: {err}\n")
        return EXIT_NUMERIC


def entry():
    sys.exit(main())


__all__ = ["RunConfig", "main", "build_parser", "cmd_solve", "cmd_converge_table",
           "cmd_wavefunction", "cmd_oracle_check", "cmd_presets", "read_config_file"]
