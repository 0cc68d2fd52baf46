"""Command-line interface: ``fourphoton <subcommand> ...`` (or ``python -m fourphoton``).

Phases are radians, given as decimals or expressions in ``pi`` such as
``pi/4``, ``-3*pi/4`` or ``0.5*pi``. Numbers are printed with 12 significant
digits.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import logging
import math
import operator
import re
import sys
from pathlib import Path

import numpy as np

from . import bell, fock, lhv, measurement
from .errors import DomainError, NoLhvModelError
from .lhv import PAPER_SETTINGS, SettingChoices
from .measurement import NoiseMixture, PhaseSettings

PRECISION = 12

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
UNICODE_MINUS = "−"


class CliError(Exception):
    """User-facing error; printed without a traceback."""


def parse_phase(text: str) -> float:
    """Parse ``"0.3"``, ``"pi/4"``, ``"-3*pi/4"``, ``"2pi"`` into radians."""
    src = text.strip().replace(UNICODE_MINUS, "-")
    src = re.sub(r"(\d)\s*pi\b", r"\1*pi", src)
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError:
        raise argparse.ArgumentTypeError(f"bad phase {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise argparse.ArgumentTypeError(f"bad phase {text!r}")

    try:
        value = ev(tree)
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError(f"bad phase {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"phase {text!r} is not finite")
    return value


def parse_visibility(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad visibility {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"visibility must lie in [0, 1], got {text}")
    return v


def fmt(x: float) -> str:
    return f"{x:.{PRECISION}g}"


def _round(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def load_json(path: str):
    """Read a JSON file; malformed input becomes a CliError naming the line."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise CliError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {context}") from None


# --- shared option handling ---------------------------------------------------


def _load_state(args):
    if getattr(args, "state", None):
        data = load_json(args.state)
        try:
            psi = fock.PostselectedState.from_json(data)
        except (DomainError, TypeError, IndexError, AttributeError) as exc:
            raise CliError(f"{args.state}: not a state dump ({exc})") from None
        if not psi.is_normalized():
            psi = psi.normalized()
    else:
        psi = fock.four_photon_state()
    if args.visibility is not None and args.visibility != 1.0:
        return NoiseMixture(args.visibility, psi)
    return psi


def _setting_choices(args, default=None) -> SettingChoices:
    if getattr(args, "paper_settings", False):
        return PAPER_SETTINGS
    if getattr(args, "settings", None):
        return SettingChoices.from_flat(args.settings)
    if default is not None:
        return default
    raise CliError("give --paper-settings or --settings with 8 phases (a1 a2 a'1 a'2 b1 b2 b'1 b'2)")


class Output:
    """Collects the command's text and writes it to stdout or ``--output``."""

    def __init__(self, args):
        self.path = getattr(args, "output", None)
        self.buf = io.StringIO()

    def write(self, text: str):
        self.buf.write(text)
        if not text.endswith("\n"):
            self.buf.write("\n")

    def json(self, obj):
        self.write(json.dumps(_round(obj), indent=2))

    def close(self):
        text = self.buf.getvalue()
        if self.path:
            try:
                Path(self.path).write_text(text)
            except OSError as exc:
                raise CliError(f"cannot write {self.path}: {exc.strerror}") from None
        else:
            sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, float) else x for x in row])
    return out.getvalue()


# --- subcommands --------------------------------------------------------------


def cmd_state(args, out: Output):
    stage = args.stage
    if stage == "final":
        psi = fock.four_photon_state()
        if args.format == "json":
            out.json(psi.to_json())
        elif args.format == "csv":
            rows = [(p, psi[p].real, psi[p].imag) for p in fock.PATTERNS]
            out.write(_csv_text(["pattern", "re", "im"], rows))
        else:
            for p in fock.PATTERNS:
                a = psi[p]
                if abs(a) > 0:
                    out.write(f"{p}  {fmt(a.real)}  {fmt(a.imag)}")
            ghz, epr = fock.ghz_epr_split(psi)
            out.write(f"GHZ weight {fmt(ghz)}, EPR-EPR weight {fmt(epr)}")
        return
    poly = fock.pipeline_stages()[stage]
    if args.format == "json":
        out.json(poly.to_json())
    elif args.format == "csv":
        rows = [(str(m), poly.coefficient(m).real, poly.coefficient(m).imag) for m in poly]
        out.write(_csv_text(["monomial", "re", "im"], rows))
    else:
        for m in poly:
            c = poly.coefficient(m)
            out.write(f"{fmt(c.real)}{'' if c.imag == 0 else ' + ' + fmt(c.imag) + 'i'}  {m}")
        out.write(f"{len(poly)} monomials")


def _scan_rows(state, base: PhaseSettings, party: int, points: int):
    base_arr = base.as_array()
    for phi in np.arange(points) * (2 * np.pi / points):
        ph = base_arr.copy()
        ph[party] = phi
        yield (*map(float, ph), measurement.correlation(state, ph))


SCAN_HEADER = ["phi_a", "phi_a'", "phi_b", "phi_b'", "E"]


def cmd_correlate(args, out: Output):
    state = _load_state(args)
    s = PhaseSettings.of(args.phases)
    if args.scan is not None:
        party = measurement.PARTIES.index(args.scan)
        out.write(_csv_text(SCAN_HEADER, _scan_rows(state, s, party, args.points)))
        return
    e = measurement.correlation(state, s)
    if args.format == "json":
        out.json({"phases": list(s), "visibility": args.visibility if args.visibility is not None else 1.0, "E": e})
    elif args.format == "csv":
        out.write(_csv_text(SCAN_HEADER, [(*s, e)]))
    else:
        out.write(fmt(e))


def cmd_scan(args, out: Output):
    state = _load_state(args)
    s = PhaseSettings.of(args.base)
    party = measurement.PARTIES.index(args.party)
    out.write(_csv_text(SCAN_HEADER, _scan_rows(state, s, party, args.points)))


def cmd_probs(args, out: Output):
    state = _load_state(args)
    s = PhaseSettings.of(args.phases)
    p = measurement.probabilities(state, s)
    rows = []
    for o in measurement.OUTCOMES:
        idx = tuple(measurement.SIGNS.index(x) for x in o)
        rows.append((*o, float(p[idx])))
    if args.format == "json":
        out.json({"phases": list(s), "probabilities": [{"outcome": list(r[:4]), "p": r[4]} for r in rows],
                  "E": measurement.correlation(state, s)})
    elif args.format == "csv":
        out.write(_csv_text(["k", "l", "m", "n", "P"], rows))
    else:
        for r in rows:
            out.write(" ".join(f"{x:+d}" for x in r[:4]) + "  " + fmt(r[4]))
        out.write(f"sum {fmt(float(p.sum()))}  E {fmt(measurement.correlation(state, s))}")


def cmd_tensor(args, out: Output):
    state = _load_state(args)
    sc = _setting_choices(args)
    t = lhv.quantum_tensor(state, sc)
    report = lhv.tensor_report(t, sc)
    if args.format == "json":
        out.json(report)
        return
    if args.format == "csv":
        rows = []
        c = np.asarray(report["coefficients"])
        for idx in np.ndindex(2, 2, 2, 2):
            rows.append((*[i + 1 for i in idx], float(t[idx]), float(c[idx])))
        out.write(_csv_text(["p", "q", "r", "s", "E", "c"], rows))
        return
    for idx in np.ndindex(2, 2, 2, 2):
        label = "".join(str(i + 1) for i in idx)
        out.write(f"E[{label}] = {fmt(float(t[idx]))}    c[{label}] = {fmt(report['coefficients'][idx[0]][idx[1]][idx[2]][idx[3]])}")
    out.write(f"l1 = {fmt(report['l1'])}")
    out.write(f"critical visibility = {fmt(report['critical_visibility'])}")
    out.write(f"verdict: {report['verdict']}")


def _expression_from_json(data, source: str) -> bell.BellExpression:
    if isinstance(data, dict):
        if "weights" not in data:
            raise CliError(f"{source}: expected a nested 2x2x2x2 array or an object with 'weights'")
        data = data["weights"]
    try:
        return bell.BellExpression(np.asarray(data, dtype=float))
    except (DomainError, ValueError, TypeError) as exc:
        raise CliError(f"{source}: {exc}") from None


def cmd_bell(args, out: Output):
    if args.tensor_file:
        data = load_json(args.tensor_file)
        if not isinstance(data, dict) or "tensor" not in data:
            raise CliError(f"{args.tensor_file}: expected a tensor report with a 'tensor' field")
        t = np.asarray(data["tensor"], dtype=float)
        sc = None
    else:
        sc = _setting_choices(args)
        t = lhv.quantum_tensor(_load_state(args), sc)
    if args.expression and args.saturating:
        raise CliError("give either an expression file or --saturating, not both")
    if args.expression:
        expr = _expression_from_json(load_json(args.expression), args.expression)
    elif args.saturating:
        expr = bell.saturating_expression(t)
    else:
        raise CliError("give an expression file or --saturating")
    bound = bell.lhv_bound(expr)
    value = bell.quantum_value(expr, t)
    ratio = value / bound if bound > 0 else (0.0 if value == 0 else math.copysign(math.inf, value))
    report = {"lhv_bound": bound, "quantum_value": value, "ratio": ratio, "violation": abs(value) > bound + 1e-12}
    if args.saturating:
        report["weights"] = expr.to_json()
    if args.format == "json":
        out.json(report)
    elif args.format == "csv":
        out.write(_csv_text(["lhv_bound", "quantum_value", "ratio"], [(bound, value, ratio)]))
    else:
        out.write(f"lhv bound = {fmt(bound)}")
        out.write(f"quantum value = {fmt(value)}")
        out.write(f"ratio = {fmt(ratio)}")


def cmd_optimize(args, out: Output):
    state = _load_state(args)
    config = bell.OptimizerConfig(
        grid_step=args.grid_step, refine=not args.no_refine, restarts=args.restarts,
        max_iter=args.max_iter, seed=args.seed,
    )
    if args.paper_settings or args.settings:
        initial = _setting_choices(args)
    else:
        initial = SettingChoices.from_flat(np.random.default_rng(args.seed).uniform(0, 2 * np.pi, 8))
    result = bell.optimize_settings(state, initial, config)
    report = result.to_json()
    report["verdict"] = "LHV-OK" if result.value <= 1 + lhv.BOUNDARY_TOL else "NO-LHV"
    if args.format == "json":
        out.json(report)
    elif args.format == "csv":
        out.write(_csv_text(["a1", "a2", "a'1", "a'2", "b1", "b2", "b'1", "b'2", "l1", "critical_visibility", "iterations"],
                            [(*map(float, result.settings.flat()), result.value, result.critical_visibility, result.iterations)]))
    else:
        for party, row in report["settings"].items():
            out.write(f"{party:>2}: {fmt(row[0])}  {fmt(row[1])}")
        out.write(f"l1 = {fmt(result.value)}  (initial {fmt(result.initial_value)}, grid {fmt(result.grid_value)})")
        out.write(f"critical visibility = {fmt(result.critical_visibility)}")
        out.write(f"iterations = {result.iterations}")
        out.write(f"verdict: {report['verdict']}")


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "json", "csv"), default="human")
    common.add_argument("--output", "-o", metavar="PATH", help="write to PATH instead of stdout")
    common.add_argument("--visibility", type=parse_visibility, default=None, help="pure-state weight v in [0, 1]")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--state", metavar="FILE", help="state dump JSON (default: the double-pair state)")

    settings = argparse.ArgumentParser(add_help=False)
    group = settings.add_mutually_exclusive_group()
    group.add_argument("--paper-settings", action="store_true",
                       help="a in {0, pi/2}; a', b, b' in {-pi/4, pi/4}")
    group.add_argument("--settings", nargs=8, type=parse_phase, metavar="PHI",
                       help="a1 a2 a'1 a'2 b1 b2 b'1 b'2")

    p = argparse.ArgumentParser(prog="fourphoton", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("state", parents=[common], help="print the pipeline state")
    s.add_argument("--stage", choices=("pairterm", "split", "postselected", "rotated", "final"), default="final")
    s.set_defaults(func=cmd_state)

    s = sub.add_parser("correlate", parents=[common], help="correlation E at four phases")
    s.add_argument("phases", nargs=4, type=parse_phase, metavar="PHI")
    s.add_argument("--scan", choices=measurement.PARTIES, help="sweep this phase over [0, 2pi), CSV output")
    s.add_argument("--points", type=int, default=256)
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("scan", parents=[common], help="CSV sweep of one phase over [0, 2pi)")
    s.add_argument("party", choices=measurement.PARTIES)
    s.add_argument("--base", nargs=4, type=parse_phase, default=[0.0] * 4, metavar="PHI")
    s.add_argument("--points", type=int, default=256)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("probs", parents=[common], help="the 16 outcome probabilities")
    s.add_argument("phases", nargs=4, type=parse_phase, metavar="PHI")
    s.set_defaults(func=cmd_probs)

    s = sub.add_parser("tensor", parents=[common, settings], help="correlation tensor and l1 criterion")
    s.set_defaults(func=cmd_tensor)

    s = sub.add_parser("bell", parents=[common, settings], help="evaluate a linear Bell expression")
    s.add_argument("expression", nargs="?", help="JSON 2x2x2x2 weights")
    s.add_argument("--saturating", action="store_true", help="use the l1-saturating expression of the tensor")
    s.add_argument("--tensor-file", metavar="FILE", help="tensor report from 'tensor --format json'")
    s.set_defaults(func=cmd_bell)

    s = sub.add_parser("optimize", parents=[common, settings], help="search phases maximizing l1")
    s.add_argument("--grid-step", type=parse_phase, default=math.pi / 4)
    s.add_argument("--restarts", type=int, default=4)
    s.add_argument("--max-iter", type=int, default=4000)
    s.add_argument("--no-refine", action="store_true")
    s.set_defaults(func=cmd_optimize)
    return p


_NEG_PHASE = re.compile(r"^-(pi|\d|\.\d)")


def _protect_negative_phases(argv):
    # argparse would read "-pi/4" as an option flag
    return [UNICODE_MINUS + a[1:] if _NEG_PHASE.match(a) else a for a in argv]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_protect_negative_phases(argv))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "points", 1) < 1:
        parser.error("--points must be positive")
    out = Output(args)
    try:
        args.func(args, out)
        out.close()
    except (CliError, DomainError, NoLhvModelError, ValueError) as exc:
        print(f"fourphoton: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
