"""
Main script for the approximate-group toolkit
Parses a command, dispatches it to the library modules and writes the
resulting report as JSON or CSV on stdout; diagnostics go to stderr.

Exit codes: 0 success, 1 property violated (witness printed as JSON),
2 invalid input, 3 cap exceeded.
"""

import argparse
import contextlib
import io
import json
import logging
import sys
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence

import pandas as pd

import config
import database
from cayley import CayleyGraph, babai_report, ball_diameter, default_generators, linf_sandwich_sweep, spectral_battery, spectral_report
from errors import InvalidInput, PropertyViolation, ToolkitError, require
from fixtures import FixtureStore
from group_core import INFINITE, ElementSet, GroupHandle, GroupSpec, element_order, make_group, parse_elements
from metric_limits import TorusModel, family_instance, rescaled_space, torus_limit_report
from progressions import (
    ProgressionSpec,
    all_scales_report,
    box_bound_sweep,
    doubling_scale_finder,
    enumerate_progression,
    free_group_sweep,
    growth_profile,
    nilprogression_check,
)
from reports import Report, encode
from setcalc import (
    approx_constant,
    doubling_report,
    escape_norm,
    escape_norm_report,
    lemma210_witness,
    lemma211_witness,
    power_set,
    product_set,
    ruzsa_cover,
    ruzsa_distance,
    sumproduct_stats,
    symmetrize,
    symmetrized_square_report,
    triangle_slack,
)
from structure_detect import (
    dense_generation_sweep,
    freiman_sweep,
    hamidoune_sweep,
    lemma211_sweep,
    ruzsa_cover_sweep,
    ruzsa_triangle_sweep,
    schreier_sweep,
    small_tripling_sweep,
    strong_approx_battery,
    unit_doubling_sweep,
)

logger = logging.getLogger("run_toolkit")

SET_OPS = ("product", "power", "symmetrize", "doubling", "ruzsa", "triangle", "cover", "approx", "lemma210", "lemma211", "escape", "square", "sumproduct")
GROUP_OPS = ("describe", "mul", "inv", "power", "commutator", "conjugate", "order")
FAMILIES = ("cycle", "grid", "heisenberg-mod")


# ---------------------------------------------------------------------------
# Logging and configuration
# ---------------------------------------------------------------------------

class TagFormatter(logging.Formatter):
    """Status tags in front of every diagnostic line"""

    TAGS = {
        logging.DEBUG: "[DEBUG]",
        logging.INFO: "[OK]",
        logging.WARNING: "[WARNING]",
        logging.ERROR: "[ERROR]",
        logging.CRITICAL: "[ERROR]",
    }

    def format(self, record: logging.LogRecord) -> str:
        line = f"{self.TAGS.get(record.levelno, '[ERROR]')} {record.getMessage()}"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


def configure_logging(verbose: bool = False) -> logging.Handler:
    """Install the tag formatter on the root logger, writing to the current stderr"""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler.formatter, TagFormatter):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(TagFormatter())
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    return handler


@contextlib.contextmanager
def config_overrides(**values: Any) -> Iterator[None]:
    """Assign config attributes for the duration of one run"""
    saved = {name: getattr(config, name) for name in values}
    try:
        for name, value in values.items():
            setattr(config, name, value)
        yield
    finally:
        for name, value in saved.items():
            setattr(config, name, value)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

class ToolkitArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors raised as InvalidInput instead of exiting"""

    def error(self, message: str):
        raise InvalidInput(f"usage: {message}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidInput(f"expected a comma-separated list of integers, got {text!r}")


def _json_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInput(f"argument is not valid JSON: {e}")


def build_parser() -> argparse.ArgumentParser:
    parser = ToolkitArgumentParser(prog="run_toolkit.py", description="Approximate-group toolkit")
    parser.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="seed for randomized sweeps")
    parser.add_argument("--format", choices=("json", "csv"), default=config.OUTPUT_FORMAT, help="output format")
    parser.add_argument("--cap-elements", type=int, default=None, help="override CAP_ELEMENTS")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for sweeps")
    parser.add_argument("--fixtures", default=None, help="path of the regression fixtures file")
    parser.add_argument("--refresh-fixtures", action="store_true", help="recompute and rewrite frozen fixtures")
    parser.add_argument("--archive", default=None, help="SQLite file to archive this run in")
    parser.add_argument("--verbose", action="store_true", help="debug diagnostics")
    sub = parser.add_subparsers(dest="command", parser_class=ToolkitArgumentParser)
    sub.required = True

    p = sub.add_parser("group", help="group arithmetic")
    p.add_argument("--group", required=True)
    p.add_argument("--op", choices=GROUP_OPS, default="describe")
    p.add_argument("--args", default="[]", help="JSON array of element literals")
    p.add_argument("--k", type=int, default=1, help="exponent for --op power")

    p = sub.add_parser("set", help="product-set calculus")
    p.add_argument("--group", required=True)
    p.add_argument("--op", choices=SET_OPS, required=True)
    for name in ("A", "B", "C", "X", "Y"):
        p.add_argument(f"--{name}", default=None, help=f"JSON array of element literals for {name}")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--element", default=None, help="JSON element literal for --op escape")
    p.add_argument("--minimizer", type=int, default=None, help="subset size for the exhaustive sum-product search")

    p = sub.add_parser("verify", help="verification batteries")
    p.add_argument("battery", choices=sorted(BATTERIES))
    p.add_argument("--max-order", type=int, default=10)
    p.add_argument("--max-n", type=int, default=60)
    p.add_argument("--span-order", type=int, default=64, help="hamidoune: order bound for the small-set pass")
    p.add_argument("--random-order", type=int, default=512, help="hamidoune: order bound for the random pass")
    p.add_argument("--trials", type=int, default=None)

    p = sub.add_parser("growth", help="growth of S^n")
    p.add_argument("--group", required=True)
    p.add_argument("--S", default=None, help="JSON array; standard generators when omitted")
    p.add_argument("--symmetrize", action="store_true", help="use S ∪ S^-1 ∪ {1}")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--fit", type=int, nargs=2, default=None, metavar=("LO", "HI"))
    p.add_argument("--doubling-d", type=Fraction, default=None, help="report the least n with |S^4n| <= 5^D |S^n|")
    p.add_argument("--scales", type=int, nargs=2, default=None, metavar=("LO", "HI"), help="K_greedy(S^m) table")

    p = sub.add_parser("nilprog", help="(coset) nilprogressions")
    p.add_argument("--spec", required=True, help='JSON {"group", "generators", "lengths", "kernel"} or a .json path')
    p.add_argument("--containment", type=int, default=0)
    p.add_argument("--growth", type=int, default=0, help="tabulate |P^n| up to this n")

    for name, text in (("diameter", "balls and diameter of a Cayley graph"), ("spectral", "spectral gap of a Cayley graph")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--group", required=True)
        p.add_argument("--S", default=None, help="JSON array; default generating set when omitted")

    p = sub.add_parser("babai", help="diameter table of PSL2(p)")
    p.add_argument("--primes", type=_int_list, required=True)
    p.add_argument("--rule", choices=("standard", "random"), default="standard")

    p = sub.add_parser("limit", help="scaling limits of Cayley graph families")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--sizes", type=_int_list, default=[])
    p.add_argument("--torus", default=None, help='JSON {"q": ..., "norm": ...}; fitted norm when omitted')
    p.add_argument("--dump-matrix", default=None, help="write the rescaled distance matrix of the last size as CSV")
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def load_group(text: str) -> GroupHandle:
    return make_group(GroupSpec.parse(text))


def _set_arg(G: GroupHandle, text: Optional[str], name: str) -> ElementSet:
    require(text is not None, f"--{name} is required for this operation")
    return parse_elements(G, text)


def _generating_set(G: GroupHandle, text: Optional[str]) -> ElementSet:
    return default_generators(G) if text is None else parse_elements(G, text)


def run_group(args, store: FixtureStore) -> Report:
    G = load_group(args.group)
    literals = _json_value(args.args)
    require(isinstance(literals, list), "--args must be a JSON array")
    elements = [G.canonicalize(x) for x in literals]
    values: Dict[str, Any] = {
        "group": G.spec.label(),
        "kind": G.kind,
        "finite": G.finite,
        "order": G.order if G.finite else INFINITE,
        "generators": [G.literal(g) for g in G.standard_generators()],
    }
    op = args.op
    if op != "describe":
        arity = {"mul": None, "inv": 1, "power": 1, "commutator": 2, "conjugate": 2, "order": 1}[op]
        require(len(elements) >= 1 if arity is None else len(elements) == arity, f"--op {op} takes {arity or 'one or more'} elements")
        values["op"] = op
        if op == "mul":
            result = elements[0]
            for g in elements[1:]:
                result = G.mul(result, g)
            values["result"] = G.literal(result)
        elif op == "inv":
            values["result"] = G.literal(G.inv(elements[0]))
        elif op == "power":
            values["result"] = G.literal(G.power(elements[0], args.k))
        elif op == "commutator":
            values["result"] = G.literal(G.commutator(*elements))
        elif op == "conjugate":
            values["result"] = G.literal(G.conjugate(*elements))
        else:
            values["result"] = element_order(G, elements[0])
    return Report(name="group", values=values)


def run_set(args, store: FixtureStore) -> Report:
    op = args.op
    spec = GroupSpec.parse(args.group)
    if op == "sumproduct":
        require(spec.kind == "fp-ring", "sumproduct needs --group fp-ring:<p>")
        residues = _json_value(args.A) if args.A is not None else None
        require(isinstance(residues, list), "--A must be a JSON array of residues")
        return sumproduct_stats(spec.param, residues, args.minimizer)

    G = make_group(spec)
    A = _set_arg(G, args.A, "A")
    if op == "product":
        B = _set_arg(G, args.B, "B")
        AB = product_set(A, B)
        return Report(name="product", values={"size": len(AB), "set": AB})
    if op == "power":
        An = power_set(A, args.n)
        return Report(name="power", values={"n": args.n, "size": len(An), "set": An})
    if op == "symmetrize":
        S = symmetrize(A)
        return Report(name="symmetrize", values={"size": len(S), "set": S})
    if op == "doubling":
        return doubling_report(A, args.n)
    if op == "ruzsa":
        return Report(name="ruzsa", values={"value": ruzsa_distance(A, _set_arg(G, args.B, "B"))})
    if op == "triangle":
        slack = triangle_slack(A, _set_arg(G, args.B, "B"), _set_arg(G, args.C, "C"))
        return Report(name="triangle", values={"slack": slack}, checks={"triangle": slack >= 1})
    if op == "cover":
        return Report(name="cover", values={"witness": ruzsa_cover(A, _set_arg(G, args.B, "B"))})
    if op == "approx":
        return Report(name="approx", values={"constant": approx_constant(A, exact=args.exact)})
    if op == "lemma210":
        return Report(name="lemma210", values={"witness": lemma210_witness(A)})
    if op == "lemma211":
        witness = lemma211_witness(A, _set_arg(G, args.X, "X"), _set_arg(G, args.B, "B"), _set_arg(G, args.Y, "Y"))
        return Report(name="lemma211", values={"witness": witness})
    if op == "escape":
        if args.element is None:
            return escape_norm_report(A)
        g = G.canonicalize(_json_value(args.element))
        return Report(name="escape", values={"element": G.literal(g), "norm": escape_norm(A, g)})
    return symmetrized_square_report(A)


BATTERIES = {
    "unit-doubling": lambda args: unit_doubling_sweep(args.max_order),
    "freiman": lambda args: freiman_sweep(args.max_order),
    "hamidoune": lambda args: hamidoune_sweep(
        args.max_order, args.span_order, args.trials or 200, args.random_order, args.seed
    ),
    "schreier": lambda args: schreier_sweep(args.trials or 1000, args.seed),
    "dense-generation": lambda args: dense_generation_sweep(args.max_n, args.seed),
    "strong-approx": lambda args: strong_approx_battery(),
    "ruzsa-triangle": lambda args: ruzsa_triangle_sweep(args.trials or 10_000, args.seed),
    "small-tripling": lambda args: small_tripling_sweep(args.trials or 1000, args.seed),
    "ruzsa-cover": lambda args: ruzsa_cover_sweep(args.trials or 1000, args.seed),
    "lemma211": lambda args: lemma211_sweep(args.trials or 100, args.seed),
    "box-bound": lambda args: box_bound_sweep(),
    "safin": lambda args: free_group_sweep(args.trials or 100, args.seed),
    "sandwich": lambda args: linf_sandwich_sweep(),
    "spectral": lambda args: spectral_battery(),
}


def run_verify(args, store: FixtureStore) -> Report:
    report = BATTERIES[args.battery](args)
    logger.info(f"verify {args.battery}: no violations")
    return report


def run_growth(args, store: FixtureStore) -> Report:
    G = load_group(args.group)
    S = ElementSet(G, G.standard_generators()) if args.S is None else parse_elements(G, args.S)
    if args.symmetrize:
        S = symmetrize(S)
    if args.scales is not None:
        report = all_scales_report(S, tuple(args.scales))
        store.verify(f"all-scales:{G.spec.label()}:{json.dumps(S.literals())}:{args.scales[0]}-{args.scales[1]}", report.table)
        return report
    report = growth_profile(S, args.n_max, tuple(args.fit) if args.fit else None).to_report()
    if args.doubling_d is not None:
        report.values["doubling_d"] = args.doubling_d
        report.values["doubling_scale"] = doubling_scale_finder(S, args.doubling_d, args.n_max)
    return report


def _load_progression(text: str) -> ProgressionSpec:
    if text.strip().endswith(".json") and not text.strip().startswith("{"):
        try:
            with open(text.strip(), "r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise InvalidInput(f"cannot read progression spec: {e}")
    else:
        data = _json_value(text)
    require(isinstance(data, dict), "progression spec must be a JSON object")
    for name in data:
        if name not in ("group", "generators", "lengths", "kernel"):
            raise InvalidInput(f"progression spec field '{name}' is not accepted", {"field": name})
    require("group" in data and "generators" in data and "lengths" in data, "progression spec needs group, generators and lengths")
    raw_group = data["group"]
    spec = GroupSpec.from_json(raw_group) if isinstance(raw_group, dict) else GroupSpec.parse(raw_group)
    G = make_group(spec)
    require(isinstance(data["generators"], list) and isinstance(data["lengths"], list), "generators and lengths must be arrays")
    kernel = ElementSet.from_literals(G, data["kernel"]) if data.get("kernel") is not None else None
    return ProgressionSpec(G, tuple(G.canonicalize(x) for x in data["generators"]), tuple(data["lengths"]), kernel)


def run_nilprog(args, store: FixtureStore) -> Report:
    spec = _load_progression(args.spec)
    report = nilprogression_check(spec, args.containment)
    if args.growth:
        P = enumerate_progression(spec)
        report.values["growth"] = {n: len(power_set(P, n)) for n in range(1, args.growth + 1)}
    frozen = {k: report.values[k] for k in ("class", "size", "k_greedy")}
    store.verify(f"nilprog:{json.dumps(spec.to_dict(), sort_keys=True)}", frozen)
    return report


def run_diameter(args, store: FixtureStore) -> Report:
    G = load_group(args.group)
    X = CayleyGraph(G, _generating_set(G, args.S))
    report = ball_diameter(X)
    if G.kind == "psl2" and args.S is None:
        store.verify(f"diameter:{G.spec.label()}", X.diameter)
    return report


def run_spectral(args, store: FixtureStore) -> Report:
    G = load_group(args.group)
    return spectral_report(CayleyGraph(G, _generating_set(G, args.S)))


def run_babai(args, store: FixtureStore) -> Report:
    report = babai_report(args.primes, args.rule, args.seed)
    key = f"babai:{args.rule}:{','.join(map(str, args.primes))}"
    if args.rule == "random":
        key += f":seed={args.seed}"
    store.verify(key, [row["diameter"] for row in report.table])
    return report


def run_limit(args, store: FixtureStore) -> Report:
    key = f"limit:{args.family}"
    torus = TorusModel.from_json(_json_value(args.torus)) if args.torus is not None else None
    if torus is not None:
        key += f":{json.dumps(torus.to_dict(), sort_keys=True)}"
    report = torus_limit_report(args.family, args.sizes, envelope=store.envelope(key), torus=torus)
    if report.table:
        store.verify_envelope(key, {row["size"]: row["gh_upper"] for row in report.table})
    if args.dump_matrix and args.sizes:
        space = rescaled_space(family_instance(args.family, args.sizes[-1])[0])
        labels = [json.dumps(encode(space.labels[i])) for i in range(len(space))]
        pd.DataFrame(space.as_float(), index=labels, columns=labels).to_csv(args.dump_matrix)
        logger.info(f"Distance matrix written to {args.dump_matrix}")
    return report


COMMANDS = {
    "group": run_group,
    "set": run_set,
    "verify": run_verify,
    "growth": run_growth,
    "nilprog": run_nilprog,
    "diameter": run_diameter,
    "spectral": run_spectral,
    "babai": run_babai,
    "limit": run_limit,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def render(report: Report, fmt: str) -> str:
    return report.to_csv() if fmt == "csv" else report.to_json()


def execute(args: argparse.Namespace, out: io.TextIOBase) -> int:
    """Run and render one parsed command; returns the exit code"""
    overrides: Dict[str, Any] = {}
    if args.cap_elements is not None:
        overrides["CAP_ELEMENTS"] = args.cap_elements
    if args.threads is not None:
        overrides["THREADS"] = args.threads
    if args.fixtures is not None:
        overrides["FIXTURES_PATH"] = args.fixtures

    with config_overrides(**overrides):
        try:
            store = FixtureStore(refresh=args.refresh_fixtures)
            report = COMMANDS[args.command](args, store)
            out.write(render(report, args.format))
            store.save()
            return 0
        except PropertyViolation as e:
            logger.error(f"Property violated: {e.message}")
            out.write(json.dumps({"violation": e.message, "witness": encode(e.witness)}, sort_keys=True, indent=2) + "\n")
            return e.exit_code
        except ToolkitError as e:
            logger.error(e.message)
            return e.exit_code
        except Exception as e:
            logger.exception(f"Unexpected error: {e}")
            return 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main execution function"""
    argv = sys.argv[1:] if argv is None else list(argv)
    configure_logging("--verbose" in argv)
    try:
        args = build_parser().parse_args(argv)
    except ToolkitError as e:
        logger.error(e.message)
        return e.exit_code

    buffer = io.StringIO()
    code = execute(args, buffer)
    output = buffer.getvalue()
    sys.stdout.write(output)
    sys.stdout.flush()

    if args.archive:
        database.save_run(args.command, argv, args.seed, code, output, args.archive)
        logger.info(f"Run archived in {args.archive}")
    return code


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n[ERROR] Process interrupted by user", file=sys.stderr)
        sys.exit(2)
