"""Command-line front end: demos, model audits and JSON reports.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
input errors. Model arguments starting with ``@`` name a bundled data file.
"""
import argparse
from importlib import resources
import json
import math
import sys

import numpy as np

from superselect import __version__, algebra, linops, schemes, verdicts
from superselect.algebra import APPARATUS, OBJECT, GroupAction
from superselect.correlation import perfect_correlation
from superselect.errors import PreconditionViolated, SuperselectError
from superselect.modelfile import (
    SCHEMA_VERSION,
    canonical_json,
    decode_matrix,
    decode_vector,
    load_model,
    loads_model,
)

DIGITS = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits on its own; route errors through our exit-code policy
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


class Report:
    """Ordered report: parameters, checks and free-form results."""

    def __init__(self, command, parameters):
        self.command = command
        self.parameters = parameters
        self.checks = []
        self.results = {}

    def check(self, name, value, passed, tolerance, relation):
        self.checks.append({
            "name": name,
            "value": _plain(value),
            "relation": relation,
            "tolerance": tolerance,
            "passed": bool(passed),
        })
        return passed

    def at_most(self, name, value, tolerance):
        return self.check(name, value, value <= tolerance, tolerance, "<=")

    def above(self, name, value, threshold):
        return self.check(name, value, value > threshold, threshold, ">")

    def flag(self, name, value):
        return self.check(name, value, bool(value), True, "==")

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    def as_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "command": self.command,
            "parameters": self.parameters,
            "checks": self.checks,
            "results": self.results,
            "passed": self.passed,
        }

    def to_json(self):
        return canonical_json(_plain(self.as_dict()), DIGITS) + "\n"

    def to_table(self):
        lines = [f"{self.command}  ({'PASS' if self.passed else 'FAIL'})", ""]
        width = max(len(k) for k in self.parameters)
        for key, value in self.parameters.items():
            lines.append(f"  {key:<{width}}  {_fmt(value)}")
        if self.checks:
            lines.append("")
            width = max(len(c["name"]) for c in self.checks)
            for c in self.checks:
                lines.append(f"  {'ok' if c['passed'] else 'FAIL':<4}  {c['name']:<{width}}  "
                             f"{_fmt(c['value'])} {c['relation']} {_fmt(c['tolerance'])}")
        if self.results:
            lines.append("")
            width = max(len(k) for k in self.results)
            for key, value in self.results.items():
                lines.append(f"  {key:<{width}}  {_fmt(value)}")
        return "\n".join(lines) + "\n"


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


def _fmt(value):
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return format(value, f".{DIGITS}g") if math.isfinite(value) else str(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if isinstance(value, dict):
        return "  ".join(f"{k}={_fmt(v)}" for k, v in value.items())
    return str(value)


# -- demos -----------------------------------------------------------------

def _seeded_states(dim, count, seed):
    rng = np.random.default_rng(seed)
    return [linops.random_state(dim, rng) for _ in range(count)]


def demo_vn(args):
    d = args.dim
    rep = Report("demo vn", {"dim": d, "seed": args.seed, "states": args.states})
    scheme = schemes.build_discrete_von_neumann(d)
    covariance = verdicts.check_covariant_indicator(
        scheme, schemes.shift_action(d, OBJECT), schemes.shift_action(d, APPARATUS))
    rep.at_most("covariance residual", covariance, 1e-12)

    sp = scheme.space
    observable = algebra.embed(sp, scheme.object_observable, OBJECT)
    evolved = schemes.evolve_meter(scheme)
    states = [schemes.basis_state(d, k) for k in range(d)] + _seeded_states(d, args.states, args.seed)
    worst = max(perfect_correlation(observable, evolved, scheme.initial_state(p), 1e-10).worst_atom_residual
                for p in states)
    rep.at_most("correlation residual", worst, 1e-10)
    rep.results["correlation_equal"] = worst <= 1e-10

    phase = verdicts.check_isolated_conservation(scheme, schemes.phase_action(d))
    rep.at_most("phase conservation", phase, verdicts.HYPOTHESIS_TOL)
    rep.results["shift_conservation_residual"] = verdicts.check_isolated_conservation(
        scheme, schemes.shift_action(d))
    audit = verdicts.main_theorem_audit(scheme, schemes.phase_action(d),
                                        GroupAction.trivial(d, APPARATUS))
    _audit_checks(rep, audit)
    return rep


def demo_charge(args):
    rep = Report("demo charge", {"modes": args.modes, "cutoff": args.cutoff})
    fock = schemes.build_fock_model(args.modes, args.cutoff)
    sectors = algebra.sector_decompose(fock.number_op)
    rep.results["sector_charges"] = list(sectors.charge_eigenvalues)
    rep.results["sector_dims"] = list(sectors.sector_dims)
    last = fock.modes - 1
    hop = fock.hopping(0, last)
    rep.at_most("hopping superselection", verdicts.check_superselection(hop, fock.number_op), 1e-12)
    quad = fock.quadrature(0)
    rep.above("quadrature superselection", verdicts.check_superselection(quad, fock.number_op), 1e-3)
    rep.results["quadrature_off_sector_norm"] = algebra.off_sector_norm(quad, sectors)
    gauge = fock.gauge_action()
    a = fock.annihilation(0)
    # N lowers by one under a, so the gauge action multiplies it by exp(-i theta)
    worst = max(linops.fro(algebra.act(gauge, s, a) - np.exp(-1j * s) * a) for s in gauge.elements())
    rep.at_most("gauge phase of a_1", worst, 1e-10)
    return rep


def demo_way(args):
    dim = int(round(2 * args.spin + 1))
    if abs(2 * args.spin + 1 - dim) > 1e-12 or dim < 2:
        raise UsageError("--spin must be a positive multiple of 1/2")
    rep = Report("demo way", {"spin": args.spin, "apparatus_dim": dim, "coupling": args.coupling,
                              "time": args.time, "seed": args.seed, "states": args.states,
                              "slack": verdicts.BOUND_SLACK})
    scheme = schemes.build_way_spin_model(dim, args.coupling, args.time)
    j1, j2 = scheme.charges["J1"], scheme.charges["J2"]
    total = verdicts.check_total_conservation(
        scheme, GroupAction.one_parameter(j1), GroupAction.one_parameter(j2, side=APPARATUS))
    rep.at_most("total conservation", total, 1e-10)
    meter = linops.fro(algebra.commutator(scheme.meter, j2))
    rep.at_most("meter commutes with J2", meter, 1e-12)
    rep.results["isolated_conservation_residual"] = verdicts.check_isolated_conservation(
        scheme, GroupAction.one_parameter(j1))
    # (1, i)/sqrt(2) maximizes the commutator term
    states = [np.array([1, 1j]) / math.sqrt(2)] + _seeded_states(2, args.states, args.seed)
    reports = [verdicts.way_ozawa_bound(scheme, scheme.object_observable, j1, j2, p) for p in states]
    rep.flag("bound holds on all states", all(r.satisfied for r in reports))
    rep.results["min_margin"] = min(r.margin for r in reports)
    rep.results["error_sq_y_state"] = reports[0].error_sq
    rep.results["bound_y_state"] = reports[0].bound
    return rep


def demo_breaking(args):
    rep = Report("demo breaking", {"field": args.field, "time": args.time,
                                   "apparatus_dim": args.apparatus_dim})
    scheme = schemes.build_symmetry_breaking_model(args.field, args.time, args.apparatus_dim)
    sp = scheme.space
    observable = algebra.embed(sp, scheme.object_observable, OBJECT)
    evolved = schemes.evolve_meter(scheme)
    worst = max(perfect_correlation(observable, evolved, scheme.initial_state(schemes.basis_state(2, k)),
                                    1e-8).worst_atom_residual for k in range(2))
    rep.at_most("binned correlation", worst, 1e-8)
    jx = GroupAction.one_parameter(scheme.charges["Jx"])
    rep.above("Jx conservation broken", verdicts.check_isolated_conservation(scheme, jx), 0.1)
    rep.results["Jz_conservation_residual"] = verdicts.check_isolated_conservation(
        scheme, GroupAction.one_parameter(scheme.charges["Jz"]))
    return rep


# -- model-file commands ---------------------------------------------------

def _open_model(ref):
    if ref.startswith("@"):
        name = ref[1:]
        try:
            text = resources.files("superselect").joinpath("data", name).read_text()
        except FileNotFoundError:
            raise UsageError(f"no bundled model named {name!r}") from None
        return loads_model(text)
    try:
        return load_model(ref)
    except OSError as exc:
        raise UsageError(f"cannot read {ref}: {exc.strerror}") from None


def _states_for(model, names, path):
    if names is None or names == "default":
        return None
    return [model.state(n, path) for n in names]


def _audit_checks(rep, audit):
    for h in audit.hypothesis_results:
        rep.at_most(h.name, h.residual, audit.tolerances["correlation" if h.name == "ozawa equality"
                                                         else "hypothesis"])
    if audit.conclusion_passed is not None:
        rep.at_most("invariance of observable", audit.conclusion_residual, audit.tolerances["conclusion"])
    rep.results["status"] = audit.status
    rep.results["states_tested"] = audit.states_tested
    rep.results["conclusion_residual"] = audit.conclusion_residual


def cmd_audit(args):
    model = _open_model(args.model)
    spec = model.analysis.get("audit")
    if not isinstance(spec, dict):
        raise UsageError("model has no analysis.audit section")
    tol = float(spec.get("tolerance", verdicts.HYPOTHESIS_TOL))
    rep = Report("audit", {"model": args.model, "label": model.scheme.label, "tolerance": tol})
    obj = model.action(spec.get("object_action"), "analysis.audit.object_action")
    app = model.action(spec.get("apparatus_action"), "analysis.audit.apparatus_action")
    states = _states_for(model, spec.get("states"), "analysis.audit.states")
    audit = verdicts.main_theorem_audit(model.scheme, obj, app, states, tol)
    _audit_checks(rep, audit)
    return rep


def cmd_bound(args):
    model = _open_model(args.model)
    spec = model.analysis.get("bound")
    if not isinstance(spec, dict):
        raise UsageError("model has no analysis.bound section")
    slack = float(spec.get("slack", verdicts.BOUND_SLACK))
    a = model.operator(spec.get("observable"), "analysis.bound.observable")
    j1 = model.operator(spec.get("object_charge"), "analysis.bound.object_charge")
    j2_ref = spec.get("apparatus_charge")
    j2 = None if j2_ref is None else model.operator(j2_ref, "analysis.bound.apparatus_charge")
    names = spec.get("states") or []
    rep = Report("bound", {"model": args.model, "slack": slack, "states": list(names)})
    rows = []
    try:
        for name in names:
            r = verdicts.way_ozawa_bound(model.scheme, a, j1, j2, model.state(name, "analysis.bound.states"),
                                         slack)
            rows.append(r)
            rep.check(f"bound {name}", r.margin, r.satisfied, -slack, ">=")
            rep.results[name] = {"error_sq": r.error_sq, "bound": r.bound, "divergent": r.divergent}
    except PreconditionViolated as exc:
        rep.check(f"precondition: {exc.which}", exc.residual, False, verdicts.PRECONDITION_TOL, "<=")
    return rep


def cmd_sectors(args):
    model = _open_model(args.model)
    charge = model.operator(args.charge, "--charge")
    sectors = algebra.sector_decompose(charge)
    rep = Report("sectors", {"model": args.model, "charge": args.charge})
    rep.results["sector_charges"] = list(sectors.charge_eigenvalues)
    rep.results["sector_dims"] = list(sectors.sector_dims)
    for name, op in model.operators.items():
        if name != args.charge and op.shape == charge.shape:
            rep.results[f"off_sector_norm {name}"] = algebra.off_sector_norm(op, sectors)
    return rep


def _search_spec(ref):
    if ref.startswith("@"):
        try:
            text = resources.files("superselect").joinpath("data", ref[1:]).read_text()
        except FileNotFoundError:
            raise UsageError(f"no bundled search spec named {ref[1:]!r}") from None
    else:
        try:
            with open(ref) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {ref}: {exc.strerror}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON in {ref}: {exc}") from None
    if not isinstance(spec, dict) or spec.get("schema_version") != SCHEMA_VERSION:
        raise UsageError(f"{ref}: schema_version must be {SCHEMA_VERSION}")
    return spec


def cmd_search(args):
    spec = _search_spec(args.spec)
    try:
        space = algebra.CompositeSpace(int(spec["space"]["object_dim"]), int(spec["space"]["apparatus_dim"]))
        a = decode_matrix(spec["observable"], "observable")
        j1 = decode_matrix(spec["charge"], "charge")
        meter = decode_matrix(spec["meter"], "meter")
        xi = decode_vector(spec["apparatus_state"], "apparatus_state")
        states = [decode_vector(v, f"object_states[{k}]") for k, v in enumerate(spec["object_states"])]
    except KeyError as exc:
        raise UsageError(f"{args.spec}: missing key {exc}") from None
    restarts = int(args.restarts if args.restarts is not None else spec.get("restarts", 20))
    time = float(spec.get("time", 1.0))
    rep = Report("search", {"spec": args.spec, "seed": args.seed, "budget": args.budget,
                            "restarts": restarts, "time": time, "floor_slack": verdicts.FLOOR_SLACK})
    kwargs = dict(budget=args.budget, seed=args.seed, restarts=restarts, time=time)
    res = verdicts.constrained_search(space, a, j1, meter, xi, states, constrained=True, **kwargs)
    rep.check("constrained best above floor", res.best_error_sq, res.best_error_sq >= res.floor - verdicts.FLOOR_SLACK,
              res.floor - verdicts.FLOOR_SLACK, ">=")
    rep.results["floor"] = res.floor
    rep.results["constrained_best_error_sq"] = res.best_error_sq
    rep.results["constrained_basis_size"] = res.basis_size
    rep.results["constrained_evaluations"] = res.evaluations
    if spec.get("control", True):
        ctl = verdicts.constrained_search(space, a, j1, meter, xi, states, constrained=False, **kwargs)
        rep.check("control below floor", ctl.best_error_sq, ctl.best_error_sq < res.floor, res.floor, "<")
        rep.results["control_best_error_sq"] = ctl.best_error_sq
        rep.results["control_evaluations"] = ctl.evaluations
    return rep


# -- entry points ----------------------------------------------------------

def build_parser():
    parser = _Parser(prog="superselect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(subparsers, name, func, help_):
        p = subparsers.add_parser(name, help=help_)
        p.add_argument("--json", action="store_true", help="emit the machine-readable report")
        p.set_defaults(func=func)
        return p

    demo = sub.add_parser("demo", help="canonical demonstrations")
    demos = demo.add_subparsers(dest="demo", required=True, parser_class=_Parser)
    p = add(demos, "vn", demo_vn, "discrete von Neumann position measurement")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--states", type=int, default=50)
    p = add(demos, "charge", demo_charge, "charge superselection in a truncated Fock space")
    p.add_argument("--modes", type=int, default=2)
    p.add_argument("--cutoff", type=int, default=2)
    p = add(demos, "way", demo_way, "WAY-Ozawa bound for a spin exchange model")
    p.add_argument("--spin", type=float, default=1.0)
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--time", type=float, default=math.pi / 4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--states", type=int, default=100)
    p = add(demos, "breaking", demo_breaking, "measurement enabled by explicit symmetry breaking")
    p.add_argument("--field", type=float, default=1.0)
    p.add_argument("--time", type=float, default=math.pi / 2)
    p.add_argument("--apparatus-dim", type=int, default=16)

    p = add(sub, "audit", cmd_audit, "run the hypotheses/conclusion audit of a model file")
    p.add_argument("model")
    p = add(sub, "bound", cmd_bound, "evaluate the WAY-Ozawa bound for a model file")
    p.add_argument("model")
    p = add(sub, "sectors", cmd_sectors, "sector decomposition of a named charge")
    p.add_argument("model")
    p.add_argument("--charge", required=True)
    p = add(sub, "search", cmd_search, "constrained Hamiltonian search against the floor")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=5000)
    p.add_argument("--restarts", type=int, default=None)
    return parser


def run_command(argv, out=None, err=None):
    """Run one command; returns the exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        report = args.func(args)
    except UsageError as exc:
        err.write(f"{exc}\n")
        if not str(exc).startswith("usage"):
            err.write(parser.format_usage())
        return 2
    except (SuperselectError, ValueError) as exc:
        err.write(f"superselect: error: {exc}\n")
        return 2
    out.write(report.to_json() if args.json else report.to_table())
    return 0 if report.passed else 1


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))
