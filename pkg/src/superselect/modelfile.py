"""JSON model files and canonical JSON output.

Complex matrices are row-major nested lists of ``[re, im]`` pairs; vectors
are lists of pairs. Operators, states and actions are named and referenced
by name from the ``scheme`` and ``analysis`` sections.
"""
from dataclasses import dataclass, field
import json
import math
from pathlib import Path

import numpy as np

from superselect import linops
from superselect.algebra import (
    APPARATUS,
    FINITE,
    OBJECT,
    ONE_PARAMETER,
    CompositeSpace,
    GroupAction,
)
from superselect.errors import (
    DimMismatch,
    FlagViolation,
    NotNormalized,
    ParseError,
    SuperselectError,
    UnresolvedReference,
)
from superselect.schemes import MeasurementScheme

SCHEMA_VERSION = 1


# -- canonical JSON --------------------------------------------------------

def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _format_number(x, digits):
    if isinstance(x, int):
        return str(x)
    if not math.isfinite(x):
        return "null"
    if digits is None:
        return repr(float(x))
    return format(x, f".{digits}g")


def _flat(value, digits):
    # single-line rendering for numeric leaves, pairs and rows
    if isinstance(value, list):
        return "[" + ", ".join(_flat(v, digits) for v in value) + "]"
    if _is_number(value):
        return _format_number(value, digits)
    return json.dumps(value)


def _is_flat(value):
    if not isinstance(value, list):
        return True
    return all(_is_number(v) or (isinstance(v, list) and all(_is_number(w) for w in v)) for v in value)


def canonical_json(value, digits=None, indent=0):
    """Stable JSON text: two-space indent, rows of numbers on one line.

    ``digits`` limits floats to that many significant digits; ``None`` keeps
    the exact round-trip representation.
    """
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {canonical_json(v, digits, indent + 1)}"
                 for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        value = list(value)
        if not value:
            return "[]"
        if _is_flat(value):
            return _flat(value, digits)
        items = [pad + canonical_json(v, digits, indent + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(value, (bool, type(None), str)):
        return json.dumps(value)
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if _is_number(value):
        return _format_number(value, digits)
    raise TypeError(f"cannot serialize {type(value).__name__}")


# -- complex arrays --------------------------------------------------------

def encode_matrix(m):
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def encode_vector(v):
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in v]


def _decode_entry(x, path):
    if isinstance(x, list) and len(x) == 2 and all(_is_number(y) for y in x):
        return complex(float(x[0]), float(x[1]))
    if _is_number(x):
        return complex(float(x), 0.0)
    raise ParseError(f"{path}: expected [re, im], got {x!r}")


def decode_matrix(data, path):
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ParseError(f"{path}: expected a nested list of rows")
    n = len(data)
    if any(len(r) != n for r in data):
        raise DimMismatch(f"{path}: matrix is not square")
    return np.array([[_decode_entry(x, f"{path}[{i}][{j}]") for j, x in enumerate(r)]
                     for i, r in enumerate(data)], dtype=np.complex128)


def decode_vector(data, path):
    if not isinstance(data, list) or not data:
        raise ParseError(f"{path}: expected a list of [re, im] pairs")
    return np.array([_decode_entry(x, f"{path}[{i}]") for i, x in enumerate(data)],
                    dtype=np.complex128)


# -- model files -----------------------------------------------------------

@dataclass(eq=False)
class ModelFile:
    """A parsed and resolved model file; ``raw`` keeps the JSON document."""

    raw: dict
    space: CompositeSpace
    operators: dict
    states: dict
    actions: dict
    scheme: MeasurementScheme
    analysis: dict = field(default_factory=dict)

    def operator(self, name, path="analysis"):
        if name not in self.operators:
            raise UnresolvedReference(f"{path}: unknown operator {name!r}")
        return self.operators[name]

    def state(self, name, path="analysis"):
        if name not in self.states:
            raise UnresolvedReference(f"{path}: unknown state {name!r}")
        return self.states[name]

    def action(self, name, path="analysis"):
        if name not in self.actions:
            raise UnresolvedReference(f"{path}: unknown action {name!r}")
        return self.actions[name]


def _require(mapping, key, path, kind=None):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ParseError(f"{path}.{key}: missing")
    value = mapping[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"{path}.{key}: expected {getattr(kind, '__name__', kind)}")
    return value


def _resolve_operators(raw):
    ops = {}
    for name, spec in _require(raw, "operators", "$", dict).items():
        path = f"operators.{name}"
        m = decode_matrix(_require(spec, "matrix", path), f"{path}.matrix")
        if spec.get("hermitian") and not linops.is_hermitian(m):
            raise FlagViolation(f"{path}: declared hermitian but is not "
                                f"(defect {linops.hermiticity_defect(m):.3e})")
        if spec.get("unitary") and not linops.is_unitary(m):
            raise FlagViolation(f"{path}: declared unitary but is not "
                                f"(defect {linops.unitarity_defect(m):.3e})")
        ops[name] = m
    return ops


def _resolve_states(raw):
    states = {}
    for name, data in raw.get("states", {}).items():
        v = decode_vector(data, f"states.{name}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise NotNormalized(f"states.{name}: not normalized")
        states[name] = v
    return states


def _resolve_action(name, spec, ops, space):
    path = f"actions.{name}"
    kind = _require(spec, "kind", path, str)
    side = spec.get("side", OBJECT)
    if side not in (OBJECT, APPARATUS):
        raise ParseError(f"{path}.side: must be 'object' or 'apparatus'")
    dim = space.side_dim(side)

    def lookup(ref, where):
        if ref not in ops:
            raise UnresolvedReference(f"{where}: unknown operator {ref!r}")
        m = ops[ref]
        if m.shape[0] != dim:
            raise DimMismatch(f"{where}: operator {ref!r} has dim {m.shape[0]}, {side} dim is {dim}")
        return m

    try:
        if kind == ONE_PARAMETER:
            gen = lookup(_require(spec, "generator", path, str), f"{path}.generator")
            samples = spec.get("samples")
            if samples is None:
                return GroupAction.one_parameter(gen, side=side)
            return GroupAction.one_parameter(gen, [float(s) for s in samples], side)
        if kind == FINITE:
            refs = _require(spec, "elements", path, list)
            return GroupAction.finite([lookup(r, f"{path}.elements[{k}]") for k, r in enumerate(refs)], side)
    except SuperselectError as exc:
        if isinstance(exc, (UnresolvedReference, DimMismatch)):
            raise
        raise type(exc)(f"{path}: {exc}") from exc
    raise ParseError(f"{path}.kind: unknown kind {kind!r}")


def _resolve_scheme(raw, ops, states, space):
    spec = _require(raw, "scheme", "$", dict)

    def op(key, dim=None):
        ref = _require(spec, key, "scheme", str)
        if ref not in ops:
            raise UnresolvedReference(f"scheme.{key}: unknown operator {ref!r}")
        m = ops[ref]
        if dim is not None and m.shape[0] != dim:
            raise DimMismatch(f"scheme.{key}: operator {ref!r} has dim {m.shape[0]}, expected {dim}")
        return m

    xi_ref = _require(spec, "apparatus_state", "scheme", str)
    if xi_ref not in states:
        raise UnresolvedReference(f"scheme.apparatus_state: unknown state {xi_ref!r}")
    kwargs = {
        "space": space,
        "object_observable": op("object_observable", space.object_dim),
        "meter": op("meter", space.apparatus_dim),
        "apparatus_state": states[xi_ref],
        "label": spec.get("label", ""),
    }
    if "hamiltonian" in spec:
        kwargs["hamiltonian"] = op("hamiltonian", space.dim)
        kwargs["time"] = float(spec.get("time", 1.0))
    elif "unitary" in spec:
        kwargs["unitary"] = op("unitary", space.dim)
    else:
        raise ParseError("scheme: needs 'hamiltonian' or 'unitary'")
    try:
        return MeasurementScheme(**kwargs)
    except SuperselectError as exc:
        raise type(exc)(f"scheme: {exc}") from exc


def loads_model(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return resolve_model(raw)


def resolve_model(raw):
    if not isinstance(raw, dict):
        raise ParseError("$: model must be a JSON object")
    version = _require(raw, "schema_version", "$")
    if version != SCHEMA_VERSION:
        raise ParseError(f"schema_version: unsupported version {version!r}")
    sp = _require(raw, "space", "$", dict)
    try:
        space = CompositeSpace(int(_require(sp, "object_dim", "space")),
                               int(_require(sp, "apparatus_dim", "space")))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"space: {exc}") from exc
    ops = _resolve_operators(raw)
    states = _resolve_states(raw)
    actions = {name: _resolve_action(name, spec, ops, space)
               for name, spec in raw.get("actions", {}).items()}
    scheme = _resolve_scheme(raw, ops, states, space)
    analysis = raw.get("analysis", {})
    if not isinstance(analysis, dict):
        raise ParseError("analysis: expected an object")
    return ModelFile(raw, space, ops, states, actions, scheme, analysis)


def load_model(path):
    return loads_model(Path(path).read_text())


def dumps_model(model):
    raw = model.raw if isinstance(model, ModelFile) else model
    return canonical_json(raw) + "\n"


def save_model(model, path):
    Path(path).write_text(dumps_model(model))
