"""Parametric model core.

A model is an ordered feature history (sketches and extrusions) over named
parameters. Parameters are either free (user-editable, bounded) or driven by
an arithmetic constraint expression. Regeneration turns the history into a
list of tagged planar faces; each face can be resolved back to the parameter
bound to it, which is what makes faces grabbable handles.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace

from . import expr
from .errors import CycleError, EvaluationError, GeometryError, SchemaError, SelectionError
from .polygon import is_simple, signed_area

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_ROLE_RE = re.compile(r"^(cap_start|cap_end|side_(0|[1-9][0-9]*))$")

ROLE_CAP_START = "cap_start"
ROLE_CAP_END = "cap_end"


def side_role(i):
    return f"side_{i}"


@dataclass(frozen=True)
class FaceTag:
    """Persistent handle for one planar face: owning feature plus face role."""

    feature_id: str
    role: str  # cap_start | cap_end | side_<i>

    def __str__(self):
        return f"({self.feature_id}, {self.role})"

    @property
    def side_index(self):
        if self.role.startswith("side_"):
            return int(self.role[5:])
        return None


@dataclass(frozen=True)
class ParamDef:
    name: str
    value: float
    min: float
    max: float
    delta: float
    driven: bool = False


@dataclass(frozen=True)
class ConstraintExpr:
    target: str
    ast: expr.Node
    text: str


@dataclass(frozen=True)
class SketchFeature:
    id: str
    profile: tuple  # ((x_ast, y_ast), ...) closed simple CCW polygon

    kind = "sketch"


@dataclass(frozen=True)
class ExtrudeFeature:
    id: str
    sketch: str
    depth: expr.Node
    origin: tuple  # (x, y, z)
    bindings: dict  # role -> parameter name

    kind = "extrude"


@dataclass
class Model:
    version: int
    units: str
    parameters: list  # [ParamDef]
    constraints: list  # [ConstraintExpr]
    features: list  # [SketchFeature | ExtrudeFeature] in history order
    revision: int = 0

    def param(self, name):
        for p in self.parameters:
            if p.name == name:
                return p
        raise KeyError(name)

    def has_param(self, name):
        return any(p.name == name for p in self.parameters)

    def feature(self, feature_id):
        for f in self.features:
            if f.id == feature_id:
                return f
        raise KeyError(feature_id)

    def extrudes(self):
        return [f for f in self.features if f.kind == "extrude"]

    def sketch_of(self, extrude):
        return self.feature(extrude.sketch)


@dataclass(frozen=True)
class PlanarFace:
    """One tagged face of the boundary: a planar 3D polygon with outward normal."""

    vertices: tuple  # ((x, y, z), ...)
    normal: tuple  # unit outward (nx, ny, nz)
    tag: FaceTag


@dataclass(frozen=True)
class BRepLite:
    faces: tuple  # (PlanarFace, ...) in feature/role order


# --------------------------------------------------------------------------
# model document parsing


def _require(cond, message, location):
    if not cond:
        raise SchemaError(message, location)


def _num(value, location):
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             "expected a number", location)
    return float(value)


def _ident(value, location):
    _require(isinstance(value, str) and _IDENT_RE.match(value),
             f"expected an identifier, got {value!r}", location)
    return value


def _parse_coord_expr(value, location):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return expr.Num(float(value))
    _require(isinstance(value, str), "expected an expression string or number", location)
    try:
        return expr.parse_expression(value)
    except Exception as exc:
        raise SchemaError(f"bad expression {value!r}: {exc}", location) from None


def parse_model(text):
    """Parse and fully validate a UTF-8 model document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    _require(isinstance(doc, dict), "top level must be an object", "$")
    _require(doc.get("version") == 1, "unsupported or missing schema version, expected 1",
             "version")
    units = doc.get("units", "mm")
    _require(isinstance(units, str), "units must be a string", "units")

    raw_params = doc.get("parameters", [])
    _require(isinstance(raw_params, list), "parameters must be an array", "parameters")
    params = []
    names = set()
    for i, item in enumerate(raw_params):
        loc = f"parameters[{i}]"
        _require(isinstance(item, dict), "expected an object", loc)
        unknown = set(item) - {"name", "value", "min", "max", "delta"}
        _require(not unknown, f"unknown fields: {sorted(unknown)}", loc)
        name = _ident(item.get("name"), f"{loc}.name")
        _require(name not in names, f"duplicate parameter name {name!r}", f"{loc}.name")
        names.add(name)
        value = _num(item.get("value"), f"{loc}.value")
        vmin = _num(item.get("min"), f"{loc}.min")
        vmax = _num(item.get("max"), f"{loc}.max")
        _require(vmin <= value <= vmax,
                 f"value {value} outside [{vmin}, {vmax}]", f"{loc}.value")
        if "delta" in item:
            delta = _num(item.get("delta"), f"{loc}.delta")
        else:
            delta = (vmax - vmin) / 50.0
        _require(delta > 0, "delta must be > 0", f"{loc}.delta")
        params.append(ParamDef(name, value, vmin, vmax, delta))

    raw_constraints = doc.get("constraints", [])
    _require(isinstance(raw_constraints, list), "constraints must be an array", "constraints")
    constraints = []
    driven_names = set()
    for i, item in enumerate(raw_constraints):
        loc = f"constraints[{i}]"
        _require(isinstance(item, dict), "expected an object", loc)
        target = _ident(item.get("target"), f"{loc}.target")
        _require(target not in names,
                 f"parameter {target!r} both free and driven", f"{loc}.target")
        _require(target not in driven_names,
                 f"parameter {target!r} driven by more than one constraint", f"{loc}.target")
        driven_names.add(target)
        source = item.get("expr")
        _require(isinstance(source, str), "expr must be a string", f"{loc}.expr")
        try:
            ast = expr.parse_expression(source)
        except Exception as exc:
            raise SchemaError(f"bad expression {source!r}: {exc}", f"{loc}.expr") from None
        constraints.append(ConstraintExpr(target, ast, source))

    all_names = names | driven_names
    for i, c in enumerate(constraints):
        for ref in sorted(expr.references(c.ast)):
            _require(ref in all_names, f"unknown parameter reference {ref!r}",
                     f"constraints[{i}].expr")

    # driven parameters exist only through their constraint; bounds are open
    for c in constraints:
        params.append(ParamDef(c.target, 0.0, -math.inf, math.inf, 1.0, driven=True))

    raw_features = doc.get("features", [])
    _require(isinstance(raw_features, list), "features must be an array", "features")
    features = []
    feature_ids = set()
    sketches = {}
    for i, item in enumerate(raw_features):
        loc = f"features[{i}]"
        _require(isinstance(item, dict), "expected an object", loc)
        fid = _ident(item.get("id"), f"{loc}.id")
        _require(fid not in feature_ids, f"duplicate feature id {fid!r}", f"{loc}.id")
        feature_ids.add(fid)
        kind = item.get("kind")
        if kind == "sketch":
            unknown = set(item) - {"id", "kind", "profile"}
            _require(not unknown, f"unknown fields: {sorted(unknown)}", loc)
            raw_profile = item.get("profile")
            _require(isinstance(raw_profile, list) and len(raw_profile) >= 3,
                     "profile must be an array of at least 3 [x, y] pairs",
                     f"{loc}.profile")
            profile = []
            for j, pair in enumerate(raw_profile):
                ploc = f"{loc}.profile[{j}]"
                _require(isinstance(pair, list) and len(pair) == 2,
                         "expected an [x, y] pair", ploc)
                x_ast = _parse_coord_expr(pair[0], f"{ploc}[0]")
                y_ast = _parse_coord_expr(pair[1], f"{ploc}[1]")
                for ref in sorted(expr.references(x_ast) | expr.references(y_ast)):
                    _require(ref in all_names,
                             f"unknown parameter reference {ref!r}", ploc)
                profile.append((x_ast, y_ast))
            feat = SketchFeature(fid, tuple(profile))
            sketches[fid] = feat
            features.append(feat)
        elif kind == "extrude":
            unknown = set(item) - {"id", "kind", "sketch", "depth", "origin", "bindings"}
            _require(not unknown, f"unknown fields: {sorted(unknown)}", loc)
            sketch_id = _ident(item.get("sketch"), f"{loc}.sketch")
            _require(sketch_id in sketches,
                     f"extrude references {sketch_id!r}, which is not an earlier sketch",
                     f"{loc}.sketch")
            depth = _parse_coord_expr(item.get("depth"), f"{loc}.depth")
            for ref in sorted(expr.references(depth)):
                _require(ref in all_names, f"unknown parameter reference {ref!r}",
                         f"{loc}.depth")
            raw_origin = item.get("origin", [0, 0, 0])
            _require(isinstance(raw_origin, list) and len(raw_origin) == 3,
                     "origin must be [x, y, z]", f"{loc}.origin")
            origin = tuple(_num(v, f"{loc}.origin[{k}]") for k, v in enumerate(raw_origin))
            raw_bindings = item.get("bindings", {})
            _require(isinstance(raw_bindings, dict), "bindings must be an object",
                     f"{loc}.bindings")
            bindings = {}
            edge_count = len(sketches[sketch_id].profile)
            for role, target in raw_bindings.items():
                bloc = f"{loc}.bindings.{role}"
                _require(_ROLE_RE.match(role) is not None,
                         f"bad face role {role!r}", bloc)
                idx = int(role[5:]) if role.startswith("side_") else None
                _require(idx is None or idx < edge_count,
                         f"side index {idx} out of range for a {edge_count}-edge profile",
                         bloc)
                _ident(target, bloc)
                _require(target in all_names, f"unknown parameter {target!r}", bloc)
                _require(target not in driven_names,
                         f"binding to driven parameter {target!r}", bloc)
                bindings[role] = target
            features.append(ExtrudeFeature(fid, sketch_id, depth, origin, bindings))
        else:
            raise SchemaError(f"unknown feature kind {kind!r}", f"{loc}.kind")

    model = Model(1, units, params, constraints, features)

    # evaluate once: catches cycles and populates driven values
    valuation = evaluate_params(model)
    model.parameters = [
        replace(p, value=valuation[p.name]) if p.driven else p for p in model.parameters
    ]

    # initial geometry must be valid so every face tag is realizable
    try:
        regenerate(model)
    except (GeometryError, EvaluationError) as exc:
        raise SchemaError(str(exc), "features") from None
    return model


def parse_model_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# --------------------------------------------------------------------------
# constraint evaluation


def constraint_order(model):
    """Constraint targets in dependency order (depth-first, name-stable)."""
    by_target = {c.target: c for c in model.constraints}
    order = []
    state = {}  # name -> 1 while on stack, 2 when done
    stack_names = []

    def visit(name):
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            cycle_start = stack_names.index(name)
            raise CycleError(stack_names[cycle_start:])
        state[name] = 1
        stack_names.append(name)
        for ref in sorted(expr.references(by_target[name].ast)):
            if ref in by_target:
                visit(ref)
        stack_names.pop()
        state[name] = 2
        order.append(name)

    for target in sorted(by_target):
        visit(target)
    return order


def evaluate_params(model):
    """Full name -> value map; driven parameters evaluated in dependency order."""
    env = {p.name: p.value for p in model.parameters if not p.driven}
    by_target = {c.target: c for c in model.constraints}
    for name in constraint_order(model):
        env[name] = expr.evaluate(by_target[name].ast, env)
    return env


def set_parameter(model, name, value):
    """New model with `name` set to `value`, driven parameters refreshed."""
    try:
        p = model.param(name)
    except KeyError:
        raise SelectionError(f"unknown parameter {name!r}") from None
    if p.driven:
        raise SelectionError(f"parameter {name!r} is driven")
    if not (p.min <= value <= p.max):
        raise SelectionError(
            f"value {value} for {name!r} outside bounds [{p.min}, {p.max}]")
    updated = Model(
        version=model.version,
        units=model.units,
        parameters=[replace(q, value=value) if q.name == name else q
                    for q in model.parameters],
        constraints=model.constraints,
        features=model.features,
        revision=model.revision + 1,
    )
    valuation = evaluate_params(updated)
    updated.parameters = [
        replace(q, value=valuation[q.name]) if q.driven else q for q in updated.parameters
    ]
    return updated


# --------------------------------------------------------------------------
# regeneration


def _evaluate_profile(sketch, valuation):
    points = []
    for x_ast, y_ast in sketch.profile:
        points.append((expr.evaluate(x_ast, valuation), expr.evaluate(y_ast, valuation)))
    return points


def _check_profile(points, feature_id):
    area = signed_area(points)
    extent = max(max(abs(x) for x, _ in points), max(abs(y) for _, y in points), 1.0)
    if abs(area) <= 1e-12 * extent * extent:
        raise GeometryError("profile has zero area", feature_id)
    if area < 0:
        raise GeometryError("profile winding is clockwise, expected counter-clockwise",
                            feature_id)
    if not is_simple(points):
        raise GeometryError("profile is self-intersecting or repeats a vertex", feature_id)


def regenerate(model):
    """Evaluate the feature history into a tagged planar B-Rep."""
    valuation = evaluate_params(model)
    profiles = {}
    faces = []
    for feat in model.features:
        if feat.kind == "sketch":
            points = _evaluate_profile(feat, valuation)
            _check_profile(points, feat.id)
            profiles[feat.id] = points
            continue
        points = profiles[feat.sketch]
        depth = expr.evaluate(feat.depth, valuation)
        if depth <= 0:
            raise GeometryError(f"depth evaluates to {depth}, must be > 0", feat.id)
        ox, oy, oz = feat.origin
        bottom = [(ox + x, oy + y, oz) for x, y in points]
        top = [(ox + x, oy + y, oz + depth) for x, y in points]
        n = len(points)
        faces.append(PlanarFace(tuple(reversed(bottom)), (0.0, 0.0, -1.0),
                                FaceTag(feat.id, ROLE_CAP_START)))
        faces.append(PlanarFace(tuple(top), (0.0, 0.0, 1.0),
                                FaceTag(feat.id, ROLE_CAP_END)))
        for i in range(n):
            j = (i + 1) % n
            ex = points[j][0] - points[i][0]
            ey = points[j][1] - points[i][1]
            length = math.hypot(ex, ey)
            normal = (ey / length, -ex / length, 0.0)
            quad = (bottom[i], bottom[j], top[j], top[i])
            faces.append(PlanarFace(quad, normal, FaceTag(feat.id, side_role(i))))
    return BRepLite(tuple(faces))


# --------------------------------------------------------------------------
# face -> parameter resolution


def _valid_roles(model, feature):
    edge_count = len(model.sketch_of(feature).profile)
    return {ROLE_CAP_START, ROLE_CAP_END} | {side_role(i) for i in range(edge_count)}


def face_to_parameter(model, tag):
    """Name of the free parameter bound to the face, or raise SelectionError."""
    try:
        feat = model.feature(tag.feature_id)
    except KeyError:
        raise SelectionError(f"unknown face {tag}") from None
    if feat.kind != "extrude" or tag.role not in _valid_roles(model, feat):
        raise SelectionError(f"unknown face {tag}")
    name = feat.bindings.get(tag.role)
    if name is None and tag.role == ROLE_CAP_END and isinstance(feat.depth, expr.Ref):
        name = feat.depth.name
    if name is None:
        raise SelectionError(f"face not selectable: {tag} has no parameter binding")
    if model.param(name).driven:
        raise SelectionError(f"parameter {name!r} is driven")
    return name


def handle_tags(model, param_name):
    """All face tags that resolve to `param_name` (the draggable handle faces)."""
    tags = set()
    for feat in model.extrudes():
        for role in sorted(_valid_roles(model, feat)):
            tag = FaceTag(feat.id, role)
            try:
                if face_to_parameter(model, tag) == param_name:
                    tags.add(tag)
            except SelectionError:
                continue
    return tags
