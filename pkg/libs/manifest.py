#   @file manifest.py
#   @brief Problem manifests: YAML documents declaring the space, the frame, the
#          volume density, integer parameters, submanifolds, points and options.
#   @date 19-Oct-2026
#
#   See MANIFEST_FORMAT.md for the complete grammar.

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml

from libs.brackets import Frame, VecField
from libs.errors import (AnalysisError, InputError, ManifestError, UninstantiatedParameterError)
from libs.exactalg import Poly
from libs.expr import ParseContext, parse_poly
from libs.flags import DEFAULT_STEP_CAP, SubmanifoldSpec
from libs.orders import DEFAULT_FAMILY_BUDGET, VolumeForm

logger = logging.getLogger(__name__)

SECTION_PREFIXES = ("submanifold.", "point.")
PLAIN_SECTIONS = ("name", "space", "parameters", "frame", "volume", "options")


class _UniqueKeyLoader(yaml.SafeLoader):
    """safe_load that refuses duplicate mapping keys."""


def _construct_unique_mapping(loader, node, deep=False):
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if key in seen:
            raise ManifestError(f"duplicate name {key!r}", f"line {key_node.start_mark.line + 1}")
        seen.add(key)
    return loader.construct_mapping(node, deep)


_UniqueKeyLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_unique_mapping)


@dataclass
class Options:
    """Analysis knobs. Layered: built-in < defaults.yml < manifest < command line."""
    cap_step: int = DEFAULT_STEP_CAP
    cap_order: Optional[int] = None
    bracket_len: Optional[int] = None
    samples: int = 8
    family_budget: int = DEFAULT_FAMILY_BUDGET
    trunc: Optional[int] = None
    seed: int = 0
    format: str = "text"
    probe: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def layered(cls, *layers: Optional[Mapping[str, Any]]) -> "Options":
        options = cls()
        for layer in layers:
            options = options.merged(layer)
        return options

    def merged(self, layer: Optional[Mapping[str, Any]]) -> "Options":
        if not layer:
            return self
        names = {f.name for f in fields(self)}
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        for key, value in layer.items():
            key = key.replace("-", "_")
            if key not in names:
                raise ManifestError(f"unknown option {key!r}", "options")
            if value is None:
                continue
            if key == "probe":
                merged_probe = dict(values["probe"])
                merged_probe.update(value)
                values["probe"] = merged_probe
            else:
                values[key] = value
        result = Options(**values)
        result.validate()
        return result

    def validate(self) -> None:
        for key in ("cap_step", "samples", "family_budget"):
            value = getattr(self, key)
            if not isinstance(value, int) or value < 1:
                raise ManifestError(f"{key} must be a positive integer, got {value!r}", "options")
        for key in ("cap_order", "bracket_len", "trunc"):
            value = getattr(self, key)
            if value is not None and (not isinstance(value, int) or value < 0):
                raise ManifestError(f"{key} must be a nonnegative integer, got {value!r}", "options")
        if self.format not in ("text", "machine"):
            raise ManifestError(f"format must be 'text' or 'machine', got {self.format!r}", "options")


@dataclass
class Manifest:
    """
    A validated problem description.

    Example:
        manifest = parse_manifest(open("manifests/martinet.yml").read())
        manifest.frame.rank          # 2
        manifest.points["origin"]    # (0, 0, 0)
    """
    name: str
    dimension: int
    coordinates: Tuple[str, ...]
    frame: Frame
    frame_names: Tuple[str, ...]
    volume: VolumeForm
    parameters: Dict[str, int]
    submanifolds: Dict[str, SubmanifoldSpec]
    points: Dict[str, Tuple[Fraction, ...]]
    options: Dict[str, Any] = field(default_factory=dict)
    sources: Dict[str, Any] = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return self.frame.rank

    def context(self) -> ParseContext:
        return ParseContext(list(self.coordinates), dict(self.parameters))

    def submanifold(self, name: str) -> SubmanifoldSpec:
        if name not in self.submanifolds:
            raise InputError(f"unknown submanifold {name!r}; declared: {', '.join(self.submanifolds) or 'none'}")
        return self.submanifolds[name]

    def point(self, spec: str) -> Tuple[Fraction, ...]:
        """A declared point name, or inline coordinates such as '1,0,0' or '1/2,0,0'."""
        if spec in self.points:
            return self.points[spec]
        parts = [p.strip() for p in spec.strip("()[] ").split(",")]
        if len(parts) != self.dimension:
            raise InputError(f"unknown point {spec!r}: not declared and not {self.dimension} coordinates")
        try:
            return tuple(Fraction(p) for p in parts)
        except ValueError:
            raise InputError(f"point {spec!r} has a non-rational coordinate") from None

    def submanifolds_through(self, point: Tuple[Fraction, ...]) -> List[SubmanifoldSpec]:
        found = []
        for spec in self.submanifolds.values():
            try:
                if spec.contains(point):
                    found.append(spec)
            except AnalysisError:
                continue
        return found


# ---------- Parsing ----------

class _ManifestParser:

    def __init__(self, data: Mapping[str, Any], overrides: Mapping[str, int], strict: bool):
        self.data = data
        self.overrides = dict(overrides)
        self.strict = strict
        self.issues: List[str] = []

    def fail(self, error: Exception) -> None:
        if self.strict:
            raise error
        self.issues.append(str(error))

    # ---------- Sections ----------
    def space(self) -> Tuple[int, Tuple[str, ...]]:
        section = self.data.get("space")
        if not isinstance(section, Mapping) or "dimension" not in section:
            raise ManifestError("missing 'dimension'", "space")
        n = section["dimension"]
        if not isinstance(n, int) or n < 2:
            raise ManifestError(f"dimension must be an integer >= 2, got {n!r}", "space.dimension")
        coords = section.get("coordinates") or [f"x{i + 1}" for i in range(n)]
        coords = tuple(str(c) for c in coords)
        if len(coords) != n:
            raise ManifestError(f"{len(coords)} coordinate names for dimension {n}", "space.coordinates")
        if len(set(coords)) != n:
            raise ManifestError("duplicate coordinate names", "space.coordinates")
        return n, coords

    def parameters(self, coords: Tuple[str, ...]) -> Dict[str, int]:
        section = self.data.get("parameters") or {}
        if not isinstance(section, Mapping):
            raise ManifestError("expected a mapping name -> integer", "parameters")
        values: Dict[str, Optional[int]] = {}
        for name, value in section.items():
            name = str(name)
            if name in coords:
                raise ManifestError(f"parameter {name} clashes with a coordinate name", f"parameters.{name}")
            values[name] = value
        for name, value in self.overrides.items():
            if name not in values:
                raise InputError(f"--param {name}: no such parameter in the manifest")
            values[name] = value
        bound: Dict[str, int] = {}
        for name, value in values.items():
            if value is None:
                raise UninstantiatedParameterError(f"parameter {name} requires a value (use --param {name}=N)")
            if not isinstance(value, int) or isinstance(value, bool):
                raise ManifestError(f"parameter value must be an integer, got {value!r}", f"parameters.{name}")
            bound[name] = value
        return bound

    def expression(self, raw: Any, context: ParseContext, location: str) -> Optional[Poly]:
        text = str(raw).strip() if not isinstance(raw, bool) else None
        if not text:
            self.fail(ManifestError("empty or invalid expression", location))
            return None
        try:
            return parse_poly(text, context)
        except InputError as exc:
            self.fail(ManifestError(str(exc), location))
            return None

    def frame(self, n: int, context: ParseContext) -> Tuple[Optional[Frame], Tuple[str, ...]]:
        section = self.data.get("frame")
        if not isinstance(section, Mapping) or not section:
            raise ManifestError("expected a mapping of field names to component lists", "frame")
        names = tuple(str(k) for k in section)
        if len(names) >= n:
            raise ManifestError(f"rank must be < dimension (rank {len(names)}, dimension {n})", "frame")
        vecs = []
        for name, comps in section.items():
            if not isinstance(comps, list) or len(comps) != n:
                self.fail(ManifestError(f"expected a list of {n} components", f"frame.{name}"))
                continue
            polys = [self.expression(c, context, f"frame.{name}[{j + 1}]") for j, c in enumerate(comps)]
            if any(p is None for p in polys):
                continue
            vecs.append(VecField(tuple(polys)))
        if len(vecs) != len(names):
            return None, names
        try:
            return Frame(tuple(vecs)), names
        except AnalysisError as exc:
            self.fail(ManifestError(str(exc), "frame"))
            return None, names

    def volume(self, n: int, context: ParseContext) -> Optional[VolumeForm]:
        raw = self.data.get("volume", "1")
        if isinstance(raw, Mapping):
            raw = raw.get("density", "1")
        poly = self.expression(raw, context, "volume")
        if poly is None:
            return None
        try:
            return VolumeForm(poly)
        except AnalysisError as exc:
            self.fail(ManifestError(str(exc), "volume"))
            return None

    def submanifold(self, name: str, section: Any, n: int, coords: Tuple[str, ...],
                    parameters: Dict[str, int]) -> Optional[SubmanifoldSpec]:
        location = f"submanifold.{name}"
        if not isinstance(section, Mapping):
            self.fail(ManifestError("expected a mapping with 'zero' or 'parameters' and 'map'", location))
            return None
        if "zero" in section:
            zeroed = []
            for c in section["zero"] or []:
                if str(c) not in coords:
                    self.fail(ManifestError(f"unknown coordinate {c!r}", f"{location}.zero"))
                    return None
                zeroed.append(coords.index(str(c)))
            if len(zeroed) >= n:
                self.fail(ManifestError("a submanifold must keep at least one free coordinate", location))
                return None
            return SubmanifoldSpec.coordinate_subspace(name, n, zeroed, coords)
        param_names = [str(t) for t in section.get("parameters") or []]
        mapping = section.get("map")
        if not param_names or not isinstance(mapping, list) or len(mapping) != n:
            self.fail(ManifestError(f"needs 'parameters' and a 'map' of {n} expressions", location))
            return None
        clash = set(param_names) & (set(coords) | set(parameters))
        if clash:
            self.fail(ManifestError(f"parameter names clash with other names: {sorted(clash)}", location))
            return None
        context = ParseContext(param_names, dict(parameters))
        phi = [self.expression(c, context, f"{location}.map[{j + 1}]") for j, c in enumerate(mapping)]
        if any(p is None for p in phi):
            return None
        try:
            spec = SubmanifoldSpec(name, n, tuple(phi), tuple(param_names))
            spec.check_immersion()
        except AnalysisError as exc:
            self.fail(ManifestError(str(exc), location))
            return None
        return spec

    def point(self, name: str, raw: Any, n: int) -> Optional[Tuple[Fraction, ...]]:
        location = f"point.{name}"
        if not isinstance(raw, list) or len(raw) != n:
            self.fail(ManifestError(f"expected a list of {n} rationals", location))
            return None
        values = []
        for j, v in enumerate(raw):
            try:
                if isinstance(v, bool):
                    raise ValueError
                values.append(Fraction(str(v).strip()))
            except (ValueError, ZeroDivisionError):
                self.fail(ManifestError(f"not a rational: {v!r}", f"{location}[{j + 1}]"))
                return None
        return tuple(values)

    # ---------- Driver ----------
    def parse(self) -> Optional[Manifest]:
        for key in self.data:
            if key not in PLAIN_SECTIONS and not str(key).startswith(SECTION_PREFIXES):
                self.fail(ManifestError(f"unknown section {key!r}"))
        n, coords = self.space()
        parameters = self.parameters(coords)
        context = ParseContext(list(coords), dict(parameters))
        frame, frame_names = self.frame(n, context)
        volume = self.volume(n, context)
        submanifolds: Dict[str, SubmanifoldSpec] = {}
        points: Dict[str, Tuple[Fraction, ...]] = {}
        for key, section in self.data.items():
            key = str(key)
            if key.startswith("submanifold."):
                name = key[len("submanifold."):]
                spec = self.submanifold(name, section, n, coords, parameters)
                if spec is not None:
                    submanifolds[name] = spec
            elif key.startswith("point."):
                name = key[len("point."):]
                pt = self.point(name, section, n)
                if pt is not None:
                    points[name] = pt
        options = self.data.get("options") or {}
        try:
            Options().merged(options)
        except ManifestError as exc:
            self.fail(exc)
        if frame is None or volume is None or self.issues:
            return None
        return Manifest(name=str(self.data.get("name", "manifest")), dimension=n, coordinates=coords,
                        frame=frame, frame_names=frame_names, volume=volume, parameters=parameters,
                        submanifolds=submanifolds, points=points, options=dict(options),
                        sources={"frame": {str(k): [str(c) for c in v] for k, v in self.data["frame"].items()},
                                 "volume": str(self.data.get("volume", "1"))})


def _load_yaml(text: str) -> Mapping[str, Any]:
    try:
        data = yaml.load(text, Loader=_UniqueKeyLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else None
        raise ManifestError(f"invalid YAML: {getattr(exc, 'problem', exc)}", where) from None
    if not isinstance(data, Mapping):
        raise ManifestError("a manifest must be a mapping of sections")
    return data


def parse_manifest(text: str, overrides: Optional[Mapping[str, int]] = None) -> Manifest:
    """Parse and validate a manifest; the first problem found is raised."""
    manifest = _ManifestParser(_load_yaml(text), overrides or {}, strict=True).parse()
    logger.info("manifest %s: n = %d, m = %d, %d submanifolds, %d points", manifest.name,
                manifest.dimension, manifest.rank, len(manifest.submanifolds), len(manifest.points))
    return manifest


def manifest_issues(text: str, overrides: Optional[Mapping[str, int]] = None) -> List[str]:
    """Every problem found in a manifest (empty when it is valid)."""
    try:
        parser = _ManifestParser(_load_yaml(text), overrides or {}, strict=False)
        parser.parse()
    except InputError as exc:
        return [str(exc)]
    except AnalysisError as exc:
        return [str(exc)]
    return parser.issues


def parse_param_overrides(items: Optional[List[str]]) -> Dict[str, int]:
    """['k=3', 'j=2'] -> {'k': 3, 'j': 2}."""
    result: Dict[str, int] = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise InputError(f"--param expects name=integer, got {item!r}")
        try:
            result[name.strip()] = int(value)
        except ValueError:
            raise InputError(f"--param {name.strip()}: {value!r} is not an integer") from None
    return result
