"""
Loading of scenario and layer-stack files.

A scenario describes one rate computation:

    {
      "params": {"lambda": 1e-8, "r_c": 1e-7, "m_n": 1.6749e-27},
      "geometry": {"kind": "cube", "l": 1e-6, "density": 1e30, "density_unit": "nucleons/m3"},
      "lattice": {"l": 1e-8, "n_a": 1},
      "displacement": {"dx": 0, "dy": 0, "dz": 1e-10},
      "layers": [{"thickness": 5e-7, "density": 7.2e3}, {"thickness": 5e-7, "density": 2.2e3}]
    }

"params" (and "m_n" in it), "lattice" and "layers" are optional. "layers"
makes the body layered along z on the geometry's square x-y face; the
thicknesses must add up to its z side. A stack file describes a layered
body, either layer by layer or as an alternation:

    {"d": 8.2e-5, "layers": [{"thickness": 3.7e-7, "density": 7.2e3}, ...]}
    {"d": 0.34, "alternating": {"n_layers": 200000, "l_o": 2e-6, "l_e": 2e-6,
                                 "rho_o": 7.2e3, "rho_e": 2.2e3}}

Layer densities are in kg/m³. Every schema violation raises ScenarioError
naming the offending field, or the line for JSON syntax errors.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from . import settings
from .errors import CslRateError, ScenarioError
from .models import (
    DENSITY_UNITS,
    GEOMETRY_KINDS,
    Cube,
    Cuboid,
    Displacement,
    Geometry,
    Lattice,
    Layer,
    LayerStack,
    PhysParams,
    lattice_from_cuboid,
    to_nucleon_density,
)

logger = logging.getLogger(__name__)

# layer thicknesses must add up to the geometry within this relative tolerance
_FIT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Scenario:
    """
    Parsed scenario file.

    Attributes:
        params (PhysParams): CSL parameters
        geometry (Geometry): Body
        displacement (Displacement): Displacement vector
        lattice (Optional[Lattice]): Discretization of the body, if given
        lattice_spec (Optional[Dict[str, float]]): The "lattice" block as read
        stack (Optional[LayerStack]): Layered body, if given
    """
    params: PhysParams
    geometry: Geometry
    displacement: Displacement
    lattice: Optional[Lattice] = None
    lattice_spec: Optional[Dict[str, float]] = None
    stack: Optional[LayerStack] = None

    def to_dict(self) -> Dict[str, Any]:
        """Scenario in its file form, suitable for echoing in reports."""
        data = {
            "params": self.params.to_dict(),
            "geometry": self.geometry.to_dict(),
            "displacement": self.displacement.to_dict(),
        }
        if self.lattice_spec is not None:
            data["lattice"] = dict(self.lattice_spec)
        if self.stack is not None:
            data["layers"] = [{"thickness": layer.thickness, "density": layer.density} for layer in self.stack.layers]
        return data


@dataclass(frozen=True)
class StackFile:
    """
    Parsed stack file.

    Attributes:
        params (PhysParams): CSL parameters
        stack (LayerStack): Layered body
        notes (Dict[str, Any]): Free-form assumptions echoed in reports
    """
    params: PhysParams
    stack: LayerStack
    notes: Dict[str, Any] = field(default_factory=dict)


def _number(block: Mapping[str, Any], key: str, path: str, default: Optional[float] = None) -> float:
    name = f"{path}.{key}" if path else key
    if key not in block:
        if default is not None:
            return default
        raise ScenarioError("missing required number", field=name)
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", field=name)
    return float(value)


def _object(data: Mapping[str, Any], key: str, required: bool = True) -> Optional[Mapping[str, Any]]:
    if key not in data:
        if required:
            raise ScenarioError("missing required object", field=key)
        return None
    value = data[key]
    if not isinstance(value, dict):
        raise ScenarioError(f"expected an object, got {type(value).__name__}", field=key)
    return value


def _build(path: str, factory, *args, **kwargs):
    # model validation errors become schema errors located at path
    try:
        return factory(*args, **kwargs)
    except ScenarioError:
        raise
    except CslRateError as exc:
        raise ScenarioError(str(exc), field=path)


def parse_params(data: Mapping[str, Any]) -> PhysParams:
    block = _object(data, "params", required=False) or {}
    return _build(
        "params",
        PhysParams,
        lam=_number(block, "lambda", "params", settings.DEFAULT_LAMBDA),
        r_c=_number(block, "r_c", "params", settings.DEFAULT_R_C),
        m_n=_number(block, "m_n", "params", settings.NUCLEON_MASS),
    )


def parse_geometry(block: Mapping[str, Any], m_n: float) -> Geometry:
    kind = block.get("kind")
    if kind not in GEOMETRY_KINDS:
        raise ScenarioError(f"unknown kind {kind!r}; expected one of {sorted(GEOMETRY_KINDS)}", field="geometry.kind")
    unit = block.get("density_unit", "nucleons/m3")
    if unit not in DENSITY_UNITS:
        raise ScenarioError(f"unknown unit {unit!r}; expected one of {DENSITY_UNITS}", field="geometry.density_unit")
    density = to_nucleon_density(_number(block, "density", "geometry"), unit, m_n)

    cls = GEOMETRY_KINDS[kind]
    names = [name for name in cls.__dataclass_fields__ if name != "density_n"]
    dims = {name: _number(block, name, "geometry") for name in names}
    return _build("geometry", cls, density_n=density, **dims)


def parse_displacement(block: Mapping[str, Any]) -> Displacement:
    return _build(
        "displacement",
        Displacement,
        *(_number(block, key, "displacement", 0.0) for key in ("dx", "dy", "dz")),
    )


def parse_stack(block: Mapping[str, Any], path: str = "") -> LayerStack:
    """
    Build a LayerStack from its file form.

    Args:
        block (Mapping[str, Any]): Object with "d" and either "layers" or "alternating"
        path (str): Dotted location of block, used in error messages

    Returns:
        LayerStack: The layered body

    Raises:
        ScenarioError: If the block violates the schema
    """
    prefix = f"{path}." if path else ""
    d = _number(block, "d", path)
    if ("layers" in block) == ("alternating" in block):
        raise ScenarioError("give exactly one of 'layers' and 'alternating'", field=f"{prefix}layers")

    if "alternating" in block:
        alt = block["alternating"]
        where = f"{prefix}alternating"
        if not isinstance(alt, dict):
            raise ScenarioError("expected an object", field=where)
        n_layers = _number(alt, "n_layers", where)
        if n_layers != int(n_layers):
            raise ScenarioError(f"expected an integer, got {n_layers}", field=f"{where}.n_layers")
        values = {key: _number(alt, key, where) for key in ("l_o", "l_e", "rho_o", "rho_e")}
        return _build(where, LayerStack.alternating, int(n_layers), d=d, **values)

    where = f"{prefix}layers"
    return _build(where, LayerStack, d, _layer_rows(block["layers"], where))


def _layer_rows(rows: Any, where: str) -> Tuple[Layer, ...]:
    if not isinstance(rows, list) or not rows:
        raise ScenarioError("expected a non-empty list of layers", field=where)
    layers = []
    for index, row in enumerate(rows):
        item = f"{where}[{index}]"
        if not isinstance(row, dict):
            raise ScenarioError("expected an object", field=item)
        layers.append(_build(item, Layer, _number(row, "thickness", item), _number(row, "density", item)))
    return tuple(layers)


def parse_layers(rows: Any, geometry: Geometry) -> LayerStack:
    """
    Build the stack of a scenario's "layers" list.

    The layers are stacked along z on the geometry's square x-y face, and
    their thicknesses must add up to its z side.

    Args:
        rows (Any): The "layers" value, a list of {"thickness", "density"} objects
        geometry (Geometry): The scenario's body, a cube or a cuboid with lx = ly

    Returns:
        LayerStack: The layered body

    Raises:
        ScenarioError: If the list is malformed or does not fit the geometry
    """
    if not isinstance(geometry, (Cuboid, Cube)):
        raise ScenarioError(f"layers need a cube or cuboid geometry, got {geometry.kind}", field="layers")
    lx, ly, lz = geometry.sides
    if not math.isclose(lx, ly, rel_tol=_FIT_TOLERANCE):
        raise ScenarioError(f"layers need a square x-y face, got {lx:g} x {ly:g} m", field="layers")
    layers = _layer_rows(rows, "layers")
    total = math.fsum(layer.thickness for layer in layers)
    if not math.isclose(total, lz, rel_tol=_FIT_TOLERANCE):
        raise ScenarioError(f"layer thicknesses add up to {total:g} m, geometry z side is {lz:g} m", field="layers")
    return _build("layers", LayerStack, lx, layers)


def stack_to_dict(stack: LayerStack) -> Dict[str, Any]:
    """File form of a stack; alternating stacks are written compactly."""
    pattern = stack.alternating_pattern()
    if pattern is not None and len(stack.layers) > 2:
        rho_o, rho_e, l_o, l_e = pattern
        return {"d": stack.d, "alternating": {
            "n_layers": len(stack.layers), "l_o": l_o, "l_e": l_e, "rho_o": rho_o, "rho_e": rho_e,
        }}
    return {"d": stack.d, "layers": [{"thickness": layer.thickness, "density": layer.density}
                                     for layer in stack.layers]}


def _read_json(path: Path) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", line=exc.lineno)
    if not isinstance(data, dict):
        raise ScenarioError("top level must be an object", line=1)
    return data


def scenario_from_dict(data: Mapping[str, Any]) -> Scenario:
    params = parse_params(data)
    geometry = parse_geometry(_object(data, "geometry"), params.m_n)
    displacement = parse_displacement(_object(data, "displacement"))

    lattice, lattice_spec = None, None
    block = _object(data, "lattice", required=False)
    if block is not None:
        lattice_spec = {"l": _number(block, "l", "lattice"), "n_a": _number(block, "n_a", "lattice", 1.0)}
        lattice = _build("lattice", lattice_from_cuboid, geometry, lattice_spec["l"], lattice_spec["n_a"])

    stack = parse_layers(data["layers"], geometry) if "layers" in data else None
    return Scenario(params, geometry, displacement, lattice, lattice_spec, stack)


def load_scenario(path: Path) -> Scenario:
    """
    Read a scenario file.

    Args:
        path (Path): JSON file

    Returns:
        Scenario: Validated scenario

    Raises:
        ScenarioError: On JSON syntax or schema errors
        OSError: If the file cannot be read
    """
    scenario = scenario_from_dict(_read_json(path))
    logger.info("loaded %s scenario from %s", scenario.geometry.kind, path)
    return scenario


def load_stack(path: Path) -> StackFile:
    """
    Read a stack file.

    Raises:
        ScenarioError: On JSON syntax or schema errors
        OSError: If the file cannot be read
    """
    data = _read_json(path)
    params = parse_params(data)
    stack = parse_stack(data)
    notes = data.get("notes", {})
    if not isinstance(notes, dict):
        raise ScenarioError("expected an object", field="notes")
    logger.info("loaded stack of %d layers from %s", len(stack.layers), path)
    return StackFile(params=params, stack=stack, notes=notes)
