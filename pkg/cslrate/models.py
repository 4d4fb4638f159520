"""
Data models for collapse-rate calculations.

This module defines the value objects shared by every computation in the
package. All of them are frozen dataclasses: once built they are immutable
and can be handed to worker threads freely.

Key Classes:
    - PhysParams: CSL constants (λ, r_C, m_N) and the quadrature tolerance
    - Cuboid, Cube, Sphere, Cylinder: homogeneous bodies with a nucleon density
    - Displacement: rigid shift between the two superposed configurations
    - Lattice: cubic crystal of point-like sites
    - LayerStack: bodies layered along z on a square cross-section
    - RateResult: a rate, the method that produced it and its regime flags
    - DiffusionTensor: the η^{αβ} matrix of the small-displacement limit

Unit conventions:
    Lengths are meters, rates s⁻¹, densities nucleons/m³. Densities given in
    kg/m³ are divided by the nucleon mass when they are ingested, so the
    nucleon mass never enters a result computed from nucleon counts.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import settings
from .errors import InvalidGeometryError, InvalidParameterError, UnsupportedDisplacementError

DENSITY_UNITS = ("nucleons/m3", "kg/m3")


def to_nucleon_density(value: float, unit: str, m_n: float = settings.NUCLEON_MASS) -> float:
    """
    Convert a density to nucleons per cubic meter.

    Args:
        value (float): Density in the given unit
        unit (str): "nucleons/m3" or "kg/m3"
        m_n (float): Nucleon mass in kg used for the kg/m³ conversion

    Returns:
        float: Nucleon number density

    Raises:
        InvalidParameterError: If the unit is unknown
    """
    if unit == "nucleons/m3":
        return float(value)
    if unit == "kg/m3":
        return float(value) / m_n
    raise InvalidParameterError(f"Unknown density unit {unit!r}; expected one of {DENSITY_UNITS}")


def _require_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class PhysParams:
    """
    CSL model constants and numerical tolerance.

    Attributes:
        lam (float): Collapse rate λ in s⁻¹ (serialized as "lambda")
        r_c (float): Localization distance r_C in m
        m_n (float): Nucleon mass in kg
        rel_tol (float): Relative tolerance for internal quadratures, in (0, 1e-3)
    """
    lam: float = settings.DEFAULT_LAMBDA
    r_c: float = settings.DEFAULT_R_C
    m_n: float = settings.NUCLEON_MASS
    rel_tol: float = settings.DEFAULT_REL_TOL

    def __post_init__(self):
        _require_positive("lambda", self.lam)
        _require_positive("r_c", self.r_c)
        _require_positive("m_n", self.m_n)
        if not 0 < self.rel_tol < 1e-3:
            raise InvalidParameterError(f"rel_tol must lie in (0, 1e-3), got {self.rel_tol}")

    def to_dict(self) -> Dict[str, float]:
        return {"lambda": self.lam, "r_c": self.r_c, "m_n": self.m_n}


@dataclass(frozen=True)
class Displacement:
    """
    Rigid displacement Δ between the two superposed configurations.

    Attributes:
        dx (float): x component in m
        dy (float): y component in m
        dz (float): z component in m
    """
    dx: float = 0.0
    dy: float = 0.0
    dz: float = 0.0

    def __post_init__(self):
        for name in ("dx", "dy", "dz"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"displacement {name} must be finite")

    @classmethod
    def along_z(cls, delta: float) -> "Displacement":
        return cls(0.0, 0.0, delta)

    @property
    def components(self) -> Tuple[float, float, float]:
        return (self.dx, self.dy, self.dz)

    @property
    def magnitude(self) -> float:
        return math.sqrt(self.dx * self.dx + self.dy * self.dy + self.dz * self.dz)

    @property
    def is_zero(self) -> bool:
        return self.dx == 0 and self.dy == 0 and self.dz == 0

    @property
    def along_z_only(self) -> bool:
        return self.dx == 0 and self.dy == 0

    def to_dict(self) -> Dict[str, float]:
        return {"dx": self.dx, "dy": self.dy, "dz": self.dz}


@dataclass(frozen=True, kw_only=True)
class Geometry:
    """
    Homogeneous rigid body.

    Concrete shapes subclass this and provide their volume, their overlap
    with a displaced copy and their characteristic size.

    Attributes:
        density_n (float): Nucleon number density in nucleons/m³
    """
    density_n: float

    kind = "geometry"

    def __post_init__(self):
        _require_positive("density", self.density_n)

    @property
    def volume(self) -> float:
        raise NotImplementedError

    @property
    def characteristic_radius(self) -> float:
        """Half of the smallest linear extent of the body."""
        raise NotImplementedError

    def overlap_volume(self, disp: Displacement) -> float:
        """Volume shared by the body and its copy shifted by disp."""
        raise NotImplementedError

    def dimensions(self) -> Dict[str, float]:
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, **self.dimensions(),
                "density": self.density_n, "density_unit": "nucleons/m3"}


@dataclass(frozen=True, kw_only=True)
class Cuboid(Geometry):
    """
    Rectangular box with sides along the axes.

    Attributes:
        lx (float): Side along x in m
        ly (float): Side along y in m
        lz (float): Side along z in m
    """
    lx: float
    ly: float
    lz: float

    kind = "cuboid"

    def __post_init__(self):
        super().__post_init__()
        for name, value in self.dimensions().items():
            _require_positive(name, value)

    @property
    def sides(self) -> Tuple[float, float, float]:
        return (self.lx, self.ly, self.lz)

    @property
    def volume(self) -> float:
        return self.lx * self.ly * self.lz

    @property
    def characteristic_radius(self) -> float:
        return 0.5 * min(self.sides)

    def overlap_volume(self, disp: Displacement) -> float:
        return math.prod(max(0.0, side - abs(d)) for side, d in zip(self.sides, disp.components))

    def dimensions(self) -> Dict[str, float]:
        return {"lx": self.lx, "ly": self.ly, "lz": self.lz}


@dataclass(frozen=True, kw_only=True)
class Cube(Geometry):
    """
    Cube of side l.

    Attributes:
        l (float): Side in m
    """
    l: float

    kind = "cube"

    def __post_init__(self):
        super().__post_init__()
        _require_positive("l", self.l)

    @property
    def sides(self) -> Tuple[float, float, float]:
        return (self.l, self.l, self.l)

    @property
    def volume(self) -> float:
        return self.l ** 3

    @property
    def characteristic_radius(self) -> float:
        return 0.5 * self.l

    def overlap_volume(self, disp: Displacement) -> float:
        return math.prod(max(0.0, self.l - abs(d)) for d in disp.components)

    def as_cuboid(self) -> Cuboid:
        return Cuboid(lx=self.l, ly=self.l, lz=self.l, density_n=self.density_n)

    def dimensions(self) -> Dict[str, float]:
        return {"l": self.l}


@dataclass(frozen=True, kw_only=True)
class Sphere(Geometry):
    """
    Ball of radius r.

    Attributes:
        r (float): Radius in m
    """
    r: float

    kind = "sphere"

    def __post_init__(self):
        super().__post_init__()
        _require_positive("r", self.r)

    @property
    def volume(self) -> float:
        return 4.0 * math.pi / 3.0 * self.r ** 3

    @property
    def characteristic_radius(self) -> float:
        return self.r

    def overlap_volume(self, disp: Displacement) -> float:
        d = disp.magnitude
        if d >= 2.0 * self.r:
            return 0.0
        # lens formed by two equal balls at distance d
        return math.pi * (4.0 * self.r + d) * (2.0 * self.r - d) ** 2 / 12.0

    def dimensions(self) -> Dict[str, float]:
        return {"r": self.r}


@dataclass(frozen=True, kw_only=True)
class Cylinder(Geometry):
    """
    Circular cylinder with its axis along z.

    Attributes:
        r (float): Radius in m
        l (float): Length along z in m
    """
    r: float
    l: float

    kind = "cylinder"

    def __post_init__(self):
        super().__post_init__()
        _require_positive("r", self.r)
        _require_positive("l", self.l)

    @property
    def volume(self) -> float:
        return math.pi * self.r ** 2 * self.l

    @property
    def characteristic_radius(self) -> float:
        return min(self.r, 0.5 * self.l)

    def overlap_volume(self, disp: Displacement) -> float:
        """
        Overlap with the displaced copy.

        Raises:
            UnsupportedDisplacementError: For oblique displacements, which are
                neither along the axis nor perpendicular to it
        """
        if disp.along_z_only:
            return math.pi * self.r ** 2 * max(0.0, self.l - abs(disp.dz))
        if disp.dz != 0:
            raise UnsupportedDisplacementError(
                "cylinder overlap is defined for axial or transverse displacements only"
            )
        t = math.hypot(disp.dx, disp.dy)
        if t >= 2.0 * self.r:
            return 0.0
        lens = 2.0 * self.r ** 2 * math.acos(t / (2.0 * self.r)) - 0.5 * t * math.sqrt(4.0 * self.r ** 2 - t * t)
        return lens * self.l

    def dimensions(self) -> Dict[str, float]:
        return {"r": self.r, "l": self.l}


GEOMETRY_KINDS = {cls.kind: cls for cls in (Cuboid, Cube, Sphere, Cylinder)}


def cuboid_sides(geom: Geometry) -> Tuple[float, float, float]:
    """
    Sides of a cuboidal body.

    Raises:
        InvalidGeometryError: If geom is not a cuboid or cube
    """
    if isinstance(geom, (Cuboid, Cube)):
        return geom.sides
    raise InvalidGeometryError(f"operation needs a cuboid or cube, got {geom.kind}")


def nucleon_count(geom: Geometry) -> float:
    """Total number of nucleons N_TOT = density × volume."""
    return geom.density_n * geom.volume


@dataclass(frozen=True)
class Lattice:
    """
    Cubic crystal of point-like sites.

    Attributes:
        l (float): Lattice constant in m
        nx (int): Sites along x
        ny (int): Sites along y
        nz (int): Sites along z
        n_a (float): Nucleons per site
    """
    l: float
    nx: int
    ny: int
    nz: int
    n_a: float = 1.0

    def __post_init__(self):
        _require_positive("lattice constant", self.l)
        _require_positive("n_a", self.n_a)
        for name in ("nx", "ny", "nz"):
            count = getattr(self, name)
            if int(count) != count or count < 1:
                raise InvalidParameterError(f"{name} must be a positive integer, got {count}")

    @property
    def counts(self) -> Tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def n_sites(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def n_total(self) -> float:
        return self.n_a * self.n_sites

    @property
    def dims(self) -> Tuple[float, float, float]:
        """Realized body sides nα·l."""
        return tuple(n * self.l for n in self.counts)

    def positions(self) -> np.ndarray:
        """Site coordinates as an (n_sites, 3) array, first site at the origin."""
        grid = np.indices(self.counts).reshape(3, -1).T
        return grid.astype(float) * self.l

    def to_dict(self) -> Dict[str, float]:
        return {"l": self.l, "n_a": self.n_a}


def lattice_from_cuboid(geom: Geometry, l: float, n_a: float) -> Lattice:
    """
    Discretize a cuboid into a cubic lattice.

    Site counts are round(Lα/l) with Python's round-half-to-even; the realized
    sides nα·l are available from Lattice.dims.

    Args:
        geom (Geometry): Cuboid or cube
        l (float): Lattice constant in m
        n_a (float): Nucleons per site

    Returns:
        Lattice: The discretized body

    Raises:
        InvalidGeometryError: If geom is not cuboidal
        InvalidParameterError: If l exceeds a side
    """
    sides = cuboid_sides(geom)
    _require_positive("lattice constant", l)
    if l > min(sides):
        raise InvalidParameterError(f"lattice constant {l} exceeds the smallest side {min(sides)}")
    counts = [max(1, round(side / l)) for side in sides]
    return Lattice(l=l, nx=counts[0], ny=counts[1], nz=counts[2], n_a=n_a)


@dataclass(frozen=True)
class Layer:
    """
    One homogeneous slab of a layered body.

    Attributes:
        thickness (float): Extent along z in m
        density (float): Mass density in kg/m³
    """
    thickness: float
    density: float

    def __post_init__(self):
        _require_positive("layer thickness", self.thickness)
        if not (math.isfinite(self.density) and self.density >= 0):
            raise InvalidParameterError(f"layer density must be >= 0, got {self.density}")


@dataclass(frozen=True)
class LayerStack:
    """
    Body made of slabs stacked along z on a square d × d cross-section.

    Attributes:
        d (float): Side of the square face in m
        layers (Tuple[Layer, ...]): Slabs ordered from z = 0 upwards
    """
    d: float
    layers: Tuple[Layer, ...]

    def __post_init__(self):
        _require_positive("d", self.d)
        if not self.layers:
            raise InvalidParameterError("a layer stack needs at least one layer")
        object.__setattr__(self, "layers", tuple(self.layers))

    @classmethod
    def uniform(cls, d: float, length: float, density: float) -> "LayerStack":
        return cls(d, (Layer(length, density),))

    @classmethod
    def alternating(cls, n_layers: int, l_o: float, l_e: float,
                    rho_o: float, rho_e: float, d: float) -> "LayerStack":
        """Stack of n_layers slabs alternating (l_o, rho_o), (l_e, rho_e), starting with the former."""
        if n_layers < 1:
            raise InvalidParameterError(f"n_layers must be >= 1, got {n_layers}")
        odd, even = Layer(l_o, rho_o), Layer(l_e, rho_e)
        return cls(d, tuple(odd if i % 2 == 0 else even for i in range(n_layers)))

    @property
    def boundaries(self) -> np.ndarray:
        """Cumulative positions z_0 = 0 < z_1 < ... < z_n."""
        return np.concatenate(([0.0], np.cumsum([layer.thickness for layer in self.layers])))

    @property
    def total_length(self) -> float:
        return float(self.boundaries[-1])

    @property
    def densities(self) -> np.ndarray:
        return np.array([layer.density for layer in self.layers], dtype=float)

    @property
    def mean_density(self) -> float:
        """Mass-weighted average density over the stack length."""
        thickness = np.array([layer.thickness for layer in self.layers])
        return float(np.dot(thickness, self.densities) / thickness.sum())

    def alternating_pattern(self) -> Optional[Tuple[float, float, float, float]]:
        """
        Detect a two-density alternation.

        Returns:
            Optional[Tuple]: (rho_o, rho_e, l_o, l_e) when odd and even slabs
            each share one density and one thickness, otherwise None
        """
        if len(self.layers) < 2:
            return None
        odd, even = self.layers[0::2], self.layers[1::2]
        if len(set(odd)) != 1 or len(set(even)) != 1:
            return None
        return (odd[0].density, even[0].density, odd[0].thickness, even[0].thickness)


class Method(Enum):
    """Tag identifying how a rate was obtained."""
    CONTINUOUS_EXACT = "continuous"
    CONTINUOUS_SMALL_DELTA = "small-delta"
    DISCRETE = "discrete"
    GPR = "gpr"
    ADLER = "adler"


@dataclass(frozen=True)
class RegimeFlag:
    """
    Outcome of one validity predicate.

    Attributes:
        name (str): Predicate name, e.g. "delta_regime"
        satisfied (bool): Whether the configuration lies inside the regime
        detail (str): Human-readable statement of the requirement
    """
    name: str
    satisfied: bool
    detail: str = ""

    @property
    def status(self) -> str:
        return "satisfied" if self.satisfied else "violated"


@dataclass(frozen=True)
class RateResult:
    """
    A collapse rate together with its provenance.

    Attributes:
        gamma (float): Rate in s⁻¹
        method (Method): Formula or algorithm used
        validity (Tuple[RegimeFlag, ...]): Regime predicates evaluated for the inputs
        error_estimate (Optional[float]): Absolute uncertainty in s⁻¹, if known
    """
    gamma: float
    method: Method
    validity: Tuple[RegimeFlag, ...] = field(default_factory=tuple)
    error_estimate: Optional[float] = None

    @property
    def all_valid(self) -> bool:
        return all(flag.satisfied for flag in self.validity)

    def violated(self) -> List[str]:
        return [flag.name for flag in self.validity if not flag.satisfied]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma,
            "method": self.method.value,
            "validity": {flag.name: flag.status for flag in self.validity},
            "error_estimate": self.error_estimate,
        }


@dataclass(frozen=True)
class DiffusionTensor:
    """
    3×3 diffusion tensor η^{αβ} in m⁻²s⁻¹.

    Attributes:
        eta (np.ndarray): Symmetric matrix indexed by (x, y, z)
        method (str): "discrete", "momentum-space" or "bruteforce"
    """
    eta: np.ndarray
    method: str

    @property
    def zz(self) -> float:
        return float(self.eta[2, 2])

    @property
    def trace(self) -> float:
        return float(np.trace(self.eta))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.eta).min())

    def to_dict(self) -> Dict[str, Any]:
        return {"eta": self.eta.tolist(), "method": self.method}
