"""
Figure datasets and parameter sweeps.

Every table has the columns

    sweep_value, gamma_c, gamma_d, gamma_gpr, gamma_adler, gamma_alt_geometry

(series a figure does not show are left empty) and is written as CSV behind
'#' comment lines that record the parameters. Files carry no timestamps, so
the same inputs always give the same bytes.

Key Classes:
    - FigureBuilder: tables for the named figures, defaults overridable
    - SweepSpec: one-variable grid used by the sweep command
    - Table: a DataFrame plus its comment lines
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from . import settings
from .continuum_rates import gamma_adler, gamma_continuous, gamma_cuboid, gamma_gpr, gamma_small_delta
from .diffusion import eta_zz_layered, layering_reference
from .errors import InvalidGeometryError, InvalidParameterError
from .euler_maclaurin import body_regime, discrete_relative_error, gamma_discrete_em, relative_error_predict
from .lattice_rates import discrete_drop_scan, gamma_discrete
from .models import (
    Cube,
    Cuboid,
    Cylinder,
    Displacement,
    Geometry,
    Lattice,
    LayerStack,
    PhysParams,
    Sphere,
    lattice_from_cuboid,
)
from .scenario import Scenario

logger = logging.getLogger(__name__)

COLUMNS = ("sweep_value", "gamma_c", "gamma_d", "gamma_gpr", "gamma_adler", "gamma_alt_geometry")
LAYER_COLUMNS = ("sweep_value", "eta_total", "eta_0", "eta_1", "ratio")
EM_COLUMNS = ("l_over_rc", "measured", "em_corrected", "predicted")

FIGURES = ("fig1L", "fig1R", "fig2L", "fig2R", "fig5", "fig6", "fig7L", "fig7R", "fig8L", "fig8R")
SWEEP_VARIABLES = ("L", "Delta", "l", "N_layers")

# lengths in units of r_C, densities in nucleons/m³
FIGURE_DEFAULTS: Dict[str, Dict[str, float]] = {
    "fig1L": {"density": 1e30, "delta": 1e-3, "min": 1e-2, "max": 1e3, "points": 61},
    "fig1R": {"density": 1e30, "delta": 1e3, "min": 1e-2, "max": 1e5, "points": 71},
    "fig2L": {"density": 1e30, "delta": 1e-3, "d": 10.0, "min": 1e-2, "max": 1e4, "points": 61},
    "fig2R": {"density": 1e30, "delta": 1e3, "d": 10.0, "min": 1e-2, "max": 1e5, "points": 71},
    "fig5": {"density": 1e30, "d": 10.0, "L": 20.0, "min": 1e-3, "max": 1e3, "points": 61},
    "fig6": {"density": 1e15, "d": 1e2, "L": 1e3, "l": 1e2, "min": 0.0, "max": 8e2, "points": 801},
    "fig7L": {"density": 1e30, "delta": 1e-3, "min": 1e-2, "max": 1e3, "points": 61},
    "fig7R": {"density": 1e30, "delta": 1e-3, "d": 10.0, "min": 1.0, "max": 1e2, "points": 100},
    "fig8L": {"density": 1e21, "delta": 1e-3, "l": 1.0, "min": 1.0, "max": 1e2, "points": 40},
    "fig8R": {"density": 1e18, "delta": 1e-3, "l": 10.0, "min": 1e2, "max": 1e3, "points": 40},
}


@dataclass
class Table:
    """
    Result table with the comment lines written above it.

    Attributes:
        frame (pd.DataFrame): Data, one row per grid point
        comments (List[str]): Lines written as '# line' before the header
    """
    frame: pd.DataFrame
    comments: List[str] = field(default_factory=list)

    def write(self, path: Path) -> None:
        """Write the comments and the CSV; missing values become empty fields."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for line in self.comments:
                fh.write(f"# {line}\n")
            self.frame.to_csv(fh, index=False, na_rep="", lineterminator="\n")
        logger.info("wrote %d rows to %s", len(self.frame), path)


@dataclass(frozen=True)
class SweepSpec:
    """
    Grid over one scenario variable.

    Attributes:
        variable (str): "L", "Delta", "l" or "N_layers"
        minimum (float): First grid value (m, or a layer count)
        maximum (float): Last grid value
        points (int): Number of grid points, at least 2
        scale (str): "linear" or "log"
    """
    variable: str
    minimum: float
    maximum: float
    points: int
    scale: str = "log"

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise InvalidParameterError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if self.scale not in ("linear", "log"):
            raise InvalidParameterError(f"sweep scale must be 'linear' or 'log', got {self.scale!r}")
        if not self.minimum < self.maximum:
            raise InvalidParameterError(f"sweep needs min < max, got {self.minimum} and {self.maximum}")
        if self.points < 2:
            raise InvalidParameterError(f"sweep needs at least 2 points, got {self.points}")
        if self.scale == "log" and self.minimum <= 0:
            raise InvalidParameterError(f"log sweep needs min > 0, got {self.minimum}")

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.minimum, self.maximum, self.points)
        return np.linspace(self.minimum, self.maximum, self.points)


def _row(sweep_value: float, **gammas: Optional[float]) -> Dict[str, float]:
    row = {column: math.nan for column in COLUMNS}
    row["sweep_value"] = sweep_value
    for column, value in gammas.items():
        if value is not None:
            row[column] = value
    return row


def _frame(rows: Sequence[Dict[str, float]], columns: Sequence[str] = COLUMNS) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=list(columns))


def _lattice_counts(max_count: float, min_count: float, points: int) -> List[int]:
    # distinct integer site counts spread geometrically
    grid = np.geomspace(min_count, max_count, points)
    return sorted({max(1, int(round(value))) for value in grid})


class FigureBuilder:
    """
    Builds the data behind each figure.

    Defaults come from FIGURE_DEFAULTS with lengths in units of r_C. Any of
    density, d, delta, l (in m, density in nucleons/m³) and points may be
    overridden.
    """

    def __init__(self, params: Optional[PhysParams] = None, overrides: Optional[Dict[str, float]] = None):
        """
        Initialize the builder.

        Args:
            params (Optional[PhysParams]): CSL parameters, defaults when omitted
            overrides (Optional[Dict[str, float]]): Replacement values keyed by
                density, d, delta, l, points; None entries are ignored
        """
        self.params = params or PhysParams()
        self.overrides = {key: value for key, value in (overrides or {}).items() if value is not None}

    def _setting(self, name: str, key: str) -> float:
        # an override in SI units, else the default (scaled by r_C for lengths)
        if key in self.overrides:
            return float(self.overrides[key])
        value = FIGURE_DEFAULTS[name][key]
        if key in ("density", "points"):
            return value
        return value * self.params.r_c

    def _points(self, name: str) -> int:
        return int(self._setting(name, "points"))

    def _comments(self, name: str, sweep: str, **lengths: float) -> List[str]:
        lines = [
            f"figure: {name}",
            f"density: {self._setting(name, 'density'):g} nucleons/m3",
            f"r_c: {self.params.r_c:g} m",
            f"lambda: {self.params.lam:g} 1/s",
        ]
        lines += [f"{key}: {value:g} m" for key, value in lengths.items()]
        lines.append(f"sweep_value: {sweep}")
        return lines

    def build(self, name: str) -> Table:
        """
        Build the table for one figure.

        Args:
            name (str): One of FIGURES

        Returns:
            Table: Data and comment lines

        Raises:
            InvalidParameterError: If the name is unknown
        """
        builders: Dict[str, Callable[[str], Table]] = {
            "fig1L": self._cube_sizes,
            "fig1R": self._cube_sizes,
            "fig2L": self._cuboid_lengths,
            "fig2R": self._cuboid_lengths,
            "fig5": self._displacements,
            "fig6": self._drops,
            "fig7L": self._cube_sphere,
            "fig7R": self._cuboid_cylinder,
            "fig8L": self._discrete_cubes,
            "fig8R": self._discrete_cubes,
        }
        if name not in builders:
            raise InvalidParameterError(f"unknown figure {name!r}; expected one of {FIGURES}")
        logger.info("building %s", name)
        return builders[name](name)

    def _grid(self, name: str, scale: str = "log") -> np.ndarray:
        spec = SweepSpec("L", self._setting(name, "min"), self._setting(name, "max"), self._points(name), scale)
        return spec.grid()

    def _literature_row(self, sweep_value: float, geom: Geometry, disp: Displacement,
                        alt: Optional[float] = None) -> Dict[str, float]:
        return _row(
            sweep_value,
            gamma_c=gamma_continuous(geom, disp, self.params).gamma,
            gamma_gpr=gamma_gpr(geom, disp, self.params).gamma,
            gamma_adler=gamma_adler(geom, disp, self.params).gamma,
            gamma_alt_geometry=alt,
        )

    def _cube_sizes(self, name: str) -> Table:
        r_c, density = self.params.r_c, self._setting(name, "density")
        disp = Displacement.along_z(self._setting(name, "delta"))
        rows = settings.parallel_map(
            lambda side: self._literature_row(side / r_c, Cube(l=side, density_n=density), disp),
            self._grid(name),
        )
        return Table(_frame(rows), self._comments(name, "L / r_C", Delta=disp.dz))

    def _cuboid_lengths(self, name: str) -> Table:
        r_c, density = self.params.r_c, self._setting(name, "density")
        d = self._setting(name, "d")
        disp = Displacement.along_z(self._setting(name, "delta"))
        rows = settings.parallel_map(
            lambda length: self._literature_row(
                length / r_c, Cuboid(lx=d, ly=d, lz=length, density_n=density), disp),
            self._grid(name),
        )
        comments = self._comments(name, "L / r_C", d=d, Delta=disp.dz)
        comments.append("gamma_gpr is unscaled; plot gamma_gpr / 1e4 to compare with gamma_c")
        return Table(_frame(rows), comments)

    def _displacements(self, name: str) -> Table:
        r_c, density = self.params.r_c, self._setting(name, "density")
        d, length = self._setting(name, "d"), self._setting(name, "L")
        geom = Cuboid(lx=d, ly=d, lz=length, density_n=density)
        rows = settings.parallel_map(
            lambda delta: self._literature_row(delta / r_c, geom, Displacement.along_z(delta)),
            self._grid(name),
        )
        return Table(_frame(rows), self._comments(name, "Delta / r_C", d=d, L=length))

    def _drops(self, name: str) -> Table:
        r_c, density = self.params.r_c, self._setting(name, "density")
        d, length, l = self._setting(name, "d"), self._setting(name, "L"), self._setting(name, "l")
        geom = Cuboid(lx=d, ly=d, lz=length, density_n=density)
        lat = lattice_from_cuboid(geom, l, density * l ** 3)
        deltas = self._grid(name, scale="linear")
        scan = discrete_drop_scan(lat, deltas, self.params)
        rows = [
            _row(delta / r_c, gamma_c=gamma_cuboid(geom, Displacement.along_z(delta), self.params).gamma,
                 gamma_d=gamma_d)
            for delta, gamma_d in scan.rows()
        ]
        comments = self._comments(name, "Delta / r_C", d=d, L=length, l=l)
        comments.append(f"minima at Delta / l = {', '.join(f'{x / l:.3g}' for x in scan.minima_deltas)}")
        comments.append(f"line through minima: slope {scan.slope:.6g} 1/(s m), "
                        f"intercept {scan.intercept:.6g} 1/s, R^2 {scan.r_squared:.6f}")
        return Table(_frame(rows), comments)

    def _cube_sphere(self, name: str) -> Table:
        r_c, density = self.params.r_c, self._setting(name, "density")
        disp = Displacement.along_z(self._setting(name, "delta"))

        def row(side: float) -> Dict[str, float]:
            radius = side * (3.0 / (4.0 * math.pi)) ** (1.0 / 3.0)
            sphere = gamma_small_delta(Sphere(r=radius, density_n=density), disp, self.params).gamma
            return _row(side / r_c, gamma_c=gamma_cuboid(Cube(l=side, density_n=density), disp, self.params).gamma,
                        gamma_alt_geometry=sphere)

        comments = self._comments(name, "L / r_C", Delta=disp.dz)
        comments.append("gamma_c: cube of side L; gamma_alt_geometry: sphere of equal volume")
        return Table(_frame(settings.parallel_map(row, self._grid(name))), comments)

    def _cuboid_cylinder(self, name: str) -> Table:
        r_c, density = self.params.r_c, self._setting(name, "density")
        d = self._setting(name, "d")
        disp = Displacement.along_z(self._setting(name, "delta"))
        radius = d / math.sqrt(math.pi)

        def row(length: float) -> Dict[str, float]:
            cuboid = Cuboid(lx=d, ly=d, lz=length, density_n=density)
            cylinder = Cylinder(r=radius, l=length, density_n=density)
            return _row(length / r_c, gamma_c=gamma_cuboid(cuboid, disp, self.params).gamma,
                        gamma_alt_geometry=gamma_small_delta(cylinder, disp, self.params).gamma)

        comments = self._comments(name, "L / r_C", d=d, Delta=disp.dz)
        comments.append("gamma_c: d x d x L cuboid; gamma_alt_geometry: cylinder of equal cross-section and length")
        return Table(_frame(settings.parallel_map(row, self._grid(name, scale="linear"))), comments)

    def _discrete_cubes(self, name: str) -> Table:
        r_c, density = self.params.r_c, self._setting(name, "density")
        l = self._setting(name, "l")
        disp = Displacement.along_z(self._setting(name, "delta"))
        n_a = density * l ** 3
        counts = _lattice_counts(self._setting(name, "max") / l, self._setting(name, "min") / l, self._points(name))
        skipped = []

        def row(count: int) -> Dict[str, float]:
            lat = Lattice(l=l, nx=count, ny=count, nz=count, n_a=n_a)
            gamma_c = gamma_cuboid(Cube(l=count * l, density_n=density), disp, self.params).gamma
            if lat.n_sites > settings.FIGURE_MAX_SITES:
                skipped.append(count)
                return _row(count * l / r_c, gamma_c=gamma_c)
            return _row(count * l / r_c, gamma_c=gamma_c, gamma_d=gamma_discrete(lat, disp, self.params).gamma)

        rows = settings.parallel_map(row, counts)
        comments = self._comments(name, "L / r_C", l=l, Delta=disp.dz)
        if skipped:
            comments.append(f"gamma_d left empty above {settings.FIGURE_MAX_SITES:g} sites")
        return Table(_frame(rows), comments)


def _scaled_geometry(geom: Geometry, length: float) -> Geometry:
    if isinstance(geom, Cube):
        return replace(geom, l=length)
    if isinstance(geom, Cuboid):
        return replace(geom, lz=length)
    raise InvalidGeometryError(f"an L sweep needs a cube or cuboid, got {geom.kind}")


def _scenario_row(scenario: Scenario, sweep_value: float, geom: Geometry, disp: Displacement,
                  lattice: Optional[Lattice]) -> Dict[str, float]:
    params = scenario.params
    gamma_d = None
    if lattice is not None and lattice.n_sites <= settings.FIGURE_MAX_SITES:
        gamma_d = gamma_discrete(lattice, disp, params).gamma
    return _row(
        sweep_value,
        gamma_c=gamma_continuous(geom, disp, params).gamma,
        gamma_d=gamma_d,
        gamma_gpr=gamma_gpr(geom, disp, params).gamma,
        gamma_adler=gamma_adler(geom, disp, params).gamma,
    )


def sweep_scenario(scenario: Scenario, spec: SweepSpec) -> Table:
    """
    Sweep L, Delta or l of a scenario.

    L replaces the side of a cube or the z side of a cuboid. Delta scales the
    displacement along its own direction (z when it is zero). l rebuilds the
    lattice at the same nucleon density, n_A = ρ l³, and needs a scenario
    with a "lattice" block.

    Args:
        scenario (Scenario): Base scenario
        spec (SweepSpec): Grid over "L", "Delta" or "l" in m

    Returns:
        Table: Figure columns, sweep_value in m

    Raises:
        InvalidGeometryError: For an L sweep on a body that is not cuboidal, or a layered scenario
        InvalidParameterError: For an l sweep without a lattice block, or an N_layers spec
    """
    if scenario.stack is not None:
        raise InvalidGeometryError("layered scenarios are swept by layer count from a stack file")
    geom, disp = scenario.geometry, scenario.displacement
    spec_lattice = scenario.lattice_spec
    direction = np.array(disp.components) / disp.magnitude if not disp.is_zero else np.array([0.0, 0.0, 1.0])

    def lattice_for(body: Geometry, l: Optional[float] = None) -> Optional[Lattice]:
        if spec_lattice is None:
            return None
        if l is None:
            return lattice_from_cuboid(body, spec_lattice["l"], spec_lattice["n_a"])
        return lattice_from_cuboid(body, l, body.density_n * l ** 3)

    if spec.variable == "L":
        def row(value: float) -> Dict[str, float]:
            body = _scaled_geometry(geom, value)
            return _scenario_row(scenario, value, body, disp, lattice_for(body))
    elif spec.variable == "Delta":
        lattice = lattice_for(geom)

        def row(value: float) -> Dict[str, float]:
            return _scenario_row(scenario, value, geom, Displacement(*(direction * value)), lattice)
    elif spec.variable == "l":
        if spec_lattice is None:
            raise InvalidParameterError("an l sweep needs a scenario with a lattice block")

        def row(value: float) -> Dict[str, float]:
            return _scenario_row(scenario, value, geom, disp, lattice_for(geom, value))
    else:
        raise InvalidParameterError("N_layers sweeps run on stack files, see sweep_layers")

    rows = settings.parallel_map(row, spec.grid())
    comments = [
        f"sweep: {spec.variable} from {spec.minimum:g} to {spec.maximum:g} ({spec.points} points, {spec.scale})",
        f"geometry: {geom.kind} {geom.dimensions()}",
        f"density: {geom.density_n:g} nucleons/m3",
        f"r_c: {scenario.params.r_c:g} m",
        f"lambda: {scenario.params.lam:g} 1/s",
        f"sweep_value: {spec.variable} in m",
    ]
    return Table(_frame(rows), comments)


def sweep_layers(stack: LayerStack, params: PhysParams, spec: SweepSpec) -> Table:
    """
    Sweep the layer count of an alternating stack.

    Each grid value is rounded to an integer layer count; the ratio is taken
    against a uniform body of the same length at density (ϱ_o + ϱ_e)/2.

    Raises:
        InvalidGeometryError: If the stack is not a two-density alternation
    """
    pattern = stack.alternating_pattern()
    if pattern is None:
        raise InvalidGeometryError("an N_layers sweep needs an alternating stack")
    rho_o, rho_e, l_o, l_e = pattern
    counts = sorted({max(1, int(round(value))) for value in spec.grid()})

    def row(count: int) -> Dict[str, float]:
        layered = LayerStack.alternating(count, l_o, l_e, rho_o, rho_e, stack.d)
        eta = eta_zz_layered(layered, params)
        uniform = eta_zz_layered(layering_reference(layered), params).total
        eta_0, eta_1 = eta.orders if eta.orders is not None else (math.nan, math.nan)
        return {"sweep_value": count, "eta_total": eta.total, "eta_0": eta_0, "eta_1": eta_1,
                "ratio": eta.total / uniform}

    rows = settings.parallel_map(row, counts)
    comments = [
        f"sweep: N_layers from {counts[0]} to {counts[-1]}",
        f"d: {stack.d:g} m",
        f"rho_o: {rho_o:g} kg/m3, rho_e: {rho_e:g} kg/m3, l_o: {l_o:g} m, l_e: {l_e:g} m",
        f"r_c: {params.r_c:g} m",
        f"lambda: {params.lam:g} 1/s",
        "ratio: against a uniform body at (rho_o + rho_e) / 2",
    ]
    return Table(_frame(rows, LAYER_COLUMNS), comments)


def em_error_table(params: PhysParams, side: float, delta: float, spec: SweepSpec, density: float = 1e30) -> Table:
    """
    Relative error of the continuum picture over a grid of lattice constants.

    For a cube of the given side, each l gives the measured |Γ_D - Γ_C|/Γ_C,
    the remaining error |Γ_D - Γ_EM|/Γ_C of the Euler–Maclaurin-corrected
    rate, and the predicted leading error for the body's size regime.

    Args:
        params (PhysParams): CSL parameters
        side (float): Cube side in m
        delta (float): Displacement along z in m
        spec (SweepSpec): Grid over "l" in m
        density (float): Nucleon density used for n_A = ρ l³

    Returns:
        Table: Columns l_over_rc, measured, em_corrected, predicted
    """
    r_c = params.r_c
    geom = Cube(l=side, density_n=density)
    disp = Displacement.along_z(delta)

    def row(l: float) -> Dict[str, float]:
        lat = lattice_from_cuboid(geom, l, density * l ** 3)
        correction = gamma_discrete_em(lat, disp, params)
        gamma_d = gamma_discrete(lat, disp, params).gamma
        regime = body_regime(lat, r_c)
        return {
            "l_over_rc": l / r_c,
            "measured": discrete_relative_error(lat, disp, params),
            "em_corrected": abs(gamma_d - correction.gamma_em) / correction.gamma_continuum,
            "predicted": relative_error_predict(regime, lat.l, r_c) if regime is not None else math.nan,
        }

    rows = settings.parallel_map(row, spec.grid())
    comments = [
        f"cube side: {side:g} m",
        f"Delta: {delta:g} m",
        f"density: {density:g} nucleons/m3",
        f"r_c: {r_c:g} m",
        "predicted: l^2/6r_C^2 for bodies >> r_C, l^2/3r_C^2 for bodies << r_C",
    ]
    return Table(_frame(rows, EM_COLUMNS), comments)
