import math

import numpy as np
import pytest

from cslrate.errors import InvalidGeometryError, InvalidParameterError, UnsupportedDisplacementError
from cslrate.models import (
    Cube,
    Cuboid,
    Cylinder,
    Displacement,
    Lattice,
    Layer,
    LayerStack,
    Method,
    PhysParams,
    RateResult,
    RegimeFlag,
    Sphere,
    lattice_from_cuboid,
    nucleon_count,
    to_nucleon_density,
)


def test_lattice_from_cuboid_exact_division():
    lat = lattice_from_cuboid(Cuboid(lx=1e-6, ly=1e-6, lz=1e-6, density_n=1e30), 1e-7, 1.0)
    assert lat.counts == (10, 10, 10)
    assert lat.n_a == 1.0


def test_lattice_from_cube_nucleon_total():
    lat = lattice_from_cuboid(Cube(l=2e-7, density_n=1e30), 1e-7, 5.0)
    assert lat.counts == (2, 2, 2)
    assert lat.n_total == 40.0


def test_lattice_rounding_reports_realized_sides():
    lat = lattice_from_cuboid(Cuboid(lx=1.05e-6, ly=1e-6, lz=1e-6, density_n=1e30), 1e-7, 1.0)
    assert lat.nx in (10, 11)
    assert lat.dims[0] == pytest.approx(lat.nx * 1e-7)


def test_lattice_constant_larger_than_side():
    with pytest.raises(InvalidParameterError):
        lattice_from_cuboid(Cube(l=1e-7, density_n=1e30), 2e-7, 1.0)


def test_lattice_needs_cuboid():
    with pytest.raises(InvalidGeometryError):
        lattice_from_cuboid(Sphere(r=1e-6, density_n=1e30), 1e-7, 1.0)


def test_lattice_positions():
    lat = Lattice(l=2.0, nx=2, ny=1, nz=3)
    positions = lat.positions()
    assert positions.shape == (6, 3)
    assert positions.min() == 0.0
    np.testing.assert_allclose(positions.max(axis=0), [2.0, 0.0, 4.0])


@pytest.mark.parametrize("counts", [(0, 1, 1), (1, 2.5, 1)])
def test_lattice_rejects_bad_counts(counts):
    with pytest.raises(InvalidParameterError):
        Lattice(1e-7, *counts)


@pytest.mark.parametrize("geom, expected", [
    (Cube(l=1e-6, density_n=1e30), 1e12),
    (Sphere(r=1e-7, density_n=1e30), 4.18879e9),
    (Cylinder(r=1e-7, l=1e-6, density_n=1e30), 3.14159e10),
])
def test_nucleon_count(geom, expected):
    assert nucleon_count(geom) == pytest.approx(expected, rel=1e-5)


def test_density_conversion():
    assert to_nucleon_density(1e30, "nucleons/m3") == 1e30
    assert to_nucleon_density(2.2e3, "kg/m3", 1.6749e-27) == pytest.approx(2.2e3 / 1.6749e-27)
    with pytest.raises(InvalidParameterError):
        to_nucleon_density(1.0, "g/cm3")


@pytest.mark.parametrize("kwargs", [
    {"lam": 0.0},
    {"r_c": -1e-7},
    {"m_n": float("nan")},
    {"rel_tol": 1e-2},
    {"rel_tol": 0.0},
])
def test_phys_params_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        PhysParams(**kwargs)


def test_phys_params_serialization():
    assert PhysParams().to_dict() == {"lambda": 1e-8, "r_c": 1e-7, "m_n": 1.6749e-27}


def test_geometry_validation():
    with pytest.raises(InvalidParameterError):
        Cube(l=-1.0, density_n=1e30)
    with pytest.raises(InvalidParameterError):
        Sphere(r=1.0, density_n=0.0)
    with pytest.raises(InvalidParameterError):
        Displacement(float("inf"), 0.0, 0.0)


def test_cuboid_overlap():
    box = Cuboid(lx=2.0, ly=3.0, lz=4.0, density_n=1.0)
    assert box.overlap_volume(Displacement()) == 24.0
    assert box.overlap_volume(Displacement(0.5, 0.0, -1.0)) == pytest.approx(1.5 * 3.0 * 3.0)
    assert box.overlap_volume(Displacement.along_z(5.0)) == 0.0


def test_sphere_overlap():
    ball = Sphere(r=1.0, density_n=1.0)
    assert ball.overlap_volume(Displacement()) == pytest.approx(ball.volume)
    assert ball.overlap_volume(Displacement(1.0, 1.0, 1.0)) == pytest.approx(
        math.pi * (4.0 + math.sqrt(3.0)) * (2.0 - math.sqrt(3.0)) ** 2 / 12.0)
    assert ball.overlap_volume(Displacement.along_z(2.0)) == 0.0


def test_cylinder_overlap():
    rod = Cylinder(r=1.0, l=5.0, density_n=1.0)
    assert rod.overlap_volume(Displacement.along_z(2.0)) == pytest.approx(math.pi * 3.0)
    assert rod.overlap_volume(Displacement(0.0, 0.0, 0.0)) == pytest.approx(rod.volume)
    # two unit discs a radius apart share 2π/3 - √3/2
    assert rod.overlap_volume(Displacement(1.0, 0.0, 0.0)) == pytest.approx(
        5.0 * (2.0 * math.pi / 3.0 - math.sqrt(3.0) / 2.0))
    assert rod.overlap_volume(Displacement(0.0, 3.0, 0.0)) == 0.0
    with pytest.raises(UnsupportedDisplacementError):
        rod.overlap_volume(Displacement(0.5, 0.0, 0.5))


def test_geometry_serialization():
    assert Cylinder(r=1.0, l=2.0, density_n=3.0).to_dict() == {
        "kind": "cylinder", "r": 1.0, "l": 2.0, "density": 3.0, "density_unit": "nucleons/m3",
    }


def test_layer_stack_boundaries_and_mean():
    stack = LayerStack(1.0, (Layer(1.0, 2.0), Layer(3.0, 6.0)))
    np.testing.assert_allclose(stack.boundaries, [0.0, 1.0, 4.0])
    assert stack.total_length == 4.0
    assert stack.mean_density == pytest.approx(5.0)
    assert stack.alternating_pattern() == (2.0, 6.0, 1.0, 3.0)


def test_alternating_stack():
    stack = LayerStack.alternating(5, 1.0, 2.0, 7.0, 3.0, d=0.5)
    assert [layer.density for layer in stack.layers] == [7.0, 3.0, 7.0, 3.0, 7.0]
    assert stack.total_length == pytest.approx(7.0)
    assert stack.alternating_pattern() == (7.0, 3.0, 1.0, 2.0)


def test_non_alternating_stack_has_no_pattern():
    stack = LayerStack(1.0, (Layer(1.0, 2.0), Layer(1.0, 3.0), Layer(1.0, 4.0)))
    assert stack.alternating_pattern() is None
    assert LayerStack.uniform(1.0, 2.0, 3.0).alternating_pattern() is None


def test_layer_validation():
    with pytest.raises(InvalidParameterError):
        Layer(0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        Layer(1.0, -1.0)
    with pytest.raises(InvalidParameterError):
        LayerStack(1.0, ())
    assert Layer(1.0, 0.0).density == 0.0


def test_rate_result_reports_violations():
    result = RateResult(
        gamma=1.0,
        method=Method.GPR,
        validity=(RegimeFlag("size_regime", True), RegimeFlag("delta_regime", False)),
    )
    assert not result.all_valid
    assert result.violated() == ["delta_regime"]
    assert result.to_dict() == {
        "gamma": 1.0,
        "method": "gpr",
        "validity": {"size_regime": "satisfied", "delta_regime": "violated"},
        "error_estimate": None,
    }
