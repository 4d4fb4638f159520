import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cslrate.continuum_rates import gamma_cuboid
from cslrate.errors import DegenerateFitError, InvalidParameterError
from cslrate.lattice_rates import (
    axis_deficit,
    axis_sum,
    diagonal_offsets,
    discrete_drop_scan,
    factorized_rate,
    gamma_discrete,
)
from cslrate.models import Cube, Displacement, Lattice, Method, PhysParams
from cslrate.oracles import bruteforce_gamma_discrete

from .conftest import LAMBDA, R_C

PARAMS = PhysParams(lam=LAMBDA, r_c=R_C)


def test_axis_sum_single_site():
    assert axis_sum(1, R_C, 0.0, R_C).value == 1.0


def test_axis_sum_three_sites():
    expected = 3.0 + 4.0 * math.exp(-0.25) + 2.0 * math.exp(-1.0)
    result = axis_sum(3, R_C, 0.0, R_C)
    assert result.value == pytest.approx(expected, rel=1e-15)
    assert result.n_sites == 3
    assert result.shift == 0.0


def test_axis_sum_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        axis_sum(0, R_C, 0.0, R_C)
    with pytest.raises(InvalidParameterError):
        axis_sum(3, -R_C, 0.0, R_C)


def test_diagonal_offsets_clipped_to_lattice():
    offsets = diagonal_offsets(5, R_C, 0.0, R_C)
    assert offsets.tolist() == [-4, -3, -2, -1, 0, 1, 2, 3, 4]
    # l ≫ r_C keeps only the diagonals next to the shift
    assert diagonal_offsets(1000, 100 * R_C, 3.0 * 100 * R_C, R_C).tolist() == [2, 3, 4]


def test_diagonal_offsets_can_include_origin():
    far = diagonal_offsets(1000, 100 * R_C, 500 * 100 * R_C, R_C, around_origin=True)
    assert 0 in far and 500 in far


def test_axis_deficit_matches_difference_of_sums():
    n, l, delta = 7, 0.6 * R_C, 0.8 * R_C
    direct = axis_sum(n, l, 0.0, R_C).value - axis_sum(n, l, delta, R_C).value
    assert axis_deficit(n, l, delta, R_C) == pytest.approx(direct, rel=1e-12)
    assert axis_deficit(n, l, 0.0, R_C) == 0.0


def test_axis_deficit_keeps_tiny_displacements():
    # single site: 1 - e^{-Δ²/4r_C²} with Δ = 1e-9 r_C is not lost to cancellation
    delta = 1e-9 * R_C
    assert axis_deficit(1, R_C, delta, R_C) == pytest.approx(delta ** 2 / (4 * R_C ** 2), rel=1e-9)


def test_factorized_rate_clamps_at_zero():
    assert factorized_rate(PARAMS, 1.0, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [0.0, 0.0, -1e-30]) == 0.0


def test_two_site_lattice():
    lat = Lattice(l=R_C, nx=1, ny=1, nz=2)
    result = gamma_discrete(lat, Displacement.along_z(R_C), PARAMS)
    assert result.method is Method.DISCRETE
    assert result.gamma == pytest.approx(LAMBDA * (1.0 - math.exp(-1.0)), rel=1e-14)


def test_two_sites_across_the_displacement():
    # sites along x, shift along z: S_x(0) (1 - e^{-1/4}) = 2(1 - e^{-1/2})
    lat = Lattice(l=R_C, nx=2, ny=1, nz=1)
    result = gamma_discrete(lat, Displacement.along_z(R_C), PARAMS)
    assert result.gamma == pytest.approx(2.0 * LAMBDA * -math.expm1(-0.5), rel=1e-14)


@pytest.mark.parametrize("disp", [
    Displacement.along_z(0.3 * R_C),
    Displacement(0.2 * R_C, -0.5 * R_C, 1.1 * R_C),
    Displacement.along_z(40 * R_C),
])
def test_single_site_point_mass(disp):
    lat = Lattice(l=R_C, nx=1, ny=1, nz=1, n_a=7.0)
    expected = LAMBDA * 49.0 * -math.expm1(-(disp.magnitude / (2 * R_C)) ** 2)
    assert gamma_discrete(lat, disp, PARAMS).gamma == pytest.approx(expected, rel=1e-12)


def test_zero_displacement_gives_zero():
    lat = Lattice(l=0.5 * R_C, nx=4, ny=5, nz=6)
    assert gamma_discrete(lat, Displacement(), PARAMS).gamma == 0.0


@settings(max_examples=30, deadline=None)
@given(
    st.tuples(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6)),
    st.floats(0.3, 3.0),
    st.floats(0.05, 3.0),
)
def test_matches_site_by_site_sum(counts, spacing, shift):
    lat = Lattice(l=spacing * R_C, nx=counts[0], ny=counts[1], nz=counts[2], n_a=2.0)
    disp = Displacement.along_z(shift * R_C)
    expected = bruteforce_gamma_discrete(lat, disp, PARAMS)
    assert gamma_discrete(lat, disp, PARAMS).gamma == pytest.approx(expected, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(
    st.tuples(st.integers(1, 5), st.integers(1, 5), st.integers(1, 5)),
    st.floats(0.3, 3.0),
    st.tuples(*[st.floats(0.2, 3.0)] * 3),
    st.tuples(*[st.sampled_from((-1.0, 1.0))] * 3),
)
def test_oblique_displacement_matches_site_by_site_sum(counts, spacing, shift, signs):
    lat = Lattice(l=spacing * R_C, nx=counts[0], ny=counts[1], nz=counts[2], n_a=3.0)
    disp = Displacement(*(s * d * R_C for s, d in zip(signs, shift)))
    expected = bruteforce_gamma_discrete(lat, disp, PARAMS)
    assert gamma_discrete(lat, disp, PARAMS).gamma == pytest.approx(expected, rel=1e-12)


def test_translation_does_not_change_rate():
    lat = Lattice(l=0.8 * R_C, nx=3, ny=4, nz=5)
    disp = Displacement.along_z(0.6 * R_C)
    moved = bruteforce_gamma_discrete(lat, disp, PARAMS, offset=(3e-6, -2e-6, 5e-7))
    assert gamma_discrete(lat, disp, PARAMS).gamma == pytest.approx(moved, rel=1e-9)


def test_rate_even_in_displacement():
    lat = Lattice(l=0.9 * R_C, nx=3, ny=3, nz=8)
    forward = gamma_discrete(lat, Displacement(0.1 * R_C, 0.0, 2.3 * R_C), PARAMS).gamma
    backward = gamma_discrete(lat, Displacement(-0.1 * R_C, 0.0, -2.3 * R_C), PARAMS).gamma
    assert backward == pytest.approx(forward, rel=1e-12)


def test_dense_lattice_approaches_continuum():
    density = 1e30
    spacing = 0.1 * R_C
    lat = Lattice(l=spacing, nx=100, ny=100, nz=100, n_a=density * spacing ** 3)
    disp = Displacement.along_z(1e-3 * R_C)
    discrete = gamma_discrete(lat, disp, PARAMS).gamma
    continuum = gamma_cuboid(Cube(l=100 * spacing, density_n=density), disp, PARAMS).gamma
    assert discrete == pytest.approx(continuum, rel=1e-2)


def test_sparse_lattice_acts_like_independent_sites():
    lat = Lattice(l=10 * R_C, nx=5, ny=5, nz=5, n_a=3.0)
    gamma = gamma_discrete(lat, Displacement.along_z(5 * R_C), PARAMS).gamma
    assert gamma == pytest.approx(LAMBDA * 9.0 * lat.n_sites, rel=1e-2)


def test_drop_scan_finds_lattice_multiples(single_thread):
    spacing = 1e-5
    lat = Lattice(l=spacing, nx=1, ny=1, nz=10)
    scan = discrete_drop_scan(lat, np.linspace(0.5, 8.0, 301) * spacing, PARAMS)
    assert scan.minima.size == 7
    np.testing.assert_allclose(scan.minima_deltas, np.arange(1, 8) * spacing, rtol=1e-9)
    np.testing.assert_allclose(scan.minima_gammas, LAMBDA * np.arange(1, 8), rtol=1e-9)
    assert scan.r_squared > 0.99
    assert scan.slope == pytest.approx(LAMBDA / spacing, rel=1e-6)
    assert len(scan.rows()) == 301


def test_drop_scan_is_thread_independent(monkeypatch):
    spacing = 1e-5
    lat = Lattice(l=spacing, nx=1, ny=1, nz=10)
    grid = np.linspace(0.5, 8.0, 301) * spacing
    monkeypatch.setenv("CSLRATE_THREADS", "1")
    serial = discrete_drop_scan(lat, grid, PARAMS)
    monkeypatch.setenv("CSLRATE_THREADS", "4")
    threaded = discrete_drop_scan(lat, grid, PARAMS)
    np.testing.assert_array_equal(serial.gammas, threaded.gammas)


def test_drop_scan_needs_three_minima(single_thread):
    spacing = 1e-5
    lat = Lattice(l=spacing, nx=1, ny=1, nz=10)
    with pytest.raises(DegenerateFitError):
        discrete_drop_scan(lat, np.linspace(0.1, 0.9, 50) * spacing, PARAMS)


@pytest.mark.parametrize("grid", [[1e-6, 2e-6], [3e-6, 2e-6, 4e-6], [1e-6, 1e-6, 2e-6]])
def test_drop_scan_rejects_bad_grid(grid):
    lat = Lattice(l=1e-5, nx=1, ny=1, nz=10)
    with pytest.raises(InvalidParameterError):
        discrete_drop_scan(lat, grid, PARAMS)
