import math

import numpy as np
import pytest

from sebalab.lib.exceptions import CoverageError, ParameterError
from sebalab.lib.momentum import (default_radius, eight_point_mass, localisation_points,
                                  momentum_density, single_mode_density, smoothed_delta,
                                  smoothed_delta_norm)
from sebalab.lib.quasimode import build_quasimode, make_interval, solve_quasi_eigenvalues
from sebalab.lib.secular import solve_all_eigenvalues
from sebalab.lib.spectrum import RectangleGeometry, generate_rectangle_odd


@pytest.mark.parametrize("n", [1, 7, 30])
def test_smoothed_delta_at_zero(n):
    assert float(abs(smoothed_delta(n, 0.0))) == pytest.approx(n / math.pi)
    # the series and the closed form meet at the switch
    near = smoothed_delta(n, np.array([0.99e-6 / n, 1.01e-6 / n]))
    assert near[0] == pytest.approx(near[1], rel=1e-6)


def test_smoothed_delta_symmetry():
    t = np.linspace(0.01, 5, 50)
    assert np.abs(smoothed_delta(9, t)) == pytest.approx(np.abs(smoothed_delta(9, -t)))


@pytest.mark.parametrize("n", [10, 50])
def test_smoothed_delta_norm(n):
    assert smoothed_delta_norm(n) == pytest.approx(2 * n / math.pi, rel=1e-3)


def test_localisation_points_on_the_energy_circle():
    geom = RectangleGeometry(1.0, 1.3)
    points = localisation_points(geom, 5, 3)
    assert len(set(points)) == 4
    for px, py in points:
        assert px * px + py * py == pytest.approx(geom.level(5, 3))


def test_single_mode_parseval():
    geom = RectangleGeometry(1.0, 1.0)
    extent = 3 * math.sqrt(geom.level(5, 5))
    grid = single_mode_density(geom, 5, 5, extent, 256)
    assert grid.total_mass() == pytest.approx(1, rel=0.05)
    assert grid.levels == ((5, 5),)


def test_single_mode_peaks_at_its_points():
    geom = RectangleGeometry(1.0, 1.0)
    grid = single_mode_density(geom, 9, 9, 30.0, 241)
    i, j = np.unravel_index(np.argmax(grid.density), grid.density.shape)
    peak = (abs(grid.axis[i]), abs(grid.axis[j]))
    assert peak == pytest.approx((9 * math.pi / 2, 9 * math.pi / 2), abs=2 * grid.spacing)


def test_grid_resolution():
    with pytest.raises(ParameterError):
        single_mode_density(RectangleGeometry(1.0, 1.0), 1, 1, 10.0, 7)
    with pytest.raises(ParameterError):
        single_mode_density(RectangleGeometry(1.0, 1.0), 1, 1, 0.0, 64)


def test_rescaled_four_point_mass_grows_with_the_mode():
    geom = RectangleGeometry(1.0, 1.0)
    masses = [eight_point_mass(single_mode_density(geom, n, n, 45.0, 384), radius=0.5,
                               rescaled=True)
              for n in (5, 11, 21)]
    assert masses[0] < masses[1] < masses[2] < 1


def test_window_coverage():
    geom = RectangleGeometry(1.0, 1.0)
    grid = single_mode_density(geom, 3, 3, 10.0, 64)
    assert eight_point_mass(grid, radius=30.0, strict=False) == pytest.approx(1)
    with pytest.raises(CoverageError):
        eight_point_mass(grid, radius=30.0)
    with pytest.raises(CoverageError):
        eight_point_mass(grid, levels=[(9, 9)], radius=0.1, strict=False)
    with pytest.raises(ParameterError):
        eight_point_mass(grid, levels=[])


def test_default_radius():
    geom = RectangleGeometry(1.0, 2.0)
    expected = math.pi / (2 * math.sqrt(geom.level(1, 1)))
    assert default_radius(geom, (1, 1)) == pytest.approx(expected)


def test_needs_a_rectangle(toy, bare):
    pair = solve_all_eigenvalues(toy([1.0, 2.0]), bare, (1.0, 2.0))[0]
    with pytest.raises(ParameterError):
        momentum_density(RectangleGeometry(1.0, 1.0), pair)


def test_eigenfunction_parseval(golden, golden_geometry, bare):
    energies = golden.energies
    pair = solve_all_eigenvalues(golden, bare, (energies[19], energies[20]))[0]
    assert pair.gap_index == 20
    grid = momentum_density(golden_geometry, pair, resolution=256)
    assert grid.extent == pytest.approx(3 * math.sqrt(pair.lam))
    assert grid.total_mass() == pytest.approx(pair.norm_sq, rel=0.05)
    assert len(grid.levels) == 2


def test_quasimode_parseval(golden, golden_geometry, bare):
    interval = make_interval(golden, golden.energies[9], golden.energies[10])
    mu = solve_quasi_eigenvalues(golden, interval, 0.0, bare)[0]
    qm = build_quasimode(golden, interval, 0.0, mu, bare)
    grid = momentum_density(golden_geometry, qm, resolution=256)
    assert grid.total_mass() == pytest.approx(qm.norm_sq, rel=0.05)
    assert grid.levels == golden[9].modes[0][:1] + golden[10].modes[0][:1]


def test_threads_agree(golden, golden_geometry, bare):
    energies = golden.energies
    pair = solve_all_eigenvalues(golden, bare, (energies[4], energies[5]))[0]
    single = momentum_density(golden_geometry, pair, resolution=96)
    pooled = momentum_density(golden_geometry, pair, resolution=96, threads=3)
    assert pooled.density == pytest.approx(single.density, rel=1e-9, abs=1e-300)


def test_near_degenerate_pair_sits_on_eight_points(bare):
    geom = RectangleGeometry(1.0, 1.01)
    spec = generate_rectangle_odd(geom, 200.0)
    assert spec[1].modes[0][0] == (1, 3)
    assert spec[2].modes[0][0] == (3, 1)
    pair = solve_all_eigenvalues(spec, bare, (spec.energies[1], spec.energies[2]))[0]
    grid = momentum_density(geom, pair, extent=15.0, resolution=192)
    assert grid.levels == ((1, 3), (3, 1))
    small = eight_point_mass(grid)
    large = eight_point_mass(grid, radius=2 * default_radius(geom, (1, 3)))
    assert 0 < small <= large <= 1

def test_eight_point_mass_converges_as_the_pair_closes(bare):
    # the middle eigenfunction of (1, 3) and (3, 1) against the equal-weight
    # two-level combination on the same rectangle
    distances = []
    for delta in (0.05, 0.02, 0.01):
        geom = RectangleGeometry(1.0, 1.0 + delta)
        spec = generate_rectangle_odd(geom, 200.0)
        low, high = spec.energies[1], spec.energies[2]
        pair = solve_all_eigenvalues(spec, bare, (low, high))[0]
        assert low < pair.lam < high
        interval = make_interval(spec, low, high)
        mu = solve_quasi_eigenvalues(spec, interval, 0.0, bare)[0]
        assert mu == pytest.approx((low + high) / 2)
        qm = build_quasimode(spec, interval, 0.0, mu, bare)
        eigen = momentum_density(geom, pair, extent=15.0, resolution=256)
        limit = momentum_density(geom, qm, extent=15.0, resolution=256)
        assert eigen.levels == limit.levels == ((1, 3), (3, 1))
        two_level = eight_point_mass(limit)
        assert 0 < two_level < 1
        distances.append(abs(eight_point_mass(eigen) - two_level))
    assert all(later < earlier for earlier, later in zip(distances, distances[1:]))
    assert distances[-1] < 1e-2
