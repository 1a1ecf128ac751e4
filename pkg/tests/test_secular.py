import math

import numpy as np
import pytest

from sebalab.lib.exceptions import (InputTypeError, OutOfRangeError, ParameterError,
                                    PoleProximityError, SingularCouplingError)
from sebalab.lib.secular import (ScattererConfig, SecularFunction, eigenpair_coefficients,
                                 kappa_of_theta, secular_value, solve_all_eigenvalues)


@pytest.mark.parametrize("theta,kappa", [
    (math.pi / 2, 1.0),
    (3 * math.pi / 2, -1.0),
    (2.0, math.sin(2.0) / (1 - math.cos(2.0))),
])
def test_kappa(theta, kappa):
    assert kappa_of_theta(theta) == pytest.approx(kappa)


def test_kappa_at_pi_is_exact():
    assert kappa_of_theta(math.pi) == 0.0


@pytest.mark.parametrize("theta", [1e-13, 2 * math.pi])
def test_kappa_singular(theta):
    with pytest.raises(SingularCouplingError):
        kappa_of_theta(theta)


def test_kappa_types():
    with pytest.raises(InputTypeError):
        kappa_of_theta('pi')


def test_config():
    with pytest.raises(ParameterError):
        ScattererConfig(0.0)
    with pytest.raises(ParameterError):
        ScattererConfig(7.0)
    cfg = ScattererConfig(math.pi / 2, e_cutoff=50.0)
    assert cfg.kappa == pytest.approx(1)
    assert cfg.tail_correction


def test_config_cutoff(toy):
    spec = toy([1.0, 2.0], e_max=10.0)
    assert ScattererConfig().cutoff(spec) == 10.0
    assert ScattererConfig().limit(spec) == 9.0
    assert math.isinf(ScattererConfig(tail_correction=False).limit(spec))
    with pytest.raises(OutOfRangeError):
        ScattererConfig(e_cutoff=20.0).cutoff(spec)


def test_single_level(toy, bare):
    spec = toy([1.0])
    assert secular_value(spec, bare, -1.0) == pytest.approx(0, abs=1e-15)
    assert secular_value(spec, bare, 0.5) == pytest.approx(1.5)


def test_two_levels(toy, bare):
    spec = toy([1.0, 3.0])
    assert secular_value(spec, bare, 2.0) == pytest.approx(-0.8)


def test_vectorised_matches_scalar(toy, bare):
    spec = toy([1.0, 3.0, 4.5], [1.0, 0.5, 2.0])
    func = SecularFunction(spec, bare)
    points = np.array([-2.0, 0.3, 2.2, 4.0, 7.5])
    assert func(points) == pytest.approx([func(x) for x in points])


def test_on_pole(toy, bare):
    spec = toy([1.0, 2.0])
    with pytest.raises(PoleProximityError) as info:
        secular_value(spec, bare, 2.0)
    assert info.value.index == 2


def test_near_cutoff(toy, tailed):
    spec = toy([1.0, 2.0], e_max=10.0)
    with pytest.raises(OutOfRangeError):
        secular_value(spec, tailed, 9.5)
    secular_value(spec, tailed, 8.5)


def test_increasing_in_every_gap(golden, tailed):
    func = SecularFunction(golden, tailed)
    rng = np.random.default_rng(0)
    energies = golden.energies
    for k in rng.choice(len(energies) - 2, size=200, replace=False):
        left, right = energies[k], energies[k + 1]
        gap = right - left
        first, second = np.sort(rng.uniform(0.01, 0.99, size=2))
        if second - first < 1e-3:
            continue
        assert func(left + first * gap) < func(left + second * gap)


def test_tail_correction_is_stable(golden_deep):
    lam = float(golden_deep.energies[29] + golden_deep.energies[30]) / 2
    low = secular_value(golden_deep, ScattererConfig(math.pi, 2000.0), lam)
    high = secular_value(golden_deep, ScattererConfig(math.pi, 4000.0), lam)
    assert abs(low - high) < 5 / math.sqrt(2000)


def test_solve_single_level(toy, bare):
    solution = solve_all_eigenvalues(toy([1.0]), bare, (-2.0, 0.9))
    assert len(solution) == 1
    assert solution[0].lam == pytest.approx(-1)
    assert solution[0].gap_index == 0


def test_solve_empty_window(toy, bare):
    assert len(solve_all_eigenvalues(toy([1.0]), bare, (1.2, 1.5))) == 0
    with pytest.raises(ParameterError):
        solve_all_eigenvalues(toy([1.0]), bare, (1.5, 1.2))


def test_solve_window_beyond_cutoff(toy, tailed):
    with pytest.raises(OutOfRangeError):
        solve_all_eigenvalues(toy([1.0, 2.0], e_max=10.0), tailed, (0.0, 9.5))


def test_solve_skips_narrow_gaps(toy, bare):
    solution = solve_all_eigenvalues(toy([1.0, 1.0 + 1e-11, 3.0]), bare, (0.5, 4.0))
    assert solution.skipped == [1]
    assert [pair.gap_index for pair in solution] == [2]


def test_solve_narrow_gap_high_in_the_spectrum(toy, bare):
    top = 600.0 + 2e-5
    solution = solve_all_eigenvalues(toy([599.0, 600.0, top, 601.0]), bare, (599.0, 601.0))
    assert [pair.gap_index for pair in solution] == [1, 2, 3]
    assert 600.0 < solution[1].lam < top


def test_interlacing(golden_deep):
    cfg = ScattererConfig(math.pi, 5000.0)
    solution = solve_all_eigenvalues(golden_deep, cfg, (0.0, 4999.0))
    energies = golden_deep.energies
    count = golden_deep.count_below(4999.0)
    assert count > 500
    assert len(solution) == count - 1
    assert not solution.skipped
    func = SecularFunction(golden_deep, cfg)
    for pair in solution:
        left, right = energies[pair.gap_index - 1], energies[pair.gap_index]
        assert left < pair.lam < right
        assert pair.bracket_width <= 1e-12 * max(1.0, right)
        step = 1e-6 * (right - left)
        below, above = func(np.array([pair.lam - step, pair.lam + step]))
        assert below < 0 < above


def test_threads_do_not_change_roots(golden, tailed):
    single = solve_all_eigenvalues(golden, tailed, (0.0, 1500.0))
    pooled = solve_all_eigenvalues(golden, tailed, (0.0, 1500.0), threads=4)
    assert single.eigenvalues().tolist() == pooled.eigenvalues().tolist()


def test_eigenpairs_are_orthogonal(toy, bare):
    spec = toy([1.0, 2.5, 3.0, 4.75, 6.0], [1.0, 0.7, 1.3, 0.4, 1.1])
    # a tolerance below machine precision bisects to the last bit
    pairs = list(solve_all_eigenvalues(spec, bare, (0.5, 6.0), tol=1e-15))
    assert len(pairs) == 4
    for i, first in enumerate(pairs):
        for second in pairs[i + 1:]:
            inner = abs(np.vdot(first.coefficients, second.coefficients))
            assert inner < 1e-9 * math.sqrt(first.norm_sq * second.norm_sq)


@pytest.mark.parametrize("energies,lam,coefficients,norm_sq", [
    ([1.0], -1.0, [0.5], 0.25),
    ([1.0, 2.0], 1.5, [-2.0, 2.0], 8.0),
])
def test_eigenpair_coefficients(toy, bare, energies, lam, coefficients, norm_sq):
    pair = eigenpair_coefficients(toy(energies), lam, bare)
    assert pair.coefficients.real.tolist() == pytest.approx(coefficients)
    assert pair.norm_sq == pytest.approx(norm_sq)


def test_eigenpair_tail_norm(toy):
    # the density of a bare file spectrum is its total weight over its cutoff
    pair = eigenpair_coefficients(toy([1.0, 2.0]), 1.5)
    assert pair.norm_sq == pytest.approx(10.0)
    assert pair.gap_index == 1


def test_eigenpair_on_pole(toy, bare):
    with pytest.raises(PoleProximityError):
        eigenpair_coefficients(toy([1.0, 2.0]), 1.0, bare)
