import math

import numpy as np
import pytest

from sebalab.lib.exceptions import AssumptionError, ParameterError, QuadrupleNotFoundError
from sebalab.lib.localisation import (GapQuadruple, audit_weights, check_exponents,
                                      convergence_experiment, default_eps_sequence,
                                      localise_quadruple, overlap_bound, overlap_bound_check,
                                      quadruple_at, scan_quadruples, top2_mass)
from sebalab.lib.secular import PerturbedEigenpair, ScattererConfig, eigenpair_coefficients
from sebalab.lib.spectrum import RectangleGeometry, generate_poisson, generate_rectangle_odd

SWEEP = [0.1, 0.05, 0.02, 0.01]


@pytest.mark.parametrize("q,rho", [
    (0.6, 1.1),
    (0.0, 1.1),
    (0.25, 1.0),
    (0.25, 1.6),
])
def test_bad_exponents(q, rho):
    with pytest.raises(ParameterError):
        check_exponents(q, rho)


def test_quadruple_conditions():
    quad = GapQuadruple((1, 2, 3, 4), (1.0, 2.0, 2.049, 3.0), 0.05, 0.25, 1.4)
    assert quad.satisfied
    assert all(margin > 0 for margin in quad.margins())
    assert quad.middle_gap == pytest.approx(0.049)
    assert quad.outer_gap == pytest.approx(0.951)
    crowded = GapQuadruple((1, 2, 3, 4), (1.0, 1.2, 1.21, 3.0), 0.05, 0.25, 1.4)
    assert crowded.small_middle and crowded.wide_upper
    assert not crowded.wide_lower
    assert not crowded.satisfied


def test_quadruple_at(toy):
    spec = toy([1.0, 2.0, 3.0, 4.0, 5.0])
    assert quadruple_at(spec, 2, 0.1, 0.25, 1.4).energies == (2.0, 3.0, 4.0, 5.0)
    with pytest.raises(ParameterError):
        quadruple_at(spec, 3, 0.1, 0.25, 1.4)


def test_scan_finds_the_close_pair(toy):
    scan = scan_quadruples(toy([1.0, 2.0, 2.049, 3.0]), 0.05, 0.25, 1.4)
    assert len(scan) == 1
    assert scan[0].indices == (1, 2, 3, 4)
    assert scan.examined == 1
    assert scan.counts['small_middle'] == 1


def test_scan_uniform_spacing(toy):
    scan = scan_quadruples(toy([float(k) for k in range(1, 30)]), 0.05, 0.25, 1.4)
    assert len(scan) == 0
    assert scan.examined == 26
    assert scan.counts['small_middle'] == 0


def test_scan_respects_ceiling(toy):
    # 0.05 ** -1.4 is about 66
    assert len(scan_quadruples(toy([70.0, 71.0, 71.01, 72.0]), 0.05, 0.25, 1.4)) == 0


def test_scan_short_spectrum(toy):
    assert len(scan_quadruples(toy([1.0, 2.0, 3.0]), 0.05, 0.25, 1.4)) == 0
    with pytest.raises(ParameterError):
        scan_quadruples(toy([1.0, 2.0, 3.0]), 0.0, 0.25, 1.4)


def test_overlap_bound():
    quad = GapQuadruple((1, 2, 3, 4), (1.0, 2.0, 4.0, 5.0), 0.1, 0.25, 1.4)
    assert overlap_bound(quad) == 0
    close = GapQuadruple((1, 2, 3, 4), (1.0, 11.0, 11.1, 21.0), 0.2, 0.25, 1.4)
    expected = math.sqrt(1 - 0.01 / (4 * 9.9 ** 2)) / math.sqrt(3)
    assert overlap_bound(close) == pytest.approx(expected)


def test_overlap_check_on_a_close_pair(toy, bare):
    spec = toy([1.0, 11.0, 11.1, 21.0])
    check = overlap_bound_check(spec, bare, quadruple_at(spec, 1, 0.2, 0.25, 1.4))
    assert check.holds
    assert len(check.overlaps) == 3
    assert check.best_overlap > 0.99


def test_overlap_check_on_golden_quadruples(golden, bare):
    for a in range(1, 61):
        quad = quadruple_at(golden, a, 0.1, 0.25, 1.4)
        check = overlap_bound_check(golden, bare, quad)
        assert check.holds, quad
        assert max(check.overlaps) <= 1 + 1e-9


def _satisfied_quadruples(spec, eps_values, q=0.25, rho=1.4):
    found = {}
    for eps in eps_values:
        for quad in scan_quadruples(spec, eps, q, rho):
            found.setdefault(quad.indices, quad)
    return list(found.values())


def test_overlap_bound_on_satisfied_poisson_quadruples(bare):
    checked = 0
    for seed in range(30):
        spec = generate_poisson(1.0, 1.0, 700.0, seed)
        for quad in _satisfied_quadruples(spec, SWEEP):
            check = overlap_bound_check(spec, bare, quad)
            assert check.holds, (seed, quad)
            checked += 1
    assert checked >= 50


def test_overlap_bound_on_satisfied_rectangle_quadruples(bare):
    # a large golden rectangle: about two levels per unit of energy
    geom = RectangleGeometry(4.0, 2.0 * (1 + math.sqrt(5)))
    spec = generate_rectangle_odd(geom, 6000.0)
    quads = _satisfied_quadruples(spec, [0.2 * 2 ** (-k / 2) for k in range(20)])
    assert len(quads) >= 20
    for quad in quads:
        assert overlap_bound_check(spec, bare, quad).holds, quad


def test_defect_shrinks_with_the_middle_gap(toy, bare):
    defects = []
    for g in (0.4, 0.2, 0.1, 0.05):
        spec = toy([1.0, 5.0, 5.0 + g, 9.0])
        row = localise_quadruple(spec, bare, quadruple_at(spec, 1, 0.5, 0.25, 1.4))
        assert 5.0 < row.lam < 5.0 + g
        assert row.gap_margin > 0
        defects.append(row.defect)
    assert all(later < earlier for earlier, later in zip(defects, defects[1:]))
    assert defects[-1] < 1e-2


def _sweep_staircase(toy):
    """Unit-spaced levels with one close pair reachable at each eps of the sweep."""
    pairs = [(10.0, 0.09), (50.0, 0.04), (200.0, 0.015), (500.0, 0.008)]
    levels = [float(k) for k in range(1, 801)] + [k + gap for k, gap in pairs]
    return toy(sorted(levels)), pairs


def test_convergence_sweep_is_strictly_decreasing(toy, bare):
    spec, pairs = _sweep_staircase(toy)
    rows = convergence_experiment(spec, bare, SWEEP)
    assert [row.quadruple.energies[1] for row in rows] == [k for k, _ in pairs]
    defects = [row.defect for row in rows]
    assert all(later < earlier for earlier, later in zip(defects, defects[1:]))
    assert defects[-1] < 1e-3
    assert min(row.gap_margin for row in rows) > 1


def test_convergence_reports_the_best_quadruple(toy, bare):
    # a wide close pair low down and a much closer one higher up, both satisfied at 0.05
    spec = toy(sorted([float(k) for k in range(1, 60)] + [5.045, 40.002]))
    rows = convergence_experiment(spec, bare, [0.05])
    assert rows[0].quadruple.energies[1:3] == (40.0, 40.002)
    low = localise_quadruple(spec, bare, scan_quadruples(spec, 0.05, 0.25, 1.4)[0])
    assert low.quadruple.energies[1] == 5.0
    assert rows[0].defect < low.defect


def test_convergence_sweeps_on_poisson_spectra(bare):
    steps = increases = 0
    complete = []
    for seed in range(100):
        spec = generate_poisson(1.0, 1.0, 700.0, seed)
        try:
            rows = convergence_experiment(spec, bare, SWEEP, skip_missing=True)
        except QuadrupleNotFoundError:
            continue
        for row in rows:
            assert row.quadruple.satisfied
            assert row.gap_margin > 0
            assert 0 <= row.defect <= 1
            assert 0 < row.top2_mass <= 1 + 1e-9
        defects = [row.defect for row in rows]
        steps += len(defects) - 1
        increases += sum(later > earlier for earlier, later in zip(defects, defects[1:]))
        if len(rows) == len(SWEEP):
            complete.append(defects)
    assert steps >= 100
    assert increases <= 0.1 * steps
    assert any(all(later < earlier for earlier, later in zip(defects, defects[1:]))
               and defects[-1] < 0.05 for defects in complete)


def test_convergence_skips_missing_eps(toy, bare):
    spec = toy([1.0, 2.0, 2.049, 3.0, 4.0])
    rows = convergence_experiment(spec, bare, [0.1, 0.01, 0.05], skip_missing=True)
    assert [row.eps for row in rows] == [0.1, 0.05]
    with pytest.raises(QuadrupleNotFoundError):
        convergence_experiment(spec, bare, [0.1, 0.01, 0.05])
    with pytest.raises(QuadrupleNotFoundError):
        convergence_experiment(spec, bare, [0.01], skip_missing=True)


def test_convergence_threads(tailed):
    spec = generate_poisson(1.0, 1.0, 500.0, 2)
    eps = [0.1, 0.05]
    try:
        single = convergence_experiment(spec, tailed, eps)
    except QuadrupleNotFoundError:
        pytest.skip("no quadruple for this seed")
    pooled = convergence_experiment(spec, tailed, eps, threads=2)
    assert [row.lam for row in single] == [row.lam for row in pooled]


def test_convergence_needs_theta_pi(toy):
    with pytest.raises(ParameterError):
        convergence_experiment(toy([1.0, 2.0, 2.01, 3.0]), ScattererConfig(math.pi / 2))


def test_convergence_without_quadruples(toy, tailed):
    spec = toy([float(k) for k in range(1, 30)], e_max=40.0)
    with pytest.raises(QuadrupleNotFoundError):
        convergence_experiment(spec, tailed, [0.05])


def test_audit_weights(toy, bare, tailed):
    spec = toy([1.0, 2.0, 3.0], [1.0, 0.5, 1.0])
    audit_weights(spec, 0.5)
    with pytest.raises(AssumptionError) as info:
        audit_weights(spec, 0.6)
    assert info.value.index == 2
    with pytest.raises(AssumptionError):
        convergence_experiment(spec, tailed, [0.05], c0=0.6)
    weak = toy([1.0, 2.0, 2.049, 3.0], [1.0, 1e-3, 1.0, 1.0])
    with pytest.raises(AssumptionError):
        convergence_experiment(weak, bare, [0.05])
    with pytest.raises(ParameterError):
        convergence_experiment(weak, bare, [0.05], c0=0.0)


def test_default_eps_sequence():
    assert default_eps_sequence(3) == [0.1, 0.05, 0.025]


def test_top2_mass_flat(toy):
    spec = toy([float(k) for k in range(1, 11)])
    pair = PerturbedEigenpair(1.5, 1, np.ones(10, dtype=complex), 10.0, spec)
    assert top2_mass(pair).mass_fraction == pytest.approx(0.2)
    assert top2_mass(pair).indices == (1, 2)


@pytest.mark.parametrize("amplitudes,beta", [
    ([1.0, 1.0], 1),
    ([1.0, -1.0], 0),
])
def test_top2_sign(toy, bare, amplitudes, beta):
    pair = eigenpair_coefficients(toy([1.0, 2.0], amplitudes), 1.5, bare)
    top = top2_mass(pair)
    assert top.beta == beta
    assert top.mass_fraction == pytest.approx(1)


def test_top2_needs_two_levels(toy, bare):
    with pytest.raises(ParameterError):
        top2_mass(eigenpair_coefficients(toy([1.0]), -1.0, bare))
