import numpy as np
import pytest

from ssh_hom import (
    DisorderSpec,
    GapCollapseError,
    LatticeSpec,
    Schedule,
    analytic_edge_states,
    build_hamiltonian,
    diagonalize,
    distribution_difference,
    equal_support_check,
    hamiltonian_time_derivative,
    hybrid_energy_formula,
    in_gap_pair,
    sample_disorder,
    spectrum_over_schedule,
    transition_element,
)

# closed-form in-gap splitting at N=8, v=0.6, frozen from the formula and
# cross-checked against exact diagonalization below
E_PLUS_N8_V06 = 0.010752575819817591


def _clean_h(spec, t, t_final=252.0):
    return build_hamiltonian(t, spec, Schedule(t_final))


def test_diagonalize_contract(spec16):
    es = diagonalize(_clean_h(spec16, 126.0))
    h = _clean_h(spec16, 126.0)
    for n in range(spec16.n_sites):
        res = np.linalg.norm(h @ es.states[:, n] - es.energies[n] * es.states[:, n])
        assert res <= 1e-10
    gram = es.states.conj().T @ es.states
    assert np.abs(gram - np.eye(spec16.n_sites)).max() <= 1e-10
    assert (np.diff(es.energies) >= 0).all()


def test_diagonalize_rejects_non_hermitian():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="Hermitian"):
        diagonalize(bad)


def test_dimerized_spectrum_16_sites():
    spec = LatticeSpec(8, 0.0)
    es = diagonalize(_clean_h(spec, 0.0, 10.0))
    expected = np.array([-1.0] * 7 + [0.0, 0.0] + [1.0] * 7)
    np.testing.assert_allclose(es.energies, expected, atol=1e-12)


def test_chiral_pairing_clean_and_disordered(spec16, sched252):
    es = diagonalize(_clean_h(spec16, 126.0))
    assert np.abs(es.energies + es.energies[::-1]).max() <= 1e-10
    dspec = DisorderSpec(kind="hopping_bdi", strength=0.2, seed=13)
    draw = sample_disorder(dspec, spec16, 0)
    esd = diagonalize(build_hamiltonian(126.0, spec16, sched252, draw, dspec))
    assert np.abs(esd.energies + esd.energies[::-1]).max() <= 1e-10


def test_hybrid_energy_formula_values(spec16):
    assert hybrid_energy_formula(spec16, 0.0) == 0.0
    assert hybrid_energy_formula(spec16, 0.6) == pytest.approx(E_PLUS_N8_V06, rel=1e-12)
    es = diagonalize(_clean_h(spec16, 126.0))
    exact = np.sort(np.abs(es.energies))[1]
    assert hybrid_energy_formula(spec16, 0.6) == pytest.approx(exact, rel=0.01)
    with pytest.raises(ValueError):
        hybrid_energy_formula(spec16, 1.0)


def test_hybrid_energy_formula_error_shrinks_with_n():
    rel_errors = []
    for n_cells in (4, 6, 8, 10):
        spec = LatticeSpec(n_cells, 0.3)
        h = build_hamiltonian(126.0, spec, Schedule(252.0))
        exact = np.sort(np.abs(np.linalg.eigvalsh(h)))[1]
        rel_errors.append(abs(hybrid_energy_formula(spec, 0.3) - exact) / exact)
    assert all(a > b for a, b in zip(rel_errors, rel_errors[1:]))
    assert rel_errors[2] < 1e-3  # below 0.1% already at N=8


def test_analytic_edge_states_profiles(spec16):
    dimer = analytic_edge_states(spec16, 0.0)
    np.testing.assert_allclose(dimer.left, np.eye(16)[0], atol=1e-15)
    np.testing.assert_allclose(dimer.right, np.eye(16)[-1], atol=1e-15)
    states = analytic_edge_states(spec16, 0.6)
    assert states.eta == pytest.approx(-0.6)
    assert states.left[2] / states.left[0] == pytest.approx(-0.6, rel=1e-12)
    assert np.abs(states.left[1::2]).max() == 0.0
    assert np.abs(states.right[0::2]).max() == 0.0
    assert np.linalg.norm(states.left) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        analytic_edge_states(spec16, 1.0)


def test_analytic_states_match_diagonalization():
    spec = LatticeSpec(8, 0.3)
    es = diagonalize(build_hamiltonian(126.0, spec, Schedule(252.0)))
    pair = in_gap_pair(es)
    states = analytic_edge_states(spec, 0.3)
    left_mix = (pair.plus_state + pair.minus_state) / np.sqrt(2.0)
    assert abs(np.vdot(states.left, left_mix)) >= 0.999


def test_in_gap_pair_dimerized_limit(spec16):
    es = diagonalize(_clean_h(spec16, 0.0))
    pair = in_gap_pair(es)
    assert pair.e_plus == pytest.approx(0.0, abs=1e-12)
    assert pair.e_minus == pytest.approx(0.0, abs=1e-12)
    sub = np.stack([pair.plus_state, pair.minus_state])
    weight = np.abs(sub[:, [0, -1]]) ** 2
    np.testing.assert_allclose(weight.sum(axis=1), 1.0, atol=1e-12)
    # even cell count: plus carries (|1> - |2N>)/sqrt(2)
    assert pair.plus_state[0].real == pytest.approx(1 / np.sqrt(2), rel=1e-9)
    assert pair.plus_state[-1].real == pytest.approx(-1 / np.sqrt(2), rel=1e-9)


def test_in_gap_pair_midpoint_value_and_support(spec16):
    es = diagonalize(_clean_h(spec16, 126.0))
    pair = in_gap_pair(es)
    assert abs(pair.e_plus) == pytest.approx(E_PLUS_N8_V06, rel=0.01)
    assert pair.e_minus == pytest.approx(-pair.e_plus, abs=1e-10)
    left_mix = (pair.plus_state + pair.minus_state) / np.sqrt(2.0)
    right_mix = (pair.plus_state - pair.minus_state) / np.sqrt(2.0)
    assert (np.abs(left_mix[0::2]) ** 2).sum() >= 0.999   # odd-site |L> component
    assert (np.abs(right_mix[1::2]) ** 2).sum() >= 0.999  # even-site |R> component


def test_in_gap_pair_gauge_continuity(spec16, sched252):
    pair = None
    for t in np.linspace(0.0, 252.0, 41):
        es = diagonalize(_clean_h(spec16, t))
        prev = pair
        pair = in_gap_pair(es, prev)
        if prev is not None:
            assert np.vdot(prev.plus_state, pair.plus_state).real > 0.9
            assert np.vdot(prev.minus_state, pair.minus_state).real > 0.9


def test_gap_collapse_raises():
    es = diagonalize(np.diag([0.0, 1e-8, 3e-8, 1.0, -1.0, 2.0]))
    with pytest.raises(GapCollapseError):
        in_gap_pair(es)


def test_distribution_difference_end_states(spec16):
    e_first = np.zeros(16)
    e_first[0] = 1.0
    assert distribution_difference(e_first) == pytest.approx(1.0)
    assert distribution_difference(e_first[::-1]) == pytest.approx(-1.0)


def test_distribution_difference_clean_eigenstates(spec16):
    # inversion symmetry makes every non-degenerate eigenstate balance, in-gap included
    for t in (30.0, 126.0, 200.0):
        es = diagonalize(_clean_h(spec16, t))
        for n in range(16):
            assert abs(distribution_difference(es.states[:, n])) <= 1e-10


def test_equal_support_clean_and_bdi(spec16, sched252):
    es = diagonalize(_clean_h(spec16, 126.0))
    report = equal_support_check(es)
    assert report.passed
    assert report.n_checked == 14 or report.n_checked == 16
    dspec = DisorderSpec(kind="hopping_bdi", strength=0.2, seed=3)
    draw = sample_disorder(dspec, spec16, 0)
    esd = diagonalize(build_hamiltonian(126.0, spec16, sched252, draw, dspec))
    assert equal_support_check(esd).passed


def test_equal_support_flags_onsite_disorder(spec16, sched252):
    dspec = DisorderSpec(kind="onsite_generic", strength=0.2, seed=3)
    draw = sample_disorder(dspec, spec16, 0)
    es = diagonalize(build_hamiltonian(126.0, spec16, sched252, draw, dspec))
    report = equal_support_check(es)
    assert not report.passed
    assert report.violations
    for _, energy, residual in report.violations:
        assert abs(energy) > 1e-6
        assert residual > 1e-10


def test_transition_elements_vanish_under_chiral_symmetry(spec16, sched252):
    es = diagonalize(_clean_h(spec16, 126.0))
    dh = hamiltonian_time_derivative(126.0, spec16, sched252)
    pair_idx = np.argsort(np.abs(es.energies))[:2]
    for n in pair_idx:
        assert abs(transition_element(es, dh, int(n))) <= 1e-12

    dspec = DisorderSpec(kind="hopping_bdi", strength=0.2, seed=7)
    draw = sample_disorder(dspec, spec16, 0)
    esd = diagonalize(build_hamiltonian(100.0, spec16, sched252, draw, dspec))
    dhd = hamiltonian_time_derivative(100.0, spec16, sched252, draw, dspec)
    for n in range(16):
        assert abs(transition_element(esd, dhd, n)) <= 1e-12


def test_chiral_partner_protection_breaks_with_onsite_disorder(spec16, sched252):
    # <psi|dH/dt S|psi> is forced to zero for any real eigenvector by the
    # symmetry of the bond operator alone, so the broken-symmetry signature is
    # elsewhere: S|psi_n> stops being an eigenstate and the ramp couples the
    # two in-gap eigenstates directly.
    def ingap_cross_element(es, dh):
        lo, hi = np.argsort(np.abs(es.energies))[:2]
        return abs(np.vdot(es.states[:, lo], dh @ es.states[:, hi]))

    es = diagonalize(_clean_h(spec16, 100.0))
    dh = hamiltonian_time_derivative(100.0, spec16, sched252)
    assert ingap_cross_element(es, dh) <= 1e-12  # chiral partners: protected

    dspec = DisorderSpec(kind="onsite_generic", strength=0.2, seed=7)
    draw = sample_disorder(dspec, spec16, 0)
    h = build_hamiltonian(100.0, spec16, sched252, draw, dspec)
    es_d = diagonalize(h)
    assert ingap_cross_element(es_d, dh) > 1e-9

    s = np.diag([1.0, -1.0] * spec16.n_cells)
    lo = np.argsort(np.abs(es_d.energies))[0]
    partner = s @ es_d.states[:, lo]
    residual = h @ partner - (-es_d.energies[lo]) * partner
    assert np.linalg.norm(residual) > 1e-3  # S|psi> no longer an eigenstate


def test_spectrum_over_schedule_shape(spec16, sched252):
    times, energies = spectrum_over_schedule(spec16, sched252, n_samples=21)
    assert times.shape == (21,)
    assert energies.shape == (21, 16)
    assert energies[0, 7] == pytest.approx(0.0, abs=1e-12)
    mid = np.sort(np.abs(energies[10]))[:2]
    assert mid[1] == pytest.approx(E_PLUS_N8_V06, rel=0.01)
