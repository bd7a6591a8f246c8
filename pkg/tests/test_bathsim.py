import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qzeno import CapacityError, DomainError, SpectralDensity, StatePrep, SystemParams
from qzeno.bathsim import (
    compare_to_perturbative,
    dephasing_survival_exact,
    discrete_decay_rate,
    discretize,
    evolve_full,
    hilbert_dim,
    single_interval_survival,
    single_mode,
)
from qzeno.decay import GENERAL, LARGE_SPIN, POPULATION_DECAY, PURE_DEPHASING, ModelSpec, effective_decay_rate

OHMIC = SpectralDensity(0.01, 1.0, 10.0)
X = StatePrep.qubit(math.pi / 2, 0.0)
Z = StatePrep.qubit(0.0, 0.0)


def model(family, eps=2.0, delta=0.0, prep=X, bath=OHMIC):
    return ModelSpec(family, SystemParams(eps, delta), prep, bath)


def test_discretize_rule():
    d = discretize(OHMIC, 1, 20.0)
    assert d.omegas[0] == 10.0
    assert d.couplings[0] ** 2 == pytest.approx(0.01 * 10 * math.exp(-1) * 20.0, rel=1e-14)
    d = discretize(OHMIC, 200, 100.0)
    assert np.sum(d.weights()) == pytest.approx(1.0, rel=0.01)
    assert np.all(d.omegas > 0) and d.omegas[-1] < 100.0
    assert discretize(OHMIC, 5).omega_max == 100.0
    with pytest.raises(DomainError):
        discretize(OHMIC, 0)


@pytest.mark.parametrize("s", [0.8, 1.0, 2.0])
def test_discretize_converges(s):
    bath = SpectralDensity(0.01, s, 10.0)
    wmax = 40.0
    from scipy.special import gammainc
    exact = bath.total() * gammainc(s + 1, wmax / 10.0)
    devs = [abs(np.sum(discretize(bath, m, wmax).weights()) - exact) for m in (20, 40, 80)]
    # midpoint sums converge at least at first order
    assert devs[1] <= 0.5 * devs[0] and devs[2] <= 0.5 * devs[1]


def test_uncoupled_bath_survives():
    free = single_mode(1.0, 0.0)
    for m, method in [(model(PURE_DEPHASING), "full"), (model(GENERAL, 2.0, 2.0), "full"),
                      (model(POPULATION_DECAY, 2.0, 0.0, Z), "sector"),
                      (model(PURE_DEPHASING), "factorized")]:
        assert single_interval_survival(m, free, 0.7, method=method) == 1.0


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.01, 0.5), st.floats(0.05, 3), st.floats(0.1, math.pi - 0.1))
def test_single_mode_dephasing_analytic(w0, g, tau, theta):
    m = model(PURE_DEPHASING, prep=StatePrep.qubit(theta, 0.0))
    disc = single_mode(w0, g)
    gamma1 = 4 * g**2 * (1 - math.cos(w0 * tau)) / w0**2
    pu, pd = math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2
    expected = pu**2 + pd**2 + 2 * pu * pd * math.exp(-gamma1)
    assert dephasing_survival_exact(m, disc, tau) == pytest.approx(expected, abs=1e-14)
    assert single_interval_survival(m, disc, tau) == pytest.approx(expected, abs=1e-9)


def test_single_mode_equator_form():
    disc = single_mode(1.3, 0.2)
    gamma1 = 4 * 0.04 * (1 - math.cos(1.3)) / 1.3**2
    s = single_interval_survival(model(PURE_DEPHASING), disc, 1.0, method="full", n_max=12)
    assert s == pytest.approx(1 - 0.5 * (1 - math.exp(-gamma1)), abs=1e-9)


def test_factorized_matches_full():
    m = model(PURE_DEPHASING)
    disc = discretize(OHMIC, 4, 40.0)
    exact = dephasing_survival_exact(m, disc, 0.6)
    assert single_interval_survival(m, disc, 0.6, method="factorized") == pytest.approx(exact, abs=1e-12)
    errs = [abs(single_interval_survival(m, disc, 0.6, n_max=n, method="full") - exact) for n in (2, 4, 6)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-9


def test_sector_matches_full_at_one_excitation():
    m = model(POPULATION_DECAY, 2.0, 0.0, Z)
    disc = discretize(OHMIC, 6, 40.0)
    for tau in (0.3, 1.1):
        a = single_interval_survival(m, disc, tau, n_max=1, method="full")
        b = single_interval_survival(m, disc, tau, method="sector")
        assert a == pytest.approx(b, abs=1e-12)


def test_norm_conserved():
    m = model(GENERAL, 2.0, 2.0, StatePrep.qubit(1.0, 0.5))
    state = evolve_full(m, discretize(OHMIC, 5, 40.0), 0.8, n_max=2)
    assert abs(1 - state.norm_sq()) <= 1e-9


def test_capacity_guard():
    m = model(GENERAL, 2.0, 2.0)
    assert hilbert_dim(m, 8, 2) == 2 * 3**8
    with pytest.raises(CapacityError):
        evolve_full(m, discretize(OHMIC, 8), 0.5, n_max=2, max_dim=1000)


def test_method_validation():
    with pytest.raises(DomainError):
        single_interval_survival(model(GENERAL, 1, 1), single_mode(1, 0.1), 1.0, method="sector")
    with pytest.raises(DomainError):
        single_interval_survival(model(GENERAL, 1, 1), single_mode(1, 0.1), 1.0, method="nope")
    with pytest.raises(DomainError):
        single_interval_survival(model(GENERAL, 1, 1), single_mode(1, 0.1), 0.0)


def test_survival_in_unit_interval():
    m = model(GENERAL, 1.0, 2.0, StatePrep.qubit(2.0, 1.0), SpectralDensity(0.3, 1.0, 10.0))
    s = single_interval_survival(m, discretize(m.bath, 3, 40.0), 1.5)
    assert 0.0 <= s <= 1.0


def test_weak_coupling_gap_is_second_order():
    # Gamma_sim minus the mode-sum perturbative rate shrinks ~4x when G halves
    diffs = []
    for G in (0.02, 0.01):
        bath = SpectralDensity(G, 1.0, 10.0)
        m = model(GENERAL, 2.0, 2.0, bath=bath)
        disc = discretize(bath, 4, 40.0)
        s = single_interval_survival(m, disc, 0.5, n_max=3)
        diffs.append(abs(-math.log(s) / 0.5 - discrete_decay_rate(m, disc, 0.5)))
    assert diffs[0] / diffs[1] == pytest.approx(4.0, rel=0.15)


def test_full_spin_boson_small_tau():
    m = model(GENERAL, 2.0, 2.0)
    disc = discretize(OHMIC, 6, 40.0)
    rep = compare_to_perturbative(m, disc, [0.1], n_max=2, threshold=0.2)
    assert rep.ok and rep.max_gap < 0.05


def test_large_spin_full_runs():
    m = ModelSpec(LARGE_SPIN, SystemParams(2.0, 2.0), StatePrep.large_spin_jz(2), OHMIC)
    disc = discretize(OHMIC, 5, 40.0)
    s = single_interval_survival(m, disc, 0.2, n_max=2)
    gamma = -math.log(s) / 0.2
    assert gamma == pytest.approx(effective_decay_rate(0.2, m), rel=0.25)


def test_rwa_sector_against_sinc_filter():
    m = model(POPULATION_DECAY, 2.0, 0.0, Z)
    disc = discretize(OHMIC, 60, 100.0)
    rep = compare_to_perturbative(m, disc, [0.1, 0.5, 1.0, 2.0], threshold=0.1)
    assert rep.ok, rep.rows()


def test_dephasing_report_defaults():
    m = model(PURE_DEPHASING)
    rep = compare_to_perturbative(m, discretize(OHMIC, 40, 40.0), np.linspace(0.2, 2, 10))
    assert rep.ok and rep.max_gap <= 0.05
    np.testing.assert_allclose(rep.survival_sim, rep.survival_exact, atol=1e-9)
    assert len(rep.rows()[0]) == len(rep.columns)


def test_report_flags_strong_coupling():
    bath = SpectralDensity(0.1, 1.0, 10.0)
    m = model(PURE_DEPHASING, bath=bath)
    rep = compare_to_perturbative(m, discretize(bath, 40, 40.0), np.linspace(0.2, 2, 10))
    assert not rep.ok and rep.max_gap > 0.1


def test_refinement_check():
    m = model(PURE_DEPHASING)
    coarse = compare_to_perturbative(m, discretize(OHMIC, 8, 40.0), [0.5, 1.5], check_refinement=True)
    assert np.all(np.isfinite(coarse.gamma_sim_refined))
    assert not coarse.ok
    fine = compare_to_perturbative(m, discretize(OHMIC, 40, 40.0), [0.5], check_refinement=True)
    assert fine.ok
    plain = compare_to_perturbative(m, discretize(OHMIC, 40, 40.0), [0.5])
    assert np.isnan(plain.gamma_sim_refined).all() and not plain.under_resolved.any()
