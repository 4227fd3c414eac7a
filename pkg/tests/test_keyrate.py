import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from gaussrate.attack import canonical, from_channel, random_attack, to_channel
from gaussrate.channel import amplifier, attenuator
from gaussrate.errors import DomainError, UnsupportedRegimeError
from gaussrate.keyrate import (
    RateReport,
    asymptotic_mi,
    b_inf_alpha,
    b_inf_beta,
    eta_canonical,
    g,
    rate,
    rate_from_triplet,
    total_noise,
    total_noise_det,
)
from gaussrate.protocol import finite_mu_mi


def test_g_values():
    assert g(1.0) == 0.0
    assert g(3.0) == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(g(np.array([1.0, 3.0])), [0.0, 2.0])


def test_g_rejects_sub_vacuum():
    with pytest.raises(DomainError):
        g(0.5)


def test_eta_canonical_pure_loss():
    assert eta_canonical(0.9, 1.0) == pytest.approx(2.0 / 0.9)
    assert eta_canonical(2.0, 1.0) == pytest.approx(2.0)


def test_eta_canonical_domain():
    with pytest.raises(DomainError):
        eta_canonical(0.0, 1.0)
    with pytest.raises(DomainError):
        eta_canonical(1.0, 1.0)
    with pytest.raises(DomainError):
        eta_canonical(0.5, 0.9)


def test_pure_loss_spot_values():
    eta = eta_canonical(0.9, 1.0)
    assert b_inf_beta(0.9, 1.0, eta) == pytest.approx(math.log2(10 / math.e), abs=1e-9)
    assert b_inf_beta(0.9, 1.0, eta) == pytest.approx(1.879233, abs=1e-6)
    assert b_inf_alpha(0.9, 1.0, eta) == pytest.approx(math.log2(9 / math.e), abs=1e-9)

    report = rate_from_triplet(0.9, 1.0, eta)
    assert report.regime == "reverse"
    assert report.b_inf == pytest.approx(1.879233, abs=1e-6)


def test_zero_crossings_of_pure_loss():
    def beta(tau):
        return b_inf_beta(tau, 1.0, eta_canonical(tau, 1.0))

    def alpha(tau):
        return b_inf_alpha(tau, 1.0, eta_canonical(tau, 1.0))

    assert brentq(beta, 0.2, 0.95, xtol=1e-12) == pytest.approx(1 - 1 / math.e, abs=1e-9)
    assert brentq(alpha, 0.2, 0.95, xtol=1e-12) == pytest.approx(math.e / (1 + math.e), abs=1e-9)


def test_high_loss_pure_channel_has_zero_rate():
    report = rate_from_triplet(0.3, 1.0, eta_canonical(0.3, 1.0))
    assert report.regime == "zero"
    assert report.b_inf == 0.0


def test_amplifier_rate_positive_near_unit_gain():
    report = rate_from_triplet(1.1, 1.0, eta_canonical(1.1, 1.0))
    assert report.b_beta == pytest.approx(math.log2(1 / (math.e * 1.1 * 0.1)))
    assert report.b_inf > 0


def test_negative_tau_is_zero_regime():
    report = rate_from_triplet(-0.5, 3.0, None)
    assert report == RateReport(-0.5, 3.0, None, None, None, 0.0, "zero")


def test_unit_tau_unsupported():
    with pytest.raises(UnsupportedRegimeError):
        rate_from_triplet(1.0, 1.0, 3.0)
    with pytest.raises(UnsupportedRegimeError):
        rate(canonical(1.0, 2.0))


def test_unphysical_triplet_rejected():
    with pytest.raises(DomainError):
        rate_from_triplet(0.9, 1.0, 0.9 * eta_canonical(0.9, 1.0))
    with pytest.raises(DomainError):
        rate_from_triplet(0.9, 1.0, None)


def test_bounds_decrease_with_eta_and_w():
    etas = np.linspace(eta_canonical(0.8, 2.0), 10.0, 40)
    betas = [b_inf_beta(0.8, 2.0, e) for e in etas]
    alphas = [b_inf_alpha(0.8, 2.0, e) for e in etas]
    assert np.all(np.diff(betas) < 0)
    assert np.all(np.diff(alphas) < 0)

    ws = np.linspace(1.0, 6.0, 40)
    rates = [rate_from_triplet(0.8, w, eta_canonical(0.8, w)).b_inf for w in ws]
    assert np.all(np.diff(rates) <= 1e-12)


def test_canonical_attack_noise_is_eta_c():
    atk = canonical(0.6, 1.5)
    assert total_noise(atk) == pytest.approx(eta_canonical(0.6, 4.0), rel=1e-12)


@pytest.mark.parametrize("tau,nbar", [(0.3, 0.0), (0.7, 1.5), (1.6, 0.5), (4.0, 2.0)])
def test_theta_formula_matches_determinant_form(rng, tau, nbar):
    for _ in range(200):
        atk = random_attack(rng, tau, nbar, 10.0)
        ch = to_channel(atk)
        assert total_noise(atk) == pytest.approx(total_noise_det(ch), rel=1e-9)


def test_theta_formula_matches_determinant_form_over_random_channels(rng):
    checked = 0
    while checked < 1_000:
        tau = rng.uniform(0.02, 4.0)
        if abs(tau - 1.0) < 1e-3:
            continue
        atk = random_attack(rng, tau, rng.uniform(0.0, 3.0), 10.0)
        assert total_noise(atk) == pytest.approx(total_noise_det(to_channel(atk)), rel=1e-9)
        checked += 1


def test_noise_is_invariant_under_redecomposition(rng):
    for _ in range(50):
        atk = random_attack(rng, 0.7, 1.0, 10.0)
        again = from_channel(to_channel(atk))
        assert total_noise(again) == pytest.approx(total_noise(atk), rel=1e-8)


def test_rate_of_canonical_attack():
    report = rate(canonical(0.9, 0.0))
    assert report.b_inf == pytest.approx(math.log2(10 / math.e), abs=1e-9)
    assert report.to_row()["regime"] == "reverse"


def test_rate_of_class_d_is_zero():
    report = rate(canonical(-0.5, 1.0))
    assert report.regime == "zero"
    assert report.eta is None


def test_asymptotic_mi():
    assert asymptotic_mi(8.0, 2.0) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        asymptotic_mi(0.0, 2.0)


def test_thermal_penalty_on_reverse_bound():
    eta = 8.0
    assert b_inf_beta(0.5, 1.0, eta) - b_inf_beta(0.5, 3.0, eta) == pytest.approx(2.0, abs=1e-12)


def test_half_transmission_pure_loss_is_zero():
    report = rate_from_triplet(0.5, 1.0, eta_canonical(0.5, 1.0))
    assert report.b_alpha < 0 and report.b_beta < 0
    assert report.regime == "zero"
    assert eta_canonical(0.5, 3.0) == pytest.approx(6.0)


def test_asymptotic_mi_large_modulation():
    assert asymptotic_mi(1e4, 2.0 / 0.9) == pytest.approx(math.log2(4500.0), rel=1e-12)


@pytest.mark.parametrize("tau", [0.3, 0.8, 2.0])
@pytest.mark.parametrize("w", [1.0, 3.0])
def test_finite_modulation_gap_closes(tau, w):
    nbar = (w - 1.0) / 2.0
    ch = attenuator(tau, nbar) if tau < 1 else amplifier(tau, nbar)
    eta = eta_canonical(tau, w)
    mus = [m * eta for m in (1.0, 10.0, 1e2, 1e3, 1e4)]
    gaps = [finite_mu_mi(ch, mu) - asymptotic_mi(mu, eta) for mu in mus]
    assert all(a > b > 0 for a, b in zip(gaps, gaps[1:], strict=False))
    assert gaps[-1] <= 0.01


def test_rate_depends_only_on_triplet(rng):
    for _ in range(20):
        atk = random_attack(rng, 0.85, 0.2, 8.0)
        again = from_channel(to_channel(atk))
        first, second = rate(atk), rate(again)
        assert second.regime == first.regime
        assert second.b_inf == pytest.approx(first.b_inf, rel=1e-9, abs=1e-9)


@given(tau=st.floats(0.01, 0.99), w=st.floats(1.0, 50.0))
def test_attenuator_determinant_noise_is_canonical(tau, w):
    ch = attenuator(tau, (w - 1.0) / 2.0)
    assert total_noise_det(ch) == pytest.approx(eta_canonical(tau, w), rel=1e-10)


@given(gain=st.floats(1.01, 20.0), w=st.floats(1.0, 50.0))
def test_amplifier_determinant_noise_is_canonical(gain, w):
    ch = amplifier(gain, (w - 1.0) / 2.0)
    assert total_noise_det(ch) == pytest.approx(eta_canonical(gain, w), rel=1e-10)


@given(x=st.floats(1.0, 1e3), dx=st.floats(1e-3, 10.0))
def test_g_is_increasing(x, dx):
    assert g(x + dx) > g(x)
