import math

import numpy as np
import pytest
from conftest import close

from gaussrate.attack import (
    CollectiveGaussianAttack,
    canonical,
    dressed,
    extremal_counterpart,
    from_channel,
    infer_label,
    random_attack,
    thetas,
    to_channel,
    triplet,
)
from gaussrate.channel import GaussianChannel, attenuator, canonical_form
from gaussrate.errors import DomainError, InvalidChannelError, SizeError
from gaussrate.keyrate import eta_canonical, rate, total_noise
from gaussrate.symplectic import I2, random_symplectic, rotation


def test_canonical_thetas_are_minimal():
    th = thetas(canonical(0.5, 1.0))
    assert (th.theta, th.theta_a, th.theta_b) == (2.0, 2.0, 2.0)


def test_squeezed_input_thetas():
    s = 3.0
    atk = dressed(0.5, 0.0, np.diag([s, 1 / s]), I2)
    th = atk.thetas()
    assert th.theta_a == pytest.approx(s**2 + 1 / s**2)
    assert th.theta_b == pytest.approx(2.0)


def test_rotations_keep_thetas_minimal():
    th = dressed(0.7, 0.5, rotation(0.7), rotation(-1.3)).thetas()
    assert th.theta == pytest.approx(2.0)
    assert th.theta_a == pytest.approx(2.0)
    assert th.theta_b == pytest.approx(2.0)


def test_theta_uses_rows_of_ma_and_columns_of_mb(rng):
    ma, mb = random_symplectic(rng, 12.0), random_symplectic(rng, 12.0)
    th = dressed(0.4, 0.0, ma, mb).thetas()
    a1, a2 = ma[0], ma[1]
    b1, b2 = mb[:, 0], mb[:, 1]
    expected = (a1 @ a1) * (b1 @ b1) + 2 * (a1 @ a2) * (b1 @ b2) + (a2 @ a2) * (b2 @ b2)
    assert th.theta == pytest.approx(expected, rel=1e-12)
    assert th.theta_a == pytest.approx(a1 @ a1 + a2 @ a2, rel=1e-12)
    assert th.theta_b == pytest.approx(b1 @ b1 + b2 @ b2, rel=1e-12)


def test_theta_lower_bounds(rng):
    lowest = np.full(3, np.inf)
    for _ in range(10_000):
        th = random_attack(rng, 0.6, 0.5, 20.0).thetas()
        lowest = np.minimum(lowest, [th.theta, th.theta_a, th.theta_b])
    assert np.all(lowest >= 2.0 - 1e-9)


def test_zero_squeeze_attacks_are_minimal(rng):
    for _ in range(50):
        th = random_attack(rng, 0.6, 0.5, 0.0).thetas()
        assert th.theta == pytest.approx(2.0, abs=1e-12)
        assert th.theta_a == pytest.approx(2.0, abs=1e-12)
        assert th.theta_b == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("tau", [0.3, 0.8, 2.0])
@pytest.mark.parametrize("w", [1.0, 3.0])
def test_dressing_never_lowers_noise_below_canonical(rng, tau, w):
    nbar = (w - 1.0) / 2.0
    eta_c = eta_canonical(tau, w)
    lowest = min(total_noise(random_attack(rng, tau, nbar, 20.0)) for _ in range(1_000))
    assert lowest >= eta_c - 1e-9
    assert total_noise(random_attack(rng, tau, nbar, 0.0)) <= eta_c + 1e-6


def test_attack_validates_its_dressing():
    base = canonical(0.5, 0.0)
    with pytest.raises(DomainError):
        CollectiveGaussianAttack(base.class_label, base.invariants, ma=2 * I2)
    with pytest.raises(SizeError):
        CollectiveGaussianAttack(base.class_label, base.invariants, da=np.zeros(3))


def test_canonical_attenuator_attack():
    atk = canonical(0.5, 1.0)
    assert atk.class_label == "CAtt"
    assert total_noise(atk) == pytest.approx(6.0)
    assert close(to_channel(atk).t, math.sqrt(0.5) * I2)


def test_from_pure_loss_channel_is_canonical():
    atk = from_channel(attenuator(0.7))
    th = atk.thetas()
    assert (th.theta, th.theta_a, th.theta_b) == pytest.approx((2.0, 2.0, 2.0))
    assert atk.invariants.tau == pytest.approx(0.7)


def test_from_invalid_channel_raises():
    with pytest.raises(InvalidChannelError):
        from_channel(GaussianChannel(2 * I2, np.zeros((2, 2))))


def test_channel_roundtrip(rng):
    for _ in range(500):
        atk = random_attack(rng, float(rng.uniform(0.05, 3.0)), float(rng.uniform(0, 3)), 20.0)
        if abs(atk.invariants.tau - 1.0) < 0.05:
            continue
        ch = to_channel(atk)
        back = to_channel(from_channel(ch))
        assert close(back.t, ch.t)
        assert close(back.n, ch.n)
        assert close(back.d, ch.d)

        tau, w, eta = triplet(from_channel(ch))
        tau0, w0, eta0 = triplet(atk)
        assert tau == pytest.approx(tau0, abs=1e-8)
        assert w == pytest.approx(w0, rel=1e-8)
        assert eta == pytest.approx(eta0, rel=1e-8)


def test_triplet_is_undefined_outside_rate_domain():
    assert triplet(canonical(-0.5, 1.0))[2] is None
    assert triplet(canonical(1.0, 0.5))[2] is None
    assert triplet(canonical(0.0, 1.0)) == (0.0, 3.0, None)


@pytest.mark.parametrize(
    "tau,nbar,label",
    [
        (0.0, 1.0, "A1"),
        (1.0, 0.0, "B2Id"),
        (1.0, 0.5, "B2"),
        (-2.0, 0.0, "D"),
        (0.3, 0.0, "CAtt"),
        (3.0, 0.0, "CAmp"),
    ],
)
def test_infer_label(tau, nbar, label):
    assert infer_label(tau, nbar) == label


def test_explicit_label_selects_rank_one_classes():
    assert canonical(0.0, 0.5, label="A2").class_label == "A2"
    assert canonical(1.0, 0.0, label="B1").class_label == "B1"


def test_extremal_of_canonical_is_itself():
    ext = extremal_counterpart(canonical(0.8, 1.0))
    assert ext.invariants.tau == pytest.approx(0.8)
    assert ext.invariants.w == pytest.approx(3.0, rel=1e-9)


def test_extremal_of_squeezed_attack():
    # s² + 1/s² = 26/3 makes θ_A = 26/3 and η = 6 at τ = 0.5, w = 1
    s = math.sqrt((26 / 3 + math.sqrt((26 / 3) ** 2 - 4)) / 2)
    atk = dressed(0.5, 0.0, np.diag([s, 1 / s]), I2)
    assert total_noise(atk) == pytest.approx(6.0, rel=1e-12)
    ext = extremal_counterpart(atk)
    assert ext.class_label == "CAtt"
    assert ext.invariants.w == pytest.approx(3.0, rel=1e-9)
    assert total_noise(ext) == pytest.approx(6.0, rel=1e-12)


def test_extra_squeezing_raises_thermal_noise(rng):
    atk = random_attack(rng, 0.7, 0.5, 10.0)
    ext = extremal_counterpart(atk)
    assert ext.invariants.w > atk.invariants.w


def test_dressed_attacks_are_noisier_than_canonical(rng):
    for _ in range(200):
        tau = float(rng.uniform(0.05, 3.0))
        if abs(tau - 1.0) < 1e-3:
            continue
        nbar = float(rng.uniform(0, 3))
        atk = random_attack(rng, tau, nbar, 20.0)
        floor = eta_canonical(tau, 2 * nbar + 1)
        assert total_noise(atk) >= floor * (1 - 1e-12)


def test_extremal_counterpart_never_helps_eve_less(rng):
    for _ in range(200):
        tau = float(rng.choice([0.2, 0.6, 0.9, 1.3, 2.5]))
        atk = random_attack(rng, tau, float(rng.uniform(0, 2)), 20.0)
        ext = extremal_counterpart(atk)
        assert ext.invariants.w >= atk.invariants.w - 1e-9
        assert total_noise(ext) == pytest.approx(total_noise(atk), rel=1e-9)
        assert rate(ext).b_inf <= rate(atk).b_inf + 1e-9


def test_extremal_counterpart_domain():
    with pytest.raises(DomainError):
        extremal_counterpart(canonical(-0.5, 1.0))
    with pytest.raises(DomainError):
        extremal_counterpart(canonical(1.0, 1.0))
    with pytest.raises(DomainError):
        extremal_counterpart(canonical(0.0, 1.0))


def test_class_label_of_attack_matches_canonical_form():
    atk = canonical(2.0, 0.5)
    cf = canonical_form("CAmp", 2.0, 0.5)
    assert atk.class_label == cf.class_label
    assert atk.invariants == cf.invariants
