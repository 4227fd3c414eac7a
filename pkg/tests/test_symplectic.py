import math

import numpy as np
import pytest
from conftest import close

from gaussrate.errors import DilationError, DomainError, SizeError
from gaussrate.symplectic import (
    OMEGA1,
    EulerAngles,
    beam_splitter,
    embed,
    euler_decompose,
    is_symplectic,
    omega,
    random_symplectic,
    recompose,
    rotation,
    symplectic_complete,
    symplectic_eigenvalues,
    tmsv_cov,
    two_mode_squeezer,
)


def test_omega_blocks():
    assert np.array_equal(omega(1), OMEGA1)
    om3 = omega(3)
    assert om3.shape == (6, 6)
    assert np.array_equal(om3[2:4, 2:4], OMEGA1)
    assert not np.any(om3[0:2, 2:4])


def test_omega_rejects_too_many_modes():
    with pytest.raises(SizeError):
        omega(4)


@pytest.mark.parametrize(
    "s",
    [rotation(0.3), np.diag([2.0, 0.5]), beam_splitter(0.3), two_mode_squeezer(2.5)],
)
def test_builders_are_symplectic(s):
    assert is_symplectic(s)


def test_non_symplectic_detected():
    assert not is_symplectic(2 * np.eye(2))
    assert not is_symplectic(np.diag([2.0, 0.6]))


def test_euler_roundtrip_random(rng):
    for _ in range(10_000):
        s = random_symplectic(rng, 20.0)
        angles = euler_decompose(s)
        assert 0.0 <= angles.phi < math.pi
        assert angles.lam >= 1.0
        assert 0.0 <= angles.psi < 2 * math.pi
        assert close(recompose(angles), s, rel=1e-9)


def test_euler_of_rotation_puts_angle_in_psi():
    angles = euler_decompose(rotation(0.7))
    assert angles.phi == 0.0
    assert angles.lam == 1.0
    assert angles.psi == pytest.approx(0.7, abs=1e-12)


def test_euler_of_diagonal_squeezer():
    angles = euler_decompose(np.diag([2.0, 0.5]))
    assert angles.lam == pytest.approx(2.0)
    assert close(angles.recompose(), np.diag([2.0, 0.5]), rel=1e-12)
    assert close(rotation(angles.phi) @ rotation(angles.psi), np.eye(2), rel=1e-12)


def test_euler_rejects_non_symplectic():
    with pytest.raises(DomainError):
        euler_decompose(np.diag([2.0, 2.0]))
    with pytest.raises(SizeError):
        euler_decompose(np.eye(4))


def test_zero_squeeze_sampler_gives_rotations(rng):
    for _ in range(20):
        s = random_symplectic(rng, 0.0)
        assert close(s @ s.T, np.eye(2), rel=1e-12)


def test_recompose_matches_formula():
    angles = EulerAngles(phi=0.4, lam=3.0, psi=1.1)
    expected = rotation(0.4) @ np.diag([3.0, 1 / 3.0]) @ rotation(1.1)
    assert close(recompose(angles), expected, rel=1e-14)


def test_symplectic_eigenvalues_of_thermal_and_tmsv():
    assert symplectic_eigenvalues(3.0 * np.eye(2)) == pytest.approx([3.0])
    assert symplectic_eigenvalues(tmsv_cov(5.0)) == pytest.approx([1.0, 1.0], abs=1e-9)


def test_symplectic_eigenvalues_are_invariant(rng):
    v = np.diag([4.0, 4.0, 2.0, 2.0])
    s = embed(random_symplectic(rng, 10.0), (0,), 2) @ beam_splitter(0.4)
    nus = symplectic_eigenvalues(s @ v @ s.T)
    assert nus == pytest.approx([4.0, 2.0], rel=1e-9)


def test_symplectic_eigenvalues_reject_asymmetric():
    with pytest.raises(DomainError):
        symplectic_eigenvalues(np.array([[2.0, 1.0], [0.0, 2.0]]))


def test_tmsv_rejects_low_variance():
    with pytest.raises(DomainError):
        tmsv_cov(0.5)


def test_beam_splitter_mixes_first_mode():
    bs = beam_splitter(0.25)
    out = bs @ np.array([1.0, 0.0, 0.0, 0.0])
    assert out[:2] == pytest.approx([0.5, 0.0])
    assert out[2:] == pytest.approx([-math.sqrt(0.75), 0.0])


def test_embed_places_block():
    s = embed(two_mode_squeezer(2.0), (0, 2), 3)
    assert is_symplectic(s)
    assert np.array_equal(s[2:4, 2:4], np.eye(2))
    assert s[0, 4] == pytest.approx(1.0)


def test_embed_rejects_bad_modes():
    with pytest.raises(SizeError):
        embed(beam_splitter(0.5), (0, 0), 3)
    with pytest.raises(SizeError):
        embed(beam_splitter(0.5), (0, 3), 3)


def test_complete_keeps_leading_rows(rng):
    full = embed(two_mode_squeezer(2.0), (0, 2), 3) @ embed(beam_splitter(0.3), (0, 1), 3)
    full = embed(random_symplectic(rng, 6.0), (0,), 3) @ full
    completed = symplectic_complete(full[:2])
    assert np.array_equal(completed[:2], full[:2])
    assert is_symplectic(completed, 1e-10)


def test_complete_rejects_non_pair():
    rows = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0]])
    with pytest.raises(DilationError) as exc:
        symplectic_complete(rows)
    assert exc.value.residual == pytest.approx(1.0)
