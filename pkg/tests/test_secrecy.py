import numpy as np
import pytest

from conftest import crandn
from xlris.geometry import ChannelSet
from xlris.secrecy import (CascadedChannels, NoiseAndLimits, Precoders, RisVector, cascade,
                           check_constraints, rates_and_secrecy, rates_nats, sinr_user)


def _random_set(rng, N=8, M=4):
    return ChannelSet(crandn(rng, N, M), crandn(rng, N), crandn(rng, N))


def test_cascade_identity_and_linear_form():
    rng = np.random.default_rng(0)
    ch = _random_set(rng)
    v = np.exp(1j * rng.uniform(-np.pi, np.pi, 8))
    w = crandn(rng, 4)
    cas = cascade(ch, RisVector(v))
    direct = ch.h.conj() @ np.diag(v) @ ch.G @ w
    assert abs(cas.h_u.conj() @ w - direct) < 1e-12
    assert abs(v @ (ch.h.conj() * (ch.G @ w)) - direct) < 1e-12


def test_cascade_first_row():
    rng = np.random.default_rng(1)
    G = crandn(rng, 3, 3)
    h = np.array([0.5 - 0.2j, 0, 0])
    cas = cascade(ChannelSet(G, h, np.zeros(3)), RisVector.ones(3))
    np.testing.assert_allclose(cas.h_u.conj(), np.conj(h[0]) * G[0])


def test_common_phase_invariance():
    rng = np.random.default_rng(2)
    ch = _random_set(rng)
    v = np.exp(1j * rng.uniform(-np.pi, np.pi, 8))
    p = Precoders(crandn(rng, 4), crandn(rng, 4))
    lim = NoiseAndLimits(sigma2=1.0, sigma2_eve=1.0)
    a = rates_and_secrecy(cascade(ch, RisVector(v)), p, lim)
    b = rates_and_secrecy(cascade(ch, RisVector(v * np.exp(0.7j))), p, lim)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_cascade_shape_mismatch():
    rng = np.random.default_rng(3)
    with pytest.raises(ValueError):
        cascade(_random_set(rng), RisVector.ones(5))


def test_sinr_unit_and_random():
    hu = np.array([1.0, 1j])
    lim = NoiseAndLimits(sigma2=2.0)
    w = np.array([np.sqrt(2), 0.0])  # |hu^H w|^2 = 2 = sigma^2
    assert abs(sinr_user(CascadedChannels(hu, hu), Precoders(w, np.zeros(2)), lim) - 1) < 1e-12
    rng = np.random.default_rng(9)
    hu, w = crandn(rng, 4), crandn(rng, 4)
    ref = abs(np.sum(hu.conj() * w)) ** 2 / 2.0
    assert abs(sinr_user(CascadedChannels(hu, hu), Precoders(w, crandn(rng, 4)), lim) - ref) < 1e-12


def test_sinr_orthogonal_precoder_zero():
    hu = np.array([1.0, 1j])
    w = np.array([1j, 1.0])  # conj(hu) @ w = 1j - 1j = 0
    assert sinr_user(CascadedChannels(hu, hu), Precoders(w, np.zeros(2)), NoiseAndLimits()) < 1e-30


def test_rates_direct_formula():
    rng = np.random.default_rng(4)
    lim = NoiseAndLimits(sigma2=0.3, sigma2_eve=0.7)
    for _ in range(20):
        hu, he = crandn(rng, 4), crandn(rng, 4)
        p = Precoders(crandn(rng, 4), crandn(rng, 4))
        r_u, r_e, r = rates_and_secrecy(CascadedChannels(hu, he), p, lim)
        su = abs(np.vdot(hu, p.w)) ** 2
        ref_u = np.log2(1 + su / 0.3)
        ref_e = np.log2(1 + abs(np.vdot(he, p.w)) ** 2 / (abs(np.vdot(he, p.w_jam)) ** 2 + 0.7))
        assert abs(r_u - ref_u) < 1e-12 and abs(r_e - ref_e) < 1e-12
        assert r == max(0.0, ref_u - ref_e) or abs(r - max(0.0, ref_u - ref_e)) < 1e-12
        n = rates_nats(CascadedChannels(hu, he), p, lim)
        assert abs(n.user / np.log(2) - ref_u) < 1e-12


def test_rates_limits():
    rng = np.random.default_rng(5)
    hu, w = crandn(rng, 3), crandn(rng, 3)
    lim = NoiseAndLimits(sigma2=1.0, sigma2_eve=1.0)
    r_u, r_e, r = rates_and_secrecy(CascadedChannels(hu, np.zeros(3)), Precoders(w, np.zeros(3)), lim)
    assert r_e == 0 and r == r_u
    _, _, r = rates_and_secrecy(CascadedChannels(hu, hu), Precoders(w, np.zeros(3)), lim)
    assert r == 0.0


def test_secrecy_monotone_in_jamming():
    hu, he = np.array([1.0, 0.0]), np.array([0.5, 0.5])
    w = np.array([1.0, 0.0])
    lim = NoiseAndLimits(sigma2=1.0, sigma2_eve=1.0)
    prev = -1
    for a in np.linspace(0, 3, 7):
        _, _, r = rates_and_secrecy(CascadedChannels(hu, he), Precoders(w, np.array([0, a])), lim)
        assert r >= prev
        prev = r


def test_check_constraints_boundaries():
    hu = np.array([1.0, 0.0])
    lim = NoiseAndLimits(sigma2=1.0, sigma2_eve=1.0, p_max=2.0, r_th=1.0)
    w = np.array([1.0, 0.0])
    rep = check_constraints(CascadedChannels(hu, hu), Precoders(w, w), lim, RisVector.ones(3))
    assert rep.sic and rep.sic_violation == 0.0 and rep.ok
    tol = 1e-3
    scale = np.sqrt(1 + tol / 2)
    p = Precoders(w * scale, w * scale)
    assert not check_constraints(CascadedChannels(hu, hu), p, lim, tol=0).power
    assert check_constraints(CascadedChannels(hu, hu), p, lim, tol=tol).power


def test_check_constraints_flags_each():
    hu = np.array([1.0, 0.0])
    lim = NoiseAndLimits(sigma2=1.0, sigma2_eve=1.0, p_max=1.0, r_th=2.0)
    rep = check_constraints(CascadedChannels(hu, hu), Precoders(np.array([1.0, 0]), np.zeros(2)), lim,
                            RisVector(np.array([1.0, 1.2])))
    assert not rep.qos and not rep.sic and not rep.unit_modulus and rep.power
    assert check_constraints(CascadedChannels(hu, hu), Precoders(np.array([1.0, 0]), np.zeros(2)), lim,
                             jamming=False).sic


def test_limits_validation():
    with pytest.raises(ValueError):
        NoiseAndLimits(p_max=0)
