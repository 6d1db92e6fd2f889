"""Geometry, static channel, array response, and state evolution tests."""

import math

import numpy as np
import pytest

import itstrack as it

TWO_PI = 2.0 * math.pi

# c / 30 GHz, hand-evaluated once and frozen.
LAMBDA_30GHZ = 0.009993081933333333


def test_build_geometry_wavelength():
    geom = it.build_geometry(64, 30e9, (-1.0, 0.0, 0.0))
    assert geom.wavelength == pytest.approx(LAMBDA_30GHZ, rel=1e-12)
    assert geom.wavelength == pytest.approx(9.9931e-3, rel=1e-4)


def test_build_geometry_edge_element():
    # y_m = (m - (M-1)/2) lambda/2; for m=0, M=64 that is -31.5 * lambda/2.
    geom = it.build_geometry(64, 30e9, (-1.0, 0.0, 0.0))
    assert geom.element_positions[0] == pytest.approx(-31.5 * LAMBDA_30GHZ / 2.0,
                                                      rel=1e-12)
    assert geom.element_positions[0] == pytest.approx(-0.15739104045, rel=1e-9)
    assert geom.element_positions[-1] == -geom.element_positions[0]


def test_build_geometry_two_elements():
    geom = it.build_geometry(2, 30e9, (-1.0, 0.0, 0.0))
    lam = geom.wavelength
    assert np.allclose(geom.element_positions, [-lam / 4.0, lam / 4.0])


def test_build_geometry_rejects_bad_m():
    with pytest.raises(ValueError):
        it.build_geometry(63, 30e9)
    with pytest.raises(ValueError):
        it.build_geometry(0, 30e9)
    with pytest.raises(ValueError):
        it.build_geometry(64, -1.0)


def test_los_center_magnitude():
    # Center elements sit at distance ~1 with cos ~ 1, so |h| ~ 2 lambda/(4 pi).
    geom = it.build_geometry(64, 30e9, (-1.0, 0.0, 0.0))
    h = it.los_channel(geom, 1.0)
    expected = 2.0 * LAMBDA_30GHZ / (4.0 * math.pi)
    assert expected == pytest.approx(1.590e-3, rel=1e-3)
    mid = np.argmin(np.abs(geom.element_positions))
    assert abs(h[mid]) == pytest.approx(expected, rel=2e-3)


def test_los_rho0_zero_and_range():
    geom = it.build_geometry(8, 30e9)
    assert np.all(it.los_channel(geom, 0.0) == 0.0)
    with pytest.raises(ValueError):
        it.los_channel(geom, 1.5)
    with pytest.raises(ValueError):
        it.los_channel(geom, -0.1)


def test_los_symmetric_and_decaying():
    geom = it.build_geometry(64, 30e9, (-1.0, 0.0, 0.0))
    mag = np.abs(it.los_channel(geom, 1.0))
    assert np.allclose(mag, mag[::-1], rtol=1e-12)
    upper = mag[32:]
    assert np.all(np.diff(upper) < 0.0)


def test_los_phase_matches_distance():
    geom = it.build_geometry(8, 30e9, (-1.0, 0.0, 0.0))
    h = it.los_channel(geom, 1.0)
    d = np.sqrt(1.0 + geom.element_positions ** 2)
    assert np.allclose(np.angle(h), np.angle(np.exp(-1j * TWO_PI * d / geom.wavelength)))


def test_nlos_reproducible_and_power():
    geom = it.build_geometry(8, 30e9)
    a = it.nlos_channel(geom, 1.0, np.random.default_rng(7))
    b = it.nlos_channel(geom, 1.0, np.random.default_rng(7))
    assert np.array_equal(a, b)
    assert np.all(it.nlos_channel(geom, 0.0, np.random.default_rng(0)) == 0.0)

    rng = np.random.default_rng(11)
    p_los = 1.0
    draws = np.stack([it.nlos_channel(geom, p_los, rng) for _ in range(10000)])
    per_element = np.mean(np.abs(draws) ** 2, axis=0)
    assert np.allclose(per_element, p_los / 10.0, rtol=0.05)
    # E||h||^2 = M * rho_nlos; check the sample mean sits in a 3-sigma band.
    norms = np.sum(np.abs(draws) ** 2, axis=1)
    se = norms.std(ddof=1) / math.sqrt(norms.size)
    assert abs(norms.mean() - 8 * p_los / 10.0) < 3.0 * se


def test_nlos_correlation_validation():
    geom = it.build_geometry(4, 30e9)
    rng = np.random.default_rng(0)
    bad = np.eye(4)
    bad[0, 1] = 0.5
    with pytest.raises(ValueError):
        it.nlos_channel(geom, 1.0, rng, bad)  # not symmetric
    neg = np.eye(4)
    neg[0, 0] = -1.0
    with pytest.raises(ValueError):
        it.nlos_channel(geom, 1.0, rng, neg)  # not PSD


def test_nlos_exponential_correlation():
    r = it.exp_correlation(4, 0.5)
    assert np.allclose(np.diag(r), 1.0)
    assert r[0, 3] == pytest.approx(0.125)
    geom = it.build_geometry(4, 30e9)
    rng = np.random.default_rng(3)
    draws = np.stack([it.nlos_channel(geom, 1.0, rng, r) for _ in range(20000)])
    sample_cov = (draws.conj().T @ draws) / draws.shape[0]
    assert np.allclose(sample_cov.real, 0.1 * r, atol=0.01)


def test_array_response_basics():
    geom = it.build_geometry(8, 30e9)
    a0 = it.array_response(0.0, geom)
    assert np.allclose(a0, 1.0)
    rng = np.random.default_rng(2)
    for phi in rng.uniform(-np.pi / 2, np.pi / 2, 20):
        a = it.array_response(phi, geom)
        assert np.allclose(np.abs(a), 1.0, rtol=1e-12)
        assert np.vdot(a, a).real == pytest.approx(8.0, rel=1e-12)


def test_array_response_dft_orthogonality():
    # sin(phi) - sin(phi') = 2/M gives orthogonal responses.
    geom = it.build_geometry(8, 30e9)
    phi1 = math.asin(0.25)
    phi2 = math.asin(0.25 - 2.0 / 8.0)
    a1 = it.array_response(phi1, geom)
    a2 = it.array_response(phi2, geom)
    assert abs(np.vdot(a1, a2)) < 1e-10


def test_synthesize_g():
    geom = it.build_geometry(8, 30e9)
    assert np.all(it.synthesize_g(it.ChannelState(0.0, 1.0, 0.3), geom) == 0.0)
    g = it.synthesize_g(it.ChannelState(1.0, 0.0, 0.0), geom)
    assert np.allclose(g, 1.0)
    rng = np.random.default_rng(4)
    for _ in range(20):
        beta = rng.uniform(0.0, 2.0)
        st = it.ChannelState(beta, rng.uniform(0, TWO_PI),
                             rng.uniform(-1.5, 1.5))
        g = it.synthesize_g(st, geom)
        assert np.vdot(g, g).real == pytest.approx(beta ** 2 * 8, rel=1e-12)


def test_channel_state_normalization():
    st = it.ChannelState(1.0, -1.0, 2.0)
    assert st.omega == pytest.approx(TWO_PI - 1.0)
    assert st.phi == pytest.approx(math.pi / 2.0)
    with pytest.raises(ValueError):
        it.ChannelState(-1e-12, 0.0, 0.0)


def test_evolve_state_degenerate():
    dyn = it.DynamicsParams(sigma_phi=0.0, sigma_beta=0.0, kappa=np.inf)
    st = it.ChannelState(5e-5, 1.2, 0.3)
    nxt = it.evolve_state(st, dyn, np.random.default_rng(0))
    assert (nxt.beta, nxt.omega, nxt.phi) == (st.beta, st.omega, st.phi)


def test_evolve_state_walk_spread():
    # After 50 steps the AoA displacement std is sqrt(50) * sigma_phi.
    dyn = it.DynamicsParams()
    rng = np.random.default_rng(123)
    n = 2000
    finals = np.empty(n)
    for i in range(n):
        st = it.ChannelState(5e-5, 0.0, 0.0)
        for _ in range(50):
            st = it.evolve_state(st, dyn, rng)
        finals[i] = st.phi
    expected = math.sqrt(50.0) * math.pi / 360.0
    assert expected == pytest.approx(0.0617, rel=1e-3)
    assert finals.std(ddof=1) == pytest.approx(expected, rel=0.10)


def test_evolve_state_beta_never_negative():
    # Heavy-spread walk: the clamp has to fire often, beta must stay >= 0.
    dyn = it.DynamicsParams(sigma_phi=1e-3, sigma_beta=1e-4, kappa=50.0)
    rng = np.random.default_rng(99)
    st = it.ChannelState(5e-5, 0.0, 0.0)
    for _ in range(1_000_000):
        st = it.evolve_state(st, dyn, rng)
        if st.beta < 0.0:
            raise AssertionError("negative amplitude escaped the clamp")


def test_evolve_state_phi_clamped():
    dyn = it.DynamicsParams(sigma_phi=1.0, sigma_beta=1e-6, kappa=100.0)
    rng = np.random.default_rng(5)
    st = it.ChannelState(5e-5, 0.0, 1.5)
    for _ in range(200):
        st = it.evolve_state(st, dyn, rng)
        assert -math.pi / 2 <= st.phi <= math.pi / 2
        assert 0.0 <= st.omega < TWO_PI


def test_evolve_state_deterministic():
    dyn = it.DynamicsParams()
    st = it.ChannelState(5e-5, 1.0, 0.1)
    a = it.evolve_state(st, dyn, np.random.default_rng(42))
    b = it.evolve_state(st, dyn, np.random.default_rng(42))
    assert (a.beta, a.omega, a.phi) == (b.beta, b.omega, b.phi)
