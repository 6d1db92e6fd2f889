"""Shared builders for randomized estimator test instances.

Instances are drawn from the generative model itself (random static channel,
random truth state, priors centred near the truth) so that the contexts the
estimator tests see look like the ones the tracker produces.
"""

import math

import numpy as np

import itstrack as it

TWO_PI = 2.0 * math.pi


def make_channel(rng, m=8, f=30e9):
    geometry = it.build_geometry(m, f, (-1.0, 0.0, 0.0))
    h_los = it.los_channel(geometry, 1.0)
    p_los = float(np.mean(np.abs(h_los) ** 2))
    h_nlos = it.nlos_channel(geometry, p_los, rng)
    return geometry, it.StaticChannel(h_los + h_nlos)


def random_truth(rng):
    return it.ChannelState(beta=rng.uniform(1e-5, 1e-4),
                           omega=rng.uniform(0.0, TWO_PI),
                           phi=rng.uniform(-np.pi / 3.0, np.pi / 3.0))


def random_theta_rows(rng, l, m):
    return np.exp(1j * rng.uniform(0.0, TWO_PI, (l, m)))


def make_context(rng, m=8, l=2, snr_db=None, grid_points=201):
    """A random ObservationContext in the tracking envelope, plus its truth.

    Returns (ctx, grid, truth).  The priors are centred near the truth with
    random widths, the pilots are noisy observations of the truth, and the
    grid covers the prior window.
    """
    geometry, channel = make_channel(rng, m)
    truth = random_truth(rng)
    if snr_db is None:
        snr_db = rng.uniform(-5.0, 25.0)

    sigma_beta_est = truth.beta * rng.uniform(0.05, 0.3)
    mu_beta = max(0.0, truth.beta + sigma_beta_est * rng.standard_normal())
    sigma_phi_est = rng.uniform(0.005, 0.03)
    mu_phi = float(np.clip(truth.phi + 0.5 * sigma_phi_est * rng.standard_normal(),
                           -np.pi / 2 + 0.1, np.pi / 2 - 0.1))
    kappa_est = rng.uniform(20.0, 200.0)
    mu_omega = (truth.omega + rng.standard_normal() / math.sqrt(kappa_est)) % TWO_PI
    priors = it.PriorSet(mu_beta=mu_beta, sigma_beta_est=sigma_beta_est,
                         mu_omega=mu_omega, kappa_est=kappa_est,
                         mu_phi=mu_phi, sigma_phi_est=sigma_phi_est)

    theta_rows = random_theta_rows(rng, l, m)
    g_true = it.synthesize_g(truth, geometry)
    sigma2 = it.snr_to_sigma2(snr_db, channel.h, g_true, 1.0)
    y = it.simulate_pilots(g_true, theta_rows, channel.h, 1.0, sigma2, rng)

    ctx = it.ObservationContext(y=y, theta_rows=theta_rows, h=channel,
                                pilot_power=1.0, sigma2=sigma2, priors=priors,
                                weights=it.penalty_weights(sigma2, priors))
    grid = it.PhiGrid.from_priors(priors, grid_points)
    return ctx, grid, truth


def grid_j_omega(ctx, beta, phi, omegas):
    """J as a function of omega on a dense grid (independent evaluation)."""
    b = ctx.theta_rows @ (ctx.h.h * np.exp(
        1j * np.pi * math.sin(phi)
        * (np.arange(ctx.h.num_elements) - (ctx.h.num_elements - 1) / 2.0)))
    bnorm2 = float(np.vdot(b, b).real)
    yhb = complex(np.vdot(ctx.y, b))
    p = ctx.pilot_power
    w = ctx.weights
    pr = ctx.priors
    re_term = np.cos(omegas) * yhb.real - np.sin(omegas) * yhb.imag
    return (p * beta ** 2 * bnorm2 - 2.0 * math.sqrt(p) * beta * re_term
            + w.gamma_beta * (beta - pr.mu_beta) ** 2
            + w.gamma_phi * (phi - pr.mu_phi) ** 2
            - w.gamma_omega * np.cos(omegas - pr.mu_omega))


def grid_j_beta(ctx, omega, phi, betas):
    """J as a function of beta on a dense grid (independent evaluation)."""
    b = ctx.theta_rows @ (ctx.h.h * np.exp(
        1j * np.pi * math.sin(phi)
        * (np.arange(ctx.h.num_elements) - (ctx.h.num_elements - 1) / 2.0)))
    bnorm2 = float(np.vdot(b, b).real)
    yhb = complex(np.vdot(ctx.y, b))
    p = ctx.pilot_power
    w = ctx.weights
    pr = ctx.priors
    re_term = math.cos(omega) * yhb.real - math.sin(omega) * yhb.imag
    return (p * betas ** 2 * bnorm2 - 2.0 * math.sqrt(p) * betas * re_term
            + w.gamma_beta * (betas - pr.mu_beta) ** 2
            + w.gamma_phi * (phi - pr.mu_phi) ** 2
            - w.gamma_omega * math.cos(omega - pr.mu_omega))


def circular_diff(a, b):
    """Signed distance between two angles on the circle, in (-pi, pi]."""
    return (a - b + np.pi) % TWO_PI - np.pi
