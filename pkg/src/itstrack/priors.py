"""Per-block priors on (beta, omega, phi) and the induced penalty weights.

At block t the tracker centres Gaussian priors on the previous amplitude and
angle estimates and a von Mises prior on the previous phase estimate.  The
assumed spreads come from the dynamics model, optionally scaled by a mismatch
regime so that the tracker's model of the walk differs from the walk that
actually generated the data.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import i0e

from .channel import ChannelState, DynamicsParams, HALF_PI, TWO_PI

MISMATCH_KINDS = ("none", "conservative", "over_confident")

# Half-width of the angular search window in prior standard deviations.
PHI_WINDOW_SIGMAS = 3.0


def vonmises_logpdf(omega: float, mu: float, kappa: float) -> float:
    """Log density of the von Mises distribution at omega.

    Uses the exponentially scaled Bessel function, so the normaliser
    log(2 pi I_0(kappa)) stays finite for large concentrations.
    """
    if not (kappa >= 0.0 and math.isfinite(kappa)):
        raise ValueError("kappa must be finite and non-negative")
    log_norm = math.log(TWO_PI) + math.log(float(i0e(kappa))) + kappa
    return kappa * math.cos(omega - mu) - log_norm


def sample_vonmises(mu: float, kappa: float, rng: np.random.Generator) -> float:
    """Draw one angle from vonMises(mu, kappa), wrapped to [0, 2 pi).

    kappa = 0 degenerates to the uniform distribution on the circle.  The
    draw is a zero-mean deviate shifted by mu, so realisations with a common
    generator state differ across mu by a pure rotation.
    """
    if kappa < 0.0:
        raise ValueError("kappa must be non-negative")
    return (mu + rng.vonmises(0.0, kappa)) % TWO_PI


@dataclass
class PriorSet:
    """Prior parameters for one coherence block."""

    mu_beta: float
    sigma_beta_est: float
    mu_omega: float
    kappa_est: float
    mu_phi: float
    sigma_phi_est: float

    def __post_init__(self):
        if self.mu_beta < 0.0:
            raise ValueError("mu_beta must be non-negative")
        if self.sigma_beta_est <= 0.0 or self.sigma_phi_est <= 0.0:
            raise ValueError("prior spreads must be positive")
        if self.kappa_est < 0.0:
            raise ValueError("kappa_est must be non-negative")
        if self.phi_interval()[0] > self.phi_interval()[1]:
            raise ValueError("angular search window lies outside [-pi/2, pi/2]")

    @property
    def delta_phi(self) -> float:
        """Half-width of the angular search window."""
        return PHI_WINDOW_SIGMAS * self.sigma_phi_est

    def phi_interval(self) -> tuple[float, float]:
        """Search window [mu_phi - delta, mu_phi + delta] clipped to [-pi/2, pi/2]."""
        lo = max(-HALF_PI, self.mu_phi - self.delta_phi)
        hi = min(HALF_PI, self.mu_phi + self.delta_phi)
        return lo, hi


@dataclass
class PenaltyWeights:
    """Quadratic / cosine penalty weights of the MAP objective."""

    gamma_beta: float
    gamma_omega: float
    gamma_phi: float

    def __post_init__(self):
        if min(self.gamma_beta, self.gamma_omega, self.gamma_phi) < 0.0:
            raise ValueError("penalty weights must be non-negative")


def penalty_weights(sigma2: float, priors: PriorSet) -> PenaltyWeights:
    """Map noise power and prior spreads to the objective's penalty weights.

    gamma_beta = sigma^2 / (2 sigma_beta^2), gamma_phi = sigma^2 /
    (2 sigma_phi^2), gamma_omega = sigma^2 * kappa.
    """
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    return PenaltyWeights(
        gamma_beta=sigma2 / (2.0 * priors.sigma_beta_est ** 2),
        gamma_omega=sigma2 * priors.kappa_est,
        gamma_phi=sigma2 / (2.0 * priors.sigma_phi_est ** 2),
    )


@dataclass
class MismatchRegime:
    """Multiplicative factors applied to the tracker's assumed spreads."""

    kind: str
    f_phi: float
    f_beta: float
    f_kappa: float

    def __post_init__(self):
        if self.kind not in MISMATCH_KINDS:
            raise ValueError(f"unknown mismatch kind {self.kind!r}")
        if self.kind == "none":
            ok = self.f_phi == self.f_beta == self.f_kappa == 1.0
        elif self.kind == "conservative":
            ok = (1.0 <= self.f_phi <= 2.0 and 1.0 <= self.f_beta <= 2.0
                  and 0.5 <= self.f_kappa <= 1.0)
        else:
            ok = (0.5 <= self.f_phi <= 1.0 and 0.5 <= self.f_beta <= 1.0
                  and 1.0 <= self.f_kappa <= 2.0)
        if not ok:
            raise ValueError(f"factors outside the {self.kind} regime")


def draw_mismatch(kind: str, rng: np.random.Generator) -> MismatchRegime:
    """Draw the per-trial mismatch factors for the given regime.

    Conservative trackers assume wider walks than the truth (inflated
    sigma_phi, sigma_beta; deflated kappa); over-confident trackers assume
    narrower ones.  ``none`` keeps the assumed model exact.
    """
    if kind not in MISMATCH_KINDS:
        raise ValueError(f"unknown mismatch kind {kind!r}")
    if kind == "none":
        return MismatchRegime(kind, 1.0, 1.0, 1.0)
    if kind == "conservative":
        f_phi = rng.uniform(1.0, 2.0)
        f_beta = rng.uniform(1.0, 2.0)
        f_kappa = rng.uniform(0.5, 1.0)
    else:
        f_phi = rng.uniform(0.5, 1.0)
        f_beta = rng.uniform(0.5, 1.0)
        f_kappa = rng.uniform(1.0, 2.0)
    return MismatchRegime(kind, f_phi, f_beta, f_kappa)


def build_priors(previous: ChannelState, dynamics: DynamicsParams,
                 mismatch: MismatchRegime) -> PriorSet:
    """Centre the block-t priors on the block t-1 estimate.

    The assumed spreads are the dynamics spreads scaled by the mismatch
    factors; the centres are the previous point estimates.
    """
    return PriorSet(
        mu_beta=previous.beta,
        sigma_beta_est=mismatch.f_beta * dynamics.sigma_beta,
        mu_omega=previous.omega,
        kappa_est=mismatch.f_kappa * dynamics.kappa,
        mu_phi=previous.phi,
        sigma_phi_est=mismatch.f_phi * dynamics.sigma_phi,
    )
