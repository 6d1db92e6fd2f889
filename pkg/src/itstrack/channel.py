"""Geometry, static feed-to-surface channel, and the evolving user-side link.

The transmitting surface is a uniform linear array of M passive elements on
the y-axis with half-wavelength spacing, illuminated by a single feed antenna
placed a short distance behind it.  The feed-to-surface channel h is static
for the whole simulation; the surface-to-user link g_t = beta_t e^{j omega_t}
a(phi_t) evolves across coherence blocks through a first-order Markov model.
"""

from dataclasses import dataclass
import math

import numpy as np

SPEED_OF_LIGHT = 299792458.0

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


def centered_indices(num_elements: int) -> np.ndarray:
    """Element indices m - (M-1)/2, symmetric about the array centre."""
    return np.arange(num_elements) - 0.5 * (num_elements - 1)


def steering_vector(num_elements: int, phi: float) -> np.ndarray:
    """Array response a(phi) of the half-wavelength ULA, shape (M,)."""
    return np.exp(1j * math.pi * math.sin(phi) * centered_indices(num_elements))


def steering_matrix(num_elements: int, phis: np.ndarray) -> np.ndarray:
    """Column-stacked array responses for a batch of angles, shape (M, len(phis))."""
    phase = np.pi * np.outer(centered_indices(num_elements), np.sin(phis))
    return np.exp(1j * phase)


def array_response(phi: float, geometry: "ItsGeometry") -> np.ndarray:
    """a(phi) for the given surface; phi must lie in [-pi/2, pi/2]."""
    if not -HALF_PI <= phi <= HALF_PI:
        raise ValueError("phi must lie in [-pi/2, pi/2]")
    return steering_vector(geometry.num_elements, phi)


@dataclass
class ItsGeometry:
    """Physical layout of the surface and its feed antenna.

    Attributes
    ----------
    num_elements : int
        Number of surface elements M (even, >= 2).
    carrier_frequency : float
        Carrier frequency in Hz.
    wavelength : float
        Carrier wavelength in metres.
    element_positions : np.ndarray
        (M,) y-coordinates of the elements in metres, centred on the origin.
    antenna_position : np.ndarray
        (3,) position of the feed antenna in metres.
    """

    num_elements: int
    carrier_frequency: float
    wavelength: float
    element_positions: np.ndarray
    antenna_position: np.ndarray


def build_geometry(num_elements: int,
                   carrier_frequency: float,
                   antenna_position=(-1.0, 0.0, 0.0)) -> ItsGeometry:
    """Construct the surface geometry with half-wavelength element spacing."""
    if num_elements < 2 or num_elements % 2 != 0:
        raise ValueError("num_elements must be an even integer >= 2")
    if carrier_frequency <= 0.0:
        raise ValueError("carrier_frequency must be positive")
    antenna = np.asarray(antenna_position, dtype=float)
    if antenna.shape != (3,):
        raise ValueError("antenna_position must be a 3-vector")
    wavelength = SPEED_OF_LIGHT / carrier_frequency
    positions = centered_indices(num_elements) * (wavelength / 2.0)
    return ItsGeometry(num_elements=num_elements,
                       carrier_frequency=carrier_frequency,
                       wavelength=wavelength,
                       element_positions=positions,
                       antenna_position=antenna)


@dataclass
class StaticChannel:
    """Feed-to-surface channel vector h, fixed for a whole simulation run."""

    h: np.ndarray

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=complex)
        if self.h.ndim != 1 or self.h.size == 0:
            raise ValueError("h must be a non-empty 1-D complex vector")

    @property
    def num_elements(self) -> int:
        return self.h.size

    def d_h(self) -> np.ndarray:
        """Diagonal matrix diag(h)."""
        return np.diag(self.h)


def los_channel(geometry: ItsGeometry, rho0: float = 1.0) -> np.ndarray:
    """Deterministic line-of-sight part of the feed-to-surface channel.

    Each element m sees the feed at distance d_m under incidence angle
    phibar_m measured from the surface broadside; the cosine-squared element
    pattern and free-space loss give

        h_los[m] = rho0 * 2 cos^2(phibar_m) * (lambda / (4 pi d_m))
                   * exp(-j 2 pi d_m / lambda).
    """
    if not 0.0 <= rho0 <= 1.0:
        raise ValueError("rho0 must lie in [0, 1]")
    antenna = geometry.antenna_position
    dx = antenna[0]
    dy = antenna[1] - geometry.element_positions
    dz = antenna[2]
    dist = np.sqrt(dx * dx + dy * dy + dz * dz)
    if np.any(dist <= 0.0):
        raise ValueError("feed antenna coincides with a surface element")
    cos_inc = np.abs(dx) / dist
    lam = geometry.wavelength
    gain = rho0 * 2.0 * cos_inc ** 2 * (lam / (4.0 * np.pi * dist))
    return gain * np.exp(-1j * TWO_PI * dist / lam)


def exp_correlation(num_elements: int, coeff: float) -> np.ndarray:
    """Exponential spatial correlation matrix R[m, n] = coeff**|m - n|."""
    if not 0.0 <= coeff < 1.0:
        raise ValueError("correlation coefficient must lie in [0, 1)")
    idx = np.arange(num_elements)
    return coeff ** np.abs(idx[:, None] - idx[None, :])


def nlos_channel(geometry: ItsGeometry, p_los: float, rng: np.random.Generator,
                 r_its: np.ndarray | None = None) -> np.ndarray:
    """Random scattered part of the feed-to-surface channel.

    Drawn as sqrt(rho_nlos) * R^{1/2} w with w circularly-symmetric standard
    normal and rho_nlos = p_los / 10, i.e. the scattered power sits 10 dB
    below the average line-of-sight element power p_los.  ``r_its=None``
    selects spatially uncorrelated scattering (identity R).
    """
    if p_los < 0.0:
        raise ValueError("p_los must be non-negative")
    m = geometry.num_elements
    w = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / math.sqrt(2.0)
    rho_nlos = p_los / 10.0
    if r_its is None:
        return math.sqrt(rho_nlos) * w
    r_its = np.asarray(r_its, dtype=float)
    if r_its.shape != (m, m):
        raise ValueError("r_its must be (M, M)")
    if not np.allclose(r_its, r_its.T, atol=1e-10):
        raise ValueError("r_its must be symmetric")
    eigval, eigvec = np.linalg.eigh(r_its)
    if eigval.min() < -1e-10:
        raise ValueError("r_its must be positive semidefinite")
    root = (eigvec * np.sqrt(np.clip(eigval, 0.0, None))) @ eigvec.T
    return math.sqrt(rho_nlos) * (root @ w)


@dataclass
class ChannelState:
    """User-side link parameters (beta, omega, phi) for one coherence block.

    beta >= 0 is the path amplitude, omega the common phase wrapped to
    [0, 2 pi), and phi the angle of arrival clamped to [-pi/2, pi/2].
    """

    beta: float
    omega: float
    phi: float

    def __post_init__(self):
        self.beta = float(self.beta)
        if self.beta < 0.0:
            raise ValueError("beta must be non-negative")
        self.omega = float(self.omega) % TWO_PI
        self.phi = float(min(max(float(self.phi), -HALF_PI), HALF_PI))


@dataclass
class DynamicsParams:
    """Spread parameters of the first-order Markov state model."""

    sigma_phi: float = math.pi / 360.0
    sigma_beta: float = 1e-6
    kappa: float = 100.0

    def __post_init__(self):
        if self.sigma_phi < 0.0 or self.sigma_beta < 0.0:
            raise ValueError("sigma_phi and sigma_beta must be non-negative")
        if not self.kappa > 0.0:
            raise ValueError("kappa must be positive")


def evolve_state(state: ChannelState, dynamics: DynamicsParams,
                 rng: np.random.Generator) -> ChannelState:
    """One Markov transition of the user-side link.

    phi does a clamped Gaussian walk, beta a Gaussian walk rectified at zero,
    and omega a von Mises walk around its previous value.  An infinite kappa
    is treated as the degenerate (noise-free) phase transition.
    """
    phi = rng.normal(state.phi, dynamics.sigma_phi)
    beta = max(0.0, rng.normal(state.beta, dynamics.sigma_beta))
    if math.isinf(dynamics.kappa):
        omega = state.omega
    else:
        omega = (state.omega + rng.vonmises(0.0, dynamics.kappa)) % TWO_PI
    return ChannelState(beta=beta, omega=omega, phi=phi)


def synthesize_g(state: ChannelState, geometry: ItsGeometry) -> np.ndarray:
    """Surface-to-user channel g = beta e^{j omega} a(phi), shape (M,)."""
    return (state.beta * np.exp(1j * state.omega)
            * steering_vector(geometry.num_elements, state.phi))
