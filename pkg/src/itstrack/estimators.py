"""MAP coordinate-descent estimator of (beta, omega, phi) and an ML baseline.

Each coherence block yields L pilot observations y = sqrt(P) Theta D_h g + n.
The MAP tracker minimises the negative log posterior

    J(beta, omega, phi) = P beta^2 ||b(phi)||^2
                          - 2 sqrt(P) beta Re{ e^{j omega} y^H b(phi) }
                          + gamma_beta (beta - mu_beta)^2
                          + gamma_phi  (phi  - mu_phi)^2
                          - gamma_omega cos(omega - mu_omega)

with b(phi) = Theta (h o a(phi)).  omega and beta have exact closed-form
minimisers; phi is found by grid search over the prior window.  The ML
baseline ignores the priors and scans the whole angular domain.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .channel import ChannelState, StaticChannel, HALF_PI, TWO_PI, steering_matrix, steering_vector
from .priors import PenaltyWeights, PriorSet

# Relative decrease of J below which a full coordinate sweep counts as converged.
SWEEP_REL_TOL = 1e-9
MAX_SWEEPS = 50


@dataclass
class ObservationContext:
    """Everything fixed while one block's estimate is computed."""

    y: np.ndarray
    theta_rows: np.ndarray
    h: StaticChannel
    pilot_power: float
    sigma2: float
    priors: PriorSet
    weights: PenaltyWeights

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=complex)
        self.theta_rows = np.asarray(self.theta_rows, dtype=complex)
        if self.y.ndim != 1 or self.y.size == 0:
            raise ValueError("y must be a non-empty 1-D vector")
        if self.theta_rows.shape != (self.y.size, self.h.num_elements):
            raise ValueError("theta_rows must be (L, M) matching y and h")
        if not np.allclose(np.abs(self.theta_rows), 1.0, atol=1e-8):
            raise ValueError("surface configurations must be unit modulus")
        if self.pilot_power <= 0.0:
            raise ValueError("pilot_power must be positive")
        if self.sigma2 <= 0.0:
            raise ValueError("sigma2 must be positive")


@dataclass
class PhiGrid:
    """Uniform angle grid used by the grid-search coordinate update."""

    lo: float
    hi: float
    num_points: int
    values: np.ndarray = field(init=False)

    def __post_init__(self):
        if not -HALF_PI - 1e-12 <= self.lo <= self.hi <= HALF_PI + 1e-12:
            raise ValueError("grid must satisfy -pi/2 <= lo <= hi <= pi/2")
        if self.num_points < 1:
            raise ValueError("num_points must be >= 1")
        self.values = np.linspace(self.lo, self.hi, self.num_points)

    @classmethod
    def from_priors(cls, priors: PriorSet, num_points: int) -> "PhiGrid":
        lo, hi = priors.phi_interval()
        return cls(lo=lo, hi=hi, num_points=num_points)


def b_vector(ctx: ObservationContext, phi: float) -> np.ndarray:
    """Effective pilot response b(phi) = Theta (h o a(phi)), shape (L,)."""
    a = steering_vector(ctx.h.num_elements, phi)
    return ctx.theta_rows @ (ctx.h.h * a)


def objective_J(ctx: ObservationContext, state: ChannelState) -> float:
    """Negative log posterior (up to constants) at the given state."""
    b = b_vector(ctx, state.phi)
    bnorm2 = float(np.vdot(b, b).real)
    yhb = complex(np.vdot(ctx.y, b))
    p = ctx.pilot_power
    w = ctx.weights
    pr = ctx.priors
    re_term = math.cos(state.omega) * yhb.real - math.sin(state.omega) * yhb.imag
    return (p * state.beta ** 2 * bnorm2
            - 2.0 * math.sqrt(p) * state.beta * re_term
            + w.gamma_beta * (state.beta - pr.mu_beta) ** 2
            + w.gamma_phi * (state.phi - pr.mu_phi) ** 2
            - w.gamma_omega * math.cos(state.omega - pr.mu_omega))


def update_omega(ctx: ObservationContext, beta: float, phi: float) -> float:
    """Exact minimiser of J over omega for fixed (beta, phi).

    J depends on omega through -Re{ z e^{j omega} } with
    z = 2 sqrt(P) beta y^H b(phi) + gamma_omega e^{-j mu_omega}, so the
    minimiser is omega = -arg(z).  A vanishing z leaves J flat in omega; the
    prior mean is returned.
    """
    b = b_vector(ctx, phi)
    z = (2.0 * math.sqrt(ctx.pilot_power) * beta * complex(np.vdot(ctx.y, b))
         + ctx.weights.gamma_omega * np.exp(-1j * ctx.priors.mu_omega))
    if z == 0.0:
        return ctx.priors.mu_omega % TWO_PI
    return (-np.angle(z)) % TWO_PI


def update_beta(ctx: ObservationContext, omega: float, phi: float) -> float:
    """Exact minimiser of J over beta >= 0 for fixed (omega, phi).

    The unconstrained minimiser of the quadratic is
    (sqrt(P) Re{e^{j omega} y^H b} + gamma_beta mu_beta) /
    (P ||b||^2 + gamma_beta), projected onto beta >= 0.
    """
    b = b_vector(ctx, phi)
    bnorm2 = float(np.vdot(b, b).real)
    yhb = complex(np.vdot(ctx.y, b))
    num = (math.sqrt(ctx.pilot_power)
           * (math.cos(omega) * yhb.real - math.sin(omega) * yhb.imag)
           + ctx.weights.gamma_beta * ctx.priors.mu_beta)
    den = ctx.pilot_power * bnorm2 + ctx.weights.gamma_beta
    if den == 0.0:
        return max(0.0, ctx.priors.mu_beta)
    return max(0.0, num / den)


def _grid_quantities(ctx: ObservationContext, values: np.ndarray):
    """||b(phi)||^2 and y^H b(phi) on the whole grid in one pass."""
    a = steering_matrix(ctx.h.num_elements, values)
    b = ctx.theta_rows @ (ctx.h.h[:, None] * a)
    bnorm2 = np.einsum("lg,lg->g", b.conj(), b).real
    yhb = np.conj(ctx.y) @ b
    return bnorm2, yhb


def _grid_objective(ctx: ObservationContext, values: np.ndarray,
                    bnorm2: np.ndarray, yhb: np.ndarray,
                    beta: float, omega: float) -> np.ndarray:
    """J evaluated at (beta, omega, phi_g) for every grid point."""
    p = ctx.pilot_power
    w = ctx.weights
    pr = ctx.priors
    re_term = math.cos(omega) * yhb.real - math.sin(omega) * yhb.imag
    return (p * beta * beta * bnorm2
            - 2.0 * math.sqrt(p) * beta * re_term
            + w.gamma_beta * (beta - pr.mu_beta) ** 2
            + w.gamma_phi * (values - pr.mu_phi) ** 2
            - w.gamma_omega * math.cos(omega - pr.mu_omega))


def _select_phi_index(j_grid: np.ndarray, values: np.ndarray, mu_phi: float) -> int:
    """Arg-min index with ties broken towards mu_phi, then the smaller angle."""
    j_min = j_grid.min()
    cand = np.flatnonzero(j_grid == j_min)
    if cand.size == 1:
        return int(cand[0])
    order = np.lexsort((values[cand], np.abs(values[cand] - mu_phi)))
    return int(cand[order[0]])


def update_phi(ctx: ObservationContext, beta: float, omega: float,
               grid: PhiGrid) -> float:
    """Grid minimiser of J over phi for fixed (beta, omega)."""
    bnorm2, yhb = _grid_quantities(ctx, grid.values)
    j_grid = _grid_objective(ctx, grid.values, bnorm2, yhb, beta, omega)
    return float(grid.values[_select_phi_index(j_grid, grid.values, ctx.priors.mu_phi)])


@dataclass
class MapResult:
    """Outcome of one block's coordinate descent."""

    state: ChannelState
    iterations: int
    final_j: float
    converged: bool
    j_trace: list[float]


def map_estimate(ctx: ObservationContext, grid: PhiGrid) -> MapResult:
    """Cyclic coordinate descent on J starting from the prior means.

    Sweeps omega -> beta -> phi; the first two updates are exact minimisers
    and phi is re-selected from the grid, so J never increases.  Stops when a
    full sweep reduces J by less than SWEEP_REL_TOL relatively, or after
    MAX_SWEEPS sweeps (reported via ``converged``).
    """
    values = grid.values
    bnorm2, yhb = _grid_quantities(ctx, values)
    p = ctx.pilot_power
    sqrt_p = math.sqrt(p)
    w = ctx.weights
    pr = ctx.priors
    gamma_mu = w.gamma_omega * np.exp(-1j * pr.mu_omega)

    def j_at(beta: float, omega: float, g: int) -> float:
        re_term = math.cos(omega) * yhb[g].real - math.sin(omega) * yhb[g].imag
        return (p * beta * beta * bnorm2[g]
                - 2.0 * sqrt_p * beta * re_term
                + w.gamma_beta * (beta - pr.mu_beta) ** 2
                + w.gamma_phi * (values[g] - pr.mu_phi) ** 2
                - w.gamma_omega * math.cos(omega - pr.mu_omega))

    beta = pr.mu_beta
    omega = pr.mu_omega % TWO_PI
    g = int(np.argmin(np.abs(values - pr.mu_phi)))
    j_prev = j_at(beta, omega, g)
    trace = [j_prev]
    converged = False
    sweeps = 0
    for sweeps in range(1, MAX_SWEEPS + 1):
        z = 2.0 * sqrt_p * beta * yhb[g] + gamma_mu
        if z != 0.0:
            omega = float(-np.angle(z)) % TWO_PI
        else:
            omega = pr.mu_omega % TWO_PI
        trace.append(j_at(beta, omega, g))

        re_term = math.cos(omega) * yhb[g].real - math.sin(omega) * yhb[g].imag
        den = p * bnorm2[g] + w.gamma_beta
        if den == 0.0:
            beta = max(0.0, pr.mu_beta)
        else:
            beta = max(0.0, (sqrt_p * re_term + w.gamma_beta * pr.mu_beta) / den)
        trace.append(j_at(beta, omega, g))

        j_grid = _grid_objective(ctx, values, bnorm2, yhb, beta, omega)
        g = _select_phi_index(j_grid, values, pr.mu_phi)
        j_new = j_at(beta, omega, g)
        trace.append(j_new)

        if j_prev - j_new <= SWEEP_REL_TOL * max(abs(j_prev), 1e-300):
            converged = True
            break
        j_prev = j_new

    state = ChannelState(beta=beta, omega=omega, phi=values[g])
    return MapResult(state=state, iterations=sweeps,
                     final_j=objective_J(ctx, state),
                     converged=converged, j_trace=trace)


def _ml_core(y: np.ndarray, dh_a: np.ndarray, theta_rows: np.ndarray,
             values: np.ndarray, pilot_power: float) -> ChannelState:
    b = theta_rows @ dh_a
    bnorm2 = np.einsum("lg,lg->g", b.conj(), b).real
    yhb = np.conj(y) @ b
    crit = np.zeros_like(bnorm2)
    np.divide(np.abs(yhb) ** 2, bnorm2, out=crit, where=bnorm2 > 0.0)
    g = int(np.argmax(crit))
    if bnorm2[g] > 0.0:
        alpha = np.conj(yhb[g]) / (math.sqrt(pilot_power) * bnorm2[g])
    else:
        alpha = 0.0j
    return ChannelState(beta=abs(alpha),
                        omega=float(np.angle(alpha)) % TWO_PI,
                        phi=float(values[g]))


def ml_estimate(y: np.ndarray, theta_rows: np.ndarray, h: StaticChannel,
                pilot_power: float, grid: PhiGrid) -> ChannelState:
    """Prior-free baseline: match-filter scan of phi, then LS amplitude/phase.

    phi maximises |b(phi)^H y|^2 / ||b(phi)||^2 over the grid (first grid
    point wins ties); the complex gain alpha = b^H y / (sqrt(P) ||b||^2) at
    the winner gives beta = |alpha| and omega = arg(alpha).
    """
    y = np.asarray(y, dtype=complex)
    theta_rows = np.asarray(theta_rows, dtype=complex)
    if pilot_power <= 0.0:
        raise ValueError("pilot_power must be positive")
    dh_a = h.h[:, None] * steering_matrix(h.num_elements, grid.values)
    return _ml_core(y, dh_a, theta_rows, grid.values, pilot_power)
