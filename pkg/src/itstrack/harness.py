"""Monte-Carlo harness: truth evolution, pilots, estimation, metric reduction.

A trial fixes the static channel, the initial state, and the mismatch factors,
then walks the user-side link over T coherence blocks.  In every block the
surface picks two pilot codewords from the previous block's estimate, observes
two noisy pilots, re-estimates the link, and records the spectral efficiency
the new estimate achieves.  Metrics are reduced over trials as ratios of sums,
so accumulation order cannot change the result.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import functools
import math

import numpy as np

from .beams import (NO_CODEWORD, dft_codebook, exploratory_select, myopic_select,
                    se_max_config, spectral_efficiency)
from .channel import (ChannelState, DynamicsParams, StaticChannel,
                      build_geometry, evolve_state, exp_correlation, los_channel,
                      nlos_channel, steering_matrix, synthesize_g)
from .estimators import ObservationContext, PhiGrid, _ml_core, map_estimate
from .priors import MISMATCH_KINDS, build_priors, draw_mismatch, penalty_weights

SCHEMES = ("map_myopic", "map_exploratory", "ml_myopic", "perfect_csi")

# Named substreams of a trial's seed; keeping truths, noise, and selection
# draws on separate streams lets different schemes share identical channels.
STREAM_CHANNEL = 0
STREAM_INIT = 1
STREAM_EVOLVE = 2
STREAM_NOISE = 3
STREAM_MISMATCH = 4
STREAM_EXPLORE = 5

INITIAL_BETA = 5e-5


@dataclass
class SimConfig:
    """Full parameterisation of one Monte-Carlo run."""

    num_elements: int = 64
    carrier_frequency: float = 30e9
    antenna_position: tuple = (-1.0, 0.0, 0.0)
    rho0: float = 1.0
    nlos_correlation: str = "identity"
    nlos_corr_coeff: float = 0.5
    dynamics: DynamicsParams = field(default_factory=DynamicsParams)
    num_blocks: int = 50
    num_trials: int = 1000
    snr_grid_db: tuple = (-10.0, 0.0, 10.0, 20.0)
    scheme: str = "map_myopic"
    mismatch: str = "conservative"
    master_seed: int = 0
    pilot_power: float = 1.0
    initial_beta: float = INITIAL_BETA
    phi_grid_points: int = 201
    ml_grid_points: int = 2001

    def __post_init__(self):
        if self.num_blocks < 1:
            raise ValueError("num_blocks must be >= 1")
        if self.num_trials < 1:
            raise ValueError("num_trials must be >= 1")
        if len(self.snr_grid_db) == 0:
            raise ValueError("snr_grid_db must be non-empty")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.mismatch not in MISMATCH_KINDS:
            raise ValueError(f"unknown mismatch kind {self.mismatch!r}")
        if self.nlos_correlation not in ("identity", "exponential"):
            raise ValueError("nlos_correlation must be 'identity' or 'exponential'")
        if self.phi_grid_points < 2 or self.ml_grid_points < 2:
            raise ValueError("grid sizes must be >= 2")
        if self.initial_beta < 0.0:
            raise ValueError("initial_beta must be non-negative")


@dataclass
class TrialResult:
    """Per-block records and final-block errors of one trial."""

    snr_db: float
    sigma2: float
    trial_seed: int
    true_beta: np.ndarray
    true_omega: np.ndarray
    true_phi: np.ndarray
    est_beta: np.ndarray
    est_omega: np.ndarray
    est_phi: np.ndarray
    se: np.ndarray
    se_perfect: np.ndarray
    codeword1: np.ndarray
    codeword2: np.ndarray
    trace_len: np.ndarray
    converged: np.ndarray
    err_g_sq: float
    ref_g_sq: float
    err_phi_sq: float
    ref_phi_sq: float

    @property
    def num_blocks(self) -> int:
        return self.true_phi.size

    def __post_init__(self):
        t = self.true_phi.size
        arrays = (self.true_beta, self.true_omega, self.true_phi, self.est_beta,
                  self.est_omega, self.est_phi, self.se, self.se_perfect,
                  self.codeword1, self.codeword2, self.trace_len, self.converged)
        if any(a.shape != (t,) for a in arrays):
            raise ValueError("per-block records must all have length T")


@dataclass
class SnrMetrics:
    """Reduced metrics for one SNR point."""

    snr_db: float
    num_trials: int
    nmse_channel: float
    nmse_aoa: float
    mean_se: float
    mean_se_perfect: float
    err_g_sum: float
    ref_g_sum: float
    err_phi_sum: float
    ref_phi_sum: float
    convergence_rate: float


@dataclass
class MetricsTable:
    """Per-SNR metric rows plus the designated trial's AoA trajectories."""

    scheme: str
    rows: list
    trajectories: dict

    def __post_init__(self):
        for row in self.rows:
            if min(row.nmse_channel, row.nmse_aoa, row.mean_se,
                   row.mean_se_perfect) < 0.0:
                raise ValueError("NMSE and SE metrics must be non-negative")


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Deterministic per-trial seed from the master seed and trial counter."""
    seq = np.random.SeedSequence([master_seed, trial_index])
    return int(seq.generate_state(1, np.uint64)[0])


def _stream(trial_seed: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([trial_seed, stream_id]))


def initial_state(rng: np.random.Generator,
                  beta0: float = INITIAL_BETA) -> tuple[ChannelState, ChannelState]:
    """Block-0 truth and its (accurate) initial estimate.

    omega_0 ~ Uniform[-pi, pi], phi_0 ~ Uniform[-pi/4, pi/4], beta_0 fixed;
    the tracker starts from an accurate initial estimate, so the returned
    estimate equals the truth.
    """
    omega = rng.uniform(-math.pi, math.pi)
    phi = rng.uniform(-math.pi / 4.0, math.pi / 4.0)
    truth = ChannelState(beta=beta0, omega=omega, phi=phi)
    return truth, ChannelState(beta=truth.beta, omega=truth.omega, phi=truth.phi)


def simulate_pilots(g: np.ndarray, theta_rows: np.ndarray, h: np.ndarray,
                    pilot_power: float, sigma2: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Noisy pilot observations y_l = sqrt(P) theta_l^T (h o g) + n_l."""
    if sigma2 < 0.0:
        raise ValueError("sigma2 must be non-negative")
    clean = math.sqrt(pilot_power) * (theta_rows @ (h * g))
    n_obs = clean.size
    noise = (rng.standard_normal(n_obs) + 1j * rng.standard_normal(n_obs))
    return clean + math.sqrt(sigma2 / 2.0) * noise


def snr_to_sigma2(snr_db: float, h: np.ndarray, g_ref: np.ndarray,
                  pilot_power: float) -> float:
    """Noise power giving the requested average received pilot SNR.

    The average of |theta^T (h o g)|^2 over uniformly random unit-modulus
    configurations is ||h o g||^2, so sigma^2 = P ||h o g_ref||^2 /
    10^(snr_db/10).
    """
    energy = float(np.vdot(h * g_ref, h * g_ref).real)
    if energy <= 0.0:
        raise ValueError("g_ref must be nonzero")
    return pilot_power * energy / 10.0 ** (snr_db / 10.0)


def _build_static(cfg: SimConfig, rng_channel: np.random.Generator):
    geometry = build_geometry(cfg.num_elements, cfg.carrier_frequency,
                              cfg.antenna_position)
    h_los = los_channel(geometry, cfg.rho0)
    p_los = float(np.mean(np.abs(h_los) ** 2))
    if cfg.nlos_correlation == "exponential":
        r_its = exp_correlation(cfg.num_elements, cfg.nlos_corr_coeff)
    else:
        r_its = None
    h_nlos = nlos_channel(geometry, p_los, rng_channel, r_its)
    return geometry, StaticChannel(h_los + h_nlos)


def run_trial(cfg: SimConfig, snr_db: float, trial_seed: int) -> TrialResult:
    """One full tracking trial, deterministic given ``trial_seed``."""
    rng_channel = _stream(trial_seed, STREAM_CHANNEL)
    rng_init = _stream(trial_seed, STREAM_INIT)
    rng_evolve = _stream(trial_seed, STREAM_EVOLVE)
    rng_noise = _stream(trial_seed, STREAM_NOISE)
    rng_mismatch = _stream(trial_seed, STREAM_MISMATCH)
    rng_explore = _stream(trial_seed, STREAM_EXPLORE)

    geometry, channel = _build_static(cfg, rng_channel)
    h = channel.h
    codebook = dft_codebook(geometry)
    truth, est = initial_state(rng_init, cfg.initial_beta)
    mismatch = draw_mismatch(cfg.mismatch, rng_mismatch)
    sigma2 = snr_to_sigma2(snr_db, h, synthesize_g(truth, geometry),
                           cfg.pilot_power)

    if cfg.scheme == "ml_myopic":
        ml_values = np.linspace(-math.pi / 2.0, math.pi / 2.0, cfg.ml_grid_points)
        ml_dh_a = h[:, None] * steering_matrix(cfg.num_elements, ml_values)

    t_blocks = cfg.num_blocks
    rec = {name: np.zeros(t_blocks) for name in
           ("true_beta", "true_omega", "true_phi", "est_beta", "est_omega",
            "est_phi", "se", "se_perfect")}
    codeword1 = np.full(t_blocks, NO_CODEWORD, dtype=int)
    codeword2 = np.full(t_blocks, NO_CODEWORD, dtype=int)
    trace_len = np.zeros(t_blocks, dtype=int)
    converged = np.ones(t_blocks, dtype=bool)

    for t in range(t_blocks):
        truth = evolve_state(truth, cfg.dynamics, rng_evolve)
        g_true = synthesize_g(truth, geometry)

        if cfg.scheme == "perfect_csi":
            est = ChannelState(beta=truth.beta, omega=truth.omega, phi=truth.phi)
        else:
            priors = build_priors(est, cfg.dynamics, mismatch)
            theta_bar = se_max_config(h, synthesize_g(est, geometry))
            if cfg.scheme == "map_exploratory":
                pair = exploratory_select(codebook, theta_bar,
                                          priors.phi_interval(), rng_explore)
            else:
                pair = myopic_select(codebook, theta_bar)
            theta_rows = pair.rows()
            y = simulate_pilots(g_true, theta_rows, h, cfg.pilot_power,
                                sigma2, rng_noise)
            codeword1[t], codeword2[t] = pair.codeword_indices

            if cfg.scheme == "ml_myopic":
                est = _ml_core(y, ml_dh_a, theta_rows, ml_values,
                               cfg.pilot_power)
            else:
                ctx = ObservationContext(y=y, theta_rows=theta_rows, h=channel,
                                         pilot_power=cfg.pilot_power,
                                         sigma2=sigma2, priors=priors,
                                         weights=penalty_weights(sigma2, priors))
                result = map_estimate(ctx, PhiGrid.from_priors(
                    priors, cfg.phi_grid_points))
                est = result.state
                trace_len[t] = len(result.j_trace)
                converged[t] = result.converged

        theta_payload = se_max_config(h, synthesize_g(est, geometry))
        rec["se"][t] = spectral_efficiency(theta_payload, h, g_true,
                                           cfg.pilot_power, sigma2)
        rec["se_perfect"][t] = spectral_efficiency(se_max_config(h, g_true), h,
                                                   g_true, cfg.pilot_power,
                                                   sigma2)
        rec["true_beta"][t] = truth.beta
        rec["true_omega"][t] = truth.omega
        rec["true_phi"][t] = truth.phi
        rec["est_beta"][t] = est.beta
        rec["est_omega"][t] = est.omega
        rec["est_phi"][t] = est.phi

    g_hat = synthesize_g(est, geometry)
    g_true = synthesize_g(truth, geometry)
    diff = g_hat - g_true
    return TrialResult(
        snr_db=snr_db, sigma2=sigma2, trial_seed=trial_seed,
        err_g_sq=float(np.vdot(diff, diff).real),
        ref_g_sq=float(np.vdot(g_true, g_true).real),
        err_phi_sq=(est.phi - truth.phi) ** 2,
        ref_phi_sq=truth.phi ** 2,
        codeword1=codeword1, codeword2=codeword2,
        trace_len=trace_len, converged=converged,
        **rec)


def _reduce(snr_db: float, results: list) -> SnrMetrics:
    t_blocks = results[0].num_blocks
    n = len(results)
    err_g = math.fsum(r.err_g_sq for r in results)
    ref_g = math.fsum(r.ref_g_sq for r in results)
    err_phi = math.fsum(r.err_phi_sq for r in results)
    ref_phi = math.fsum(r.ref_phi_sq for r in results)
    se_sum = math.fsum(math.fsum(r.se) for r in results)
    se_perfect_sum = math.fsum(math.fsum(r.se_perfect) for r in results)
    n_conv = sum(int(np.count_nonzero(r.converged)) for r in results)
    return SnrMetrics(
        snr_db=snr_db, num_trials=n,
        nmse_channel=err_g / ref_g,
        nmse_aoa=err_phi / ref_phi,
        mean_se=se_sum / (n * t_blocks),
        mean_se_perfect=se_perfect_sum / (n * t_blocks),
        err_g_sum=err_g, ref_g_sum=ref_g,
        err_phi_sum=err_phi, ref_phi_sum=ref_phi,
        convergence_rate=n_conv / (n * t_blocks),
    )


def run_monte_carlo(cfg: SimConfig, n_workers: int = 1) -> MetricsTable:
    """Sweep the SNR grid, reduce per-trial errors into a metrics table.

    Trial i always consumes the seed derived from (master_seed, i), so runs
    that differ only in scheme see identical channels, truths, and noise.
    Trajectories of trial 0 are kept for the AoA tracking figure.
    """
    rows = []
    trajectories = {}
    for snr_db in cfg.snr_grid_db:
        seeds = [derive_trial_seed(cfg.master_seed, i)
                 for i in range(cfg.num_trials)]
        worker = functools.partial(run_trial, cfg, snr_db)
        if n_workers > 1:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(worker, seeds, chunksize=8))
        else:
            results = [worker(seed) for seed in seeds]
        rows.append(_reduce(snr_db, results))
        trajectories[snr_db] = (results[0].true_phi.copy(),
                                results[0].est_phi.copy())
    return MetricsTable(scheme=cfg.scheme, rows=rows, trajectories=trajectories)


def variant(cfg: SimConfig, **overrides) -> SimConfig:
    """Copy of cfg with the given fields replaced (validation re-applied)."""
    return replace(cfg, **overrides)
