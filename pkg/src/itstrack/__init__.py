"""Tracking a mobile line-of-sight link through an intelligent transmitting surface.

Simulation and estimation library: static feed-to-surface channel, Markov
evolution of the user-side link, MAP coordinate-descent tracking from two
pilots per coherence block, an ML baseline, and a Monte-Carlo harness with a
CSV-writing command line front end (``track``).
"""

from .beams import (Codebook, NO_CODEWORD, PilotConfigPair, dft_codebook,
                    exploratory_select, myopic_select, se_max_config,
                    spectral_efficiency)
from .channel import (ChannelState, DynamicsParams, ItsGeometry, StaticChannel,
                      array_response, build_geometry, evolve_state,
                      exp_correlation, los_channel, nlos_channel,
                      steering_matrix, steering_vector, synthesize_g)
from .estimators import (MapResult, ObservationContext, PhiGrid, b_vector,
                         map_estimate, ml_estimate, objective_J, update_beta,
                         update_omega, update_phi)
from .harness import (INITIAL_BETA, MetricsTable, SCHEMES, SimConfig,
                      SnrMetrics, TrialResult, derive_trial_seed, initial_state,
                      run_monte_carlo, run_trial, simulate_pilots,
                      snr_to_sigma2, variant)
from .priors import (MismatchRegime, PenaltyWeights, PriorSet, build_priors,
                     draw_mismatch, penalty_weights, sample_vonmises,
                     vonmises_logpdf)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
