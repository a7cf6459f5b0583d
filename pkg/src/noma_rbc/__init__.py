"""Achievable rate regions and proportional-fair cell simulation for
power-domain NOMA where the strong user of each pair acts as a full-duplex
relay for the weak one.

Four component-channel schemes are covered: plain superposition with SIC
(GBC), decode-and-forward relaying (RBC-DF), compress-and-forward relaying
(RBC-CF) and compress-and-forward with transmitter-side dirty-paper
pre-cancellation (RBC-CF-DPC).  A log-determinant Gaussian
mutual-information oracle and an exact discrete evaluator provide
independent checks of every closed form.
"""

__version__ = "0.1.0"

from .core import (
    LN2,
    ChannelParams,
    CompressionNoise,
    LinkGains,
    PowerSplit,
    RatePair,
    Scheme,
    bits_to_nats,
    is_degraded_ordered,
    nats_to_bits,
    noma_condition_holds,
    received_snr_relay,
    received_snr_second,
    second_user_sir,
)
from .rates import (
    RateRegionCurve,
    cf_clamp_active,
    gbc_rates,
    optimize_n_hat,
    rbc_cf_dpc_rates,
    rbc_cf_rates,
    rbc_df_rates,
    serve_pair,
    sweep_region,
    uniform_alpha_grid,
)
from .oracle import GaussianSystem, VerifyReport, gaussian_mi, verify_scheme
from .discrete import BoundRates, DiscreteJoint, dmc_bound_rates, load_discrete_joint
from .scheduling import (
    IntervalResult,
    near_far_pair,
    nearest_neighbor_pair,
    pf_update,
    schedule_interval,
    split_groups,
)
from .simulation import (
    SimConfig,
    SimResult,
    TrialResult,
    generate_topology,
    run_experiment,
    run_trial,
    write_results_csv,
)
