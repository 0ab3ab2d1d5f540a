"""Distributed power control by iterative water-filling in MIMO interference networks."""

from .contraction import (
    InterferenceMatrix,
    PowerIterationError,
    UniquenessCertificate,
    build_interference_matrix,
    certify,
    max_col_sum,
    max_row_sum,
    spectral_radius,
    strict_col_condition,
    strict_row_condition,
    weighted_max_norm,
    write_matrix_csv,
)
from .engine import (
    GameTrace,
    Schedule,
    ScheduleError,
    check_nash,
    make_schedule,
    run_game,
    trace_to_csv,
)
from .expharness import (
    SweepResult,
    SweepSpec,
    TrialRecord,
    run_trial,
    sweep_sumrate,
    sweep_uniqueness,
    write_csv,
)
from .netmodel import (
    ChannelRealization,
    ConfigError,
    NetworkConfig,
    pathloss_power_gain,
    sample_channels,
    symmetric_config,
    validate_config,
)
from .precode import (
    DegenerateChannelError,
    EffectiveNetwork,
    LinkSVD,
    SvdError,
    build_effective_network,
    svd_decompose,
)
from .waterfill import (
    PowerProfile,
    WaterfillResult,
    best_response,
    greedy_profile,
    interference_plus_noise,
    random_profile,
    sum_rate,
    uniform_profile,
    user_rate,
    validate_profile,
    water_level,
)

__version__ = "0.1.0"
