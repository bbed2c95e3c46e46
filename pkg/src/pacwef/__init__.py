"""Weight distributions, union bounds and rate-profile design for
polarization-adjusted convolutional (PAC) codes."""

from .pac_core import (
    CodeSpec,
    ConvGenerator,
    InvalidGeneratorError,
    conv_transform,
    conv_inverse,
    encode,
    ga_polar_profile,
    load_profile,
    parse_generator,
    polar_transform,
    rm_profile,
    rm_score,
    save_profile,
    split_info_set,
)
from .wef import (
    CapacityError,
    WeightCounts,
    WeightPMF,
    approx_wef,
    base_improved,
    base_randomized,
    combine,
    counts_from_pmf,
    exact_wef,
    f_coeff,
    f_coeff_fraction,
    tv_distance,
)
from .bounds import SnrPoint, pairwise_error_prob, q_function, union_bound
from .profiler_sa import NoMoveError, SAConfig, SAResult, cost, perturb, sa_design
from .decoder_sim import (
    ChannelRealization,
    SimResult,
    awgn_channel,
    ml_decode_exhaustive,
    scl_decode,
    scl_decode_batch,
    simulate_fer,
    wilson_interval,
)

__version__ = "0.1.0"
