"""secmimo: secrecy rates for artificial-noise MIMO transmission with
Grassmannian-quantized channel feedback under jamming.

The package splits into a dense complex linear-algebra kernel
(:mod:`~secmimo.linalg`), subspace quantization on the Grassmann manifold
(:mod:`~secmimo.grassmann`), transmitter/receiver construction and leakage
(:mod:`~secmimo.transceiver`), secrecy-rate formulas and slope estimation
(:mod:`~secmimo.rates`), and a deterministic Monte Carlo harness with a CLI
(:mod:`~secmimo.harness`, :mod:`~secmimo.cli`).
"""

from .errors import (
    CodebookTooLargeError,
    ConfigError,
    DegenerateChannelError,
    DegenerateGeometryError,
    InsufficientAntennasError,
    InvalidInputError,
    NoNullspaceError,
    NotPositiveDefiniteError,
    PerturbationError,
    SecMimoError,
    ShapeError,
)
from .grassmann import (
    Codebook,
    FeedbackSchedule,
    GrassmannPoint,
    ball_volume_coefficient,
    chordal_distance,
    codebook_generate,
    feedback_bits,
    perturb_quantize,
    perturb_to_distance,
    quant_error_bound,
    quantize,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    ResultRow,
    read_csv,
    run_experiment,
    scenario_config,
    write_csv,
)
from .linalg import (
    gaussian_mi,
    left_nullspace_basis,
    logdet_pd,
    nullspace_basis,
    qr_tall,
    random_gaussian_matrix,
    random_truncated_unitary,
    svd,
)
from .rates import (
    RateSample,
    SdofEstimate,
    SecrecyRate,
    beta_P,
    eve_rate_limit,
    fit_slope,
    logdet_perturbation_check,
    sdof_fit,
    secrecy_rate_perfect_G,
    secrecy_rate_perfect_basic,
    secrecy_rate_quantized_G,
)
from .transceiver import (
    AntennaConfig,
    ChannelSet,
    PowerPolicy,
    Precoders,
    ReceiverFilters,
    eve_effective_channel,
    leakage_bound,
    leakage_power,
    rx_nuller,
    rx_postfilter,
    sample_channels,
    tx_precoders_perfect,
    tx_precoders_quantized,
)

__version__ = "0.1.0"
