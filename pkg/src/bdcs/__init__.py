"""Block-sparse compressed sensing for near-field MIMO.

Channel synthesis with spherical wavefronts, angular/polar dictionaries,
greedy block recovery with side information, near-field region partitioning,
block-sparse hybrid precoding, and Monte Carlo benchmark sweeps.
"""

from .bench import (
    CurvePoint,
    ExperimentConfig,
    run_nmse_vs_distance,
    run_nmse_vs_snr,
    run_se_vs_snr,
    write_curve_csv,
)
from .channel import (
    SPEED_OF_LIGHT,
    ArrayConfig,
    ChannelRealization,
    ClusterSpec,
    PathParam,
    SubcarrierGrid,
    rayleigh_distance,
    steering,
    steering_far,
    steering_near,
    synthesize_channel,
    synthesize_matrix_channel,
)
from .dictionaries import (
    DEFAULT_POLAR_BETA,
    DEFAULT_POLAR_R_MIN,
    Atom,
    BlockPartition,
    Dictionary,
    DictionaryMetrics,
    block_metrics,
    build_angular_dictionary,
    build_polar_dictionary,
    coherence,
    export_metadata_csv,
)
from .errors import ConfigurationError
from .partition import (
    PartitionResult,
    SparsityProfile,
    complete_bdcs,
    partition_boundary,
    sparsity_profile,
    sparsity_upper_limit,
)
from .precoding import (
    MatrixChannel,
    PrecoderPair,
    SEReport,
    block_sparse_precoding,
    optimal_precoder,
    spectral_efficiency,
)
from .recovery import (
    NMSE_FLOOR_DB,
    RecoveryConfig,
    RecoveryResult,
    SideInformation,
    bsomp,
    ls_estimate,
    nmse,
    reconstruct,
)
from .sensing import (
    MeasurementMatrix,
    Observation,
    PilotMatrix,
    make_pilot_matrix,
    measurement_matrix,
    observe,
)

__version__ = "0.1.0"

__all__ = [
    "SPEED_OF_LIGHT",
    "NMSE_FLOOR_DB",
    "DEFAULT_POLAR_BETA",
    "DEFAULT_POLAR_R_MIN",
    "ArrayConfig",
    "Atom",
    "BlockPartition",
    "ChannelRealization",
    "ClusterSpec",
    "ConfigurationError",
    "CurvePoint",
    "Dictionary",
    "DictionaryMetrics",
    "ExperimentConfig",
    "MatrixChannel",
    "MeasurementMatrix",
    "Observation",
    "PartitionResult",
    "PathParam",
    "PilotMatrix",
    "PrecoderPair",
    "RecoveryConfig",
    "RecoveryResult",
    "SEReport",
    "SideInformation",
    "SparsityProfile",
    "SubcarrierGrid",
    "block_metrics",
    "block_sparse_precoding",
    "bsomp",
    "build_angular_dictionary",
    "build_polar_dictionary",
    "coherence",
    "complete_bdcs",
    "export_metadata_csv",
    "ls_estimate",
    "make_pilot_matrix",
    "measurement_matrix",
    "nmse",
    "observe",
    "optimal_precoder",
    "partition_boundary",
    "rayleigh_distance",
    "reconstruct",
    "run_nmse_vs_distance",
    "run_nmse_vs_snr",
    "run_se_vs_snr",
    "sparsity_profile",
    "sparsity_upper_limit",
    "spectral_efficiency",
    "steering",
    "steering_far",
    "steering_near",
    "synthesize_channel",
    "synthesize_matrix_channel",
    "write_curve_csv",
]
