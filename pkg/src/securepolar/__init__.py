"""Secure polar coding over erasure wiretap channels with delayed channel-state information."""

from .channels import (
    AdversaryPolicy,
    CSIDelayError,
    DelayedCSI,
    PolicyKind,
    StateKind,
    UncertaintySet,
    WiretapState,
    reveal_csi,
    sample_state,
    transmit,
)
from .codec import ERASED, FrozenMap, encode, sc_decode
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .metrics import (
    BoundReport,
    binary_entropy,
    bound_report,
    experimental_ber,
    leakage_bound_strong,
    leakage_bound_weak,
    pe_bound,
    rate_sacrifice,
    secrecy_rate,
    worst_case,
)
from .polarization import (
    ErasureProfile,
    Partition,
    PartitionConfig,
    ReliabilityProfile,
    StrongPartition,
    ZeroSecrecyError,
    evolve_bec,
    partition_block,
    split_strong,
    stabilize_b,
)
from .schemes import (
    BlockTranscript,
    Construction,
    SchemeConfig,
    SchemeKind,
    eve_attack,
    run_trials,
    strong_run,
    weak_run,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
