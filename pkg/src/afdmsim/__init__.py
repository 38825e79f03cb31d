"""AFDM link-level simulation: modulation core, fractional delay-Doppler
channels, multi-block unitary-transformed AMP detection, a GAMP baseline,
and empirical EXIT analysis."""

from .afdm import (  # noqa: F401
    AfdmConfig,
    AffineFrame,
    ConstellationSpec,
    add_cpp,
    chirp_matrix,
    default_c1,
    hard_demap,
    map_bits,
    remove_cpp,
)
from .backend import BACKEND, using_numba  # noqa: F401
from .channel import (  # noqa: F401
    AffineChannel,
    ChannelRealization,
    TimeChannel,
    affine_channel_closed_form,
    affine_entry_closed_form,
    apply_channel,
    build_time_channel,
    effective_affine_channel,
    ltv_convolve,
    raised_cosine,
    sample_paths,
)
from .detectors import (  # noqa: F401
    DetectorOpts,
    DetectorOutput,
    GampConfig,
    build_factorizations,
    detect,
    detect_frame,
    detect_gamp,
    detect_gamp_frame,
    segment,
    transform_rx,
)
from .harness import ExperimentConfig, run_ber_sweep, run_exit  # noqa: F401

__version__ = "0.1.0"
