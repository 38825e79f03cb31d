from .common import DetectorOpts, DetectorOutput, denoise, uniform_prior  # noqa: F401
from .gamp import GampConfig, detect_gamp, detect_gamp_frame, truncate_rows  # noqa: F401
from .mbuamp import (  # noqa: F401
    BlockFactorization,
    build_factorizations,
    detect,
    detect_frame,
    factorize,
    merge_blocks,
    segment,
    transform_rx,
)
