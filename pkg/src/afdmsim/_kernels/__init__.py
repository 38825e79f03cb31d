"""Backend-dispatched hot kernels (see `afdmsim.backend`)."""

from ..backend import BACKEND

if BACKEND == "numba":
    from .numba_impl import (  # noqa: F401
        affine_channel_matrix,
        gamp_linear_step,
        mbuamp_step,
        qam_denoise,
        time_channel_matrix,
    )
else:
    from .numpy_impl import (  # noqa: F401
        affine_channel_matrix,
        gamp_linear_step,
        mbuamp_step,
        qam_denoise,
        time_channel_matrix,
    )
