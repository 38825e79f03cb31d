"""Numerical backend selection.

Hot kernels exist twice: a numba @njit build and a pure-numpy build with
identical signatures and semantics.  The active backend is chosen once at
import time:

  AFDMSIM_BACKEND=numba   force numba (ImportError if numba is missing)
  AFDMSIM_BACKEND=numpy   force the pure-numpy fallback
  unset                   numba if importable, else numpy

`benchmarks/bench_kernels.py` compares the two builds head to head.
"""

import os

_ENV_VAR = "AFDMSIM_BACKEND"
_VALID = ("numba", "numpy")


def requested_backend():
    """Backend named in the environment, or '' for auto."""
    value = os.environ.get(_ENV_VAR, "").strip().lower()
    if value and value not in _VALID:
        raise ValueError(
            f"{_ENV_VAR}={value!r}: expected one of {_VALID} or unset"
        )
    return value


def select_backend():
    """Resolve the backend name ('numba' or 'numpy') honoring the env flag."""
    req = requested_backend()
    if req == "numpy":
        return "numpy"
    if req == "numba":
        import numba  # noqa: F401  (fail loudly if forced but absent)

        return "numba"
    try:
        import numba  # noqa: F401

        return "numba"
    except ImportError:
        return "numpy"


BACKEND = select_backend()


def using_numba():
    return BACKEND == "numba"
