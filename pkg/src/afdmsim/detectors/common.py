"""Shared detector plumbing: options, outputs, and the symbol denoiser."""

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels as K

DAMP_TARGETS = ("xhat", "e")


@dataclass(frozen=True)
class DetectorOpts:
    """Iteration controls shared by both detectors.

    damping is the fraction of the *new* iterate kept:
    x <- (1 - damping) * x_old + damping * x_new.  `damp_target` switches the
    blend from the posterior means to the per-block residuals (an exposed
    alternative since the reference description leaves the placement open).
    Convergence is declared when the undamped denoiser output moves less
    than `tol` in max-norm between consecutive iterations.
    """

    max_iter: int = 50
    damping: float = 0.4
    tol: float = 1e-4
    damp_target: str = "xhat"

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must be in (0, 1]")
        if self.damp_target not in DAMP_TARGETS:
            raise ValueError(f"damp_target must be one of {DAMP_TARGETS}")


@dataclass
class DetectorOutput:
    """Posterior summary of one detected frame.

    Hard decisions are beta-row argmaxes; exact ties resolve to the lowest
    constellation index (np.argmax keeps the first maximum).
    """

    beta: np.ndarray          # (N, |A|) symbol posteriors
    x_hat: np.ndarray         # (N,) posterior means
    v_x: np.ndarray           # (N,) posterior variances
    hard: np.ndarray          # (N,) argmax constellation indices
    iterations: int
    trace: list               # per-iteration (max |dx|, mean v_x)
    beta_history: list | None = field(default=None)

    @classmethod
    def from_beta(cls, beta, points, iterations, trace, beta_history=None):
        xhat = beta @ points
        vx = np.sum(np.abs(points[None, :] - xhat[:, None]) ** 2 * beta, axis=1)
        return cls(beta, xhat, vx, np.argmax(beta, axis=1), iterations, trace, beta_history)


def uniform_prior(n, spec):
    return np.full((n, spec.size), 1.0 / spec.size)


def check_prior(prior, n, spec):
    prior = np.ascontiguousarray(prior, dtype=np.float64)
    if prior.shape != (n, spec.size):
        raise ValueError(f"prior must have shape ({n}, {spec.size})")
    if not np.allclose(prior.sum(axis=1), 1.0, atol=1e-6):
        raise ValueError("prior rows must sum to 1")
    return prior


def denoise(u, v, spec, prior):
    """Symbol-wise posterior given pseudo-observations u ~ CN(x, v).

    v may be a scalar or per-symbol vector; underflow is prevented by
    subtracting the per-symbol minimum distance before exponentiation.
    Returns (x_hat, v_x, beta).
    """
    u = np.ascontiguousarray(u, dtype=np.complex128)
    v_arr = np.ascontiguousarray(
        np.broadcast_to(np.asarray(v, dtype=np.float64), u.shape)
    )
    return K.qam_denoise(u, v_arr, spec.points, prior)
