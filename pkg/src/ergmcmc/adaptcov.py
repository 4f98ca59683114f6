"""Running mean/covariance accumulators and the proposal scaling rule."""

from __future__ import annotations

import numpy as np

__all__ = [
    "RunningCovariance",
    "batch_covariance",
    "scale_proposal",
    "DegenerateCovarianceError",
    "RW_SCALE",
    "DEFAULT_JITTER",
]

RW_SCALE = 2.38 ** 2  # optimal random-walk scaling, divided by d at use
DEFAULT_JITTER = 1e-6


class DegenerateCovarianceError(RuntimeError):
    """Scaled covariance could not be factorized even after jitter boosts."""


class RunningCovariance:
    """Welford accumulator; mean/cov always equal the batch values.

    Sample covariance uses divisor count-1 and is the zero matrix until two
    points have been absorbed.
    """

    __slots__ = ("d", "count", "mean", "_m2")

    def __init__(self, d: int):
        self.d = int(d)
        self.count = 0
        self.mean = np.zeros(d)
        self._m2 = np.zeros((d, d))

    def update(self, x) -> None:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.d:
            raise ValueError(f"point has dimension {x.size}, accumulator is {self.d}")
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += np.outer(delta, x - self.mean)

    @property
    def cov(self) -> np.ndarray:
        if self.count < 2:
            return np.zeros((self.d, self.d))
        return self._m2 / (self.count - 1)

    @property
    def is_ready(self) -> bool:
        return self.count >= 2


def batch_covariance(points) -> np.ndarray:
    """Sample covariance (divisor count-1) of an (m, d) point array."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 2:
        raise ValueError("batch covariance needs at least 2 points")
    cov = np.cov(pts, rowvar=False, ddof=1)
    return np.atleast_2d(cov)


def scale_proposal(cov, d: int, jitter: float = DEFAULT_JITTER) -> np.ndarray:
    """(2.38^2 / d) * cov + jitter * I, with jitter boosted until Cholesky
    succeeds (three attempts, x10 each)."""
    cov = np.asarray(cov, dtype=float)
    cov = 0.5 * (cov + cov.T)
    base = (RW_SCALE / d) * cov
    eye = np.eye(cov.shape[0])
    j = jitter
    for _ in range(3):
        out = base + j * eye
        try:
            np.linalg.cholesky(out)
            return out
        except np.linalg.LinAlgError:
            j *= 10.0
    raise DegenerateCovarianceError(
        f"covariance not factorizable with jitter up to {j / 10.0:g}"
    )
