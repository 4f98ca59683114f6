"""Generic delayed-rejection Metropolis-Hastings for tractable targets.

Upon rejection at stage i-1, a stage-i candidate is drawn from a proposal
that may condition on the whole rejected path.  The stage-i acceptance
ratio N_i / D_i uses the recursion

    D_1 = p(x0) h_1(x1 | x0)
    D_i = h_i(x_i | x0..x_{i-1}) * (D_{i-1} - N_{i-1})
    N_i = D_i evaluated on the reversed path,

which keeps every stage reversible with respect to the target.  All
bookkeeping is done in log scale; the subtraction uses log1p/expm1 and
clamps to -inf when the gap closes, which signals an automatic rejection.

This module is the reference kernel used to validate the two-stage
exchange-algorithm acceptance in :mod:`ergmcmc.samplers` and supports any
fixed number of stages on targets whose density is computable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "StageProposal",
    "DrDiagnostics",
    "alpha1",
    "alpha_i",
    "dr_step",
    "gaussian_random_walk",
    "standard_normal_logpdf",
    "mvn_logpdf_factory",
]


@dataclass
class StageProposal:
    """One stage's proposal: a sampler and its log density.

    ``sample(history, rng)`` draws a candidate given the path
    ``history = (current, rejected_1, ..., rejected_{i-1})``;
    ``log_density(candidate, history)`` evaluates the same kernel.
    """

    sample: Callable
    log_density: Callable
    symmetric: bool = False


@dataclass
class DrDiagnostics:
    accepts_by_stage: dict = field(default_factory=dict)
    rejects: int = 0
    underflow_rejects: int = 0

    def record(self, stage: int) -> None:
        if stage == 0:
            self.rejects += 1
        else:
            self.accepts_by_stage[stage] = self.accepts_by_stage.get(stage, 0) + 1


def _log_sub(log_a: float, log_b: float) -> float:
    """log(e^a - e^b), -inf when the difference is not positive."""
    if log_b >= log_a:
        return -math.inf
    if log_b == -math.inf:
        return log_a
    return log_a + math.log1p(-math.exp(log_b - log_a))


def _log_denominator(target_log_density, proposals, path) -> float:
    i = len(path) - 1
    h = proposals[i - 1]
    if i == 1:
        return target_log_density(path[0]) + h.log_density(path[1], (path[0],))
    prefix = path[:-1]
    log_d = _log_denominator(target_log_density, proposals, prefix)
    log_n = _log_denominator(target_log_density, proposals, prefix[::-1])
    return h.log_density(path[-1], prefix) + _log_sub(log_d, log_n)


def alpha1(target_log_density, h1: StageProposal, current, candidate) -> float:
    """First-stage acceptance probability 1 ^ N1/D1."""
    log_d = target_log_density(current) + h1.log_density(candidate, (current,))
    if log_d == -math.inf:
        raise ValueError("target density is zero at the current point")
    log_n = target_log_density(candidate) + h1.log_density(current, (candidate,))
    return math.exp(min(0.0, log_n - log_d))


def alpha_i(target_log_density, proposals: Sequence[StageProposal], path,
            diagnostics: DrDiagnostics | None = None) -> float:
    """Stage-i acceptance for path (x0, x1, ..., xi), stages 1..i-1 rejected."""
    path = tuple(path)
    if len(path) < 2:
        raise ValueError("path needs a current point and at least one candidate")
    if len(path) == 2:
        return alpha1(target_log_density, proposals[0], path[0], path[1])
    log_d = _log_denominator(target_log_density, proposals, path)
    if log_d == -math.inf:
        if diagnostics is not None:
            diagnostics.underflow_rejects += 1
        return 0.0
    log_n = _log_denominator(target_log_density, proposals, path[::-1])
    return math.exp(min(0.0, log_n - log_d))


def dr_step(target_log_density, proposals: Sequence[StageProposal],
            max_stages: int, current, rng: np.random.Generator,
            diagnostics: DrDiagnostics | None = None):
    """One delayed-rejection sweep.

    Returns ``(next_point, accepted_stage)`` with stage 0 meaning every
    stage was rejected.  With ``max_stages=1`` this is plain MH.
    """
    if max_stages < 1:
        raise ValueError("max_stages must be >= 1")
    if len(proposals) < max_stages:
        raise ValueError("need one proposal per stage")
    history = (current,)
    for stage in range(1, max_stages + 1):
        candidate = proposals[stage - 1].sample(history, rng)
        path = history + (candidate,)
        alpha = alpha_i(target_log_density, proposals, path, diagnostics)
        if rng.random() < alpha:
            if diagnostics is not None:
                diagnostics.record(stage)
            return candidate, stage
        history = path
    if diagnostics is not None:
        diagnostics.record(0)
    return current, 0


# -- small target/proposal helpers used by tests and examples ---------------

def standard_normal_logpdf(x) -> float:
    x = float(np.asarray(x).reshape(()))
    return -0.5 * (math.log(2.0 * math.pi) + x * x)


def mvn_logpdf_factory(mean, cov):
    mean = np.asarray(mean, dtype=float).reshape(-1)
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    d = mean.size

    def logpdf(x):
        z = np.linalg.solve(chol, np.asarray(x, dtype=float).reshape(-1) - mean)
        return float(-0.5 * (d * math.log(2.0 * math.pi) + log_det + z @ z))

    return logpdf


def gaussian_random_walk(cov) -> StageProposal:
    """Symmetric Gaussian step centred at the chain's current point."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    chol = np.linalg.cholesky(cov)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    d = cov.shape[0]

    def sample(history, rng):
        center = np.asarray(history[0], dtype=float).reshape(-1)
        return center + chol @ rng.standard_normal(d)

    def log_density(candidate, history):
        center = np.asarray(history[0], dtype=float).reshape(-1)
        z = np.linalg.solve(chol, np.asarray(candidate, dtype=float).reshape(-1) - center)
        return float(-0.5 * (d * math.log(2.0 * math.pi) + log_det + z @ z))

    return StageProposal(sample=sample, log_density=log_density, symmetric=True)
