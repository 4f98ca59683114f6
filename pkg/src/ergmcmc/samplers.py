"""Population-based exchange-algorithm samplers for ERGM posteriors.

Implements eight variants: the adaptive-direction (ADS) proposal and three
adaptive random-walk proposals (vertical / horizontal / rectangular
covariance estimation), each optionally combined with a two-stage delayed
rejection.

Per chain h, one sweep runs:

1. propose theta1 (ADS difference move or adapted Gaussian random walk),
2. simulate auxiliary data y1 from the likelihood at theta1,
3. accept with the exchange-algorithm ratio, in which every intractable
   normalising constant cancels,
4. on rejection, when delayed rejection is active, propose theta2 (an
   antithetic ADS move or a half-scaled random walk), simulate fresh
   auxiliary data y2 and accept with the two-stage ratio; the reverse-path
   first-stage probability reuses the y1 already drawn for theta1.

Sweeps are synchronous: every proposal in a sweep reads the population
snapshot taken at sweep start, and each chain owns an independent seeded
random stream, so results do not depend on scheduling order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import adaptcov
from .diagnostics import SampleStore
from .graph import Graph
from .model import ExactTable, GaussianPrior, ModelSpec, TieFlipEngine

__all__ = [
    "SamplerConfig",
    "PopulationState",
    "VARIANTS",
    "ads_propose",
    "adaptive_covariance",
    "adaptive_propose",
    "antithetic_second",
    "aea_accept_stage1",
    "aea_accept_stage2",
    "run",
]

VARIANTS = ("ads", "vertical", "horizontal", "rectangular")


def _as_cov(value, d: int) -> np.ndarray:
    """Accept a scalar variance or a full (d, d) matrix."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(d)
    if arr.shape != (d, d):
        raise ValueError(f"covariance shape {arr.shape} does not match dimension {d}")
    return arr.copy()


@dataclass
class SamplerConfig:
    variant: str = "ads"
    dr_enabled: bool = False
    chains: int = 6
    main_iters: int = 1000
    burn_in: int | None = None          # default: 20% of main_iters
    gamma: float = 0.8
    eps_covariance: object = 0.025      # scalar variance or (d, d) matrix
    beta: float = 0.01
    static_covariance: object = 0.0025
    aux_iters: int = 100
    aux_unit: str = "toggle"            # or "sweep": aux_iters full passes
    aux_start: str = "observed"         # "observed" | "empty" | "previous"
    aux_method: str = "mcmc"            # "exact" enumerates tiny graphs
    dr_scale: float = 0.5
    jitter: float = adaptcov.DEFAULT_JITTER
    ads_burnin: bool = True             # ADS proposals during burn-in
    adapt_during_burnin: bool = True
    init_sd: float = 0.1
    seed: int = 1234
    threads: int = 1

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0.0 < self.dr_scale <= 1.0:
            raise ValueError("dr_scale must lie in (0, 1]")
        if self.chains < 1:
            raise ValueError("need at least one chain")
        if self.main_iters < 0:
            raise ValueError("main_iters must be >= 0")
        if self.aux_iters < 1:
            raise ValueError("aux_iters must be >= 1")
        if self.aux_unit not in ("toggle", "sweep"):
            raise ValueError("aux_unit must be 'toggle' or 'sweep'")
        if self.aux_start not in ("observed", "empty", "previous"):
            raise ValueError("aux_start must be observed, empty or previous")
        if self.aux_method not in ("mcmc", "exact"):
            raise ValueError("aux_method must be 'mcmc' or 'exact'")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        uses_ads = self.variant == "ads" or (self.ads_burnin and self.resolved_burn_in() > 0)
        if uses_ads and self.chains < 3:
            raise ValueError("ADS proposals need at least 3 chains")

    def resolved_burn_in(self) -> int:
        if self.burn_in is None:
            return self.main_iters // 5
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        return self.burn_in


@dataclass
class PopulationState:
    """States and adaptation accumulators for the H parallel chains."""

    states: np.ndarray                          # (H, d)
    sweep_index: int = 0
    vertical: list = field(default_factory=list)    # RunningCovariance per chain
    rectangular: adaptcov.RunningCovariance | None = None

    @property
    def n_chains(self) -> int:
        return self.states.shape[0]

    @property
    def d(self) -> int:
        return self.states.shape[1]


def _mvn_logpdf(x, mean, chol, log_det) -> float:
    diff = np.asarray(x, dtype=float) - np.asarray(mean, dtype=float)
    z = np.linalg.solve(chol, diff)
    d = diff.size
    return float(-0.5 * (d * math.log(2.0 * math.pi) + log_det + z @ z))


def _log1mexp(log_p: float) -> float:
    """log(1 - e^log_p) for log_p <= 0; -inf at log_p = 0."""
    if log_p >= 0.0:
        return -math.inf
    if log_p > -math.log(2.0):
        return math.log(-math.expm1(log_p))
    return math.log1p(-math.exp(log_p))


def ads_propose(pop: PopulationState, h: int, gamma: float, eps_cov,
                rng: np.random.Generator):
    """Difference move theta + gamma*(theta_h1 - theta_h2) + eps.

    The chain pair is drawn uniformly without replacement from the other
    chains and returned so delayed rejection can condition its reverse
    densities on the same pair.
    """
    if pop.n_chains < 3:
        raise ValueError("ADS proposal needs at least 3 chains")
    eps_chol = np.linalg.cholesky(_as_cov(eps_cov, pop.d))
    theta1, pair, _ = _ads_draw(pop.states, h, gamma, eps_chol, rng)
    return theta1, pair


def _ads_draw(snapshot, h, gamma, eps_chol, rng):
    others = np.array([k for k in range(snapshot.shape[0]) if k != h])
    pair = rng.choice(others, size=2, replace=False)
    delta = gamma * (snapshot[pair[0]] - snapshot[pair[1]])
    eps = eps_chol @ rng.standard_normal(snapshot.shape[1])
    return snapshot[h] + delta + eps, (int(pair[0]), int(pair[1])), delta


def adaptive_covariance(variant: str, pop: PopulationState, h: int) -> np.ndarray | None:
    """Empirical covariance of the variant's particle set, or None when the
    set is too small or carries no spread."""
    if variant == "vertical":
        acc = pop.vertical[h]
        cov = acc.cov if acc.is_ready else None
    elif variant == "horizontal":
        others = np.delete(pop.states, h, axis=0)
        cov = adaptcov.batch_covariance(others) if others.shape[0] >= 2 else None
    elif variant == "rectangular":
        acc = pop.rectangular
        cov = acc.cov if acc is not None and acc.is_ready else None
    else:
        raise ValueError(f"no adaptive covariance for variant {variant!r}")
    if cov is None or not np.all(np.isfinite(cov)) or np.trace(cov) <= 0.0:
        return None
    return cov


def adaptive_propose(variant: str, pop: PopulationState, h: int, beta: float,
                     static_cov, rng: np.random.Generator) -> np.ndarray:
    """Adapted Gaussian random walk with the safety-mixture rule."""
    static = _as_cov(static_cov, pop.d)
    theta1, _, _ = _adaptive_draw(variant, pop, h, beta, static,
                                  adaptcov.DEFAULT_JITTER, rng)
    return theta1


def _adaptive_draw(variant, pop, h, beta, static_cov, jitter, rng):
    """Returns (theta1, chol_used, fallback_reason).

    fallback_reason is None when the adapted covariance was used, "beta"
    for a safety-mixture draw and "degenerate" when the adapted covariance
    was unusable.
    """
    u = rng.random()
    chol = None
    reason = "beta"
    if u >= beta:
        sigma = adaptive_covariance(variant, pop, h)
        if sigma is None:
            reason = "degenerate"
        else:
            try:
                scaled = adaptcov.scale_proposal(sigma, pop.d, jitter)
                chol = np.linalg.cholesky(scaled)
                reason = None
            except adaptcov.DegenerateCovarianceError:
                reason = "degenerate"
    if chol is None:
        chol = np.linalg.cholesky(static_cov)
    theta1 = pop.states[h] + chol @ rng.standard_normal(pop.d)
    return theta1, chol, reason


def antithetic_second(theta, theta1) -> np.ndarray:
    """Second-stage centre mirrored through the current point: 2*theta - theta1."""
    theta = np.asarray(theta, dtype=float)
    theta1 = np.asarray(theta1, dtype=float)
    return 2.0 * theta - theta1


def _log_alpha1(sy, sy_aux, theta, theta1, log_prior_cur, log_prior_cand,
                log_h_fwd=0.0, log_h_rev=0.0) -> float:
    """Exchange first-stage log acceptance; the s(y_aux) ratio replaces the
    intractable normalising constants."""
    num = float(sy @ theta1) + log_prior_cand + log_h_rev + float(sy_aux @ theta)
    den = float(sy @ theta) + log_prior_cur + log_h_fwd + float(sy_aux @ theta1)
    return min(0.0, num - den)


def _log_alpha2(sy, sy2, theta, theta1, theta2, log_prior_cur, log_prior_2,
                log_h1_fwd, log_h1_rev_from_theta2, log_h2_fwd, log_h2_rev,
                log_a1_fwd, log_a1_rev) -> float:
    log_keep_rev = _log1mexp(log_a1_rev)
    log_keep_fwd = _log1mexp(log_a1_fwd)
    if log_keep_rev == -math.inf:
        return -math.inf
    if log_keep_fwd == -math.inf:
        # unreachable on a rejected path; guard against numerics
        return -math.inf
    num = (float(sy @ theta2) + log_prior_2 + log_h1_rev_from_theta2 + log_h2_rev
           + float(sy2 @ theta) + log_keep_rev)
    den = (float(sy @ theta) + log_prior_cur + log_h1_fwd + log_h2_fwd
           + float(sy2 @ theta2) + log_keep_fwd)
    return min(0.0, num - den)


def aea_accept_stage1(model: ModelSpec, prior: GaussianPrior, theta, theta1,
                      y: Graph, y1: Graph, log_h_fwd: float = 0.0,
                      log_h_rev: float = 0.0) -> float:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    theta1 = np.asarray(theta1, dtype=float).reshape(-1)
    if theta.size != model.d or theta1.size != model.d:
        raise ValueError("theta dimension does not match model")
    return _log_alpha1(model.stat_vector(y), model.stat_vector(y1), theta, theta1,
                       prior.log_density(theta), prior.log_density(theta1),
                       log_h_fwd, log_h_rev)


def aea_accept_stage2(model: ModelSpec, prior: GaussianPrior, theta, theta1, theta2,
                      y: Graph, y2: Graph, log_h1_fwd: float,
                      log_h1_rev_from_theta2: float, log_h2_fwd: float,
                      log_h2_rev: float, log_a1_fwd: float, log_a1_rev: float) -> float:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    theta1 = np.asarray(theta1, dtype=float).reshape(-1)
    theta2 = np.asarray(theta2, dtype=float).reshape(-1)
    return _log_alpha2(model.stat_vector(y), model.stat_vector(y2), theta, theta1,
                       theta2, prior.log_density(theta), prior.log_density(theta2),
                       log_h1_fwd, log_h1_rev_from_theta2, log_h2_fwd, log_h2_rev,
                       log_a1_fwd, log_a1_rev)


class _McmcAux:
    """Auxiliary draws via the tie-flip engine bound to the observed graph."""

    def __init__(self, model, y, iters, unit, start, n_chains):
        self.engine = TieFlipEngine(model, y)
        self.iters = iters * (self.engine.n_dyads if unit == "sweep" else 1)
        self.start = start
        self._per_chain = [None] * n_chains  # "previous" mode states

    def draw_stats(self, theta, rng, chain) -> np.ndarray:
        if self.start == "previous":
            state = self._per_chain[chain]
            out = self.engine.run(theta, self.iters, rng, state=state)
            self._per_chain[chain] = out
        elif self.start == "empty":
            out = self.engine.run(theta, self.iters, rng, state=self.engine.empty_state)
        else:
            out = self.engine.run(theta, self.iters, rng)
        return self.engine.stats_of(out)


class _ExactAux:
    """Auxiliary draws from the enumerated exact distribution."""

    def __init__(self, model, y):
        self.table = ExactTable(model, y.n, y.attributes or None)

    def draw_stats(self, theta, rng, chain) -> np.ndarray:
        idx = self.table.sample_index(theta, rng)
        return self.table.stats[idx].copy()


class _Counters:
    FIELDS = ("stage1_attempts", "stage1_accepts", "stage1_rejections",
              "stage2_attempts", "stage2_accepts", "stage2_autorejects",
              "safety_proposals", "degenerate_fallbacks")

    def __init__(self):
        for name in self.FIELDS:
            setattr(self, name, 0)

    def as_dict(self) -> dict:
        counts = {name: getattr(self, name) for name in self.FIELDS}
        total = counts["stage1_attempts"]
        moved = counts["stage1_accepts"] + counts["stage2_accepts"]
        counts["overall_rate"] = moved / total if total else None
        counts["stage1_rate"] = counts["stage1_accepts"] / total if total else None
        counts["stage2_rate"] = (counts["stage2_accepts"] / counts["stage2_attempts"]
                                 if counts["stage2_attempts"] else None)
        return counts


def run(config: SamplerConfig, model: ModelSpec, prior: GaussianPrior,
        y: Graph) -> SampleStore:
    """Run the configured variant; fully reproducible given ``config.seed``."""
    config.validate()
    d = model.d
    if prior.d != d:
        raise ValueError("prior dimension does not match model")
    sy = model.stat_vector(y)  # raises early on missing attributes

    eps_cov = _as_cov(config.eps_covariance, d)
    static_cov = _as_cov(config.static_covariance, d)
    eps_chol = np.linalg.cholesky(eps_cov)
    eps_log_det = 2.0 * float(np.sum(np.log(np.diag(eps_chol))))

    H = config.chains
    burn = config.resolved_burn_in()
    total_sweeps = burn + config.main_iters

    if config.aux_method == "exact":
        aux = _ExactAux(model, y)
    else:
        aux = _McmcAux(model, y, config.aux_iters, config.aux_unit,
                       config.aux_start, H)

    streams = [np.random.Generator(np.random.PCG64(ss))
               for ss in np.random.SeedSequence(config.seed).spawn(H)]
    states = np.empty((H, d))
    for h in range(H):
        states[h] = config.init_sd * streams[h].standard_normal(d)

    pop = PopulationState(
        states=states,
        vertical=[adaptcov.RunningCovariance(d) for _ in range(H)],
        rectangular=adaptcov.RunningCovariance(d),
    )
    absorb_init = config.adapt_during_burnin or burn == 0
    if absorb_init:
        for h in range(H):
            pop.vertical[h].update(states[h])
            pop.rectangular.update(states[h])

    counters = _Counters()
    log_prior = prior.log_density
    samples = np.empty((H, config.main_iters, d))

    def update_chain(h, snapshot, in_burnin):
        """One chain update against the sweep snapshot.

        Touches only chain h's rng and aux slot; counter events are returned
        so aggregation stays deterministic under any scheduling.
        """
        rng = streams[h]
        events = []
        theta = snapshot[h]
        lp_cur = log_prior(theta)
        use_ads = config.variant == "ads" or (in_burnin and config.ads_burnin)
        dr_active = config.dr_enabled and not in_burnin

        if use_ads:
            theta1, _, delta = _ads_draw(snapshot, h, config.gamma, eps_chol, rng)
            chol1 = None
        else:
            theta1, chol1, fallback = _adaptive_draw(
                config.variant, pop, h, config.beta, static_cov, config.jitter, rng)
            if fallback == "beta":
                events.append("safety_proposals")
            elif fallback == "degenerate":
                events.append("safety_proposals")
                events.append("degenerate_fallbacks")

        sy1 = aux.draw_stats(theta1, rng, h)
        lp_1 = log_prior(theta1)
        log_a1 = _log_alpha1(sy, sy1, theta, theta1, lp_cur, lp_1)
        if rng.random() < math.exp(log_a1):
            events.append("stage1_accepts")
            return theta1, events
        events.append("stage1_rejections")
        if not dr_active:
            return theta, events

        events.append("stage2_attempts")
        if use_ads:
            # Antithetic step: a narrow Gaussian around the mirrored point so
            # both h2 densities stay finite; h1 densities condition on the
            # realized chain pair within this sweep.
            center2 = antithetic_second(theta, theta1)
            theta2 = center2 + eps_chol @ rng.standard_normal(d)
            log_h1_fwd = _mvn_logpdf(theta1, theta + delta, eps_chol, eps_log_det)
            log_h1_rev = _mvn_logpdf(theta1, theta2 + delta, eps_chol, eps_log_det)
            log_h2_fwd = _mvn_logpdf(theta2, center2, eps_chol, eps_log_det)
            log_h2_rev = _mvn_logpdf(theta, antithetic_second(theta2, theta1),
                                     eps_chol, eps_log_det)
        else:
            # Same proposal as stage one with covariance halved, centred at
            # the current point: the h2 densities cancel.
            chol2 = math.sqrt(config.dr_scale) * chol1
            theta2 = theta + chol2 @ rng.standard_normal(d)
            log_det1 = 2.0 * float(np.sum(np.log(np.diag(chol1))))
            log_h1_fwd = _mvn_logpdf(theta1, theta, chol1, log_det1)
            log_h1_rev = _mvn_logpdf(theta1, theta2, chol1, log_det1)
            log_h2_fwd = 0.0
            log_h2_rev = 0.0

        sy2 = aux.draw_stats(theta2, rng, h)
        lp_2 = log_prior(theta2)
        # Reverse-path first stage theta2 -> theta1, sharing the y1 draw.
        log_a1_rev = _log_alpha1(sy, sy1, theta2, theta1, lp_2, lp_1)
        log_a2 = _log_alpha2(sy, sy2, theta, theta1, theta2, lp_cur, lp_2,
                             log_h1_fwd, log_h1_rev, log_h2_fwd, log_h2_rev,
                             log_a1, log_a1_rev)
        if log_a2 == -math.inf and log_a1_rev >= 0.0:
            events.append("stage2_autorejects")
        if rng.random() < math.exp(log_a2):
            events.append("stage2_accepts")
            return theta2, events
        return theta, events

    pool = ThreadPoolExecutor(max_workers=config.threads) if config.threads > 1 else None
    t_start = time.perf_counter()
    try:
        for sweep in range(total_sweeps):
            in_burnin = sweep < burn
            snapshot = pop.states.copy()
            if pool is not None:
                results = list(pool.map(
                    lambda h: update_chain(h, snapshot, in_burnin), range(H)))
            else:
                results = [update_chain(h, snapshot, in_burnin) for h in range(H)]
            for h, (new_theta, events) in enumerate(results):
                pop.states[h] = new_theta
                if not in_burnin:
                    counters.stage1_attempts += 1
                    for name in events:
                        setattr(counters, name, getattr(counters, name) + 1)
            pop.sweep_index = sweep + 1
            if config.adapt_during_burnin or not in_burnin:
                for h in range(H):
                    pop.vertical[h].update(pop.states[h])
                    pop.rectangular.update(pop.states[h])
            if not in_burnin:
                samples[:, sweep - burn, :] = pop.states
    finally:
        if pool is not None:
            pool.shutdown()
    wall = time.perf_counter() - t_start

    return SampleStore(
        chains=samples,
        acceptance=counters.as_dict(),
        wall_time=wall,
        param_names=model.names,
    )
