"""Autocorrelation, effective sample size, and posterior summaries.

ESS follows the truncated integrated-autocorrelation rule: the lag sum
stops at the first lag whose autocorrelation drops below 0.05 (that lag
excluded), and the estimate is capped into (0, S].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SampleStore",
    "RunReport",
    "autocorrelation",
    "ess",
    "summarize",
    "performance",
    "ESS_CUTOFF",
]

ESS_CUTOFF = 0.05


@dataclass
class SampleStore:
    """Post-burn-in draws from all chains plus sampler bookkeeping.

    ``chains`` has shape (H, T, d); ``pooled`` concatenates chains in chain
    order.  ``acceptance`` carries the per-stage counters from the run.
    """

    chains: np.ndarray
    acceptance: dict = field(default_factory=dict)
    wall_time: float = 0.0
    param_names: tuple = ()

    def __post_init__(self):
        self.chains = np.asarray(self.chains, dtype=float)
        if self.chains.ndim != 3:
            raise ValueError("chains must have shape (H, T, d)")

    @property
    def n_chains(self) -> int:
        return self.chains.shape[0]

    @property
    def n_samples(self) -> int:
        return self.chains.shape[0] * self.chains.shape[1]

    @property
    def d(self) -> int:
        return self.chains.shape[2]

    @property
    def pooled(self) -> np.ndarray:
        return self.chains.reshape(-1, self.chains.shape[2])


@dataclass
class RunReport:
    param_names: tuple
    mean: np.ndarray
    sd: np.ndarray
    correlation: np.ndarray
    ess_pooled: np.ndarray          # ESS of the concatenated sequence
    ess_by_chain_sum: np.ndarray    # per-chain ESS summed across chains
    performance: np.ndarray         # ess_pooled / wall_time
    overall_performance: float
    acceptance: dict
    wall_time: float
    n_samples: int
    n_chains: int
    degenerate: tuple = ()
    ess_floored: tuple = ()

    def to_dict(self) -> dict:
        return {
            "parameters": list(self.param_names),
            "posterior_mean": [float(v) for v in self.mean],
            "posterior_sd": [float(v) for v in self.sd],
            "correlation": [[float(v) for v in row] for row in self.correlation],
            "ess": {
                "pooled": [float(v) for v in self.ess_pooled],
                "by_chain_sum": [float(v) for v in self.ess_by_chain_sum],
            },
            "performance": {
                "per_parameter": [float(v) for v in self.performance],
                "overall": float(self.overall_performance),
            },
            "acceptance": {k: (float(v) if isinstance(v, (int, float)) else v)
                           for k, v in self.acceptance.items()},
            "wall_time_seconds": float(self.wall_time),
            "sample_count": int(self.n_samples),
            "chain_count": int(self.n_chains),
            "degenerate_parameters": list(self.degenerate),
            "ess_floored_parameters": list(self.ess_floored),
        }

    def to_text(self) -> str:
        lines = []
        header = f"{'parameter':<22}{'mean':>10}{'sd':>10}{'ESS':>10}{'ESS/sec':>10}"
        lines.append(header)
        lines.append("-" * len(header))
        for k, name in enumerate(self.param_names):
            lines.append(
                f"{name:<22}{self.mean[k]:>10.3f}{self.sd[k]:>10.3f}"
                f"{self.ess_pooled[k]:>10.1f}{self.performance[k]:>10.2f}"
            )
        lines.append("")
        lines.append("posterior correlation matrix:")
        for row in self.correlation:
            lines.append("  " + " ".join(f"{v:>7.3f}" for v in row))
        lines.append("")
        for key, value in self.acceptance.items():
            if key.endswith("rate") and value is not None:
                lines.append(f"{key}: {value:.4f}")
        lines.append(f"wall time: {self.wall_time:.2f} s")
        lines.append(f"samples: {self.n_samples} from {self.n_chains} chains")
        if self.degenerate:
            lines.append(f"degenerate parameters: {', '.join(self.degenerate)}")
        return "\n".join(lines) + "\n"


def autocorrelation(chain, max_lag: int) -> np.ndarray:
    """Sample autocorrelations rho_0..rho_max_lag (FFT-based)."""
    x = np.asarray(chain, dtype=float).reshape(-1)
    s = x.size
    if s < 2:
        raise ValueError("need at least 2 samples")
    max_lag = int(min(max_lag, s - 1))
    x = x - x.mean()
    denom = float(x @ x)
    if denom == 0.0:
        raise ValueError("zero-variance sequence has no autocorrelation")
    size = 1
    while size < 2 * s:
        size <<= 1
    f = np.fft.rfft(x, n=size)
    acov = np.fft.irfft(f * np.conj(f), n=size)[: max_lag + 1]
    return acov / denom


def _ess_detail(chain, cutoff: float = ESS_CUTOFF, max_lag: int | None = None):
    x = np.asarray(chain, dtype=float).reshape(-1)
    s = x.size
    if max_lag is None:
        max_lag = int(min(s - 1, 10.0 * math.sqrt(s)))
    rho = autocorrelation(x, max_lag)
    total = 0.0
    for k in range(1, rho.size):
        if rho[k] < cutoff:
            break
        total += rho[k]
    raw = s / (1.0 + 2.0 * total)
    floored = False
    value = raw
    if value > s:
        value = float(s)
        floored = True
    return value, floored


def ess(chain, cutoff: float = ESS_CUTOFF, max_lag: int | None = None) -> float:
    value, _ = _ess_detail(chain, cutoff, max_lag)
    return value


def performance(ess_value: float, wall_time: float) -> float:
    if wall_time <= 0:
        raise ValueError("wall time must be positive")
    return float(ess_value) / float(wall_time)


def summarize(store: SampleStore, param_names=None) -> RunReport:
    pooled = store.pooled
    s, d = pooled.shape
    if s < 2:
        raise ValueError("need at least 2 samples to summarize")
    names = tuple(param_names or store.param_names or (f"theta{k + 1}" for k in range(d)))
    mean = pooled.mean(axis=0)
    sd = pooled.std(axis=0, ddof=1)
    degenerate = tuple(names[k] for k in range(d) if sd[k] == 0.0)

    correlation = np.eye(d)
    live = [k for k in range(d) if sd[k] > 0.0]
    if len(live) >= 2:
        sub = np.corrcoef(pooled[:, live], rowvar=False)
        for a, ka in enumerate(live):
            for b, kb in enumerate(live):
                correlation[ka, kb] = sub[a, b]

    ess_pooled = np.empty(d)
    ess_chain_sum = np.empty(d)
    floored = []
    for k in range(d):
        if sd[k] == 0.0:
            ess_pooled[k] = math.nan
            ess_chain_sum[k] = math.nan
            continue
        value, was_floored = _ess_detail(pooled[:, k])
        ess_pooled[k] = value
        if was_floored:
            floored.append(names[k])
        total = 0.0
        for h in range(store.n_chains):
            seg = store.chains[h, :, k]
            if seg.std(ddof=1) == 0.0:
                continue
            total += ess(seg)
        ess_chain_sum[k] = total

    wall = store.wall_time
    if wall > 0:
        perf = np.array([performance(v, wall) if not math.isnan(v) else math.nan
                         for v in ess_pooled])
        finite = perf[~np.isnan(perf)]
        overall = float(finite.mean()) if finite.size else math.nan
    else:
        perf = np.full(d, math.nan)
        overall = math.nan

    return RunReport(
        param_names=names,
        mean=mean,
        sd=sd,
        correlation=correlation,
        ess_pooled=ess_pooled,
        ess_by_chain_sum=ess_chain_sum,
        performance=perf,
        overall_performance=overall,
        acceptance=dict(store.acceptance),
        wall_time=wall,
        n_samples=s,
        n_chains=store.n_chains,
        degenerate=degenerate,
        ess_floored=tuple(floored),
    )
