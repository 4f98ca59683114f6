"""ERGM likelihood pieces, the tie-flip auxiliary simulator, and exact
small-graph sampling by enumeration.

The unnormalised log likelihood is ``s(y) @ theta``.  Auxiliary networks are
simulated with single-dyad tie-flip Metropolis: one iteration proposes one
uniformly chosen dyad and accepts the flip with probability
``min(1, exp(+/- change @ theta))``.  ``TieFlipEngine`` is the performance
path: it keeps mutable neighbor bitmasks, degrees and a running statistic
vector so a long run never re-evaluates statistics from scratch.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, dyad_tables
from .statistics import Edges, Gwd, Gwesp, KStar, NodeFactor, StatisticDescriptor

__all__ = [
    "ModelSpec",
    "GaussianPrior",
    "log_unnorm_likelihood",
    "log_prior_density",
    "simulate_auxiliary",
    "exact_sample",
    "exact_log_z",
    "TieFlipEngine",
    "ExactTable",
]

_ENUM_DYAD_LIMIT = 20


@dataclass(frozen=True)
class ModelSpec:
    """Ordered statistic descriptors; defines s(y) and the dimension d."""

    statistics: tuple[StatisticDescriptor, ...]

    def __post_init__(self):
        if not self.statistics:
            raise ValueError("model needs at least one statistic")
        names = [s.name for s in self.statistics]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate statistic names in model: {names}")

    @property
    def d(self) -> int:
        return len(self.statistics)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.statistics)

    def stat_vector(self, g: Graph) -> np.ndarray:
        return np.array([s.evaluate(g) for s in self.statistics], dtype=float)

    def change_vector(self, g: Graph, i: int, j: int) -> np.ndarray:
        return np.array([s.change(g, i, j) for s in self.statistics], dtype=float)


def stat_vector(model: ModelSpec, g: Graph) -> np.ndarray:
    return model.stat_vector(g)


class GaussianPrior:
    """Multivariate normal prior with full log density (constant included)."""

    def __init__(self, mean, covariance):
        self.mean = np.asarray(mean, dtype=float).reshape(-1)
        cov = np.asarray(covariance, dtype=float)
        if cov.shape != (self.mean.size, self.mean.size):
            raise ValueError("prior covariance shape does not match mean")
        if not np.allclose(cov, cov.T):
            raise ValueError("prior covariance must be symmetric")
        self.covariance = cov
        self._chol = np.linalg.cholesky(cov)  # raises LinAlgError if not PD
        self._log_det = 2.0 * np.sum(np.log(np.diag(self._chol)))

    @classmethod
    def vague(cls, d: int, variance: float = 100.0) -> "GaussianPrior":
        return cls(np.zeros(d), variance * np.eye(d))

    @property
    def d(self) -> int:
        return self.mean.size

    def log_density(self, theta) -> float:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.d:
            raise ValueError("theta dimension does not match prior")
        z = np.linalg.solve(self._chol, theta - self.mean)
        return float(-0.5 * (self.d * math.log(2.0 * math.pi) + self._log_det + z @ z))


def log_unnorm_likelihood(model: ModelSpec, theta, g: Graph) -> float:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != model.d:
        raise ValueError(f"theta has length {theta.size}, model dimension is {model.d}")
    return float(model.stat_vector(g) @ theta)


def log_prior_density(prior: GaussianPrior, theta) -> float:
    return prior.log_density(theta)


class TieFlipEngine:
    """Mutable tie-flip sampler state bound to one model and node set.

    The observed graph supplies the node count, attributes and the default
    start state.  ``run`` advances ``iters`` tie-flip proposals from a given
    state and returns the new state; states carry the statistic vector so
    callers read s(y) for free.
    """

    def __init__(self, model: ModelSpec, base: Graph):
        self.model = model
        self.n = base.n
        self.base = base.copy()
        self._ii, self._jj = dyad_tables(self.n)
        self.n_dyads = self._ii.size
        self.base_state = self._state_from_graph(base)
        self.empty_state = self._state_from_graph(Graph(base.n, attributes=base.attributes))
        # Per-statistic fast delta closures, compiled once.
        self._deltas = [self._compile(s) for s in model.statistics]

    def _state_from_graph(self, g: Graph):
        if g.n != self.n:
            raise ValueError("graph node count does not match engine")
        stats = [float(s.evaluate(g)) for s in self.model.statistics]
        return (list(g._rows), [int(d) for d in g.degrees()], stats)

    def _compile(self, stat: StatisticDescriptor):
        """Return delta(rows, deg, i, j, present) for the add direction."""
        if isinstance(stat, Edges):
            return lambda rows, deg, i, j, present: 1.0
        if isinstance(stat, KStar):
            k = stat.k
            if k == 2:
                def d_kstar2(rows, deg, i, j, present):
                    off = 1 if present else 0
                    return float(deg[i] + deg[j] - 2 * off)
                return d_kstar2
            comb = math.comb

            def d_kstar(rows, deg, i, j, present):
                off = 1 if present else 0
                return float(comb(deg[i] - off, k - 1) + comb(deg[j] - off, k - 1))
            return d_kstar
        if isinstance(stat, Gwd):
            w = _gw_table(stat.decay, self.n)
            scale = math.exp(stat.decay)

            def d_gwd(rows, deg, i, j, present):
                off = 1 if present else 0
                di, dj = deg[i] - off, deg[j] - off
                return scale * (w[di + 1] - w[di] + w[dj + 1] - w[dj])
            return d_gwd
        if isinstance(stat, Gwesp):
            w = _gw_table(stat.decay, self.n)
            scale = math.exp(stat.decay)

            def d_gwesp(rows, deg, i, j, present):
                ri, rj = rows[i], rows[j]
                cn = ri & rj
                total = w[cn.bit_count()]
                adjust = 1 if present else 0
                while cn:
                    low = cn & -cn
                    k = low.bit_length() - 1
                    cn ^= low
                    rk = rows[k]
                    sp_ik = (ri & rk).bit_count() - adjust
                    sp_jk = (rj & rk).bit_count() - adjust
                    total += w[sp_ik + 1] - w[sp_ik] + w[sp_jk + 1] - w[sp_jk]
                return scale * total
            return d_gwesp
        if isinstance(stat, NodeFactor):
            ind = stat._indicator(self.base)

            def d_factor(rows, deg, i, j, present):
                return ind[i] + ind[j]
            return d_factor
        raise TypeError(f"unsupported statistic {stat!r}")

    def copy_state(self, state):
        rows, deg, stats = state
        return (list(rows), list(deg), list(stats))

    def run(self, theta, iters: int, rng: np.random.Generator, state=None):
        """Advance `iters` tie-flip proposals; returns the final state."""
        if iters < 1:
            raise ValueError("auxiliary iterations must be >= 1")
        theta = [float(t) for t in np.asarray(theta, dtype=float).reshape(-1)]
        if len(theta) != self.model.d:
            raise ValueError("theta dimension does not match model")
        rows, deg, stats = self.copy_state(self.base_state if state is None else state)
        dyads = rng.integers(0, self.n_dyads, size=iters)
        log_u = np.log(rng.random(size=iters))
        ii, jj = self._ii, self._jj
        deltas = self._deltas
        d = len(deltas)
        for t in range(iters):
            slot = dyads[t]
            i = int(ii[slot])
            j = int(jj[slot])
            present = bool(rows[i] >> j & 1)
            logr = 0.0
            changes = [0.0] * d
            for s in range(d):
                c = deltas[s](rows, deg, i, j, present)
                changes[s] = c
                logr += c * theta[s]
            if present:
                logr = -logr
            if logr >= 0.0 or log_u[t] < logr:
                bit_i, bit_j = 1 << i, 1 << j
                if present:
                    rows[i] ^= bit_j
                    rows[j] ^= bit_i
                    deg[i] -= 1
                    deg[j] -= 1
                    for s in range(d):
                        stats[s] -= changes[s]
                else:
                    rows[i] |= bit_j
                    rows[j] |= bit_i
                    deg[i] += 1
                    deg[j] += 1
                    for s in range(d):
                        stats[s] += changes[s]
        return (rows, deg, stats)

    def stats_of(self, state) -> np.ndarray:
        return np.asarray(state[2], dtype=float)

    def graph_of(self, state) -> Graph:
        rows = state[0]
        g = Graph(self.n, labels=self.base.labels, attributes=self.base.attributes)
        for i in range(self.n):
            mask = rows[i]
            while mask:
                low = mask & -mask
                j = low.bit_length() - 1
                mask ^= low
                if i < j:
                    g.toggle(i, j)
        return g


@functools.lru_cache(maxsize=None)
def _gw_table(decay: float, n: int) -> tuple[float, ...]:
    base = 1.0 - math.exp(-decay)
    out = [0.0] * (n + 2)
    p = 1.0
    for s in range(1, n + 2):
        p *= base
        out[s] = 1.0 - p
    return tuple(out)


def simulate_auxiliary(model: ModelSpec, theta, start: Graph, iters: int,
                       rng: np.random.Generator) -> Graph:
    """Run `iters` tie-flip updates from `start`; deterministic given rng."""
    engine = TieFlipEngine(model, start)
    state = engine.run(theta, iters, rng)
    return engine.graph_of(state)


class ExactTable:
    """Stat vectors of every graph on n nodes, for exact enumeration work.

    Feasible for C(n,2) <= 20.  Graphs are indexed by dyad bitmask; the
    table is filled in Gray-code order so each step is one change score.
    """

    def __init__(self, model: ModelSpec, n: int, attributes=None):
        n_dyads = n * (n - 1) // 2
        if n_dyads > _ENUM_DYAD_LIMIT:
            raise ValueError(f"enumeration infeasible: C({n},2) = {n_dyads} > {_ENUM_DYAD_LIMIT}")
        self.model = model
        self.n = n
        self.n_dyads = n_dyads
        ii, jj = dyad_tables(n)
        g = Graph(n, attributes=attributes)
        size = 1 << n_dyads
        table = np.empty((size, model.d), dtype=float)
        table[0] = model.stat_vector(g)
        prev_code = 0
        current = table[0].copy()
        for k in range(1, size):
            code = k ^ (k >> 1)
            slot = (code ^ prev_code).bit_length() - 1
            i, j = int(ii[slot]), int(jj[slot])
            adding = not g.has_edge(i, j)
            delta = model.change_vector(g, i, j)
            current = current + delta if adding else current - delta
            g.toggle(i, j)
            table[code] = current
            prev_code = code
        self.stats = table
        self._ii, self._jj = ii, jj
        self.attributes = attributes

    def log_z(self, theta) -> float:
        logits = self.stats @ np.asarray(theta, dtype=float)
        m = float(np.max(logits))
        return m + float(np.log(np.sum(np.exp(logits - m))))

    def sample_index(self, theta, rng: np.random.Generator) -> int:
        logits = self.stats @ np.asarray(theta, dtype=float)
        logits -= np.max(logits)
        p = np.exp(logits)
        p /= p.sum()
        return int(rng.choice(p.size, p=p))

    def graph_from_index(self, mask: int) -> Graph:
        edges = [(int(self._ii[s]), int(self._jj[s]))
                 for s in range(self.n_dyads) if mask >> s & 1]
        return Graph.from_edge_list(self.n, edges, attributes=self.attributes)


@functools.lru_cache(maxsize=8)
def _cached_table(model: ModelSpec, n: int) -> ExactTable:
    return ExactTable(model, n)


def _needs_attributes(model: ModelSpec) -> bool:
    return any(isinstance(s, NodeFactor) for s in model.statistics)


def exact_sample(model: ModelSpec, theta, n: int, rng: np.random.Generator,
                 attributes=None) -> Graph:
    """Draw a graph exactly from p(.|theta) by full enumeration."""
    if _needs_attributes(model) and attributes is None:
        raise ValueError("model uses node factors; attributes required")
    table = ExactTable(model, n, attributes) if attributes else _cached_table(model, n)
    return table.graph_from_index(table.sample_index(theta, rng))


def exact_log_z(model: ModelSpec, theta, n: int, attributes=None) -> float:
    """log sum_y exp(s(y) @ theta); closed form for the edges-only model."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if model.statistics == (Edges(),):
        n_dyads = n * (n - 1) // 2
        return float(n_dyads * np.logaddexp(0.0, theta[0]))
    if _needs_attributes(model) and attributes is None:
        raise ValueError("model uses node factors; attributes required")
    table = ExactTable(model, n, attributes) if attributes else _cached_table(model, n)
    return table.log_z(theta)
