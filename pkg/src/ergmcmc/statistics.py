"""ERGM sufficient statistics and single-dyad change scores.

Supported families:

* ``Edges``             -- number of ties, sum_{i<j} y_ij
* ``KStar(k)``          -- k-stars, sum_v C(degree(v), k)
* ``Gwesp(decay)``      -- geometrically weighted edgewise shared partners,
                           e^d * sum_{s>=1} (1 - (1 - e^-d)^s) EP_s(y)
* ``Gwd(decay)``        -- geometrically weighted degrees,
                           e^d * sum_{s>=1} (1 - (1 - e^-d)^s) D_s(y)
* ``NodeFactor(a, l)``  -- attribute activity, sum_{i<j} y_ij (1[x_i=l] + 1[x_j=l])

Decay parameters are fixed at model-build time.  Change scores follow the
add-edge convention: ``s(y with tie) - s(y without tie)`` for the queried
dyad, whatever the tie's current state.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .graph import Graph

__all__ = [
    "Edges",
    "KStar",
    "Gwesp",
    "Gwd",
    "NodeFactor",
    "StatisticDescriptor",
    "evaluate",
    "change_score",
    "parse_statistic",
    "format_statistic",
]

DEFAULT_DECAY = math.log(2.0)


class StatisticDescriptor:
    """Base class; concrete descriptors are small frozen dataclasses."""

    @property
    def name(self) -> str:
        raise NotImplementedError

    def evaluate(self, g: Graph) -> float:
        raise NotImplementedError

    def change(self, g: Graph, i: int, j: int) -> float:
        """Change score for dyad (i, j) in the add-edge direction."""
        raise NotImplementedError


@dataclass(frozen=True)
class Edges(StatisticDescriptor):
    @property
    def name(self):
        return "edges"

    def evaluate(self, g):
        return float(g.edge_count)

    def change(self, g, i, j):
        g._check_dyad(i, j)
        return 1.0


@dataclass(frozen=True)
class KStar(StatisticDescriptor):
    k: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k-star order must be >= 2")

    @property
    def name(self):
        return f"kstar{self.k}"

    def evaluate(self, g):
        return float(sum(math.comb(int(d), self.k) for d in g.degrees()))

    def change(self, g, i, j):
        # Adding (i,j) lifts C(d,k) to C(d+1,k) at both endpoints, a gain of
        # C(d,k-1) each, where d is the endpoint degree without the tie.
        di, dj = g.degree(i), g.degree(j)
        if g.has_edge(i, j):
            di -= 1
            dj -= 1
        return float(math.comb(di, self.k - 1) + math.comb(dj, self.k - 1))


def _gw_weights(decay: float, n: int) -> list[float]:
    """w[s] = 1 - (1 - e^-decay)^s for s = 0..n; w[0] = 0."""
    base = 1.0 - math.exp(-decay)
    w = [0.0] * (n + 1)
    p = 1.0
    for s in range(1, n + 1):
        p *= base
        w[s] = 1.0 - p
    return w


@dataclass(frozen=True)
class Gwesp(StatisticDescriptor):
    decay: float = DEFAULT_DECAY

    def __post_init__(self):
        if self.decay <= 0:
            raise ValueError("gwesp decay must be > 0")

    @property
    def name(self):
        return f"gwesp{self.decay:g}"

    def evaluate(self, g):
        w = _gw_weights(self.decay, g.n)
        total = sum(w[g.shared_partners(a, b)] for a, b in g.edges())
        return math.exp(self.decay) * total

    def change(self, g, i, j):
        w = _gw_weights(self.decay, g.n)
        present = g.has_edge(i, j)
        # Every common neighbor k links ties (i,k) and (j,k), each of which
        # gains a shared partner when (i,j) appears.  When the tie is already
        # present the raw counts overcount it by one.
        adjust = 1 if present else 0
        total = w[g.shared_partners(i, j)]
        for k in g.common_neighbors(i, j):
            sp_ik = g.shared_partners(i, k) - adjust
            sp_jk = g.shared_partners(j, k) - adjust
            total += (w[sp_ik + 1] - w[sp_ik]) + (w[sp_jk + 1] - w[sp_jk])
        return math.exp(self.decay) * total


@dataclass(frozen=True)
class Gwd(StatisticDescriptor):
    decay: float = DEFAULT_DECAY

    def __post_init__(self):
        if self.decay <= 0:
            raise ValueError("gwd decay must be > 0")

    @property
    def name(self):
        return f"gwd{self.decay:g}"

    def evaluate(self, g):
        w = _gw_weights(self.decay, g.n)
        return math.exp(self.decay) * sum(w[int(d)] for d in g.degrees())

    def change(self, g, i, j):
        w = _gw_weights(self.decay, g.n)
        di, dj = g.degree(i), g.degree(j)
        if g.has_edge(i, j):
            di -= 1
            dj -= 1
        return math.exp(self.decay) * (w[di + 1] - w[di] + w[dj + 1] - w[dj])


@dataclass(frozen=True)
class NodeFactor(StatisticDescriptor):
    attribute: str
    level: str

    @property
    def name(self):
        return f"nodefactor.{self.attribute}.{self.level}"

    def _indicator(self, g):
        if self.attribute not in g.attributes:
            raise ValueError(f"graph has no attribute {self.attribute!r}")
        values = g.attributes[self.attribute]
        return [1.0 if v == self.level else 0.0 for v in values]

    def evaluate(self, g):
        ind = self._indicator(g)
        return sum(ind[a] + ind[b] for a, b in g.edges())

    def change(self, g, i, j):
        g._check_dyad(i, j)
        ind = self._indicator(g)
        return ind[i] + ind[j]


def evaluate(stat: StatisticDescriptor, g: Graph) -> float:
    return stat.evaluate(g)


def change_score(stat: StatisticDescriptor, g: Graph, i: int, j: int) -> float:
    return stat.change(g, i, j)


_STAT_RE = re.compile(r"^\s*([a-z]+)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def parse_statistic(text: str) -> StatisticDescriptor:
    """Parse descriptor syntax: ``edges``, ``kstar(2)``, ``gwesp(0.6931)``,
    ``gwd(0.6931)``, ``nodefactor(grade,8)``."""
    m = _STAT_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse statistic {text!r}")
    kind, arg = m.group(1), m.group(2)
    if kind == "edges":
        if arg:
            raise ValueError("edges takes no argument")
        return Edges()
    if kind == "kstar":
        if not arg:
            raise ValueError("kstar needs an order, e.g. kstar(2)")
        return KStar(int(arg))
    if kind == "gwesp":
        return Gwesp(float(arg)) if arg else Gwesp()
    if kind == "gwd":
        return Gwd(float(arg)) if arg else Gwd()
    if kind == "nodefactor":
        parts = [p.strip() for p in arg.split(",")] if arg else []
        if len(parts) != 2:
            raise ValueError("nodefactor needs (attribute, level)")
        return NodeFactor(parts[0], parts[1])
    raise ValueError(f"unknown statistic kind {kind!r}")


def format_statistic(stat: StatisticDescriptor) -> str:
    if isinstance(stat, Edges):
        return "edges"
    if isinstance(stat, KStar):
        return f"kstar({stat.k})"
    if isinstance(stat, Gwesp):
        return f"gwesp({stat.decay!r})"
    if isinstance(stat, Gwd):
        return f"gwd({stat.decay!r})"
    if isinstance(stat, NodeFactor):
        return f"nodefactor({stat.attribute},{stat.level})"
    raise TypeError(f"unknown descriptor {stat!r}")
