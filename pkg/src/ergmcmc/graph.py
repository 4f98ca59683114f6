"""Undirected simple-graph storage with O(1) dyad queries and toggles.

The adjacency lives in a packed upper-triangular bit array indexed by
(min(i, j), max(i, j)).  Per-node neighbor bitmasks and a degree array are
kept in sync so that degree and shared-partner counts stay cheap.
"""

from __future__ import annotations

import csv
import functools

import numpy as np

__all__ = ["Graph", "parse_edge_lines", "read_edge_list", "read_attributes"]


@functools.lru_cache(maxsize=None)
def dyad_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint arrays (i, j) for the C(n,2) dyad slots, i < j, row-major."""
    ii, jj = np.triu_indices(n, k=1)
    return ii.astype(np.int64), jj.astype(np.int64)


class Graph:
    """Undirected simple graph on nodes 0..n-1 with categorical attributes.

    Mutable: ``toggle`` flips a dyad in place.  Callers that share a graph
    across chains or threads must hand out private copies (``copy()``); the
    auxiliary simulator does exactly that.
    """

    __slots__ = ("n", "_tri", "_rows", "_deg", "edge_count", "labels", "attributes")

    def __init__(self, n, labels=None, attributes=None):
        if n <= 0:
            raise ValueError("node count must be positive")
        self.n = int(n)
        self._tri = np.zeros(n * (n - 1) // 2, dtype=bool)
        self._rows = [0] * n
        self._deg = np.zeros(n, dtype=np.int64)
        self.edge_count = 0
        if labels is not None and len(labels) != n:
            raise ValueError("label list length != node count")
        self.labels = tuple(labels) if labels is not None else None
        self.attributes = {}
        if attributes:
            for name, values in attributes.items():
                self.set_attribute(name, values)

    @classmethod
    def from_edge_list(cls, n, edges, attributes=None, labels=None):
        g = cls(n, labels=labels, attributes=attributes)
        for i, j in edges:
            g._check_dyad(i, j)
            if not g.has_edge(i, j):  # duplicates tolerated
                g.toggle(i, j)
        return g

    def set_attribute(self, name, values):
        values = tuple(str(v) for v in values)
        if len(values) != self.n:
            raise ValueError(
                f"attribute {name!r} has {len(values)} entries for {self.n} nodes"
            )
        self.attributes[name] = values

    def _check_dyad(self, i, j):
        if i == j:
            raise ValueError(f"self-loop dyad ({i}, {j}) not allowed")
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError(f"node out of range in dyad ({i}, {j})")

    def _slot(self, i, j):
        if i > j:
            i, j = j, i
        return i * self.n - i * (i + 1) // 2 + (j - i - 1)

    def has_edge(self, i, j) -> bool:
        self._check_dyad(i, j)
        return bool(self._tri[self._slot(i, j)])

    def toggle(self, i, j) -> None:
        """Flip dyad (i, j); edge count and neighbor structures follow."""
        self._check_dyad(i, j)
        slot = self._slot(i, j)
        present = self._tri[slot]
        self._tri[slot] = not present
        bit_i, bit_j = 1 << i, 1 << j
        if present:
            self._rows[i] ^= bit_j
            self._rows[j] ^= bit_i
            self._deg[i] -= 1
            self._deg[j] -= 1
            self.edge_count -= 1
        else:
            self._rows[i] |= bit_j
            self._rows[j] |= bit_i
            self._deg[i] += 1
            self._deg[j] += 1
            self.edge_count += 1

    def degree(self, i) -> int:
        if not 0 <= i < self.n:
            raise ValueError(f"node {i} out of range")
        return int(self._deg[i])

    def degrees(self) -> np.ndarray:
        return self._deg.copy()

    def shared_partners(self, i, j) -> int:
        """Number of nodes adjacent to both i and j."""
        self._check_dyad(i, j)
        return (self._rows[i] & self._rows[j]).bit_count()

    def common_neighbors(self, i, j) -> list[int]:
        self._check_dyad(i, j)
        mask = self._rows[i] & self._rows[j]
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    def neighbor_mask(self, i) -> int:
        return self._rows[i]

    def edges(self) -> list[tuple[int, int]]:
        ii, jj = dyad_tables(self.n)
        slots = np.nonzero(self._tri)[0]
        return list(zip(ii[slots].tolist(), jj[slots].tolist()))

    def dyad_bits(self) -> np.ndarray:
        """Copy of the packed triangular adjacency array."""
        return self._tri.copy()

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g.n = self.n
        g._tri = self._tri.copy()
        g._rows = list(self._rows)
        g._deg = self._deg.copy()
        g.edge_count = self.edge_count
        g.labels = self.labels
        g.attributes = dict(self.attributes)
        return g

    def node_index(self, label) -> int:
        if self.labels is None:
            raise ValueError("graph has no node labels")
        return self.labels.index(label)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self._tri, other._tri)
            and self.attributes == other.attributes
        )

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count})"


def parse_edge_lines(lines):
    """Parse edge-list text into (labels, index pairs).

    One ``label_i<TAB>label_j`` per line; ``#`` starts a comment.  A line
    holding a single label declares an isolated node, so node rosters with
    isolates survive the round trip.  Labels are numbered in order of first
    appearance.
    """
    labels: list[str] = []
    index: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []

    def node_id(label):
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) == 1:
            node_id(parts[0])
        elif len(parts) == 2:
            a, b = node_id(parts[0]), node_id(parts[1])
            if a == b:
                raise ValueError(f"self-loop in edge list: {line!r}")
            pairs.append((a, b))
        else:
            raise ValueError(f"malformed edge-list line: {line!r}")
    return labels, pairs


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        labels, pairs = parse_edge_lines(fh)
    if not labels:
        raise ValueError(f"edge list {path} declares no nodes")
    return Graph.from_edge_list(len(labels), pairs, labels=labels)


def read_attributes(path):
    """Read a node-attribute CSV: header ``node,attr1,...``, one row per node.

    Returns (node labels in file order, {attribute name: values in file order}).
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip().lower() != "node":
            raise ValueError(f"attribute file {path} must start with a 'node' column")
        names = [h.strip() for h in header[1:]]
        nodes, columns = [], {name: [] for name in names}
        for row in reader:
            if not row or not "".join(row).strip():
                continue
            if len(row) != len(header):
                raise ValueError(f"attribute row has {len(row)} fields, expected {len(header)}")
            nodes.append(row[0].strip())
            for name, value in zip(names, row[1:]):
                columns[name].append(value.strip())
    return nodes, columns
