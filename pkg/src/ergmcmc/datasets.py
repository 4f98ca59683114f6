"""Bundled network datasets and dataset loading for the CLI."""

from __future__ import annotations

from importlib import resources

from .graph import Graph, parse_edge_lines, read_attributes, read_edge_list

__all__ = ["BUILTIN_DATASETS", "load_builtin", "load_dataset"]

BUILTIN_DATASETS = ("florentine", "karate", "fauxmesa")


def _data_dir(name: str):
    return resources.files("ergmcmc") / "data" / name


def load_builtin(name: str) -> Graph:
    if name not in BUILTIN_DATASETS:
        raise ValueError(f"unknown builtin dataset {name!r}; have {BUILTIN_DATASETS}")
    folder = _data_dir(name)
    edge_file = folder / "edges.tsv"
    with edge_file.open(encoding="utf-8") as fh:
        labels, pairs = parse_edge_lines(fh)
    attr_file = folder / "attributes.csv"
    attributes = None
    if attr_file.is_file():
        with resources.as_file(attr_file) as path:
            nodes, columns = read_attributes(path)
        labels, attributes = _align_attributes(labels, nodes, columns)
    return Graph.from_edge_list(len(labels), pairs, labels=labels, attributes=attributes)


def _align_attributes(edge_labels, attr_nodes, columns):
    """Union the edge-list roster with the attribute roster (attribute file
    order wins for nodes it lists); every node must have attribute rows."""
    order = list(attr_nodes)
    known = set(order)
    for label in edge_labels:
        if label not in known:
            raise ValueError(f"node {label!r} has edges but no attribute row")
    lookup = {node: k for k, node in enumerate(attr_nodes)}
    attributes = {
        name: tuple(values[lookup[node]] for node in order)
        for name, values in columns.items()
    }
    return order, attributes


def load_dataset(source) -> Graph:
    """Load a builtin name or a {"edges": path, "attributes": path?} mapping."""
    if isinstance(source, str):
        return load_builtin(source)
    if isinstance(source, dict):
        if "edges" not in source:
            raise ValueError("dataset mapping needs an 'edges' path")
        g = read_edge_list(source["edges"])
        if source.get("attributes"):
            nodes, columns = read_attributes(source["attributes"])
            labels, attributes = _align_attributes(list(g.labels), nodes, columns)
            g = Graph.from_edge_list(
                len(labels),
                [(labels.index(g.labels[a]), labels.index(g.labels[b]))
                 for a, b in g.edges()],
                labels=labels,
                attributes=attributes,
            )
        return g
    raise ValueError(f"cannot interpret dataset reference {source!r}")
