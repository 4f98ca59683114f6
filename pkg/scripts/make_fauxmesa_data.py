"""Generate the bundled synthetic high-school friendship network.

The original survey data behind the well-known 205-student "faux mesa"
friendship network is not redistributable here, so the bundled dataset is a
synthetic surrogate: grade and sex marginals follow the commonly reported
values, and ties are simulated from the package's own nine-statistic model
at parameter values close to published posterior estimates for that
network.  Fixed seed; rerunning this script reproduces the committed files
byte for byte.
"""

import pathlib

import numpy as np

from ergmcmc import Graph, ModelSpec, parse_statistic
from ergmcmc.model import TieFlipEngine

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "ergmcmc" / "data" / "fauxmesa"

GRADE_COUNTS = {"7": 62, "8": 40, "9": 42, "10": 25, "11": 24, "12": 12}
THETA = [-5.53, -0.15, -0.09, -0.04, -0.12, 0.20, -0.18, 0.28, 1.53]
STATS = ["edges", "nodefactor(grade,8)", "nodefactor(grade,9)", "nodefactor(grade,10)",
         "nodefactor(grade,11)", "nodefactor(grade,12)", "nodefactor(sex,M)",
         "gwesp(1.0)", "gwd(1.0)"]
SEED = 20260810
TOGGLES = 4_000_000


def main():
    rng = np.random.default_rng(SEED)
    n = sum(GRADE_COUNTS.values())
    grades = [g for g, c in GRADE_COUNTS.items() for _ in range(c)]
    sex = ["M" if rng.random() < 0.485 else "F" for _ in range(n)]
    labels = [f"s{k + 1:03d}" for k in range(n)]

    empty = Graph(n, labels=labels, attributes={"grade": grades, "sex": sex})
    model = ModelSpec(tuple(parse_statistic(s) for s in STATS))
    engine = TieFlipEngine(model, empty)
    state = engine.run(np.array(THETA), TOGGLES, rng)
    g = engine.graph_of(state)
    print(f"simulated graph: {g.n} nodes, {g.edge_count} edges")
    print("statistics:", np.round(engine.stats_of(state), 2))

    OUT.mkdir(parents=True, exist_ok=True)
    with (OUT / "edges.tsv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("# Synthetic high-school friendship network, 205 students.\n")
        fh.write("# See README.md in this directory for provenance.\n")
        for a, b in g.edges():
            fh.write(f"{labels[a]}\t{labels[b]}\n")
        touched = {v for ab in g.edges() for v in ab}
        for k, label in enumerate(labels):
            if k not in touched:
                fh.write(f"{label}\n")
    with (OUT / "attributes.csv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("node,grade,sex\n")
        for k, label in enumerate(labels):
            fh.write(f"{label},{grades[k]},{sex[k]}\n")
    print(f"written to {OUT}")


if __name__ == "__main__":
    main()
