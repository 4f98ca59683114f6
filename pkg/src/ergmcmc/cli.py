"""Batch front-end: fit / compare / simulate with JSON run configs."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np

from . import diagnostics, samplers
from .datasets import load_dataset
from .graph import Graph
from .model import GaussianPrior, ModelSpec, simulate_auxiliary
from .samplers import SamplerConfig
from .statistics import format_statistic, parse_statistic

__all__ = ["RunConfig", "main", "cmd_fit", "cmd_compare", "cmd_simulate",
           "ConfigError", "DataError", "NumericalError", "available_presets"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


_SAMPLER_FIELDS = {f.name for f in fields(SamplerConfig)}


@dataclass
class RunConfig:
    dataset: object
    model: list
    prior: dict
    sampler: dict
    output: str = "out"
    replicates: int = 10
    variants: list | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(raw) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = cls(
                dataset=raw["dataset"],
                model=list(raw["model"]),
                prior=dict(raw.get("prior", {"mean": 0.0, "variance": 100.0})),
                sampler=dict(raw.get("sampler", {})),
                output=raw.get("output", "out"),
                replicates=int(raw.get("replicates", 10)),
                variants=[dict(v) for v in raw["variants"]] if "variants" in raw else None,
            )
        except KeyError as exc:
            raise ConfigError(f"config is missing required key {exc}") from exc
        bad = set(cfg.sampler) - _SAMPLER_FIELDS
        if bad:
            raise ConfigError(f"unknown sampler keys: {sorted(bad)}")
        for stat in cfg.model:
            parse_statistic(stat)  # fail fast on typos
        return cfg

    def to_dict(self) -> dict:
        out = {
            "dataset": self.dataset,
            "model": list(self.model),
            "prior": dict(self.prior),
            "sampler": dict(self.sampler),
            "output": self.output,
            "replicates": self.replicates,
        }
        if self.variants is not None:
            out["variants"] = [dict(v) for v in self.variants]
        return out

    def build_model(self) -> ModelSpec:
        return ModelSpec(tuple(parse_statistic(s) for s in self.model))

    def build_prior(self, d: int) -> GaussianPrior:
        mean = np.asarray(self.prior.get("mean", 0.0), dtype=float)
        if mean.ndim == 0:
            mean = np.full(d, float(mean))
        if "covariance" in self.prior:
            cov = np.asarray(self.prior["covariance"], dtype=float)
        else:
            cov = float(self.prior.get("variance", 100.0)) * np.eye(d)
        try:
            return GaussianPrior(mean, cov)
        except np.linalg.LinAlgError as exc:
            raise ConfigError(f"prior covariance is not positive definite: {exc}") from exc

    def build_sampler(self, overrides: dict | None = None) -> SamplerConfig:
        merged = dict(self.sampler)
        if overrides:
            bad = set(overrides) - _SAMPLER_FIELDS
            if bad:
                raise ConfigError(f"unknown sampler keys in variant: {sorted(bad)}")
            merged.update(overrides)
        try:
            cfg = SamplerConfig(**merged)
            cfg.validate()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad sampler settings: {exc}") from exc
        return cfg


def available_presets() -> list[str]:
    folder = resources.files("ergmcmc") / "presets"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def load_config(ref: str) -> RunConfig:
    """Load a config from a file path or a bundled preset name."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    else:
        preset = resources.files("ergmcmc") / "presets" / f"{ref}.json"
        if not preset.is_file():
            raise ConfigError(
                f"{ref!r} is neither a config file nor a preset; presets: {available_presets()}")
        text = preset.read_text(encoding="utf-8")
    try:
        return RunConfig.from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _load_graph(cfg: RunConfig) -> Graph:
    try:
        return load_dataset(cfg.dataset)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot load dataset: {exc}") from exc


def _check_model_on_graph(model: ModelSpec, g: Graph) -> np.ndarray:
    try:
        return model.stat_vector(g)
    except ValueError as exc:
        raise DataError(f"model statistics fail on dataset: {exc}") from exc


def _write_samples_csv(path: Path, store: diagnostics.SampleStore) -> None:
    names = store.param_names
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("chain,sweep," + ",".join(names) + "\n")
        for h in range(store.n_chains):
            for t in range(store.chains.shape[1]):
                row = ",".join(repr(float(v)) for v in store.chains[h, t])
                fh.write(f"{h},{t},{row}\n")


def _write_trace_csv(out_dir: Path, store: diagnostics.SampleStore) -> None:
    h_count, t_count, _ = store.chains.shape
    for k, name in enumerate(store.param_names):
        path = out_dir / f"trace_{name}.csv"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("sweep," + ",".join(f"chain{h + 1}" for h in range(h_count)) + "\n")
            for t in range(t_count):
                vals = ",".join(repr(float(store.chains[h, t, k])) for h in range(h_count))
                fh.write(f"{t},{vals}\n")


def _write_acf_csv(out_dir: Path, store: diagnostics.SampleStore, max_lag: int = 100) -> None:
    pooled = store.pooled
    for k, name in enumerate(store.param_names):
        column = pooled[:, k]
        path = out_dir / f"acf_{name}.csv"
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write("lag,rho\n")
            if column.std() == 0.0:
                continue
            rho = diagnostics.autocorrelation(column, min(max_lag, column.size - 1))
            for lag, value in enumerate(rho):
                fh.write(f"{lag},{value!r}\n")


def _run_once(cfg: RunConfig, overrides=None, seed=None):
    model = cfg.build_model()
    g = _load_graph(cfg)
    _check_model_on_graph(model, g)
    prior = cfg.build_prior(model.d)
    sampler_cfg = cfg.build_sampler(overrides)
    if seed is not None:
        sampler_cfg.seed = seed
    try:
        store = samplers.run(sampler_cfg, model, prior, g)
    except (np.linalg.LinAlgError, FloatingPointError, OverflowError) as exc:
        raise NumericalError(f"sampling failed: {exc}") from exc
    return store, sampler_cfg


def cmd_fit(cfg: RunConfig, seed=None, out_dir=None) -> Path:
    out = Path(out_dir or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    store, sampler_cfg = _run_once(cfg, seed=seed)
    report = diagnostics.summarize(store)
    payload = report.to_dict()
    payload["config"] = cfg.to_dict()
    payload["config"]["sampler"]["seed"] = sampler_cfg.seed
    (out / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    (out / "summary.txt").write_text(report.to_text(), encoding="utf-8")
    _write_samples_csv(out / "samples.csv", store)
    _write_trace_csv(out, store)
    _write_acf_csv(out, store)
    return out


def _compare_worker(args):
    cfg_dict, overrides, seed = args
    cfg = RunConfig.from_dict(cfg_dict)
    store, _ = _run_once(cfg, overrides=overrides, seed=seed)
    report = diagnostics.summarize(store)
    mean_ess = float(np.nanmean(report.ess_pooled))
    return mean_ess, float(report.overall_performance), report.acceptance.get("overall_rate")


def cmd_compare(cfg: RunConfig, replicates=None, out_dir=None, jobs=1):
    if not cfg.variants:
        raise ConfigError("compare needs a 'variants' list in the config")
    reps = int(replicates if replicates is not None else cfg.replicates)
    if reps < 1:
        raise ConfigError("replicates must be >= 1")
    base_seed = int(cfg.sampler.get("seed", 1234))
    tasks, index = [], []
    for v, variant in enumerate(cfg.variants):
        name = variant.get("name") or variant.get("sampler", {}).get("variant", f"variant{v}")
        overrides = dict(variant.get("sampler", {}))
        for r in range(reps):
            tasks.append((cfg.to_dict(), overrides, base_seed + 10000 * r))
            index.append(name)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_compare_worker, tasks))
    else:
        outcomes = [_compare_worker(t) for t in tasks]

    rows = []
    for v, variant in enumerate(cfg.variants):
        name = variant.get("name") or variant.get("sampler", {}).get("variant", f"variant{v}")
        picks = [outcomes[k] for k in range(len(outcomes)) if index[k] == name]
        ess = float(np.mean([p[0] for p in picks]))
        perf = float(np.mean([p[1] for p in picks]))
        rates = [p[2] for p in picks if p[2] is not None]
        rows.append({
            "variant": name,
            "mean_ess": ess,
            "mean_performance": perf,
            "mean_acceptance": float(np.mean(rates)) if rates else None,
            "replicates": reps,
        })

    out = Path(out_dir or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "comparison.csv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("variant,mean_ess,mean_performance,mean_acceptance,replicates\n")
        for row in rows:
            acc = "" if row["mean_acceptance"] is None else f"{row['mean_acceptance']:.4f}"
            fh.write(f"{row['variant']},{row['mean_ess']:.2f},"
                     f"{row['mean_performance']:.2f},{acc},{row['replicates']}\n")
    lines = [f"{'variant':<16}{'ESS':>10}{'perf/sec':>12}{'accept':>10}"]
    lines.append("-" * len(lines[0]))
    for row in rows:
        acc = "" if row["mean_acceptance"] is None else f"{row['mean_acceptance']:.3f}"
        lines.append(f"{row['variant']:<16}{row['mean_ess']:>10.1f}"
                     f"{row['mean_performance']:>12.2f}{acc:>10}")
    (out / "comparison.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return rows


def cmd_simulate(cfg: RunConfig, theta, draws, iters=None, out_dir=None) -> Path:
    model = cfg.build_model()
    g = _load_graph(cfg)
    _check_model_on_graph(model, g)
    theta = np.asarray(theta, dtype=float)
    if theta.size != model.d:
        raise ConfigError(f"theta needs {model.d} components, got {theta.size}")
    sampler_cfg = cfg.build_sampler()
    n_iters = int(iters if iters is not None else sampler_cfg.aux_iters)
    out = Path(out_dir or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(sampler_cfg.seed)
    names = model.names
    with (out / "sim_stats.csv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("draw," + ",".join(names) + "\n")
        for k in range(draws):
            sample = simulate_auxiliary(model, theta, g, n_iters, rng)
            stats = model.stat_vector(sample)
            fh.write(f"{k}," + ",".join(repr(float(v)) for v in stats) + "\n")
            with (out / f"draw_{k:04d}.tsv").open("w", encoding="utf-8", newline="\n") as ef:
                labels = sample.labels or [str(v) for v in range(sample.n)]
                seen = False
                for a, b in sample.edges():
                    ef.write(f"{labels[a]}\t{labels[b]}\n")
                    seen = True
                if not seen:  # keep the roster readable for empty draws
                    for label in labels:
                        ef.write(f"{label}\n")
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergmcmc",
        description="Bayesian ERGM sampling via exchange-algorithm MCMC")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="run one sampler and write reports")
    p_fit.add_argument("--config", required=True, help="config file or preset name")
    p_fit.add_argument("--seed", type=int, default=None)
    p_fit.add_argument("--out", default=None)

    p_cmp = sub.add_parser("compare", help="replicate ESS/performance comparison")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--replicates", type=int, default=None)
    p_cmp.add_argument("--jobs", type=int, default=1)
    p_cmp.add_argument("--out", default=None)

    p_sim = sub.add_parser("simulate", help="draw networks from the likelihood")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--theta", required=True,
                       help="comma-separated parameter vector; use --theta=-3.5,0.7 "
                            "for leading negatives")
    p_sim.add_argument("--draws", type=int, default=10)
    p_sim.add_argument("--iters", type=int, default=None)
    p_sim.add_argument("--out", default=None)

    p_ls = sub.add_parser("presets", help="list bundled preset names")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; keep 2 reserved for data errors
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        if args.command == "presets":
            for name in available_presets():
                print(name)
            return EXIT_OK
        cfg = load_config(args.config)
        if args.command == "fit":
            out = cmd_fit(cfg, seed=args.seed, out_dir=args.out)
            print(f"report written to {out}")
        elif args.command == "compare":
            rows = cmd_compare(cfg, replicates=args.replicates,
                               out_dir=args.out, jobs=args.jobs)
            for row in rows:
                print(f"{row['variant']}: ESS {row['mean_ess']:.1f} "
                      f"perf {row['mean_performance']:.2f}")
        elif args.command == "simulate":
            try:
                theta = [float(v) for v in args.theta.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"cannot parse --theta: {exc}") from exc
            out = cmd_simulate(cfg, theta, args.draws, iters=args.iters,
                               out_dir=args.out)
            print(f"draws written to {out}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
