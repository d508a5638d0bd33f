"""Config-driven command line front end.

Commands
--------
generate   write a synthetic benchmark dataset as CSV
extract    run one extraction method, write theory.txt / theory.json / report.json
compare    run every method on the same data, write a combined report CSV
plotgrid   write a g x g evaluation lattice (x1, x2, prediction, rule_index)

Configuration is a flat ``key = value`` file with dotted section prefixes
(iter., grid., cluster., oracle.); unknown keys are rejected.  Command
line flags override file values.  Exit status: 0 success, 1 configuration
error, 2 data error.  Outputs are written to a temporary file and renamed
into place, so failures never leave partial artifacts.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click
import numpy as np

from .datasets import BENCHMARKS, DataError, Dataset, dataset_to_csv, generate as generate_data, load_csv
from .metrics import METHOD_ORDER, build_extractor, compare_methods, evaluate, reports_to_csv, reports_to_json
from .oracles import KNNOracle


class ConfigError(ValueError):
    """Invalid configuration file, key, value, or flag combination."""


KNOWN_KEYS = {
    "seed": "global random seed (int)",
    "oracle.kind": "black box to query: knn, tri-linear, tri-constant, single-plane",
    "oracle.k": "neighbour count for the knn oracle (int)",
    "iter.n_initial": "seed cube count (int)",
    "iter.update": "expansion slab width, feature units (float)",
    "iter.threshold": "admissible mean drift per expansion, output units (float)",
    "iter.max_iterations": "expansion budget (int)",
    "iter.m": "black-box queries per candidate slab (int)",
    "grid.depth": "split levels (int)",
    "grid.slices": "per-level, per-dimension slice counts, e.g. 2,2;3,3",
    "grid.threshold": "deviation below which a cell becomes a rule (float)",
    "grid.min_samples": "cells with fewer samples are not split (int)",
    "grid.output": "rule output family: constant or linear",
    "cluster.k": "cluster count (int) or auto",
    "cluster.k_max": "auto-mode search bound (int)",
    "cluster.algorithm": "kmeans or agglomerative-ward",
    "cluster.weight": "weight of the normalized output in clustering (float)",
    "cluster.trim": "per-dimension quantile trim fraction (float)",
    "cluster.output": "rule output family: constant or linear",
}


def load_config(path: Path | None) -> dict[str, str]:
    if path is None:
        return {}
    if not path.exists():
        raise ConfigError(f"no such config file: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate config key {key!r}")
        values[key] = value
    return values


def _cfg_int(cfg: dict, key: str, default: int) -> int:
    try:
        return int(cfg.get(key, default))
    except ValueError:
        raise ConfigError(f"config key {key} must be an integer, got {cfg[key]!r}") from None


def _cfg_float(cfg: dict, key: str, default: float) -> float:
    try:
        return float(cfg.get(key, default))
    except ValueError:
        raise ConfigError(f"config key {key} must be a number, got {cfg[key]!r}") from None


def _parse_slices(text: str) -> list[tuple[int, ...]]:
    try:
        levels = []
        for level in text.split(";"):
            levels.append(tuple(int(s) for s in level.split(",")))
        return levels
    except ValueError:
        raise ConfigError(f"grid.slices must look like '2,2;3,3', got {text!r}") from None


def _grid_params(cfg: dict, honor_output: bool) -> dict:
    params: dict = {
        "threshold": _cfg_float(cfg, "grid.threshold", 0.1),
        "min_samples": _cfg_int(cfg, "grid.min_samples", 1),
    }
    slices = cfg.get("grid.slices")
    if slices is not None:
        params["slices"] = _parse_slices(slices)
    depth = cfg.get("grid.depth")
    if depth is not None:
        params["max_depth"] = _cfg_int(cfg, "grid.depth", 0)
    elif slices is not None:
        params["max_depth"] = len(params["slices"])
    if slices is not None and params["max_depth"] != len(params["slices"]):
        raise ConfigError("grid.depth disagrees with the number of levels in grid.slices")
    if honor_output and "grid.output" in cfg:
        kind = cfg["grid.output"]
        if kind not in ("constant", "linear"):
            raise ConfigError(f"grid.output must be constant or linear, got {kind!r}")
        params["output"] = kind
    return params


def _cluster_params(cfg: dict) -> dict:
    k_raw = cfg.get("cluster.k", "auto")
    if k_raw == "auto":
        k: int | str = "auto"
    else:
        try:
            k = int(k_raw)
        except ValueError:
            raise ConfigError(f"cluster.k must be an integer or 'auto', got {k_raw!r}") from None
    algorithm = cfg.get("cluster.algorithm", "kmeans")
    output = cfg.get("cluster.output", "linear")
    if output not in ("constant", "linear"):
        raise ConfigError(f"cluster.output must be constant or linear, got {output!r}")
    return {
        "k": k,
        "k_max": _cfg_int(cfg, "cluster.k_max", 6),
        "algorithm": algorithm,
        "output_weight": _cfg_float(cfg, "cluster.weight", 1.0),
        "trim_fraction": _cfg_float(cfg, "cluster.trim", 0.05),
        "output": output,
    }


def _iter_params(cfg: dict) -> dict:
    return {
        "n_initial": _cfg_int(cfg, "iter.n_initial", 3),
        "update_width": _cfg_float(cfg, "iter.update", 0.1),
        "threshold": _cfg_float(cfg, "iter.threshold", 0.1),
        "max_iterations": _cfg_int(cfg, "iter.max_iterations", 600),
        "points_per_cube": _cfg_int(cfg, "iter.m", 20),
    }


def method_params(cfg: dict, method: str, honor_grid_output: bool = True) -> dict:
    if method == "iter":
        return _iter_params(cfg)
    if method in ("gridex", "gridrex"):
        return _grid_params(cfg, honor_grid_output)
    if method == "cluster":
        return _cluster_params(cfg)
    raise ConfigError(f"unknown method {method!r}; expected one of {METHOD_ORDER}")


def _load_dataset(data: Path | None, spec_name: str | None, n: int, noise_sd: float, seed: int) -> Dataset:
    if (data is None) == (spec_name is None):
        raise ConfigError("provide exactly one of --data or --spec")
    if data is not None:
        return load_csv(data)
    return generate_data(BENCHMARKS[spec_name](), n, noise_sd=noise_sd, seed=seed)


def _build_oracle(cfg: dict, dataset: Dataset, spec_name: str | None):
    kind = cfg.get("oracle.kind", spec_name or "knn")
    if kind == "knn":
        k = _cfg_int(cfg, "oracle.k", 3)
        try:
            return KNNOracle(k=k).fit(dataset.X, dataset.y)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if kind in BENCHMARKS:
        spec = BENCHMARKS[kind]()
        if dataset.dim != spec.cubes[0].dim:
            raise DataError(
                f"oracle {kind!r} expects {spec.cubes[0].dim}-d inputs, data has {dataset.dim}"
            )
        return spec.oracle()
    raise ConfigError(f"unknown oracle.kind {kind!r}")


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _run(body):
    try:
        body()
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    except ValueError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)


@click.group()
def main():
    """Extract readable if-then rule theories from black-box regressors."""


@main.command()
@click.option("--spec", "spec_name", type=click.Choice(sorted(BENCHMARKS)), required=True)
@click.option("--n", "n_per_region", type=int, required=True, help="Samples per region.")
@click.option("--noise-sd", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def generate(spec_name, n_per_region, noise_sd, seed, out_path):
    """Write a synthetic benchmark dataset as CSV."""

    def body():
        dataset = generate_data(BENCHMARKS[spec_name](), n_per_region, noise_sd=noise_sd, seed=seed)
        write_atomic(out_path, dataset_to_csv(dataset))
        click.echo(f"wrote {dataset.n_samples} samples to {out_path}")

    _run(body)


_common = [
    click.option("--data", type=click.Path(path_type=Path), default=None, help="Input CSV."),
    click.option("--spec", "spec_name", type=click.Choice(sorted(BENCHMARKS)), default=None,
                 help="Generate this benchmark instead of reading --data."),
    click.option("--n", "n_per_region", type=int, default=100, show_default=True),
    click.option("--noise-sd", type=float, default=0.0, show_default=True),
    click.option("--config", "config_path", type=click.Path(path_type=Path), default=None),
    click.option("--seed", type=int, default=None, help="Overrides the config file seed."),
]


def _with_common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


def _resolve_seed(cfg: dict, seed_flag: int | None) -> int:
    if seed_flag is not None:
        return seed_flag
    return _cfg_int(cfg, "seed", 0)


@main.command()
@_with_common
@click.option("--method", type=click.Choice(METHOD_ORDER), required=True)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
@click.option("--precision", type=int, default=3, show_default=True,
              help="Decimal places in theory.txt.")
def extract(data, spec_name, n_per_region, noise_sd, config_path, seed, method, out_dir, precision):
    """Run one extraction method; write theory.txt, theory.json, report.json."""

    def body():
        cfg = load_config(config_path)
        run_seed = _resolve_seed(cfg, seed)
        dataset = _load_dataset(data, spec_name, n_per_region, noise_sd, run_seed)
        oracle = _build_oracle(cfg, dataset, spec_name)
        extractor = build_extractor(
            method, oracle, seed=run_seed, params=method_params(cfg, method)
        )
        extractor.feature_names = dataset.feature_names
        extractor.domain = dataset.domain
        extractor.fit(dataset.X, dataset.y)
        report = evaluate(extractor.theory_, dataset.X, dataset.y, oracle, method=method)
        write_atomic(out_dir / "theory.txt", extractor.theory_.render(precision))
        write_atomic(out_dir / "theory.json", extractor.theory_.to_json())
        write_atomic(out_dir / "report.json", reports_to_json([report]))
        click.echo(f"{method}: {report.rule_count} rules, fidelity MAE {report.fidelity_mae:.3g}")

    _run(body)


@main.command()
@_with_common
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def compare(data, spec_name, n_per_region, noise_sd, config_path, seed, out_path):
    """Run every method on the same data; write a combined report CSV."""

    def body():
        cfg = load_config(config_path)
        run_seed = _resolve_seed(cfg, seed)
        dataset = _load_dataset(data, spec_name, n_per_region, noise_sd, run_seed)
        oracle = _build_oracle(cfg, dataset, spec_name)
        reports = compare_methods(
            dataset.X,
            dataset.y,
            oracle,
            iter_params=method_params(cfg, "iter"),
            grid_params=method_params(cfg, "gridex", honor_grid_output=False),
            cluster_params=method_params(cfg, "cluster"),
            seed=run_seed,
        )
        write_atomic(out_path, reports_to_csv(reports))
        click.echo(f"wrote {len(reports)} method reports to {out_path}")

    _run(body)


@main.command()
@_with_common
@click.option("--method", type=click.Choice(METHOD_ORDER), required=True)
@click.option("--grid", "grid_size", type=int, default=50, show_default=True,
              help="Lattice resolution per axis.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def plotgrid(data, spec_name, n_per_region, noise_sd, config_path, seed, method, grid_size, out_path):
    """Evaluate one method on a g x g lattice; write the raw plot data."""

    def body():
        cfg = load_config(config_path)
        run_seed = _resolve_seed(cfg, seed)
        dataset = _load_dataset(data, spec_name, n_per_region, noise_sd, run_seed)
        if dataset.dim != 2:
            raise DataError(f"plotgrid needs 2-d data, got {dataset.dim} features")
        if grid_size < 2:
            raise ConfigError("--grid must be at least 2")
        oracle = _build_oracle(cfg, dataset, spec_name)
        extractor = build_extractor(
            method, oracle, seed=run_seed, params=method_params(cfg, method)
        )
        extractor.feature_names = dataset.feature_names
        extractor.domain = dataset.domain
        extractor.fit(dataset.X, dataset.y)
        axes = [
            np.linspace(iv.lo, iv.hi, grid_size) for iv in dataset.domain.intervals
        ]
        xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
        lattice = np.column_stack([xx.ravel(), yy.ravel()])
        values = extractor.predict(lattice)
        matched = extractor.match_indices(lattice)
        lines = [",".join(dataset.feature_names + ("prediction", "rule_index"))]
        for (x1, x2), v, m in zip(lattice, values, matched):
            lines.append(f"{x1:.17g},{x2:.17g},{v:.17g},{m}")
        write_atomic(out_path, "\n".join(lines) + "\n")
        click.echo(f"wrote {lattice.shape[0]} lattice rows to {out_path}")

    _run(body)


if __name__ == "__main__":
    main()
