"""Command-line front door.

Verbs: ``demo-data`` writes the bundled synthetic preset CSVs, ``inspect``
prints dataset shape and metric values, ``explain`` prints metric
explanations, ``mitigate`` runs one algorithm and writes its artifact,
``bench`` runs a benchmark config and writes report files plus figures,
``serve`` starts the HTTP service.

Preset data files are looked up under $FAIRLAB_DATA_DIR (default ./data).
Exit codes: 0 on success, 2 on usage errors, 1 on runtime failures.
"""

from __future__ import annotations

import functools
import json
import math
import os
from pathlib import Path

import click

from . import sampledata
from .bench import (
    DEFAULT_METRICS,
    ExperimentConfig,
    load_config_dataset,
    resolve_groups,
    run_experiment,
    run_pipeline,
    write_report_files,
)
from .dataset import StructuredDataset
from .errors import CatalogError, FairlabError, UndefinedMetricError
from .explain import explain_json, explain_text, format_number
from .metrics import MetricContext, evaluate
from .mitigate import ALGORITHMS, get_algorithm

_DATA_DIR_ENV = "FAIRLAB_DATA_DIR"


def _data_dir() -> Path:
    return Path(os.environ.get(_DATA_DIR_ENV, "data"))


def _fail_on_error(fn):
    """Map library errors to exit code 1 with the message on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CatalogError as exc:
            detail = f"; valid: {', '.join(exc.valid)}" if exc.valid else ""
            raise click.ClickException(f"{exc}{detail}") from None
        except FairlabError as exc:
            raise click.ClickException(str(exc)) from None

    return wrapper


def _dataset_options(fn):
    fn = click.option("--dataset", default=None, help="Preset dataset id.")(fn)
    fn = click.option(
        "--data-file", default=None, type=click.Path(), help="Custom CSV path."
    )(fn)
    fn = click.option(
        "--spec", "spec_path", default=None, type=click.Path(),
        help="Dataset spec JSON for --data-file.",
    )(fn)
    fn = click.option("--protected", default=None, help="Protected attribute name.")(fn)
    fn = click.option(
        "--privileged", default=None,
        help="Comma-separated privileged values of the protected attribute.",
    )(fn)
    fn = click.option(
        "--unprivileged", default=None,
        help="Comma-separated unprivileged values of the protected attribute.",
    )(fn)
    return fn


def _parse_values(raw: str | None):
    if raw is None:
        return None
    try:
        return tuple(float(v) for v in raw.split(","))
    except ValueError:
        raise click.UsageError(f"group values must be numbers, got {raw!r}") from None


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise click.UsageError(f"--param expects key=value, got {pair!r}")
        out[key] = _coerce(raw)
    return out


def _coerce(raw: str):
    lowered = raw.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def _base_config(
    dataset, data_file, spec_path, protected, privileged, unprivileged, **extra
) -> ExperimentConfig:
    if (dataset is None) == (data_file is None):
        raise click.UsageError("give exactly one of --dataset or --data-file")
    if data_file is not None and spec_path is None:
        raise click.UsageError("--data-file requires --spec")
    return ExperimentConfig(
        dataset=dataset,
        data_file=data_file,
        spec=spec_path,
        protected=protected,
        privileged=_parse_values(privileged),
        unprivileged=_parse_values(unprivileged),
        **extra,
    )


def _load(cfg: ExperimentConfig):
    ds = load_config_dataset(cfg, data_dir=_data_dir())
    priv, unpriv = resolve_groups(ds, cfg)
    return ds, priv, unpriv


def _metric_line(ds: StructuredDataset, mid, priv, unpriv) -> tuple:
    """(value, flag) with None standing in for unusable numbers."""
    try:
        value = evaluate(mid, ds, privileged=priv, unprivileged=unpriv)
    except UndefinedMetricError as exc:
        return None, f"undefined: {exc}"
    if math.isinf(value):
        return None, "infinite"
    return value, None


@click.group()
@click.version_option(package_name="fairlab")
def cli():
    """Fairness metrics, bias mitigation, and benchmarking for tabular data."""


@cli.command("demo-data")
@click.option("--out", default=None, type=click.Path(), help="Target directory.")
@click.option("--seed", default=None, type=int, help="Base seed for all three files.")
@_fail_on_error
def demo_data(out, seed):
    """Write the three synthetic preset CSVs (adult, german, compas)."""
    directory = Path(out) if out else _data_dir()
    seeds = None
    if seed is not None:
        seeds = {name: seed + i for i, name in enumerate(sorted(sampledata.DEMO_SEEDS))}
    for name, path in sampledata.write_demo_files(directory, seeds=seeds).items():
        click.echo(f"wrote {name}: {path}")


@cli.command()
@_dataset_options
@click.option(
    "--metric", "metric_list", multiple=True,
    help="Metric id (repeatable); defaults to the standard report set.",
)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option(
    "--format", "fmt", default="human", type=click.Choice(["human", "json"]),
    show_default=True,
)
@_fail_on_error
def inspect(dataset, data_file, spec_path, protected, privileged, unprivileged,
            metric_list, seed, fmt):
    """Print dataset shape and metric values on the raw labels."""
    cfg = _base_config(
        dataset, data_file, spec_path, protected, privileged, unprivileged, seed=seed,
        metrics=tuple(metric_list) or ("base_rate", "statistical_parity_difference",
                                       "disparate_impact"),
    )
    ds, priv, unpriv = _load(cfg)
    name = cfg.dataset or Path(cfg.data_file).stem
    if fmt == "json":
        entries = []
        for mid in cfg.metrics:
            value, flag = _metric_line(ds, mid, priv, unpriv)
            entries.append({"metric_id": mid, "value": value, "flag": flag})
        click.echo(json.dumps({
            "dataset": name,
            "instances": ds.n_instances,
            "features": ds.n_features,
            "protected_attributes": list(ds.protected_attribute_names),
            "privileged": priv.describe(),
            "unprivileged": unpriv.describe(),
            "metrics": entries,
        }, indent=2))
        return
    click.echo(
        f"{name}: {ds.n_instances} instances, {ds.n_features} features, "
        f"protected: {', '.join(ds.protected_attribute_names)}"
    )
    click.echo(f"groups: privileged {priv.describe()} vs unprivileged {unpriv.describe()}")
    for mid in cfg.metrics:
        value, flag = _metric_line(ds, mid, priv, unpriv)
        click.echo(f"{mid}: {flag if value is None else format_number(value)}")


@cli.command()
@_dataset_options
@click.option("--metric", "metric_list", multiple=True, help="Metric id (repeatable).")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option(
    "--format", "fmt", default="human", type=click.Choice(["human", "json"]),
    show_default=True,
)
@_fail_on_error
def explain(dataset, data_file, spec_path, protected, privileged, unprivileged,
            metric_list, seed, fmt):
    """Print one explanation per metric for the dataset's raw labels."""
    cfg = _base_config(
        dataset, data_file, spec_path, protected, privileged, unprivileged, seed=seed,
        metrics=tuple(metric_list) or ("statistical_parity_difference",
                                       "disparate_impact"),
    )
    ds, priv, unpriv = _load(cfg)
    ctx = MetricContext(ds, priv, unpriv)
    if fmt == "json":
        records = [explain_json(mid, ctx).to_dict() for mid in cfg.metrics]
        click.echo(json.dumps(records, indent=2))
        return
    for mid in cfg.metrics:
        click.echo(explain_text(mid, ctx))


@cli.command()
@_dataset_options
@click.option("--algorithm", required=True, help="Mitigation algorithm id.")
@click.option("--param", "params", multiple=True, help="Algorithm parameter key=value.")
@click.option("--metric", "metric_list", multiple=True, help="Metric id (repeatable).")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option(
    "--out", default=None, type=click.Path(),
    help="Output CSV: transformed dataset (pre) or test predictions (in/post).",
)
@click.option(
    "--format", "fmt", default="human", type=click.Choice(["human", "json"]),
    show_default=True,
)
@_fail_on_error
def mitigate(dataset, data_file, spec_path, protected, privileged, unprivileged,
             algorithm, params, metric_list, seed, out, fmt):
    """Run one mitigation algorithm and report before/after metrics."""
    cfg = _base_config(
        dataset, data_file, spec_path, protected, privileged, unprivileged,
        seed=seed, algorithm=algorithm, params=_parse_params(params),
        metrics=tuple(metric_list) or DEFAULT_METRICS,
    )
    ds, priv, unpriv = _load(cfg)
    result = run_pipeline(
        ds, priv, unpriv, metrics=cfg.metrics, algorithm=cfg.algorithm,
        params=dict(cfg.params), seed=cfg.seed,
    )
    written = None
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        if ALGORITHMS[algorithm].category == "pre":
            algo = get_algorithm(algorithm, priv, unpriv, **dict(cfg.params))
            frame = algo.fit_transform(ds).to_frame()
        else:
            frame = result.pred_after.to_frame()
        frame.to_csv(out, index=False, lineterminator="\n")
        written = str(out)
    if fmt == "json":
        click.echo(json.dumps({
            "algorithm": algorithm,
            "seed": cfg.seed,
            "metrics": {
                mid: {"before": result.metrics_before[mid],
                      "after": result.metrics_after[mid]}
                for mid in cfg.metrics
            },
            "balanced_accuracy": {
                "before": result.balanced_accuracy_before,
                "after": result.balanced_accuracy_after,
            },
            "output": written,
        }, indent=2, default=_json_safe))
        return
    click.echo(f"{algorithm} on {cfg.dataset or cfg.data_file} (seed {cfg.seed})")
    for mid in cfg.metrics:
        before = format_number(result.metrics_before[mid])
        after = format_number(result.metrics_after[mid])
        click.echo(f"{mid}: {before} -> {after}")
    click.echo(
        "balanced_accuracy: "
        f"{format_number(result.balanced_accuracy_before)} -> "
        f"{format_number(result.balanced_accuracy_after)}"
    )
    if written:
        click.echo(f"wrote {written}")


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    raise TypeError(f"not JSON serializable: {value!r}")


@cli.command()
@_dataset_options
@click.option("--config", "config_path", default=None, type=click.Path(),
              help="ExperimentConfig JSON file; overrides the dataset flags.")
@click.option("--algorithm", default=None, help="Mitigation algorithm id.")
@click.option("--param", "params", multiple=True, help="Algorithm parameter key=value.")
@click.option("--metric", "metric_list", multiple=True, help="Metric id (repeatable).")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out", default=".", type=click.Path(), show_default=True,
              help="Directory for report files and figures.")
@click.option(
    "--format", "fmt", default="human", type=click.Choice(["human", "json"]),
    show_default=True,
)
@_fail_on_error
def bench(dataset, data_file, spec_path, protected, privileged, unprivileged,
          config_path, algorithm, params, metric_list, seed, out, fmt):
    """Run a multi-split benchmark and write csv/json/plotdata plus figures."""
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                cfg = ExperimentConfig.from_dict(json.load(fh))
        except FileNotFoundError:
            raise click.ClickException(f"config file not found: {config_path}") from None
        except json.JSONDecodeError as exc:
            raise click.ClickException(f"bad config JSON {config_path}: {exc}") from None
    else:
        cfg = _base_config(
            dataset, data_file, spec_path, protected, privileged, unprivileged,
            seed=seed, algorithm=algorithm, params=_parse_params(params),
            metrics=tuple(metric_list) or DEFAULT_METRICS,
        )
    summary = run_experiment(cfg, data_dir=_data_dir())
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = write_report_files(summary, out)
    from .plots import render_benchmark_figures  # matplotlib stays off other verbs

    paths += render_benchmark_figures(summary, out)
    if fmt == "json":
        click.echo(json.dumps({
            "digest": cfg.digest(),
            "splits": len(summary.runs),
            "failures": summary.failures,
            "aggregate": summary.aggregate(),
            "files": [str(p) for p in paths],
        }, indent=2, default=_json_safe))
        return
    click.echo(
        f"bench {cfg.digest()}: {len(summary.runs)} splits ok, "
        f"{len(summary.failures)} failed"
    )
    for name, entry in summary.aggregate().items():
        before = entry["before"]
        line = f"{name}: {format_number(before['mean'])} ±{format_number(before['std'])}"
        if entry["after"] is not None:
            after = entry["after"]
            line += f" -> {format_number(after['mean'])} ±{format_number(after['std'])}"
        click.echo(line)
    for p in paths:
        click.echo(f"wrote {p}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True,
              help="Default seed for reports that omit one.")
@_fail_on_error
def serve(host, port, seed):
    """Start the bias-report HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=_data_dir(), default_seed=seed)
    click.echo(f"serving on http://{host}:{port} (data dir: {_data_dir()})")
    uvicorn.run(app, host=host, port=port, log_level="info")


def main():
    cli(prog_name="fairlab")


if __name__ == "__main__":
    main()
