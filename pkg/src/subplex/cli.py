"""Command line front end.

`run` does a headless cluster/project/rank pass over one attribution file
and writes the artifacts; the bench commands sweep the noise and projection
experiments into CSV/JSON reports with a rendered figure; `serve` starts
the HTTP session service.

Exit codes: 0 success, 2 usage or input validation, 1 runtime failure.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .bench import run_noise_experiment, run_projection_timing
from .data import IngestConfig, load_attributions
from .errors import ParseError, RangeError, SubplexError, ValidationError
from .pipeline import PipelineConfig, layout_to_json, rankings_to_json, run_pipeline
from .plots import save_layout_figure, save_report_figure

DESK_NOISE_COUNTS = (500, 1000, 2000, 4000)
FULL_NOISE_COUNTS = tuple(range(1000, 10001, 1000))
DESK_PROJECTION_SIZES = (500, 1000, 2000, 5000)
FULL_PROJECTION_SIZES = tuple(range(1000, 10001, 1000))


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    usage = isinstance(exc, (ParseError, ValidationError, RangeError))
    sys.exit(2 if usage else 1)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_report(report, out_dir: str) -> list[str]:
    # one basename per report kind so reruns overwrite in place
    base = os.path.join(out_dir, report.kind)
    report.write_csv(base + ".csv")
    report.write_json(base + ".json")
    save_report_figure(report, base + ".png")
    return [base + ".csv", base + ".json", base + ".png"]


@click.group()
def main():
    """Subpopulation analysis of per-instance attribution matrices."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Attribution CSV/TSV.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False), help="Directory for the artifacts.")
@click.option("--k", default=5, show_default=True, type=int, help="Number of subpopulations.")
@click.option("--pca-components", default=10, show_default=True, type=int, help="Reduced dimensionality before clustering.")
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--bins", default=20, show_default=True, type=int, help="Histogram bins for the rankings.")
@click.option("--id-column", default=None, help="Column holding instance ids.")
@click.option("--label-column", default=None, help="Column holding prior labels.")
def run(input_path, out_dir, k, pca_components, seed, bins, id_column, label_column):
    """Cluster, project, and rank one attribution file."""
    try:
        with open(input_path, "r", encoding="utf-8", newline="") as fh:
            matrix = load_attributions(
                fh, IngestConfig(id_column=id_column, label_column=label_column)
            )
        config = PipelineConfig(k=k, n_components=pca_components, seed=seed, bins=bins)
        result = run_pipeline(matrix, config)
    except SubplexError as exc:
        _fail(exc)
    os.makedirs(out_dir, exist_ok=True)
    _write_json(os.path.join(out_dir, "layout.json"),
                layout_to_json(matrix, result.partition, result.layout))
    _write_json(os.path.join(out_dir, "partition.json"), result.partition.to_json_dict())
    _write_json(os.path.join(out_dir, "ranking.json"),
                rankings_to_json(result.mean_rankings, result.deviation_ranking,
                                 matrix.feature_names, bins))
    save_layout_figure(result.layout, result.partition,
                       os.path.join(out_dir, "layout.png"))
    sizes = ", ".join(str(g.size) for g in result.partition.groups)
    click.echo(f"{matrix.n} instances x {matrix.m} features -> {result.partition.k} groups ({sizes})")
    click.echo(f"artifacts in {out_dir}: layout.json partition.json ranking.json layout.png")


@main.command("bench-noise")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--repeats", default=5, show_default=True, type=int)
@click.option("--full", is_flag=True, help="Paper-scale sweep: n=10000, noise 1000..10000.")
def bench_noise(out_dir, seed, repeats, full):
    """Clustering accuracy and runtime as noise columns pile up."""
    counts = FULL_NOISE_COUNTS if full else DESK_NOISE_COUNTS
    n = 10000 if full else 2000
    try:
        report = run_noise_experiment(counts, n=n, repeats=repeats, seed=seed)
    except SubplexError as exc:
        _fail(exc)
    os.makedirs(out_dir, exist_ok=True)
    written = _write_report(report, out_dir)
    click.echo(report.summary_table())
    click.echo("wrote " + " ".join(written))


@main.command("bench-projection")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--full", is_flag=True, help="Paper-scale sweep: sizes 1000..10000.")
def bench_projection(out_dir, seed, full):
    """Projection runtime and layout quality, local affine vs full MDS."""
    sizes = FULL_PROJECTION_SIZES if full else DESK_PROJECTION_SIZES
    try:
        report = run_projection_timing(sizes, seed=seed)
    except SubplexError as exc:
        _fail(exc)
    os.makedirs(out_dir, exist_ok=True)
    written = _write_report(report, out_dir)
    click.echo(report.summary_table())
    click.echo("wrote " + " ".join(written))


@main.command()
@click.option("--port", default=None, type=int, help="Defaults to $SUBPLEX_PORT, then 8000.")
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, host):
    """Start the HTTP session service."""
    if port is None:
        port = int(os.environ.get("SUBPLEX_PORT", "8000"))
    if not 1 <= port <= 65535:
        click.echo(f"error: port {port} outside [1, 65535]", err=True)
        sys.exit(2)
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
