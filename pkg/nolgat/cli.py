"""
Command-line interface for NOL-GAT.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import click
import numpy as np

from . import get_version, reports
from .app import NolGatApp
from .config import load_config
from .constants import DEFAULT_MAX_ORDER_CAP
from .errors import NolGatError
from .graph.dataset import save_dataset_csv
from .graph.hops import build_hop_index
from .graph.knn import build_knn_graph, export_edge_list
from .logger import write_system_log
from .pipeline.experiment import run_experiment
from .pipeline.featurize import load_dataset, write_text_corpus
from .pipeline.metrics import METRIC_NAMES
from .pipeline.synth import synth_corpus, synth_longrange
from .verification import GRAD_TOLERANCE, export_verification_report, run_gradient_suite


class CommandError(click.ClickException):
    """ClickException that exits with the code of the underlying NolGatError."""

    def __init__(self, message: str, exit_code: int = 1) -> None:
        super().__init__(message)
        self.exit_code = exit_code


@contextmanager
def _surface_errors(command: str) -> Iterator[None]:
    try:
        yield
    except NolGatError as exc:
        write_system_log(f"{command} failed: {exc}", level="ERROR", extra={"exit_code": exc.exit_code})
        raise CommandError(str(exc), exc.exit_code) from exc


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(get_version(), prog_name="NOL-GAT")
@click.pass_context
def cli(ctx: click.Context) -> None:
    """NOL-GAT: GATv2 with learned per-node hop orders."""
    if ctx.obj is None or not isinstance(ctx.obj, NolGatApp):
        ctx.obj = NolGatApp.bootstrap()


@cli.command("build-graph")
@click.option("--dataset", "dataset_path", type=click.Path(path_type=Path), help="Dataset CSV (id,label,f0..).")
@click.option("--config", "config_path", type=click.Path(path_type=Path), help="Experiment config to featurise from.")
@click.option("--k", "knn_k", type=int, default=None, help="Neighbours per node (default: first knn_k of the config).")
@click.option("--max-order-cap", type=int, default=None, help=f"Largest hop order kept (default {DEFAULT_MAX_ORDER_CAP}).")
@click.option("--output", type=click.Path(path_type=Path), default=Path("edges.tsv"), show_default=True)
@click.pass_obj
def build_graph(
    app: NolGatApp,
    dataset_path: Optional[Path],
    config_path: Optional[Path],
    knn_k: Optional[int],
    max_order_cap: Optional[int],
    output: Path,
) -> None:
    """Build the KNN graph and hop index, write the edge list and print statistics."""
    if (dataset_path is None) == (config_path is None):
        raise click.UsageError("Pass exactly one of --dataset or --config")
    with _surface_errors("build-graph"):
        if config_path is not None:
            config = app.load(config_path)
            dataset = load_dataset(
                config.featurizer,
                config.feature_dim,
                dataset_path=config.dataset_path,
                text_path=config.text_path,
                labels_path=config.labels_path,
            )
            knn_k = config.knn_k[0] if knn_k is None else knn_k
            max_order_cap = config.max_order_cap if max_order_cap is None else max_order_cap
        else:
            dataset = load_dataset("precomputed", 0, dataset_path=dataset_path)
        if knn_k is None:
            raise click.UsageError("--k is required with --dataset")
        graph = build_knn_graph(dataset.features, knn_k)
        hop_index = build_hop_index(graph, max_order_cap or DEFAULT_MAX_ORDER_CAP)
        export_edge_list(graph, output)

    write_system_log(f"Graph written to {output}", extra={"nodes": graph.n, "edges": graph.num_edges})
    click.echo(f"Edge list written to {output}")
    click.echo(f"- nodes: {graph.n}")
    click.echo(f"- edges: {graph.num_edges}")
    click.echo(f"- effective diameter: {hop_index.effective_diameter}")
    click.echo(f"- max order: {hop_index.max_order}")
    for order in range(1, hop_index.num_orders):
        counts = hop_index.orders[order].counts()
        click.echo(f"- order {order}: mean {counts.mean():.2f} neighbours, {int((counts > 0).sum())} nodes reach it")


@cli.command()
@click.argument("config_path", type=click.Path(path_type=Path))
@click.option("--output-dir", type=click.Path(path_type=Path), default=None, help="Override the config's output_dir.")
@click.pass_obj
def train(app: NolGatApp, config_path: Path, output_dir: Optional[Path]) -> None:
    """Run the experiment described by CONFIG_PATH and write results."""
    with _surface_errors("train"):
        config = app.load(config_path)
        result = run_experiment(config, output_dir)

    click.echo(f"Results written to {result.paths['results']}")
    for model, metrics in sorted(result.payload["aggregate"].items()):
        summary = ", ".join(
            f"{metric} {metrics[metric]['mean']:.4f}±{metrics[metric]['std']:.4f}" for metric in METRIC_NAMES
        )
        click.echo(f"- {model}: {summary}")


@cli.group()
def synth() -> None:
    """Generate synthetic benchmark files."""


@synth.command("longrange")
@click.option("--nodes", type=int, default=2000, show_default=True)
@click.option("--distance", type=int, default=3, show_default=True, help="Hops between a path head and its tail.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--feature-dim", type=int, default=8, show_default=True)
@click.option("--output-dir", type=click.Path(path_type=Path), default=Path("synth"), show_default=True)
def synth_longrange_command(nodes: int, distance: int, seed: int, feature_dim: int, output_dir: Path) -> None:
    """Write path-graph benchmark files: dataset CSV, edge list and target node ids."""
    with _surface_errors("synth longrange"):
        dataset, graph = synth_longrange(nodes, distance, seed, feature_dim)
        dataset_path = save_dataset_csv(dataset, output_dir / "longrange.csv")
        edges_path = export_edge_list(graph, output_dir / "longrange_edges.tsv")
        targets_path = output_dir / "longrange_targets.txt"
        targets_path.write_text(
            "".join(f"{node_id}\n" for node_id in dataset.ids[dataset.target_mask]), encoding="utf-8"
        )
    click.echo(f"Dataset: {dataset_path}")
    click.echo(f"Edges: {edges_path}")
    click.echo(f"Targets: {targets_path} ({int(dataset.target_mask.sum())} heads)")


@synth.command("corpus")
@click.option("--docs", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output-dir", type=click.Path(path_type=Path), default=Path("synth"), show_default=True)
def synth_corpus_command(docs: int, seed: int, output_dir: Path) -> None:
    """Write a two-class document corpus, its labels and a ready-to-train config."""
    with _surface_errors("synth corpus"):
        documents, labels = synth_corpus(docs, seed)
        text_path = output_dir / "corpus.txt"
        labels_path = output_dir / "labels.txt"
        write_text_corpus(documents, labels, text_path, labels_path)
        config_path = output_dir / "corpus.cfg"
        config_path.write_text(
            "\n".join(
                [
                    "# generated by `nolgat synth corpus`",
                    f"text_path = {text_path.name}",
                    f"labels_path = {labels_path.name}",
                    "featurizer = hashed-tf",
                    "knn_k = [6]",
                    "label_fraction = [0.1, 0.2, 0.3]",
                    f"seed = {seed}",
                    "output_dir = results",
                    "",
                ]
            ),
            encoding="utf-8",
        )
        load_config(config_path)
    click.echo(f"Corpus: {text_path} ({docs} documents, {int(np.sum(labels))} in class 1)")
    click.echo(f"Labels: {labels_path}")
    click.echo(f"Config: {config_path}")


@cli.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--eps", type=float, default=1e-6, show_default=True)
@click.option("--ops-only", is_flag=True, help="Skip the full-model checks.")
@click.option("--export", "export_path", type=click.Path(path_type=Path), default=None, help="Also export the verification log as JSON.")
@click.pass_obj
def gradcheck(app: NolGatApp, seed: int, eps: float, ops_only: bool, export_path: Optional[Path]) -> None:
    """Compare analytic and finite-difference gradients for every op kind and the full model."""
    with _surface_errors("gradcheck"):
        results = run_gradient_suite(seed=seed, eps=eps, include_model=not ops_only)
        if export_path is not None:
            export_verification_report(export_path)
    for result in results:
        mark = "ok" if result.passed else "FAIL"
        click.echo(f"[{mark}] {result.name}: {result.details}")
    failed = [result.name for result in results if not result.passed]
    if failed:
        raise CommandError(
            f"{len(failed)} gradient check(s) above tolerance {GRAD_TOLERANCE:g}: {', '.join(failed)}",
            exit_code=4,
        )
    click.echo(f"All {len(results)} gradient checks passed.")


@cli.command()
@click.argument("predictions", type=click.Path(path_type=Path))
@click.argument("truth", type=click.Path(path_type=Path))
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
def metrics(predictions: Path, truth: Path, as_json: bool) -> None:
    """Score a prediction file against a truth file."""
    with _surface_errors("metrics"):
        report = reports.evaluate_label_files(predictions, truth)
    payload = reports.report_payload(report)
    if as_json:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
        return
    click.echo(f"Evaluated {report.support} nodes")
    for key in ("accuracy", "macro_f1", "interest_f1", "macro_precision", "macro_recall"):
        click.echo(f"- {key}: {payload[key]:.4f}")
    confusion = payload["confusion"]
    click.echo(f"- confusion: tp={confusion['tp']} tn={confusion['tn']} fp={confusion['fp']} fn={confusion['fn']}")


if __name__ == "__main__":
    cli()
