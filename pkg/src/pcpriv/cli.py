"""Command-line entry points; thin wrappers over the harness and service."""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .config import ExperimentConfig
from .corpus import generate_synthetic_corpus, ingest_directory, write_corpus
from .errors import WorkbenchError
from .geometry import load_cloud, save_xyz
from .harness import evaluate_one, load_run_state, run_experiment
from .regen import RegenSpec, surrogate_regenerate

CONFIG_ENV_VAR = "PCPRIV_CONFIG"


def _load_config(config_path: str | None) -> ExperimentConfig:
    path = config_path or os.environ.get(CONFIG_ENV_VAR)
    if path:
        return ExperimentConfig.from_json(path)
    return ExperimentConfig()


def _fail(e: Exception) -> None:
    click.echo(f"error: {e}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Privilege-controlled point-cloud release workbench."""


@main.command("gen-corpus")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def gen_corpus(config_path, out_dir):
    """Generate the synthetic corpus and write clouds plus a manifest."""
    try:
        cfg = _load_config(config_path)
        corpus = generate_synthetic_corpus(
            num_classes=cfg.corpus.num_classes,
            objects_per_class=cfg.corpus.objects_per_class,
            points_per_cloud=cfg.corpus.points_per_cloud,
            seed=cfg.seed,
            families=cfg.corpus.families,
        )
        manifest = write_corpus(corpus, out_dir)
        click.echo(f"wrote {len(corpus)} clouds, manifest at {manifest}")
    except WorkbenchError as e:
        _fail(e)


@main.command()
@click.option("--dir", "root", type=click.Path(exists=True), required=True,
              help="directory tree <super_class>/<object>.xyz|.bin")
@click.option("--out", "out_dir", type=click.Path(), required=True)
def ingest(root, out_dir):
    """Ingest an on-disk corpus tree, normalize it, and write a manifest."""
    try:
        corpus = ingest_directory(root)
        manifest = write_corpus(corpus, out_dir)
        click.echo(f"ingested {len(corpus)} clouds, manifest at {manifest}")
    except (WorkbenchError, ValueError) as e:
        _fail(e)


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--l", "level", type=float, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--e-max", type=int, default=300, show_default=True)
@click.option("--count", type=int, default=2048, show_default=True)
def regen(in_path, level, seed, out_path, e_max, count):
    """Regenerate one cloud at a privilege level; writes xyz plus a JSON sidecar."""
    try:
        cloud = load_cloud(in_path)
        spec = RegenSpec.for_level(level, seed=seed, e_max=e_max)
        out = surrogate_regenerate(cloud, spec, e_max=e_max, count=count)
        save_xyz(out_path, out)
        sidecar = Path(out_path).with_suffix(".json")
        sidecar.write_text(json.dumps(spec.sidecar(Path(in_path).stem), sort_keys=True))
        click.echo(f"epoch {spec.epoch}, wrote {out.count} points to {out_path}")
    except (WorkbenchError, ValueError) as e:
        _fail(e)


@main.command("train-attacker")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def train_attacker(config_path, out_dir):
    """Run the pipeline stages up to attacker training and persist the models.

    Equivalent to a full experiment run; kept separate so a server can be
    pointed at the output directory.
    """
    _run(config_path, out_dir)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="override the config's output_dir")
def experiment(config_path, out_dir):
    """Run the full pipeline and write all artifacts."""
    _run(config_path, out_dir)


def _run(config_path, out_dir):
    try:
        cfg = _load_config(config_path)
        if out_dir:
            cfg = cfg.with_output_dir(out_dir)
        result = run_experiment(cfg)
        click.echo(f"run complete in {result.elapsed:.1f}s: {result.output_dir}")
    except WorkbenchError as e:
        _fail(e)


@main.command()
@click.option("--results", "results_dir", type=click.Path(exists=True), required=True)
@click.option("--object", "object_id", required=True)
@click.option("--l", "level", type=float, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--attacker", default="J1", show_default=True)
@click.option("--rho1", type=float, default=None, help="default: top-1 basket")
@click.option("--rho2", type=float, default=None, help="default: top-1 basket")
def evaluate(results_dir, object_id, level, seed, attacker, rho1, rho2):
    """Evaluate one query against a finished run; prints the response as JSON."""
    try:
        state = load_run_state(results_dir)
        space = state.corpus.label_space()
        if rho1 is None:
            rho1 = 1.0 / len(space.super_classes)
        if rho2 is None:
            obj = state.corpus.by_id(object_id)
            rho2 = 1.0 / len(space.intra_classes[obj.super_class])
        result = evaluate_one(state, object_id, level, seed, attacker, rho1, rho2)
        result["points"] = result["points"].tolist()
        result["count"] = len(result["points"])
        click.echo(json.dumps(result, sort_keys=True))
    except KeyError as e:
        _fail(WorkbenchError(f"unknown object {e}"))
    except WorkbenchError as e:
        _fail(e)


@main.command()
@click.option("--results", "results_dir", type=click.Path(exists=True), required=True)
def auc(results_dir):
    """Print the privacy-utility AUC table of a finished run."""
    path = Path(results_dir) / "auc.json"
    if not path.exists():
        _fail(WorkbenchError(f"no auc.json in {results_dir}; run `experiment` first"))
    click.echo(path.read_text())


@main.command()
@click.option("--results", "results_dir", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8337, show_default=True)
@click.option("--ui-dir", type=click.Path(), default=None,
              help="static explorer bundle to serve under /ui")
def serve(results_dir, host, port, ui_dir):
    """Serve the HTTP JSON API over a finished run."""
    try:
        import uvicorn

        from .service import create_app

        state = load_run_state(results_dir)
        if ui_dir is None:
            candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
            ui_dir = candidate if candidate.is_dir() else None
        app = create_app(state, ui_dir=ui_dir)
        click.echo(f"serving on http://{host}:{port} (objects: {len(state.corpus)}, "
                   f"attackers: {sorted(state.models)})")
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except WorkbenchError as e:
        _fail(e)


if __name__ == "__main__":
    main()
