"""Command-line interface.

Subcommands map onto the library: ``gen`` (random graph datasets),
``count`` (exact counts), ``estimate`` (sampling estimators), ``train`` /
``eval`` / ``compare`` (experiment harness), and ``flops`` (model cost
report). Logs go to standard error; data goes to files or standard output.

Exit codes: 0 success, 1 usage error, 2 data error (bad inputs, refusing to
overwrite without ``--force``), 3 runtime error.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import __version__
from .datasets import FORMAT_VERSION as DATASET_FORMAT_VERSION
from .datasets import GraphDataset, Sample, load_dataset, save_dataset
from .exact import count_all, count_exact, four_pattern_counts, open_triangle_count_fast, triangle_count_fast
from .exceptions import RUNTIME_ERRORS, GraphletKitError
from .graphs import ErConfig, RggConfig, gen_er, gen_rgg
from .harness import ExperimentConfig, compare as run_compare, evaluate, run_experiment
from .nn import FLOPS_CONVENTION, build_model, flops, load_model
from .nn.model import MODEL_FORMAT_VERSION
from .patterns import PATTERNS_BY_K, pattern_by_name
from .sampling import OpCounter, estimate_edge_sampling, estimate_mcmc_count

log = logging.getLogger("graphletkit")

VERSION_LINE = (
    f"graphletkit {__version__} "
    f"(model-format {MODEL_FORMAT_VERSION}, dataset-format {DATASET_FORMAT_VERSION}, "
    f"{FLOPS_CONVENTION})"
)


class OutputExistsError(GraphletKitError):
    """Refusing to overwrite an existing output without --force."""


def _check_out(path: Path, force: bool) -> Path:
    if path.exists() and not force:
        raise OutputExistsError(f"{path} exists; pass --force to overwrite")
    return path


def _print_version(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    click.echo(VERSION_LINE)
    ctx.exit()


@click.group()
@click.option(
    "--version", is_flag=True, callback=_print_version, expose_value=False,
    is_eager=True, help="Print version and format/convention tags.",
)
@click.option("--verbose", is_flag=True, help="Log progress at INFO level to stderr.")
def cli(verbose: bool):
    """Graphlet counting: exact, sampled, and learned."""
    if verbose:
        logging.getLogger("graphletkit").setLevel(logging.INFO)


@cli.command()
@click.option("--model", "kind", type=click.Choice(["er", "rgg"]), required=True)
@click.option("--n", type=int, required=True, help="Nodes per graph.")
@click.option("--p", type=float, default=None, help="Edge probability (er).")
@click.option("--r", type=float, default=None, help="Connection radius (rgg).")
@click.option("--dim", type=click.Choice(["2", "3"]), default="3", help="Embedding dimension (rgg).")
@click.option("--count", "num", type=int, default=1, help="Number of graphs.")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--force", is_flag=True, help="Overwrite an existing output file.")
def gen(kind, n, p, r, dim, num, seed, out, force):
    """Generate random graphs into a JSONL dataset (unlabeled)."""
    if kind == "er" and p is None:
        raise click.UsageError("--p is required with --model er")
    if kind == "rgg" and r is None:
        raise click.UsageError("--r is required with --model rgg")
    _check_out(out, force)
    samples = []
    for i in range(num):
        if kind == "er":
            g = gen_er(ErConfig(n, p, seed=seed + i))
        else:
            g = gen_rgg(RggConfig(n, r, int(dim), seed=seed + i))
        samples.append(Sample(f"{kind}-{i:05d}", g, 0.0, "train"))
    save_dataset(GraphDataset(samples, pattern=None, pad_dim=n), out)
    log.info("wrote %d graphs to %s", num, out)


def _fast_count_vector(graph, k: int) -> dict[str, int]:
    if k == 3:
        return {
            "triangle": triangle_count_fast(graph),
            "open_triangle": open_triangle_count_fast(graph),
        }
    if k == 4:
        return {p.name: c for p, c in four_pattern_counts(graph).items()}
    return {p.name: c for p, c in count_all(graph, 5).counts.items()}


@cli.command()
@click.option("--in", "in_path", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--k", type=click.Choice(["3", "4", "5"]), required=True)
@click.option("--pattern", default=None, help="Count only this pattern.")
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--jobs", type=int, default=1, help="Parallel workers across graphs.")
@click.option("--force", is_flag=True)
def count(in_path, k, pattern, out, jobs, force):
    """Exact graphlet counts for every graph in a dataset, one JSON object per graph."""
    k = int(k)
    ds = load_dataset(in_path)
    if pattern is not None:
        pat = pattern_by_name(pattern)
        if pat.k != k:
            raise click.UsageError(f"pattern {pattern!r} has k={pat.k}, not {k}")

    jobs_args = [(s, k, pattern) for s in ds.samples]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_count_one, jobs_args))
    else:
        records = [_count_one(a) for a in jobs_args]
    _emit_lines(records, out, force)


def _count_one(args):
    sample, k, pattern = args
    if pattern is None:
        counts = _fast_count_vector(sample.graph, k)
    else:
        counts = {pattern: int(count_exact(sample.graph, pattern))}
    return {"id": sample.graph_id, "k": k, "counts": counts}


def _emit_lines(records, out: Path | None, force: bool) -> None:
    text = "\n".join(json.dumps(rec) for rec in records) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        _check_out(out, force).write_text(text, encoding="utf-8")


@cli.command()
@click.option("--in", "in_path", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--pattern", required=True)
@click.option("--method", type=click.Choice(["edge", "mcmc"]), required=True)
@click.option("--budget", type=int, required=True, help="Edges sampled / walk steps.")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--force", is_flag=True)
def estimate(in_path, pattern, method, budget, seed, out, force):
    """Sampled count estimates for every graph in a dataset."""
    pattern_by_name(pattern)
    ds = load_dataset(in_path)
    records = []
    for i, sample in enumerate(ds.samples):
        counter = OpCounter()
        run_seed = seed + i
        if method == "edge":
            res = estimate_edge_sampling(sample.graph, pattern, budget, run_seed, counter)
        else:
            res = estimate_mcmc_count(sample.graph, pattern, budget, run_seed, counter)
        records.append(
            {
                "graph_id": sample.graph_id,
                "pattern": pattern,
                "method": method,
                "budget": res.budget,
                "estimate": res.estimate,
                "comparisons": res.ops,
                "seed": run_seed,
            }
        )
    _emit_lines(records, out, force)


def _load_experiment_config(path: Path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(path.read_text(encoding="utf-8")))


@cli.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--out-dir", type=click.Path(path_type=Path), default=None, help="Override config out_dir.")
@click.option("--seed", type=int, default=None, help="Override config seed.")
@click.option("--jobs", type=int, default=1)
@click.option("--force", is_flag=True)
def train(config_path, out_dir, seed, jobs, force):
    """Run a full experiment from a JSON config: dataset, training, evaluation."""
    cfg = _load_experiment_config(config_path)
    if out_dir is not None:
        cfg.out_dir = str(out_dir)
    if seed is not None:
        cfg.seed = seed
    if cfg.out_dir is None:
        raise click.UsageError("config gives no out_dir; pass --out-dir")
    _check_out(Path(cfg.out_dir) / "model.bin", force)
    summary = run_experiment(cfg, jobs=jobs)
    click.echo(json.dumps(summary))


@cli.command("eval")
@click.option("--config", "config_path", type=click.Path(path_type=Path, exists=True), default=None)
@click.option("--model", "model_path", type=click.Path(path_type=Path), default=None)
@click.option("--in", "data_path", type=click.Path(path_type=Path), default=None)
@click.option("--split", default=None, help="Dataset split to score (default test).")
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--force", is_flag=True)
def eval_cmd(config_path, model_path, data_path, split, out, force):
    """Score a saved model on a labeled dataset split; flags override config keys."""
    doc = json.loads(config_path.read_text(encoding="utf-8")) if config_path else {}
    model_path = model_path or doc.get("model")
    data_path = data_path or doc.get("data")
    split = split or doc.get("split", "test")
    out = out or (Path(doc["out"]) if "out" in doc else None)
    if model_path is None or data_path is None:
        raise click.UsageError("need --model and --in (or config keys 'model'/'data')")
    model = load_model(model_path)
    ds = load_dataset(data_path).subset(split)
    metrics = evaluate(model, ds)
    text = json.dumps(metrics.to_dict(), indent=2)
    if out is None:
        click.echo(text)
    else:
        _check_out(Path(out), force).write_text(text, encoding="utf-8")


@cli.command("compare")
@click.option("--config", "config_path", type=click.Path(path_type=Path, exists=True), default=None)
@click.option("--model", "model_path", type=click.Path(path_type=Path), default=None)
@click.option("--in", "data_path", type=click.Path(path_type=Path), default=None)
@click.option("--split", default=None)
@click.option("--pattern", default=None)
@click.option("--methods", default=None, help="Comma-separated subset of edge,mcmc.")
@click.option("--cap", type=int, default=None, help="Budget cap for the doubling search.")
@click.option("--tune-size", type=int, default=None, help="Graphs used to tune budgets.")
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", type=click.Path(path_type=Path), default=None)
@click.option("--force", is_flag=True)
def compare_cmd(
    config_path, model_path, data_path, split, pattern, methods, cap, tune_size, seed, out_dir, force
):
    """Matched-error operation-count comparison: CNN vs sampling estimators."""
    doc = json.loads(config_path.read_text(encoding="utf-8")) if config_path else {}
    model_path = model_path or doc.get("model")
    data_path = data_path or doc.get("data")
    split = split or doc.get("split", "test")
    pattern = pattern or doc.get("pattern")
    methods = methods or doc.get("methods", "edge,mcmc")
    cap = cap if cap is not None else int(doc.get("cap", 1 << 17))
    tune_size = tune_size if tune_size is not None else int(doc.get("tune_size", 25))
    seed = seed if seed is not None else int(doc.get("seed", 0))
    out_dir = out_dir or doc.get("out_dir")
    if model_path is None or data_path is None:
        raise click.UsageError("need --model and --in (or config keys 'model'/'data')")
    if isinstance(methods, str):
        methods = tuple(m.strip() for m in methods.split(",") if m.strip())
    model = load_model(model_path)
    ds = load_dataset(data_path).subset(split)
    report = run_compare(
        model, ds, pattern=pattern, methods=methods, cap=cap, seed=seed, tune_size=tune_size
    )
    if out_dir is None:
        click.echo(json.dumps([r.__dict__ for r in report.rows], indent=2))
    else:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _check_out(out_dir / "comparison.csv", force)
        report.to_csv(out_dir / "comparison.csv")
        report.to_json(out_dir / "comparison.json")
        log.info("wrote comparison to %s", out_dir)


@cli.command("flops")
@click.option("--model", "model_path", type=click.Path(path_type=Path), default=None,
              help="Saved model file.")
@click.option("--config", "config_path", type=click.Path(path_type=Path, exists=True), default=None,
              help="JSON with input_dim, filter_sizes, channels.")
def flops_cmd(model_path, config_path):
    """Print the per-layer FLOPs report of a model as JSON."""
    if (model_path is None) == (config_path is None):
        raise click.UsageError("pass exactly one of --model or --config")
    if model_path is not None:
        model = load_model(model_path)
    else:
        doc = json.loads(config_path.read_text(encoding="utf-8"))
        model = build_model(
            int(doc["input_dim"]),
            filter_sizes=tuple(doc.get("filter_sizes", (5, 5))),
            channels=tuple(doc.get("channels", (8, 16))),
        )
    click.echo(json.dumps(flops(model).to_dict(), indent=2))


def dispatch(argv: list[str]) -> int:
    """Run the CLI on ``argv`` and map outcomes onto the exit-code contract."""
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    root = logging.getLogger("graphletkit")
    root.addHandler(handler)
    if root.level == logging.NOTSET:
        root.setLevel(logging.WARNING)
    try:
        cli.main(args=list(argv), standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        message = exc.format_message()
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        click.echo(f"error: {message}", err=True)
        return 1
    except RUNTIME_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except (GraphletKitError, OSError, KeyError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.Abort:
        click.echo("aborted", err=True)
        return 3
    finally:
        root.removeHandler(handler)


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
