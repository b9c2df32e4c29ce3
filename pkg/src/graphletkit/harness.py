"""End-to-end experiment orchestration.

Builds labeled datasets (labels always come from the exact counters),
trains the count regressor with early stopping on validation relative
error, evaluates held-out error, and runs the matched-error speed
comparison against the sampling estimators.

One experiment seed is expanded into named substreams (recorded in the
resolved config) so dataset generation, augmentation, weight init, batch
shuffling, and benchmark runs are independently reproducible.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import nn
from .datasets import GraphDataset, Sample, load_dataset, load_tu_dataset, save_dataset
from .exact import count_exact
from .exceptions import (
    DivergedLossError,
    EmptySplitError,
    LengthMismatchError,
    ZeroMeanTruthError,
)
from .graphs import ErConfig, Graph, RggConfig, gen_er, gen_rgg, pad_to, swap_augment
from .patterns import pattern_by_name
from .rng import generator, substream_seed
from .sampling import (
    OpCounter,
    TuneResult,
    estimate_edge_sampling,
    estimate_mcmc_count,
    tune_budget_to_error,
)

log = logging.getLogger("graphletkit")

MAGNITUDE_CAVEAT = (
    "Operation counts are comparable in direction only: the sampling "
    "baselines here are simplified stand-ins whose internals (and therefore "
    "absolute comparison counts) differ from previously published "
    "implementations."
)


@dataclass(frozen=True)
class MetricsReport:
    """Relative error e = mae / mu over paired (truth, prediction) samples."""

    mae: float
    mu: float
    e: float
    pairs: tuple[tuple[float, float], ...]
    size: int

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "mu": self.mu,
            "relative_error": self.e,
            "size": self.size,
            "pairs": [list(p) for p in self.pairs],
        }


def relative_error(preds, truths) -> MetricsReport:
    """Mean absolute error divided by mean ground truth."""
    preds = [float(p) for p in preds]
    truths = [float(t) for t in truths]
    if len(preds) != len(truths):
        raise LengthMismatchError(
            f"{len(preds)} predictions vs {len(truths)} ground truths"
        )
    if not truths:
        raise ZeroMeanTruthError("relative error needs at least one pair")
    s = len(truths)
    mae = sum(abs(p - t) for p, t in zip(preds, truths)) / s
    mu = sum(truths) / s
    if mu <= 0:
        raise ZeroMeanTruthError(f"mean ground truth must be positive, got {mu}")
    return MetricsReport(mae, mu, mae / mu, tuple(zip(truths, preds)), s)


@dataclass
class DatasetConfig:
    """Where the graphs come from: a generator, a TU directory, or a JSONL file."""

    source: str = "er"  # er | rgg | tu | jsonl
    n: int = 50
    p: float = 0.5
    r: float = 0.45
    dim: int = 3
    sizes: tuple[int, int, int] = (3000, 300, 300)
    path: str | None = None
    tu_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)

    def __post_init__(self):
        if self.source not in ("er", "rgg", "tu", "jsonl"):
            raise ValueError(f"unknown dataset source {self.source!r}")
        self.sizes = tuple(int(x) for x in self.sizes)
        if any(x < 0 for x in self.sizes):
            raise ValueError("split sizes must be nonnegative")


@dataclass
class ModelConfig:
    filter_sizes: tuple[int, int] = (5, 5)
    channels: tuple[int, int] = (8, 16)
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    final_relu: bool = True
    normalize_targets: bool = True
    dtype: str = "float32"

    def __post_init__(self):
        self.filter_sizes = tuple(int(x) for x in self.filter_sizes)
        self.channels = tuple(int(x) for x in self.channels)


@dataclass
class ExperimentConfig:
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    pattern: str = "four_clique"
    augment_m: int = 0
    pad_dim: int | None = None
    seed: int = 0
    out_dir: str | None = None

    def stream_seeds(self) -> dict[str, int]:
        return {
            name: substream_seed(self.seed, name)
            for name in ("data", "augment", "train", "compare")
        }

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["streams"] = self.stream_seeds()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        doc.pop("streams", None)
        dataset = DatasetConfig(**doc.pop("dataset", {}))
        model = ModelConfig(**doc.pop("model", {}))
        return cls(dataset=dataset, model=model, **doc)


def _label_sample(args) -> float:
    graph, pattern_name = args
    return float(count_exact(graph, pattern_name))


def _compute_labels(graphs: list[Graph], pattern: str, jobs: int) -> list[float]:
    if jobs > 1 and len(graphs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_label_sample, [(g, pattern) for g in graphs], chunksize=16))
    return [_label_sample((g, pattern)) for g in graphs]


def build_labeled_dataset(cfg: ExperimentConfig, jobs: int = 1) -> GraphDataset:
    """Generate or load graphs, label them exactly, split, pad, and augment.

    Augmentation applies only to the training split: each training sample
    contributes ``augment_m`` extra isomorphic padded matrices (stored as
    pad_dim-node graphs) carrying the original label.
    """
    ds_cfg = cfg.dataset
    data_seed = substream_seed(cfg.seed, "data")
    if ds_cfg.source in ("er", "rgg"):
        counts = ds_cfg.sizes
        total = sum(counts)
        graphs = []
        for i in range(total):
            gseed = substream_seed(data_seed, f"graph{i}")
            if ds_cfg.source == "er":
                graphs.append(gen_er(ErConfig(ds_cfg.n, ds_cfg.p, seed=gseed)))
            else:
                graphs.append(gen_rgg(RggConfig(ds_cfg.n, ds_cfg.r, ds_cfg.dim, seed=gseed)))
        ids = [f"{ds_cfg.source}-{i:05d}" for i in range(total)]
        splits = (
            ["train"] * counts[0] + ["validation"] * counts[1] + ["test"] * counts[2]
        )
    elif ds_cfg.source == "tu":
        graphs = load_tu_dataset(ds_cfg.path)
        ids = [f"tu-{i:05d}" for i in range(len(graphs))]
        order = generator(data_seed, "tu-shuffle").permutation(len(graphs))
        graphs = [graphs[i] for i in order]
        ids = [ids[i] for i in order]
        n_train = int(len(graphs) * ds_cfg.tu_ratios[0])
        n_val = int(len(graphs) * ds_cfg.tu_ratios[1])
        splits = (
            ["train"] * n_train
            + ["validation"] * n_val
            + ["test"] * (len(graphs) - n_train - n_val)
        )
    elif ds_cfg.source == "jsonl":
        loaded = load_dataset(ds_cfg.path)
        if loaded.pattern == cfg.pattern:
            return loaded
        graphs = [s.graph for s in loaded.samples]
        ids = [s.graph_id for s in loaded.samples]
        splits = [s.split for s in loaded.samples]
    else:  # pragma: no cover - guarded by DatasetConfig
        raise ValueError(ds_cfg.source)

    labels = _compute_labels(graphs, cfg.pattern, jobs)
    pad_dim = cfg.pad_dim or max((g.node_count for g in graphs), default=0)
    samples = [
        Sample(gid, g, label, split)
        for gid, g, label, split in zip(ids, graphs, labels, splits)
    ]
    if cfg.augment_m > 0:
        aug_seed = substream_seed(cfg.seed, "augment")
        extra = []
        for s in samples:
            if s.split != "train":
                continue
            matrices = swap_augment(
                pad_to(s.graph, pad_dim),
                cfg.augment_m,
                seed=substream_seed(aug_seed, s.graph_id),
            )
            for j, mx in enumerate(matrices):
                extra.append(
                    Sample(f"{s.graph_id}#aug{j}", mx.to_graph(), s.label, "train")
                )
        samples.extend(extra)
    return GraphDataset(samples, pattern=cfg.pattern, pad_dim=pad_dim)


def padded_batch(ds: GraphDataset) -> np.ndarray:
    """Stack a dataset's padded adjacency matrices into (S, N, N, 1) float32."""
    out = np.zeros((len(ds), ds.pad_dim, ds.pad_dim, 1), dtype=np.float32)
    for i, s in enumerate(ds.samples):
        out[i, :, :, 0] = pad_to(s.graph, ds.pad_dim).values
    return out


@dataclass(frozen=True)
class HistoryRow:
    epoch: int
    train_loss: float
    val_e: float


@dataclass
class TrainHistory:
    rows: list[HistoryRow] = field(default_factory=list)
    best_epoch: int = -1

    def to_csv(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "val_e"])
            for row in self.rows:
                writer.writerow([row.epoch, f"{row.train_loss:.8g}", f"{row.val_e:.8g}"])


def train(
    dataset: GraphDataset, model_cfg: ModelConfig, seed: int = 0
) -> tuple[nn.CnnModel, TrainHistory]:
    """Train the regressor on the dataset's train split.

    Targets are divided by the mean training label (stored in the model so
    inference undoes it). Training stops early when validation relative
    error has not improved for ``patience`` epochs and the best-validation
    weights are restored; with an empty validation split it simply runs
    ``max_epochs``.
    """
    train_ds = dataset.subset("train")
    if len(train_ds) == 0:
        raise EmptySplitError("training needs a nonempty train split")
    val_ds = dataset.subset("validation")

    x_train = padded_batch(train_ds)
    y_train = np.asarray(train_ds.labels(), dtype=np.float64)
    target_scale = float(y_train.mean()) if model_cfg.normalize_targets else 1.0
    if target_scale <= 0:
        target_scale = 1.0
    y_scaled = (y_train / target_scale).astype(np.float32)

    model = nn.build_model(
        dataset.pad_dim,
        filter_sizes=model_cfg.filter_sizes,
        channels=model_cfg.channels,
        seed=substream_seed(seed, "init"),
        dtype=model_cfg.dtype,
        final_relu=model_cfg.final_relu,
        target_scale=target_scale,
    )
    optimizer = nn.Adam(
        lr=model_cfg.learning_rate,
        beta1=model_cfg.beta1,
        beta2=model_cfg.beta2,
        eps=model_cfg.eps,
    )
    x_val = padded_batch(val_ds) if len(val_ds) else None
    y_val = val_ds.labels()

    shuffle_rng = generator(seed, "shuffle")
    history = TrainHistory()
    best_e = np.inf
    best_params = None
    since_best = 0
    n = len(train_ds)
    for epoch in range(model_cfg.max_epochs):
        order = shuffle_rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, model_cfg.batch_size):
            idx = order[start : start + model_cfg.batch_size]
            loss, grads = nn.backward(model, x_train[idx], y_scaled[idx])
            if not np.isfinite(loss):
                raise DivergedLossError(f"training loss became {loss} at epoch {epoch}")
            nn.optimizer_step(model, grads, optimizer)
            loss_sum += loss * len(idx)
        train_loss = loss_sum / n

        if x_val is not None:
            preds = nn.forward_batch(model, x_val) * target_scale
            val_e = relative_error(preds.tolist(), y_val).e
        else:
            val_e = float("nan")
        history.rows.append(HistoryRow(epoch, train_loss, val_e))
        log.info("epoch %d train_loss=%.6g val_e=%.4g", epoch, train_loss, val_e)

        if x_val is not None:
            if val_e < best_e:
                best_e = val_e
                best_params = {k: v.copy() for k, v in model.parameters().items()}
                history.best_epoch = epoch
                since_best = 0
            else:
                since_best += 1
                if since_best >= model_cfg.patience:
                    break
    if best_params is not None:
        for name, arr in model.parameters().items():
            arr[...] = best_params[name]
    return model, history


def evaluate(model: nn.CnnModel, ds: GraphDataset) -> MetricsReport:
    """Relative error of the model's predictions over one dataset/split."""
    if len(ds) == 0:
        raise EmptySplitError("evaluation needs a nonempty split")
    preds = nn.forward_batch(model, padded_batch(ds)) * model.target_scale
    return relative_error(preds.tolist(), ds.labels())


@dataclass(frozen=True)
class MethodRow:
    method: str
    error: float
    ops_per_graph: float
    ops_total: float
    budget: int
    cap_reached: bool = False


@dataclass
class ComparisonReport:
    rows: list[MethodRow]
    pattern: str
    dataset_size: int
    tune_size: int
    caveat: str = MAGNITUDE_CAVEAT

    def to_csv(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "error", "ops", "budget"])
            for row in self.rows:
                writer.writerow(
                    [row.method, f"{row.error:.6g}", f"{row.ops_total:.6g}", row.budget]
                )

    def to_json(self, path) -> None:
        doc = {
            "pattern": self.pattern,
            "dataset_size": self.dataset_size,
            "tune_size": self.tune_size,
            "caveat": self.caveat,
            "rows": [asdict(r) for r in self.rows],
        }
        Path(path).write_text(json.dumps(doc, indent=2), encoding="utf-8")


def _edge_estimator(pattern: str):
    def run(g: Graph, budget: int, seed: int, counter: OpCounter) -> float:
        return estimate_edge_sampling(g, pattern, budget, seed, counter).estimate

    return run


def _mcmc_estimator(pattern: str):
    def run(g: Graph, budget: int, seed: int, counter: OpCounter) -> float:
        return estimate_mcmc_count(g, pattern, budget, seed, counter).estimate

    return run


def compare(
    model: nn.CnnModel,
    ds: GraphDataset,
    pattern: str | None = None,
    methods: tuple[str, ...] = ("edge", "mcmc"),
    cap: int = 1 << 17,
    seed: int = 0,
    tune_size: int = 25,
) -> ComparisonReport:
    """Matched-error speed comparison on one dataset split.

    The CNN row carries its evaluation error and per-forward FLOPs; each
    sampler row carries the error and mean comparison count at the budget
    found by doubling search targeting the CNN's error (tuned on a seeded
    subsample of ``tune_size`` graphs; a cap hit is recorded, not fatal).
    """
    pattern = pattern or ds.pattern
    if pattern is None:
        raise ValueError("compare needs a target pattern")
    pattern_by_name(pattern)
    metrics = evaluate(model, ds)
    per_graph = float(nn.flops(model).total)
    size = len(ds)
    rows = [MethodRow("cnn", metrics.e, per_graph, per_graph * size, 0)]

    pick = generator(seed, "tune-subset").permutation(size)[: min(tune_size, size)]
    tune_graphs = [ds.samples[int(i)].graph for i in pick]
    tune_truths = [ds.samples[int(i)].label for i in pick]

    factories = {"edge": _edge_estimator, "mcmc": _mcmc_estimator}
    for method in methods:
        if method not in factories:
            raise ValueError(f"unknown method {method!r}; choose from {sorted(factories)}")
        result: TuneResult = tune_budget_to_error(
            tune_graphs,
            pattern,
            metrics.e,
            factories[method](pattern),
            cap=cap,
            seed=substream_seed(seed, f"tune:{method}"),
            truths=tune_truths,
        )
        rows.append(
            MethodRow(
                method,
                result.achieved_error,
                result.mean_ops,
                result.mean_ops * size,
                result.budget,
                result.cap_reached,
            )
        )
    return ComparisonReport(rows, pattern, size, len(tune_graphs))


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> dict:
    """Build, train, and evaluate one experiment; write artifacts to out_dir.

    Writes ``config.json`` (resolved config and stream seeds), ``model.bin``,
    ``history.csv``, ``metrics.json``, and ``dataset.jsonl``. Returns a
    summary dict with the test metrics.
    """
    out_dir = Path(cfg.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = cfg.to_dict()
    (out_dir / "config.json").write_text(json.dumps(resolved, indent=2), encoding="utf-8")

    log.info("building dataset (%s)", cfg.dataset.source)
    ds = build_labeled_dataset(cfg, jobs=jobs)
    save_dataset(ds, out_dir / "dataset.jsonl")
    log.info("training on %d samples", len(ds.subset("train")))
    model, history = train(ds, cfg.model, seed=substream_seed(cfg.seed, "train"))
    nn.save_model(model, out_dir / "model.bin")
    history.to_csv(out_dir / "history.csv")

    test_ds = ds.subset("test")
    summary: dict = {"epochs_trained": len(history.rows), "best_epoch": history.best_epoch}
    if len(test_ds):
        metrics = evaluate(model, test_ds)
        (out_dir / "metrics.json").write_text(
            json.dumps(metrics.to_dict(), indent=2), encoding="utf-8"
        )
        summary["test"] = {"mae": metrics.mae, "mu": metrics.mu, "relative_error": metrics.e}
        log.info("test relative error %.4g", metrics.e)
    return summary
