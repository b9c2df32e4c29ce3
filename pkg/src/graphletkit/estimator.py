"""scikit-learn style estimator API.

`GraphletCountRegressor` wraps the training harness behind the usual
``fit``/``predict``/``get_params`` surface so the model composes with
pipelines, grid search, and cross-validation. `AdjacencyPadder` is the
matching preprocessing transformer turning variable-size graphs into a
fixed-size stack of zero-padded adjacency matrices.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import nn
from .datasets import GraphDataset, Sample
from .exact import count_exact
from .harness import ModelConfig, padded_batch, relative_error, train
from .graphs import pad_to
from .patterns import pattern_by_name
from .validation import as_graph_list


class AdjacencyPadder(BaseEstimator, TransformerMixin):
    """Zero-pad adjacency matrices to the largest graph seen during fit.

    ``transform`` returns an (n_samples, N, N) float32 array; graphs larger
    than the fitted dimension raise at transform time.
    """

    def __init__(self, pad_dim=None):
        self.pad_dim = pad_dim

    def fit(self, X, y=None):
        graphs = as_graph_list(X)
        largest = max((g.node_count for g in graphs), default=0)
        self.pad_dim_ = self.pad_dim if self.pad_dim is not None else largest
        if self.pad_dim_ < largest:
            raise ValueError(
                f"pad_dim={self.pad_dim_} smaller than largest graph ({largest} nodes)"
            )
        return self

    def transform(self, X):
        check_is_fitted(self, "pad_dim_")
        graphs = as_graph_list(X)
        out = np.zeros((len(graphs), self.pad_dim_, self.pad_dim_), dtype=np.float32)
        for i, g in enumerate(graphs):
            out[i] = pad_to(g, self.pad_dim_).values
        return out


class GraphletCountRegressor(BaseEstimator, RegressorMixin):
    """CNN regressor predicting one graphlet count from the adjacency matrix.

    Parameters mirror the training harness defaults. ``X`` may be a list of
    Graph objects, a list of square 0/1 matrices, or a stacked 3-D array;
    when ``y`` is omitted, labels are computed with the exact counter.
    A ``validation_fraction`` of the training set drives early stopping.
    """

    def __init__(
        self,
        pattern="four_clique",
        filter_sizes=(5, 5),
        channels=(8, 16),
        learning_rate=1e-3,
        batch_size=32,
        max_epochs=200,
        patience=10,
        validation_fraction=0.1,
        pad_dim=None,
        final_relu=True,
        normalize_targets=True,
        seed=0,
    ):
        self.pattern = pattern
        self.filter_sizes = filter_sizes
        self.channels = channels
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.validation_fraction = validation_fraction
        self.pad_dim = pad_dim
        self.final_relu = final_relu
        self.normalize_targets = normalize_targets
        self.seed = seed

    def fit(self, X, y=None):
        pattern = pattern_by_name(self.pattern)
        graphs = as_graph_list(X)
        if not graphs:
            raise ValueError("fit needs at least one graph")
        if y is None:
            labels = [float(count_exact(g, pattern)) for g in graphs]
        else:
            labels = [float(v) for v in y]
            if len(labels) != len(graphs):
                raise ValueError(f"{len(graphs)} graphs but {len(labels)} labels")

        n_val = int(round(len(graphs) * self.validation_fraction))
        n_val = min(n_val, len(graphs) - 1)
        order = np.random.Generator(np.random.PCG64(self.seed)).permutation(len(graphs))
        split = ["train"] * len(graphs)
        for i in order[:n_val]:
            split[int(i)] = "validation"
        samples = [
            Sample(f"g{i:05d}", g, label, split[i])
            for i, (g, label) in enumerate(zip(graphs, labels))
        ]
        dataset = GraphDataset(samples, pattern=pattern.name, pad_dim=self.pad_dim or 0)

        cfg = ModelConfig(
            filter_sizes=tuple(self.filter_sizes),
            channels=tuple(self.channels),
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
            final_relu=self.final_relu,
            normalize_targets=self.normalize_targets,
        )
        self.model_, self.history_ = train(dataset, cfg, seed=self.seed)
        self.pad_dim_ = dataset.pad_dim
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        graphs = as_graph_list(X)
        ds = GraphDataset(
            [Sample(f"p{i}", g, 0.0, "test") for i, g in enumerate(graphs)],
            pattern=self.pattern,
            pad_dim=self.pad_dim_,
        )
        preds = nn.forward_batch(self.model_, padded_batch(ds))
        return np.asarray(preds, dtype=np.float64) * self.model_.target_scale

    def relative_error(self, X, y=None):
        """Harness metric (mean absolute error over mean truth) on X."""
        check_is_fitted(self, "model_")
        graphs = as_graph_list(X)
        if y is None:
            y = [float(count_exact(g, self.pattern)) for g in graphs]
        return relative_error(list(self.predict(graphs)), y).e
