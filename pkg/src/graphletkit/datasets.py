"""Labeled graph datasets: JSONL serialization and TU-format ingestion.

The on-disk dataset format is one JSON object per line, UTF-8 with LF line
endings. The first line is a header ``{"format_version", "pattern",
"pad_dim"}``; every following line is a sample ``{"id", "n", "edges",
"label", "split"}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import InconsistentIndicatorError, ParseError, VersionMismatchError
from .graphs import Graph

FORMAT_VERSION = 1
SPLITS = ("train", "validation", "test")


@dataclass
class Sample:
    graph_id: str
    graph: Graph
    label: float
    split: str = "train"

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")
        if self.label < 0:
            raise ValueError(f"label must be nonnegative, got {self.label}")


@dataclass
class GraphDataset:
    """Labeled samples sharing one pad dimension and one target pattern.

    ``pattern`` names the graphlet the labels count (None while unlabeled),
    and ``pad_dim`` is the common input matrix dimension, at least the
    largest node count present.
    """

    samples: list[Sample] = field(default_factory=list)
    pattern: str | None = None
    pad_dim: int = 0

    def __post_init__(self):
        max_n = self.max_node_count
        if self.pad_dim == 0:
            self.pad_dim = max_n
        if self.pad_dim < max_n:
            raise ValueError(f"pad_dim {self.pad_dim} < largest graph ({max_n} nodes)")

    @property
    def max_node_count(self) -> int:
        return max((s.graph.node_count for s in self.samples), default=0)

    def subset(self, split: str) -> "GraphDataset":
        """Samples belonging to one split, sharing this dataset's pad_dim."""
        if split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {split!r}")
        picked = [s for s in self.samples if s.split == split]
        return GraphDataset(picked, pattern=self.pattern, pad_dim=self.pad_dim)

    def labels(self) -> list[float]:
        return [s.label for s in self.samples]

    def __len__(self) -> int:
        return len(self.samples)


def save_dataset(ds: GraphDataset, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        header = {
            "format_version": FORMAT_VERSION,
            "pattern": ds.pattern,
            "pad_dim": ds.pad_dim,
        }
        fh.write(json.dumps(header) + "\n")
        for s in ds.samples:
            rec = {
                "id": s.graph_id,
                "n": s.graph.node_count,
                "edges": [[u, v] for u, v in s.graph.edges],
                "label": s.label,
                "split": s.split,
            }
            fh.write(json.dumps(rec) + "\n")


def load_dataset(path) -> GraphDataset:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file, expected a header line")
    header = _parse_json_line(path, 1, lines[0])
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: dataset format version {version!r}, supported {FORMAT_VERSION}"
        )
    samples = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        rec = _parse_json_line(path, lineno, raw)
        try:
            graph = Graph.from_edges(rec["n"], rec["edges"])
            samples.append(
                Sample(str(rec["id"]), graph, float(rec["label"]), rec["split"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}:{lineno}: bad sample record: {exc}") from exc
    return GraphDataset(samples, pattern=header.get("pattern"), pad_dim=header.get("pad_dim", 0))


def _parse_json_line(path: Path, lineno: int, raw: str) -> dict:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}:{lineno}: expected a JSON object")
    return obj


def load_tu_dataset(dir_path) -> list[Graph]:
    """Load the standard two-file TU distribution of a graph dataset.

    Expects ``<name>_A.txt`` (comma-separated 1-indexed arcs, one per line)
    and ``<name>_graph_indicator.txt`` (line k = graph id of node k). Arcs
    are symmetrized, duplicates collapsed, and node ids remapped to
    contiguous 0-based ids per graph. Optional label/attribute files are
    ignored.
    """
    dir_path = Path(dir_path)
    a_file = _find_tu_file(dir_path, "_A.txt")
    ind_file = _find_tu_file(dir_path, "_graph_indicator.txt")

    indicator: list[int] = []
    for lineno, raw in enumerate(_read_lines(ind_file), start=1):
        try:
            indicator.append(int(raw.strip()))
        except ValueError as exc:
            raise ParseError(f"{ind_file}:{lineno}: non-integer graph id {raw!r}") from exc
    if not indicator:
        raise ParseError(f"{ind_file}: empty graph indicator")

    graph_ids = sorted(set(indicator))
    local_id: dict[int, int] = {}
    node_counts = {gid: 0 for gid in graph_ids}
    for node, gid in enumerate(indicator, start=1):
        local_id[node] = node_counts[gid]
        node_counts[gid] += 1

    edges: dict[int, set[tuple[int, int]]] = {gid: set() for gid in graph_ids}
    for lineno, raw in enumerate(_read_lines(a_file), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"{a_file}:{lineno}: expected 'u,v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"{a_file}:{lineno}: non-integer node id in {line!r}") from exc
        if not (1 <= u <= len(indicator) and 1 <= v <= len(indicator)):
            raise ParseError(f"{a_file}:{lineno}: node id out of range in {line!r}")
        gu, gv = indicator[u - 1], indicator[v - 1]
        if gu != gv:
            raise InconsistentIndicatorError(
                f"{a_file}:{lineno}: arc {u},{v} joins graphs {gu} and {gv}"
            )
        if u != v:
            a, b = local_id[u], local_id[v]
            edges[gu].add((min(a, b), max(a, b)))

    return [Graph.from_edges(node_counts[gid], sorted(edges[gid])) for gid in graph_ids]


def _find_tu_file(dir_path: Path, suffix: str) -> Path:
    matches = sorted(dir_path.glob(f"*{suffix}"))
    if not matches:
        raise ParseError(f"{dir_path}: no file matching *{suffix}")
    return matches[0]


def _read_lines(path: Path) -> list[str]:
    with path.open("r", encoding="utf-8") as fh:
        return fh.read().splitlines()
