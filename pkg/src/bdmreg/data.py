"""Edge-list ingestion and train/validation/test splitting.

Graphs are undirected and simple: node labels are arbitrary tokens remapped
to 0..N-1 in first-seen order, self-loops are dropped, and duplicate pairs
(in either orientation) collapse to one canonical (u < v) edge.  Splitting
retains 80% of the edges for training and divides the rest between
validation and test, pairing each positive set with an equal number of
uniformly sampled non-edges; test negatives also avoid the validation
negatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGraph, NotEnoughNonEdges, ParseError

# Rejection sampling gives up after this many multiples of the number of
# negatives needed and falls back to enumerating all non-edges.
_REJECTION_CAP = 100


@dataclass
class EdgeList:
    """Canonical undirected simple graph: (u, v) pairs with u < v."""

    edges: list
    node_count: int


@dataclass
class SplitData:
    """One train/validation/test split with negative samples.

    ``a_train`` is the symmetric adjacency of the retained edges only;
    val/test positives partition the held-out edges; the negative sets are
    the same sizes as their positive counterparts, absent from the original
    graph, and mutually disjoint.
    """

    a_train: np.ndarray
    train: list
    val_pos: list
    val_neg: list
    test_pos: list
    test_neg: list


@dataclass
class GraphData:
    """Model inputs: training adjacency, self-looped labels, identity
    features."""

    n: int
    a_train: np.ndarray
    label: np.ndarray
    features: np.ndarray


def parse_edge_list(path) -> EdgeList:
    """Read a `<u> <v>` text edge list.

    Lines starting with ``#`` or ``%`` are comments (the latter covers a
    common corpus header style); blank lines are skipped.  Raises ParseError
    with the offending line number, or EmptyGraph if no edges survive
    cleaning.
    """
    ids: dict = {}
    edges: list = []
    seen: set = set()

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith(("#", "%")):
                continue
            tokens = stripped.split()
            if len(tokens) != 2:
                raise ParseError(
                    f"expected '<u> <v>', got {stripped!r}", line=lineno
                )
            pair = []
            for token in tokens:
                if token not in ids:
                    ids[token] = len(ids)
                pair.append(ids[token])
            u, v = pair
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            edges.append(key)

    if not edges:
        raise EmptyGraph(f"no edges in {path}")
    return EdgeList(edges=edges, node_count=len(ids))


def _adjacency(n: int, edges) -> np.ndarray:
    a = np.zeros((n, n), dtype=np.uint8)
    for u, v in edges:
        a[u, v] = 1
        a[v, u] = 1
    return a


def _sample_negatives(n, needed, forbidden, rng):
    """Uniform non-edge pairs (u < v) outside ``forbidden``, w/o replacement.

    Rejection-samples up to a cap, then enumerates the remaining eligible
    pairs exhaustively (keeps dense graphs correct).
    """
    if needed == 0:
        return []
    chosen: list = []
    taken: set = set()
    for _ in range(_REJECTION_CAP * needed):
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in forbidden or key in taken:
            continue
        taken.add(key)
        chosen.append(key)
        if len(chosen) == needed:
            return chosen
    pool = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if (u, v) not in forbidden and (u, v) not in taken
    ]
    if len(pool) < needed - len(chosen):
        raise NotEnoughNonEdges(
            f"need {needed} negatives but the graph leaves only "
            f"{len(pool) + len(chosen)} non-edges"
        )
    extra = rng.choice(len(pool), size=needed - len(chosen), replace=False)
    chosen.extend(pool[k] for k in extra)
    return chosen


def split(edge_list: EdgeList, seed: int = 0) -> SplitData:
    """Randomly split edges 80/10/10 and sample matching negatives.

    Training takes floor(0.8 |E|) edges; validation positives take the
    ceiling of half the remainder, test positives the rest.  Deterministic
    per seed.
    """
    edges = list(edge_list.edges)
    n = edge_list.node_count
    n_edges = len(edges)
    if n_edges < 10:
        raise ValueError("need at least 10 edges to produce non-empty splits")

    total_pairs = n * (n - 1) // 2
    n_train = (4 * n_edges) // 5
    remainder = n_edges - n_train
    n_val = math.ceil(remainder / 2)
    n_test = remainder - n_val
    if total_pairs - n_edges < remainder:
        raise NotEnoughNonEdges(
            f"graph has {total_pairs - n_edges} non-edges, "
            f"needs {remainder} negatives"
        )

    rng = np.random.default_rng(seed)
    order = rng.permutation(n_edges)
    train = [edges[k] for k in order[:n_train]]
    val_pos = [edges[k] for k in order[n_train : n_train + n_val]]
    test_pos = [edges[k] for k in order[n_train + n_val :]]

    original = set(edges)
    val_neg = _sample_negatives(n, n_val, original, rng)
    test_neg = _sample_negatives(n, n_test, original | set(val_neg), rng)

    return SplitData(
        a_train=_adjacency(n, train),
        train=train,
        val_pos=val_pos,
        val_neg=val_neg,
        test_pos=test_pos,
        test_neg=test_neg,
    )


def to_graph_data(split_data: SplitData) -> GraphData:
    """Model inputs from a split: labels add self-loops, features are I."""
    a = split_data.a_train
    n = a.shape[0]
    eye = np.eye(n, dtype=np.uint8)
    return GraphData(
        n=n,
        a_train=a,
        label=(a + eye).astype(np.uint8),
        features=np.eye(n),
    )
