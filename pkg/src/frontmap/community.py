"""Modularity-based clustering of the core network into ranked research fronts."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import FrontMapError, PartitionError
from .graph import CitationGraph, UndirectedGraph
from .rng import SplitMix64

# Smallest modularity gain (in edge-weight units) that justifies a move.
GAIN_EPS = 1e-10


def normalize_partition(assignment: Mapping[str, int]) -> dict[str, int]:
    """Relabel cluster ids densely, in order of each cluster's smallest node id."""
    relabel: dict[int, int] = {}
    out = {}
    for node in sorted(assignment):
        c = assignment[node]
        if c not in relabel:
            relabel[c] = len(relabel)
        out[node] = relabel[c]
    return out


def clusters_of(assignment: Mapping[str, int]) -> list[list[str]]:
    groups = defaultdict(list)
    for node in sorted(assignment):
        groups[assignment[node]].append(node)
    return [groups[c] for c in sorted(groups)]


def modularity(graph: UndirectedGraph, partition: Mapping[str, int],
               resolution: float = 1.0) -> float:
    """Newman modularity ``sum_c [l_c/m - resolution * (d_c/2m)^2]``.

    ``l_c`` is the intra-cluster edge weight, ``d_c`` the summed weighted
    degree of cluster ``c`` and ``m`` the total edge weight.
    """
    if set(partition) != graph.nodes:
        raise PartitionError("partition does not cover exactly the graph's nodes")
    m = graph.total_weight
    if m <= 0:
        raise FrontMapError("modularity is undefined on a graph without edges")
    intra = defaultdict(float)
    deg = defaultdict(float)
    for (a, b), w in graph.weights.items():
        ca, cb = partition[a], partition[b]
        if ca == cb:
            intra[ca] += w
        deg[ca] += w
        deg[cb] += w
    q = 0.0
    for c in set(partition.values()):
        q += intra[c] / m - resolution * (deg[c] / (2 * m)) ** 2
    return q


class _Level:
    """Adjacency of one coarsening level (integer nodes, self-loops split out)."""

    def __init__(self, n, adj, loops):
        self.n = n
        self.adj = adj          # list of {neighbor: weight}, no self entries
        self.loops = loops      # internal weight per node
        self.degree = [sum(adj[i].values()) + 2 * loops[i] for i in range(n)]


def _one_level(level: _Level, two_m: float, resolution: float, rng: SplitMix64):
    comm = list(range(level.n))
    tot = list(level.degree)
    order = list(range(level.n))
    rng.shuffle(order)
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ki = level.degree[i]
            ci = comm[i]
            links = defaultdict(float)
            for j, w in level.adj[i].items():
                links[comm[j]] += w
            tot[ci] -= ki
            scale = resolution * ki / two_m
            best_c = ci
            best_gain = links.get(ci, 0.0) - tot[ci] * scale
            for c in sorted(links):
                if c == ci:
                    continue
                gain = links[c] - tot[c] * scale
                if gain > best_gain + GAIN_EPS:
                    best_c, best_gain = c, gain
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                improved = moved_any = True
    return comm, moved_any


def _aggregate(level: _Level, comm: list[int]):
    labels = {c: k for k, c in enumerate(sorted(set(comm)))}
    n = len(labels)
    adj = [defaultdict(float) for _ in range(n)]
    loops = [0.0] * n
    for i in range(level.n):
        ci = labels[comm[i]]
        loops[ci] += level.loops[i]
        for j, w in level.adj[i].items():
            cj = labels[comm[j]]
            if ci == cj:
                if i < j:
                    loops[ci] += w
            else:
                adj[ci][cj] += w
    return _Level(n, [dict(a) for a in adj], loops), [labels[c] for c in comm]


def louvain(graph: UndirectedGraph, seed: int = 1, resolution: float = 1.0) -> dict[str, int]:
    """Louvain modularity maximization.

    Node visit order at every level is a SplitMix64 shuffle seeded by
    ``seed``; a node moves only for a gain strictly above ``GAIN_EPS`` and
    ties between candidate communities go to the lowest community id. The
    returned ids are dense and ordered by each cluster's smallest node id.
    """
    nodes = sorted(graph.nodes)
    if not nodes:
        return {}
    index = {n: i for i, n in enumerate(nodes)}
    adj = [dict() for _ in nodes]
    for (a, b), w in graph.weights.items():
        i, j = index[a], index[b]
        adj[i][j] = adj[i].get(j, 0.0) + w
        adj[j][i] = adj[j].get(i, 0.0) + w
    level = _Level(len(nodes), adj, [0.0] * len(nodes))
    two_m = 2.0 * graph.total_weight
    membership = list(range(len(nodes)))
    if two_m <= 0:
        return normalize_partition(dict(zip(nodes, membership)))

    rng = SplitMix64(seed)
    while True:
        comm, moved = _one_level(level, two_m, resolution, rng)
        if not moved:
            break
        level, dense = _aggregate(level, comm)
        membership = [dense[c] for c in membership]
        if level.n == 1:
            break
    return normalize_partition(dict(zip(nodes, membership)))


# --------------------------------------------------------------------------
# fronts

@dataclass
class FrontSet:
    """Clusters ranked by size (rank 1 = largest) plus those below ``min_size``."""
    fronts: list[tuple[str, ...]]
    discarded: list[tuple[str, ...]] = field(default_factory=list)
    min_size: int = 0

    @property
    def sizes(self) -> list[int]:
        return [len(f) for f in self.fronts]

    def rank_of(self) -> dict[str, int]:
        """Node -> front rank; discarded nodes are absent."""
        return {n: r for r, front in enumerate(self.fronts, 1) for n in front}

    def node_count(self) -> int:
        return sum(map(len, self.fronts)) + sum(map(len, self.discarded))

    def as_dict(self) -> dict:
        return {
            "min_size": self.min_size,
            "fronts": [list(f) for f in self.fronts],
            "discarded": [list(d) for d in self.discarded],
        }

    @classmethod
    def from_dict(cls, obj) -> "FrontSet":
        return cls([tuple(f) for f in obj["fronts"]],
                   [tuple(d) for d in obj.get("discarded", [])],
                   obj.get("min_size", 0))


def _rank_key(cluster):
    return (-len(cluster), cluster[0])


def make_fronts(partition: Mapping[str, int], min_size: int = 50) -> FrontSet:
    clusters = sorted((tuple(c) for c in clusters_of(partition)), key=_rank_key)
    fronts = [c for c in clusters if len(c) >= min_size]
    discarded = [c for c in clusters if len(c) < min_size]
    return FrontSet(fronts, discarded, min_size)


@dataclass
class FrontInteractions:
    weights: np.ndarray                       # symmetric, zero diagonal
    kept: list[tuple[int, int, int]]          # (rank_i, rank_j, weight), i < j

    def edges(self):
        n = self.weights.shape[0]
        return [(i + 1, j + 1, int(self.weights[i, j]))
                for i in range(n) for j in range(i + 1, n) if self.weights[i, j] > 0]


def main_interactions(weights: np.ndarray, min_share: float = 0.1):
    """Edges weighing at least ``min_share`` of the heaviest, plus each front's heaviest."""
    n = weights.shape[0]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if weights[i, j] > 0]
    if not pairs:
        return []
    top = max(weights[i, j] for i, j in pairs)
    keep = {(i, j) for i, j in pairs if weights[i, j] >= min_share * top}
    for i in range(n):
        row = [(weights[i, j], -j, j) for j in range(n) if j != i and weights[i, j] > 0]
        if row:
            j = max(row)[2]
            keep.add((min(i, j), max(i, j)))
    return [(i + 1, j + 1, int(weights[i, j])) for i, j in sorted(keep)]


def front_interactions(directed: CitationGraph, fronts: FrontSet,
                       keep_rule=main_interactions) -> FrontInteractions:
    """Sum of citations between every pair of fronts, in either direction."""
    rank = fronts.rank_of()
    k = len(fronts.fronts)
    w = np.zeros((k, k), dtype=np.int64)
    for a, b in directed.edges:
        ra, rb = rank.get(a), rank.get(b)
        if ra is None or rb is None or ra == rb:
            continue
        w[ra - 1, rb - 1] += 1
        w[rb - 1, ra - 1] += 1
    return FrontInteractions(w, keep_rule(w) if keep_rule else [])


# partition interchange: "node<TAB>cluster_id"

def write_partition(assignment: Mapping[str, int]) -> bytes:
    return "".join(f"{n}\t{assignment[n]}\n" for n in sorted(assignment)).encode("utf-8")


def read_partition(data) -> dict[str, int]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    out = {}
    for lineno, line in enumerate(data.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            node, cid = line.split("\t")
            out[node] = int(cid)
        except ValueError:
            raise FrontMapError(f"partition line {lineno}: expected 'node<TAB>cluster_id'") from None
    return out
