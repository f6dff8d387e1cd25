"""Directed inter-citation network, indegree core and undirected projection."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .errors import FrontMapError, NoKeyError, UnknownNodeError
from .ingest import Record, parse_cited_ref, record_key


class CitationGraph:
    """Immutable directed graph; an edge ``(a, b)`` means *a cites b*.

    Self-loops are rejected and duplicate edges collapse to one.
    """

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str]] = (),
                 node_attrs: Optional[Mapping[str, dict]] = None):
        self.nodes = frozenset(nodes)
        edge_set = set()
        for a, b in edges:
            if a == b:
                raise FrontMapError(f"self-loop on {a!r}")
            if a not in self.nodes or b not in self.nodes:
                raise UnknownNodeError(f"edge ({a!r}, {b!r}) has an endpoint outside the graph")
            edge_set.add((a, b))
        self.edges = frozenset(edge_set)
        self.node_attrs = {n: dict(node_attrs.get(n, {})) for n in self.nodes} if node_attrs else {}
        succ = defaultdict(set)
        pred = defaultdict(set)
        for a, b in self.edges:
            succ[a].add(b)
            pred[b].add(a)
        self._succ = dict(succ)
        self._pred = dict(pred)

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"CitationGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"

    def __eq__(self, other):
        return (isinstance(other, CitationGraph) and self.nodes == other.nodes
                and self.edges == other.edges)

    __hash__ = None

    def successors(self, node) -> frozenset:
        self._check(node)
        return frozenset(self._succ.get(node, ()))

    def predecessors(self, node) -> frozenset:
        self._check(node)
        return frozenset(self._pred.get(node, ()))

    def indegree(self, node) -> int:
        self._check(node)
        return len(self._pred.get(node, ()))

    def indegrees(self) -> dict[str, int]:
        return {n: len(self._pred.get(n, ())) for n in self.nodes}

    def subgraph(self, nodes: Iterable[str]) -> "CitationGraph":
        keep = frozenset(nodes)
        for n in keep:
            self._check(n)
        edges = [(a, b) for a, b in self.edges if a in keep and b in keep]
        attrs = {n: self.node_attrs[n] for n in keep if n in self.node_attrs}
        return CitationGraph(keep, edges, attrs)

    def _check(self, node):
        if node not in self.nodes:
            raise UnknownNodeError(node)


def indegree(graph: CitationGraph, node) -> int:
    return graph.indegree(node)


@dataclass
class MatchReport:
    """Outcome of resolving every cited-reference line in a corpus.

    ``matched`` counts distinct resolved citation links (equal to the edge
    count). The remaining counters partition the other reference lines.
    """
    total_refs: int = 0
    matched: int = 0
    unmatched: int = 0
    unparseable: int = 0
    ambiguous: int = 0
    self_citations: int = 0
    duplicates: int = 0
    records_without_key: list = field(default_factory=list)

    @property
    def unmatched_rate(self) -> float:
        return (self.unmatched + self.unparseable + self.ambiguous) / self.total_refs \
            if self.total_refs else 0.0

    def as_dict(self) -> dict:
        return {
            "total_refs": self.total_refs,
            "matched": self.matched,
            "unmatched": self.unmatched,
            "unparseable": self.unparseable,
            "ambiguous": self.ambiguous,
            "self_citations": self.self_citations,
            "duplicates": self.duplicates,
            "unmatched_rate": round(self.unmatched_rate, 6),
            "records_without_key": list(self.records_without_key),
        }


def build_graph(records: list[Record]) -> tuple[CitationGraph, MatchReport]:
    """Resolve cited references against the corpus and build the citation graph.

    A reference resolves through its DOI when some record carries that DOI;
    otherwise through the DOI-less key (author, year, source, volume, page),
    skipping candidates whose own DOI contradicts the reference's. A key
    shared by several records is ambiguous and produces no edge.
    """
    by_doi: dict[str, list[str]] = defaultdict(list)
    by_bib: dict[tuple, list[tuple[str, Optional[str]]]] = defaultdict(list)
    report = MatchReport()
    for r in records:
        try:
            key = record_key(r)
        except NoKeyError:
            report.records_without_key.append(r.accession_id)
            continue
        if key.doi:
            by_doi[key.doi].append(r.accession_id)
        by_bib[key.bibliographic].append((r.accession_id, key.doi))

    edges = set()
    matched_by_node = defaultdict(int)
    for r in records:
        for line in r.cited_refs:
            report.total_refs += 1
            ref = parse_cited_ref(line)
            if ref.key is None:
                report.unparseable += 1
                continue
            targets = by_doi.get(ref.key.doi, []) if ref.key.doi else []
            if not targets:
                targets = [aid for aid, doi in by_bib.get(ref.key.bibliographic, ())
                           if not (doi and ref.key.doi and doi != ref.key.doi)]
            if not targets:
                report.unmatched += 1
            elif len(targets) > 1:
                report.ambiguous += 1
            elif targets[0] == r.accession_id:
                report.self_citations += 1
            elif (r.accession_id, targets[0]) in edges:
                report.duplicates += 1
            else:
                edges.add((r.accession_id, targets[0]))
                matched_by_node[r.accession_id] += 1
                report.matched += 1

    attrs = {}
    for r in records:
        attrs[r.accession_id] = {
            "year": r.year,
            "matched_refs": matched_by_node.get(r.accession_id, 0),
            "unmatched_refs": len(r.cited_refs) - matched_by_node.get(r.accession_id, 0),
        }
    graph = CitationGraph((r.accession_id for r in records), edges, attrs)
    return graph, report


def top_fraction_threshold(graph: CitationGraph, fraction: float) -> int:
    """Smallest indegree threshold whose core holds at least ``fraction`` of nodes.

    Ties at the cut are all included, so the core may exceed the fraction.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    degs = sorted(graph.indegrees().values(), reverse=True)
    if not degs:
        return 0
    cut = max(1, math.ceil(fraction * len(degs)))
    return degs[cut - 1]


def extract_core(graph: CitationGraph, min_indegree: int = 6) -> CitationGraph:
    """Induced subgraph on nodes with full-graph indegree >= ``min_indegree``.

    One pass only: removing low-indegree nodes does not trigger re-filtering.
    """
    if min_indegree < 0:
        raise ValueError("min_indegree must be >= 0")
    degs = graph.indegrees()
    return graph.subgraph(n for n, d in degs.items() if d >= min_indegree)


def citation_share(full: CitationGraph, core: CitationGraph) -> float:
    """Fraction of all citations in ``full`` received by ``core`` nodes."""
    missing = core.nodes - full.nodes
    if missing:
        raise UnknownNodeError(f"core nodes absent from full graph: {sorted(missing)[:5]}")
    if not full.edges:
        return 0.0
    return sum(full.indegree(n) for n in core.nodes) / len(full.edges)


class UndirectedGraph:
    """Weighted undirected graph; ``weights`` maps sorted node pairs to weight."""

    def __init__(self, nodes: Iterable[str], weights: Mapping[tuple[str, str], float] = ()):
        self.nodes = frozenset(nodes)
        w = {}
        for (a, b), weight in dict(weights).items():
            if a == b:
                raise FrontMapError(f"self-loop on {a!r}")
            if a not in self.nodes or b not in self.nodes:
                raise UnknownNodeError(f"edge ({a!r}, {b!r}) has an endpoint outside the graph")
            if weight <= 0:
                raise FrontMapError(f"non-positive weight on ({a!r}, {b!r})")
            pair = (a, b) if a < b else (b, a)
            w[pair] = w.get(pair, 0) + weight
        self.weights = w

    @classmethod
    def from_edges(cls, nodes, edges):
        """Build from unweighted pairs; repeated pairs add up."""
        w = defaultdict(int)
        for a, b in edges:
            w[(a, b) if a < b else (b, a)] += 1
        return cls(nodes, w)

    @property
    def total_weight(self):
        return sum(self.weights.values())

    def __repr__(self):
        return f"UndirectedGraph({len(self.nodes)} nodes, {len(self.weights)} edges)"


def symmetrize(graph: CitationGraph) -> UndirectedGraph:
    """Collapse direction: pair weight = number of directed edges between the pair."""
    return UndirectedGraph.from_edges(graph.nodes, graph.edges)


# edge-list interchange: "citing<TAB>cited" per line, '#' comments

def write_edgelist(graph) -> bytes:
    if isinstance(graph, UndirectedGraph):
        lines = [f"{a}\t{b}\t{_fmt_weight(w)}" for (a, b), w in sorted(graph.weights.items())]
    else:
        lines = [f"{a}\t{b}" for a, b in sorted(graph.edges)]
    return "".join(line + "\n" for line in lines).encode("utf-8")


def _fmt_weight(w):
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def read_edgelist(data) -> list[tuple[str, str]]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    edges = []
    for lineno, line in enumerate(data.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise FrontMapError(f"edge list line {lineno}: expected 'citing<TAB>cited'")
        edges.append((parts[0], parts[1]))
    return edges
