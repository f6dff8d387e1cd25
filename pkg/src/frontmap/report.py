"""Per-front reports and deterministic exports (tables, graphs, CA plot)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence
from xml.sax.saxutils import escape, quoteattr

from ._format import fmt_float
from .errors import FrontMapError, NoKeyError
from .graph import CitationGraph, write_edgelist
from .ingest import Record, render_ref
from .textmine import TermIndex, TermScore, read_term_table, top_terms, write_term_table


@dataclass(frozen=True)
class TopPaper:
    accession_id: str
    indegree: int


@dataclass
class FrontReport:
    rank: int
    size: int
    intra_citations: int
    top_papers: list[TopPaper] = field(default_factory=list)
    top_terms: list[TermScore] = field(default_factory=list)


def build_report(front: Iterable[str], rank: int, core: CitationGraph, full: CitationGraph,
                 index: Optional[TermIndex] = None, n_papers: int = 5,
                 n_terms: int = 10) -> FrontReport:
    """Size, internal citations, most-cited papers and distinctive terms of a front.

    Paper ranking uses indegree in the full network; ties go to the smaller
    accession id.
    """
    members = frozenset(front)
    missing = members - core.nodes
    if missing:
        raise FrontMapError(f"front {rank} has nodes outside the core: {sorted(missing)[:5]}")
    intra = sum(1 for a, b in core.edges if a in members and b in members)
    ranked = sorted(members, key=lambda n: (-full.indegree(n), n))[:n_papers]
    terms = top_terms(members, index, n_terms) if index is not None and index.vocabulary else []
    return FrontReport(rank, len(members), intra,
                       [TopPaper(n, full.indegree(n)) for n in ranked], terms)


def build_reports(fronts, core, full, index=None, n_papers=5, n_terms=10) -> list[FrontReport]:
    return [build_report(f, r, core, full, index, n_papers, n_terms)
            for r, f in enumerate(fronts.fronts, 1)]


# --------------------------------------------------------------------------
# delimiter-separated tables

FRONT_COLUMNS = ("rank", "size", "intra_citations", "top_papers", "top_paper_indegrees", "top_terms")


def export_tables(reports: Sequence[FrontReport]) -> bytes:
    """Front summary table (TSV); full term scores go to the term table."""
    lines = ["\t".join(FRONT_COLUMNS)]
    for rep in reports:
        lines.append("\t".join([
            str(rep.rank),
            str(rep.size),
            str(rep.intra_citations),
            ";".join(p.accession_id for p in rep.top_papers),
            ";".join(str(p.indegree) for p in rep.top_papers),
            ";".join(t.term for t in rep.top_terms),
        ]))
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_term_table(reports: Sequence[FrontReport]) -> bytes:
    return write_term_table({rep.rank: rep.top_terms for rep in reports})


def read_tables(front_table, term_table=None) -> list[FrontReport]:
    """Inverse of :func:`export_tables` (+ :func:`export_term_table`)."""
    if isinstance(front_table, bytes):
        front_table = front_table.decode("utf-8")
    lines = front_table.splitlines()
    if not lines or tuple(lines[0].split("\t")) != FRONT_COLUMNS:
        raise FrontMapError("front table header mismatch")
    scores = read_term_table(term_table) if term_table is not None else {}
    reports = []
    for line in lines[1:]:
        if not line.strip():
            continue
        rank, size, intra, papers, indegs, terms = line.split("\t")
        ids = papers.split(";") if papers else []
        degs = [int(d) for d in indegs.split(";")] if indegs else []
        rank = int(rank)
        term_scores = scores.get(rank)
        if term_scores is None:
            term_scores = [TermScore(t, 0.0, 0, 0) for t in (terms.split(";") if terms else [])]
        reports.append(FrontReport(rank, int(size), int(intra),
                                   [TopPaper(i, d) for i, d in zip(ids, degs)], term_scores))
    return reports


def render_text_report(reports: Sequence[FrontReport], records: Mapping[str, Record]) -> str:
    """Human-readable summary in the style of a research-front table."""
    if not reports:
        return "No research fronts reached the minimum size.\n"
    out = []
    for rep in reports:
        out.append(f"FRONT {rep.rank}\tSize: {rep.size:,} papers and "
                   f"{rep.intra_citations:,} inter-citations")
        out.append("Top papers:")
        for p in rep.top_papers:
            rec = records.get(p.accession_id)
            try:
                label = render_ref(rec) if rec else p.accession_id
            except NoKeyError:
                label = p.accession_id
            title = rec.title if rec else ""
            out.append(f"  {label}\t[{p.indegree}]\t{title}".rstrip())
        out.append("Terms: " + ", ".join(
            f"{t.term} ({fmt_float(t.jaccard, 3)})" for t in rep.top_terms))
        out.append("")
    return "\n".join(out)


# --------------------------------------------------------------------------
# graph exports

def _front_of(partition, node):
    if partition is None:
        return None
    return int(partition.get(node, 0))


def _graphml(graph, partition) -> str:
    directed = isinstance(graph, CitationGraph)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">']
    if partition is not None:
        out.append('  <key id="front" for="node" attr.name="front" attr.type="int"/>')
    if not directed:
        out.append('  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>')
    out.append(f'  <graph id="G" edgedefault="{"directed" if directed else "undirected"}">')
    for n in sorted(graph.nodes):
        f = _front_of(partition, n)
        if f is None:
            out.append(f"    <node id={quoteattr(n)}/>")
        else:
            out.append(f'    <node id={quoteattr(n)}><data key="front">{f}</data></node>')
    if directed:
        for a, b in sorted(graph.edges):
            out.append(f"    <edge source={quoteattr(a)} target={quoteattr(b)}/>")
    else:
        for (a, b), w in sorted(graph.weights.items()):
            out.append(f'    <edge source={quoteattr(a)} target={quoteattr(b)}>'
                       f'<data key="weight">{escape(_num(w))}</data></edge>')
    out.append("  </graph>")
    out.append("</graphml>")
    return "\n".join(out) + "\n"


def _num(w) -> str:
    return str(int(w)) if float(w).is_integer() else fmt_float(w)


def _dot_id(n: str) -> str:
    return '"' + n.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot(graph, partition) -> str:
    directed = isinstance(graph, CitationGraph)
    arrow = "->" if directed else "--"
    out = [("digraph" if directed else "graph") + " citations {",
           '  node [colorscheme="set312", style=filled];']
    for n in sorted(graph.nodes):
        f = _front_of(partition, n)
        if f is None:
            out.append(f"  {_dot_id(n)};")
        elif f > 0:
            out.append(f"  {_dot_id(n)} [front={f}, fillcolor={(f - 1) % 12 + 1}];")
        else:
            out.append(f'  {_dot_id(n)} [front=0, fillcolor="/x11/gray"];')
    if directed:
        for a, b in sorted(graph.edges):
            out.append(f"  {_dot_id(a)} {arrow} {_dot_id(b)};")
    else:
        for (a, b), w in sorted(graph.weights.items()):
            out.append(f"  {_dot_id(a)} {arrow} {_dot_id(b)} [weight={_num(w)}];")
    out.append("}")
    return "\n".join(out) + "\n"


def export_graph(graph, partition: Optional[Mapping[str, int]] = None,
                 format: str = "graphml") -> bytes:
    """Serialize a directed or undirected graph.

    ``partition`` maps nodes to their front rank (0 or absent = no front)
    and becomes the integer node attribute ``front``. Nodes and edges are
    written in lexicographic order.
    """
    if format == "graphml":
        return _graphml(graph, partition).encode("utf-8")
    if format == "dot":
        return _dot(graph, partition).encode("utf-8")
    if format == "edgelist":
        return write_edgelist(graph)
    raise FrontMapError(f"unknown graph format {format!r}")


def export_interactions(inter, kept_only: bool = False) -> bytes:
    """Front-to-front citation weights as TSV: front_i, front_j, weight, main."""
    kept = {(i, j) for i, j, _ in inter.kept}
    lines = ["front_i\tfront_j\tweight\tmain"]
    for i, j, w in inter.edges():
        main = (i, j) in kept
        if kept_only and not main:
            continue
        lines.append(f"{i}\t{j}\t{w}\t{int(main)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# --------------------------------------------------------------------------
# correspondence analysis outputs

def export_coordinates(model, projection, row_labels, col_labels) -> bytes:
    """TSV: entity, type (row|col), axis1, axis2, mass, inertia_share."""
    lines = ["entity\ttype\taxis1\taxis2\tmass\tinertia_share"]
    for kind, labels, xy, mass, share in (
            ("row", row_labels, projection.rows, model.row_masses, model.row_inertia_share()),
            ("col", col_labels, projection.cols, model.col_masses, model.col_inertia_share())):
        for lab, (x, y), m, s in zip(labels, xy, mass, share):
            lines.append(f"{lab}\t{kind}\t{fmt_float(x)}\t{fmt_float(y)}\t{fmt_float(m)}\t{fmt_float(s)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def render_ca_plot(rows, row_labels, explained=(0.0, 0.0), cols=None, col_labels=None,
                   size: int = 640) -> bytes:
    """SVG scatter of front points (labelled circles) and optional term points.

    The origin sits at the centre with an equal scale on both axes, so
    points mirrored in the data are mirrored on the canvas.
    """
    rows = [tuple(map(float, p)) for p in rows]
    if not rows:
        raise FrontMapError("plot needs at least one row point")
    cols = [tuple(map(float, p)) for p in (cols if cols is not None else [])]
    col_labels = list(col_labels or [])
    extent = max([abs(v) for p in rows + cols for v in p[:2]] + [0.0])
    if extent == 0:
        extent = 1.0
    margin = 60
    half = (size - 2 * margin) / 2
    centre = size / 2
    scale = half / (extent * 1.1)

    def cx(x):
        return fmt_float(centre + x * scale, 2)

    def cy(y):
        return fmt_float(centre - y * scale, 2)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}" font-family="sans-serif">',
           f'<rect width="{size}" height="{size}" fill="white"/>',
           f'<line class="axis" x1="{margin}" y1="{cy(0)}" x2="{size - margin}" y2="{cy(0)}" '
           'stroke="#888" stroke-dasharray="4 3"/>',
           f'<line class="axis" x1="{cx(0)}" y1="{margin}" x2="{cx(0)}" y2="{size - margin}" '
           'stroke="#888" stroke-dasharray="4 3"/>',
           f'<text class="axis-label" x="{size - margin}" y="{size - margin / 3}" '
           f'text-anchor="end" font-size="13">Axis 1 ({fmt_float(100 * explained[0], 1)}%)</text>',
           f'<text class="axis-label" x="{margin / 3}" y="{margin}" font-size="13" '
           f'transform="rotate(-90 {margin / 3} {margin})" text-anchor="end">'
           f'Axis 2 ({fmt_float(100 * explained[1], 1)}%)</text>']
    for (x, y), lab in zip(cols, col_labels):
        out.append(f'<text class="term" x="{cx(x)}" y="{cy(y)}" font-size="9" fill="#777" '
                   f'text-anchor="middle">{escape(str(lab))}</text>')
    for (x, y), lab in zip(rows, row_labels):
        out.append(f'<g class="front"><circle cx="{cx(x)}" cy="{cy(y)}" r="9" '
                   f'fill="#1f77b4" fill-opacity="0.8"/><text x="{cx(x)}" y="{cy(y)}" dy="4" '
                   f'font-size="10" fill="white" text-anchor="middle">{escape(str(lab))}</text></g>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
