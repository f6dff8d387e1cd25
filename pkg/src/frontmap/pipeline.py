"""End-to-end research-front pipeline and its run manifest."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .community import (FrontSet, front_interactions, louvain, make_fronts, modularity,
                        write_partition)
from .correspondence import correspondence_analysis, project_2d
from .errors import FrontMapError, ParseError
from .graph import (build_graph, citation_share, extract_core, symmetrize,
                    top_fraction_threshold, write_edgelist)
from .ingest import EncodingPolicy, dedupe, parse_export, write_records
from .report import (build_reports, export_coordinates, export_graph, export_interactions,
                     export_tables, export_term_table, render_ca_plot, render_text_report)
from .textmine import (ENGLISH_STOPWORDS, build_index, contingency, load_stopwords,
                       union_of_top, write_contingency)

log = logging.getLogger(__name__)

GRAPH_FORMATS = ("graphml", "dot", "edgelist")
_EXT = {"graphml": "graphml", "dot": "dot", "edgelist": "edges.tsv"}


@dataclass
class PipelineConfig:
    inputs: list = field(default_factory=list)
    output_dir: str = "frontmap_out"
    min_indegree: int = 6
    top_fraction: Optional[float] = None   # when set, overrides min_indegree
    seed: int = 1
    resolution: float = 1.0
    min_front_size: int = 50
    top_k: int = 10
    top_papers: int = 5
    min_df: int = 2
    vocab_top: int = 50
    stopwords: Optional[str] = None
    stem: bool = False
    encoding: str = "strict"
    graph_formats: tuple = GRAPH_FORMATS
    plot: bool = True
    plot_terms: bool = False
    standard_coords: bool = False
    provenance: str = ""


class StageError(FrontMapError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class _Run:
    def __init__(self, out: Path):
        self.out = out
        self.timings: dict[str, float] = {}
        self.artifacts: list[str] = []

    def write(self, name: str, data: bytes):
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_bytes(data)
        self.artifacts.append(name)

    def stage(self, name):
        run = self

        class _Stage:
            def __enter__(self):
                self.t0 = time.perf_counter()
                log.info("stage %s", name)

            def __exit__(self, exc_type, exc, tb):
                run.timings[name] = round(time.perf_counter() - self.t0, 6)
                if exc is not None and not isinstance(exc, StageError):
                    raise StageError(name, exc) from exc
                return False

        return _Stage()


def run_pipeline(config: PipelineConfig) -> dict:
    """Run every stage, writing artifacts and ``manifest.json`` to the output dir.

    Raises:
        StageError: wraps the first failing stage's exception; artifacts
            from completed stages are left in place with a manifest marking
            the failure.
    """
    run = _Run(Path(config.output_dir))
    counts: dict = {}
    digest = hashlib.sha256()
    try:
        with run.stage("ingest"):
            records = []
            for path in config.inputs:
                data = Path(path).read_bytes()
                digest.update(data)
                records.extend(parse_export(data, EncodingPolicy(config.encoding),
                                            allow_duplicates=True))
            records, removed = dedupe(records)
            if not records:
                raise ParseError("input contains no records")
            counts.update(records=len(records), duplicates_removed=removed)
            run.write("records.jsonl", write_records(records))

        with run.stage("graph"):
            full, match = build_graph(records)
            counts.update(edges=len(full.edges), match_report=match.as_dict())
            run.write("graph.edges.tsv", write_edgelist(full))

        with run.stage("core"):
            threshold = config.min_indegree
            if config.top_fraction is not None:
                threshold = top_fraction_threshold(full, config.top_fraction)
            core = extract_core(full, threshold)
            counts.update(core_threshold=threshold, core_nodes=len(core.nodes),
                          core_edges=len(core.edges),
                          citation_share=round(citation_share(full, core), 6))
            run.write("core.nodes.txt", "".join(n + "\n" for n in sorted(core.nodes)).encode())
            run.write("core.edges.tsv", write_edgelist(core))
            if not core.nodes:
                raise FrontMapError(f"core is empty at indegree threshold {threshold}")

        with run.stage("cluster"):
            undirected = symmetrize(core)
            partition = louvain(undirected, config.seed, config.resolution)
            fronts = make_fronts(partition, config.min_front_size)
            q = modularity(undirected, partition) if undirected.total_weight else 0.0
            counts.update(clusters=len(set(partition.values())), fronts=len(fronts.fronts),
                          discarded=len(fronts.discarded),
                          discarded_nodes=sum(map(len, fronts.discarded)),
                          front_sizes=fronts.sizes, modularity=round(q, 6))
            run.write("partition.tsv", write_partition(partition))
            run.write("fronts.json", _json(fronts.as_dict()))
            inter = front_interactions(full, fronts)
            run.write("interactions.tsv", export_interactions(inter))
            ranks = fronts.rank_of()
            labels = {n: ranks.get(n, 0) for n in core.nodes}
            for fmt in config.graph_formats:
                run.write(f"core.{_EXT[fmt]}", export_graph(core, labels, fmt))

        with run.stage("mine"):
            stop = load_stopwords(config.stopwords) if config.stopwords else ENGLISH_STOPWORDS
            by_id = {r.accession_id: r for r in records}
            index = build_index({n: by_id[n].abstract for n in sorted(core.nodes)},
                                stop, config.min_df, config.stem)
            counts.update(vocabulary=len(index.vocabulary))
            reports = build_reports(fronts, core, full, index, config.top_papers, config.top_k)
            run.write("fronts.tsv", export_tables(reports))
            run.write("terms.tsv", export_term_table(reports))
            run.write("report.txt", render_text_report(reports, by_id).encode("utf-8"))

        with run.stage("ca"):
            table = contingency(fronts, index, union_of_top(config.vocab_top))
            run.write("contingency.tsv", write_contingency(table))
            model = correspondence_analysis(table.counts)
            proj = project_2d(model, standard=config.standard_coords)
            counts.update(ca_dims=model.dims, ca_total_inertia=round(model.total_inertia, 6))
            run.write("ca_coords.tsv", export_coordinates(model, proj, table.row_labels, table.terms))
            if config.plot:
                run.write("ca_plot.svg", render_ca_plot(
                    proj.rows, table.row_labels, proj.explained,
                    proj.cols if config.plot_terms else None,
                    table.terms if config.plot_terms else None))
    except StageError as exc:
        if run.artifacts:
            _write_manifest(run, config, digest, counts, status="failed", failed_stage=exc.stage,
                            error=str(exc.cause))
        raise
    return _write_manifest(run, config, digest, counts, status="ok")


def _json(obj) -> bytes:
    return (json.dumps(obj, indent=1, sort_keys=True) + "\n").encode("utf-8")


def _write_manifest(run: _Run, config, digest, counts, **status) -> dict:
    cfg = asdict(config)
    cfg["graph_formats"] = list(config.graph_formats)
    manifest = {
        "tool": f"frontmap {__version__}",
        "config": cfg,
        "input_sha256": digest.hexdigest(),
        "counts": counts,
        "artifacts": list(run.artifacts),
        "timings_s": run.timings,
        **status,
    }
    run.out.mkdir(parents=True, exist_ok=True)
    (run.out / "manifest.json").write_bytes(_json(manifest))
    return manifest


def load_fronts(path) -> FrontSet:
    return FrontSet.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
