"""Research-front detection: one subcommand per pipeline stage plus "pipeline".

Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .community import front_interactions, louvain, make_fronts, write_partition
from .correspondence import correspondence_analysis, project_2d
from .errors import FrontMapError, NumericalError
from .graph import (CitationGraph, build_graph, extract_core, read_edgelist, symmetrize,
                    top_fraction_threshold, write_edgelist)
from .ingest import EncodingPolicy, dedupe, parse_export, read_records, write_records
from .pipeline import GRAPH_FORMATS, PipelineConfig, StageError, _EXT, load_fronts, run_pipeline
from .report import (build_reports, export_coordinates, export_graph, export_interactions,
                     export_tables, export_term_table, render_ca_plot, render_text_report)
from .synthgen import SynthSpec, generate
from .textmine import (ENGLISH_STOPWORDS, build_index, contingency, load_stopwords,
                       read_contingency, top_terms, union_of_top, write_contingency,
                       write_term_table)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

_BOOL_KEYS = {"stem", "no_plot", "plot_terms", "standard_coords"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment. Keys use flag names."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key in _BOOL_KEYS:
            out[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            out[key] = value
    return out


def _csv_list(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _formats(text):
    fmts = _csv_list(text) if text not in ("", "none") else []
    bad = [f for f in fmts if f not in GRAPH_FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown graph format(s): {', '.join(bad)}")
    return tuple(fmts)


def _sizes(text):
    try:
        return tuple(int(s) for s in _csv_list(text))
    except ValueError:
        raise argparse.ArgumentTypeError("cluster sizes must be comma-separated integers") from None


def _add_core_opts(p):
    p.add_argument("--min-indegree", type=int, default=6,
                   help="keep papers cited at least this often in the full network (default 6)")
    p.add_argument("--top-fraction", type=float, default=None,
                   help="keep the most-cited fraction of papers instead of an absolute threshold")


def _add_cluster_opts(p):
    p.add_argument("--seed", type=int, default=1, help="Louvain visit-order seed (default 1)")
    p.add_argument("--resolution", type=float, default=1.0, help="modularity resolution (default 1.0)")
    p.add_argument("--min-front-size", type=int, default=50,
                   help="clusters smaller than this are discarded (default 50)")


def _add_mine_opts(p):
    p.add_argument("--top-k", type=int, default=10, help="distinctive terms per front (default 10)")
    p.add_argument("--min-df", type=int, default=2, help="minimum document frequency (default 2)")
    p.add_argument("--vocab-top", type=int, default=50,
                   help="per-front top terms pooled into the CA table (default 50)")
    p.add_argument("--stopwords", default=None, help="stopword file, one word per line")
    p.add_argument("--stem", action="store_true", help="strip plural suffixes")


def _add_ca_opts(p):
    p.add_argument("--standard-coords", action="store_true",
                   help="plot standard instead of principal coordinates")
    p.add_argument("--plot-terms", action="store_true", help="draw term points in the CA plot")


_INPUTS_HELP = "field-tagged export file(s)"
_ENCODING_HELP = "handling of bytes that are not UTF-8 (default strict)"
_RECORDS_HELP = "records file from 'ingest'"
_FRONTS_HELP = "fronts.json from 'cluster'"
_OUT_HELP = "output directory"
_FORMATS_HELP = "comma-separated graph formats (default graphml,dot,edgelist; 'none' for none)"
_TOP_PAPERS_HELP = "most-cited papers listed per front (default 5)"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="frontmap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage progress")
    parser.add_argument("--config", default=None, help="key=value config file (flags override it)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse export files into canonical records (JSON lines)")
    p.add_argument("inputs", nargs="+", help=_INPUTS_HELP)
    p.add_argument("-o", "--output", required=True, help="records file to write (JSON lines)")
    p.add_argument("--encoding", choices=[e.value for e in EncodingPolicy], default="strict",
                   help=_ENCODING_HELP)

    p = sub.add_parser("graph", help="resolve citations into a directed edge list")
    p.add_argument("--records", required=True, help=_RECORDS_HELP)
    p.add_argument("-o", "--output", required=True, help="edge list path")
    p.add_argument("--match-report", default=None, help="write the match report JSON here")

    p = sub.add_parser("core", help="extract the high-indegree core")
    p.add_argument("--records", required=True, help=_RECORDS_HELP)
    p.add_argument("--edges", required=True, help="full-network edge list")
    p.add_argument("-o", "--output-dir", required=True, help=_OUT_HELP)
    _add_core_opts(p)

    p = sub.add_parser("cluster", help="Louvain clustering of the core into ranked fronts")
    p.add_argument("--nodes", required=True, help="core node list (one id per line)")
    p.add_argument("--edges", required=True, help="core edge list")
    p.add_argument("-o", "--output-dir", required=True, help=_OUT_HELP)
    _add_cluster_opts(p)

    p = sub.add_parser("mine", help="distinctive terms per front and the CA contingency table")
    p.add_argument("--records", required=True, help=_RECORDS_HELP)
    p.add_argument("--fronts", required=True, help=_FRONTS_HELP)
    p.add_argument("-o", "--output-dir", required=True, help=_OUT_HELP)
    _add_mine_opts(p)

    p = sub.add_parser("ca", help="correspondence analysis of a contingency table")
    p.add_argument("--contingency", required=True, help="fronts x terms table from 'mine'")
    p.add_argument("-o", "--output-dir", required=True, help=_OUT_HELP)
    p.add_argument("--no-plot", action="store_true", help="skip the SVG plot")
    _add_ca_opts(p)

    p = sub.add_parser("report", help="front reports, interactions and graph exports")
    p.add_argument("--records", required=True, help=_RECORDS_HELP)
    p.add_argument("--edges", required=True, help="full-network edge list")
    p.add_argument("--core-nodes", required=True, help="core node list (one id per line)")
    p.add_argument("--fronts", required=True, help=_FRONTS_HELP)
    p.add_argument("-o", "--output-dir", required=True, help=_OUT_HELP)
    p.add_argument("--formats", type=_formats, default=GRAPH_FORMATS, help=_FORMATS_HELP)
    p.add_argument("--top-papers", type=int, default=5, help=_TOP_PAPERS_HELP)
    _add_mine_opts(p)

    p = sub.add_parser("synth", help="generate a planted-front synthetic corpus")
    p.add_argument("-o", "--output-dir", required=True,
                   help="directory for corpus.txt and truth.json")
    p.add_argument("--sizes", type=_sizes, default=(50, 50, 50, 50),
                   help="comma-separated cluster sizes (default 50,50,50,50)")
    p.add_argument("--p-in", type=float, default=0.3, help="within-cluster citation probability")
    p.add_argument("--p-out", type=float, default=0.01, help="cross-cluster citation probability")
    p.add_argument("--vocab-per-cluster", type=int, default=20, help="planted words per cluster")
    p.add_argument("--shared-vocab", type=int, default=50, help="words shared by all clusters")
    p.add_argument("--words-per-abstract", type=int, default=40, help="abstract length in words")
    p.add_argument("--external-refs", type=int, default=0,
                   help="unmatchable references spread over the corpus")
    p.add_argument("--seed", type=int, default=42, help="generator seed (default 42)")

    p = sub.add_parser("pipeline", help="run every stage end to end")
    p.add_argument("inputs", nargs="+", help=_INPUTS_HELP)
    p.add_argument("-o", "--output-dir", required=True, help=_OUT_HELP)
    p.add_argument("--encoding", choices=[e.value for e in EncodingPolicy], default="strict",
                   help=_ENCODING_HELP)
    _add_core_opts(p)
    _add_cluster_opts(p)
    _add_mine_opts(p)
    _add_ca_opts(p)
    p.add_argument("--top-papers", type=int, default=5, help=_TOP_PAPERS_HELP)
    p.add_argument("--formats", type=_formats, default=GRAPH_FORMATS, help=_FORMATS_HELP)
    p.add_argument("--no-plot", action="store_true", help="skip the SVG plot")
    p.add_argument("--provenance", default="",
                   help="free-text note stored in the manifest, e.g. the corpus query")
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config_file(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subparsers.choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in values.items() if k in dests})
    unknown = [k for k in values
               if not any(k in {a.dest for a in sp._actions} for sp in subparsers.choices.values())]
    if unknown:
        parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")


def _read_nodes(path):
    return [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line.strip()]


def _stopwords(args):
    return load_stopwords(args.stopwords) if args.stopwords else ENGLISH_STOPWORDS


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_ingest(args):
    records = []
    for path in args.inputs:
        records.extend(parse_export(Path(path).read_bytes(), EncodingPolicy(args.encoding),
                                    allow_duplicates=True))
    records, removed = dedupe(records)
    Path(args.output).write_bytes(write_records(records))
    print(f"{len(records)} records ({removed} duplicates removed)")


def _load_records(path):
    return read_records(Path(path).read_bytes())


def _cmd_graph(args):
    graph, report = build_graph(_load_records(args.records))
    Path(args.output).write_bytes(write_edgelist(graph))
    if args.match_report:
        Path(args.match_report).write_text(json.dumps(report.as_dict(), indent=1) + "\n")
    print(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges; "
          f"{report.matched} matched / {report.total_refs - report.matched} other references")


def _full_graph(records_path, edges_path):
    records = _load_records(records_path)
    ids = [r.accession_id for r in records]
    return records, CitationGraph(ids, read_edgelist(Path(edges_path).read_bytes()))


def _cmd_core(args):
    _, full = _full_graph(args.records, args.edges)
    t = args.min_indegree
    if args.top_fraction is not None:
        t = top_fraction_threshold(full, args.top_fraction)
    core = extract_core(full, t)
    out = _out_dir(args.output_dir)
    (out / "core.nodes.txt").write_text("".join(n + "\n" for n in sorted(core.nodes)))
    (out / "core.edges.tsv").write_bytes(write_edgelist(core))
    print(f"core at indegree >= {t}: {len(core.nodes)} nodes, {len(core.edges)} edges")


def _cmd_cluster(args):
    core = CitationGraph(_read_nodes(args.nodes), read_edgelist(Path(args.edges).read_bytes()))
    partition = louvain(symmetrize(core), args.seed, args.resolution)
    fronts = make_fronts(partition, args.min_front_size)
    out = _out_dir(args.output_dir)
    (out / "partition.tsv").write_bytes(write_partition(partition))
    (out / "fronts.json").write_text(json.dumps(fronts.as_dict(), indent=1, sort_keys=True) + "\n")
    print(f"{len(set(partition.values()))} clusters: {len(fronts.fronts)} fronts, "
          f"{len(fronts.discarded)} discarded")


def _cmd_mine(args):
    records = {r.accession_id: r for r in _load_records(args.records)}
    fronts = load_fronts(args.fronts)
    members = sorted({n for f in fronts.fronts + fronts.discarded for n in f})
    index = build_index({n: records[n].abstract for n in members}, _stopwords(args),
                        args.min_df, args.stem)
    out = _out_dir(args.output_dir)
    scores = {r: top_terms(f, index, args.top_k) for r, f in enumerate(fronts.fronts, 1)}
    (out / "terms.tsv").write_bytes(write_term_table(scores))
    table = contingency(fronts, index, union_of_top(args.vocab_top))
    (out / "contingency.tsv").write_bytes(write_contingency(table))
    print(f"vocabulary {len(index.vocabulary)}; contingency {table.counts.shape[0]}x{table.counts.shape[1]}")


def _cmd_ca(args):
    table = read_contingency(Path(args.contingency).read_bytes())
    model = correspondence_analysis(table.counts)
    proj = project_2d(model, standard=args.standard_coords)
    out = _out_dir(args.output_dir)
    (out / "ca_coords.tsv").write_bytes(export_coordinates(model, proj, table.row_labels, table.terms))
    if not args.no_plot:
        (out / "ca_plot.svg").write_bytes(render_ca_plot(
            proj.rows, table.row_labels, proj.explained,
            proj.cols if args.plot_terms else None, table.terms if args.plot_terms else None))
    print(f"{model.dims} dimensions, total inertia {model.total_inertia:.6f}")


def _cmd_report(args):
    records, full = _full_graph(args.records, args.edges)
    by_id = {r.accession_id: r for r in records}
    core = full.subgraph(_read_nodes(args.core_nodes))
    fronts = load_fronts(args.fronts)
    index = build_index({n: by_id[n].abstract for n in sorted(core.nodes)}, _stopwords(args),
                        args.min_df, args.stem)
    reports = build_reports(fronts, core, full, index, args.top_papers, args.top_k)
    out = _out_dir(args.output_dir)
    (out / "fronts.tsv").write_bytes(export_tables(reports))
    (out / "terms.tsv").write_bytes(export_term_table(reports))
    (out / "report.txt").write_text(render_text_report(reports, by_id), encoding="utf-8")
    (out / "interactions.tsv").write_bytes(export_interactions(front_interactions(full, fronts)))
    ranks = fronts.rank_of()
    labels = {n: ranks.get(n, 0) for n in core.nodes}
    for fmt in args.formats:
        (out / f"core.{_EXT[fmt]}").write_bytes(export_graph(core, labels, fmt))
    print(f"{len(reports)} front reports written to {out}")


def _cmd_synth(args):
    spec = SynthSpec(args.sizes, args.p_in, args.p_out, args.vocab_per_cluster,
                     args.shared_vocab, args.words_per_abstract, args.seed, args.external_refs)
    corpus, truth = generate(spec)
    out = _out_dir(args.output_dir)
    (out / "corpus.txt").write_bytes(corpus)
    (out / "truth.json").write_text(truth.to_json() + "\n", encoding="utf-8")
    print(f"{len(truth.assignment)} records, {len(truth.edges)} planted citations")


def _cmd_pipeline(args):
    config = PipelineConfig(
        inputs=list(args.inputs), output_dir=args.output_dir, min_indegree=args.min_indegree,
        top_fraction=args.top_fraction, seed=args.seed, resolution=args.resolution,
        min_front_size=args.min_front_size, top_k=args.top_k, top_papers=args.top_papers,
        min_df=args.min_df, vocab_top=args.vocab_top, stopwords=args.stopwords,
        stem=args.stem, encoding=args.encoding, graph_formats=tuple(args.formats),
        plot=not args.no_plot, plot_terms=args.plot_terms,
        standard_coords=args.standard_coords, provenance=args.provenance)
    manifest = run_pipeline(config)
    c = manifest["counts"]
    print(f"{c['records']} papers and {c['edges']} inter-citations; core {c['core_nodes']} papers "
          f"and {c['core_edges']} inter-citations; {c['clusters']} clusters -> "
          f"{c['fronts']} fronts ({c['discarded']} too small)")


_COMMANDS = {
    "ingest": _cmd_ingest, "graph": _cmd_graph, "core": _cmd_core, "cluster": _cmd_cluster,
    "mine": _cmd_mine, "ca": _cmd_ca, "report": _cmd_report, "synth": _cmd_synth,
    "pipeline": _cmd_pipeline,
}


def _exit_code(exc) -> int:
    return EXIT_NUMERIC if isinstance(exc, (NumericalError, ArithmeticError)) else EXIT_DATA


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError) as exc:
        print(f"frontmap: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _COMMANDS[args.command](args)
    except StageError as exc:
        print(f"frontmap: {exc}", file=sys.stderr)
        return _exit_code(exc.cause)
    except (FrontMapError, OSError, ValueError, KeyError) as exc:
        print(f"frontmap {args.command}: {exc}", file=sys.stderr)
        return _exit_code(exc)
    return EXIT_OK
