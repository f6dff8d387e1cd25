"""Research-front detection in citation networks.

Pipeline: parse field-tagged exports, resolve inter-citations, keep the
high-indegree core, cluster it by modularity, rank the clusters into fronts,
find each front's distinctive terms and map fronts by correspondence
analysis.
"""

__version__ = "0.1.0"

from .errors import (FrontMapError, NoKeyError, NumericalError, ParseError,  # noqa: E402
                     PartitionError, UnknownNodeError)
from .ingest import (CitedRef, EncodingPolicy, Record, RefKey, dedupe,  # noqa: E402
                     parse_cited_ref, parse_export, read_export, record_key, render_ref)
from .graph import (CitationGraph, UndirectedGraph, build_graph, citation_share,  # noqa: E402
                    extract_core, indegree, symmetrize)
from .community import (FrontSet, front_interactions, louvain, make_fronts,  # noqa: E402
                        modularity)
from .textmine import (TermIndex, TermScore, build_index, contingency,  # noqa: E402
                       jaccard_score, tokenize, top_terms)
from .correspondence import CAModel, correspondence_analysis, project_2d  # noqa: E402
from .synthgen import GroundTruth, SynthSpec, adjusted_rand_index, generate  # noqa: E402
from .report import (FrontReport, build_report, export_graph, export_tables,  # noqa: E402
                     render_ca_plot)
