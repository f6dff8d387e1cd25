"""Abstract tokenization, document-term incidence and Jaccard term ranking."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from ._format import fmt_float
from .errors import FrontMapError, NumericalError

# Common English function words; override with load_stopwords().
ENGLISH_STOPWORDS = frozenset("""
a about above after again against all also although am among an and another any
are aren as at be because been before being below between both but by can cannot
could couldn did didn do does doesn doing don down during each either else etc
ever every few for from further had hadn has hasn have haven having he her here
hers herself him himself his how however i if in into is isn it its itself just
least less let like may me might more most much must mustn my myself neither no
nor not now of off often on once one only or other otherwise ought our ours
ourselves out over own per rather same shall shan she should shouldn since so
some such than that the their theirs them themselves then there therefore these
they this those though through thus to too toward towards under until up upon us
use used using very via was wasn we were weren what whatever when whenever where
whereas whether which while who whom whose why will with within without won would
wouldn yet you your yours yourself yourselves
""".split())

_SPLIT_RE = re.compile(r"[\W_]+")


def load_stopwords(path) -> frozenset:
    """One word per line; blank lines and ``#`` comments ignored."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh
                         if w.strip() and not w.lstrip().startswith("#"))


def strip_suffix(token: str) -> str:
    """Plain plural stripping: -ies -> -y, -es after s/x/z/ch/sh, trailing -s."""
    if len(token) > 4 and token.endswith("ies"):
        return token[:-3] + "y"
    if len(token) > 4 and token.endswith("es") and token[-3] in "sxz":
        return token[:-2]
    if len(token) > 4 and token.endswith(("ches", "shes")):
        return token[:-2]
    if len(token) > 3 and token.endswith("s") and not token.endswith(("ss", "us", "is")):
        return token[:-1]
    return token


def tokenize(text: str, stopwords: Iterable[str] = ENGLISH_STOPWORDS,
             stem: bool = False) -> list[str]:
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else frozenset(stopwords)
    out = []
    for tok in _SPLIT_RE.split(text.lower()):
        if len(tok) < 2 or tok.isdigit() or tok in stop:
            continue
        if stem:
            tok = strip_suffix(tok)
        out.append(tok)
    return out


@dataclass
class TermIndex:
    vocabulary: list[str]
    postings: dict[str, frozenset]
    doc_ids: frozenset
    doc_terms: dict[str, frozenset]

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    def df(self, term: str) -> int:
        return len(self.postings[term])


def build_index(docs: Mapping[str, str], stopwords: Iterable[str] = ENGLISH_STOPWORDS,
                min_df: int = 2, stem: bool = False) -> TermIndex:
    """Document-term incidence; terms in fewer than ``min_df`` documents are dropped."""
    stop = frozenset(stopwords)
    raw_terms = {d: frozenset(tokenize(text or "", stop, stem)) for d, text in docs.items()}
    df = Counter(t for terms in raw_terms.values() for t in terms)
    vocab = sorted(t for t, n in df.items() if n >= min_df)
    keep = set(vocab)
    doc_terms = {d: frozenset(t for t in terms if t in keep) for d, terms in raw_terms.items()}
    postings: dict[str, set] = {t: set() for t in vocab}
    for d, terms in doc_terms.items():
        for t in terms:
            postings[t].add(d)
    return TermIndex(vocab, {t: frozenset(p) for t, p in postings.items()},
                     frozenset(docs), doc_terms)


@dataclass(frozen=True)
class TermScore:
    term: str
    jaccard: float
    df_in_front: int
    df_total: int


def _front_docs(front: Iterable[str], index: TermIndex) -> frozenset:
    docs = frozenset(front)
    unknown = docs - index.doc_ids
    if unknown:
        raise FrontMapError(f"front documents not in the index: {sorted(unknown)[:5]}")
    return docs


def _score(term, inside, total, size) -> TermScore:
    union = total + size - inside
    return TermScore(term, inside / union if union else 0.0, inside, total)


def jaccard_score(term: str, front: Iterable[str], index: TermIndex) -> TermScore:
    """|docs with term AND in front| / |docs with term OR in front|."""
    if term not in index.postings:
        raise FrontMapError(f"unknown term {term!r}")
    docs = _front_docs(front, index)
    posting = index.postings[term]
    return _score(term, len(posting & docs), len(posting), len(docs))


def score_front(front: Iterable[str], index: TermIndex) -> list[TermScore]:
    """Scores for every vocabulary term, best first.

    Order: Jaccard descending, then df_in_front descending, then the term.
    """
    docs = _front_docs(front, index)
    inside = Counter(t for d in docs for t in index.doc_terms[d])
    size = len(docs)
    scored = [_score(t, n, len(index.postings[t]), size) for t, n in inside.items()]
    scored.sort(key=lambda s: (-s.jaccard, -s.df_in_front, s.term))
    zero = [TermScore(t, 0.0, 0, len(index.postings[t]))
            for t in index.vocabulary if t not in inside]
    return scored + zero


def top_terms(front: Iterable[str], index: TermIndex, k: int = 10) -> list[TermScore]:
    if k < 1:
        raise ValueError("k must be >= 1")
    return score_front(front, index)[:k]


@dataclass
class Contingency:
    counts: np.ndarray       # fronts x terms, document incidence counts
    row_labels: list[str]
    terms: list[str]


def union_of_top(n: int = 50) -> Callable:
    """Vocabulary rule: union of each front's top-``n`` Jaccard terms."""
    def rule(fronts: Sequence[Sequence[str]], index: TermIndex) -> list[str]:
        chosen = set()
        for front in fronts:
            chosen.update(s.term for s in top_terms(front, index, n) if s.df_in_front > 0)
        return sorted(chosen)
    return rule


def contingency(fronts, index: TermIndex, vocab_rule: Optional[Callable] = None,
                row_labels: Optional[list[str]] = None) -> Contingency:
    """Fronts x terms table of document counts, the input to correspondence analysis.

    ``fronts`` is a FrontSet or a sequence of node collections. Terms that
    no front document contains are dropped so no column is all zero.
    """
    groups = [list(f) for f in getattr(fronts, "fronts", fronts)]
    if len(groups) < 2:
        raise NumericalError("correspondence analysis needs at least 2 fronts")
    rule = vocab_rule or union_of_top(50)
    terms = list(rule(groups, index))
    col = {t: j for j, t in enumerate(terms)}
    counts = np.zeros((len(groups), len(terms)), dtype=np.int64)
    for i, front in enumerate(groups):
        for d in _front_docs(front, index):
            for t in index.doc_terms[d]:
                j = col.get(t)
                if j is not None:
                    counts[i, j] += 1
    nonzero = counts.sum(axis=0) > 0
    terms = [t for t, keep in zip(terms, nonzero) if keep]
    counts = counts[:, nonzero]
    if not terms or counts.sum() == 0:
        raise NumericalError("contingency table is empty or all zero")
    labels = row_labels or [str(i + 1) for i in range(len(groups))]
    return Contingency(counts, labels, terms)


def write_term_table(scores_by_rank: Mapping[int, Sequence[TermScore]]) -> bytes:
    lines = ["front_rank\tterm\tjaccard\tdf_in_front\tdf_total"]
    for rank in sorted(scores_by_rank):
        for s in scores_by_rank[rank]:
            lines.append(f"{rank}\t{s.term}\t{fmt_float(s.jaccard)}\t{s.df_in_front}\t{s.df_total}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_term_table(data) -> dict[int, list[TermScore]]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    out: dict[int, list[TermScore]] = {}
    for line in data.splitlines()[1:]:
        if not line.strip():
            continue
        rank, term, j, inside, total = line.split("\t")
        out.setdefault(int(rank), []).append(TermScore(term, float(j), int(inside), int(total)))
    return out


def write_contingency(table: Contingency) -> bytes:
    lines = ["front\t" + "\t".join(table.terms)]
    for label, row in zip(table.row_labels, table.counts):
        lines.append(label + "\t" + "\t".join(str(int(v)) for v in row))
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_contingency(data) -> Contingency:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    rows = [line.split("\t") for line in data.splitlines() if line.strip()]
    if not rows:
        raise FrontMapError("empty contingency file")
    terms = rows[0][1:]
    labels = [r[0] for r in rows[1:]]
    counts = np.array([[int(v) for v in r[1:]] for r in rows[1:]], dtype=np.int64)
    return Contingency(counts.reshape(len(labels), len(terms)), labels, terms)
