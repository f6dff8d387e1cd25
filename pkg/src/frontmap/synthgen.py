"""Synthetic corpora with planted front structure, and partition agreement.

Generation is a pure function of :class:`SynthSpec`. All randomness comes
from one :class:`~frontmap.rng.SplitMix64` stream seeded with ``spec.seed``
and consumed in this order:

1. Edges inside clusters, cluster by cluster, over the pairs ``i < j`` of
   that cluster in lexicographic order, each kept with probability ``p_in``.
2. Edges across clusters, over every pair ``i < j`` of nodes in different
   clusters in lexicographic order, each kept with probability ``p_out``.
   Kept pairs are found by geometric skipping: each skip consumes one
   double ``u`` and jumps ``floor(log(1-u) / log(1-p))`` candidates. Every
   kept pair consumes one more double; ``< 0.5`` means the lower node
   cites the higher one, otherwise the reverse.
3. Abstracts, record by record, word by word. One double ``u`` per word:
   ``u < 0.8`` picks cluster word ``floor(u / 0.8 * V)``, otherwise shared
   word ``floor((u - 0.8) / 0.2 * S)``.
4. External (unmatchable) references: for each one, a record index drawn
   with ``below(n)``.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping

from .errors import PartitionError
from .ingest import Record, render_ref, write_export
from .rng import SplitMix64
from .textmine import ENGLISH_STOPWORDS

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = [c + v for c in _CONSONANTS for v in _VOWELS]
_SCRAMBLE = 7919          # coprime with 70**k


def pseudo_word(k: int) -> str:
    """Distinct consonant-vowel word for every index ``k >= 0``.

    The first 70**3 indices give three-syllable words, the next 70**4 four
    syllables, and so on; within a length the index is scrambled by a
    multiplier coprime with the word space so neighbours look unrelated.
    """
    n = len(_SYLLABLES)
    length = 3
    while k >= n ** length:
        k -= n ** length
        length += 1
    z = (k * _SCRAMBLE) % n ** length
    out = []
    for _ in range(length):
        z, r = divmod(z, n)
        out.append(_SYLLABLES[r])
    return "".join(reversed(out))


def _word_list(start: int, count: int) -> tuple[list[str], int]:
    words, k = [], start
    while len(words) < count:
        w = pseudo_word(k)
        k += 1
        if w not in ENGLISH_STOPWORDS:
            words.append(w)
    return words, k


@dataclass(frozen=True)
class SynthSpec:
    cluster_sizes: tuple = (50, 50, 50, 50)
    p_in: float = 0.3
    p_out: float = 0.01
    vocab_per_cluster: int = 20
    shared_vocab: int = 50
    words_per_abstract: int = 40
    seed: int = 42
    external_refs: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cluster_sizes", tuple(int(s) for s in self.cluster_sizes))
        if any(s < 0 for s in self.cluster_sizes):
            raise ValueError("cluster sizes must be >= 0")
        for name in ("p_in", "p_out"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        for name in ("vocab_per_cluster", "shared_vocab", "words_per_abstract", "external_refs"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.words_per_abstract and not (self.vocab_per_cluster and self.shared_vocab):
            raise ValueError("abstract words need non-empty cluster and shared vocabularies")


@dataclass
class GroundTruth:
    assignment: dict            # accession id -> planted cluster
    planted_vocab: dict         # cluster -> sorted word list
    shared_vocab: list
    edges: list                 # (citing, cited) in generation order
    block_edges: dict           # "a-b" (a <= b) -> edge count; absent cross pairs are 0
    indegree: dict              # accession id -> indegree
    cluster_df: dict            # cluster -> {word: documents containing it}
    external_refs: int = 0
    spec: dict = field(default_factory=dict)

    @property
    def df(self) -> dict:
        total = Counter()
        for per in self.cluster_df.values():
            total.update(per)
        return dict(total)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        obj = json.loads(text)
        obj["edges"] = [tuple(e) for e in obj["edges"]]
        obj["planted_vocab"] = {int(k): v for k, v in obj["planted_vocab"].items()}
        obj["cluster_df"] = {int(k): v for k, v in obj["cluster_df"].items()}
        return cls(**obj)


def accession(i: int) -> str:
    return f"WOS:{i + 1:015d}"


def _skip_sample(rng: SplitMix64, total: int, p: float):
    """Indices in [0, total) each kept with probability p, via geometric skips."""
    if p <= 0 or total <= 0:
        return
    if p >= 1:
        yield from range(total)
        return
    log_q = math.log1p(-p)
    pos = -1
    while True:
        u = rng.random()
        pos += 1 + int(math.log1p(-u) / log_q)
        if pos >= total:
            return
        yield pos


def _plant_edges(rng, starts, sizes, p_in, p_out):
    edges, block = [], {}
    n = sum(sizes)
    cluster_of = [c for c, size in enumerate(sizes) for _ in range(size)]

    def add(i, j):
        if rng.random() < 0.5:
            edges.append((i, j))
        else:
            edges.append((j, i))

    for c, size in enumerate(sizes):
        count = 0
        for idx in _skip_sample(rng, size * (size - 1) // 2, p_in):
            i, j = _triangle_pair(idx, size)
            add(starts[c] + i, starts[c] + j)
            count += 1
        block[f"{c}-{c}"] = count

    # Row i of the cross pairs holds (i, j) for j from the end of i's cluster to n.
    ends = [starts[cluster_of[i]] + sizes[cluster_of[i]] for i in range(n)]
    total = sum(n - e for e in ends)
    row, row_start = 0, 0
    for idx in _skip_sample(rng, total, p_out):
        while idx >= row_start + n - ends[row]:
            row_start += n - ends[row]
            row += 1
        j = ends[row] + idx - row_start
        add(row, j)
        key = f"{cluster_of[row]}-{cluster_of[j]}"
        block[key] = block.get(key, 0) + 1
    return edges, block


def _triangle_pair(idx: int, n: int) -> tuple[int, int]:
    # idx-th pair (i, j), i < j, in lexicographic order over n items
    i = int((2 * n - 1 - math.sqrt((2 * n - 1) ** 2 - 8 * idx)) // 2)
    while i > 0 and i * (2 * n - i - 1) // 2 > idx:
        i -= 1
    while (i + 1) * (2 * n - i - 2) // 2 <= idx:
        i += 1
    j = idx - i * (2 * n - i - 1) // 2 + i + 1
    return i, j


def _base_record(i: int, cluster: int) -> Record:
    # Unique key per record: surname from i, volume/page encode i.
    surname = pseudo_word(10_000_000 + i).capitalize()
    return Record(
        accession_id=accession(i),
        authors=(f"{surname}, {'ABCDEFGHJK'[i % 10]}",),
        title=f"Synthetic study {i + 1} of front {cluster + 1}",
        source="J SYNTH MATER",
        year=2007 + i % 11,
        volume=str(1 + i // 1000),
        start_page=str(1 + i % 1000),
        doi=f"10.5555/synth.{i + 1}" if i % 2 == 0 else None,
        extra={"PT": ("J",)},
    )


def external_ref(k: int) -> str:
    return f"Outsider {'ABCDEFGHJK'[k % 10]}, {1990 + k % 17}, J EXTERNAL, V{1 + k // 1000}, P{1 + k % 1000}"


def generate(spec: SynthSpec) -> tuple[bytes, GroundTruth]:
    """Render a synthetic corpus in export format together with its ground truth."""
    sizes = list(spec.cluster_sizes)
    starts = [sum(sizes[:c]) for c in range(len(sizes))]
    n = sum(sizes)
    cluster_of = [c for c, s in enumerate(sizes) for _ in range(s)]
    rng = SplitMix64(spec.seed)

    edges, block = _plant_edges(rng, starts, sizes, spec.p_in, spec.p_out)

    next_k = 0
    vocab = {}
    for c in range(len(sizes)):
        vocab[c], next_k = _word_list(next_k, spec.vocab_per_cluster)
    shared, _ = _word_list(next_k, spec.shared_vocab)

    abstracts = []
    cluster_df = {c: Counter() for c in range(len(sizes))}
    V, S = spec.vocab_per_cluster, spec.shared_vocab
    for i in range(n):
        c = cluster_of[i]
        words = []
        for _ in range(spec.words_per_abstract):
            u = rng.random()
            if u < 0.8:
                words.append(vocab[c][min(int(u / 0.8 * V), V - 1)])
            else:
                words.append(shared[min(int((u - 0.8) / 0.2 * S), S - 1)])
        abstracts.append(" ".join(words))
        cluster_df[c].update(set(words))

    externals = defaultdict(list)
    if n:
        for k in range(spec.external_refs):
            externals[rng.below(n)].append(external_ref(k))

    base = [_base_record(i, cluster_of[i]) for i in range(n)]
    refs = [render_ref(r) for r in base]
    cites = defaultdict(list)
    indeg = Counter()
    for a, b in edges:
        cites[a].append(b)
        indeg[b] += 1
    records = []
    for i, r in enumerate(base):
        cited = [refs[j] for j in sorted(cites[i])] + externals[i]
        records.append(replace(r, abstract=abstracts[i], cited_refs=tuple(cited)))

    truth = GroundTruth(
        assignment={accession(i): cluster_of[i] for i in range(n)},
        planted_vocab={c: sorted(w) for c, w in vocab.items()},
        shared_vocab=sorted(shared),
        edges=[(accession(a), accession(b)) for a, b in edges],
        block_edges=block,
        indegree={accession(i): indeg[i] for i in range(n)},
        cluster_df={c: dict(sorted(df.items())) for c, df in cluster_df.items()},
        external_refs=spec.external_refs,
        spec={**asdict(spec), "cluster_sizes": list(spec.cluster_sizes)},
    )
    return write_export(records), truth


def corpus_from_edges(n: int, edges, external: int = 0) -> bytes:
    """Export-format corpus of ``n`` records with exactly the given citations.

    ``edges`` are (citing index, cited index) pairs; ``external`` extra
    unmatchable references are spread round-robin over the records.
    """
    base = [_base_record(i, 0) for i in range(n)]
    refs = [render_ref(r) for r in base]
    cites = defaultdict(list)
    for a, b in edges:
        cites[a].append(refs[b])
    for k in range(external):
        cites[k % n].append(external_ref(k))
    return write_export(replace(r, cited_refs=tuple(cites[i])) for i, r in enumerate(base))


# --------------------------------------------------------------------------
# partition agreement

def _comb2(x):
    return x * (x - 1) // 2


def adjusted_rand_index(a: Mapping, b: Mapping) -> float:
    """Adjusted Rand index from the pair-counting contingency table.

    Returns 1.0 when both partitions are the same trivial partition (the
    chance-corrected ratio is 0/0 there).
    """
    if set(a) != set(b):
        raise PartitionError("partitions cover different node sets")
    n = len(a)
    pairs = Counter((a[x], b[x]) for x in a)
    sum_ij = sum(_comb2(v) for v in pairs.values())
    sum_a = sum(_comb2(v) for v in Counter(a.values()).values())
    sum_b = sum(_comb2(v) for v in Counter(b.values()).values())
    total = _comb2(n)
    if total == 0:
        return 1.0
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        return 1.0 if sum_ij == expected else 0.0
    return (sum_ij - expected) / (maximum - expected)
