"""Field-tagged bibliographic export parsing and reference resolution keys.

The input format is the plain-text "field tagged" export of citation indexes:

    FN Thomson Reuters Web of Science
    VR 1.0
    PT J
    AU Zitzmann, NU
       Berglundh, T
    TI Definition and prevalence of peri-implant diseases
    J9 J CLIN PERIODONTOL
    PY 2008
    VL 35
    BP 286
    CR Lindhe J, 2008, J CLIN PERIODONTOL, V35, P282
       Roos-Jansaker AM, 2006, J CLIN PERIODONTOL, V33, P290
    UT WOS:000253554700002
    ER

    EF

Tags occupy columns 1-2, continuation lines start with whitespace, ``ER``
closes a record and ``EF`` closes the file. See ``docs/export_format.md``.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Optional, Union

from .errors import NoKeyError, ParseError

YEAR_MIN, YEAR_MAX = 1500, 2100

# Tags that live outside record blocks.
_FILE_TAGS = {"FN", "VR", "EF"}
_TAG_RE = re.compile(r"^([A-Z][A-Z0-9])(?: (.*))?$")
_SOURCE_TAGS = ("J9", "JI", "SO")
_KNOWN_TAGS = {"UT", "AU", "TI", "PY", "VL", "BP", "DI", "AB", "CR", *_SOURCE_TAGS}


class EncodingPolicy(str, enum.Enum):
    STRICT = "strict"        # UTF-8, undecodable bytes are an error
    LATIN1 = "latin1"        # UTF-8, lines that fail fall back to Latin-1
    REPLACE = "replace"      # UTF-8 with U+FFFD replacement


@dataclass(frozen=True)
class Record:
    accession_id: str
    authors: tuple[str, ...] = ()
    title: str = ""
    source: str = ""
    year: Optional[int] = None
    volume: Optional[str] = None
    start_page: Optional[str] = None
    doi: Optional[str] = None
    abstract: str = ""
    cited_refs: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict, hash=False)

    def to_json(self) -> str:
        """One line of the canonical record format."""
        obj = {
            "accession_id": self.accession_id,
            "authors": list(self.authors),
            "title": self.title,
            "source": self.source,
            "year": self.year,
            "volume": self.volume,
            "start_page": self.start_page,
            "doi": self.doi,
            "abstract": self.abstract,
            "cited_refs": list(self.cited_refs),
            "extra": {k: list(v) for k, v in sorted(self.extra.items())},
        }
        return json.dumps(obj, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "Record":
        obj = json.loads(line)
        return cls(
            accession_id=obj["accession_id"],
            authors=tuple(obj.get("authors", ())),
            title=obj.get("title", ""),
            source=obj.get("source", ""),
            year=obj.get("year"),
            volume=obj.get("volume"),
            start_page=obj.get("start_page"),
            doi=obj.get("doi"),
            abstract=obj.get("abstract", ""),
            cited_refs=tuple(obj.get("cited_refs", ())),
            extra={k: tuple(v) for k, v in obj.get("extra", {}).items()},
        )


@dataclass(frozen=True)
class RefKey:
    first_author_normalized: str
    year: int
    source_normalized: str
    volume: Optional[str] = None
    start_page: Optional[str] = None
    doi: Optional[str] = None

    def normalized(self) -> "RefKey":
        return RefKey(
            normalize_text(self.first_author_normalized),
            self.year,
            normalize_text(self.source_normalized),
            _norm_optional(self.volume),
            _norm_optional(self.start_page),
            normalize_doi(self.doi),
        )

    @property
    def bibliographic(self) -> tuple:
        """The key without its DOI, used when either side lacks one."""
        return (self.first_author_normalized, self.year, self.source_normalized,
                self.volume, self.start_page)


@dataclass(frozen=True)
class CitedRef:
    raw: str
    key: Optional[RefKey] = None


_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)
_WS_RE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Uppercase, drop punctuation (periods, hyphens, commas...), collapse spaces."""
    text = _PUNCT_RE.sub("", text.replace("_", "")).upper()
    return _WS_RE.sub(" ", text).strip()


def normalize_doi(doi: Optional[str]) -> Optional[str]:
    if doi is None:
        return None
    doi = doi.strip()
    if doi[:4].upper() == "DOI ":
        doi = doi[4:].strip()
    if doi.startswith("["):
        # "DOI [10.1/a, 10.1/b]" lists alternates; keep the first
        doi = doi.strip("[]").split(",")[0].strip()
    doi = doi.lower()
    return doi or None


def _norm_optional(value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    value = normalize_text(value)
    return value or None


def record_key(record: Record) -> RefKey:
    """Reference key of ``record``; raises :class:`NoKeyError` without authors/year."""
    if not record.authors or not record.authors[0].strip():
        raise NoKeyError(f"record {record.accession_id!r} has no authors")
    if record.year is None:
        raise NoKeyError(f"record {record.accession_id!r} has no year")
    return RefKey(
        normalize_text(record.authors[0]),
        record.year,
        normalize_text(record.source),
        _norm_optional(record.volume),
        _norm_optional(record.start_page),
        normalize_doi(record.doi),
    )


_YEAR_RE = re.compile(r"^\d{4}$")


def parse_cited_ref(line: str) -> CitedRef:
    """Parse ``"Author, Year, Source[, Vvol][, Ppage][, DOI doi]"``.

    Unparseable lines come back with ``key=None``; ``raw`` is always the input.
    """
    body = line.strip()
    doi = None
    m = re.search(r"(?:^|,\s*)DOI\s+(.*)$", body, flags=re.IGNORECASE)
    if m:
        doi = normalize_doi(m.group(1))
        body = body[: m.start()]
    parts = [p.strip() for p in body.split(",")]
    if len(parts) < 3 or not _YEAR_RE.match(parts[1]):
        return CitedRef(line)
    author = normalize_text(parts[0])
    source = normalize_text(parts[2])
    if not author or not source:
        return CitedRef(line)
    volume = page = None
    for part in parts[3:]:
        if len(part) > 1 and part[0] in "Vv" and volume is None:
            volume = _norm_optional(part[1:])
        elif len(part) > 1 and part[0] in "Pp" and page is None:
            page = _norm_optional(part[1:])
    return CitedRef(line, RefKey(author, int(parts[1]), source, volume, page, doi))


def _no_commas(text: str) -> str:
    return _WS_RE.sub(" ", text.replace(",", " ")).strip()


def render_ref(record: Record) -> str:
    """Cited-reference string for ``record`` in the export's CR style."""
    key = record_key(record)
    parts = [_no_commas(record.authors[0]), str(record.year), _no_commas(record.source)]
    if key.volume:
        parts.append("V" + _no_commas(record.volume))
    if key.start_page:
        parts.append("P" + _no_commas(record.start_page))
    if key.doi:
        parts.append("DOI " + key.doi)
    return ", ".join(parts)


# --------------------------------------------------------------------------
# export parsing

def _iter_lines(data: bytes, policy: EncodingPolicy):
    offset = 0
    if data.startswith(b"\xef\xbb\xbf"):
        offset = 3
    for raw in data[offset:].splitlines(keepends=True):
        start = offset
        offset += len(raw)
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            if policy is EncodingPolicy.LATIN1:
                text = raw.decode("latin-1")
            elif policy is EncodingPolicy.REPLACE:
                text = raw.decode("utf-8", errors="replace")
            else:
                raise ParseError(f"undecodable byte in UTF-8 input: {exc.reason}",
                                 start + exc.start) from None
        yield start, text.rstrip("\r\n")


def _build_record(fields: dict[str, list[str]], offset: int) -> Record:
    def joined(tag):
        return " ".join(s.strip() for s in fields.get(tag, ()) if s.strip())

    accession = joined("UT")
    if not accession:
        raise ParseError("record without accession id (UT)", offset)
    year = None
    if "PY" in fields:
        py = joined("PY")
        if not py.isdigit():
            raise ParseError(f"record {accession}: bad year {py!r}", offset)
        year = int(py)
        if not YEAR_MIN <= year <= YEAR_MAX:
            raise ParseError(f"record {accession}: year {year} out of range", offset)
    authors = []
    for line in fields.get("AU", ()):
        authors.extend(a.strip() for a in line.split(";") if a.strip())
    source_tag = next((t for t in _SOURCE_TAGS if t in fields), None)
    extra = {t: tuple(v) for t, v in fields.items()
             if t not in _KNOWN_TAGS or (t in _SOURCE_TAGS and t != source_tag)}
    return Record(
        accession_id=accession,
        authors=tuple(authors),
        title=joined("TI"),
        source=joined(source_tag) if source_tag else "",
        year=year,
        volume=joined("VL") or None,
        start_page=joined("BP") or None,
        doi=normalize_doi(joined("DI") or None),
        abstract=joined("AB"),
        cited_refs=tuple(s.strip() for s in fields.get("CR", ()) if s.strip()),
        extra=extra,
    )


def parse_export(data: Union[bytes, BinaryIO],
                 encoding_policy: EncodingPolicy = EncodingPolicy.STRICT,
                 allow_duplicates: bool = False) -> list[Record]:
    """Parse a field-tagged export into records, in input order.

    Args:
        data: raw bytes or a binary stream.
        encoding_policy: how to treat bytes that are not valid UTF-8.
        allow_duplicates: keep repeated accession ids instead of raising
            (use :func:`dedupe` afterwards).

    Raises:
        ParseError: on truncated records, stray lines, undecodable bytes
            (strict policy) or duplicate accession ids.
    """
    if not isinstance(data, (bytes, bytearray)):
        data = data.read()
    policy = EncodingPolicy(encoding_policy)
    records: list[Record] = []
    seen: dict[str, tuple[int, int]] = {}
    fields: Optional[dict[str, list[str]]] = None
    current: Optional[list[str]] = None
    rec_start = 0

    for offset, line in _iter_lines(bytes(data), policy):
        if not line.strip():
            continue
        if line[0].isspace():
            if current is None:
                raise ParseError("continuation line outside a field", offset)
            current.append(line.strip())
            continue
        m = _TAG_RE.match(line)
        if not m:
            raise ParseError(f"malformed line {line[:40]!r}", offset)
        tag, value = m.group(1), m.group(2) or ""
        if fields is None:
            if tag in _FILE_TAGS or tag == "ER":
                current = None
                continue
            fields, rec_start = {}, offset
        if tag == "ER":
            rec = _build_record(fields, rec_start)
            if rec.accession_id in seen and not allow_duplicates:
                idx, off = seen[rec.accession_id]
                raise ParseError(
                    f"duplicate accession id {rec.accession_id!r}: record {idx} at byte "
                    f"{off} and record {len(records)} at byte {rec_start}")
            seen.setdefault(rec.accession_id, (len(records), rec_start))
            records.append(rec)
            fields = current = None
            continue
        if tag == "EF":
            raise ParseError("end of file tag inside an open record", rec_start)
        current = fields.setdefault(tag, [])
        current.append(value.strip())

    if fields is not None:
        raise ParseError("truncated record: missing ER end tag", rec_start)
    return records


def read_export(path, encoding_policy=EncodingPolicy.STRICT, allow_duplicates=False):
    with open(path, "rb") as fh:
        return parse_export(fh.read(), encoding_policy, allow_duplicates)


def write_export(records: Iterable[Record]) -> bytes:
    """Render records back into the field-tagged export format (UTF-8)."""
    out = ["FN Thomson Reuters Web of Science", "VR 1.0"]

    def emit(tag, values):
        values = [v for v in values if v is not None and v != ""]
        if not values:
            return
        out.append(f"{tag} {values[0]}")
        out.extend(f"   {v}" for v in values[1:])

    for r in records:
        emit("PT", r.extra.get("PT", ()))
        emit("AU", r.authors)
        emit("TI", [r.title])
        emit("J9", [r.source])
        emit("PY", [str(r.year) if r.year is not None else None])
        emit("VL", [r.volume])
        emit("BP", [r.start_page])
        emit("DI", [r.doi])
        emit("AB", [r.abstract])
        emit("CR", r.cited_refs)
        for tag in sorted(r.extra):
            if tag != "PT":
                emit(tag, r.extra[tag])
        emit("UT", [r.accession_id])
        out.append("ER")
        out.append("")
    out.append("EF")
    return ("\n".join(out) + "\n").encode("utf-8")


def dedupe(records: Iterable[Record]) -> tuple[list[Record], int]:
    """Drop repeated accession ids, keeping first occurrences.

    Returns the kept records and the number removed.
    """
    kept, seen, removed = [], set(), 0
    for r in records:
        if r.accession_id in seen:
            removed += 1
            continue
        seen.add(r.accession_id)
        kept.append(r)
    return kept, removed


def write_records(records: Iterable[Record]) -> bytes:
    return "".join(r.to_json() + "\n" for r in records).encode("utf-8")


def read_records(data: Union[bytes, str]) -> list[Record]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return [Record.from_json(line) for line in data.splitlines() if line.strip()]
