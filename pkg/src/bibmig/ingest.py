"""Corpus parsing, affiliation-to-city resolution, and node-set construction.

Input is a line-delimited JSON corpus (one paper per line) plus a CSV
gazetteer mapping normalized affiliation strings to canonical cities.
Affiliations that resolve to the same (city, country) are merged, which is
the only entity resolution performed here: author names are assumed to be
disambiguated upstream. A DBLP-style XML reader is provided as an
alternative front end; both feed the same record type.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, TextIO

DEFAULT_YEAR_RANGE = (1900, 2100)

__all__ = [
    "PublicationRecord",
    "City",
    "Gazetteer",
    "AuthorPaperNode",
    "SkipReport",
    "parse_corpus",
    "parse_corpus_xml",
    "load_gazetteer",
    "resolve_city",
    "build_nodes",
    "normalize_affiliation",
    "NORMALIZATION_POLICIES",
]


@dataclass(frozen=True)
class PublicationRecord:
    """One paper: id, year, author list, and optional seed affiliations."""

    paper_id: str
    year: int
    authors: tuple[str, ...]
    raw_affiliations: tuple[tuple[str, str], ...] = ()  # (author_id, affiliation text)


@dataclass(frozen=True)
class City:
    city_id: str
    name: str
    country: str
    continent: str
    latitude: float
    longitude: float


@dataclass(frozen=True)
class AuthorPaperNode:
    """One (author, paper) pair; the unit that receives a city label."""

    node_id: int
    author_id: str
    paper_id: str
    year: int
    label: str | None = None  # seed city_id if an affiliation resolved


@dataclass
class SkipReport:
    """Input lines rejected during parsing, with the reason for each."""

    skipped: list[tuple[int, str]] = field(default_factory=list)

    def add(self, line_number: int, reason: str) -> None:
        self.skipped.append((line_number, reason))

    def __len__(self) -> int:
        return len(self.skipped)

    def write_csv(self, fh: TextIO) -> None:
        import csv

        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["line_number", "reason"])
        writer.writerows(self.skipped)


# ---------------------------------------------------------------------------
# affiliation normalization
# ---------------------------------------------------------------------------

_EMAIL_RE = re.compile(r"\S+@\S+")
_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)
_WS_RE = re.compile(r"\s+")


def normalize_affiliation(text: str) -> str:
    """Default cleanup: lowercase, drop e-mail-like tokens and punctuation,
    collapse whitespace."""
    text = _EMAIL_RE.sub(" ", text.lower())
    text = _PUNCT_RE.sub(" ", text)
    return _WS_RE.sub(" ", text).strip()


NORMALIZATION_POLICIES: dict[str, Callable[[str], str]] = {
    "default": normalize_affiliation,
    "identity": lambda s: s,
}


class Gazetteer:
    """Deterministic lookup from normalized affiliation strings to cities.

    Backed by a plain dict loaded from CSV. Any object with the same
    ``lookup`` signature (e.g. a caching remote client) can stand in for it.
    """

    def __init__(self, entries: dict[str, City], policy: str = "default"):
        if policy not in NORMALIZATION_POLICIES:
            raise ValueError(f"unknown normalization policy {policy!r}")
        self.entries = entries
        self.policy = policy
        self._normalize = NORMALIZATION_POLICIES[policy]

    def lookup(self, affiliation: str) -> City | None:
        return self.entries.get(self._normalize(affiliation))

    @property
    def cities(self) -> list[City]:
        """Distinct cities, sorted by city_id."""
        return sorted(set(self.entries.values()), key=lambda c: c.city_id)


def _city_id(name: str, country: str) -> str:
    slug = f"{name} {country}".lower()
    return _WS_RE.sub("_", slug)


def load_gazetteer(fh: TextIO, policy: str = "default") -> Gazetteer:
    """Load a CSV with header ``key,city,country,continent,lat,lon``.

    Distinct keys may map to the same city; rows agreeing on (city, country)
    share one City object, which is what merges affiliations at city level.
    """
    import csv

    reader = csv.DictReader(fh)
    required = {"key", "city", "country", "continent", "lat", "lon"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ValueError(f"gazetteer header must contain {sorted(required)}")
    normalize = NORMALIZATION_POLICIES[policy]
    cities: dict[tuple[str, str], City] = {}
    entries: dict[str, City] = {}
    for row in reader:
        name, country = row["city"].strip(), row["country"].strip()
        key = (name, country)
        if key not in cities:
            lat, lon = float(row["lat"]), float(row["lon"])
            if not (-90.0 <= lat <= 90.0):
                raise ValueError(f"latitude out of range for {name}: {lat}")
            if not (-180.0 <= lon <= 180.0):
                raise ValueError(f"longitude out of range for {name}: {lon}")
            cities[key] = City(
                city_id=_city_id(name, country),
                name=name,
                country=country,
                continent=row["continent"].strip(),
                latitude=lat,
                longitude=lon,
            )
        entries[normalize(row["key"])] = cities[key]
    return Gazetteer(entries, policy)


def resolve_city(affiliation: str, gazetteer: Gazetteer) -> City | None:
    """Resolve an affiliation string to a City; a miss returns None."""
    if not affiliation:
        return None
    return gazetteer.lookup(affiliation)


# ---------------------------------------------------------------------------
# corpus parsing
# ---------------------------------------------------------------------------

def parse_corpus(
    lines: Iterable[str],
    year_range: tuple[int, int] = DEFAULT_YEAR_RANGE,
) -> tuple[list[PublicationRecord], SkipReport]:
    """Parse line-delimited JSON records.

    Malformed entries are recorded in the skip report and do not abort the
    parse; an unreadable stream raises at the iterator level.
    """
    records: list[PublicationRecord] = []
    skips = SkipReport()
    seen_papers: set[str] = set()
    for line_number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            skips.add(line_number, f"invalid json: {exc.msg}")
            continue
        record, reason = _record_from_obj(obj, year_range, seen_papers)
        if record is None:
            skips.add(line_number, reason)
            continue
        seen_papers.add(record.paper_id)
        records.append(record)
    return records, skips


def _record_from_obj(
    obj: object,
    year_range: tuple[int, int],
    seen_papers: set[str],
) -> tuple[PublicationRecord | None, str]:
    if not isinstance(obj, dict):
        return None, "record is not an object"
    paper_id = obj.get("paper_id")
    if not isinstance(paper_id, str) or not paper_id:
        return None, "missing paper_id"
    if paper_id in seen_papers:
        return None, f"duplicate paper_id {paper_id}"
    year = obj.get("year")
    if not isinstance(year, int) or isinstance(year, bool):
        return None, "missing or non-integer year"
    if not (year_range[0] <= year <= year_range[1]):
        return None, f"year {year} outside {year_range}"
    authors = obj.get("authors")
    if not isinstance(authors, list) or not authors:
        return None, "missing or empty authors"
    if not all(isinstance(a, str) and a for a in authors):
        return None, "author ids must be non-empty strings"
    if len(set(authors)) != len(authors):
        return None, "duplicate author within record"
    affs: list[tuple[str, str]] = []
    for item in obj.get("affiliations", []) or []:
        if not isinstance(item, dict) or "author" not in item or "text" not in item:
            return None, "malformed affiliation entry"
        affs.append((str(item["author"]), str(item["text"])))
    record = PublicationRecord(
        paper_id=paper_id,
        year=year,
        authors=tuple(authors),
        raw_affiliations=tuple(affs),
    )
    return record, ""


def parse_corpus_xml(
    fh: TextIO,
    year_range: tuple[int, int] = DEFAULT_YEAR_RANGE,
) -> tuple[list[PublicationRecord], SkipReport]:
    """Alternative reader for DBLP-style XML dumps.

    Expects publication elements carrying a ``key`` attribute with
    ``<author>`` and ``<year>`` children. Affiliation seeds are not part of
    that format and come from a separate seed channel if at all.
    """
    records: list[PublicationRecord] = []
    skips = SkipReport()
    seen: set[str] = set()
    tree = ET.parse(fh)
    for idx, elem in enumerate(tree.getroot(), start=1):
        paper_id = elem.get("key") or ""
        year_text = elem.findtext("year") or ""
        authors = tuple(a.text or "" for a in elem.findall("author"))
        obj = {
            "paper_id": paper_id,
            "year": int(year_text) if year_text.isdigit() else None,
            "authors": list(authors),
        }
        record, reason = _record_from_obj(obj, year_range, seen)
        if record is None:
            skips.add(idx, reason)
            continue
        seen.add(record.paper_id)
        records.append(record)
    return records, skips


# ---------------------------------------------------------------------------
# node construction
# ---------------------------------------------------------------------------

def build_nodes(
    records: list[PublicationRecord],
    gazetteer: Gazetteer,
) -> tuple[list[AuthorPaperNode], list[str]]:
    """Emit one node per (author, paper) pair with seed labels where an
    affiliation resolves.

    node_id is assigned in sorted (author_id, paper_id) order, so the node
    set is identical across runs. Conflicting seeds for one pair keep the
    first occurrence in input order; conflicts are returned for logging.
    """
    seeds: dict[tuple[str, str], str] = {}
    conflicts: list[str] = []
    entries: list[tuple[str, str, int]] = []
    for record in records:
        for author in record.authors:
            entries.append((author, record.paper_id, record.year))
        for author, text in record.raw_affiliations:
            if author not in record.authors:
                conflicts.append(
                    f"affiliation for non-author {author} on {record.paper_id} ignored")
                continue
            city = resolve_city(text, gazetteer)
            if city is None:
                continue
            key = (author, record.paper_id)
            if key in seeds:
                if seeds[key] != city.city_id:
                    conflicts.append(
                        f"seed conflict on {key}: kept {seeds[key]}, dropped {city.city_id}")
                continue
            seeds[key] = city.city_id

    entries.sort(key=lambda e: (e[0], e[1]))
    nodes = [
        AuthorPaperNode(
            node_id=i,
            author_id=author,
            paper_id=paper,
            year=year,
            label=seeds.get((author, paper)),
        )
        for i, (author, paper, year) in enumerate(entries)
    ]
    return nodes, conflicts
