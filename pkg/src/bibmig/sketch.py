"""Migration sketches and derived timing series.

A sketch is the per-author list of distinct cities ordered by first
appearance year; consecutive stations define moves. Publication years are
the only timing signal, so all durations are integer years. Two cities can
first appear in the same year; the resulting zero-length durations are
excluded from every timing series and counted separately, because the
fitted densities live on positive support.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from .ingest import AuthorPaperNode, PublicationRecord

__all__ = [
    "MigrationSketch",
    "Move",
    "TimingSeries",
    "SketchExtraction",
    "CirculationStats",
    "YearStat",
    "extract_sketches",
    "moves",
    "all_moves",
    "propensities",
    "kth_move_propensities",
    "brain_circulation",
    "pooled_arrivals",
    "yearly_stats",
    "DEFAULT_STATION_CAP",
]

DEFAULT_STATION_CAP = 10


@dataclass(frozen=True)
class MigrationSketch:
    author_id: str
    stations: tuple[tuple[int, str], ...]  # (first appearance year, city_id)


@dataclass(frozen=True)
class Move:
    author_id: str
    from_city: str
    to_city: str
    at_year: int   # year of the first publication at to_city
    ordinal: int   # 1-based position within the author's sketch


@dataclass
class TimingSeries:
    kind: str
    values: list[int]
    k: int | None = None
    excluded_zeros: int = 0


@dataclass
class SketchExtraction:
    sketches: list[MigrationSketch]
    dropped: int           # sketches over the station cap
    unlabeled_nodes: int   # nodes without a city assignment


@dataclass
class CirculationStats:
    returned: int
    mobile: int
    total: int
    excluded_missing_country: int


@dataclass(frozen=True)
class YearStat:
    year: int
    publications: int
    authors: int
    moves: int
    ratio: float


def extract_sketches(
    nodes: list[AuthorPaperNode],
    labels: Mapping[int, str],
    station_cap: int = DEFAULT_STATION_CAP,
) -> SketchExtraction:
    """Collapse labeled nodes into per-author station lists.

    Nodes missing from ``labels`` are skipped and counted. Within an author
    the papers are ordered by (year, paper_id); a city enters the sketch at
    its first appearance only, so returning to an earlier city is invisible
    by construction. Sketches with more than ``station_cap`` stations are
    dropped as implausible.
    """
    per_author: dict[str, list[tuple[int, str, str]]] = defaultdict(list)
    unlabeled = 0
    for node in nodes:
        city = labels.get(node.node_id)
        if city is None:
            unlabeled += 1
            continue
        per_author[node.author_id].append((node.year, node.paper_id, city))

    sketches: list[MigrationSketch] = []
    dropped = 0
    for author in sorted(per_author):
        entries = sorted(per_author[author])
        seen: set[str] = set()
        stations: list[tuple[int, str]] = []
        for year, _paper, city in entries:
            if city not in seen:
                seen.add(city)
                stations.append((year, city))
        if len(stations) > station_cap:
            dropped += 1
            continue
        sketches.append(MigrationSketch(author_id=author, stations=tuple(stations)))
    return SketchExtraction(sketches=sketches, dropped=dropped, unlabeled_nodes=unlabeled)


def moves(sketch: MigrationSketch) -> list[Move]:
    """One move per consecutive station pair."""
    out = []
    for k in range(1, len(sketch.stations)):
        prev_year, prev_city = sketch.stations[k - 1]
        year, city = sketch.stations[k]
        out.append(Move(author_id=sketch.author_id, from_city=prev_city,
                        to_city=city, at_year=year, ordinal=k))
    return out


def all_moves(sketches: Iterable[MigrationSketch]) -> list[Move]:
    result: list[Move] = []
    for sketch in sketches:
        result.extend(moves(sketch))
    return result


def _station_filter(
    city_meta: Mapping[str, object] | None,
    continent: str | None,
    country: str | None,
):
    if continent is None and country is None:
        return lambda city: True
    if city_meta is None:
        raise ValueError("origin filtering requires city metadata")

    def keep(city: str) -> bool:
        meta = city_meta.get(city)
        if meta is None:
            return False
        if country is not None and getattr(meta, "country") != country:
            return False
        if continent is not None and getattr(meta, "continent") != continent:
            return False
        return True

    return keep


def propensities(
    sketches: Iterable[MigrationSketch],
    city_meta: Mapping[str, object] | None = None,
    continent: str | None = None,
    country: str | None = None,
) -> TimingSeries:
    """Years between consecutive stations, pooled across authors.

    Optionally restricted to moves originating from one continent or
    country (judged on the from-city).
    """
    keep = _station_filter(city_meta, continent, country)
    values: list[int] = []
    zeros = 0
    for sketch in sketches:
        for k in range(1, len(sketch.stations)):
            if not keep(sketch.stations[k - 1][1]):
                continue
            gap = sketch.stations[k][0] - sketch.stations[k - 1][0]
            if gap > 0:
                values.append(gap)
            else:
                zeros += 1
    return TimingSeries(kind="propensity", values=values, excluded_zeros=zeros)


def kth_move_propensities(sketches: Iterable[MigrationSketch], k: int) -> TimingSeries:
    """Years from the first station to the k-th move, for authors with at
    least k moves. Equals the sum of the author's first k propensities."""
    if k < 2:
        raise ValueError("kth move propensity is defined for k >= 2")
    values: list[int] = []
    zeros = 0
    for sketch in sketches:
        if len(sketch.stations) <= k:
            continue
        span = sketch.stations[k][0] - sketch.stations[0][0]
        if span > 0:
            values.append(span)
        else:
            zeros += 1
    return TimingSeries(kind="kth_move_propensity", values=values, k=k, excluded_zeros=zeros)


def brain_circulation(
    sketches: Iterable[MigrationSketch],
    country_of: Mapping[str, str],
) -> tuple[TimingSeries, CirculationStats]:
    """Years from first leaving the home country (country of station 1)
    until the first station back in it.

    Stations are the only signal, so returns are detected at country
    granularity; same-city returns cannot be observed at all.
    """
    values: list[int] = []
    zeros = 0
    returned = mobile = total = excluded = 0
    for sketch in sketches:
        total += 1
        if len(sketch.stations) < 2:
            continue
        countries = [country_of.get(city) for _year, city in sketch.stations]
        if any(c is None for c in countries):
            excluded += 1
            continue
        mobile += 1
        home = countries[0]
        departure_year = None
        for (year, _city), country in zip(sketch.stations, countries):
            if departure_year is None:
                if country != home:
                    departure_year = year
            elif country == home:
                returned += 1
                span = year - departure_year
                if span > 0:
                    values.append(span)
                else:
                    zeros += 1
                break
    series = TimingSeries(kind="brain_circulation", values=values, excluded_zeros=zeros)
    return series, CirculationStats(returned=returned, mobile=mobile, total=total,
                                    excluded_missing_country=excluded)


def pooled_arrivals(
    move_list: Iterable[Move],
    baseline_year: int | None = None,
) -> tuple[TimingSeries, TimingSeries]:
    """Inter-arrival gaps of the pooled move process and their cumulative
    waiting times.

    Move years are pooled across all authors and sorted; equal years
    produce zero gaps which are excluded and counted. With a baseline year
    the first gap is measured from it rather than from the first event.
    """
    years = sorted(m.at_year for m in move_list)
    inter: list[int] = []
    zeros = 0
    prev = baseline_year if baseline_year is not None else (years[0] if years else None)
    start = 0 if baseline_year is not None else 1
    for year in years[start:]:
        gap = year - prev
        if gap > 0:
            inter.append(gap)
        else:
            zeros += 1
        prev = year
    waiting = list(_cumsum(inter))
    t_series = TimingSeries(kind="pooled_interarrival", values=inter, excluded_zeros=zeros)
    s_series = TimingSeries(kind="pooled_waiting", values=waiting, excluded_zeros=zeros)
    return t_series, s_series


def _cumsum(values: list[int]):
    total = 0
    for v in values:
        total += v
        yield total


def yearly_stats(
    records: list[PublicationRecord],
    move_list: Iterable[Move],
) -> list[YearStat]:
    """Per-year publications, active authors, moves, and moves/authors."""
    if not records:
        return []
    pubs: dict[int, int] = defaultdict(int)
    authors: dict[int, set[str]] = defaultdict(set)
    per_year_moves: dict[int, int] = defaultdict(int)
    for record in records:
        pubs[record.year] += 1
        for author in record.authors:
            authors[record.year].add(author)
    for move in move_list:
        per_year_moves[move.at_year] += 1
    lo = min(pubs)
    hi = max(max(pubs), max(per_year_moves, default=lo))
    out = []
    for year in range(lo, hi + 1):
        n_pubs = pubs.get(year, 0)
        n_authors = len(authors.get(year, ()))
        n_moves = per_year_moves.get(year, 0)
        ratio = n_moves / n_authors if n_authors else 0.0
        out.append(YearStat(year=year, publications=n_pubs, authors=n_authors,
                            moves=n_moves, ratio=ratio))
    return out
