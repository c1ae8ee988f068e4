"""Corpus parsing, city resolution, and node construction."""

import io
import json

import pytest

from bibmig.ingest import (build_nodes, load_gazetteer, normalize_affiliation,
                           parse_corpus, parse_corpus_xml, resolve_city)

from conftest import BLUE, GREEN, RED, example_corpus_lines


class TestParseCorpus:
    def test_running_example(self, example_records):
        assert len(example_records) == 8
        papers_of = {"A1": set(), "A2": set()}
        for record in example_records:
            for author in record.authors:
                papers_of[author].add(record.paper_id)
        assert papers_of["A1"] == {"p1", "p4", "p5", "p7"}
        assert papers_of["A2"] == {"p2", "p3", "p4", "p6", "p8"}

    def test_order_preserved(self, example_records):
        assert [r.paper_id for r in example_records] == [f"p{i}" for i in range(1, 9)]

    def test_empty_stream(self):
        records, skips = parse_corpus([])
        assert records == [] and len(skips) == 0

    def test_missing_year_is_skipped(self):
        records, skips = parse_corpus(['{"paper_id": "x", "authors": ["a"]}'])
        assert records == []
        assert len(skips) == 1
        assert "year" in skips.skipped[0][1]

    @pytest.mark.parametrize("line,reason_part", [
        ("not json", "invalid json"),
        ('{"paper_id": "x", "year": 2000, "authors": []}', "authors"),
        ('{"paper_id": "x", "year": 2000, "authors": ["a", "a"]}', "duplicate author"),
        ('{"year": 2000, "authors": ["a"]}', "paper_id"),
        ('{"paper_id": "x", "year": 1500, "authors": ["a"]}', "outside"),
    ])
    def test_malformed_entries(self, line, reason_part):
        records, skips = parse_corpus([line])
        assert records == []
        assert reason_part in skips.skipped[0][1]

    def test_duplicate_paper_id_skipped(self):
        line = '{"paper_id": "x", "year": 2000, "authors": ["a"]}'
        records, skips = parse_corpus([line, line])
        assert len(records) == 1 and len(skips) == 1

    def test_year_range_configurable(self):
        line = '{"paper_id": "x", "year": 1500, "authors": ["a"]}'
        records, _ = parse_corpus([line], year_range=(1400, 2100))
        assert len(records) == 1

    def test_skip_report_csv(self):
        _, skips = parse_corpus(["nope"])
        buffer = io.StringIO()
        skips.write_csv(buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == "line_number,reason"
        assert lines[1].startswith("1,")


class TestXmlReader:
    def test_small_dump(self):
        xml = """<dblp>
        <article key="x1"><author>a</author><author>b</author><year>2001</year></article>
        <article key="x2"><author>c</author></article>
        </dblp>"""
        records, skips = parse_corpus_xml(io.StringIO(xml))
        assert len(records) == 1
        assert records[0].paper_id == "x1"
        assert records[0].authors == ("a", "b")
        assert len(skips) == 1  # x2 has no year


class TestResolveCity:
    def test_city_level_merge(self):
        gaz = load_gazetteer(io.StringIO(
            "key,city,country,continent,lat,lon\n"
            "mit csail cambridge ma,Cambridge,US,North America,42.36,-71.09\n"
            "harvard univ cambridge,Cambridge,US,North America,42.36,-71.09\n"))
        a = resolve_city("MIT CSAIL, Cambridge MA", gaz)
        b = resolve_city("Harvard Univ., Cambridge", gaz)
        assert a is not None and a is b

    def test_empty_string_misses(self, example_gazetteer):
        assert resolve_city("", example_gazetteer) is None

    def test_unknown_misses(self, example_gazetteer):
        assert resolve_city("Unknown Place", example_gazetteer) is None

    def test_normalization(self):
        assert normalize_affiliation("  Dept. of CS, MIT!  x@y.org ") == "dept of cs mit"

    def test_canonical_name_round_trip(self, example_gazetteer):
        city = resolve_city("Green Univ.", example_gazetteer)
        again = resolve_city(city.name + " univ", example_gazetteer)
        # resolve-key of the canonical entry returns the same City
        assert resolve_city("green univ", example_gazetteer) is city
        assert again is None or again is city

    def test_coordinate_validation(self):
        with pytest.raises(ValueError):
            load_gazetteer(io.StringIO(
                "key,city,country,continent,lat,lon\nx,X,Y,Z,99.0,0.0\n"))


class TestBuildNodes:
    def test_running_example_nodes_and_seeds(self, example_nodes):
        # 9 author-paper pairs: p4 counts twice, once per author
        assert len(example_nodes) == 9
        by = {(n.author_id, n.paper_id): n for n in example_nodes}
        assert by[("A1", "p1")].label == GREEN
        assert by[("A2", "p2")].label == BLUE
        assert by[("A2", "p3")].label == RED
        assert by[("A2", "p6")].label == RED
        assert by[("A1", "p7")].label == RED
        assert by[("A2", "p8")].label == GREEN
        for pair in [("A1", "p4"), ("A2", "p4"), ("A1", "p5")]:
            assert by[pair].label is None

    def test_node_ids_dense_and_sorted(self, example_nodes):
        assert [n.node_id for n in example_nodes] == list(range(9))
        keys = [(n.author_id, n.paper_id) for n in example_nodes]
        assert keys == sorted(keys)

    def test_determinism(self, example_records, example_gazetteer):
        a, _ = build_nodes(example_records, example_gazetteer)
        b, _ = build_nodes(example_records, example_gazetteer)
        assert a == b

    def test_zero_records(self, example_gazetteer):
        nodes, conflicts = build_nodes([], example_gazetteer)
        assert nodes == [] and conflicts == []

    def test_two_authors_no_seeds(self, example_gazetteer):
        records, _ = parse_corpus(
            ['{"paper_id": "q", "year": 2000, "authors": ["x", "y"]}'])
        nodes, _ = build_nodes(records, example_gazetteer)
        assert len(nodes) == 2
        assert all(n.label is None for n in nodes)

    def test_seed_conservation(self, example_records, example_gazetteer):
        nodes, _ = build_nodes(example_records, example_gazetteer)
        resolvable = sum(
            1 for record in example_records
            for author, text in record.raw_affiliations
            if resolve_city(text, example_gazetteer) is not None)
        assert sum(n.label is not None for n in nodes) == resolvable

    def test_seed_conflict_keeps_first(self, example_gazetteer):
        record = json.dumps({
            "paper_id": "q", "year": 2000, "authors": ["x"],
            "affiliations": [{"author": "x", "text": "Green Univ."},
                             {"author": "x", "text": "Red Lab"}]})
        records, _ = parse_corpus([record])
        nodes, conflicts = build_nodes(records, example_gazetteer)
        assert nodes[0].label == GREEN
        assert len(conflicts) == 1 and "conflict" in conflicts[0]
