"""End-to-end pipeline behaviour: artifacts, determinism, exit codes."""

import csv
import json

import pytest

from bibmig.cli import main

from conftest import GREEN, RED


def run(*argv):
    return main(list(argv))


def read_labels(out_dir):
    with (out_dir / "labels.csv").open() as fh:
        return {(row["author_id"], row["paper_id"]): row["city_id"]
                for row in csv.DictReader(fh)}


class TestEndToEnd:
    def test_all_on_example(self, example_inputs, tmp_path):
        corpus, gazetteer = example_inputs
        out = tmp_path / "out"
        assert run("all", "--corpus", str(corpus), "--gazetteer", str(gazetteer),
                   "--out", str(out), "--min-count", "0") == 0

        labels = read_labels(out)
        assert labels[("A1", "p4")] == RED
        assert labels[("A2", "p4")] == RED
        assert labels[("A1", "p5")] == RED

        sketches = [json.loads(line)
                    for line in (out / "sketches.jsonl").read_text().splitlines()]
        by_author = {s["author"]: s["stations"] for s in sketches}
        assert by_author["A1"] == [{"year": 2000, "city": GREEN},
                                   {"year": 2002, "city": RED}]
        assert len(by_author["A2"]) == 3

        report = json.loads((out / "report.json").read_text())
        assert report["career_timeline"]["years_to_2nd_move"]["mean"] == 4.0
        assert (out / "rankings.csv").exists()
        assert (out / "geo.csv").exists()

    def test_stagewise_equals_all(self, example_inputs, tmp_path):
        corpus, gazetteer = example_inputs
        base = ["--corpus", str(corpus), "--gazetteer", str(gazetteer),
                "--min-count", "0"]
        out_a = tmp_path / "a"
        assert run("all", *base, "--out", str(out_a)) == 0
        out_b = tmp_path / "b"
        for stage in ["ingest", "build-graph", "propagate", "sketch", "fit",
                      "linkrank", "report"]:
            assert run(stage, *base, "--out", str(out_b)) == 0, stage
        assert (out_a / "report.json").read_bytes() == \
            (out_b / "report.json").read_bytes()

    def test_determinism_byte_identical(self, example_inputs, tmp_path):
        corpus, gazetteer = example_inputs
        outs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            assert run("all", "--corpus", str(corpus), "--gazetteer", str(gazetteer),
                       "--out", str(out), "--seed", "42", "--min-count", "0") == 0
            outs.append(out)
        a, b = outs
        for artifact in sorted(p.name for p in a.iterdir()):
            assert (a / artifact).read_bytes() == (b / artifact).read_bytes(), artifact


class TestErrors:
    def test_missing_artifact_names_prior_stage(self, tmp_path, capsys):
        assert run("build-graph", "--out", str(tmp_path / "empty")) == 2
        err = capsys.readouterr().err
        assert "ingest" in err

    def test_propagate_requires_graph(self, example_inputs, tmp_path, capsys):
        corpus, gazetteer = example_inputs
        out = tmp_path / "out"
        assert run("ingest", "--corpus", str(corpus), "--gazetteer", str(gazetteer),
                   "--out", str(out)) == 0
        assert run("propagate", "--out", str(out)) == 2
        assert "build-graph" in capsys.readouterr().err

    def test_fit_on_empty_series_file(self, tmp_path, capsys):
        empty = tmp_path / "series.txt"
        empty.write_text("")
        assert run("fit", "--out", str(tmp_path / "out"),
                   "--series", str(empty)) == 2
        assert "empty" in capsys.readouterr().err

    def test_fit_on_series_file(self, tmp_path):
        series = tmp_path / "gaps.txt"
        series.write_text("".join(f"{v}\n" for v in [3, 5, 4, 6, 7, 5, 4, 8, 3, 5]))
        out = tmp_path / "out"
        assert run("fit", "--out", str(out), "--series", str(series)) == 0
        report = json.loads((out / "fit_gaps.json").read_text())
        assert report["selected"] in {"lognormal", "gamma", "exponential",
                                      "invgauss", "powerlaw"}

    def test_usage_error_exits_one(self):
        with pytest.raises(SystemExit) as excinfo:
            run("no-such-command")
        assert excinfo.value.code == 1

    def test_missing_corpus_is_data_error(self, tmp_path, capsys):
        assert run("ingest", "--corpus", str(tmp_path / "nope.jsonl"),
                   "--gazetteer", str(tmp_path / "nope.csv"),
                   "--out", str(tmp_path / "out")) == 2
        assert "not found" in capsys.readouterr().err


class TestConfig:
    def test_config_file_and_overrides(self, example_inputs, tmp_path, monkeypatch):
        corpus, gazetteer = example_inputs
        config = tmp_path / "pipeline.cfg"
        config.write_text(
            f"corpus = {corpus}\n"
            f"gazetteer = {gazetteer}\n"
            f"out = {tmp_path / 'from_config'}\n"
            "# comment line\n"
            "lambda2 = 3.0\n"
            "min_count = 0\n")
        assert run("all", "--config", str(config)) == 0
        assert (tmp_path / "from_config" / "report.json").exists()

        # env var beats file; flag beats env
        monkeypatch.setenv("BIBMIG_OUT", str(tmp_path / "from_env"))
        assert run("ingest", "--config", str(config)) == 0
        assert (tmp_path / "from_env" / "nodes.csv").exists()
        assert run("ingest", "--config", str(config),
                   "--out", str(tmp_path / "from_flag")) == 0
        assert (tmp_path / "from_flag" / "nodes.csv").exists()

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        config = tmp_path / "bad.cfg"
        config.write_text("rule_weight = 3\n")
        assert run("ingest", "--config", str(config)) == 2
        assert "unknown config key" in capsys.readouterr().err

    def test_raw_w_flag(self, example_inputs, tmp_path):
        corpus, gazetteer = example_inputs
        out = tmp_path / "raw"
        base = ["--corpus", str(corpus), "--gazetteer", str(gazetteer),
                "--out", str(out)]
        assert run("ingest", *base) == 0
        assert run("build-graph", *base) == 0
        # raw-W mode keeps the unnormalized iteration available; on this
        # fixture it must still fill the missing labels
        assert run("propagate", *base, "--raw-w", "--max-iterations", "12") == 0
        labels = read_labels(out)
        assert labels[("A1", "p4")] == RED
