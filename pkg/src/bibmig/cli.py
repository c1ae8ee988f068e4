"""Staged pipeline CLI.

Each subcommand reads the previous stage's artifacts from the output
directory and writes its own, so any stage can be rerun in isolation:

    ingest -> build-graph -> propagate -> sketch -> fit -> linkrank -> report

``all`` runs the whole chain. Exit codes: 0 success, 1 usage, 2 data
error. Report artifacts contain no timestamps and all floats are written
with round-tripping repr, so reruns with the same config and seed are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import fit as fitmod
from . import graph as graphmod
from . import linkrank as rankmod
from . import propagate as propmod
from . import sketch as sketchmod
from .config import ConfigError, PipelineConfig, load_config
from .ingest import (AuthorPaperNode, Gazetteer, PublicationRecord, build_nodes,
                     load_gazetteer, parse_corpus)

# artifact names, one set per stage
NODES_CSV = "nodes.csv"
SKIPS_CSV = "skips.csv"
CITIES_CSV = "cities.csv"
INGEST_META = "ingest_meta.json"
GRAPH_TXT = "graph.txt"
LABELS_CSV = "labels.csv"
PROPAGATE_META = "propagate_meta.json"
SKETCHES_JSONL = "sketches.jsonl"
YEARLY_CSV = "yearly_stats.csv"
SKETCH_META = "sketch_meta.json"
FIT_REPORT = "fit_report.json"
EDGES_CSV = "migration_edges.csv"
FREQ_SERIES = "series_frequency.txt"
FREQ_FIT = "frequency_fit.json"
RANKINGS_CSV = "rankings.csv"
GEO_CSV = "geo.csv"
LINKRANK_META = "linkrank_meta.json"
REPORT_JSON = "report.json"

STAGE_ORDER = ["ingest", "build-graph", "propagate", "sketch", "fit", "linkrank", "report"]


class DataError(Exception):
    """Pipeline input/artifact problem; maps to exit code 2."""


def _series_file(name: str) -> str:
    return f"series_{name}.txt"


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(cfg: PipelineConfig, filename: str, produced_by: str) -> Path:
    path = Path(cfg.out) / filename
    if not path.exists():
        raise DataError(
            f"missing artifact {path}; run `bibmig {produced_by}` first")
    return path


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# artifact readers
# ---------------------------------------------------------------------------

def _read_nodes(cfg: PipelineConfig) -> list[AuthorPaperNode]:
    path = _require(cfg, NODES_CSV, "ingest")
    nodes = []
    with path.open() as fh:
        for row in csv.DictReader(fh):
            nodes.append(AuthorPaperNode(
                node_id=int(row["node_id"]),
                author_id=row["author_id"],
                paper_id=row["paper_id"],
                year=int(row["year"]),
                label=row["label"] or None,
            ))
    return nodes


def _read_city_meta(cfg: PipelineConfig) -> dict[str, dict[str, str]]:
    path = _require(cfg, CITIES_CSV, "ingest")
    with path.open() as fh:
        return {row["city_id"]: row for row in csv.DictReader(fh)}


def _read_labels(cfg: PipelineConfig) -> dict[tuple[str, str], str]:
    path = _require(cfg, LABELS_CSV, "propagate")
    with path.open() as fh:
        return {(row["author_id"], row["paper_id"]): row["city_id"]
                for row in csv.DictReader(fh)}


def _read_sketches(cfg: PipelineConfig) -> list[sketchmod.MigrationSketch]:
    path = _require(cfg, SKETCHES_JSONL, "sketch")
    sketches = []
    with path.open() as fh:
        for line in fh:
            obj = json.loads(line)
            stations = tuple((int(s["year"]), s["city"]) for s in obj["stations"])
            sketches.append(sketchmod.MigrationSketch(author_id=obj["author"],
                                                      stations=stations))
    return sketches


def _read_series(path: Path) -> np.ndarray:
    values = []
    with path.open() as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise DataError(f"{path}:{line_number}: not a number: {line!r}") from exc
    return np.asarray(values)


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------

def stage_ingest(cfg: PipelineConfig) -> None:
    if not cfg.corpus:
        raise DataError("no corpus path configured (set `corpus` or --corpus)")
    corpus_path = Path(cfg.corpus)
    if not corpus_path.exists():
        raise DataError(f"corpus file not found: {corpus_path}")
    if not cfg.gazetteer:
        raise DataError("no gazetteer path configured (set `gazetteer` or --gazetteer)")
    gazetteer_path = Path(cfg.gazetteer)
    if not gazetteer_path.exists():
        raise DataError(f"gazetteer file not found: {gazetteer_path}")

    with gazetteer_path.open() as fh:
        gazetteer = load_gazetteer(fh)
    with corpus_path.open() as fh:
        records, skips = parse_corpus(fh, year_range=(cfg.year_min, cfg.year_max))
    nodes, conflicts = build_nodes(records, gazetteer)

    out = _out_dir(cfg)
    with (out / NODES_CSV).open("w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "author_id", "paper_id", "year", "label"])
        for node in nodes:
            writer.writerow([node.node_id, node.author_id, node.paper_id,
                             node.year, node.label or ""])
    with (out / SKIPS_CSV).open("w") as fh:
        skips.write_csv(fh)
    with (out / CITIES_CSV).open("w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["city_id", "name", "country", "continent", "lat", "lon"])
        for city in gazetteer.cities:
            writer.writerow([city.city_id, city.name, city.country, city.continent,
                             _fmt(city.latitude), _fmt(city.longitude)])
    _write_json(out / INGEST_META, {
        "records": len(records),
        "nodes": len(nodes),
        "seeds": sum(1 for n in nodes if n.label is not None),
        "skipped": len(skips),
        "conflicts": conflicts,
    })


def stage_build_graph(cfg: PipelineConfig) -> None:
    nodes = _read_nodes(cfg)
    weights = graphmod.RuleWeights(cfg.lambda1, cfg.lambda2, cfg.lambda3)
    g = graphmod.build_graph(nodes, weights)
    out = _out_dir(cfg)
    with (out / GRAPH_TXT).open("w") as fh:
        graphmod.save_graph(g, fh)


def stage_propagate(cfg: PipelineConfig) -> None:
    nodes = _read_nodes(cfg)
    path = _require(cfg, GRAPH_TXT, "build-graph")
    with path.open() as fh:
        g = graphmod.load_graph(fh)
    lm = propmod.build_label_matrix(nodes)
    if not lm.seed_mask.any():
        raise DataError("no seed labels resolved; propagation has nothing to spread")
    W = graphmod.row_normalize(g) if cfg.normalize else g.matrix
    prop_config = propmod.PropagationConfig(
        max_iterations=cfg.max_iterations,
        tolerance=cfg.tolerance,
        chunk_width=cfg.chunk_width,
    )
    result = propmod.propagate_chunked(W, lm, prop_config)
    assignment, confidence = propmod.readout(result.labels)

    out = _out_dir(cfg)
    assigned = 0
    with (out / LABELS_CSV).open("w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["author_id", "paper_id", "city_id", "confidence"])
        for node in nodes:
            idx = assignment[node.node_id]
            if idx < 0:
                continue
            assigned += 1
            writer.writerow([node.author_id, node.paper_id,
                             result.labels.labels[idx], _fmt(confidence[node.node_id])])
    _write_json(out / PROPAGATE_META, {
        "iterations": result.iterations,
        "converged": result.converged,
        "labels": len(result.labels.labels),
        "assigned": assigned,
        "unassigned": int(len(nodes) - assigned),
    })


def _records_from_nodes(nodes: list[AuthorPaperNode]) -> list[PublicationRecord]:
    by_paper: dict[str, list[AuthorPaperNode]] = defaultdict(list)
    for node in nodes:
        by_paper[node.paper_id].append(node)
    records = []
    for paper_id in sorted(by_paper):
        members = by_paper[paper_id]
        records.append(PublicationRecord(
            paper_id=paper_id,
            year=members[0].year,
            authors=tuple(sorted(n.author_id for n in members)),
        ))
    return records


def stage_sketch(cfg: PipelineConfig) -> None:
    nodes = _read_nodes(cfg)
    labels_by_pair = _read_labels(cfg)
    city_meta = _read_city_meta(cfg)
    labels = {node.node_id: labels_by_pair[(node.author_id, node.paper_id)]
              for node in nodes
              if (node.author_id, node.paper_id) in labels_by_pair}

    extraction = sketchmod.extract_sketches(nodes, labels, cfg.station_cap)
    sketches = extraction.sketches
    move_list = sketchmod.all_moves(sketches)

    out = _out_dir(cfg)
    with (out / SKETCHES_JSONL).open("w") as fh:
        for sk in sketches:
            fh.write(json.dumps({
                "author": sk.author_id,
                "stations": [{"year": year, "city": city} for year, city in sk.stations],
            }, sort_keys=True) + "\n")

    series: dict[str, sketchmod.TimingSeries] = {}
    series["propensity"] = sketchmod.propensities(sketches)
    for k in cfg.kth_moves:
        series[f"kth_move_{k}"] = sketchmod.kth_move_propensities(sketches, k)
    country_of = {cid: meta["country"] for cid, meta in city_meta.items()}
    circulation, circ_stats = sketchmod.brain_circulation(sketches, country_of)
    series["brain_circulation"] = circulation
    t_series, s_series = sketchmod.pooled_arrivals(move_list, cfg.baseline_year)
    series["interarrival"] = t_series
    series["waiting"] = s_series

    for name, ts in series.items():
        with (out / _series_file(name)).open("w") as fh:
            for value in ts.values:
                fh.write(f"{value}\n")

    stats = sketchmod.yearly_stats(_records_from_nodes(nodes), move_list)
    with (out / YEARLY_CSV).open("w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", "publications", "authors", "moves", "ratio"])
        for row in stats:
            writer.writerow([row.year, row.publications, row.authors, row.moves,
                             _fmt(row.ratio)])

    _write_json(out / SKETCH_META, {
        "sketches": len(sketches),
        "dropped_over_cap": extraction.dropped,
        "unlabeled_nodes": extraction.unlabeled_nodes,
        "moves": len(move_list),
        "excluded_zero_gaps": {name: ts.excluded_zeros for name, ts in series.items()},
        "brain_circulation": {
            "returned": circ_stats.returned,
            "mobile": circ_stats.mobile,
            "total": circ_stats.total,
            "excluded_missing_country": circ_stats.excluded_missing_country,
        },
    })


def _fit_report_obj(report: fitmod.FitReport) -> dict:
    return {
        "series": report.series_id,
        "n": report.n,
        "selected": report.selected,
        "families": {
            name: {
                "params": ff.params,
                "loglik": ff.loglik,
                "kl": ff.kl,
                "penalized": ff.penalized,
                "error": ff.error,
            }
            for name, ff in report.results.items()
        },
    }


def _write_plotdata(out: Path, name: str, values: np.ndarray,
                    report: fitmod.FitReport, grid_points: int) -> None:
    import math

    lo = math.floor(values.min())
    hi = math.floor(values.max()) + 1
    edges = np.arange(lo, hi + 1, dtype=float)
    counts, _ = np.histogram(values, bins=edges)
    emp = counts / counts.sum()
    fitted: dict[str, np.ndarray] = {}
    for fam_name, ff in report.results.items():
        if ff.error is not None:
            continue
        family = fitmod.FAMILIES[fam_name]
        params = _params_from_dict(fam_name, ff.params)
        cdf = family.cdf(params, edges)
        fitted[fam_name] = np.diff(cdf)
    with (out / f"plotdata_{name}.csv").open("w") as fh:
        fams = sorted(fitted)
        fh.write("x_lo,x_hi,empirical," + ",".join(fams) + "\n")
        for i in range(len(emp)):
            row = [str(int(edges[i])), str(int(edges[i + 1])), _fmt(emp[i])]
            row += [_fmt(fitted[f][i]) for f in fams]
            fh.write(",".join(row) + "\n")
    if grid_points > 0:
        xs = np.linspace(max(values.min(), 1e-9), values.max(), grid_points)
        curves = {}
        for fam_name, ff in report.results.items():
            if ff.error is not None:
                continue
            family = fitmod.FAMILIES[fam_name]
            params = _params_from_dict(fam_name, ff.params)
            curves[fam_name] = family.pdf(params, xs)
        with (out / f"curves_{name}.csv").open("w") as fh:
            fams = sorted(curves)
            fh.write("x," + ",".join(fams) + "\n")
            for i, x in enumerate(xs):
                fh.write(",".join([_fmt(x)] + [_fmt(curves[f][i]) for f in fams]) + "\n")


def _params_from_dict(family: str, params: dict[str, float]):
    cls = {
        "lognormal": fitmod.LogNormalParams,
        "gamma": fitmod.GammaParams,
        "exponential": fitmod.ExponentialParams,
        "invgauss": fitmod.InverseGaussianParams,
        "powerlaw": fitmod.PowerLawParams,
    }[family]
    return cls(**params)


def stage_fit(cfg: PipelineConfig, series_path: str | None = None) -> None:
    out = _out_dir(cfg)
    if series_path is not None:
        path = Path(series_path)
        if not path.exists():
            raise DataError(f"series file not found: {path}")
        values = _read_series(path)
        if values.size == 0:
            raise DataError(f"series file is empty: {path}")
        try:
            report = fitmod.select_model(values, cfg.fit_families, series_id=path.stem)
        except fitmod.FitError as exc:
            raise DataError(f"cannot fit {path}: {exc}") from exc
        _write_json(out / f"fit_{path.stem}.json", _fit_report_obj(report))
        return

    _require(cfg, SKETCH_META, "sketch")
    names = ["propensity"] + [f"kth_move_{k}" for k in cfg.kth_moves] + \
        ["brain_circulation", "interarrival", "waiting"]
    reports: dict[str, dict] = {}
    lognormal_fit = None
    for name in names:
        path = Path(cfg.out) / _series_file(name)
        if not path.exists():
            continue
        values = _read_series(path)
        if values.size < 2:
            reports[name] = {"series": name, "n": int(values.size),
                             "error": "fewer than two values"}
            continue
        try:
            report = fitmod.select_model(values, cfg.fit_families, series_id=name)
        except fitmod.FitError as exc:
            reports[name] = {"series": name, "n": int(values.size), "error": str(exc)}
            continue
        reports[name] = _fit_report_obj(report)
        _write_plotdata(out, name, values, report, cfg.plot_grid)
        if name == "propensity" and report.results["lognormal"].error is None:
            p = report.results["lognormal"].params
            lognormal_fit = (p["mu"], p["sigma2"])

    job_market = None
    if lognormal_fit is not None:
        mu, sigma2 = lognormal_fit
        sim = fitmod.simulate_poisson_lognormal(
            mu, sigma2, cfg.sim_researchers, cfg.sim_horizon, seed=cfg.seed)
        gaps = np.diff(sim.event_times)
        job_market = {
            "mu": mu,
            "sigma2": sigma2,
            "n_researchers": cfg.sim_researchers,
            "horizon": cfg.sim_horizon,
            "seed": cfg.seed,
            "events": int(sim.event_times.size),
            "mean_count": float(sim.counts.mean()),
            "pooled_memorylessness_gap": (
                fitmod.memorylessness_deviation(gaps) if gaps.size >= 10 else None),
        }
    _write_json(out / FIT_REPORT, {"series": reports, "job_market": job_market})


def stage_linkrank(cfg: PipelineConfig) -> None:
    sketches = _read_sketches(cfg)
    city_meta = _read_city_meta(cfg)
    move_list = sketchmod.all_moves(sketches)
    graph = rankmod.build_migration_graph(move_list)
    out = _out_dir(cfg)

    with (out / EDGES_CSV).open("w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["from_city", "to_city", "weight"])
        A = graph.adjacency
        for i in range(graph.n):
            for k in range(A.indptr[i], A.indptr[i + 1]):
                writer.writerow([graph.cities[i], graph.cities[A.indices[k]],
                                 int(A.data[k])])

    freq = rankmod.frequency_distribution(graph, cfg.min_count)
    with (out / FREQ_SERIES).open("w") as fh:
        for w in freq:
            fh.write(f"{int(w)}\n")
    freq_fit = None
    if freq.size >= 2 and np.unique(freq).size >= 2:
        try:
            freq_fit = _fit_report_obj(fitmod.select_model(
                freq, cfg.fit_families, series_id="frequency"))
        except fitmod.FitError as exc:
            freq_fit = {"series": "frequency", "error": str(exc)}
    _write_json(out / FREQ_FIT, freq_fit)

    if graph.n == 0:
        raise DataError("no moves found; nothing to rank (rerun sketch on richer data)")

    hits_scores = rankmod.hits(graph, cfg.hits_max_iter, cfg.hits_tol, cfg.weighted_hits)
    pr = rankmod.pagerank(graph, cfg.damping, cfg.pagerank_tol, cfg.pagerank_max_iter)
    scores = rankmod.RankScores(cities=graph.cities, hub=hits_scores.hub,
                                authority=hits_scores.authority, pagerank=pr)
    roles = rankmod.classify_cities(scores, cfg.hub_quantile, cfg.authority_quantile)

    with (out / RANKINGS_CSV).open("w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["city", "country", "hub", "authority", "pagerank", "role"])
        order = sorted(range(graph.n), key=lambda i: (-pr[i], graph.cities[i]))
        for i in order:
            city = graph.cities[i]
            country = city_meta.get(city, {}).get("country", "")
            writer.writerow([city, country, _fmt(hits_scores.hub[i]),
                             _fmt(hits_scores.authority[i]), _fmt(pr[i]), roles[city]])

    with (out / GEO_CSV).open("w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lat", "lon", "score", "kind"])
        for kind, vector in (("hub", hits_scores.hub),
                             ("authority", hits_scores.authority),
                             ("pagerank", pr)):
            for i, city in enumerate(graph.cities):
                meta = city_meta.get(city)
                if meta is None:
                    continue
                writer.writerow([meta["lat"], meta["lon"], _fmt(vector[i]), kind])

    _write_json(out / LINKRANK_META, {
        "cities": graph.n,
        "edges": graph.adjacency.nnz,
        "total_moves": graph.total_moves,
        "min_count": cfg.min_count,
        "frequency_series_size": int(freq.size),
        "hits_converged": hits_scores.converged,
        "hits_iterations": hits_scores.iterations,
        "hits_all_zero": hits_scores.all_zero,
    })


def stage_report(cfg: PipelineConfig) -> None:
    out = _out_dir(cfg)
    fit_path = _require(cfg, FIT_REPORT, "fit")
    fits = json.loads(fit_path.read_text())
    freq_fit = json.loads(_require(cfg, FREQ_FIT, "linkrank").read_text())
    sketch_meta = json.loads(_require(cfg, SKETCH_META, "sketch").read_text())

    yearly = []
    with _require(cfg, YEARLY_CSV, "sketch").open() as fh:
        for row in csv.DictReader(fh):
            yearly.append({"year": int(row["year"]),
                           "publications": int(row["publications"]),
                           "authors": int(row["authors"]),
                           "moves": int(row["moves"]),
                           "ratio": float(row["ratio"])})

    rankings = []
    with _require(cfg, RANKINGS_CSV, "linkrank").open() as fh:
        for row in csv.DictReader(fh):
            rankings.append({"city": row["city"], "country": row["country"],
                             "hub": float(row["hub"]),
                             "authority": float(row["authority"]),
                             "pagerank": float(row["pagerank"]),
                             "role": row["role"]})

    timeline = {}
    for label, name in [("years_to_next_move", "propensity"),
                        ("years_to_2nd_move", "kth_move_2"),
                        ("years_to_3rd_move", "kth_move_3"),
                        ("years_to_return", "brain_circulation")]:
        path = Path(cfg.out) / _series_file(name)
        if path.exists():
            values = _read_series(path)
            if values.size:
                stats = fitmod.empirical_stats(values)
                timeline[label] = {"mean": stats.mean, "median": stats.median,
                                   "count": stats.count}

    _write_json(out / REPORT_JSON, {
        "yearly_stats": yearly,
        "fits": fits,
        "frequency_fit": freq_fit,
        "rankings": rankings,
        "career_timeline": timeline,
        "sketch_summary": sketch_meta,
        "config": {
            "lambda1": cfg.lambda1, "lambda2": cfg.lambda2, "lambda3": cfg.lambda3,
            "normalize": cfg.normalize,
            "max_iterations": cfg.max_iterations, "tolerance": cfg.tolerance,
            "station_cap": cfg.station_cap, "min_count": cfg.min_count,
            "damping": cfg.damping, "seed": cfg.seed,
        },
    })


STAGES = {
    "ingest": stage_ingest,
    "build-graph": stage_build_graph,
    "propagate": stage_propagate,
    "sketch": stage_sketch,
    "fit": stage_fit,
    "linkrank": stage_linkrank,
    "report": stage_report,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # spec'd exit codes: usage errors are 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--out", help="output directory for stage artifacts")
    parser.add_argument("--seed", type=int, help="random seed for simulations")
    parser.add_argument("--corpus", help="line-delimited JSON corpus")
    parser.add_argument("--gazetteer", help="gazetteer CSV")
    parser.add_argument("--lambda1", type=float, help="co-author rule weight")
    parser.add_argument("--lambda2", type=float, help="same-author same-year weight")
    parser.add_argument("--lambda3", type=float, help="same-author adjacent-year weight")
    parser.add_argument("--max-iterations", type=int, dest="max_iterations")
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--chunk-width", type=int, dest="chunk_width")
    parser.add_argument("--raw-w", action="store_true", default=None, dest="raw_w",
                        help="propagate on the unnormalized similarity matrix")
    parser.add_argument("--station-cap", type=int, dest="station_cap")
    parser.add_argument("--baseline-year", type=int, dest="baseline_year")
    parser.add_argument("--min-count", type=int, dest="min_count")
    parser.add_argument("--damping", type=float)
    parser.add_argument("--families", dest="families",
                        help="comma-separated fit families")
    parser.add_argument("--year-min", type=int, dest="year_min")
    parser.add_argument("--year-max", type=int, dest="year_max")


def build_parser() -> _Parser:
    parser = _Parser(prog="bibmig", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGE_ORDER + ["all"]:
        stage_parser = sub.add_parser(name, help=f"run the {name} stage")
        _add_common(stage_parser)
        if name in ("fit", "all"):
            stage_parser.add_argument("--series",
                                      help="fit a single series file instead of "
                                           "the sketch stage outputs")
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides = {}
    for key in ("out", "seed", "corpus", "gazetteer", "lambda1", "lambda2", "lambda3",
                "max_iterations", "tolerance", "chunk_width", "station_cap",
                "baseline_year", "min_count", "damping", "year_min", "year_max"):
        overrides[key] = getattr(args, key, None)
    if getattr(args, "raw_w", None):
        overrides["normalize"] = False
    families = getattr(args, "families", None)
    if families:
        overrides["fit_families"] = tuple(f.strip() for f in families.split(","))
    return load_config(args.config, cli_overrides=overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "all":
            for name in STAGE_ORDER:
                if name == "fit":
                    stage_fit(cfg, getattr(args, "series", None))
                else:
                    STAGES[name](cfg)
        elif args.command == "fit":
            stage_fit(cfg, args.series)
        else:
            STAGES[args.command](cfg)
    except (DataError, ConfigError) as exc:
        print(f"bibmig: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
