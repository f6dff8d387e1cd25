import json
import subprocess
import sys

import pytest

from frontmap.cli import main, read_config_file
from frontmap.community import read_partition
from frontmap.pipeline import PipelineConfig, StageError, run_pipeline
from frontmap.synthgen import adjusted_rand_index


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "-o", str(out), "--seed", "42"]) == 0
    return out


def test_help_exits_cleanly():
    proc = subprocess.run([sys.executable, "-m", "frontmap", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "pipeline" in proc.stdout


def test_usage_error_is_exit_1(capsys):
    with pytest.raises(SystemExit) as err:
        main(["pipeline"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 1


def test_bad_format_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["pipeline", "x.txt", "-o", str(tmp_path), "--formats", "gexf"])
    assert err.value.code == 1


def test_empty_input_fails_without_artifacts(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_bytes(b"")
    out = tmp_path / "out"
    assert main(["pipeline", str(empty), "-o", str(out)]) == 2
    assert not out.exists() or not any(out.iterdir())


def test_missing_file_is_data_error(tmp_path):
    assert main(["pipeline", str(tmp_path / "nope.txt"), "-o", str(tmp_path / "o")]) == 2


def test_parse_error_is_data_error(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"AU Doe, J\nUT WOS:1\n")
    assert main(["ingest", str(bad), "-o", str(tmp_path / "r.jsonl")]) == 2


def test_single_front_is_numerical_failure(tmp_path, synth_dir):
    # every planted cluster has 50 papers, so none survives and CA has no rows
    out = tmp_path / "out"
    code = main(["pipeline", str(synth_dir / "corpus.txt"), "-o", str(out),
                 "--min-indegree", "0", "--min-front-size", "51"])
    assert code == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "failed" and manifest["failed_stage"] == "ca"
    for name in manifest["artifacts"]:
        assert (out / name).stat().st_size > 0


def test_stage_error_names_stage(tmp_path):
    empty = tmp_path / "e.txt"
    empty.write_bytes(b"")
    with pytest.raises(StageError) as err:
        run_pipeline(PipelineConfig(inputs=[str(empty)], output_dir=str(tmp_path / "o")))
    assert err.value.stage == "ingest"


def test_pipeline_manifest(tmp_path, synth_dir):
    out = tmp_path / "run"
    assert main(["pipeline", str(synth_dir / "corpus.txt"), "-o", str(out), "--min-indegree", "0",
                 "--provenance", "(material or biomaterials) AND dental"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    truth = json.loads((synth_dir / "truth.json").read_text())
    c = manifest["counts"]
    assert c["records"] == 200 and c["edges"] == len(truth["edges"])
    assert c["core_nodes"] == 200 and c["fronts"] == 4
    assert manifest["config"]["provenance"].startswith("(material")
    assert manifest["config"]["min_indegree"] == 0
    for name in manifest["artifacts"]:
        assert (out / name).stat().st_size > 0
    assert set(manifest["timings_s"]) == {"ingest", "graph", "core", "cluster", "mine", "ca"}
    part = read_partition((out / "partition.tsv").read_bytes())
    assert adjusted_rand_index(part, truth["assignment"]) >= 0.95


def test_defaults_match_documented_values():
    cfg = PipelineConfig()
    assert (cfg.min_indegree, cfg.seed, cfg.resolution, cfg.min_front_size, cfg.top_k,
            cfg.top_papers, cfg.min_df) == (6, 1, 1.0, 50, 10, 5, 2)


def test_config_file_and_precedence(tmp_path, synth_dir):
    conf = tmp_path / "run.conf"
    conf.write_text("# overrides\nmin-indegree = 0\nmin_front_size = 10\nseed = 3\nno_plot = yes\n")
    assert read_config_file(conf) == {"min_indegree": "0", "min_front_size": "10",
                                      "seed": "3", "no_plot": True}
    out = tmp_path / "a"
    assert main(["--config", str(conf), "pipeline", str(synth_dir / "corpus.txt"),
                 "-o", str(out), "--seed", "9"]) == 0
    cfg = json.loads((out / "manifest.json").read_text())["config"]
    assert cfg["min_indegree"] == 0 and cfg["min_front_size"] == 10
    assert cfg["seed"] == 9           # flag beats file
    assert cfg["plot"] is False
    assert cfg["top_k"] == 10         # untouched default


def test_config_unknown_key(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = red\n")
    with pytest.raises(SystemExit) as err:
        main(["--config", str(conf), "synth", "-o", str(tmp_path)])
    assert err.value.code == 1


def test_stage_commands_reproduce_pipeline(tmp_path, synth_dir):
    corpus = str(synth_dir / "corpus.txt")
    one = tmp_path / "one"
    assert main(["pipeline", corpus, "-o", str(one), "--min-indegree", "3"]) == 0
    s = tmp_path / "stages"
    s.mkdir()
    rec, edges = str(s / "records.jsonl"), str(s / "graph.edges.tsv")
    assert main(["ingest", corpus, "-o", rec]) == 0
    assert main(["graph", "--records", rec, "-o", edges, "--match-report", str(s / "m.json")]) == 0
    assert main(["core", "--records", rec, "--edges", edges, "-o", str(s), "--min-indegree", "3"]) == 0
    assert main(["cluster", "--nodes", str(s / "core.nodes.txt"), "--edges", str(s / "core.edges.tsv"),
                 "-o", str(s)]) == 0
    assert main(["mine", "--records", rec, "--fronts", str(s / "fronts.json"), "-o", str(s)]) == 0
    assert main(["ca", "--contingency", str(s / "contingency.tsv"), "-o", str(s)]) == 0
    assert main(["report", "--records", rec, "--edges", edges, "--core-nodes", str(s / "core.nodes.txt"),
                 "--fronts", str(s / "fronts.json"), "-o", str(s)]) == 0
    for name in ("records.jsonl", "graph.edges.tsv", "core.nodes.txt", "partition.tsv",
                 "fronts.json", "contingency.tsv", "ca_coords.tsv", "ca_plot.svg", "fronts.tsv",
                 "terms.tsv", "report.txt", "interactions.tsv", "core.graphml", "core.dot"):
        assert (s / name).read_bytes() == (one / name).read_bytes(), name


def test_top_fraction_mode(tmp_path, synth_dir):
    out = tmp_path / "tf"
    assert main(["pipeline", str(synth_dir / "corpus.txt"), "-o", str(out),
                 "--top-fraction", "0.2", "--min-front-size", "5"]) == 0
    c = json.loads((out / "manifest.json").read_text())["counts"]
    assert c["core_nodes"] >= 40


def test_every_flag_has_help():
    import argparse
    from frontmap.cli import build_parser
    parser = build_parser()
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in sub.choices.items():
        for action in sp._actions:
            if isinstance(action, argparse._HelpAction):
                continue
            assert action.help, f"{name} {action.dest}"
