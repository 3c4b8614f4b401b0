import math
import pathlib

import pytest

import ripple

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"


def toy(tmp_path):
    config = ripple.Config.load(str(DATA / "toy.conf"))
    config.set("artifacts_dir", str(tmp_path / "artifacts"))
    return config


def test_worked_pair_similarities():
    assert math.isclose(ripple.stroke_similarity("4523425111234", "4525111234"), 18 / 26, abs_tol=1e-9)
    assert math.isclose(ripple.zhengma_similarity("WTKF", "SKF"), 0.4, abs_tol=1e-9)
    s = ripple.parse_syllable("jing1")
    assert (s.initial, s.final, s.tone) == ("j", "ing", 1)
    assert ripple.pinyin_similarity("jing1", "jing1") == 1.0


def test_errors_are_typed():
    with pytest.raises(ripple.ValidationError):
        ripple.stroke_similarity("", "1")
    with pytest.raises(ripple.RippleError):
        ripple.Config().set("no_such_key", "1")


def test_config_round_trip():
    c = ripple.Config.parse("seed = 5\ndim = 16\n")
    assert c.get("seed") == "5"
    assert ripple.Config.parse(c.to_text()).to_dict() == c.to_dict()
    assert set(c.to_dict()) == set(ripple.Config.keys())


def test_graph_from_table(tmp_path):
    g = ripple.Graph.from_table(str(DATA / "toy_encoding.tsv"))
    assert len(g) == len(g.characters) > 0
    assert g.edge_count > 0
    neighbors = g.neighbors("惊")
    assert neighbors and all(0 < w <= 1 for _, _, w in neighbors)
    g.save(str(tmp_path / "g.bin"))
    assert ripple.Graph.load(str(tmp_path / "g.bin")) == g


def test_eval_before_train_names_train(tmp_path):
    with pytest.raises(ripple.MissingArtifact, match="train"):
        ripple.run_stage("eval", toy(tmp_path))


def test_toy_pipeline_and_nearest(tmp_path):
    config = toy(tmp_path)
    results = ripple.run_pipeline(config)
    assert [r["stage"] for r in results][-1] == "eval"
    assert not any(r["skipped"] for r in results)
    assert all(r["skipped"] for r in ripple.run_pipeline(config))
    assert "f1=" in results[-1]["report_kv"]

    hits = ripple.nearest(config, "惊", k=3)
    assert len(hits) == 3
    assert all(c != "惊" for c, _ in hits)
    assert [s for _, s in hits] == sorted((s for _, s in hits), reverse=True)
    with pytest.raises(ripple.UnknownCharacter):
        ripple.nearest(config, "龘")

    stages = [e["stage"] for e in ripple.read_manifest(str(tmp_path / "artifacts"))]
    assert "train" in stages and "eval" in stages
