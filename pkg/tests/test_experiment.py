import json

import pytest

from oilevents.errors import ConfigError, EmptyDataset
from oilevents.experiment import ExperimentConfig, load_sentences, new_run_dir, run_experiment
from oilevents.synthetic import generate_standoff, write_standoff


@pytest.fixture(scope="module")
def brat_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("brat")
    write_standoff(d, generate_standoff(30, seed=2))
    return d


def test_config_defaults_and_paths(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"corpus": "data.json"}))
    cfg = ExperimentConfig.load(tmp_path / "c.json")
    assert cfg.corpus == str(tmp_path / "data.json")
    assert (cfg.setup, cfg.beta, cfg.k, cfg.folds, cfg.seeds) == ("Combo2", 2.0, 1, 5, [0])
    assert str(cfg.span_strategy()) == "SelfAttentiveSpan"
    assert cfg.train_config(7).seed == 7


def test_config_window_radius():
    cfg = ExperimentConfig.from_dict({"corpus": "x", "strategy": "FixedWindow", "r": 3})
    assert cfg.span_strategy().r == 3


@pytest.mark.parametrize("bad", [
    {}, {"corpus": "x", "nonsense": 1}, {"corpus": "x", "setup": "Combo9"}, {"corpus": "x", "seeds": []},
    {"corpus": "x", "folds": 1}, {"corpus": "x", "beta": 0}, {"corpus": "x", "properties": ["mood"]},
    {"corpus": "x", "strategy": "Bogus"}, {"corpus": "x", "train": {"epochz": 3}},
])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_config_unreadable(tmp_path):
    (tmp_path / "c.json").write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "c.json")


def test_config_hash_ignores_output_dir():
    a = ExperimentConfig.from_dict({"corpus": "x", "output_dir": "a"})
    b = ExperimentConfig.from_dict({"corpus": "x", "output_dir": "b"})
    c = ExperimentConfig.from_dict({"corpus": "x", "beta": 3.0})
    assert a.hash == b.hash != c.hash


def test_run_dir_suffix(tmp_path):
    assert new_run_dir(tmp_path, "r").name == "r"
    assert new_run_dir(tmp_path, "r").name == "r-1"
    assert new_run_dir(tmp_path, "r").name == "r-2"


def test_load_sentences(brat_dir, tmp_path):
    assert len(load_sentences(brat_dir)) == 30
    (tmp_path / "empty").mkdir()
    with pytest.raises(EmptyDataset):
        load_sentences(tmp_path / "empty")


def test_two_seed_run(brat_dir, tmp_path):
    cfg = ExperimentConfig.from_dict({"corpus": str(brat_dir), "seeds": [0, 1], "folds": 3, "max_folds": 2,
                                      "properties": ["polarity"], "train": {"epochs": 2, "hidden": 16},
                                      "encoder": "hash:dim=16,seed=0"})
    run_dir, agg = run_experiment(cfg, run_name="t", output_dir=tmp_path)
    folds = sorted(p.relative_to(run_dir).as_posix() for p in run_dir.glob("seed*/fold*.json"))
    assert folds == ["seed0/fold0.json", "seed0/fold1.json", "seed1/fold0.json", "seed1/fold1.json"]
    per = [json.loads((run_dir / f).read_text()) for f in folds]
    for task in ("EMD", "ED", "ARP", "polarity"):
        f1s = [p[task]["macro_f1"] for p in per]
        assert agg[task].per_fold_f1 == f1s
        assert agg[task].macro_f1 == pytest.approx(sum(f1s) / 4)
    saved = json.loads((run_dir / "aggregate.json").read_text())
    assert set(saved) >= {"EMD", "ED", "ARP", "polarity"}
    assert json.loads((run_dir / "config.json").read_text())["config_hash"] == cfg.hash
    man = json.loads((run_dir / "model" / "manifest.json").read_text())
    assert man["config_hash"] == cfg.hash and "EMD" in man["metrics"]
    assert "EMD" in (run_dir / "summary.txt").read_text()
