import pytest

from aelab import config
from aelab.errors import ConfigError


def write(tmp_path, text):
    p = tmp_path / "exp.cfg"
    p.write_text(text)
    return p


def test_parse_kv_file(tmp_path):
    p = write(tmp_path, """
# a comment
name = demo
train.epochs = 5  # trailing comment

dataset.kind = circle
""")
    pairs = config.parse_kv_file(p)
    assert pairs == {"name": "demo", "train.epochs": "5", "dataset.kind": "circle"}


def test_parse_rejects_non_kv_lines(tmp_path):
    p = write(tmp_path, "just some words\n")
    with pytest.raises(ConfigError, match="key = value"):
        config.parse_kv_file(p)


def test_load_config_typed_values(tmp_path):
    p = write(tmp_path, """
name = sweep1
seed = 7
dataset.kind = gaussians
dataset.means = 1 0 ; -1 0
dataset.stds = 0.3, 0.3
arch.encoder = 8, 2
arch.decoder = 8
train.modes = standard, icrst, trst
train.p_grid = 0.0 0.5 1.0
train.per_sample_flag = true
eval.classifiers = knn, mlp
analysis.mi = yes
""")
    cfg = config.load_config(p)
    assert cfg.name == "sweep1" and cfg.seed == 7
    assert cfg.dataset_means == [[1.0, 0.0], [-1.0, 0.0]]
    assert cfg.dataset_stds == [0.3, 0.3]
    assert cfg.arch_encoder == [8, 2] and cfg.arch_decoder == [8]
    assert cfg.train_modes == ["standard", "icrst", "trst"]
    assert cfg.train_p_grid == [0.0, 0.5, 1.0]
    assert cfg.train_per_sample_flag is True
    assert cfg.eval_classifiers == ["knn", "mlp"]
    assert cfg.analysis_mi is True


def test_load_config_collects_all_violations(tmp_path):
    p = write(tmp_path, """
dataset.kind = nonsense
train.epochs = 0
train.learning_rate = -1
eval.folds = 1
bogus.key = 3
""")
    with pytest.raises(ConfigError) as exc:
        config.load_config(p)
    msg = str(exc.value)
    for frag in ("dataset.kind", "train.epochs", "train.learning_rate",
                 "eval.folds", "bogus.key"):
        assert frag in msg, f"missing violation for {frag}"


def test_validate_conditional_requirements(tmp_path):
    cfg = config.ExperimentConfig(dataset_kind="csv")
    problems = config.validate(cfg)
    assert any("dataset.path" in p for p in problems)
    assert any("dataset.label_column" in p for p in problems)
    cfg = config.ExperimentConfig(dataset_kind="idx")
    problems = config.validate(cfg)
    assert any("dataset.images" in p for p in problems)
    cfg = config.ExperimentConfig(dataset_means=[[0.0]], dataset_stds=[1.0, 2.0])
    assert any("dataset.stds" in p for p in config.validate(cfg))
    assert config.validate(config.ExperimentConfig()) == []


def test_run_specs_expand_p_grid():
    cfg = config.ExperimentConfig(train_modes=["standard", "icrst", "trst"],
                                  train_p_grid=[0.0, 1.0])
    assert config.run_specs(cfg) == [
        ("standard", None), ("icrst", 0.0), ("icrst", 1.0), ("trst", None)
    ]


def test_run_name():
    assert config.run_name("standard", None, 7) == "standard_seed7"
    assert config.run_name("icrst", 0.2, 7) == "icrst_p0.2_seed7"
    assert config.run_name("trst", None, 0) == "trst_seed0"
