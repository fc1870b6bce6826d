"""Plain-text experiment configuration.

Format: one `key = value` pair per line, `#` comments, blank lines ignored.
Keys are dotted (dataset.kind, train.epochs, ...). Lists are comma- or
whitespace-separated; vectors of vectors use `;` between vectors.

Validation is all-at-once: every violation is reported in a single
ConfigError before any work starts.
"""

import os
from dataclasses import dataclass, field

from .errors import ConfigError

_ACTIVATIONS = ("identity", "leaky_relu", "sigmoid")
_MODES = ("standard", "icrst", "trst")
_CLASSIFIERS = ("knn", "gnb", "mlp")
_DATASET_KINDS = ("gaussians", "circle", "csv", "idx", "breastcancer")


def parse_kv_file(path):
    pairs = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError([f"{path}:{line_no}: expected 'key = value', got {raw.strip()!r}"])
            key, value = line.split("=", 1)
            pairs[key.strip()] = value.strip()
    return pairs


def _floats(text):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _ints(text):
    return [int(tok) for tok in text.replace(",", " ").split()]


def _strings(text):
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _bool(text):
    if text.lower() in ("true", "yes", "1"):
        return True
    if text.lower() in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    seed: int = 0
    out: str = "runs"
    workers: int = 1
    # dataset
    dataset_kind: str = "gaussians"
    dataset_path: str = ""
    dataset_label_column: str = ""
    dataset_images: str = ""
    dataset_labels: str = ""
    dataset_means: list = field(default_factory=lambda: [[-2.0, 0.0], [2.0, 0.0]])
    dataset_stds: list = field(default_factory=lambda: [0.5, 0.5])
    dataset_per_class: int = 500
    dataset_radius: float = 1.0
    dataset_noise: float = 0.02
    dataset_count: int = 1000
    dataset_subset: int = 0  # 0 = use all rows
    preprocess: str = "none"
    # architecture
    arch_preset: str = ""
    arch_encoder: list = field(default_factory=lambda: [16, 2])
    arch_decoder: list = field(default_factory=lambda: [16])
    arch_hidden_activation: str = "leaky_relu"
    arch_output_activation: str = "identity"
    # training
    train_modes: list = field(default_factory=lambda: ["standard", "icrst"])
    train_p_grid: list = field(default_factory=lambda: [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    train_epochs: int = 50
    train_batch_size: int = 512
    train_learning_rate: float = 1e-3
    train_per_sample_flag: bool = False
    # evaluation
    eval_classifiers: list = field(default_factory=lambda: ["mlp"])
    eval_folds: int = 10
    eval_knn_k: int = 5
    eval_mlp_hidden: list = field(default_factory=lambda: [100])
    eval_mlp_epochs: int = 200
    # analysis
    analysis_convergence: bool = True
    analysis_bound: bool = True
    analysis_identity: bool = True
    analysis_mi: bool = False
    analysis_vector_field: bool = False
    analysis_pca: bool = True
    analysis_mi_samples: int = 150
    analysis_mi_neighbors: int = 20
    analysis_mi_bins: int = 32
    analysis_bound_trials: int = 10000


_KEY_MAP = {
    "name": ("name", str),
    "seed": ("seed", int),
    "out": ("out", str),
    "workers": ("workers", int),
    "dataset.kind": ("dataset_kind", str),
    "dataset.path": ("dataset_path", str),
    "dataset.label_column": ("dataset_label_column", str),
    "dataset.images": ("dataset_images", str),
    "dataset.labels": ("dataset_labels", str),
    "dataset.means": ("dataset_means", lambda t: [_floats(v) for v in t.split(";")]),
    "dataset.stds": ("dataset_stds", _floats),
    "dataset.per_class": ("dataset_per_class", int),
    "dataset.radius": ("dataset_radius", float),
    "dataset.noise": ("dataset_noise", float),
    "dataset.count": ("dataset_count", int),
    "dataset.subset": ("dataset_subset", int),
    "preprocess": ("preprocess", str),
    "arch.preset": ("arch_preset", str),
    "arch.encoder": ("arch_encoder", _ints),
    "arch.decoder": ("arch_decoder", _ints),
    "arch.hidden_activation": ("arch_hidden_activation", str),
    "arch.output_activation": ("arch_output_activation", str),
    "train.modes": ("train_modes", _strings),
    "train.p_grid": ("train_p_grid", _floats),
    "train.epochs": ("train_epochs", int),
    "train.batch_size": ("train_batch_size", int),
    "train.learning_rate": ("train_learning_rate", float),
    "train.per_sample_flag": ("train_per_sample_flag", _bool),
    "eval.classifiers": ("eval_classifiers", _strings),
    "eval.folds": ("eval_folds", int),
    "eval.knn_k": ("eval_knn_k", int),
    "eval.mlp_hidden": ("eval_mlp_hidden", _ints),
    "eval.mlp_epochs": ("eval_mlp_epochs", int),
    "analysis.convergence": ("analysis_convergence", _bool),
    "analysis.bound": ("analysis_bound", _bool),
    "analysis.identity": ("analysis_identity", _bool),
    "analysis.mi": ("analysis_mi", _bool),
    "analysis.vector_field": ("analysis_vector_field", _bool),
    "analysis.pca": ("analysis_pca", _bool),
    "analysis.mi_samples": ("analysis_mi_samples", int),
    "analysis.mi_neighbors": ("analysis_mi_neighbors", int),
    "analysis.mi_bins": ("analysis_mi_bins", int),
    "analysis.bound_trials": ("analysis_bound_trials", int),
}


def load_config(path):
    """Parse and validate a config file; raises ConfigError listing every problem."""
    pairs = parse_kv_file(path)
    cfg = ExperimentConfig()
    problems = []
    for key, text in pairs.items():
        entry = _KEY_MAP.get(key)
        if entry is None:
            problems.append(f"unknown key {key!r}")
            continue
        attr, conv = entry
        try:
            setattr(cfg, attr, conv(text))
        except ValueError as exc:
            problems.append(f"{key}: {exc}")
    problems.extend(validate(cfg))
    if problems:
        raise ConfigError(problems)
    return cfg


def validate(cfg):
    """Return a list of violations (empty when the config is sound)."""
    problems = []
    if cfg.dataset_kind not in _DATASET_KINDS:
        problems.append(f"dataset.kind must be one of {_DATASET_KINDS}, got {cfg.dataset_kind!r}")
    if cfg.dataset_kind == "csv":
        if not cfg.dataset_path:
            problems.append("dataset.path required for csv datasets")
        elif not os.path.exists(cfg.dataset_path):
            problems.append(f"dataset.path does not exist: {cfg.dataset_path}")
        if not cfg.dataset_label_column:
            problems.append("dataset.label_column required for csv datasets")
    if cfg.dataset_kind == "idx":
        for key, path in (("dataset.images", cfg.dataset_images), ("dataset.labels", cfg.dataset_labels)):
            if not path:
                problems.append(f"{key} required for idx datasets")
            elif not os.path.exists(path):
                problems.append(f"{key} does not exist: {path}")
    if cfg.dataset_kind == "gaussians" and len(cfg.dataset_means) != len(cfg.dataset_stds):
        problems.append(
            f"dataset.means has {len(cfg.dataset_means)} entries but dataset.stds has {len(cfg.dataset_stds)}"
        )
    if cfg.preprocess not in ("none", "tabular", "image"):
        problems.append(f"preprocess must be none|tabular|image, got {cfg.preprocess!r}")
    if cfg.arch_preset and cfg.arch_preset != "breastcancer":
        problems.append(f"unknown arch.preset {cfg.arch_preset!r}")
    if not cfg.arch_preset:
        if not cfg.arch_encoder:
            problems.append("arch.encoder must list at least one width")
        if any(w < 1 for w in cfg.arch_encoder + cfg.arch_decoder):
            problems.append("architecture widths must be >= 1")
    for act_key, act in (("arch.hidden_activation", cfg.arch_hidden_activation),
                         ("arch.output_activation", cfg.arch_output_activation)):
        if act not in _ACTIVATIONS:
            problems.append(f"{act_key} must be one of {_ACTIVATIONS}, got {act!r}")
    for mode in cfg.train_modes:
        if mode not in _MODES:
            problems.append(f"train.modes entry must be one of {_MODES}, got {mode!r}")
    for p in cfg.train_p_grid:
        if not 0.0 <= p <= 1.0:
            problems.append(f"train.p_grid values must be in [0,1], got {p}")
    if cfg.train_epochs < 1:
        problems.append(f"train.epochs must be >= 1, got {cfg.train_epochs}")
    if cfg.train_batch_size < 1:
        problems.append(f"train.batch_size must be >= 1, got {cfg.train_batch_size}")
    if not cfg.train_learning_rate > 0:
        problems.append(f"train.learning_rate must be > 0, got {cfg.train_learning_rate}")
    for c in cfg.eval_classifiers:
        if c not in _CLASSIFIERS:
            problems.append(f"eval.classifiers entry must be one of {_CLASSIFIERS}, got {c!r}")
    if cfg.eval_folds < 2:
        problems.append(f"eval.folds must be >= 2, got {cfg.eval_folds}")
    if cfg.workers < 1:
        problems.append(f"workers must be >= 1, got {cfg.workers}")
    return problems


def run_specs(cfg):
    """Expand modes and the p grid into concrete (mode, p) runs."""
    specs = []
    for mode in cfg.train_modes:
        if mode == "icrst":
            for p in cfg.train_p_grid:
                specs.append(("icrst", p))
        else:
            specs.append((mode, None))
    return specs


def run_name(mode, p, seed):
    if p is None:
        return f"{mode}_seed{seed}"
    return f"{mode}_p{p:g}_seed{seed}"
