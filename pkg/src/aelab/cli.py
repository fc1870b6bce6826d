"""Experiment runner CLI.

Subcommands:
  train     -- train one network per (mode, p); save networks, loss curves,
               latent features, and a run manifest
  evaluate  -- cross-validated classification of latent features, p-sweep CSV
  analyze   -- convergence/bound/identity checks, MI, vector fields, PCA
  sweep     -- train + evaluate + analyze in one go
"""

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import analysis, config as config_mod, data as data_mod, evaluation, nn, trainer
from .analysis import MIConfig
from .errors import AelabError, ConfigError
from .evaluation import ClassifierSpec
from .sampling import TrainingMode


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_dataset(cfg):
    kind = cfg.dataset_kind
    if kind == "gaussians":
        ds = data_mod.synth_gaussians(cfg.dataset_means, cfg.dataset_stds,
                                      cfg.dataset_per_class, seed=cfg.seed)
    elif kind == "circle":
        ds = data_mod.synth_circle(cfg.dataset_radius, cfg.dataset_noise,
                                   cfg.dataset_count, seed=cfg.seed)
    elif kind == "csv":
        ds = data_mod.load_csv(cfg.dataset_path, cfg.dataset_label_column)
    elif kind == "idx":
        ds = data_mod.load_idx(cfg.dataset_images, cfg.dataset_labels)
    elif kind == "breastcancer":
        ds = _load_breastcancer()
    else:  # pragma: no cover - validated earlier
        raise ConfigError([f"unknown dataset kind {kind!r}"])
    if cfg.dataset_subset and cfg.dataset_subset < ds.features.shape[0]:
        rows = data_mod.stratified_subset(ds.labels, cfg.dataset_subset, seed=cfg.seed)
        ds = data_mod.RawDataset(ds.features[rows], ds.labels[rows],
                                 ds.channel_layout, ds.name)
    return ds


def _load_breastcancer():
    # bundled with scikit-learn; no network needed
    from sklearn.datasets import load_breast_cancer

    raw = load_breast_cancer()
    return data_mod.RawDataset(raw.data.astype(np.float64),
                               raw.target.astype(np.int64), name="breastcancer")


def build_net(cfg, input_dim, seed):
    if cfg.arch_preset == "breastcancer":
        return nn.preset_breastcancer(input_dim, seed=seed)
    decoder = list(cfg.arch_decoder) + [input_dim]
    return nn.build_network(
        input_dim,
        encoder_widths=list(cfg.arch_encoder),
        decoder_widths=decoder,
        hidden_activation=cfg.arch_hidden_activation,
        output_activation=cfg.arch_output_activation,
        seed=seed,
    )


def _mode_for(mode, p):
    if mode == "standard":
        return TrainingMode.standard()
    if mode == "trst":
        return TrainingMode.trst()
    return TrainingMode.icrst(p)


def _write_latents_csv(path, latents, labels):
    with open(path, "w") as fh:
        cols = [f"z{i}" for i in range(latents.shape[1])] + ["label"]
        fh.write(",".join(cols) + "\n")
        for row, lab in zip(latents, labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(lab)}\n")


def _read_latents_csv(path):
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return rows[:, :-1], rows[:, -1].astype(np.int64)


def _train_one(cfg, features, labels, mode, p, run_dir):
    os.makedirs(run_dir, exist_ok=True)
    net = build_net(cfg, features.shape[1], cfg.seed)
    tcfg = trainer.TrainConfig(
        mode=_mode_for(mode, p),
        learning_rate=cfg.train_learning_rate,
        batch_size=cfg.train_batch_size,
        epochs=cfg.train_epochs,
        seed=cfg.seed,
        per_sample_flag=cfg.train_per_sample_flag,
    )
    net, report = trainer.train(net, features, labels, tcfg)
    net_path = os.path.join(run_dir, "network.aen")
    curve_path = os.path.join(run_dir, "loss.jsonl")
    latents_path = os.path.join(run_dir, "latents.csv")
    nn.save_network(net, net_path)
    report.write_jsonl(curve_path)
    latents = nn.encode(net, features)
    lab = labels if labels is not None else np.zeros(features.shape[0], dtype=np.int64)
    _write_latents_csv(latents_path, latents, lab)
    return {
        "network": net_path,
        "loss_curve": curve_path,
        "latents": latents_path,
        "seconds": report.seconds,
        "checksum": report.checksum,
        "final_loss": report.epoch_losses[-1],
        "hashes": {os.path.basename(p): _sha256(p)
                   for p in (net_path, curve_path, latents_path)},
    }


def cmd_train(cfg):
    """Train every configured (mode, p) run; returns the manifest dict."""
    ds = load_dataset(cfg)
    all_rows = np.arange(ds.features.shape[0])
    spec = data_mod.PreprocessSpec(cfg.preprocess)
    features = data_mod.preprocess(ds, spec, all_rows)
    specs = config_mod.run_specs(cfg)
    os.makedirs(cfg.out, exist_ok=True)

    def task(item):
        mode, p = item
        name = config_mod.run_name(mode, p, cfg.seed)
        entry = {"name": name, "mode": mode, "p": p, "seed": cfg.seed,
                 "dir": os.path.join(cfg.out, name)}
        try:
            entry.update(_train_one(cfg, features, ds.labels, mode, p, entry["dir"]))
        except AelabError as exc:
            entry["error"] = str(exc)
        return entry

    if cfg.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(cfg.workers) as pool:
            runs = list(pool.map(task, specs))
    else:
        runs = [task(s) for s in specs]

    manifest = {
        "config": {k: v for k, v in vars(cfg).items()},
        "dataset": {"name": ds.name, "rows": int(ds.features.shape[0]),
                    "features": int(ds.features.shape[1])},
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "runs": runs,
    }
    path = os.path.join(cfg.out, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def _classifier_specs(cfg):
    specs = []
    for c in cfg.eval_classifiers:
        if c == "knn":
            specs.append(ClassifierSpec("knn", k=cfg.eval_knn_k))
        elif c == "gnb":
            specs.append(ClassifierSpec("gnb"))
        else:
            specs.append(ClassifierSpec("mlp", hidden=tuple(cfg.eval_mlp_hidden),
                                        epochs=cfg.eval_mlp_epochs))
    return specs


def cmd_evaluate(cfg, manifest):
    """Cross-validate classifiers on each run's latent features."""
    results = []
    for run in manifest["runs"]:
        if run.get("error"):
            continue
        if not os.path.exists(run["latents"]):
            raise ConfigError([f"manifest lists missing latents file {run['latents']}"])
        feats, labels = _read_latents_csv(run["latents"])
        for spec in _classifier_specs(cfg):
            report = evaluation.cross_validate(spec, feats, labels,
                                               folds=cfg.eval_folds, seed=cfg.seed)
            for metric, mean, ci in (
                ("accuracy", report.mean_accuracy, report.ci95_accuracy),
                ("macro_f1", report.mean_f1, report.ci95_f1),
            ):
                results.append({
                    "run": run["name"], "mode": run["mode"],
                    "p": run["p"] if run["p"] is not None else "",
                    "classifier": spec.variant, "metric": metric,
                    "mean": mean, "ci95": ci,
                    "per_fold": report.per_fold_accuracy if metric == "accuracy"
                    else report.per_fold_f1,
                })
    metrics_path = os.path.join(cfg.out, "metrics.json")
    with open(metrics_path, "w") as fh:
        json.dump(results, fh, indent=2, sort_keys=True)
    sweep_path = os.path.join(cfg.out, "sweep.csv")
    with open(sweep_path, "w") as fh:
        fh.write("mode,p,classifier,metric,mean,ci95\n")
        for r in results:
            fh.write(f"{r['mode']},{r['p']},{r['classifier']},{r['metric']},"
                     f"{r['mean']},{r['ci95']}\n")
    return results


def cmd_analyze(cfg, manifest):
    """Run the configured analyses for every trained network."""
    ds = load_dataset(cfg)
    all_rows = np.arange(ds.features.shape[0])
    features = data_mod.preprocess(ds, data_mod.PreprocessSpec(cfg.preprocess), all_rows)
    outputs = {}
    for run in manifest["runs"]:
        if run.get("error"):
            continue
        net = nn.load_network(run["network"])
        run_dir = run["dir"]
        report = {}
        if cfg.analysis_identity:
            report["identity_residual"] = analysis.reconstruction_identity(net, features)
        if cfg.analysis_convergence and ds.labels is not None:
            report["convergence"] = analysis.check_mean_convergence(
                net, features, ds.labels).to_dict()
        if cfg.analysis_bound and run["mode"] in ("icrst", "trst"):
            report["bound"] = analysis.check_loss_bound(
                net, features, ds.labels, _mode_for(run["mode"], run["p"]),
                trials=cfg.analysis_bound_trials, seed=cfg.seed).to_dict()
        if cfg.analysis_mi:
            latents = nn.encode(net, features)
            mi_cfg = MIConfig(cfg.analysis_mi_samples, cfg.analysis_mi_neighbors,
                              cfg.analysis_mi_bins, seed=cfg.seed)
            channels = ds.channel_layout[0] if ds.channel_layout else 1
            report["mutual_information"] = analysis.estimate_mutual_information(
                features, latents, mi_cfg, channels=channels)
        if cfg.analysis_pca and net.latent_dim >= 2:
            latents = nn.encode(net, features)
            proj = analysis.pca_project(latents)
            pca_path = os.path.join(run_dir, "pca.csv")
            with open(pca_path, "w") as fh:
                fh.write("x,y,label\n")
                lab = ds.labels if ds.labels is not None else np.zeros(len(proj), dtype=int)
                for (x, y), l in zip(proj, lab):
                    fh.write(f"{x},{y},{int(l)}\n")
            report["pca"] = pca_path
        if cfg.analysis_vector_field:
            if net.input_dim != 2:
                raise ConfigError(
                    [f"vector field needs 2-D ambient data, run {run['name']} has {net.input_dim}"])
            lo = features.min(axis=0) - 0.5
            hi = features.max(axis=0) + 0.5
            grid = analysis.vector_field(net, (lo[0], hi[0]), (lo[1], hi[1]), 25)
            field_path = os.path.join(run_dir, "field.csv")
            with open(field_path, "w") as fh:
                fh.write(grid.to_csv())
            svg_path = os.path.join(run_dir, "field.svg")
            with open(svg_path, "w") as fh:
                fh.write(analysis.vector_field_svg(grid))
            report["vector_field"] = field_path
        out_path = os.path.join(run_dir, "analysis.json")
        with open(out_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
        outputs[run["name"]] = report
    with open(os.path.join(cfg.out, "analysis.json"), "w") as fh:
        json.dump(outputs, fh, indent=2, sort_keys=True)
    return outputs


def _load_manifest(path):
    if not os.path.exists(path):
        raise ConfigError([f"manifest not found: {path}"])
    with open(path) as fh:
        return json.load(fh)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="aelab", description=__doc__)
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--workers", type=int, help="parallel training runs")
    parser.add_argument("--out", help="override the output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("train", "evaluate", "analyze", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        if name in ("evaluate", "analyze"):
            p.add_argument("--manifest", help="defaults to <out>/manifest.json")
    args = parser.parse_args(argv)

    try:
        cfg = config_mod.load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None:
            cfg.workers = args.workers
        if args.out is not None:
            cfg.out = args.out

        if args.command == "train":
            manifest = cmd_train(cfg)
            errors = [r["name"] for r in manifest["runs"] if r.get("error")]
            print(f"trained {len(manifest['runs']) - len(errors)} run(s) -> {cfg.out}")
            for name in errors:
                print(f"  failed: {name}")
        elif args.command == "evaluate":
            manifest = _load_manifest(args.manifest or os.path.join(cfg.out, "manifest.json"))
            results = cmd_evaluate(cfg, manifest)
            print(f"wrote {len(results)} metric rows -> {os.path.join(cfg.out, 'sweep.csv')}")
        elif args.command == "analyze":
            manifest = _load_manifest(args.manifest or os.path.join(cfg.out, "manifest.json"))
            outputs = cmd_analyze(cfg, manifest)
            print(f"analyzed {len(outputs)} run(s) -> {os.path.join(cfg.out, 'analysis.json')}")
        else:  # sweep
            manifest = cmd_train(cfg)
            cmd_evaluate(cfg, manifest)
            cmd_analyze(cfg, manifest)
            print(f"sweep complete -> {cfg.out}")
    except ConfigError as exc:
        print("configuration error:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return 2
    except AelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
