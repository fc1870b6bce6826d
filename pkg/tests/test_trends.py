"""Directional checks on a small image corpus: in-class random targets should
help downstream classification relative to plain self-reconstruction, and
whole-dataset random targets should collapse outputs toward the global mean.

These runs are deterministic for the frozen seeds, so the comparisons are
stable even though the margins are modest.
"""

import numpy as np

from aelab import analysis, evaluation, nn, trainer
from aelab.sampling import TrainingMode


def _train(features, labels, mode, seed=0, epochs=20):
    net = nn.build_network(784, [256, 32], [256, 784], seed=seed)
    cfg = trainer.TrainConfig(mode=mode, batch_size=512, epochs=epochs,
                              seed=seed)
    trainer.train(net, features, labels, cfg)
    return net


def test_in_class_targets_improve_latent_classification(digits_surrogate):
    feats, labels = digits_surrogate.features, digits_surrogate.labels
    net_std = _train(feats, labels, TrainingMode.standard())
    net_icr = _train(feats, labels, TrainingMode.icrst(1.0))
    spec = evaluation.ClassifierSpec("mlp", hidden=(100,), epochs=200)
    acc = {}
    for name, net in (("standard", net_std), ("icrst", net_icr)):
        z = nn.encode(net, feats)
        acc[name] = evaluation.cross_validate(spec, z, labels,
                                              folds=10, seed=0).mean_accuracy
    assert acc["icrst"] > acc["standard"]


def test_whole_dataset_targets_collapse_output_variance(digits_surrogate):
    feats = digits_surrogate.features
    labels = digits_surrogate.labels
    net_std = _train(feats, labels, TrainingMode.standard())
    net_trst = _train(feats, labels, TrainingMode.trst())
    var_std = float(np.sum(np.var(nn.reconstruct(net_std, feats), axis=0)))
    var_trst = float(np.sum(np.var(nn.reconstruct(net_trst, feats), axis=0)))
    assert var_trst < 0.5 * var_std


def test_in_class_targets_contract_toward_class_means(digits_surrogate):
    feats, labels = digits_surrogate.features, digits_surrogate.labels
    net_icr = _train(feats, labels, TrainingMode.icrst(1.0))
    ratios = analysis.contraction_ratio(net_icr, feats, labels)
    # random in-class targets pull every class hard toward its mean
    assert np.mean(list(ratios.values())) > 0.9
