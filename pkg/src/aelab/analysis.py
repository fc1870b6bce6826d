"""Checks on trained networks: class-mean convergence, the loss lower bound,
the reconstruction-error identity, mutual information of latent neighbours,
vector fields and contraction diagnostics, and a 2-D PCA projection."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateClassError, EmptyInputError, ShapeError
from .ndcore import (
    as_matrix,
    column_mean,
    column_variance,
    joint_histogram,
    pairwise_euclidean,
    top_k_smallest,
)
from .nn import reconstruct
from .sampling import TRST, build_class_index


@dataclass
class ConvergenceReport:
    gaps: dict  # class -> absolute L2 gap ||mean f(g(X_j)) - mu_j||
    relative_gaps: dict  # class -> gap / ||mu_j||

    def to_dict(self):
        return {
            "gaps": {str(j): g for j, g in self.gaps.items()},
            "relative_gaps": {str(j): g for j, g in self.relative_gaps.items()},
        }


def check_mean_convergence(net, data, labels):
    """Per-class L2 distance between the mean decoded output and the class mean."""
    data = as_matrix(data)
    outputs = reconstruct(net, data)
    gaps, rel = {}, {}
    for j, rows in build_class_index(labels).items():
        mu = column_mean(data[rows])
        out_mean = column_mean(outputs[rows])
        gap = float(np.linalg.norm(out_mean - mu))
        gaps[j] = gap
        norm = float(np.linalg.norm(mu))
        rel[j] = gap / norm if norm > 0 else gap
    return ConvergenceReport(gaps, rel)


@dataclass
class BoundReport:
    loss: dict  # class -> Monte-Carlo E[||y - f(g(x))||^2] (unhalved)
    bound: dict  # class -> Var_j(Y) + Var_j(f(g(X))), summed over features
    slack: dict  # class -> loss - bound

    def to_dict(self):
        return {
            "loss": {str(j): v for j, v in self.loss.items()},
            "bound": {str(j): v for j, v in self.bound.items()},
            "slack": {str(j): v for j, v in self.slack.items()},
        }


def check_loss_bound(net, data, labels, mode, trials=10000, seed=0):
    """Monte-Carlo estimate of the random-target loss against its lower bound.

    Uses the unhalved squared error E[||y - f(g(x))||^2] (twice the training
    loss convention) because that is the quantity the bound is stated for.
    For trst mode the whole dataset is treated as a single class.
    """
    data = as_matrix(data)
    if mode.variant == TRST or labels is None:
        index = {0: np.arange(data.shape[0])}
    else:
        index = build_class_index(labels)
    rng = np.random.default_rng(seed)
    loss, bound, slack = {}, {}, {}
    for j, rows in index.items():
        if rows.size == 0:
            raise DegenerateClassError(f"class {j} has no rows")
        xi = rows[rng.integers(0, rows.size, size=trials)]
        yi = rows[rng.integers(0, rows.size, size=trials)]
        out = reconstruct(net, data[xi])
        diff = data[yi] - out
        l_j = float(np.mean(np.sum(diff * diff, axis=1)))
        var_y = float(np.sum(column_variance(data[rows])))
        var_out = float(np.sum(column_variance(reconstruct(net, data[rows]))))
        loss[j] = l_j
        bound[j] = var_y + var_out
        slack[j] = l_j - bound[j]
    return BoundReport(loss, bound, slack)


def reconstruction_identity(net, data):
    """Max per-feature residual of the expansion
    E[(f(g(X)) - X)^2] = E[f(g(X))^2] + E[X^2] - 2 E[X f(g(X))].

    Pure algebra over empirical expectations: holds for any network.
    """
    data = as_matrix(data)
    if data.shape[0] == 0:
        raise EmptyInputError("reconstruction_identity on empty data")
    out = reconstruct(net, data)
    lhs = column_mean((out - data) ** 2)
    rhs = column_mean(out ** 2) + column_mean(data ** 2) - 2.0 * column_mean(data * out)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass
class MIConfig:
    sample_count: int = 150
    neighbor_count: int = 20
    bins: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ConfigError(f"sample_count must be >= 1, got {self.sample_count}")
        if self.bins < 2:
            raise ConfigError(f"bins must be >= 2, got {self.bins}")


def mutual_information_pair(x, y, bins=32):
    """Histogram plug-in MI (natural log) between two co-indexed value vectors.

    Both axes share a common [min, max] range over the pair so that
    mutual_information_pair(x, x) equals the binned entropy of x.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    lo = min(x.min(), y.min())
    hi = max(x.max(), y.max())
    if hi == lo:
        return 0.0  # both images constant under this binning
    counts = joint_histogram(x, y, bins, lo, hi).astype(np.float64)
    total = counts.sum()
    pxy = counts / total
    px = pxy.sum(axis=1)
    py = pxy.sum(axis=0)
    nz = pxy > 0
    ratio = pxy[nz] / (np.outer(px, py)[nz])
    return float(np.sum(pxy[nz] * np.log(ratio)))


def estimate_mutual_information(data, latents, cfg, channels=1):
    """Average MI between sampled observations and their latent-space K-NNs.

    Draws `cfg.sample_count` rows without replacement, finds each row's
    `cfg.neighbor_count` nearest rows in latent space (Euclidean, self
    excluded), computes the histogram MI between the two observations'
    co-located values per channel, and averages over neighbours, channels,
    and samples.
    """
    data = as_matrix(data)
    latents = as_matrix(latents)
    if data.shape[0] != latents.shape[0]:
        raise ShapeError(
            f"data rows {data.shape[0]} != latent rows {latents.shape[0]}"
        )
    n = data.shape[0]
    if cfg.neighbor_count >= n:
        raise ConfigError(f"neighbor_count {cfg.neighbor_count} must be < dataset size {n}")
    if data.shape[1] % channels != 0:
        raise ShapeError(f"width {data.shape[1]} not divisible by {channels} channels")

    rng = np.random.default_rng(cfg.seed)
    samples = rng.choice(n, size=min(cfg.sample_count, n), replace=False)
    dist = pairwise_euclidean(latents[samples], latents)
    per_channel = data.reshape(n, channels, -1)

    mi_sum = 0.0
    count = 0
    for row, i in enumerate(samples):
        d = dist[row].copy()
        d[i] = np.inf
        for k in top_k_smallest(d, cfg.neighbor_count):
            for c in range(channels):
                mi_sum += mutual_information_pair(
                    per_channel[i, c], per_channel[k, c], cfg.bins
                )
                count += 1
    return mi_sum / count


@dataclass
class VectorFieldGrid:
    points: np.ndarray  # (S, 2) grid points in the ambient plane
    displacements: np.ndarray  # (S, 2) f(g(x)) - x at each point

    def to_csv(self):
        lines = ["x,y,dx,dy"]
        for (x, y), (dx, dy) in zip(self.points, self.displacements):
            lines.append(f"{x},{y},{dx},{dy}")
        return "\n".join(lines) + "\n"


def vector_field(net, x_range, y_range, steps):
    """Displacement field f(g(x)) - x on a regular 2-D grid."""
    if net.input_dim != 2:
        raise ShapeError(f"vector field needs a 2-D ambient input, got {net.input_dim}")
    xs = np.linspace(x_range[0], x_range[1], steps)
    ys = np.linspace(y_range[0], y_range[1], steps)
    gx, gy = np.meshgrid(xs, ys)
    points = np.column_stack([gx.ravel(), gy.ravel()])
    out = reconstruct(net, points)
    return VectorFieldGrid(points, out - points)


def vector_field_svg(grid, width=600, height=600, scale=1.0):
    """Minimal SVG quiver rendering of a vector field. Pure geometry."""
    pts, disp = grid.points, grid.displacements
    x0, y0 = pts.min(axis=0)
    x1, y1 = pts.max(axis=0)
    span_x = (x1 - x0) or 1.0
    span_y = (y1 - y0) or 1.0

    def to_px(p):
        return (
            (p[0] - x0) / span_x * (width - 20) + 10,
            height - ((p[1] - y0) / span_y * (height - 20) + 10),
        )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
    ]
    for p, d in zip(pts, disp):
        ax, ay = to_px(p)
        bx, by = to_px(p + scale * d)
        parts.append(
            f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}" '
            'stroke="green" stroke-width="1"/>'
        )
        parts.append(f'<circle cx="{bx:.2f}" cy="{by:.2f}" r="1.5" fill="green"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def contraction_ratio(net, data, labels):
    """Per-class fraction of rows whose reconstruction is strictly closer to
    the class mean than the row itself (ties count as not contracted)."""
    data = as_matrix(data)
    out = reconstruct(net, data)
    ratios = {}
    for j, rows in build_class_index(labels).items():
        mu = column_mean(data[rows])
        d_in = np.linalg.norm(data[rows] - mu, axis=1)
        d_out = np.linalg.norm(out[rows] - mu, axis=1)
        ratios[j] = float(np.mean(d_out < d_in))
    return ratios


def _power_iteration(cov, rng, tol=1e-10, max_iter=10000):
    v = rng.standard_normal(cov.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = cov @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, v
        w /= norm
        if np.linalg.norm(w - v) < tol or np.linalg.norm(w + v) < tol:
            v = w
            lam = norm
            break
        v = w
        lam = norm
    return lam, v


def pca_project(latents, dims=2):
    """Projection onto the top principal components via power iteration with
    deflation. Input is centred first, so the output has (near-)zero mean."""
    latents = as_matrix(latents)
    if latents.shape[0] == 0:
        raise EmptyInputError("pca_project on empty data")
    if latents.shape[1] < dims:
        raise ShapeError(f"need >= {dims} columns, got {latents.shape[1]}")
    centered = latents - column_mean(latents)
    cov = centered.T @ centered / centered.shape[0]
    rng = np.random.default_rng(0)
    comps = []
    for _ in range(dims):
        lam, v = _power_iteration(cov, rng)
        comps.append(v)
        cov = cov - lam * np.outer(v, v)
    return centered @ np.array(comps).T
