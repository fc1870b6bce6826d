"""Dataset ingestion (IDX images, CSV tabular), normalization pipelines, and
synthetic generators used by the analytic checks."""

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyInputError, FormatError, IntegrityError
from .ndcore import as_matrix

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass
class RawDataset:
    features: np.ndarray  # (N, d) float64
    labels: np.ndarray  # (N,) int64, or None for unlabeled data
    channel_layout: tuple = None  # (channels, height, width) for image data
    name: str = ""

    def __post_init__(self):
        self.features = as_matrix(self.features)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
            if self.labels.shape[0] != self.features.shape[0]:
                raise IntegrityError(
                    f"{self.features.shape[0]} rows but {self.labels.shape[0]} labels"
                )
        if self.channel_layout is not None:
            c, h, w = self.channel_layout
            if c * h * w != self.features.shape[1]:
                raise IntegrityError(
                    f"channel layout {self.channel_layout} != width {self.features.shape[1]}"
                )

    @property
    def n_classes(self):
        return int(self.labels.max()) + 1 if self.labels is not None and self.labels.size else 0


def _read_exact(fh, n, what, offset):
    blob = fh.read(n)
    if len(blob) != n:
        raise FormatError(f"truncated {what} at offset {offset}: wanted {n} bytes, got {len(blob)}")
    return blob


def load_idx(image_path, label_path):
    """Parse big-endian IDX image/label file pair into a flat RawDataset.

    Pixels come back as float64 in [0, 255]; normalization is a separate step.
    """
    with open(image_path, "rb") as fh:
        header = _read_exact(fh, 16, "image header", 0)
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGE_MAGIC:
            raise FormatError(f"bad image magic 0x{magic:08x} at offset 0")
        pixels = _read_exact(fh, count * rows * cols, "pixel data", 16)
    with open(label_path, "rb") as fh:
        header = _read_exact(fh, 8, "label header", 0)
        magic, label_count = struct.unpack(">II", header)
        if magic != IDX_LABEL_MAGIC:
            raise FormatError(f"bad label magic 0x{magic:08x} at offset 0")
        raw_labels = _read_exact(fh, label_count, "label data", 8)
    if count != label_count:
        raise IntegrityError(f"{count} images but {label_count} labels")
    features = np.frombuffer(pixels, dtype=np.uint8).astype(np.float64)
    features = features.reshape(count, rows * cols) if count else features.reshape(0, rows * cols)
    labels = np.frombuffer(raw_labels, dtype=np.uint8).astype(np.int64)
    return RawDataset(features, labels, channel_layout=(1, rows, cols), name="idx")


def write_idx(images, labels, image_path, label_path):
    """Write (N, H, W) uint8 images and labels as an IDX pair (fixtures, exports)."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, h, w = images.shape
    if labels.shape[0] != n:
        raise IntegrityError(f"{n} images but {labels.shape[0]} labels")
    with open(image_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, n, h, w))
        fh.write(images.tobytes())
    with open(label_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABEL_MAGIC, n))
        fh.write(labels.tobytes())


def load_csv(path, label_column):
    """Numeric CSV with a header row; labels mapped to dense ids in
    first-appearance order."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if label_column not in header:
            raise ConfigError(f"label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
        rows, raw_labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise FormatError(f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}")
            try:
                values = [float(cell) for i, cell in enumerate(row) if i != label_idx]
            except ValueError as exc:
                raise FormatError(f"{path}:{line_no}: non-numeric cell ({exc})") from None
            rows.append(values)
            raw_labels.append(row[label_idx])
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    seen = {}
    labels = np.array([seen.setdefault(v, len(seen)) for v in raw_labels], dtype=np.int64)
    return RawDataset(np.array(rows, dtype=np.float64), labels, name="csv")


@dataclass(frozen=True)
class PreprocessSpec:
    kind: str  # "image" | "tabular" | "none"
    std_floor: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("image", "tabular", "none"):
            raise ConfigError(f"unknown preprocess kind {self.kind!r}")


def preprocess(ds, spec, train_indices):
    """Normalize features using statistics from the training rows only.

    image:   scale to [0,1] (divide by 255), then standardize per channel;
    tabular: per-feature min-max to [0,1], held-out values clamped.
    """
    train_indices = np.asarray(train_indices, dtype=np.int64)
    if train_indices.size == 0:
        raise EmptyInputError("preprocess needs at least one training row")
    x = ds.features
    if spec.kind == "none":
        return x.copy()
    if spec.kind == "image":
        layout = ds.channel_layout or (1, 1, x.shape[1])
        c = layout[0]
        scaled = (x / 255.0).reshape(x.shape[0], c, -1)
        train = scaled[train_indices]
        mean = train.mean(axis=(0, 2), keepdims=True)
        std = np.maximum(train.std(axis=(0, 2), keepdims=True), spec.std_floor)
        return ((scaled - mean) / std).reshape(x.shape[0], -1)
    lo = x[train_indices].min(axis=0)
    hi = x[train_indices].max(axis=0)
    span = np.maximum(hi - lo, spec.std_floor)
    return np.clip((x - lo) / span, 0.0, 1.0)


def synth_gaussians(means, stds, per_class, seed=0, name="gaussians"):
    """Isotropic Gaussian blobs, one class per (mean, std) pair."""
    if len(means) != len(stds):
        raise ConfigError(f"{len(means)} means but {len(stds)} stds")
    if not means:
        raise ConfigError("need at least one class")
    means = [np.asarray(m, dtype=np.float64).ravel() for m in means]
    dim = means[0].shape[0]
    if any(m.shape[0] != dim for m in means):
        raise ConfigError("class means have inconsistent dimensions")
    rng = np.random.default_rng(seed)
    feats, labels = [], []
    for j, (mu, sigma) in enumerate(zip(means, stds)):
        feats.append(mu + sigma * rng.standard_normal((per_class, dim)))
        labels.append(np.full(per_class, j, dtype=np.int64))
    return RawDataset(np.vstack(feats), np.concatenate(labels), name=name)


def synth_circle(radius, noise_std, count, seed=0):
    """Noisy ring in the plane: radius*(cos t, sin t) + N(0, noise_std^2 I)."""
    if radius <= 0:
        raise ConfigError(f"radius must be > 0, got {radius}")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, count)
    pts = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    pts += noise_std * rng.standard_normal((count, 2))
    return RawDataset(pts, np.zeros(count, dtype=np.int64), name="circle")


def stratified_subset(labels, total, seed=0):
    """Seeded row indices, proportionally representative of every class."""
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if total > labels.shape[0]:
        raise ConfigError(f"subset of {total} from {labels.shape[0]} rows")
    rng = np.random.default_rng(seed)
    classes, counts = np.unique(labels, return_counts=True)
    quotas = np.maximum((counts / labels.shape[0] * total).astype(int), 1)
    while quotas.sum() > total:
        quotas[quotas.argmax()] -= 1
    while quotas.sum() < total:
        quotas[(counts - quotas).argmax()] += 1
    picks = []
    for c, q in zip(classes, quotas):
        rows = np.flatnonzero(labels == c)
        picks.append(rng.choice(rows, size=min(q, rows.size), replace=False))
    out = np.concatenate(picks)
    rng.shuffle(out)
    return out
