"""Feature-quality evaluation at desk scale.

Compares quanvolution features against raw pixels and a frozen random
classical convolution through three deterministic lenses: PCA compression,
Ward agglomerative clustering scored by majority-label purity, and a fixed
multinomial logistic probe (full-batch gradient descent, zero init, no
stochasticity anywhere). Fairness rule: comparators always see the same
images, geometry, splits and seeds.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .errors import (
    CorruptFile,
    DegenerateData,
    ImageSmallerThanKernel,
    InvariantViolation,
    NonOverlappingLabels,
    ShapeMismatch,
    UnsupportedFormat,
)
from .quanv import ImageTensor, QuanvConfig, stack_layers


class Provenance(Enum):
    QUANV = "quanv"
    CLASSICAL_CONV = "classical_conv"
    RAW_PIXELS = "raw_pixels"


@dataclass(frozen=True)
class FeatureDataset:
    """N x D feature matrix with optional integer labels."""

    features: np.ndarray
    labels: np.ndarray | None
    provenance: Provenance

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise ShapeMismatch(f"features must be N x D, got shape {feats.shape}")
        if not np.isfinite(feats).all():
            raise InvariantViolation("features contain non-finite values")
        object.__setattr__(self, "features", feats)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (feats.shape[0],):
                raise ShapeMismatch(
                    f"{feats.shape[0]} rows but {labels.shape} labels"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class ClassicalConvBaseline:
    """Frozen random 2D kernels matching a quanv layer's geometry."""

    kernel_size: int
    stride: int
    out_channels: int
    weights: np.ndarray  # (out_channels, kernel_size, kernel_size)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        want = (self.out_channels, self.kernel_size, self.kernel_size)
        if w.shape != want:
            raise ShapeMismatch(f"weights must have shape {want}, got {w.shape}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_config(cls, config: QuanvConfig) -> "ClassicalConvBaseline":
        rng = np.random.default_rng(config.seed)
        weights = rng.standard_normal(
            (config.out_channels, config.kernel_size, config.kernel_size)
        )
        return cls(config.kernel_size, config.stride, config.out_channels, weights)


def _conv_layer(data: np.ndarray, baseline: ClassicalConvBaseline) -> np.ndarray:
    """Valid-padding cross-correlation, each input channel filtered separately."""
    h, w, channels = data.shape
    k, s, f = baseline.kernel_size, baseline.stride, baseline.out_channels
    if h < k or w < k:
        raise ImageSmallerThanKernel(f"image {h}x{w} smaller than kernel {k}")
    out_h, out_w = (h - k) // s + 1, (w - k) // s + 1
    out = np.empty((out_h, out_w, channels * f))
    for c in range(channels):
        windows = np.lib.stride_tricks.sliding_window_view(
            data[:, :, c], (k, k)
        )[::s, ::s]
        out[:, :, c * f : (c + 1) * f] = np.einsum(
            "mnij,fij->mnf", windows, baseline.weights
        )
    return out


def classical_conv_extract(
    images: np.ndarray,
    baselines: ClassicalConvBaseline | list[ClassicalConvBaseline],
    labels: np.ndarray | None = None,
) -> FeatureDataset:
    """Frozen-conv feature maps, flattened; layers apply in sequence."""
    if isinstance(baselines, ClassicalConvBaseline):
        baselines = [baselines]
    rows = []
    for image in images:
        data = np.asarray(image, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        for baseline in baselines:
            data = _conv_layer(data, baseline)
        rows.append(data.ravel())
    return FeatureDataset(np.stack(rows), labels, Provenance.CLASSICAL_CONV)


def extract_dataset(
    images: np.ndarray,
    labels: np.ndarray | None,
    configs: list[QuanvConfig],
    provenance: Provenance,
    workers: int = 1,
) -> FeatureDataset:
    """Stacked flattened feature rows for a batch of same-shape images."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim == 3:
        images = images[:, :, :, None]
    if images.ndim != 4:
        raise ShapeMismatch(f"images must be N x H x W x C, got {images.shape}")
    if provenance is Provenance.RAW_PIXELS:
        feats = images.reshape(images.shape[0], -1)
        return FeatureDataset(feats, labels, provenance)
    if provenance is Provenance.CLASSICAL_CONV:
        baselines = [ClassicalConvBaseline.from_config(c) for c in configs]
        return classical_conv_extract(images, baselines, labels)
    rows = [
        stack_layers(ImageTensor(image), configs, workers=workers).data.ravel()
        for image in images
    ]
    return FeatureDataset(np.stack(rows), labels, Provenance.QUANV)


# --- PCA ---

@dataclass(frozen=True)
class PCAModel:
    mean: np.ndarray
    components: np.ndarray  # (k, D), rows orthonormal
    explained_variance_fraction: np.ndarray

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=np.float64) - self.mean) @ self.components.T


def pca_fit(features: np.ndarray, target_dim: int) -> PCAModel:
    """Top principal components via SVD of the mean-centered matrix.

    Component signs are fixed by making each component's largest-magnitude
    coordinate positive, so results are reproducible bit for bit.
    """
    feats = np.asarray(features, dtype=np.float64)
    n, d = feats.shape
    if not 1 <= target_dim <= min(n, d):
        raise DegenerateData(
            f"target_dim must be in [1, min(N, D)] = [1, {min(n, d)}], got {target_dim}"
        )
    mean = feats.mean(axis=0)
    centered = feats - mean
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    tol = singular[0] * max(n, d) * np.finfo(np.float64).eps if singular.size else 0.0
    rank = int((singular > tol).sum())
    if rank < target_dim:
        raise DegenerateData(f"data rank {rank} < target_dim {target_dim}")
    components = vt[:target_dim].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    total = float((singular**2).sum())
    fractions = singular[:target_dim] ** 2 / total
    return PCAModel(mean, components, fractions)


def pca_reduce(ds: FeatureDataset, target_dim: int) -> FeatureDataset:
    """Project a dataset onto its own top principal components."""
    model = pca_fit(ds.features, target_dim)
    return FeatureDataset(model.transform(ds.features), ds.labels, ds.provenance)


# --- clustering ---

def cluster_and_score(ds: FeatureDataset, k: int) -> float:
    """Ward clustering into k clusters, scored by majority-label purity."""
    if ds.labels is None:
        raise DegenerateData("clustering score needs labels")
    distinct = np.unique(ds.labels)
    if len(distinct) < 2:
        raise DegenerateData("need at least 2 distinct labels")
    if k != len(distinct):
        raise DegenerateData(f"k={k} but data has {len(distinct)} distinct labels")
    if ds.n_samples <= k:
        raise DegenerateData(f"need more than {k} samples to form {k} clusters")
    assignments = fcluster(linkage(ds.features, method="ward"), k, criterion="maxclust")
    correct = 0
    for cluster_id in np.unique(assignments):
        members = ds.labels[assignments == cluster_id]
        # np.bincount argmax resolves ties toward the lowest label
        majority = np.bincount(members).argmax()
        correct += int((members == majority).sum())
    return correct / ds.n_samples


# --- linear probe ---

@dataclass(frozen=True)
class ProbeResult:
    per_class_accuracy: dict[int, float]
    mean_accuracy: float  # macro average over classes present in the test set
    overall_accuracy: float


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def linear_probe(
    train: FeatureDataset,
    test: FeatureDataset,
    learning_rate: float = 0.1,
    epochs: int = 500,
    l2: float = 1e-4,
) -> ProbeResult:
    """Multinomial logistic regression with fixed hyperparameters.

    Full-batch gradient descent from zero init on train-standardized
    features; bit-for-bit deterministic.
    """
    if train.labels is None or test.labels is None:
        raise DegenerateData("probe needs labeled train and test sets")
    classes = np.unique(train.labels)
    if len(classes) < 2:
        raise DegenerateData("need at least 2 training classes")
    missing = set(np.unique(test.labels)) - set(classes)
    if missing:
        raise NonOverlappingLabels(
            f"test labels {sorted(missing)} never appear in the training set"
        )
    if train.n_features != test.n_features:
        raise ShapeMismatch(
            f"train has {train.n_features} features, test has {test.n_features}"
        )
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std[std == 0.0] = 1.0
    x_train = (train.features - mean) / std
    x_test = (test.features - mean) / std

    class_index = {c: i for i, c in enumerate(classes)}
    y = np.zeros((train.n_samples, len(classes)))
    y[np.arange(train.n_samples), [class_index[c] for c in train.labels]] = 1.0

    weights = np.zeros((train.n_features, len(classes)))
    bias = np.zeros(len(classes))
    for _ in range(epochs):
        probs = _softmax(x_train @ weights + bias)
        err = (probs - y) / train.n_samples
        weights -= learning_rate * (x_train.T @ err + l2 * weights)
        bias -= learning_rate * err.sum(axis=0)

    predicted = classes[np.argmax(x_test @ weights + bias, axis=1)]
    per_class = {}
    for c in np.unique(test.labels):
        mask = test.labels == c
        per_class[int(c)] = float((predicted[mask] == c).mean())
    return ProbeResult(
        per_class_accuracy=per_class,
        mean_accuracy=float(np.mean(list(per_class.values()))),
        overall_accuracy=float((predicted == test.labels).mean()),
    )


# --- dataset files ---

_IDX_IMAGES = {"train": "train-images-idx3-ubyte", "test": "t10k-images-idx3-ubyte"}
_IDX_LABELS = {"train": "train-labels-idx1-ubyte", "test": "t10k-labels-idx1-ubyte"}


def read_idx(path: str | Path) -> np.ndarray:
    """Read an IDX (MNIST binary) ubyte array of rank 1 or 3."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[0] != 0 or raw[1] != 0:
        raise CorruptFile(f"{path}: bad IDX magic")
    dtype_code, ndim = raw[2], raw[3]
    if dtype_code != 0x08:
        raise UnsupportedFormat(f"{path}: only ubyte IDX supported, got 0x{dtype_code:02x}")
    if ndim not in (1, 3):
        raise UnsupportedFormat(f"{path}: expected rank 1 or 3, got {ndim}")
    dims = struct.unpack(f">{ndim}I", raw[4 : 4 + 4 * ndim])
    data = np.frombuffer(raw, dtype=np.uint8, offset=4 + 4 * ndim)
    if data.size != int(np.prod(dims)):
        raise CorruptFile(f"{path}: payload size does not match dims {dims}")
    return data.reshape(dims).copy()


def write_idx(path: str | Path, array: np.ndarray) -> None:
    array = np.ascontiguousarray(array, dtype=np.uint8)
    header = struct.pack(f">BBBB{array.ndim}I", 0, 0, 0x08, array.ndim, *array.shape)
    Path(path).write_bytes(header + array.tobytes())


def load_dataset_dir(path: str | Path):
    """Load train/test images+labels from an IDX or NPY directory layout.

    Returns (train_images, train_labels, test_images, test_labels); images
    come back as (N, H, W, 1) float64 in [0, 1].
    """
    path = Path(path)
    if (path / _IDX_IMAGES["train"]).exists():
        def split(part):
            images = read_idx(path / _IDX_IMAGES[part]).astype(np.float64) / 255.0
            labels = read_idx(path / _IDX_LABELS[part]).astype(np.int64)
            return images[:, :, :, None], labels
    elif (path / "train_images.npy").exists():
        def split(part):
            prefix = "train" if part == "train" else "test"
            images = np.load(path / f"{prefix}_images.npy").astype(np.float64)
            if images.ndim == 3:
                images = images[:, :, :, None]
            if images.max() > 1.0:
                images = images / 255.0
            labels = np.load(path / f"{prefix}_labels.npy").astype(np.int64)
            return images, labels
    else:
        raise UnsupportedFormat(
            f"{path}: expected IDX files ({_IDX_IMAGES['train']}, ...) or "
            "train_images.npy/train_labels.npy/test_images.npy/test_labels.npy"
        )
    train_x, train_y = split("train")
    test_x, test_y = split("test")
    if train_x.shape[0] != train_y.shape[0] or test_x.shape[0] != test_y.shape[0]:
        raise ShapeMismatch("image/label counts disagree")
    return train_x, train_y, test_x, test_y
