import os

import numpy as np
import pytest

from aelab import data as data_mod


MNIST_DIR = os.environ.get("AELAB_MNIST_DIR", "")

# criterion id -> (status, detail), filled in by the acceptance tests and
# echoed as one line per criterion at the end of the run
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    def key(item):
        head = item[0].rstrip("b")
        return (int(head[1:]), item[0].endswith("b"))
    for criterion, (status, detail) in sorted(ACCEPTANCE_RESULTS.items(), key=key):
        terminalreporter.write_line(f"{criterion}: {status} ({detail})")

MNIST_FILES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


def mnist_available():
    return MNIST_DIR and all(
        os.path.exists(os.path.join(MNIST_DIR, f)) for f in MNIST_FILES
    )


def load_mnist_train():
    return data_mod.load_idx(
        os.path.join(MNIST_DIR, MNIST_FILES[0]),
        os.path.join(MNIST_DIR, MNIST_FILES[1]),
    )


@pytest.fixture(scope="session")
def digits_surrogate():
    """MNIST-shaped stand-in built from the bundled 8x8 digits dataset:
    nearest-neighbour upscaled to 28x28, intensities scaled to [0, 1]."""
    from sklearn.datasets import load_digits

    raw = load_digits()
    idx = np.arange(28) * 8 // 28
    imgs = raw.images[:, idx][:, :, idx]
    features = imgs.reshape(len(raw.images), 784) / 16.0
    return data_mod.RawDataset(
        features, raw.target.astype(np.int64), channel_layout=(1, 28, 28),
        name="digits28",
    )
