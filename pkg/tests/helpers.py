import numpy as np

from cmfs.dataset import Dataset


def make_dataset(x, labels, names=None):
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    names = names or [f"f{i}" for i in range(x.shape[1])]
    n_classes = int(labels.max()) + 1
    return Dataset(x, names, labels, [str(c) for c in range(n_classes)])


def random_dataset(rng, n=None, d=None, n_classes=None):
    n = n or int(rng.integers(10, 60))
    d = d or int(rng.integers(2, 9))
    n_classes = n_classes or int(rng.integers(2, 4))
    labels = np.arange(n) % n_classes
    rng.shuffle(labels)
    x = rng.normal(size=(n, d)) + labels[:, None] * rng.normal(size=d)
    return make_dataset(x, labels)
