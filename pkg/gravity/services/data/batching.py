"""
Batch-Iteration mit seeded Shuffle pro Epoche.
"""

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ...exceptions import DatasetError
from .dataset import Dataset


@dataclass
class Batch:
    inputs: np.ndarray
    labels: np.ndarray
    indices: np.ndarray

    def __len__(self) -> int:
        return int(self.labels.shape[0])


def batches(dataset: Dataset, split: str, batch_size: int, seed: int, epoch: int = 0,
            shuffle: bool = True) -> Iterator[Batch]:
    """
    Liefert die Samples eines Splits genau einmal, in Batches der Größe
    batch_size; der letzte, kürzere Batch wird mitgeliefert.

    Die Reihenfolge hängt von (seed, epoch) ab.
    """
    if batch_size < 1:
        raise DatasetError(f"batch_size must be >= 1, got {batch_size}")
    inputs, labels = dataset.split(split)
    order = np.arange(labels.shape[0])
    if shuffle:
        order = np.random.default_rng([int(seed), int(epoch)]).permutation(order)
    for start in range(0, order.size, batch_size):
        idx = order[start:start + batch_size]
        yield Batch(inputs=inputs[idx], labels=labels[idx], indices=idx)
