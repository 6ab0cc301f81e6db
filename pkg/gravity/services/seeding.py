"""
Seed Streams für reproduzierbare Experimente

Alle Zufallsquellen eines Laufs leiten sich aus dem einen Seed der
Experiment-Konfiguration ab. Jede Verwendung (Initialisierung, Shuffling,
Random-Start der Angriffe, ...) bekommt einen eigenen, benannten Substream,
damit ein erneuter Lauf einer Stufe die anderen Stufen nicht verschiebt.

Author: DSP Development Team
Version: 1.0.0
"""

import hashlib
from typing import Any

import numpy as np


def _path_entropy(path_components: tuple) -> int:
    path_str = "/".join(str(c) for c in path_components)
    return int(hashlib.sha256(path_str.encode('utf-8')).hexdigest()[:16], 16)


class SeedStreams:
    """
    Hierarchische Seed-Verwaltung auf Basis von numpy SeedSequence.

    Usage:
        streams = SeedStreams(42)
        init_rng = streams.rng('init', 'teacher')
        shuffle_rng = streams.rng('shuffle', k, epoch)
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def for_path(self, *path_components: Any) -> "SeedStreams":
        """Erzeugt einen Kind-Stream mit deterministisch abgeleitetem Seed."""
        child = np.random.SeedSequence([self.seed, _path_entropy(path_components)])
        return SeedStreams(int(child.generate_state(1, dtype=np.uint64)[0]))

    def rng(self, *path_components: Any) -> np.random.Generator:
        """Liefert einen unabhängigen Generator für den benannten Substream."""
        return np.random.default_rng(
            np.random.SeedSequence([self.seed, _path_entropy(path_components)])
        )
