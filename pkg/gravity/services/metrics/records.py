"""
IterationRecord und JSON-Lines-Persistenz.

Pro Gravity-Iteration wird eine Zeile geschrieben:
    {k, acc, icc_head, icc_tail, icd_head:{min,avg,max}, icd_tail:{min,avg,max},
     gamma, checkpoint_path, pgd_acc, centroids_head, centroids_tail}
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np

from ...exceptions import GravityException
from ..geometry.trajectory import CentroidSnapshot

logger = logging.getLogger(__name__)

LAYERS = ('head', 'tail')


@dataclass(frozen=True)
class ICDTriple:
    min: float
    avg: float
    max: float

    def to_dict(self) -> Dict[str, float]:
        return {'min': self.min, 'avg': self.avg, 'max': self.max}

    @classmethod
    def from_dict(cls, data: Dict[str, float]) -> "ICDTriple":
        return cls(min=float(data['min']), avg=float(data['avg']), max=float(data['max']))


@dataclass
class IterationRecord:
    """
    Momentaufnahme einer Gravity-Iteration.

    Attributes:
        k: Iterationsindex (0 = Baseline)
        accuracy: Eval-Accuracy des Modells dieser Iteration
        icc: ICC pro Layer ('head', 'tail')
        icd: ICD-Tripel pro Layer
        centroids: Centroid-Matrix (N x d) pro Layer
        gamma: γ, mit dem dieses Modell trainiert wurde (None für k=0)
        checkpoint_path: Pfad des Checkpoints
        pgd_accuracy: optionale PGD Robust Accuracy
    """
    k: int
    accuracy: float
    icc: Dict[str, float]
    icd: Dict[str, ICDTriple]
    centroids: Dict[str, np.ndarray] = field(default_factory=dict)
    gamma: Optional[float] = None
    checkpoint_path: Optional[str] = None
    pgd_accuracy: Optional[float] = None

    def validate(self) -> "IterationRecord":
        for layer in LAYERS:
            if self.icc[layer] < 0:
                raise GravityException(f"Record {self.k}: negative ICC on {layer}", error_code='INVALID_RECORD')
            triple = self.icd[layer]
            if triple.min > triple.max:
                raise GravityException(f"Record {self.k}: ICD min > max on {layer}", error_code='INVALID_RECORD')
        return self

    def snapshots(self) -> List[CentroidSnapshot]:
        return [CentroidSnapshot(self.k, layer, np.asarray(self.centroids[layer]))
                for layer in LAYERS if layer in self.centroids]

    def to_json(self) -> Dict:
        data = {
            'k': self.k,
            'acc': self.accuracy,
            'gamma': self.gamma,
            'checkpoint_path': self.checkpoint_path,
            'pgd_acc': self.pgd_accuracy,
        }
        for layer in LAYERS:
            data[f'icc_{layer}'] = self.icc[layer]
            data[f'icd_{layer}'] = self.icd[layer].to_dict()
            if layer in self.centroids:
                data[f'centroids_{layer}'] = np.asarray(self.centroids[layer]).tolist()
        return data

    @classmethod
    def from_json(cls, data: Dict) -> "IterationRecord":
        return cls(
            k=int(data['k']),
            accuracy=float(data['acc']),
            icc={layer: float(data[f'icc_{layer}']) for layer in LAYERS},
            icd={layer: ICDTriple.from_dict(data[f'icd_{layer}']) for layer in LAYERS},
            centroids={layer: np.asarray(data[f'centroids_{layer}'], dtype=np.float64)
                       for layer in LAYERS if f'centroids_{layer}' in data},
            gamma=data.get('gamma'),
            checkpoint_path=data.get('checkpoint_path'),
            pgd_accuracy=data.get('pgd_acc'),
        )


def write_records(path: Union[str, Path], records: Iterable[IterationRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w') as handle:
        for record in records:
            handle.write(json.dumps(record.to_json(), sort_keys=True) + '\n')
    return path


def append_record(path: Union[str, Path], record: IterationRecord) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('a') as handle:
        handle.write(json.dumps(record.to_json(), sort_keys=True) + '\n')


def read_records(path: Union[str, Path]) -> List[IterationRecord]:
    with Path(path).open() as handle:
        return [IterationRecord.from_json(json.loads(line)) for line in handle if line.strip()]
