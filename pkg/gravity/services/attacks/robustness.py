"""
Robustheits-Evaluation (White-Box und Black-Box-Transfer)

Der Evaluations-Split wird in Shards fester Größe zerlegt
(GRAVITY_EVAL_BATCH_SIZE). Die Shards können parallel von mehreren Workern
verarbeitet werden (GRAVITY_EVAL_WORKERS); jeder Worker nutzt ein eigenes
Tape über dem gemeinsamen, eingefrorenen Modell. Da Shard-Layout und
Shard-Seeds nicht von der Worker-Anzahl abhängen, sind die Ergebnisse
identisch für jede Worker-Anzahl.

Author: DSP Development Team
Version: 1.0.0
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from django.conf import settings

from ..data.dataset import Dataset
from ..models.networks import Model
from .white_box import AttackSpec, run_attack

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['family', 'epsilon', 'steps', 'clean_acc', 'robust_acc', 'fooling_rate', 'mean_linf', 'psnr']


@dataclass
class RobustnessReport:
    """
    Ergebnis eines Angriffs über einen Split.

    fooling_rate ist der Anteil der korrekt klassifizierten sauberen Samples,
    die nach dem Angriff falsch klassifiziert werden.
    """
    spec: AttackSpec
    clean_accuracy: float
    robust_accuracy: float
    fooling_rate: float
    mean_linf: float
    psnr: float
    samples: int
    transfer: bool = False

    def to_row(self) -> Dict:
        return {
            'family': self.spec.family,
            'epsilon': self.spec.epsilon,
            'steps': self.spec.resolved_steps,
            'clean_acc': self.clean_accuracy,
            'robust_acc': self.robust_accuracy,
            'fooling_rate': self.fooling_rate,
            'mean_linf': self.mean_linf,
            'psnr': self.psnr,
        }


@dataclass
class _ShardResult:
    clean_correct: np.ndarray
    adv_correct: np.ndarray
    linf: np.ndarray
    mse: np.ndarray


def eval_batch_size() -> int:
    return int(getattr(settings, 'GRAVITY_EVAL_BATCH_SIZE', 256))


def eval_workers() -> int:
    return max(1, int(getattr(settings, 'GRAVITY_EVAL_WORKERS', 1)))


def psnr(mse: np.ndarray, peak: float = 1.0) -> float:
    """Mittlerer PSNR über die Samples; unveränderte Samples werden ignoriert."""
    finite = mse[mse > 0]
    if finite.size == 0:
        return math.inf
    return float(np.mean(10.0 * np.log10(peak ** 2 / finite)))


def _attack_shard(source: Model, target: Model, x: np.ndarray, y: np.ndarray,
                  spec: AttackSpec, shard_index: int, batch_size: int) -> _ShardResult:
    rng = np.random.default_rng([spec.seed, shard_index])
    x_adv = run_attack(source, x, y, spec, rng=rng)
    diff = (x_adv - x).reshape(x.shape[0], -1)
    return _ShardResult(
        clean_correct=target.predict(x, batch_size) == y,
        adv_correct=target.predict(x_adv, batch_size) == y,
        linf=np.abs(diff).max(axis=1) if diff.size else np.zeros(x.shape[0]),
        mse=np.mean(diff ** 2, axis=1) if diff.size else np.zeros(x.shape[0]),
    )


def _report(spec: AttackSpec, shards: List[_ShardResult], transfer: bool) -> RobustnessReport:
    clean = np.concatenate([s.clean_correct for s in shards]) if shards else np.zeros(0, dtype=bool)
    adv = np.concatenate([s.adv_correct for s in shards]) if shards else np.zeros(0, dtype=bool)
    linf = np.concatenate([s.linf for s in shards]) if shards else np.zeros(0)
    mse = np.concatenate([s.mse for s in shards]) if shards else np.zeros(0)
    n = clean.size
    fooled = np.logical_and(clean, ~adv).sum()
    return RobustnessReport(
        spec=spec,
        clean_accuracy=float(clean.mean()) if n else 0.0,
        robust_accuracy=float(adv.mean()) if n else 0.0,
        fooling_rate=float(fooled / clean.sum()) if clean.sum() else 0.0,
        mean_linf=float(linf.mean()) if n else 0.0,
        psnr=psnr(mse),
        samples=int(n),
        transfer=transfer,
    )


def transfer_attack_eval(substitute_model: Model, target_model: Model, dataset: Dataset,
                         specs: Sequence[AttackSpec], split: str = 'eval',
                         batch_size: Optional[int] = None, workers: Optional[int] = None) -> List[RobustnessReport]:
    """
    Erzeugt Adversarials gegen `substitute_model` und misst sie an
    `target_model`. Mit substitute == target ist das die White-Box-Evaluation.
    """
    inputs, labels = dataset.split(split)
    batch_size = batch_size or eval_batch_size()
    workers = workers or eval_workers()
    transfer = substitute_model is not target_model
    shards = [(i, inputs[start:start + batch_size], labels[start:start + batch_size])
              for i, start in enumerate(range(0, labels.shape[0], batch_size))]

    reports = []
    for spec in specs:
        spec.validate()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda shard: _attack_shard(substitute_model, target_model, shard[1], shard[2],
                                            spec, shard[0], batch_size),
                shards,
            ))
        report = _report(spec, results, transfer)
        logger.info(
            f"{'Transfer' if transfer else 'White-Box'} {spec.label()}: "
            f"clean={report.clean_accuracy:.4f} robust={report.robust_accuracy:.4f} "
            f"fooling={report.fooling_rate:.4f}"
        )
        reports.append(report)
    return reports


def evaluate_robustness(model: Model, dataset: Dataset, specs: Sequence[AttackSpec], split: str = 'eval',
                        batch_size: Optional[int] = None, workers: Optional[int] = None) -> List[RobustnessReport]:
    """White-Box-Evaluation: ein RobustnessReport pro AttackSpec."""
    return transfer_attack_eval(model, model, dataset, specs, split=split, batch_size=batch_size, workers=workers)


def write_reports_csv(path: Union[str, Path], reports: Sequence[RobustnessReport]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for report in reports:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in report.to_row().items()})
    return path
