"""
Normalisierung und Pareto-Auswahl der robustesten Iteration

Ablauf:
1. ICC* und ICD* pro Iteration normalisieren (Produkt Head x Tail, geteilt
   durch das Produkt der Maxima über alle Iterationen)
2. Iterationen mit Accuracy < θ verwerfen
3. Pareto-Front bestimmen (ICD* maximieren, ICC* minimieren)
4. Front-Mitglied mit der höchsten PGD Robust Accuracy wählen,
   bei Gleichstand das kleinere k

Author: DSP Development Team
Version: 1.0.0
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ...exceptions import DegenerateSeriesError, GravityException, MissingRobustScoreError, NoEligibleIterationsError
from .records import IterationRecord

logger = logging.getLogger(__name__)

NORMALIZATIONS = ('min_icd', 'avg_icd')


@dataclass(frozen=True)
class NormalizedPoint:
    k: int
    icc_star: float
    icd_star: float


@dataclass
class ParetoSelection:
    """Ergebnis der Iterationsauswahl."""
    theta: float
    eligible: List[int]
    front: List[int]
    chosen_k: int
    chosen_score: float
    points: Dict[int, NormalizedPoint] = field(default_factory=dict)
    chosen_by: str = 'pgd_robust_accuracy'

    def to_summary(self) -> Dict:
        return {
            'theta': self.theta,
            'eligible': self.eligible,
            'front': self.front,
            'chosen_k': self.chosen_k,
            'chosen_pgd_acc': self.chosen_score,
        }

    def write_front_csv(self, path: Union[str, Path], records: Sequence[IterationRecord]) -> Path:
        """Plot-fertige (ICC*, ICD*)-Paare, eine Zeile pro Iteration."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        eligible, front = set(self.eligible), set(self.front)
        with path.open('w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(['k', 'icc_star', 'icd_star', 'acc', 'eligible', 'on_front', 'chosen'])
            for record in sorted(records, key=lambda r: r.k):
                point = self.points[record.k]
                writer.writerow([
                    record.k, repr(point.icc_star), repr(point.icd_star), repr(record.accuracy),
                    int(record.k in eligible), int(record.k in front), int(record.k == self.chosen_k),
                ])
        return path


def _icd_value(record: IterationRecord, layer: str, normalization: str) -> float:
    triple = record.icd[layer]
    return triple.min if normalization == 'min_icd' else triple.avg


def normalize_series(records: Sequence[IterationRecord], normalization: str = 'min_icd') -> List[NormalizedPoint]:
    """
    Normalisiert ICC und ICD über die gesamte Serie.

    Raises:
        DegenerateSeriesError: wenn ein Maximum 0 ist
    """
    if not records:
        raise GravityException("normalize_series needs at least one record", error_code='EMPTY_SERIES')
    if normalization not in NORMALIZATIONS:
        raise GravityException(f"Unknown normalization '{normalization}'", error_code='UNKNOWN_NORMALIZATION',
                               details={'allowed': list(NORMALIZATIONS)})

    max_icc_head = max(r.icc['head'] for r in records)
    max_icc_tail = max(r.icc['tail'] for r in records)
    max_icd_head = max(_icd_value(r, 'head', normalization) for r in records)
    max_icd_tail = max(_icd_value(r, 'tail', normalization) for r in records)
    icc_denominator = max_icc_head * max_icc_tail
    icd_denominator = max_icd_head * max_icd_tail
    if icc_denominator <= 0 or icd_denominator <= 0:
        raise DegenerateSeriesError(
            "Cannot normalize a constant-zero ICC/ICD series",
            details={'icc_denominator': icc_denominator, 'icd_denominator': icd_denominator},
        )

    return [
        NormalizedPoint(
            k=r.k,
            icc_star=(r.icc['head'] * r.icc['tail']) / icc_denominator,
            icd_star=(_icd_value(r, 'head', normalization) * _icd_value(r, 'tail', normalization)) / icd_denominator,
        )
        for r in records
    ]


def dominates(a: NormalizedPoint, b: NormalizedPoint) -> bool:
    """a dominiert b: ICD* mindestens so hoch, ICC* mindestens so niedrig, eins davon strikt."""
    no_worse = a.icd_star >= b.icd_star and a.icc_star <= b.icc_star
    better = a.icd_star > b.icd_star or a.icc_star < b.icc_star
    return no_worse and better


def pareto_front(points: Sequence[NormalizedPoint]) -> List[int]:
    """Nicht dominierte Punkte (nach k sortiert)."""
    return sorted(
        p.k for p in points
        if not any(dominates(q, p) for q in points if q.k != p.k)
    )


def _robust_scores(records: Sequence[IterationRecord], front: List[int],
                   robust_scores: Optional[Dict[int, float]]) -> Dict[int, float]:
    scores = {r.k: r.pgd_accuracy for r in records if r.pgd_accuracy is not None}
    if robust_scores:
        scores.update({int(k): float(v) for k, v in robust_scores.items()})
    missing = [k for k in front if k not in scores]
    if missing:
        raise MissingRobustScoreError(missing)
    return scores


def candidate_front(records: Sequence[IterationRecord], theta: float,
                    normalization: str = 'min_icd') -> Tuple[List[int], List[int], Dict[int, NormalizedPoint]]:
    """
    Zulässige Iterationen (Accuracy >= θ) und deren Pareto-Front.

    Raises:
        NoEligibleIterationsError
    """
    ordered = sorted(records, key=lambda r: r.k)
    eligible = [r.k for r in ordered if r.accuracy >= theta]
    if not eligible:
        best = max((r.accuracy for r in ordered), default=None)
        raise NoEligibleIterationsError(theta, best)
    points = {p.k: p for p in normalize_series(ordered, normalization)}
    return eligible, pareto_front([points[k] for k in eligible]), points


def pareto_select(records: Sequence[IterationRecord], theta: float,
                  robust_scores: Optional[Dict[int, float]] = None,
                  normalization: str = 'min_icd') -> ParetoSelection:
    """
    Wählt die Iteration mit der besten Robustheit unter den Pareto-optimalen.

    Args:
        records: alle IterationRecords (Reihenfolge egal)
        theta: Accuracy-Schwelle θ
        robust_scores: PGD Robust Accuracy pro k; fehlt ein Wert, wird
            record.pgd_accuracy verwendet

    Raises:
        NoEligibleIterationsError, MissingRobustScoreError
    """
    ordered = sorted(records, key=lambda r: r.k)
    eligible, front, points = candidate_front(ordered, theta, normalization)
    scores = _robust_scores(ordered, front, robust_scores)
    chosen_k = min(front, key=lambda k: (-scores[k], k))

    logger.info(
        f"Pareto-Auswahl: θ={theta}, {len(eligible)} zulässig, Front={front}, "
        f"gewählt k={chosen_k} (PGD-Acc {scores[chosen_k]:.4f})"
    )
    return ParetoSelection(
        theta=float(theta),
        eligible=eligible,
        front=front,
        chosen_k=chosen_k,
        chosen_score=float(scores[chosen_k]),
        points=points,
    )
