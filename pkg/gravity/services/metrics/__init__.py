"""
Metrics Services Package

ICC/ICD-Instrumentierung und Auswahl der robustesten Iteration:
- IterationRecord (JSON-Lines-Persistenz)
- compute_icc / compute_icd
- normalize_series / pareto_select

Author: DSP Development Team
Version: 1.0.0
"""

from .records import (
    ICDTriple,
    IterationRecord,
    LAYERS,
    write_records,
    append_record,
    read_records,
)
from .icc_icd import compute_icc, compute_icd, ICC_MODES
from .selection import (
    NormalizedPoint,
    ParetoSelection,
    normalize_series,
    dominates,
    pareto_front,
    pareto_select,
    candidate_front,
    NORMALIZATIONS,
)

__all__ = [
    'ICDTriple',
    'IterationRecord',
    'LAYERS',
    'write_records',
    'append_record',
    'read_records',
    'compute_icc',
    'compute_icd',
    'ICC_MODES',
    'NormalizedPoint',
    'ParetoSelection',
    'normalize_series',
    'dominates',
    'pareto_front',
    'pareto_select',
    'candidate_front',
    'NORMALIZATIONS',
]
