"""
Attack Services Package

Gradientenbasierte Angriffe und Robustheits-Evaluation:
- AttackSpec, fgsm, bim, mim, pgd
- evaluate_robustness (White-Box), transfer_attack_eval (Black-Box)
- RobustnessReport und CSV-Export

Author: DSP Development Team
Version: 1.0.0
"""

from .white_box import (
    AttackSpec,
    FAMILIES,
    input_gradient,
    fgsm,
    bim,
    mim,
    pgd,
    run_attack,
)
from .robustness import (
    RobustnessReport,
    REPORT_COLUMNS,
    evaluate_robustness,
    transfer_attack_eval,
    write_reports_csv,
    psnr,
)

__all__ = [
    'AttackSpec',
    'FAMILIES',
    'input_gradient',
    'fgsm',
    'bim',
    'mim',
    'pgd',
    'run_attack',
    'RobustnessReport',
    'REPORT_COLUMNS',
    'evaluate_robustness',
    'transfer_attack_eval',
    'write_reports_csv',
    'psnr',
]
