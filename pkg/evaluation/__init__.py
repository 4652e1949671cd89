# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Attack success metrics, membership inference, reconstruction, fairness and detection analysis."""

from evaluation.fairness import FairnessReport, fairness_report
from evaluation.membership import (
    MIScore, ShadowEnsemble, clopper_pearson, fit_shadow_ensemble, lira_offline, roc_points, tpr_at_fpr)
from evaluation.metrics import attack_success_rate, count_directives
from evaluation.mitigation import MitigationParams, detection_probability, undetected_probability
from evaluation.reconstruction import extract_reconstruction, normalized_mae

__all__ = [
    "FairnessReport", "MIScore", "MitigationParams", "ShadowEnsemble", "attack_success_rate", "clopper_pearson",
    "count_directives", "detection_probability", "extract_reconstruction", "fairness_report",
    "fit_shadow_ensemble", "lira_offline", "normalized_mae", "roc_points", "tpr_at_fpr", "undetected_probability",
]
