# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Offline likelihood-ratio membership inference and TPR at low FPR."""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import beta
from sklearn.metrics import roc_curve

from models.model_params import ModelParams
from models.prediction import predict_proba
from tools.exceptions import PreconditionError
from tools.tools import FullLogger

LOGGER = FullLogger(__name__)

CONFIDENCE_CLAMP = 1.0e-6
STDDEV_FLOOR = 1.0e-3
MIN_SHADOWS = 8
DEFAULT_INTERVAL_ALPHA = 0.01


@dataclass(frozen=True)
class MIScore:
    example_id: int
    score: float
    is_member: bool

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError(f"Membership score of example {self.example_id} is not finite")


@dataclass(frozen=True)
class ShadowEnsemble:
    """Per-query Gaussian fit of the statistic over shadow models trained without the queries."""
    count: int
    means: np.ndarray
    stddevs: np.ndarray
    floored: np.ndarray

    def __post_init__(self):
        if self.count < MIN_SHADOWS:
            raise PreconditionError(f"Offline LiRA needs at least {MIN_SHADOWS} shadow models, got {self.count}")
        if np.any(self.stddevs <= 0.0):
            raise PreconditionError("Shadow standard deviations must be positive")


def confidence_statistic(probabilities: np.ndarray, classes: Union[int, np.ndarray]) -> np.ndarray:
    """logit of the confidence in the given class(es), clamped away from 0 and 1."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    classes = np.broadcast_to(np.asarray(classes, dtype=np.int64), (len(probabilities),))
    confidence = np.clip(probabilities[np.arange(len(probabilities)), classes],
                         CONFIDENCE_CLAMP, 1.0 - CONFIDENCE_CLAMP)
    return np.log(confidence) - np.log1p(-confidence)


def model_statistics(params: ModelParams, queries: np.ndarray, classes: Union[int, np.ndarray]) -> np.ndarray:
    return confidence_statistic(predict_proba(params, queries), classes)


def fit_shadow_ensemble(statistics: np.ndarray, stddev_floor: float = STDDEV_FLOOR) -> ShadowEnsemble:
    """Fits mean and standard deviation per query from statistics shaped (shadows, queries)."""
    statistics = np.asarray(statistics, dtype=np.float64)
    if statistics.ndim != 2:
        raise PreconditionError(f"Shadow statistics must be shaped (shadows, queries), got {statistics.shape}")
    if statistics.shape[0] < MIN_SHADOWS:
        raise PreconditionError(f"Offline LiRA needs at least {MIN_SHADOWS} shadow models, got {statistics.shape[0]}")
    stddevs = statistics.std(axis=0)
    floored = stddevs < stddev_floor
    if np.any(floored):
        LOGGER.warning(f"Shadow standard deviation floored to {stddev_floor} for {int(floored.sum())} queries")
    return ShadowEnsemble(count=statistics.shape[0], means=statistics.mean(axis=0),
                          stddevs=np.maximum(stddevs, stddev_floor), floored=floored)


def lira_scores(statistics: np.ndarray, shadows: ShadowEnsemble) -> np.ndarray:
    """One-sided z-score of each statistic against the non-member fit."""
    statistics = np.asarray(statistics, dtype=np.float64)
    if statistics.shape != shadows.means.shape:
        raise PreconditionError(f"Got {statistics.shape} statistics for {shadows.means.shape} shadow fits")
    return (statistics - shadows.means) / shadows.stddevs


def lira_offline(target_model: ModelParams, shadows: ShadowEnsemble, queries: np.ndarray,
                 target_class: Union[int, np.ndarray], is_member: Sequence[bool],
                 example_ids: Optional[Sequence[int]] = None) -> List[MIScore]:
    """Scores every query by the deviation of the target model's confidence from the shadow models."""
    statistics = model_statistics(target_model, queries, target_class)
    scores = lira_scores(statistics, shadows)
    example_ids = range(len(scores)) if example_ids is None else example_ids
    return [MIScore(int(example), float(score), bool(member))
            for example, score, member in zip(example_ids, scores, is_member)]


def _split_scores(scores: Sequence[MIScore]) -> Tuple[np.ndarray, np.ndarray]:
    members = np.array([score.score for score in scores if score.is_member], dtype=np.float64)
    non_members = np.array([score.score for score in scores if not score.is_member], dtype=np.float64)
    if len(members) == 0 or len(non_members) == 0:
        raise PreconditionError("TPR at FPR needs both member and non-member scores")
    return members, non_members


def tpr_at_fpr(scores: Sequence[MIScore], fpr: float) -> float:
    """Largest TPR whose threshold lets at most a fraction fpr of the non-members through.

    Members count as detected only when strictly above the threshold, so ties go against the attack.
    """
    if not 0.0 < fpr < 1.0:
        raise PreconditionError(f"FPR must lie in (0, 1), got {fpr}")
    members, non_members = _split_scores(scores)
    allowed_false_positives = int(math.floor(fpr * len(non_members)))
    threshold = np.sort(non_members)[::-1][allowed_false_positives]
    return float(np.mean(members > threshold))


def roc_points(scores: Sequence[MIScore]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(fpr, tpr, thresholds) of the full ROC curve."""
    labels = np.array([score.is_member for score in scores], dtype=np.int64)
    values = np.array([score.score for score in scores], dtype=np.float64)
    return roc_curve(labels, values)


def clopper_pearson(successes: int, trials: int, alpha: float = DEFAULT_INTERVAL_ALPHA) -> Tuple[float, float]:
    """Exact two-sided binomial confidence interval."""
    if trials <= 0 or not 0 <= successes <= trials:
        raise PreconditionError(f"Invalid binomial counts {successes} of {trials}")
    low = 0.0 if successes == 0 else float(beta.ppf(alpha / 2.0, successes, trials - successes + 1))
    high = 1.0 if successes == trials else float(beta.ppf(1.0 - alpha / 2.0, successes + 1, trials - successes))
    return low, high


def tpr_with_interval(scores: Sequence[MIScore], fpr: float,
                      alpha: float = DEFAULT_INTERVAL_ALPHA) -> Tuple[float, float, float]:
    tpr = tpr_at_fpr(scores, fpr)
    members, _ = _split_scores(scores)
    successes = int(round(tpr * len(members)))
    low, high = clopper_pearson(successes, len(members), alpha)
    return tpr, low, high
