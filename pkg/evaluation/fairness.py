# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Per-party accuracy changes caused by an attack."""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from models.model_params import ModelParams
from models.prediction import accuracy
from tools.exceptions import PreconditionError


@dataclass(frozen=True)
class PartyAccuracy:
    party: str
    honest: float
    attacked: float

    @property
    def drop(self) -> float:
        return self.honest - self.attacked


@dataclass(frozen=True)
class FairnessReport:
    target_party: str
    parties: Tuple[PartyAccuracy, ...]

    @property
    def target_drop(self) -> float:
        return next(row.drop for row in self.parties if row.party == self.target_party)

    @property
    def mean_other_drop(self) -> float:
        others = [row.drop for row in self.parties if row.party != self.target_party]
        return float(np.mean(others)) if others else 0.0

    @property
    def disparity(self) -> float:
        """Target drop minus mean drop of the other parties; positive means disparate harm."""
        return self.target_drop - self.mean_other_drop

    def rows(self) -> List[Dict[str, float]]:
        return [{"party": row.party, "honest_accuracy": row.honest, "attacked_accuracy": row.attacked,
                 "drop": row.drop} for row in self.parties]


def fairness_report(honest: ModelParams, attacked: ModelParams,
                    party_sets: Dict[str, Tuple[np.ndarray, np.ndarray]], target_party: str) -> FairnessReport:
    """Accuracy of both models on each party's evaluation set."""
    if target_party not in party_sets:
        raise PreconditionError(f"Target party '{target_party}' has no evaluation set")
    rows = []
    for party, (features, labels) in sorted(party_sets.items()):
        if len(labels) == 0:
            raise PreconditionError(f"Party '{party}' has an empty evaluation set")
        rows.append(PartyAccuracy(party, accuracy(honest, features, labels), accuracy(attacked, features, labels)))
    return FairnessReport(target_party=target_party, parties=tuple(rows))
