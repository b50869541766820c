"""Path scoring: joint probabilities over mask slots and level projections.

A backend supplies one probability vector per mask role (top, second,
connective), each over that role's candidate set in hierarchy enumeration
order.  A path's score is the product of the factors its ancestors receive
from the included roles; the full three-role product is the joint path
probability, and restricting the role subset reproduces the ablation
configurations (top & second, second & connective, connective only, ...).

Accumulation runs in log space so deeper hierarchies cannot underflow;
ties always break toward the smallest path id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from sensepath.hierarchy import (
    ROLE_CONNECTIVE,
    ROLE_DEPTH,
    ROLE_SECOND,
    ROLE_TOP,
    LabelHierarchy,
    SensePath,
    ancestor_at,
)

DISTRIBUTION_SUM_TOL = 1e-9


class ScoringError(ValueError):
    pass


@dataclass(frozen=True)
class MaskDistributions:
    """Per-role probability vectors over the role's candidate set."""

    probs: dict[str, tuple[float, ...]]

    def __post_init__(self) -> None:
        for role, vec in self.probs.items():
            if not vec:
                raise ScoringError(f"role {role!r} has an empty distribution")
            if any(p < 0 for p in vec):
                raise ScoringError(f"role {role!r} has a negative probability")
            total = math.fsum(vec)
            if abs(total - 1.0) > DISTRIBUTION_SUM_TOL:
                raise ScoringError(
                    f"role {role!r} distribution sums to {total!r}, not 1 "
                    f"(tolerance {DISTRIBUTION_SUM_TOL})"
                )

    @classmethod
    def unchecked(cls, probs: dict[str, tuple[float, ...]]) -> "MaskDistributions":
        """Bypass the simplex check (for scale-invariance properties only)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "probs", probs)
        return obj

    def roles(self) -> frozenset[str]:
        return frozenset(self.probs)

    def __getitem__(self, role: str) -> tuple[float, ...]:
        return self.probs[role]


@dataclass(frozen=True)
class MaskSubset:
    """Non-empty set of mask roles included in scoring."""

    roles: frozenset[str]

    def __post_init__(self) -> None:
        if not self.roles:
            raise ScoringError("mask subset must be non-empty")
        bad = self.roles - {ROLE_TOP, ROLE_SECOND, ROLE_CONNECTIVE}
        if bad:
            raise ScoringError(f"unknown mask roles in subset: {sorted(bad)}")

    @classmethod
    def of(cls, *roles: str) -> "MaskSubset":
        return cls(frozenset(roles))


FULL_SUBSET = MaskSubset.of(ROLE_TOP, ROLE_SECOND, ROLE_CONNECTIVE)

# The ablation grid: every studied combination of included mask roles.
ABLATION_SUBSETS = {
    "full": FULL_SUBSET,
    "top_second": MaskSubset.of(ROLE_TOP, ROLE_SECOND),
    "top_connective": MaskSubset.of(ROLE_TOP, ROLE_CONNECTIVE),
    "second_connective": MaskSubset.of(ROLE_SECOND, ROLE_CONNECTIVE),
    "connective": MaskSubset.of(ROLE_CONNECTIVE),
    "second": MaskSubset.of(ROLE_SECOND),
}


@dataclass(frozen=True)
class PathScore:
    path: SensePath
    score: float
    factors: dict[str, float] = field(compare=False)


@dataclass(frozen=True)
class Prediction:
    path: SensePath
    labels: dict[int, str]  # depth -> label along the predicted path
    score: float
    all_scores: tuple[PathScore, ...] | None = None

    @property
    def top(self) -> str:
        return self.labels[1]

    @property
    def second(self) -> str:
        return self.labels[2]

    @property
    def connective(self) -> str | None:
        return self.labels.get(3)


def _factor(d: MaskDistributions, h: LabelHierarchy, role: str, path: SensePath) -> float:
    vec = d.probs.get(role)
    if vec is None:
        raise ScoringError(f"mask distributions missing role {role!r}")
    depth = ROLE_DEPTH[role]
    idx = h.index_at(depth, ancestor_at(path, depth).label)
    if idx >= len(vec):
        raise ScoringError(
            f"distribution for role {role!r} has {len(vec)} entries; "
            f"candidate index {idx} out of range"
        )
    return vec[idx]


def score_paths(
    d: MaskDistributions,
    h: LabelHierarchy,
    subset: MaskSubset = FULL_SUBSET,
    paths: tuple[SensePath, ...] | None = None,
) -> list[PathScore]:
    """Joint score of each path: the product of its included role factors."""
    if paths is None:
        paths = h.paths
    role_order = [r for r in (ROLE_CONNECTIVE, ROLE_TOP, ROLE_SECOND) if r in subset.roles]
    out: list[PathScore] = []
    for p in paths:
        factors = {role: _factor(d, h, role, p) for role in role_order}
        if any(f == 0.0 for f in factors.values()):
            score = 0.0
        else:
            score = math.exp(math.fsum(math.log(f) for f in factors.values()))
        out.append(PathScore(path=p, score=score, factors=factors))
    return out


def _argmax_score(scores: list[PathScore]) -> PathScore:
    if not scores:
        raise ScoringError("no path scores to choose from")
    best = scores[0]
    for ps in scores[1:]:
        if ps.score > best.score:  # ties keep the smaller path id
            best = ps
    return best


def predict(
    d: MaskDistributions,
    h: LabelHierarchy,
    subset: MaskSubset = FULL_SUBSET,
    keep_scores: bool = False,
) -> Prediction:
    """The max-score path and its per-level labels.

    Per-level labels are simply the ancestors of the winning path (the level
    projection with all node priors at 1.0).
    """
    scores = score_paths(d, h, subset)
    best = _argmax_score(scores)
    labels = {k: ancestor_at(best.path, k).label for k in range(1, h.depth + 1)}
    return Prediction(
        path=best.path,
        labels=labels,
        score=best.score,
        all_scores=tuple(scores) if keep_scores else None,
    )


@dataclass(frozen=True)
class LevelProjection:
    depth: int
    winner: str
    weights: dict[str, float]


def project_level(
    scores: list[PathScore],
    depth: int,
    prior: dict[str, float] | None = None,
    combine: str = "max",
) -> LevelProjection:
    """Project path scores onto the nodes of one level.

    A node's weight is ``prior(node) * combine(scores of paths through it)``
    where ``combine`` is ``max`` (default) or ``sum`` over supporting paths.
    The argmax node wins; ties keep the node whose best path id is smallest.
    """
    if not scores:
        raise ScoringError("project_level needs at least one path score")
    if combine not in ("max", "sum"):
        raise ScoringError(f"combine must be 'max' or 'sum', got {combine!r}")
    weights: dict[str, float] = {}
    first_path_id: dict[str, int] = {}
    for ps in scores:
        label = ancestor_at(ps.path, depth).label
        first_path_id.setdefault(label, ps.path.id)
        if combine == "max":
            weights[label] = max(weights.get(label, 0.0), ps.score)
        else:
            weights[label] = weights.get(label, 0.0) + ps.score
    if prior is not None:
        for label in weights:
            weights[label] *= prior.get(label, 1.0)
    winner = min(weights, key=lambda l: (-weights[l], first_path_id[l]))
    return LevelProjection(depth=depth, winner=winner, weights=weights)


@dataclass(frozen=True)
class ObjectiveValue:
    """Per-instance training-objective value for a gold path.

    ``degenerate`` marks an infinite loss caused by zero probability mass on
    a gold factor; callers decide whether that is fatal.
    """

    value: float
    degenerate: bool


def objective_value(
    d: MaskDistributions,
    gold: SensePath,
    h: LabelHierarchy,
    variant: str = "sum_log",
) -> ObjectiveValue:
    """Loss of the gold path under the mask distributions.

    ``sum_log`` is the negative log-likelihood of the joint path probability,
    sum over roles of -log Pr(gold factor); it is 0 exactly when every gold
    factor has probability 1.  ``log_sum`` is the negated literal
    log-of-summed-factors form, kept behind this flag because the two
    readings differ and only one can be the default.
    """
    if variant not in ("sum_log", "log_sum"):
        raise ScoringError(f"objective variant must be 'sum_log' or 'log_sum', got {variant!r}")
    factors = [
        _factor(d, h, role, gold) for role in (ROLE_CONNECTIVE, ROLE_TOP, ROLE_SECOND)
    ]
    if variant == "sum_log":
        if any(f == 0.0 for f in factors):
            return ObjectiveValue(value=math.inf, degenerate=True)
        return ObjectiveValue(value=-math.fsum(math.log(f) for f in factors), degenerate=False)
    total = math.fsum(factors)
    if total == 0.0:
        return ObjectiveValue(value=math.inf, degenerate=True)
    return ObjectiveValue(value=-math.log(total), degenerate=False)


def predict_edrr(
    d_partial: MaskDistributions,
    gold_connective: str,
    h: LabelHierarchy,
    keep_scores: bool = False,
) -> Prediction:
    """Prediction when the connective slot is filled text rather than a mask.

    The gold connective lives in the rendered prompt, so only the top and
    second roles contribute probability mass.
    """
    if gold_connective is None or not str(gold_connective).strip():
        raise ScoringError("predict_edrr requires the gold connective text")
    return predict(
        d_partial, h, subset=MaskSubset.of(ROLE_TOP, ROLE_SECOND), keep_scores=keep_scores
    )
