"""
Profile-aware aggregation of answers and correct-response-rate scoring.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .campaign import Campaign, ProfileLabel, Question, response_to_mass
from .errors import ArgOutOfRange, MissingGold, NoGoldQuestions, NoResponses, UnknownContributor
from .evidential import (
    MassFunction,
    _conjunctive_raw,
    all_nonempty_subsets,
    cardinality,
    combine_conjunctive,
    combine_dempster,
    combine_lns_masses,
    combine_mean,
    decide_min_distance,
    discount,
    first_max,
    pignistic,
)

RULES = ("mean", "conjunctive", "dempster", "lns")
DEFAULT_ALPHA = 0.9


@dataclass(frozen=True)
class ProfileDiscounts:
    """Discount coefficient per profile; must satisfy Expert > Good > Average >= Bad."""

    expert: float = 1.0
    good: float = 0.85
    average: float = 0.40
    bad: float = 0.20

    def __post_init__(self):
        for v in self.as_tuple():
            if not 0.0 <= v <= 1.0:
                raise ArgOutOfRange(f"profile discounts must lie in [0, 1]: {self.as_tuple()}")
        if not (self.expert > self.good > self.average >= self.bad):
            raise ArgOutOfRange(f"profile discounts violate Expert > Good > Average >= Bad: {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.expert, self.good, self.average, self.bad)

    def __getitem__(self, label: ProfileLabel | str) -> float:
        return {
            ProfileLabel.EXPERT: self.expert,
            ProfileLabel.GOOD: self.good,
            ProfileLabel.AVERAGE: self.average,
            ProfileLabel.BAD: self.bad,
        }[ProfileLabel(label)]


def discount_by_profile(m: MassFunction, profile: ProfileLabel, d: ProfileDiscounts) -> MassFunction:
    return discount(m, d[profile])


@dataclass(frozen=True)
class QuestionDecision:
    question: str
    combined: MassFunction
    betp: np.ndarray
    decided: str
    decided_set: tuple[str, ...] | None = None
    conflict: float = 0.0


def combine(ms: Sequence[MassFunction], rule: str = "mean") -> tuple[MassFunction, float]:
    """Combine with the named rule; also returns the conjunctive conflict mass."""
    if rule == "mean":
        return combine_mean(ms), 0.0
    if rule == "conjunctive":
        m = combine_conjunctive(ms)
        return m, m.conflict
    if rule == "dempster":
        k = _conjunctive_raw(ms).get(0, 0.0)
        return combine_dempster(ms), k
    if rule == "lns":
        m = combine_lns_masses(ms)
        return m, m.conflict
    raise ArgOutOfRange(f"unknown combination rule {rule!r}; expected one of {RULES}")


def _weights_for(
    contributors: Iterable[str],
    profiles: Mapping[str, ProfileLabel] | None,
    discounts: ProfileDiscounts | None,
    default_alpha: float,
) -> dict[str, float]:
    if profiles is None:
        return {c: default_alpha for c in contributors}
    discounts = discounts or ProfileDiscounts()
    out = {}
    for c in contributors:
        if c not in profiles:
            raise UnknownContributor(f"no profile for contributor {c!r}")
        out[c] = discounts[profiles[c]]
    return out


def aggregate_question(
    campaign: Campaign,
    q: Question | str,
    profiles: Mapping[str, ProfileLabel] | None = None,
    d: ProfileDiscounts | None = None,
    rule: str = "mean",
    *,
    contributors: Iterable[str] | None = None,
    default_alpha: float = DEFAULT_ALPHA,
    subset_decision: bool = False,
    omega_min: float = 0.0,
    omega_max: float = 1.0,
) -> QuestionDecision:
    """Discount each answer by its author's profile, combine, and decide.

    Without ``profiles`` every answer is discounted by ``default_alpha``.
    ``contributors`` restricts the crowd (used for bootstrap sub-crowds).
    """
    q = campaign.question(q) if isinstance(q, str) else q
    responses = campaign.by_question.get(q.id, [])
    if contributors is not None:
        keep = set(contributors)
        responses = [r for r in responses if r.contributor in keep]
    if not responses:
        raise NoResponses(f"no responses to question {q.id!r}")
    alphas = _weights_for([r.contributor for r in responses], profiles, d, default_alpha)
    masses = [discount(response_to_mass(r, q, omega_min, omega_max), alphas[r.contributor]) for r in responses]
    combined, conflict = combine(masses, rule)
    bet = pignistic(combined)
    decided = q.frame.labels[first_max(bet)]
    decided_set = None
    if subset_decision:
        decided_set = q.frame.labels_of(decide_min_distance(combined, all_nonempty_subsets(q.frame)))
    return QuestionDecision(q.id, combined, bet, decided, decided_set, conflict)


def aggregate_campaign(
    campaign: Campaign,
    profiles: Mapping[str, ProfileLabel] | None = None,
    d: ProfileDiscounts | None = None,
    rule: str = "mean",
    *,
    contributors: Iterable[str] | None = None,
    default_alpha: float = DEFAULT_ALPHA,
    subset_decision: bool = False,
) -> list[QuestionDecision]:
    """Decisions for every task question answered by the (sub-)crowd."""
    keep = None if contributors is None else set(contributors)
    out = []
    for q in campaign.task_questions:
        rs = campaign.by_question[q.id]
        if keep is not None:
            rs = [r for r in rs if r.contributor in keep]
        if rs:
            out.append(aggregate_question(campaign, q, profiles, d, rule, contributors=keep,
                                          default_alpha=default_alpha, subset_decision=subset_decision))
    return out


def contributor_crr(campaign: Campaign, contributor: str) -> float:
    """Mean over gold task questions of ``[gold in X] / |X|``."""
    scores = []
    for r in campaign.by_contributor.get(contributor, ()):
        q = campaign.question(r.question)
        if q.is_attention or q.gold is None:
            continue
        hit = r.selected >> q.frame.index(q.gold) & 1
        scores.append(hit / cardinality(r.selected))
    if not scores:
        raise NoGoldQuestions(f"contributor {contributor!r} answered no gold question")
    return float(np.mean(scores))


def crowd_crr(decisions: Sequence[QuestionDecision], campaign: Campaign) -> float:
    """Fraction of decided labels equal to the gold label."""
    if not decisions:
        raise NoResponses("no decisions to score")
    correct = 0
    for dec in decisions:
        gold = campaign.question(dec.question).gold
        if gold is None:
            raise MissingGold(f"question {dec.question!r} has no gold label")
        correct += dec.decided == gold
    return correct / len(decisions)


DECISION_CSV_COLUMNS = ("question_id", "decided", "gold", "correct", "betp_top1", "betp_top2", "conflict_mass")


def write_decisions_csv(decisions: Sequence[QuestionDecision], campaign: Campaign, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DECISION_CSV_COLUMNS)
        for dec in decisions:
            gold = campaign.question(dec.question).gold
            top = np.sort(dec.betp)[::-1]
            second = top[1] if top.size > 1 else 0.0
            writer.writerow([
                dec.question, dec.decided, gold or "",
                "" if gold is None else int(dec.decided == gold),
                repr(float(top[0])), repr(float(second)), repr(float(dec.conflict)),
            ])
