"""
Contributor profiling from qualification (precision, certainty) and behaviour
(reflection, attention).

Each characteristic lives on its own two-label frame. Per-question masses are
averaged over the campaign, transported onto the profile frame
``{Expert, Good, Average, Bad}``, mixed with integer weights, and decided by
maximum pignistic probability.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .campaign import Campaign, ProfileLabel, Question, Response, likert_to_omega, response_to_mass
from .errors import (
    ArgOutOfRange,
    EmptyInput,
    ImpMaxTooSmall,
    MismatchedQuestions,
    NoResponses,
    SchemaError,
    SelectionTooLarge,
    UnknownFrame,
    ZeroWeights,
)
from .evidential import TIE_TOL, Frame, MassFunction, combine_mean, jousselme_distance, pignistic

PRECISION_FRAME = Frame(("P", "IP"))
CERTAINTY_FRAME = Frame(("C", "UC"))
REFLECTION_FRAME = Frame(("R", "NR"))
ATTENTION_FRAME = Frame(("A", "NA"))
CHARACTERISTIC_FRAMES = (PRECISION_FRAME, CERTAINTY_FRAME, REFLECTION_FRAME, ATTENTION_FRAME)

PROFILE_FRAME = Frame(tuple(p.value for p in ProfileLabel))
# least trusted first; used to break pignistic ties conservatively
TRUST_ORDER = (ProfileLabel.BAD, ProfileLabel.AVERAGE, ProfileLabel.GOOD, ProfileLabel.EXPERT)

_E, _G, _A, _B = "Expert", "Good", "Average", "Bad"
CONVERSION: dict[Frame, dict[str, tuple[str, ...]]] = {
    PRECISION_FRAME: {"P": (_E, _B), "IP": (_G, _A)},
    CERTAINTY_FRAME: {"C": (_E, _G, _B), "UC": (_A,)},
    REFLECTION_FRAME: {"R": (_G, _A), "NR": (_E, _B)},
    ATTENTION_FRAME: {"A": (_E, _G, _A), "NA": (_B,)},
}


def _two_label_mass(frame: Frame, first: float, second: float, alpha: float) -> MassFunction:
    if not 0.0 <= alpha <= 1.0:
        raise ArgOutOfRange(f"discount coefficient must lie in [0, 1], got {alpha}")
    return MassFunction(frame, {1: alpha * first, 2: alpha * second, 3: 1.0 - alpha})


def precision_weight(card: int, imp_max: int) -> float:
    if imp_max < 2:
        raise ImpMaxTooSmall(f"imp_max must be >= 2 to measure imprecision, got {imp_max}")
    if card < 1:
        raise ArgOutOfRange(f"selection size must be >= 1, got {card}")
    if card > imp_max:
        raise SelectionTooLarge(f"selection size {card} exceeds imp_max {imp_max}")
    return math.log2(card) / math.log2(imp_max)


def precision_mass(card: int, imp_max: int, alpha: float = 0.9) -> MassFunction:
    """Mass on {P, IP} from the number of selected labels."""
    w = precision_weight(card, imp_max)
    return _two_label_mass(PRECISION_FRAME, 1.0 - w, w, alpha)


def gamma_threshold(card: int, imp_max: int, frame_size: int) -> float:
    """Answer mass above which the precision mass falls below the DP_c score."""
    if not 1 <= card <= imp_max <= frame_size:
        raise ArgOutOfRange(f"need 1 <= card <= imp_max <= frame_size, got {card}, {imp_max}, {frame_size}")
    if imp_max < 2:
        raise ArgOutOfRange("imp_max must be >= 2")
    if card == frame_size:
        raise ArgOutOfRange("undefined when the whole frame is selected")
    lx, li, lo = math.log2(card), math.log2(imp_max), math.log2(frame_size)
    return lo / li * (li - lx) / (lo - lx)


def certainty_mass(likert: int, alpha: float = 0.9, omega_min: float = 0.0, omega_max: float = 1.0) -> MassFunction:
    omega = likert_to_omega(likert, omega_min, omega_max)
    w = (omega - omega_min) / (omega_max - omega_min)
    return _two_label_mass(CERTAINTY_FRAME, w, 1.0 - w, alpha)


def estimate_t0(campaign: Campaign, question: Question | str) -> float:
    """First quartile (linear interpolation) of the crowd's times on a question."""
    qid = question if isinstance(question, str) else question.id
    times = [r.response_time_s for r in campaign.by_question.get(qid, ())]
    if not times:
        raise NoResponses(f"no responses to question {qid!r}")
    return float(np.quantile(times, 0.25))


def reflection_weight(t: float, t0: float) -> float:
    return math.atan(t - t0) / math.pi + 0.5


def reflection_mass(t: float, t0: float, alpha: float = 0.9) -> MassFunction:
    if t < 0 or t0 < 0:
        raise ArgOutOfRange("times must be non-negative")
    w = reflection_weight(t, t0)
    return _two_label_mass(REFLECTION_FRAME, w, 1.0 - w, alpha)


def attention_mass(
    original: Response,
    attention: Response,
    q: Question,
    alpha: float = 0.9,
    omega_min: float = 0.0,
    omega_max: float = 1.0,
    attention_question: Question | None = None,
) -> MassFunction:
    """Mass on {A, NA} from the distance between an answer and its repeat.

    ``q`` is the original question; ``attention_question`` (when given) is
    checked to reference it.
    """
    if original.contributor != attention.contributor:
        raise MismatchedQuestions("original and attention answers come from different contributors")
    if original.question != q.id:
        raise MismatchedQuestions(f"original answer is for {original.question!r}, not {q.id!r}")
    if attention_question is not None:
        if attention_question.ref_question != q.id or attention_question.frame != q.frame:
            raise MismatchedQuestions(f"{attention_question.id!r} does not repeat {q.id!r}")
        if attention.question != attention_question.id:
            raise MismatchedQuestions("attention answer does not belong to the attention question")
    elif attention.question == original.question:
        raise MismatchedQuestions("attention answer must come from the repeated question")
    m_orig = response_to_mass(original, q, omega_min, omega_max)
    m_rep = response_to_mass(attention, q, omega_min, omega_max)
    d = jousselme_distance(m_orig, m_rep)
    return _two_label_mass(ATTENTION_FRAME, 1.0 - d, d, alpha)


def aggregate_characteristic(per_question: Sequence[MassFunction]) -> MassFunction:
    if not per_question:
        raise EmptyInput("no per-question masses to aggregate")
    return combine_mean(per_question)


def convert_to_profile_frame(m: MassFunction) -> MassFunction:
    """Transport a characteristic mass onto the profile frame."""
    table = CONVERSION.get(m.frame)
    if table is None:
        raise UnknownFrame(f"no conversion for frame {m.frame.labels}")
    out: dict[int, float] = {}
    for x, v in m.items():
        if x == m.frame.full:
            y = PROFILE_FRAME.full
        elif x == 0:
            y = 0
        else:
            (label,) = m.frame.labels_of(x)
            y = PROFILE_FRAME.subset(table[label])
        out[y] = out.get(y, 0.0) + v
    return MassFunction(PROFILE_FRAME, out)


@dataclass(frozen=True)
class AlphaWeights:
    """Mixing weights of the four characteristics plus their per-question discounts."""

    precision: float = 1.0
    certainty: float = 1.0
    reflection: float = 1.0
    attention: float = 1.0
    precision_discount: float = 0.9
    certainty_discount: float = 0.9
    reflection_discount: float = 0.9
    attention_discount: float = 0.9

    def __post_init__(self):
        if min(self.weights) < 0:
            raise ArgOutOfRange(f"weights must be non-negative: {self.weights}")
        if sum(self.weights) <= 0:
            raise ZeroWeights("at least one characteristic weight must be positive")
        for d in self.discounts:
            if not 0.0 <= d <= 1.0:
                raise ArgOutOfRange(f"characteristic discounts must lie in [0, 1]: {self.discounts}")

    @property
    def weights(self) -> tuple[float, float, float, float]:
        return (self.precision, self.certainty, self.reflection, self.attention)

    @property
    def discounts(self) -> tuple[float, float, float, float]:
        return (self.precision_discount, self.certainty_discount,
                self.reflection_discount, self.attention_discount)

    def with_weights(self, weights: Sequence[float]) -> "AlphaWeights":
        p, c, r, a = weights
        return AlphaWeights(p, c, r, a, *self.discounts)


def fuse_profile(converted: Sequence[MassFunction], w: AlphaWeights | Sequence[float]) -> MassFunction:
    """Weighted mean of the four converted characteristic masses (P, C, R, A order)."""
    weights = w.weights if isinstance(w, AlphaWeights) else tuple(w)
    if len(converted) != 4 or len(weights) != 4:
        raise ArgOutOfRange("expected four masses and four weights")
    if min(weights) < 0:
        raise ArgOutOfRange("weights must be non-negative")
    total = float(sum(weights))
    if total <= 0:
        raise ZeroWeights("weights sum to zero")
    out: dict[int, float] = {}
    for m, a in zip(converted, weights):
        if m.frame != PROFILE_FRAME:
            raise UnknownFrame("fuse_profile expects masses on the profile frame")
        for x, v in m.items():
            out[x] = out.get(x, 0.0) + a * v
    return MassFunction(PROFILE_FRAME, {x: v / total for x, v in out.items()})


def _conservative_argmax(bet: np.ndarray) -> int:
    """Frame index of the max, preferring less trusted labels among ties."""
    best = bet.max()
    for label in TRUST_ORDER:
        i = PROFILE_FRAME.index(label.value)
        if bet[i] >= best - TIE_TOL:
            return i
    raise AssertionError("unreachable")


def decide_profile(pm: MassFunction) -> ProfileLabel:
    return ProfileLabel(PROFILE_FRAME.labels[_conservative_argmax(pignistic(pm))])


def decide_profiles_batch(betp: np.ndarray) -> np.ndarray:
    """Vectorized :func:`decide_profile` on pignistic vectors (last axis in frame order)."""
    betp = np.asarray(betp, dtype=float)
    best = betp.max(axis=-1, keepdims=True)
    tied = betp >= best - TIE_TOL
    out = np.full(betp.shape[:-1], -1, dtype=int)
    for label in reversed(TRUST_ORDER):
        i = PROFILE_FRAME.index(label.value)
        out = np.where(tied[..., i], i, out)
    return out


# whole-campaign profiling ------------------------------------------------


@dataclass(frozen=True)
class Characteristics:
    """Campaign-level characteristic masses of one contributor."""

    precision: MassFunction
    certainty: MassFunction
    reflection: MassFunction
    attention: MassFunction

    def as_tuple(self) -> tuple[MassFunction, MassFunction, MassFunction, MassFunction]:
        return (self.precision, self.certainty, self.reflection, self.attention)

    def converted(self) -> list[MassFunction]:
        return [convert_to_profile_frame(m) for m in self.as_tuple()]


def contributor_characteristics(
    campaign: Campaign,
    contributor: str,
    w: AlphaWeights | None = None,
    t0: Mapping[str, float] | None = None,
    omega_min: float = 0.0,
    omega_max: float = 1.0,
) -> Characteristics:
    """Aggregate precision, certainty and reflection over task questions and
    attention over repeated questions.

    A contributor who answered no attention question gets a vacuous attention
    mass. Questions with ``imp_max < 2`` only admit precise answers; they
    contribute a full-precision mass.
    """
    w = w or AlphaWeights()
    dp, dc, dr, da = w.discounts
    if t0 is None:
        t0 = question_t0(campaign)
    prec, cert, refl, att = [], [], [], []
    for r in campaign.by_contributor.get(contributor, ()):
        q = campaign.question(r.question)
        if q.is_attention:
            original = campaign.response(contributor, q.ref_question)
            if original is not None:
                ref = campaign.question(q.ref_question)
                att.append(attention_mass(original, r, ref, da, omega_min, omega_max, attention_question=q))
            continue
        if q.imp_max >= 2:
            prec.append(precision_mass(bin(r.selected).count("1"), q.imp_max, dp))
        else:
            prec.append(_two_label_mass(PRECISION_FRAME, 1.0, 0.0, dp))
        cert.append(certainty_mass(r.likert, dc, omega_min, omega_max))
        refl.append(reflection_mass(r.response_time_s, t0[q.id], dr))
    if not prec:
        raise NoResponses(f"contributor {contributor!r} answered no task question")
    attention = aggregate_characteristic(att) if att else MassFunction.vacuous(ATTENTION_FRAME)
    return Characteristics(
        aggregate_characteristic(prec),
        aggregate_characteristic(cert),
        aggregate_characteristic(refl),
        attention,
    )


def question_t0(campaign: Campaign) -> dict[str, float]:
    return {q.id: estimate_t0(campaign, q) for q in campaign.task_questions if campaign.by_question[q.id]}


@dataclass(frozen=True)
class ProfileResult:
    contributor: str
    mass: MassFunction
    betp: np.ndarray
    label: ProfileLabel


def estimate_profiles(
    campaign: Campaign,
    w: AlphaWeights | None = None,
    contributors: Sequence[str] | None = None,
    omega_min: float = 0.0,
    omega_max: float = 1.0,
) -> dict[str, ProfileResult]:
    """Profile every contributor (or the given subset) of a campaign."""
    w = w or AlphaWeights()
    t0 = question_t0(campaign)
    out = {}
    for cid in contributors if contributors is not None else campaign.contributors:
        chars = contributor_characteristics(campaign, cid, w, t0, omega_min, omega_max)
        pm = fuse_profile(chars.converted(), w)
        bet = pignistic(pm)
        out[cid] = ProfileResult(cid, pm, bet, ProfileLabel(PROFILE_FRAME.labels[_conservative_argmax(bet)]))
    return out


PROFILE_CSV_COLUMNS = (
    "contributor_id", "m_expert", "m_good", "m_average", "m_bad", "m_ignorance_total",
    "betp_expert", "betp_good", "betp_average", "betp_bad", "decided_profile",
)


def write_profiles_csv(results: Mapping[str, ProfileResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROFILE_CSV_COLUMNS)
        for cid, res in results.items():
            singles = [res.mass[PROFILE_FRAME.singleton(lab)] for lab in PROFILE_FRAME.labels]
            writer.writerow([
                cid, *(repr(v) for v in singles), repr(max(0.0, 1.0 - sum(singles))),
                *(repr(float(b)) for b in res.betp), res.label.value,
            ])


def read_profiles_csv(path) -> dict[str, ProfileLabel]:
    """Read decided profiles; a planted-profile truth file is accepted too."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        column = next((c for c in ("decided_profile", "planted_profile") if c in fields), None)
        if "contributor_id" not in fields or column is None:
            raise SchemaError(f"{path}: expected contributor_id and decided_profile columns")
        out = {}
        for line, row in enumerate(reader, start=2):
            try:
                out[row["contributor_id"]] = ProfileLabel(row[column])
            except ValueError:
                raise SchemaError(f"unknown profile {row[column]!r}", line=line, column=column) from None
        return out
