"""
Crowdsourcing campaign data: questions, responses, CSV interchange, answer
masses, and a synthetic campaign generator with planted contributor profiles.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DanglingAttentionRef,
    DuplicateResponse,
    InvalidSelection,
    LikertOutOfRange,
    SchemaError,
)
from .evidential import Frame, MassFunction, cardinality, make_simple_support

LIKERT_LEVELS = 7
LIKERT_LABELS = (
    "Totally uncertain",
    "Uncertain",
    "Rather uncertain",
    "Neutral",
    "Rather certain",
    "Certain",
    "Totally certain",
)

CSV_COLUMNS = (
    "contributor_id",
    "question_id",
    "selected",
    "likert",
    "response_time_s",
    "is_attention",
    "ref_question_id",
    "gold",
    "frame",
    "imp_max",
)
TRUTH_COLUMNS = ("contributor_id", "planted_profile")


class ProfileLabel(str, enum.Enum):
    EXPERT = "Expert"
    GOOD = "Good"
    AVERAGE = "Average"
    BAD = "Bad"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Question:
    id: str
    frame: Frame
    gold: str | None = None
    imp_max: int = 1
    is_attention: bool = False
    ref_question: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("question id must be non-empty")
        if not 1 <= self.imp_max <= len(self.frame):
            raise ValueError(f"question {self.id}: imp_max {self.imp_max} outside [1, {len(self.frame)}]")
        if self.gold is not None and self.gold not in self.frame:
            raise ValueError(f"question {self.id}: gold {self.gold!r} not in frame")
        if self.is_attention != (self.ref_question is not None):
            raise ValueError(f"question {self.id}: ref_question is required iff is_attention")


@dataclass(frozen=True)
class Response:
    contributor: str
    question: str
    selected: int
    likert: int
    response_time_s: float

    def __post_init__(self):
        if not 0 <= self.likert < LIKERT_LEVELS:
            raise LikertOutOfRange(f"likert must be in 0..{LIKERT_LEVELS - 1}, got {self.likert}")
        if not (self.response_time_s >= 0 and math.isfinite(self.response_time_s)):
            raise ValueError(f"response time must be a finite non-negative number, got {self.response_time_s}")


@dataclass(frozen=True)
class Campaign:
    """Questions plus one response per (contributor, question) pair at most.

    ``contributors`` keeps first-appearance order so that every derived
    computation iterates deterministically.
    """

    questions: tuple[Question, ...]
    responses: tuple[Response, ...]
    contributors: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "questions", tuple(self.questions))
        object.__setattr__(self, "responses", tuple(self.responses))
        seen = list(dict.fromkeys(self.contributors))
        for r in self.responses:
            if r.contributor not in seen:
                seen.append(r.contributor)
        object.__setattr__(self, "contributors", tuple(dict.fromkeys(seen)))
        self.validate()

    def validate(self) -> None:
        qmap: dict[str, Question] = {}
        for q in self.questions:
            if q.id in qmap:
                raise SchemaError(f"duplicate question id {q.id!r}")
            qmap[q.id] = q
        for q in self.questions:
            if q.is_attention:
                ref = qmap.get(q.ref_question)
                if ref is None or ref.is_attention:
                    raise DanglingAttentionRef(
                        f"attention question {q.id!r} references missing question {q.ref_question!r}")
                if ref.frame != q.frame:
                    raise SchemaError(f"attention question {q.id!r} frame differs from {ref.id!r}")
        pairs = set()
        for r in self.responses:
            q = qmap.get(r.question)
            if q is None:
                raise SchemaError(f"response references unknown question {r.question!r}")
            key = (r.contributor, r.question)
            if key in pairs:
                raise DuplicateResponse(f"duplicate response for contributor {r.contributor!r}, question {r.question!r}")
            pairs.add(key)
            check_selection(r.selected, q)

    @cached_property
    def question_map(self) -> dict[str, Question]:
        return {q.id: q for q in self.questions}

    def question(self, qid: str) -> Question:
        return self.question_map[qid]

    @cached_property
    def by_question(self) -> dict[str, list[Response]]:
        out: dict[str, list[Response]] = {q.id: [] for q in self.questions}
        for r in self.responses:
            out[r.question].append(r)
        return out

    @cached_property
    def by_contributor(self) -> dict[str, list[Response]]:
        out: dict[str, list[Response]] = {c: [] for c in self.contributors}
        for r in self.responses:
            out[r.contributor].append(r)
        return out

    @cached_property
    def _pair_index(self) -> dict[tuple[str, str], Response]:
        return {(r.contributor, r.question): r for r in self.responses}

    def response(self, contributor: str, qid: str) -> Response | None:
        return self._pair_index.get((contributor, qid))

    @property
    def task_questions(self) -> list[Question]:
        """Non-attention questions, in campaign order."""
        return [q for q in self.questions if not q.is_attention]

    @property
    def attention_questions(self) -> list[Question]:
        return [q for q in self.questions if q.is_attention]

    def restrict(self, contributors: Iterable[str]) -> "Campaign":
        """Sub-campaign keeping only the responses of ``contributors``."""
        keep = set(contributors)
        return Campaign(
            self.questions,
            tuple(r for r in self.responses if r.contributor in keep),
            tuple(c for c in self.contributors if c in keep),
        )


# answers as mass functions -----------------------------------------------


def likert_to_omega(likert: int, omega_min: float = 0.0, omega_max: float = 1.0) -> float:
    """Linear map of the 7-level Likert scale onto ``[omega_min, omega_max]``."""
    if isinstance(likert, bool) or int(likert) != likert or not 0 <= likert < LIKERT_LEVELS:
        raise LikertOutOfRange(f"likert must be an integer in 0..{LIKERT_LEVELS - 1}, got {likert!r}")
    if not 0.0 <= omega_min < omega_max <= 1.0:
        raise ValueError(f"need 0 <= omega_min < omega_max <= 1, got {omega_min}, {omega_max}")
    return omega_min + (omega_max - omega_min) * likert / (LIKERT_LEVELS - 1)


def check_selection(selected: int, q: Question) -> None:
    if selected <= 0 or selected > q.frame.full:
        raise InvalidSelection(f"question {q.id}: empty or out-of-frame selection {selected}")
    if cardinality(selected) > q.imp_max:
        raise InvalidSelection(
            f"question {q.id}: {cardinality(selected)} labels selected, imp_max is {q.imp_max}")


def response_to_mass(r: Response, q: Question, omega_min: float = 0.0, omega_max: float = 1.0) -> MassFunction:
    """Simple support on the selected labels, weighted by the stated certainty.

    Selecting the whole frame carries no information and yields the vacuous mass.
    """
    check_selection(r.selected, q)
    if r.selected == q.frame.full:
        return MassFunction.vacuous(q.frame)
    return make_simple_support(q.frame, r.selected, likert_to_omega(r.likert, omega_min, omega_max))


# CSV interchange ---------------------------------------------------------


def _format_float(x: float) -> str:
    return repr(float(x))


def campaign_rows(campaign: Campaign) -> list[dict[str, str]]:
    rows = []
    for r in campaign.responses:
        q = campaign.question(r.question)
        rows.append({
            "contributor_id": r.contributor,
            "question_id": q.id,
            "selected": "|".join(q.frame.labels_of(r.selected)),
            "likert": str(r.likert),
            "response_time_s": _format_float(r.response_time_s),
            "is_attention": "1" if q.is_attention else "0",
            "ref_question_id": q.ref_question or "",
            "gold": q.gold or "",
            "frame": "|".join(q.frame.labels),
            "imp_max": str(q.imp_max),
        })
    return rows


def write_campaign_csv(campaign: Campaign, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(campaign_rows(campaign))


def campaign_to_csv_text(campaign: Campaign) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(campaign_rows(campaign))
    return buf.getvalue()


def _split_labels(text: str, line: int, column: str) -> tuple[str, ...]:
    labels = tuple(text.split("|")) if text else ()
    if not labels or any(not lab for lab in labels):
        raise SchemaError("empty label", line, column)
    if len(set(labels)) != len(labels):
        raise SchemaError(f"duplicate label in {text!r}", line, column)
    return labels


def _parse_int(text: str, line: int, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise SchemaError(f"expected an integer, got {text!r}", line, column) from None


def parse_campaign_csv(source) -> Campaign:
    """Read a campaign from a path or an open text stream.

    Question order follows first appearance in the file.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return _parse_campaign(fh)
    return _parse_campaign(source)


def _parse_campaign(fh) -> Campaign:
    reader = csv.DictReader(fh)
    header = tuple(reader.fieldnames or ())
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"missing columns {missing}", 1)
    questions: dict[str, Question] = {}
    q_lines: dict[str, int] = {}
    responses: list[Response] = []
    pairs: set[tuple[str, str]] = set()
    for line, row in enumerate(reader, start=2):
        if None in row or any(row[c] is None for c in CSV_COLUMNS):
            raise SchemaError("wrong number of fields", line)
        cid = row["contributor_id"].strip()
        qid = row["question_id"].strip()
        if not cid:
            raise SchemaError("empty contributor id", line, "contributor_id")
        if not qid:
            raise SchemaError("empty question id", line, "question_id")
        try:
            frame = Frame(_split_labels(row["frame"], line, "frame"))
        except ValueError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(str(exc), line, "frame") from None
        is_att_text = row["is_attention"].strip()
        if is_att_text not in ("0", "1"):
            raise SchemaError(f"is_attention must be 0 or 1, got {is_att_text!r}", line, "is_attention")
        is_att = is_att_text == "1"
        ref = row["ref_question_id"].strip() or None
        gold = row["gold"].strip() or None
        imp_max = _parse_int(row["imp_max"].strip(), line, "imp_max")
        try:
            q = Question(qid, frame, gold, imp_max, is_att, ref)
        except ValueError as exc:
            col = "ref_question_id" if "ref_question" in str(exc) else (
                "gold" if "gold" in str(exc) else "imp_max")
            raise SchemaError(str(exc), line, col) from None
        prev = questions.get(qid)
        if prev is None:
            questions[qid] = q
            q_lines[qid] = line
        elif prev != q:
            for col, a, b in (("frame", prev.frame, q.frame), ("gold", prev.gold, q.gold),
                              ("imp_max", prev.imp_max, q.imp_max),
                              ("is_attention", prev.is_attention, q.is_attention),
                              ("ref_question_id", prev.ref_question, q.ref_question)):
                if a != b:
                    raise SchemaError(f"question {qid!r} {col} inconsistent with line {q_lines[qid]}", line, col)
        selected_labels = _split_labels(row["selected"], line, "selected")
        try:
            selected = frame.subset(selected_labels)
        except ValueError as exc:
            raise SchemaError(str(exc), line, "selected") from None
        if cardinality(selected) > imp_max:
            raise SchemaError(f"{len(selected_labels)} labels selected, imp_max is {imp_max}", line, "selected")
        likert = _parse_int(row["likert"].strip(), line, "likert")
        if not 0 <= likert < LIKERT_LEVELS:
            raise SchemaError(f"likert must be in 0..{LIKERT_LEVELS - 1}", line, "likert")
        try:
            t = float(row["response_time_s"])
        except ValueError:
            raise SchemaError("response time is not a number", line, "response_time_s") from None
        if not (t >= 0 and math.isfinite(t)):
            raise SchemaError("response time must be finite and non-negative", line, "response_time_s")
        if (cid, qid) in pairs:
            raise DuplicateResponse(f"second response of {cid!r} to {qid!r}", line)
        pairs.add((cid, qid))
        responses.append(Response(cid, qid, selected, likert, t))
    for qid, q in questions.items():
        if q.is_attention:
            ref = questions.get(q.ref_question)
            if ref is None or ref.is_attention:
                raise DanglingAttentionRef(
                    f"attention question {qid!r} references missing question {q.ref_question!r}",
                    q_lines[qid], "ref_question_id")
            if ref.frame != q.frame:
                raise SchemaError(f"attention question {qid!r} frame differs from {ref.id!r}",
                                  q_lines[qid], "frame")
    return Campaign(tuple(questions.values()), tuple(responses))


def write_truth_csv(planted: Mapping[str, ProfileLabel], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRUTH_COLUMNS)
        for cid, label in planted.items():
            writer.writerow([cid, ProfileLabel(label).value])


def read_truth_csv(path) -> dict[str, ProfileLabel]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {row["contributor_id"]: ProfileLabel(row["planted_profile"]) for row in csv.DictReader(fh)}


# synthetic generation ----------------------------------------------------


def _normalized(dist: Mapping[int, float], name: str) -> dict[int, float]:
    if not dist:
        raise ConfigError(f"{name} is empty")
    if any(p < 0 for p in dist.values()):
        raise ConfigError(f"{name} has negative probabilities")
    total = sum(dist.values())
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"{name} sums to {total}, expected 1")
    return dict(dist)


@dataclass(frozen=True)
class ProfileSpec:
    """Samplable behaviour of one planted contributor profile.

    ``correct_rate`` is the probability that the selected set contains the
    gold label; ``None`` means uniform answering (gold chosen with the same
    odds as any other label). ``time_dist`` is ``(median_factor, sigma)`` of a
    log-normal multiplier applied to each question's base duration.
    """

    label: ProfileLabel
    correct_rate: float | None
    imprecision_dist: Mapping[int, float]
    certainty_dist: Mapping[int, float]
    time_dist: tuple[float, float]
    attention_fidelity: float

    def __post_init__(self):
        object.__setattr__(self, "label", ProfileLabel(self.label))
        if self.correct_rate is not None and not 0.0 <= self.correct_rate <= 1.0:
            raise ConfigError(f"correct_rate {self.correct_rate} outside [0, 1]")
        if not 0.0 <= self.attention_fidelity <= 1.0:
            raise ConfigError(f"attention_fidelity {self.attention_fidelity} outside [0, 1]")
        imp = _normalized(self.imprecision_dist, "imprecision_dist")
        if any(k < 1 for k in imp):
            raise ConfigError("imprecision sizes must be >= 1")
        cert = _normalized(self.certainty_dist, "certainty_dist")
        if any(not 0 <= k < LIKERT_LEVELS for k in cert):
            raise ConfigError("certainty levels must be Likert levels 0..6")
        median, sigma = self.time_dist
        if median <= 0 or sigma < 0:
            raise ConfigError(f"time_dist needs median > 0 and sigma >= 0, got {self.time_dist}")
        object.__setattr__(self, "imprecision_dist", imp)
        object.__setattr__(self, "certainty_dist", cert)


def default_profile_specs() -> dict[ProfileLabel, ProfileSpec]:
    """Default planted profiles: precise/certain/fast/attentive experts, etc."""
    return {
        ProfileLabel.EXPERT: ProfileSpec(
            ProfileLabel.EXPERT, 0.9, {1: 1.0}, {5: 0.4, 6: 0.6}, (0.5, 0.25), 0.95),
        ProfileLabel.GOOD: ProfileSpec(
            ProfileLabel.GOOD, 0.65, {1: 0.5, 2: 0.5}, {4: 0.4, 5: 0.4, 6: 0.2}, (1.4, 0.25), 0.9),
        ProfileLabel.AVERAGE: ProfileSpec(
            ProfileLabel.AVERAGE, 0.35, {1: 0.4, 2: 0.35, 3: 0.25}, {1: 0.3, 2: 0.4, 3: 0.3}, (1.4, 0.25), 0.85),
        ProfileLabel.BAD: ProfileSpec(
            ProfileLabel.BAD, None, {1: 1.0}, {5: 0.5, 6: 0.5}, (0.4, 0.25), 0.3),
    }


@dataclass(frozen=True)
class SyntheticCampaign:
    campaign: Campaign
    planted: dict[str, ProfileLabel] = field(default_factory=dict)


def _draw(rng: np.random.Generator, dist: Mapping[int, float]) -> int:
    keys = list(dist)
    return int(keys[rng.choice(len(keys), p=np.array([dist[k] for k in keys]))])


def _draw_answer(rng, spec: ProfileSpec, n_labels: int, gold: int, imp_max: int) -> tuple[int, int]:
    size = min(_draw(rng, spec.imprecision_dist), imp_max, n_labels)
    p_gold = spec.correct_rate if spec.correct_rate is not None else size / n_labels
    others = [i for i in range(n_labels) if i != gold]
    if size == n_labels:
        chosen = list(range(n_labels))
    elif rng.random() < p_gold:
        chosen = [gold] + list(rng.choice(others, size=size - 1, replace=False))
    else:
        chosen = list(rng.choice(others, size=size, replace=False))
    mask = 0
    for i in chosen:
        mask |= 1 << int(i)
    return mask, _draw(rng, spec.certainty_dist)


def generate_synthetic_campaign(
    specs: Sequence[tuple[ProfileSpec, int]],
    n_questions: int,
    frame: Frame,
    imp_max: int,
    n_attention: int,
    seed: int,
    base_time_range: tuple[float, float] = (8.0, 20.0),
) -> SyntheticCampaign:
    """Simulate a campaign with planted profiles; deterministic for a given seed.

    Every task question gets a uniformly drawn gold label and a base duration
    drawn from ``base_time_range``. Attention questions repeat a distinct task
    question and are placed right after it; a contributor repeats their
    original answer with probability ``attention_fidelity``, otherwise answers
    afresh.
    """
    if n_questions < 1:
        raise ConfigError("n_questions must be >= 1")
    if not 0 <= n_attention <= n_questions:
        raise ConfigError("n_attention must lie in [0, n_questions]")
    if not 1 <= imp_max <= len(frame):
        raise ConfigError(f"imp_max must lie in [1, {len(frame)}]")
    if not specs or any(count <= 0 for _, count in specs):
        raise ConfigError("every profile count must be > 0")
    rng = np.random.default_rng(seed)
    n_labels = len(frame)

    width = len(str(n_questions))
    task_ids = [f"q{i + 1:0{width}d}" for i in range(n_questions)]
    golds = {qid: int(rng.integers(n_labels)) for qid in task_ids}
    base_time = {qid: float(rng.uniform(*base_time_range)) for qid in task_ids}
    repeated = sorted(rng.choice(n_questions, size=n_attention, replace=False).tolist())

    questions: list[Question] = []
    for i, qid in enumerate(task_ids):
        gold = frame.labels[golds[qid]]
        questions.append(Question(qid, frame, gold, imp_max))
        if i in repeated:
            questions.append(Question(f"{qid}_att", frame, gold, imp_max, True, qid))

    flat = [spec for spec, count in specs for _ in range(count)]
    order = rng.permutation(len(flat))
    width_c = len(str(len(flat)))
    contributors = [(f"c{j + 1:0{width_c}d}", flat[k]) for j, k in enumerate(order)]

    answers: dict[tuple[str, str], tuple[int, int]] = {}
    times: dict[tuple[str, str], float] = {}
    for cid, spec in contributors:
        median, sigma = spec.time_dist
        for q in questions:
            ref = q.ref_question if q.is_attention else q.id
            if q.is_attention and rng.random() < spec.attention_fidelity:
                answers[cid, q.id] = answers[cid, ref]
            else:
                answers[cid, q.id] = _draw_answer(rng, spec, n_labels, golds[ref], imp_max)
            times[cid, q.id] = round(base_time[ref] * median * math.exp(sigma * rng.standard_normal()), 3)

    responses = [
        Response(cid, q.id, answers[cid, q.id][0], answers[cid, q.id][1], times[cid, q.id])
        for q in questions
        for cid, _ in contributors
    ]
    campaign = Campaign(tuple(questions), tuple(responses), tuple(cid for cid, _ in contributors))
    planted = {cid: spec.label for cid, spec in contributors}
    return SyntheticCampaign(campaign, planted)


def default_synthetic_campaign(
    counts: Mapping[ProfileLabel, int] | None = None,
    n_questions: int = 50,
    frame_size: int = 10,
    imp_max: int = 5,
    n_attention: int = 3,
    seed: int = 42,
) -> SyntheticCampaign:
    """Four-profile campaign with the default specs (8/16/16/8 contributors)."""
    if counts is None:
        counts = {ProfileLabel.EXPERT: 8, ProfileLabel.GOOD: 16, ProfileLabel.AVERAGE: 16, ProfileLabel.BAD: 8}
    defaults = default_profile_specs()
    frame = Frame(tuple(f"r{i}" for i in range(frame_size)))
    specs = [(defaults[ProfileLabel(lab)], n) for lab, n in counts.items() if n > 0]
    return generate_synthetic_campaign(specs, n_questions, frame, imp_max, n_attention, seed)
