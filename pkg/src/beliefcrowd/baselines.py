"""
Comparison methods: majority vote, Dawid-Skene EM, Rjab expertise degrees
with k-means profiling, and the Komarov response-time validity rate.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .campaign import Campaign, ProfileLabel, Question, likert_to_omega, response_to_mass
from .errors import (
    ArgOutOfRange,
    ConfigError,
    DegenerateMatrix,
    IncompatibleFrames,
    LoneContributor,
    NonConvergence,
    NoResponses,
    TooFewContributors,
)
from .evidential import Frame, cardinality, combine_mean, first_max, jousselme_distance, pignistic

# ranks from least to most expert
RANKED_PROFILES = (ProfileLabel.BAD, ProfileLabel.AVERAGE, ProfileLabel.GOOD, ProfileLabel.EXPERT)


def fractional_votes(campaign: Campaign, q: Question | str, contributors=None) -> np.ndarray:
    """Each response spreads one vote uniformly over its selected labels."""
    q = campaign.question(q) if isinstance(q, str) else q
    keep = None if contributors is None else set(contributors)
    votes = np.zeros(len(q.frame))
    n = 0
    for r in campaign.by_question.get(q.id, ()):
        if keep is not None and r.contributor not in keep:
            continue
        share = 1.0 / cardinality(r.selected)
        for i in range(len(q.frame)):
            if r.selected >> i & 1:
                votes[i] += share
        n += 1
    if n == 0:
        raise NoResponses(f"no responses to question {q.id!r}")
    return votes


def majority_vote(campaign: Campaign, q: Question | str, contributors=None) -> str:
    """Plurality label with fractional votes; ties go to the lowest frame index."""
    q = campaign.question(q) if isinstance(q, str) else q
    return q.frame.labels[first_max(fractional_votes(campaign, q, contributors))]


# Dawid-Skene --------------------------------------------------------------


@dataclass
class EMResult:
    frame: Frame
    questions: list[str]
    contributors: list[str]
    posteriors: np.ndarray  # (questions, labels)
    confusion: dict[str, np.ndarray]  # row = true label, column = reported label
    priors: np.ndarray
    log_likelihoods: list[float] = field(default_factory=list)
    converged: bool = False

    def posterior(self, qid: str) -> np.ndarray:
        return self.posteriors[self.questions.index(qid)]

    def decisions(self) -> dict[str, str]:
        return {qid: self.frame.labels[first_max(row)] for qid, row in zip(self.questions, self.posteriors)}


def shared_frame(campaign: Campaign) -> Frame:
    frames = {q.frame for q in campaign.task_questions}
    if len(frames) != 1:
        raise IncompatibleFrames(
            "EM needs every question to offer the same answer set; "
            f"found {len(frames)} distinct frames")
    return frames.pop()


def _em_counts(campaign: Campaign, frame: Frame, mode: str):
    questions = [q for q in campaign.task_questions if campaign.by_question[q.id]]
    contributors = [c for c in campaign.contributors
                    if any(not campaign.question(r.question).is_attention for r in campaign.by_contributor[c])]
    qi = {q.id: i for i, q in enumerate(questions)}
    ci = {c: i for i, c in enumerate(contributors)}
    n_labels = len(frame)
    counts = np.zeros((len(questions), len(contributors), n_labels))
    for q in questions:
        for r in campaign.by_question[q.id]:
            if mode == "fractional":
                k = cardinality(r.selected)
                for i in range(n_labels):
                    if r.selected >> i & 1:
                        counts[qi[q.id], ci[r.contributor], i] = 1.0 / k
            elif mode == "pignistic":
                m = response_to_mass(r, q)
                if m.is_vacuous:
                    continue
                counts[qi[q.id], ci[r.contributor], first_max(pignistic(m))] = 1.0
            else:
                raise ConfigError(f"unknown EM mode {mode!r}; expected 'fractional' or 'pignistic'")
    return [q.id for q in questions], contributors, counts


_LOG_FLOOR = -700.0


def _safe_log(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(x), _LOG_FLOOR)


def em_dawid_skene(
    campaign: Campaign,
    max_iter: int = 100,
    tol: float = 1e-6,
    mode: str = "fractional",
) -> EMResult:
    """Dawid-Skene EM over a campaign whose questions share one frame.

    Imprecise answers are expanded into fractional counts (``"fractional"``)
    or collapsed to their pignistic argmax (``"pignistic"``). Posteriors are
    initialised from the fractional majority vote. Iteration stops once the
    log-likelihood gains less than ``tol``; hitting ``max_iter`` first emits a
    :class:`NonConvergence` warning and sets ``converged=False``.
    """
    frame = shared_frame(campaign)
    qids, contributors, counts = _em_counts(campaign, frame, mode)
    if not qids:
        raise NoResponses("campaign has no answered task question")
    n_labels = len(frame)
    votes = counts.sum(axis=1)
    totals = votes.sum(axis=1, keepdims=True)
    post = np.where(totals > 0, votes / np.where(totals > 0, totals, 1.0), 1.0 / n_labels)

    lls: list[float] = []
    converged = False
    for _ in range(max_iter):
        # M-step
        priors = post.mean(axis=0)
        conf = np.einsum("qk,qcl->ckl", post, counts)
        row = conf.sum(axis=2, keepdims=True)
        conf = np.where(row > 0, conf / np.where(row > 0, row, 1.0), 1.0 / n_labels)
        # E-step
        log_joint = _safe_log(priors)[None, :] + np.einsum("qcl,ckl->qk", counts, _safe_log(conf))
        peak = log_joint.max(axis=1, keepdims=True)
        norm = np.exp(log_joint - peak)
        z = norm.sum(axis=1, keepdims=True)
        post = norm / z
        lls.append(float(np.sum(peak[:, 0] + np.log(z[:, 0]))))
        if len(lls) > 1 and lls[-1] - lls[-2] < tol:
            converged = True
            break
    if not converged:
        warnings.warn(NonConvergence(f"EM stopped after {max_iter} iterations, log-likelihood {lls[-1]:.6g}",
                                     lls[-1]))
    return EMResult(frame, qids, contributors, post,
                    {c: conf[i] for i, c in enumerate(contributors)}, priors, lls, converged)


def em_ppv(cm: np.ndarray) -> float:
    """Macro-averaged column precision of a confusion matrix."""
    cm = np.asarray(cm, dtype=float)
    cols = cm.sum(axis=0)
    used = cols > 0
    if not used.any():
        raise DegenerateMatrix("confusion matrix has no non-zero column")
    return float(np.mean(np.diag(cm)[used] / cols[used]))


# Rjab expertise degrees --------------------------------------------------


def rjab_de(campaign: Campaign, contributor: str) -> float:
    """One minus the mean distance between the contributor and the rest of the crowd."""
    if len(campaign.contributors) < 2:
        raise LoneContributor("exactness needs at least two contributors")
    dists = []
    for r in campaign.by_contributor.get(contributor, ()):
        q = campaign.question(r.question)
        if q.is_attention:
            continue
        others = [response_to_mass(o, q) for o in campaign.by_question[q.id] if o.contributor != contributor]
        if not others:
            continue
        dists.append(jousselme_distance(response_to_mass(r, q), combine_mean(others)))
    if not dists:
        raise LoneContributor(f"no other contributor answered the questions of {contributor!r}")
    return 1.0 - float(np.mean(dists))


def precision_score(selected: int, likert: int, frame_size: int) -> float:
    """Per-question precision degree of one answer.

    The answer mass ``{X: w, frame: 1 - w}`` is scored as
    ``1 - sum m(Y) log|Y| / log|frame|``. When the whole frame is selected
    only the stated certainty ``w`` is attached to it, so an uncertain
    full-frame answer scores as perfectly precise.
    """
    if frame_size < 2:
        return 1.0
    omega = likert_to_omega(likert)
    log_omega = math.log2(frame_size)
    card = cardinality(selected)
    if card == frame_size:
        return 1.0 - omega
    return 1.0 - (omega * math.log2(card) / log_omega + (1.0 - omega))


def rjab_dp(campaign: Campaign, contributor: str) -> float:
    scores = []
    for r in campaign.by_contributor.get(contributor, ()):
        q = campaign.question(r.question)
        if q.is_attention:
            continue
        scores.append(precision_score(r.selected, r.likert, len(q.frame)))
    if not scores:
        raise NoResponses(f"contributor {contributor!r} answered no task question")
    return float(np.mean(scores))


def rjab_dg(de: float, dp: float, beta: float = 0.5) -> float:
    for name, v in (("de", de), ("dp", dp), ("beta", beta)):
        if not 0.0 <= v <= 1.0:
            raise ArgOutOfRange(f"{name} must lie in [0, 1], got {v}")
    return beta * de + (1.0 - beta) * dp


# k-means ------------------------------------------------------------------


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    sse_history: list[float]


def kmeans(points: np.ndarray, k: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-9) -> KMeansResult:
    """Lloyd's algorithm with seeded farthest-point initialisation.

    Empty clusters keep their previous center.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = len(x)
    if n < k:
        raise TooFewContributors(f"need at least {k} points, got {n}")
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(n))]
    while len(chosen) < k:
        d2 = np.min(((x[:, None, :] - x[chosen][None, :, :]) ** 2).sum(axis=2), axis=1)
        chosen.append(int(np.argmax(d2)))
    centers = x[chosen].copy()
    history = []
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(n), labels].sum()))
        new = centers.copy()
        for j in range(k):
            members = x[labels == j]
            if len(members):
                new[j] = members.mean(axis=0)
        shift = float(np.max(np.abs(new - centers)))
        centers = new
        if shift <= tol:
            break
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    history.append(float(d2[np.arange(n), labels].sum()))
    return KMeansResult(labels, centers, history)


def kmeans_profiles(
    features: Mapping[str, Sequence[float] | float],
    k: int = 4,
    seed: int = 0,
    rank_feature: int = 0,
) -> dict[str, ProfileLabel]:
    """Cluster contributors and name clusters by ascending ``rank_feature``.

    The cluster whose center is lowest on the ranking feature (DE, DG or PPV)
    becomes Bad, the highest Expert; equal centers keep cluster order.
    """
    if k != len(RANKED_PROFILES):
        raise ConfigError(f"profile clustering uses k={len(RANKED_PROFILES)}, got {k}")
    ids = list(features)
    pts = np.array([np.atleast_1d(np.asarray(features[c], dtype=float)) for c in ids])
    res = kmeans(pts, k, seed)
    order = sorted(range(k), key=lambda j: (res.centers[j, rank_feature], j))
    rank = {j: RANKED_PROFILES[pos] for pos, j in enumerate(order)}
    return {c: rank[int(lab)] for c, lab in zip(ids, res.labels)}


# Komarov validity ---------------------------------------------------------


def komarov_validity(campaign: Campaign, contributor: str, width: float = 3.0) -> float:
    """Share of the contributor's times inside ``[Q1 - 3 IQR, Q3 + 3 IQR]`` of each question."""
    flags = []
    for r in campaign.by_contributor.get(contributor, ()):
        q = campaign.question(r.question)
        if q.is_attention:
            continue
        times = [o.response_time_s for o in campaign.by_question[q.id]]
        q1, q3 = np.quantile(times, [0.25, 0.75])
        iqr = q3 - q1
        flags.append(q1 - width * iqr <= r.response_time_s <= q3 + width * iqr)
    if not flags:
        raise NoResponses(f"contributor {contributor!r} answered no task question")
    return float(np.mean(flags))


# report -------------------------------------------------------------------

BASELINE_CSV_COLUMNS = (
    "contributor_id", "de", "dp", "dg", "ppv", "komarov_validity",
    "kmeans_profile_de_dp", "kmeans_profile_dg", "kmeans_profile_ppv",
)


@dataclass
class BaselineReport:
    rows: dict[str, dict[str, object]]
    em_applicable: bool


def baseline_report(campaign: Campaign, beta: float = 0.5, seed: int = 0) -> BaselineReport:
    """Every baseline score for every contributor.

    PPV columns are left empty when EM cannot run on the campaign.
    """
    ids = list(campaign.contributors)
    de = {c: rjab_de(campaign, c) for c in ids}
    dp = {c: rjab_dp(campaign, c) for c in ids}
    dg = {c: rjab_dg(de[c], dp[c], beta) for c in ids}
    try:
        em = em_dawid_skene(campaign)
        ppv = {c: em_ppv(em.confusion[c]) for c in ids if c in em.confusion}
        em_ok = True
    except IncompatibleFrames:
        ppv, em_ok = {}, False
    enough = len(ids) >= len(RANKED_PROFILES)
    prof_dedp = kmeans_profiles({c: (de[c], dp[c]) for c in ids}, seed=seed) if enough else {}
    prof_dg = kmeans_profiles({c: dg[c] for c in ids}, seed=seed) if enough else {}
    prof_ppv = kmeans_profiles(ppv, seed=seed) if em_ok and len(ppv) >= len(RANKED_PROFILES) else {}
    rows = {}
    for c in ids:
        rows[c] = {
            "contributor_id": c,
            "de": de[c],
            "dp": dp[c],
            "dg": dg[c],
            "ppv": ppv.get(c, ""),
            "komarov_validity": komarov_validity(campaign, c),
            "kmeans_profile_de_dp": getattr(prof_dedp.get(c), "value", ""),
            "kmeans_profile_dg": getattr(prof_dg.get(c), "value", ""),
            "kmeans_profile_ppv": getattr(prof_ppv.get(c), "value", ""),
        }
    return BaselineReport(rows, em_ok)


def write_baseline_csv(report: BaselineReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=BASELINE_CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in report.rows.values():
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
