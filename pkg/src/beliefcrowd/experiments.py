"""
Calibration and evaluation: reference profiles from correct response rates,
grid searches for the profile weights and discounts, and bootstrap curves of
crowd accuracy against crowd size.
"""

from __future__ import annotations

import csv
import itertools
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .baselines import em_dawid_skene, kmeans_profiles, majority_vote, rjab_de, rjab_dp
from .campaign import Campaign, ProfileLabel, likert_to_omega
from .errors import ArgOutOfRange, ConfigError, NoGold, NoGoldQuestions, SizeExceedsCrowd
from .evidential import TIE_TOL, cardinality
from .fusion import ProfileDiscounts, aggregate_campaign, contributor_crr, crowd_crr
from .profile import (
    PROFILE_FRAME,
    AlphaWeights,
    contributor_characteristics,
    decide_profiles_batch,
    estimate_profiles,
    question_t0,
)
from .evidential import pignistic


def reference_profile_from_crr(crr: float) -> ProfileLabel:
    """Reference label from a contributor's correct response rate."""
    if not 0.0 <= crr <= 1.0:
        raise ArgOutOfRange(f"correct response rate must lie in [0, 1], got {crr}")
    if crr <= 0.2:
        return ProfileLabel.BAD
    if crr < 0.5:
        return ProfileLabel.AVERAGE
    if crr < 0.85:
        return ProfileLabel.GOOD
    return ProfileLabel.EXPERT


def reference_profiles(campaign: Campaign, contributors: Sequence[str] | None = None) -> dict[str, ProfileLabel]:
    ids = campaign.contributors if contributors is None else contributors
    try:
        return {c: reference_profile_from_crr(contributor_crr(campaign, c)) for c in ids}
    except NoGoldQuestions as exc:
        raise NoGold(str(exc)) from None


def split_contributors(campaign: Campaign, fraction: float = 0.5, seed: int = 0) -> tuple[list[str], list[str]]:
    """Seeded contributor-level train/test split (both keep campaign order)."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"split fraction must lie in (0, 1), got {fraction}")
    ids = list(campaign.contributors)
    rng = np.random.default_rng(seed)
    n_train = int(round(fraction * len(ids)))
    picked = set(rng.permutation(len(ids))[:n_train].tolist())
    train = [c for i, c in enumerate(ids) if i in picked]
    test = [c for i, c in enumerate(ids) if i not in picked]
    return train, test


# characteristic weights ---------------------------------------------------


def weight_grid(grid_max: int) -> np.ndarray:
    """All integer 4-tuples in ``[0, grid_max]`` except all zeros, lexicographic order."""
    if grid_max < 1:
        raise ConfigError("grid_max must be >= 1")
    grid = np.array(list(itertools.product(range(grid_max + 1), repeat=4)), dtype=float)
    return grid[1:]


@dataclass(frozen=True)
class LearnedAlphas:
    weights: AlphaWeights
    train_ccr: float
    test_ccr: float | None
    n_evaluated: int


def characteristic_betp(
    campaign: Campaign,
    contributors: Sequence[str],
    base: AlphaWeights | None = None,
) -> np.ndarray:
    """Pignistic vectors of each converted characteristic, shape (contributors, 4, 4)."""
    base = base or AlphaWeights()
    t0 = question_t0(campaign)
    out = np.empty((len(contributors), 4, len(PROFILE_FRAME)))
    for i, c in enumerate(contributors):
        chars = contributor_characteristics(campaign, c, base, t0)
        for j, m in enumerate(chars.converted()):
            out[i, j] = pignistic(m)
    return out


def profile_ccr(decided: Mapping[str, ProfileLabel], reference: Mapping[str, ProfileLabel]) -> float:
    ids = [c for c in reference if c in decided]
    if not ids:
        raise ArgOutOfRange("no contributor in common between decisions and reference")
    return float(np.mean([decided[c] == reference[c] for c in ids]))


def learn_characteristic_alphas(
    campaign: Campaign,
    train: Sequence[str],
    test: Sequence[str] | None = None,
    grid_max: int = 10,
    base: AlphaWeights | None = None,
    train_reference: Mapping[str, ProfileLabel] | None = None,
    test_reference: Mapping[str, ProfileLabel] | None = None,
) -> LearnedAlphas:
    """Exhaustive search of the four characteristic weights.

    Characteristics are computed on the whole campaign (they need no gold);
    the weights maximise agreement between decided profiles and the
    CRR-derived reference on ``train``. Ties go to the lexicographically
    smallest (precision, certainty, reflection, attention) tuple.
    """
    train = list(train)
    test = list(test or [])
    if not train:
        raise ConfigError("empty training set")
    if train_reference is None:
        train_reference = reference_profiles(campaign, train)
    if test and test_reference is None:
        test_reference = reference_profiles(campaign, test)
    grid = weight_grid(grid_max)
    ids = train + test
    betp = characteristic_betp(campaign, ids, base)
    fused = np.einsum("tj,cjl->tcl", grid, betp) / grid.sum(axis=1)[:, None, None]
    decided = decide_profiles_batch(fused)
    label_idx = {p: PROFILE_FRAME.index(p.value) for p in ProfileLabel}
    ref_train = np.array([label_idx[ProfileLabel(train_reference[c])] for c in train])
    scores = (decided[:, :len(train)] == ref_train[None, :]).mean(axis=1)
    best = int(np.argmax(scores))
    weights = (base or AlphaWeights()).with_weights(tuple(float(v) for v in grid[best]))
    test_ccr = None
    if test:
        ref_test = np.array([label_idx[ProfileLabel(test_reference[c])] for c in test])
        test_ccr = float((decided[best, len(train):] == ref_test).mean())
    return LearnedAlphas(weights, float(scores[best]), test_ccr, len(grid))


# profile discounts --------------------------------------------------------

_STEP = 0.05
DISCOUNT_RANGES = {  # in units of _STEP
    ProfileLabel.EXPERT: (10, 20),
    ProfileLabel.GOOD: (10, 17),
    ProfileLabel.AVERAGE: (4, 14),
    ProfileLabel.BAD: (0, 4),
}
_PROFILE_ORDER = (ProfileLabel.EXPERT, ProfileLabel.GOOD, ProfileLabel.AVERAGE, ProfileLabel.BAD)


def discount_grid() -> list[tuple[float, float, float, float]]:
    """Ordered (expert, good, average, bad) tuples, best tie-break first.

    Ties prefer a smaller Bad, then smaller Average, larger Good, larger Expert
    discount.
    """
    ranges = [range(lo, hi + 1) for lo, hi in (DISCOUNT_RANGES[p] for p in _PROFILE_ORDER)]
    units = [(e, g, a, b) for e, g, a, b in itertools.product(*ranges) if e > g > a >= b]
    units.sort(key=lambda t: (t[3], t[2], -t[1], -t[0]))
    return [tuple(round(u * _STEP, 10) for u in t) for t in units]


@dataclass(frozen=True)
class LearnedDiscounts:
    discounts: ProfileDiscounts
    train_crr: float
    test_crr: float | None
    n_evaluated: int


def _mean_rule_evidence(campaign: Campaign, profiles: Mapping[str, ProfileLabel], contributors: Sequence[str]):
    """Per-question, per-profile pignistic shifts for the mean rule.

    With the mean rule the pignistic vector of question q is
    ``1/M + sum_p alpha_p S[q, p] / K_q``; returns ``S`` padded with NaN, the
    crowd sizes ``K_q``, frame sizes and gold indices.
    """
    keep = set(contributors)
    qs = [q for q in campaign.task_questions
          if q.gold is not None and any(r.contributor in keep for r in campaign.by_question[q.id])]
    width = max((len(q.frame) for q in qs), default=1)
    s = np.full((len(qs), 4, width), np.nan)
    sizes = np.zeros(len(qs))
    m_sizes = np.zeros(len(qs), dtype=int)
    gold = np.zeros(len(qs), dtype=int)
    pidx = {p: i for i, p in enumerate(_PROFILE_ORDER)}
    for i, q in enumerate(qs):
        m = len(q.frame)
        s[i, :, :m] = 0.0
        m_sizes[i] = m
        gold[i] = q.frame.index(q.gold)
        for r in campaign.by_question[q.id]:
            if r.contributor not in keep:
                continue
            sizes[i] += 1
            if r.selected == q.frame.full:
                continue
            omega = likert_to_omega(r.likert)
            u = np.array([(r.selected >> j & 1) / cardinality(r.selected) for j in range(m)])
            s[i, pidx[ProfileLabel(profiles[r.contributor])], :m] += omega * (u - 1.0 / m)
    return qs, s, sizes, m_sizes, gold


def _score_discounts(grid: np.ndarray, s, sizes, m_sizes, gold) -> np.ndarray:
    shift = np.einsum("tp,qpl->tql", grid, s) / sizes[None, :, None]
    bet = shift + (1.0 / m_sizes)[None, :, None]
    bet = np.where(np.isnan(bet), -np.inf, bet)
    best = bet.max(axis=2, keepdims=True)
    decided = np.argmax(bet >= best - TIE_TOL, axis=2)
    return (decided == gold[None, :]).mean(axis=1)


def learn_profile_discounts(
    campaign: Campaign,
    profiles: Mapping[str, ProfileLabel],
    train: Sequence[str],
    test: Sequence[str] | None = None,
) -> LearnedDiscounts:
    """Grid search of the four profile discounts for mean-rule aggregation.

    Expert in [0.5, 1], Good in [0.5, 0.85], Average in [0.2, 0.7], Bad in
    [0, 0.2], step 0.05, restricted to Expert > Good > Average >= Bad; the
    objective is the crowd CRR of the ``train`` contributors.
    """
    train = list(train)
    qs, s, sizes, m_sizes, gold = _mean_rule_evidence(campaign, profiles, train)
    if not qs:
        raise NoGold("no gold-labelled question answered by the training crowd")
    grid = discount_grid()
    scores = _score_discounts(np.array(grid), s, sizes, m_sizes, gold)
    best = int(np.argmax(scores))
    d = ProfileDiscounts(*grid[best])
    test_crr = None
    if test:
        test_crr = crowd_crr(aggregate_campaign(campaign, profiles, d, contributors=test), campaign)
    return LearnedDiscounts(d, float(scores[best]), test_crr, len(grid))


# bootstrap curves ---------------------------------------------------------

METHODS = ("mv", "em", "monitor", "mean09", "rjab")


@dataclass(frozen=True)
class ExperimentConfig:
    sizes: tuple[int, ...] = (2, 4, 6, 8, 10, 15, 20, 25, 30, 35, 40, 45, 50)
    repetitions: int = 50
    seed: int = 0
    methods: tuple[str, ...] = ("mv", "em", "monitor", "mean09")
    split: float = 0.5
    rule: str = "mean"
    profile_weights: AlphaWeights = field(default_factory=lambda: AlphaWeights(1, 6, 2, 1))
    discounts: ProfileDiscounts = field(default_factory=ProfileDiscounts)
    beta: float = 0.5
    ci_level: float = 0.95
    ci_resamples: int = 2000
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.sizes or min(self.sizes) < 2:
            raise ConfigError("crowd sizes must all be >= 2")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not 0.0 < self.split < 1.0:
            raise ConfigError("split fraction must lie in (0, 1)")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ConfigError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if not 0.0 < self.ci_level < 1.0:
            raise ConfigError("ci_level must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass(frozen=True)
class CurvePoint:
    method: str
    n: int
    mean: float
    ci_low: float
    ci_high: float


def _subset_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def draw_crowd(contributors: Sequence[str], n: int, seed: int, rep: int) -> list[str]:
    rng = _subset_rng(seed, n, rep)
    picked = set(rng.choice(len(contributors), size=n, replace=False).tolist())
    return [c for i, c in enumerate(contributors) if i in picked]


def _method_crr(method: str, campaign: Campaign, crowd: Sequence[str], prepared: dict) -> float:
    cfg: ExperimentConfig = prepared["cfg"]
    keep = set(crowd)
    gold_qs = [q for q in campaign.task_questions
               if q.gold is not None and any(r.contributor in keep for r in campaign.by_question[q.id])]
    if method == "mv":
        return float(np.mean([majority_vote(campaign, q, keep) == q.gold for q in gold_qs]))
    if method == "em":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = em_dawid_skene(campaign.restrict(crowd))
        dec = res.decisions()
        return float(np.mean([dec[q.id] == q.gold for q in gold_qs]))
    if method == "mean09":
        decisions = aggregate_campaign(campaign, None, rule=cfg.rule, contributors=keep)
    else:
        profiles = prepared["monitor" if method == "monitor" else "rjab"]
        decisions = aggregate_campaign(campaign, profiles, cfg.discounts, cfg.rule, contributors=keep)
    return crowd_crr([d for d in decisions if campaign.question(d.question).gold is not None], campaign)


_WORKER_STATE: dict = {}


def _init_worker(campaign: Campaign, prepared: dict) -> None:
    _WORKER_STATE["campaign"] = campaign
    _WORKER_STATE["prepared"] = prepared


def _worker_repetition(job: tuple[int, int]) -> dict[str, float]:
    return _run_repetition(_WORKER_STATE["campaign"], _WORKER_STATE["prepared"], *job)


def _run_repetition(campaign: Campaign, prepared: dict, n: int, rep: int) -> dict[str, float]:
    cfg: ExperimentConfig = prepared["cfg"]
    crowd = draw_crowd(campaign.contributors, n, cfg.seed, rep)
    return {m: _method_crr(m, campaign, crowd, prepared) for m in cfg.methods}


def prepare_profiles(campaign: Campaign, cfg: ExperimentConfig) -> dict:
    prepared: dict = {"cfg": cfg}
    if "monitor" in cfg.methods:
        prepared["monitor"] = {c: r.label for c, r in estimate_profiles(campaign, cfg.profile_weights).items()}
    if "rjab" in cfg.methods:
        feats = {c: (rjab_de(campaign, c), rjab_dp(campaign, c)) for c in campaign.contributors}
        prepared["rjab"] = kmeans_profiles(feats, seed=cfg.seed)
    return prepared


def confidence_interval(values: Sequence[float], level: float, resamples: int, rng: np.random.Generator):
    """Percentile bootstrap interval of the mean, widened to contain the mean."""
    v = np.asarray(values, dtype=float)
    mean = float(v.mean())
    if v.size == 1 or np.all(v == v[0]):
        return mean, mean, mean
    idx = rng.integers(v.size, size=(resamples, v.size))
    means = v[idx].mean(axis=1)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [tail, 1.0 - tail])
    lo = float(np.clip(min(lo, mean), 0.0, 1.0))
    hi = float(np.clip(max(hi, mean), 0.0, 1.0))
    return mean, lo, hi


def bootstrap_curves(
    campaign: Campaign,
    cfg: ExperimentConfig,
    prepared: dict | None = None,
) -> list[CurvePoint]:
    """Mean crowd CRR with a 95% interval per method and crowd size.

    Repetition ``r`` at size ``n`` draws its crowd from a generator seeded with
    ``(seed, n, r)``, and every method sees the same crowd, so serial and
    parallel runs give identical results.
    """
    if not any(q.gold is not None for q in campaign.task_questions):
        raise NoGold("bootstrap curves need gold labels")
    if max(cfg.sizes) > len(campaign.contributors):
        raise SizeExceedsCrowd(f"crowd size {max(cfg.sizes)} exceeds {len(campaign.contributors)} contributors")
    prepared = prepared or prepare_profiles(campaign, cfg)
    jobs = [(n, r) for n in cfg.sizes for r in range(cfg.repetitions)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(campaign, prepared)) as pool:
            results = list(pool.map(_worker_repetition, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        results = [_run_repetition(campaign, prepared, *job) for job in jobs]
    points = []
    for mi, method in enumerate(cfg.methods):
        for n in cfg.sizes:
            vals = [res[method] for (nn, _), res in zip(jobs, results) if nn == n]
            mean, lo, hi = confidence_interval(vals, cfg.ci_level, cfg.ci_resamples,
                                               _subset_rng(cfg.seed, n, METHODS.index(method), 1))
            points.append(CurvePoint(method, n, mean, lo, hi))
    return points


CURVE_CSV_COLUMNS = ("method", "n", "mean_crr", "ci_low", "ci_high")


def write_curves_csv(points: Sequence[CurvePoint], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_CSV_COLUMNS)
        for p in points:
            writer.writerow([p.method, p.n, repr(p.mean), repr(p.ci_low), repr(p.ci_high)])


def write_curves_dat(points: Sequence[CurvePoint], path) -> None:
    """Whitespace table, one gnuplot data block per method."""
    with open(path, "w", encoding="utf-8") as fh:
        methods = list(dict.fromkeys(p.method for p in points))
        for i, method in enumerate(methods):
            if i:
                fh.write("\n\n")
            fh.write(f"# {method}\n# n mean_crr ci_low ci_high\n")
            for p in points:
                if p.method == method:
                    fh.write(f"{p.n} {p.mean!r} {p.ci_low!r} {p.ci_high!r}\n")
