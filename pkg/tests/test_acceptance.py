"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import math
import time
import warnings

import numpy as np
import pytest

import oracles
from conftest import random_mass, random_separable, to_sets
from beliefcrowd.baselines import em_dawid_skene
from beliefcrowd.campaign import Campaign, ProfileLabel, Question, Response, default_synthetic_campaign
from beliefcrowd.cli import main
from beliefcrowd.errors import NonConvergence
from beliefcrowd.evidential import (
    Frame,
    canonical_decompose,
    combine_conjunctive,
    combine_dempster,
    discount,
    jousselme_distance,
    make_simple_support,
)
from beliefcrowd.experiments import (
    ExperimentConfig,
    bootstrap_curves,
    learn_characteristic_alphas,
    learn_profile_discounts,
    reference_profile_from_crr,
    split_contributors,
)
from beliefcrowd.profile import decide_profile, estimate_profiles, fuse_profile, contributor_characteristics
from beliefcrowd.profile import gamma_threshold

E, G, A, B = ProfileLabel.EXPERT, ProfileLabel.GOOD, ProfileLabel.AVERAGE, ProfileLabel.BAD


@pytest.fixture
def report(capsys):
    def _report(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return _report


def test_criterion_01_gamma_table(report):
    t = time.perf_counter()
    table = [1.00, 0.82, 0.61, 0.35, 0.00]
    got = [gamma_threshold(k, 5, 10) for k in range(1, 6)]
    elapsed = time.perf_counter() - t
    misses = [(k + 1, round(g, 5), want) for k, (g, want) in enumerate(zip(got, table)) if abs(g - want) > 0.005]
    report(1, not misses and elapsed < 1.0,
           f"gamma(|X|) = {[round(g, 4) for g in got]} vs {table} (+-0.005); outside tolerance: {misses}")


def test_criterion_02_bird_example(report):
    t = time.perf_counter()
    birds = Frame(("crow", "raven", "sparrow"))
    m = make_simple_support(birds, birds.subset(["crow", "raven"]), 0.7)
    x = birds.subset(["crow", "raven"])
    # 0.3 is not reachable as 1 - 0.7 in binary floating point: require the exact
    # IEEE result of that subtraction, which sits within one ulp of 0.3
    exact = (m.focal_sets == (x, birds.full) and m[x] == 0.7 and m[birds.full] == 1.0 - 0.7
             and abs(m[birds.full] - 0.3) <= math.ulp(0.3))
    vac = discount(m, 0.0)
    ok = exact and vac.is_vacuous and dict(vac.items()) == {birds.full: 1.0} and time.perf_counter() - t < 1.0
    report(2, ok, f"answer mass {m.to_text()}, fully discounted {vac.to_text()}")


def test_criterion_03_crr_bands(report):
    cases = {0.0: B, 0.1: B, 0.2: B, 0.21: A, 0.35: A, 0.4999: A, 0.5: G, 0.7: G, 0.8499: G, 0.85: E, 0.9: E, 1.0: E}
    wrong = {crr: reference_profile_from_crr(crr).value for crr, want in cases.items()
             if reference_profile_from_crr(crr) != want}
    report(3, not wrong, f"{len(cases)} band cases incl. 0.2->Bad, 0.5->Good, 0.85->Expert; wrong: {wrong}")


def test_criterion_04_discount_ordering(report):
    learned = []
    for seed in range(5):
        c = default_synthetic_campaign(seed=seed).campaign
        profiles = {k: r.label for k, r in estimate_profiles(c).items()}
        train, test = split_contributors(c, 0.5, seed)
        learned.append(learn_profile_discounts(c, profiles, train, test).discounts.as_tuple())
    ok = all(e > g > a >= b for e, g, a, b in learned)
    report(4, ok, f"learned (E, G, A, B) on 5 campaigns: {learned}")


def test_criterion_05_combination_oracles(report):
    t = time.perf_counter()
    frame = Frame(("a", "b", "c", "d"))
    worst_conj = worst_demp = 0.0
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        ms = [random_mass(rng, frame, int(rng.integers(1, 6))) for _ in range(3)]
        got = combine_conjunctive(ms)
        want = oracles.conjunctive(*(to_sets(m) for m in ms))
        worst_conj = max(worst_conj, _sup_diff(to_sets(got), want))
    rng = np.random.default_rng(12345)
    done = 0
    while done < 1000:
        m1, m2 = (random_mass(rng, frame, int(rng.integers(1, 6))) for _ in range(2))
        if oracles.conjunctive(to_sets(m1), to_sets(m2)).get(frozenset(), 0.0) > 1 - 1e-9:
            continue  # total conflict
        want = oracles.dempster(to_sets(m1), to_sets(m2))
        worst_demp = max(worst_demp, _sup_diff(to_sets(combine_dempster([m1, m2])), want))
        done += 1
    elapsed = time.perf_counter() - t
    ok = worst_conj <= 1e-10 and worst_demp <= 1e-10 and elapsed < 10
    report(5, ok, f"max |conj - oracle| = {worst_conj:.2e}, max |dempster - oracle| = {worst_demp:.2e}, "
                  f"{elapsed:.2f}s")


def _sup_diff(a, b):
    return max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b))


def test_criterion_06_metric_and_decomposition(report):
    t = time.perf_counter()
    frame = Frame(("a", "b", "c", "d"))
    rng = np.random.default_rng(6)
    violations = 0
    for _ in range(500):
        m1, m2, m3 = (random_mass(rng, frame, int(rng.integers(1, 6))) for _ in range(3))
        d12, d21 = jousselme_distance(m1, m2), jousselme_distance(m2, m1)
        d13, d23 = jousselme_distance(m1, m3), jousselme_distance(m2, m3)
        violations += not (d12 >= -1e-9 and abs(d12 - d21) <= 1e-9 and jousselme_distance(m1, m1) <= 1e-9
                           and d13 <= d12 + d23 + 1e-9 and (d12 > 1e-9 or m1.isclose(m2, 1e-9)))
    worst = 0.0
    for _ in range(200):
        m = random_separable(rng, frame, int(rng.integers(1, 5)))
        back = combine_conjunctive([s.mass() for s in canonical_decompose(m)])
        worst = max(worst, _sup_diff(to_sets(back), to_sets(m)))
    elapsed = time.perf_counter() - t
    ok = violations == 0 and worst <= 1e-8 and elapsed < 10
    report(6, ok, f"metric violations {violations}/500, worst round-trip error {worst:.2e}, {elapsed:.2f}s")


def test_criterion_07_planted_profile_recovery(report):
    t = time.perf_counter()
    sim = default_synthetic_campaign(seed=42)
    c = sim.campaign
    train, test = split_contributors(c, 0.5, 7)
    res = learn_characteristic_alphas(c, train, test, test_reference=sim.planted)
    w = res.weights
    decided = {k: decide_profile(fuse_profile(contributor_characteristics(c, k, w).converted(), w))
               for k in c.contributors}
    overall = np.mean([decided[k] == sim.planted[k] for k in c.contributors])
    elapsed = time.perf_counter() - t
    ok = res.test_ccr >= 0.5 and elapsed < 60
    report(7, ok, f"alphas {w.weights}, test CCR vs planted {res.test_ccr:.3f} (all contributors "
                  f"{overall:.3f}), {elapsed:.1f}s")


def test_criterion_08_monitor_not_worse_than_mv(report):
    t = time.perf_counter()
    counts = {E: 7, G: 14, A: 14, B: 15}  # 15 / 50 = 30% Bad
    c = default_synthetic_campaign(counts=counts, seed=42).campaign
    cfg = ExperimentConfig(sizes=(20,), repetitions=25, seed=7, methods=("mv", "monitor"))
    pts = {p.method: p.mean for p in bootstrap_curves(c, cfg)}
    elapsed = time.perf_counter() - t
    ok = pts["monitor"] - pts["mv"] >= -0.01 and elapsed < 60
    report(8, ok, f"n=20, 25 reps: MONITOR {pts['monitor']:.4f} vs MV {pts['mv']:.4f}, {elapsed:.1f}s")


def _em_campaign(rng, noise, n_q=25, n_c=7, n_labels=4):
    frame = Frame(tuple(f"l{i}" for i in range(n_labels)))
    golds = rng.integers(n_labels, size=n_q)
    qs = tuple(Question(f"q{i}", frame, frame.labels[g], 2) for i, g in enumerate(golds))
    rs = []
    for qi, g in enumerate(golds):
        for k in range(n_c):
            lab = int(g) if rng.random() >= noise else int(rng.integers(n_labels))
            sel = 1 << lab
            if noise and rng.random() < 0.2:
                sel |= 1 << int(rng.integers(n_labels))
            rs.append(Response(f"c{k}", f"q{qi}", sel, 6, 1.0))
    return Campaign(qs, tuple(rs))


def test_criterion_09_em_sanity(report):
    t = time.perf_counter()
    drops = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergence)
        for seed in range(20):
            c = _em_campaign(np.random.default_rng(seed), noise=0.4)
            lls = np.diff(em_dawid_skene(c, max_iter=300, tol=1e-10).log_likelihoods)
            drops += int(np.sum(lls < -1e-9))
    c = _em_campaign(np.random.default_rng(99), noise=0.0)
    res = em_dawid_skene(c)
    decided = res.decisions()
    recovered = np.mean([decided[q.id] == q.gold for q in c.questions])
    present = sorted({res.frame.index(q.gold) for q in c.questions})
    diag = min(cm[k, k] for cm in res.confusion.values() for k in present)
    elapsed = time.perf_counter() - t
    ok = drops == 0 and recovered == 1.0 and diag >= 0.99 and elapsed < 30
    report(9, ok, f"likelihood decreases {drops} over 20 campaigns; noiseless recovery {recovered:.0%}, "
                  f"min diagonal {diag:.4f}, {elapsed:.1f}s")


def test_criterion_10_compare_determinism(report, tmp_path):
    t = time.perf_counter()
    src = tmp_path / "campaign.csv"
    assert main(["simulate", "--seed", "42", "--out", str(src)]) == 0
    args = ["compare", "--in", str(src), "--sizes", "2,4,6,8,10,15,20,25,30,35,40,45", "--seed", "7"]
    outs = []
    for i, extra in enumerate(([], [], ["--workers", "2"])):
        out = tmp_path / f"curves{i}.csv"
        assert main(args + extra + ["--out", str(out)]) == 0
        outs.append(out.read_bytes())
    elapsed = time.perf_counter() - t
    ok = outs[0] == outs[1] == outs[2] and elapsed < 120
    report(10, ok, f"3 compare runs (serial, serial, 2 workers) byte-identical: {outs[0] == outs[1] == outs[2]}, "
                   f"{len(outs[0].splitlines()) - 1} curve points, {elapsed:.1f}s")
