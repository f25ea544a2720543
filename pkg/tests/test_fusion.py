import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefcrowd.baselines import majority_vote
from beliefcrowd.campaign import Campaign, ProfileLabel, Question, Response, default_synthetic_campaign
from beliefcrowd.errors import ArgOutOfRange, MissingGold, NoGoldQuestions, NoResponses, TotalConflict, UnknownContributor
from beliefcrowd.evidential import Frame, MassFunction, combine_conjunctive, combine_dempster
from beliefcrowd.fusion import (
    ProfileDiscounts,
    QuestionDecision,
    aggregate_campaign,
    aggregate_question,
    contributor_crr,
    crowd_crr,
    discount_by_profile,
    write_decisions_csv,
)

F = Frame(("a", "b", "c"))
E, G, A, B = ProfileLabel.EXPERT, ProfileLabel.GOOD, ProfileLabel.AVERAGE, ProfileLabel.BAD


def make(answers, gold="a", imp_max=3, frame=F):
    """``answers``: list of (contributor, selected labels, likert)."""
    q = Question("q", frame, gold, imp_max)
    rs = tuple(Response(c, "q", frame.subset(sel), lik, 1.0) for c, sel, lik in answers)
    return Campaign((q,), rs)


def test_discounts_validation():
    assert ProfileDiscounts().as_tuple() == (1.0, 0.85, 0.40, 0.20)
    for bad in ((0.8, 0.85, 0.4, 0.2), (1.0, 0.85, 0.3, 0.4), (1.2, 0.8, 0.4, 0.2), (1, 0.4, 0.4, 0.2)):
        with pytest.raises(ArgOutOfRange):
            ProfileDiscounts(*bad)
    ProfileDiscounts(1.0, 0.85, 0.4, 0.4)


def test_discount_by_profile_examples():
    m = MassFunction.from_labels(F, {"a": 0.8, "*": 0.2})
    assert discount_by_profile(m, E, ProfileDiscounts()) == m
    got = discount_by_profile(m, B, ProfileDiscounts(1.0, 0.85, 0.4, 0.05))
    assert got.isclose(MassFunction.from_labels(F, {"a": 0.04, "*": 0.96}), 1e-12)
    assert discount_by_profile(m, B, ProfileDiscounts(1.0, 0.85, 0.4, 0.0)).is_vacuous


def test_single_expert_answer():
    c = make([("u", ["a"], 6)])
    dec = aggregate_question(c, "q", {"u": E}, ProfileDiscounts())
    assert dec.decided == "a"


def test_tie_goes_to_lower_index():
    c = make([("u", ["b"], 6), ("v", ["a"], 6)])
    dec = aggregate_question(c, "q", {"u": G, "v": G}, ProfileDiscounts(1.0, 0.9, 0.4, 0.2))
    assert dec.betp[0] == pytest.approx(dec.betp[1], abs=1e-15)
    assert dec.decided == "a"


def test_majority_agreement_example():
    c = make([("u", ["a"], 6), ("v", ["a"], 6), ("w", ["b"], 6)])
    dec = aggregate_question(c, "q", {k: G for k in "uvw"})
    assert dec.decided == "a" == majority_vote(c, "q")


def test_default_alpha_without_profiles():
    c = make([("u", ["a"], 6), ("v", ["b"], 3)])
    dec = aggregate_question(c, "q")
    expected = (0.9 * 1 + 0) / 2
    assert dec.combined[F.subset(["a"])] == pytest.approx(expected, abs=1e-15)


def test_errors():
    c = make([("u", ["a"], 6)])
    with pytest.raises(NoResponses):
        aggregate_question(c, "q", contributors=["nobody"])
    with pytest.raises(UnknownContributor):
        aggregate_question(c, "q", {"v": E})
    with pytest.raises(ArgOutOfRange):
        aggregate_question(c, "q", rule="yager")
    clash = make([("u", ["a"], 6), ("v", ["b"], 6)])
    with pytest.raises(TotalConflict):
        aggregate_question(clash, "q", {"u": E, "v": E}, rule="dempster")


@pytest.mark.parametrize("rule", ["mean", "conjunctive", "dempster", "lns"])
def test_every_rule_decides(rule):
    c = make([("u", ["a"], 5), ("v", ["a", "b"], 4), ("w", ["c"], 2)])
    dec = aggregate_question(c, "q", {"u": E, "v": G, "w": B}, rule=rule, subset_decision=True)
    assert dec.decided == "a"
    assert dec.betp.sum() == pytest.approx(1.0)
    assert dec.decided_set is not None and "a" in dec.decided_set


def test_dempster_end_to_end_equals_normalized_conjunctive():
    c = make([("u", ["a"], 5), ("v", ["b"], 4), ("w", ["a", "c"], 3)])
    prof = {"u": E, "v": G, "w": A}
    conj = aggregate_question(c, "q", prof, rule="conjunctive")
    demp = aggregate_question(c, "q", prof, rule="dempster")
    k = conj.combined.conflict
    assert demp.conflict == pytest.approx(k)
    for x, v in demp.combined.items():
        assert v == pytest.approx(conj.combined[x] / (1 - k), abs=1e-12)


@settings(max_examples=100)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=15), st.integers(1, 6))
def test_mean_rule_matches_majority_vote(votes, likert):
    frame = Frame(("a", "b", "c", "d"))
    counts = np.bincount(votes, minlength=4)
    if (counts == counts.max()).sum() > 1:
        return
    c = make([(f"u{i}", [frame.labels[v]], likert) for i, v in enumerate(votes)], gold=None, imp_max=1, frame=frame)
    prof = {cid: G for cid in c.contributors}
    assert aggregate_question(c, "q", prof).decided == majority_vote(c, "q") == frame.labels[counts.argmax()]


@settings(max_examples=60)
@given(st.floats(0.0, 0.2), st.floats(0.0, 0.2))
def test_lower_bad_discount_moves_bad_mass_to_frame(b1, b2):
    lo, hi = sorted((b1, b2))
    c = make([("good", ["a"], 6), ("bad", ["b"], 6), ("bad2", ["b", "c"], 5)])
    prof = {"good": G, "bad": B, "bad2": B}
    m_hi = aggregate_question(c, "q", prof, ProfileDiscounts(1.0, 0.85, 0.4, hi)).combined
    m_lo = aggregate_question(c, "q", prof, ProfileDiscounts(1.0, 0.85, 0.4, lo)).combined
    # Good evidence unchanged, Bad evidence shrinks, frame mass grows by the difference
    assert m_lo[F.subset(["a"])] == pytest.approx(m_hi[F.subset(["a"])], abs=1e-15)
    for x in (F.subset(["b"]), F.subset(["b", "c"])):
        assert m_lo[x] <= m_hi[x] + 1e-15
    moved = sum(m_hi[x] - m_lo[x] for x in (F.subset(["b"]), F.subset(["b", "c"])))
    assert m_lo[F.full] - m_hi[F.full] == pytest.approx(moved, abs=1e-12)


def test_contributor_crr_examples():
    c = make([("u", ["a"], 6)])
    assert contributor_crr(c, "u") == 1.0
    assert contributor_crr(make([("u", ["a", "b"], 6)]), "u") == 0.5
    assert contributor_crr(make([("u", ["b"], 6)]), "u") == 0.0
    with pytest.raises(NoGoldQuestions):
        contributor_crr(make([("u", ["a"], 6)], gold=None), "u")


def test_crowd_crr_counting():
    c = default_synthetic_campaign(n_questions=50).campaign
    decisions = aggregate_campaign(c)
    gold = {q.id: q.gold for q in c.task_questions}
    fake = [QuestionDecision(d.question, d.combined, d.betp, gold[d.question]) for d in decisions]
    assert crowd_crr(fake, c) == 1.0
    wrong = [QuestionDecision(d.question, d.combined, d.betp, "r0" if gold[d.question] != "r0" else "r1")
             for d in decisions]
    assert crowd_crr(wrong, c) == 0.0
    half = fake[:25] + wrong[25:]
    assert crowd_crr(half, c) == 0.5
    with pytest.raises(MissingGold):
        crowd_crr(aggregate_campaign(make([("u", ["a"], 6)], gold=None)), make([("u", ["a"], 6)], gold=None))


def test_crr_bounds_on_synthetic_campaign():
    sim = default_synthetic_campaign(seed=4)
    c = sim.campaign
    for cid in c.contributors:
        assert 0.0 <= contributor_crr(c, cid) <= 1.0
    assert 0.0 <= crowd_crr(aggregate_campaign(c), c) <= 1.0


def test_decisions_csv(tmp_path):
    c = make([("u", ["a"], 6), ("v", ["b"], 2)])
    write_decisions_csv(aggregate_campaign(c, rule="conjunctive"), c, tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "question_id,decided,gold,correct,betp_top1,betp_top2,conflict_mass"
    q, decided, gold, correct, top1, top2, conflict = lines[1].split(",")
    assert (q, decided, gold, correct) == ("q", "a", "a", "1")
    assert float(top1) >= float(top2) and float(conflict) == pytest.approx(0.9 * 0.9 * 1 / 3, abs=1e-12)


def test_rule_helpers_consistent():
    ms = [MassFunction.from_labels(F, {"a": 0.5, "*": 0.5}), MassFunction.from_labels(F, {"b": 0.3, "*": 0.7})]
    assert combine_dempster(ms).isclose(
        MassFunction(F, {x: v / (1 - 0.15) for x, v in combine_conjunctive(ms).items() if x}), 1e-12)
