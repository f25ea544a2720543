"""Command-line entry point: ``beliefcrowd <subcommand> ...``."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .baselines import baseline_report, shared_frame, write_baseline_csv
from .campaign import (
    ProfileLabel,
    default_profile_specs,
    generate_synthetic_campaign,
    parse_campaign_csv,
    read_truth_csv,
    write_campaign_csv,
    write_truth_csv,
)
from .errors import BeliefCrowdError, ConfigError, IncompatibleFrames, SchemaError
from .evidential import Frame
from .experiments import (
    ExperimentConfig,
    bootstrap_curves,
    learn_characteristic_alphas,
    learn_profile_discounts,
    split_contributors,
    write_curves_csv,
    write_curves_dat,
)
from .fusion import RULES, ProfileDiscounts, aggregate_campaign, crowd_crr, write_decisions_csv
from .profile import AlphaWeights, estimate_profiles, read_profiles_csv, write_profiles_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INAPPLICABLE = 3


def _floats(text: str, n: int, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise ConfigError(f"{what}: expected {n} values, got {len(vals)}")
    return vals


def _ints(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated integers, got {text!r}") from None


def _counts(text: str) -> list[tuple[ProfileLabel, int]]:
    out = []
    for part in text.split(","):
        name, _, count = part.partition(":")
        try:
            out.append((ProfileLabel(name.strip().capitalize()), int(count)))
        except ValueError:
            raise ConfigError(f"--contributors: bad entry {part!r}, expected profile:count") from None
    return out


def cmd_simulate(args) -> int:
    specs = default_profile_specs()
    counts = _counts(args.contributors)
    frame = Frame(tuple(f"r{i}" for i in range(args.frame_size)))
    sim = generate_synthetic_campaign(
        [(specs[label], n) for label, n in counts], args.questions, frame,
        args.imp_max, args.attention, args.seed)
    write_campaign_csv(sim.campaign, args.out)
    if args.truth_out:
        write_truth_csv(sim.planted, args.truth_out)
    print(f"wrote {len(sim.campaign.responses)} responses from {len(sim.campaign.contributors)} contributors to {args.out}")
    return EXIT_OK


def _alpha_weights(args) -> AlphaWeights:
    p, c, r, a = _floats(args.alphas, 4, "--alphas")
    d = args.char_discount
    return AlphaWeights(p, c, r, a, d, d, d, d)


def cmd_profile(args) -> int:
    campaign = parse_campaign_csv(args.input)
    results = estimate_profiles(campaign, _alpha_weights(args))
    write_profiles_csv(results, args.out)
    tally = {p.value: sum(r.label == p for r in results.values()) for p in ProfileLabel}
    print(" ".join(f"{k}={v}" for k, v in tally.items()))
    return EXIT_OK


def cmd_learn_profile_alphas(args) -> int:
    campaign = parse_campaign_csv(args.input)
    train, test = split_contributors(campaign, args.split, args.seed)
    truth = read_truth_csv(args.truth) if args.truth else None
    res = learn_characteristic_alphas(campaign, train, test, args.grid_max,
                                      base=AlphaWeights(*(1.0,) * 4, *(args.char_discount,) * 4),
                                      test_reference=truth)
    w = res.weights.weights
    print(f"alphas={','.join(f'{v:g}' for v in w)} train_ccr={res.train_ccr:.4f} test_ccr={res.test_ccr:.4f}")
    return EXIT_OK


def cmd_aggregate(args) -> int:
    campaign = parse_campaign_csv(args.input)
    profiles = read_profiles_csv(args.profiles) if args.profiles else None
    d = ProfileDiscounts(*_floats(args.discounts, 4, "--discounts"))
    decisions = aggregate_campaign(campaign, profiles, d, args.rule)
    write_decisions_csv(decisions, campaign, args.out)
    gold = [dec for dec in decisions if campaign.question(dec.question).gold is not None]
    if gold:
        print(f"crowd_crr={crowd_crr(gold, campaign):.4f} over {len(gold)} questions")
    return EXIT_OK


def cmd_learn_discounts(args) -> int:
    campaign = parse_campaign_csv(args.input)
    profiles = read_profiles_csv(args.profiles)
    train, test = split_contributors(campaign, args.split, args.seed)
    res = learn_profile_discounts(campaign, profiles, train, test)
    print(f"discounts={','.join(f'{v:g}' for v in res.discounts.as_tuple())} "
          f"train_crr={res.train_crr:.4f} test_crr={res.test_crr:.4f}")
    return EXIT_OK


def cmd_baselines(args) -> int:
    campaign = parse_campaign_csv(args.input)
    report = baseline_report(campaign, args.beta, args.seed)
    write_baseline_csv(report, args.out)
    if not report.em_applicable:
        print("EM skipped: questions do not share one frame", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    campaign = parse_campaign_csv(args.input)
    methods = tuple(m.strip() for m in args.methods.split(","))
    cfg = ExperimentConfig(
        sizes=_ints(args.sizes, "--sizes"), repetitions=args.reps, seed=args.seed, methods=methods,
        profile_weights=AlphaWeights(*_floats(args.alphas, 4, "--alphas")),
        discounts=ProfileDiscounts(*_floats(args.discounts, 4, "--discounts")),
        rule=args.rule, workers=args.workers)
    if "em" in methods:
        shared_frame(campaign)
    points = bootstrap_curves(campaign, cfg)
    write_curves_csv(points, args.out)
    if args.dat:
        write_curves_dat(points, args.dat)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beliefcrowd", description="Belief-function truth inference for crowdsourcing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic campaign with planted profiles")
    p.add_argument("--contributors", default="expert:8,good:16,average:16,bad:8")
    p.add_argument("--questions", type=int, default=50)
    p.add_argument("--frame-size", type=int, default=10)
    p.add_argument("--imp-max", type=int, default=5)
    p.add_argument("--attention", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("profile", help="estimate contributor profiles")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alphas", default="1,6,2,1", help="precision,certainty,reflection,attention weights")
    p.add_argument("--char-discount", type=float, default=0.9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("learn-profile-alphas", help="grid-search the characteristic weights")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--grid-max", type=int, default=10)
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--char-discount", type=float, default=0.9)
    p.add_argument("--truth", help="planted profiles to score the test split against")
    p.set_defaults(func=cmd_learn_profile_alphas)

    p = sub.add_parser("aggregate", help="aggregate answers per question")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--profiles")
    p.add_argument("--discounts", default="1.0,0.85,0.40,0.20")
    p.add_argument("--rule", choices=RULES, default="mean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("learn-discounts", help="grid-search the profile discounts")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--profiles", required=True)
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_learn_discounts)

    p = sub.add_parser("baselines", help="score contributors with the baseline methods")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baselines)

    p = sub.add_parser("compare", help="bootstrap crowd CRR against crowd size")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--methods", default="mv,em,monitor,mean09")
    p.add_argument("--sizes", default="2,4,6,8,10,15,20,25,30,35,40,45,50")
    p.add_argument("--reps", type=int, default=25)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--alphas", default="1,6,2,1")
    p.add_argument("--discounts", default="1.0,0.85,0.40,0.20")
    p.add_argument("--rule", choices=RULES, default="mean")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dat", help="also write a gnuplot data file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IncompatibleFrames as exc:
        print(f"error: method inapplicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except (SchemaError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BeliefCrowdError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
