"""Belief-function truth inference for crowdsourcing campaigns."""

from .campaign import (
    Campaign,
    ProfileLabel,
    Question,
    Response,
    default_synthetic_campaign,
    generate_synthetic_campaign,
    parse_campaign_csv,
    response_to_mass,
    write_campaign_csv,
)
from .evidential import (
    Frame,
    MassFunction,
    SimpleSupport,
    canonical_decompose,
    combine_conjunctive,
    combine_dempster,
    combine_lns,
    combine_mean,
    decide_min_distance,
    decide_pignistic,
    discount,
    jousselme_distance,
    pignistic,
)
from .experiments import (
    ExperimentConfig,
    bootstrap_curves,
    learn_characteristic_alphas,
    learn_profile_discounts,
    reference_profile_from_crr,
)
from .fusion import ProfileDiscounts, aggregate_campaign, aggregate_question, contributor_crr, crowd_crr
from .profile import AlphaWeights, decide_profile, estimate_profiles, gamma_threshold

__version__ = "0.1.0"
