"""Large deviations of self-normalized sums."""

import json as _json

from ._core import (
    ConfigError,
    Distribution,
    Normalizer,
    NumericFailure,
    PreconditionError,
    asymptotic_prob,
    contour,
    cumulant,
    direct_mc,
    exact_prob,
    importance_mc,
    in_target_set,
    j_boundary,
    j_halfplane,
    j_supinf,
    log_exact_prob,
    rate_at,
    z_star,
)
from ._core import rate_report_json as _rate_report_json
from ._core import asymptotic_estimate_json as _asymptotic_estimate_json


def rate_report(dist, norm, z):
    """All applicable rate routes at z, as a dict."""
    return _json.loads(_rate_report_json(dist, norm, z))


def asymptotic_estimate(dist, norm, z, n):
    """Exact asymptotics at z and n with every intermediate quantity."""
    return _json.loads(_asymptotic_estimate_json(dist, norm, z, n))


__all__ = [
    "ConfigError",
    "Distribution",
    "Normalizer",
    "NumericFailure",
    "PreconditionError",
    "asymptotic_prob",
    "contour",
    "cumulant",
    "direct_mc",
    "exact_prob",
    "importance_mc",
    "in_target_set",
    "j_boundary",
    "j_halfplane",
    "j_supinf",
    "log_exact_prob",
    "rate_at",
    "rate_report",
    "asymptotic_estimate",
    "z_star",
]
