"""Disparity and utility metrics for binary decisions over two groups.

All functions take plain arrays: ``decisions`` and ``labels`` are {0, 1}
vectors, ``probs`` are estimates of P(y=1 | inputs), and ``groups`` holds
the canonical labels "a" (advantaged) and "b" (protected).
"""

import math

import numpy as np

from .data import FairnessReport
from .validation import (
    as_bits,
    as_probs,
    as_groups,
    check_cost,
    check_same_length,
    group_masks,
)


def group_rates(decisions, groups) -> tuple[float, float]:
    """Per-group positive-decision rates (q_a, q_b).

    Parameters
    ----------
    decisions : array of {0, 1}
    groups : array of {"a", "b"}, both groups nonempty

    Returns
    -------
    (q_a, q_b) : fraction of each group receiving a positive decision.
    """
    decisions = as_bits(decisions, "decisions")
    groups = as_groups(groups)
    check_same_length(decisions=decisions, groups=groups)
    mask_a, mask_b = group_masks(groups)
    q_a = decisions[mask_a].sum() / mask_a.sum()
    q_b = decisions[mask_b].sum() / mask_b.sum()
    return float(q_a), float(q_b)


def cv_gap(decisions, groups) -> float:
    """Difference in positive rates q_a - q_b, in [-1, 1]."""
    q_a, q_b = group_rates(decisions, groups)
    return q_a - q_b


def p_percent(decisions, groups) -> float:
    """The ratio 100 * q_b / q_a.

    May exceed 100 when the protected group is favored. Degenerate cases:
    both rates zero gives 100.0 (no disparity to report), and q_a == 0 with
    q_b > 0 gives +inf.
    """
    q_a, q_b = group_rates(decisions, groups)
    if q_a == 0.0:
        return 100.0 if q_b == 0.0 else math.inf
    return 100.0 * q_b / q_a


def p_gap(decisions, groups, p: float) -> float:
    """The gap (p/100) * q_a - q_b; the p-% rule is satisfied iff this is <= 0."""
    q_a, q_b = group_rates(decisions, groups)
    return (p / 100.0) * q_a - q_b


def immediate_utility(decisions, probs, c: float) -> float:
    """Mean benefit of the positive decisions at cost c per selection.

    Computes (1/n) * sum_i d_i * (p_i - c) for 0 < c < 1. With c = 0.5 and
    degenerate probabilities (the labels themselves), maximizing this is the
    same as maximizing accuracy.
    """
    decisions = as_bits(decisions, "decisions")
    probs = as_probs(probs)
    check_same_length(decisions=decisions, probs=probs)
    c = check_cost(c)
    return float(np.sum(decisions * (probs - c)) / len(decisions))


def error_rates(decisions, labels) -> tuple[float, float]:
    """(FPR, FNR) of decisions against labels; NaN where a class is absent."""
    decisions = as_bits(decisions, "decisions")
    labels = as_bits(labels, "labels")
    check_same_length(decisions=decisions, labels=labels)
    neg = labels == 0
    pos = labels == 1
    fpr = float(decisions[neg].sum() / neg.sum()) if neg.any() else math.nan
    fnr = float((1 - decisions[pos]).sum() / pos.sum()) if pos.any() else math.nan
    return fpr, fnr


def cost_sensitive_risk(decisions, labels, c: float) -> float:
    """Class-prior-weighted error: pi*(1-c)*FNR + (1-pi)*c*FPR.

    Requires both classes present, otherwise one of the error rates is
    undefined. Related to immediate utility on degenerate probabilities by
    u(d, c) + risk(d, c) = pi * (1 - c).
    """
    decisions = as_bits(decisions, "decisions")
    labels = as_bits(labels, "labels")
    check_same_length(decisions=decisions, labels=labels)
    c = check_cost(c)
    if labels.min() == labels.max():
        raise ValueError("cost-sensitive risk needs both label classes present")
    fpr, fnr = error_rates(decisions, labels)
    pi = float(labels.mean())
    return pi * (1.0 - c) * fnr + (1.0 - pi) * c * fpr


def accuracy(decisions, labels) -> float:
    """Fraction of agreements between decisions and labels."""
    decisions = as_bits(decisions, "decisions")
    labels = as_bits(labels, "labels")
    check_same_length(decisions=decisions, labels=labels)
    return float(np.mean(decisions == labels))


def group_error_rates(decisions, labels, groups) -> tuple[float, float, float, float]:
    """(fpr_a, fpr_b, fnr_a, fnr_b); NaN for any group missing a class."""
    decisions = as_bits(decisions, "decisions")
    labels = as_bits(labels, "labels")
    groups = as_groups(groups)
    check_same_length(decisions=decisions, labels=labels, groups=groups)
    mask_a, mask_b = group_masks(groups)
    fpr_a, fnr_a = error_rates(decisions[mask_a], labels[mask_a])
    fpr_b, fnr_b = error_rates(decisions[mask_b], labels[mask_b])
    return fpr_a, fpr_b, fnr_a, fnr_b


def fairness_report(decisions, labels, groups, probs=None,
                    flips: list[dict] | None = None) -> FairnessReport:
    """Bundle the individual metrics into one report.

    ``immediate_utility`` (at c = 0.5) uses ``probs`` when given; otherwise
    the labels stand in as degenerate probabilities, which ties the utility
    to accuracy through the identity accuracy = 2*u - mean(y) + 1.
    """
    q_a, q_b = group_rates(decisions, groups)
    fpr_a, fpr_b, fnr_a, fnr_b = group_error_rates(decisions, labels, groups)
    utility_base = probs if probs is not None else labels
    return FairnessReport(
        accuracy=accuracy(decisions, labels),
        q_a=q_a,
        q_b=q_b,
        cv_gap=cv_gap(decisions, groups),
        p_percent=p_percent(decisions, groups),
        fpr_a=fpr_a,
        fpr_b=fpr_b,
        fnr_a=fnr_a,
        fnr_b=fnr_b,
        immediate_utility=immediate_utility(decisions, utility_base, 0.5),
        flips=list(flips) if flips else [],
    )


__all__ = [
    "group_rates",
    "cv_gap",
    "p_percent",
    "p_gap",
    "immediate_utility",
    "error_rates",
    "cost_sensitive_risk",
    "accuracy",
    "group_error_rates",
    "fairness_report",
]
