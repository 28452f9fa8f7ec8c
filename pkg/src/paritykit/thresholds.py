"""Group-threshold interventions on probability estimates.

The interventions here take the protected attribute into account directly:
they either threshold each group at its own cutoff or flip individual
decisions starting from the plain 0.5 rule. Candidates are ranked by a
score equal to parity-gap reduction per unit of expected accuracy given up,
and the number of flips taken in each group is chosen exactly, so the
result maximizes utility over everything the flip moves can reach (ranking
by score alone can overshoot by one flip on small samples).
"""

import math
from dataclasses import dataclass, asdict

import numpy as np

from .data import CV_GAP, EXACT_PARITY, EQUAL_FPR, P_PERCENT, ParityConstraint
from .errors import InfeasibleTargetError, ThresholdSeparationError
from .metrics import fairness_report, immediate_utility
from .data import FairnessReport, flips_between
from .validation import (
    GROUP_A,
    GROUP_B,
    as_bits,
    as_probs,
    as_groups,
    check_same_length,
    group_masks,
)


@dataclass(frozen=True)
class GroupThresholds:
    """Per-group probability cutoffs; decisions are positive iff prob > t."""

    t_a: float
    t_b: float

    def __post_init__(self):
        for name, t in (("t_a", self.t_a), ("t_b", self.t_b)):
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {t}")

    def for_group(self, group: str) -> float:
        return self.t_a if group == GROUP_A else self.t_b


@dataclass(frozen=True)
class FlipRecord:
    """One entry of a flip ledger.

    ``p_gap_after`` and ``cv_gap_after`` are the gaps once this flip (and
    all earlier ones) are applied; the p-gap uses the target's p, or 100
    when the target is not a p-% rule.
    """

    order: int
    index: int
    group: str
    direction: str
    score: float
    p_gap_after: float
    cv_gap_after: float

    def to_dict(self) -> dict:
        return asdict(self)


def apply_thresholds(probs, groups, thresholds: GroupThresholds) -> np.ndarray:
    """Threshold each group at its own cutoff (strictly: positive iff prob > t)."""
    probs = as_probs(probs)
    groups = as_groups(groups)
    check_same_length(probs=probs, groups=groups)
    cutoffs = np.where(groups == GROUP_A, thresholds.t_a, thresholds.t_b)
    return (probs > cutoffs).astype(np.int8)


def respects_rational_ordering(probs, groups, decisions) -> bool:
    """True if, within each group, no one outranked by probability does better."""
    probs = as_probs(probs)
    groups = as_groups(groups)
    decisions = as_bits(decisions, "decisions")
    check_same_length(probs=probs, groups=groups, decisions=decisions)
    for mask in group_masks(groups, require_nonempty=False):
        pos = probs[mask & (decisions == 1)]
        neg = probs[mask & (decisions == 0)]
        if pos.size and neg.size and neg.max() > pos.min():
            return False
    return True


def _flip_score(prob: float, group: str, n_a: int, n_b: int, p: float) -> float:
    """Gap reduction per unit of expected accuracy cost for one flip."""
    if group == GROUP_A:
        denom = n_a * (2.0 * prob - 1.0)
        return math.inf if denom == 0.0 else (p / 100.0) / denom
    denom = n_b * (1.0 - 2.0 * prob)
    return math.inf if denom == 0.0 else 1.0 / denom


class _FlipProblem:
    """Shared state for the flip-based optimizers.

    Starting point is the 0.5-threshold rule. The only moves are demotions
    in group a (cheapest positives first) and promotions in group b
    (cheapest negatives first), which are the only moves that close a
    disadvantage toward group b.
    """

    def __init__(self, probs, groups, target: ParityConstraint):
        if target.kind == EQUAL_FPR:
            raise ValueError("equal_fpr targets need labels; use equal_fpr_thresholds")
        self.probs = as_probs(probs)
        self.groups = as_groups(groups)
        self.n = check_same_length(probs=self.probs, groups=self.groups)
        self.target = target
        self.mask_a, self.mask_b = group_masks(self.groups)
        self.n_a = int(self.mask_a.sum())
        self.n_b = int(self.mask_b.sum())
        self.baseline = (self.probs > 0.5).astype(np.int8)
        self.pos_a0 = int(self.baseline[self.mask_a].sum())
        self.pos_b0 = int(self.baseline[self.mask_b].sum())

        # Group-a positives, cheapest demotion first (lowest probability).
        idx_a = np.flatnonzero(self.mask_a & (self.baseline == 1))
        self.down_idx = idx_a[np.lexsort((idx_a, self.probs[idx_a]))]
        # Group-b negatives, cheapest promotion first (highest probability).
        idx_b = np.flatnonzero(self.mask_b & (self.baseline == 0))
        self.up_idx = idx_b[np.lexsort((idx_b, -self.probs[idx_b]))]

        down_costs = self.probs[self.down_idx] - 0.5
        up_costs = 0.5 - self.probs[self.up_idx]
        self.down_cost_prefix = np.concatenate(([0.0], np.cumsum(down_costs)))
        self.up_cost_prefix = np.concatenate(([0.0], np.cumsum(up_costs)))

    def max_down(self) -> int:
        return 0 if self.target.do_no_harm else len(self.down_idx)

    def satisfied(self, n_down: int, n_up: int) -> bool:
        return self.target.satisfied_counts(
            self.pos_a0 - n_down, self.n_a, self.pos_b0 + n_up, self.n_b
        )

    def gap(self, n_down: int, n_up: int) -> float:
        return self.target.gap_counts(
            self.pos_a0 - n_down, self.n_a, self.pos_b0 + n_up, self.n_b
        )

    def cost(self, n_down: int, n_up: int) -> float:
        return float(self.down_cost_prefix[n_down] + self.up_cost_prefix[n_up])

    def _min_up_for(self, n_down: int) -> int | None:
        """Smallest promotion count meeting the parity part of the target."""
        lo, hi = 0, len(self.up_idx)
        if self.gap(n_down, hi) > 0.0:
            return None
        while lo < hi:
            mid = (lo + hi) // 2
            if self.gap(n_down, mid) <= 0.0:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def _max_up_for_cap(self, n_down: int) -> int:
        cap = self.target.resource_cap
        if cap is None:
            return len(self.up_idx)
        # Largest n_up with overall positive share within the cap.
        best = -1
        lo, hi = 0, len(self.up_idx)
        while lo <= hi:
            mid = (lo + hi) // 2
            total = (self.pos_a0 - n_down) + (self.pos_b0 + mid)
            if total / self.n <= cap:
                best = mid
                lo = mid + 1
            else:
                hi = mid - 1
        return best

    def best_counts(self) -> tuple[int, int]:
        """Exact optimum (demotions, promotions) over the flip moves."""
        if self.target.kind == EXACT_PARITY:
            return self._best_counts_exact_parity()
        if self.satisfied(0, 0):
            return 0, 0
        best = None
        best_gap = math.inf
        for n_down in range(self.max_down() + 1):
            n_up = self._min_up_for(n_down)
            cap_up = self._max_up_for_cap(n_down)
            if n_up is None or n_up > cap_up:
                feasible_gap = self.gap(n_down, min(len(self.up_idx), max(cap_up, 0)))
                best_gap = min(best_gap, feasible_gap)
                continue
            cand = (n_down, n_up)
            if best is None or self._better(cand, best):
                best = cand
        if best is None:
            raise InfeasibleTargetError(
                f"target {self.target.describe()} unreachable with available flips; "
                f"best achievable gap {best_gap:.6g}",
                best_gap=best_gap,
            )
        return best

    def _best_counts_exact_parity(self) -> tuple[int, int]:
        if self.target.resource_cap is not None:
            raise ValueError(
                "resource_cap with an exact-parity flip intervention is not "
                "supported; use optimal_thresholds"
            )
        # Work on the integer gap numerator: gap = num / (n_a * n_b).
        num0 = self.pos_a0 * self.n_b - self.pos_b0 * self.n_a
        if num0 <= 0:
            return 0, 0  # nothing to fix; flips could only widen a reversed gap
        candidates: list[tuple[int, int]] = []
        best_num = None
        for n_down in range(self.max_down() + 1):
            num_at_zero = num0 - n_down * self.n_b
            if num_at_zero < 0:
                continue  # demotions alone already overshoot
            n_up = min(len(self.up_idx), num_at_zero // self.n_a)
            num = num_at_zero - n_up * self.n_a
            if best_num is None or num < best_num:
                best_num = num
                candidates = [(n_down, n_up)]
            elif num == best_num:
                candidates.append((n_down, n_up))
        best = candidates[0]
        for cand in candidates[1:]:
            if self._better(cand, best):
                best = cand
        return best

    def _better(self, cand: tuple[int, int], incumbent: tuple[int, int]) -> bool:
        c_cost = self.cost(*cand)
        i_cost = self.cost(*incumbent)
        if c_cost != i_cost:
            return c_cost < i_cost
        if sum(cand) != sum(incumbent):
            return sum(cand) < sum(incumbent)
        return cand[1] > incumbent[1]  # prefer promotions on exact ties

    def realize(self, n_down: int, n_up: int) -> tuple[np.ndarray, list[FlipRecord]]:
        """Decisions plus a score-ordered ledger for the chosen flip counts."""
        p_for_score = self.target.p if self.target.kind == P_PERCENT else 100.0
        flips = []
        for i in self.down_idx[:n_down]:
            flips.append((int(i), GROUP_A, "1->0",
                          _flip_score(self.probs[i], GROUP_A, self.n_a, self.n_b,
                                      p_for_score)))
        for i in self.up_idx[:n_up]:
            flips.append((int(i), GROUP_B, "0->1",
                          _flip_score(self.probs[i], GROUP_B, self.n_a, self.n_b,
                                      p_for_score)))
        # Descending score; promotions first on ties, then ascending index.
        flips.sort(key=lambda f: (-f[3], 0 if f[1] == GROUP_B else 1, f[0]))

        decisions = self.baseline.copy()
        records = []
        done_down = 0
        done_up = 0
        for order, (i, group, direction, score) in enumerate(flips):
            decisions[i] = 0 if direction == "1->0" else 1
            if group == GROUP_A:
                done_down += 1
            else:
                done_up += 1
            pos_a = self.pos_a0 - done_down
            pos_b = self.pos_b0 + done_up
            q_a = pos_a / self.n_a
            q_b = pos_b / self.n_b
            records.append(FlipRecord(
                order=order,
                index=i,
                group=group,
                direction=direction,
                score=score,
                p_gap_after=(p_for_score / 100.0) * q_a - q_b,
                cv_gap_after=q_a - q_b,
            ))
        return decisions, records


def greedy_flip(probs, groups,
                target: ParityConstraint) -> tuple[np.ndarray, list[FlipRecord]]:
    """Close a parity gap by flipping the cheapest decisions first.

    Starts from the 0.5-threshold rule, demotes group-a positives and
    promotes group-b negatives in descending score order until the target
    gap is reached, and returns the new decisions with the full ledger.
    With ``do_no_harm`` only promotions are used. An exact-parity target
    stops at the smallest nonnegative gap the flips can reach.

    Raises InfeasibleTargetError when no amount of flipping reaches the
    target; the error carries the best achievable gap.
    """
    problem = _FlipProblem(probs, groups, target)
    n_down, n_up = problem.best_counts()
    return problem.realize(n_down, n_up)


def thresholds_from_flips(probs, groups, flip_log: list[FlipRecord]) -> GroupThresholds:
    """Per-group cutoffs that reproduce a flip ledger's final decisions.

    A group nobody flipped in keeps the 0.5 cutoff; otherwise the cutoff is
    the midpoint between the last probability admitted and the first one
    excluded. Raises ThresholdSeparationError when duplicate probabilities
    straddle the cut.
    """
    probs = as_probs(probs)
    groups = as_groups(groups)
    check_same_length(probs=probs, groups=groups)
    decisions = (probs > 0.5).astype(np.int8)
    touched = {GROUP_A: False, GROUP_B: False}
    for rec in flip_log:
        decisions[rec.index] = 1 if rec.direction == "0->1" else 0
        touched[rec.group] = True

    cutoffs = {}
    for group, mask in ((GROUP_A, groups == GROUP_A), (GROUP_B, groups == GROUP_B)):
        if not touched[group]:
            cutoffs[group] = 0.5
            continue
        k = int(decisions[mask].sum())
        cutoffs[group] = _separating_threshold(probs[mask], k)
    thresholds = GroupThresholds(t_a=cutoffs[GROUP_A], t_b=cutoffs[GROUP_B])
    if not np.array_equal(apply_thresholds(probs, groups, thresholds), decisions):
        raise ThresholdSeparationError(
            "no strict threshold pair reproduces the flipped decisions"
        )
    return thresholds


def _separating_threshold(group_probs: np.ndarray, k: int) -> float:
    """A cutoff admitting exactly the k highest of ``group_probs`` (strict >)."""
    ordered = np.sort(group_probs)[::-1]
    if k == 0:
        return float((ordered[0] + 1.0) / 2.0)
    if k == len(ordered):
        if ordered[-1] <= 0.0:
            raise ThresholdSeparationError(
                "cannot admit a zero probability with a strict threshold",
                value=0.0,
            )
        return float(ordered[-1] / 2.0)
    low, high = ordered[k], ordered[k - 1]
    if low == high:
        raise ThresholdSeparationError(
            f"duplicate probability {high!r} straddles the cut", value=float(high)
        )
    return float((low + high) / 2.0)


def optimal_thresholds(probs, groups, target: ParityConstraint,
                       labels=None) -> tuple[GroupThresholds, FairnessReport]:
    """Utility-maximizing per-group cutoffs subject to a parity target.

    Sweeps every pair of per-group admission counts, so the result is the
    exact constrained optimum over threshold rules. The report's accuracy
    is measured against ``labels`` when given, otherwise it is the
    model-expected accuracy implied by the probabilities and the per-group
    error rates are left undefined.
    """
    if target.kind == EQUAL_FPR:
        raise ValueError("equal_fpr targets need labels; use equal_fpr_thresholds")
    probs = as_probs(probs)
    groups = as_groups(groups)
    check_same_length(probs=probs, groups=groups)
    mask_a, mask_b = group_masks(groups)
    n_a = int(mask_a.sum())
    n_b = int(mask_b.sum())
    n = len(probs)

    sorted_a = np.sort(probs[mask_a])[::-1]
    sorted_b = np.sort(probs[mask_b])[::-1]
    util_a = np.concatenate(([0.0], np.cumsum(sorted_a - 0.5))) / n
    util_b = np.concatenate(([0.0], np.cumsum(sorted_b - 0.5))) / n
    peak_b = int((sorted_b > 0.5).sum())
    base_a = int((sorted_a > 0.5).sum())

    best: tuple[int, int] | None = None
    best_util = -math.inf
    for k_a in range(n_a + 1):
        k_b = _best_admission_b(target, k_a, n_a, n_b, peak_b)
        if k_b is None:
            continue
        util = float(util_a[k_a] + util_b[k_b])
        if best is not None and util == best_util:
            if _sweep_tiebreak((k_a, k_b), base_a, peak_b) >= \
               _sweep_tiebreak(best, base_a, peak_b):
                continue
        elif util <= best_util:
            continue
        best = (k_a, k_b)
        best_util = util
    if best is None:
        raise InfeasibleTargetError(
            f"no admission counts satisfy target {target.describe()}"
        )
    k_a, k_b = best

    thresholds = GroupThresholds(
        t_a=_separating_threshold(sorted_a, k_a) if n_a else 0.5,
        t_b=_separating_threshold(sorted_b, k_b) if n_b else 0.5,
    )
    decisions = apply_thresholds(probs, groups, thresholds)
    if int(decisions[mask_a].sum()) != k_a or int(decisions[mask_b].sum()) != k_b:
        raise ThresholdSeparationError(
            "duplicate probabilities prevent reproducing the optimal admission counts"
        )
    flips = flips_between((probs > 0.5).astype(np.int8), decisions, groups)
    if labels is not None:
        report = fairness_report(decisions, labels, groups, probs=probs, flips=flips)
    else:
        report = _expected_report(decisions, probs, groups, flips)
    return thresholds, report


def _sweep_tiebreak(counts: tuple[int, int], base_a: int, peak_b: int):
    k_a, k_b = counts
    return (abs(k_a - base_a) + abs(k_b - peak_b), -k_b)


def _best_admission_b(target: ParityConstraint, k_a: int, n_a: int, n_b: int,
                      peak_b: int) -> int | None:
    """Best group-b admission count for a given group-a count, or None."""
    if target.kind == EXACT_PARITY:
        if (k_a * n_b) % n_a != 0:
            return None
        k_b = (k_a * n_b) // n_a
        if k_b > n_b:
            return None
        if not target.satisfied_counts(k_a, n_a, k_b, n_b):  # resource cap
            return None
        return k_b
    # The gap is decreasing in k_b, so the feasible set is an upper range.
    lo, hi = 0, n_b
    if target.gap_counts(k_a, n_a, hi, n_b) > 0.0:
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if target.gap_counts(k_a, n_a, mid, n_b) <= 0.0:
            hi = mid
        else:
            lo = mid + 1
    k_min = lo
    if target.resource_cap is None:
        return max(k_min, min(peak_b, n_b))
    k_max = -1
    lo, hi = 0, n_b
    while lo <= hi:
        mid = (lo + hi) // 2
        if (k_a + mid) / (n_a + n_b) <= target.resource_cap:
            k_max = mid
            lo = mid + 1
        else:
            hi = mid - 1
    if k_max < k_min:
        return None
    return min(max(k_min, peak_b), k_max)


def _expected_report(decisions, probs, groups, flips) -> FairnessReport:
    from .metrics import cv_gap as _cv, group_rates, p_percent as _pp

    q_a, q_b = group_rates(decisions, groups)
    expected_acc = float(np.mean(decisions * probs + (1 - decisions) * (1 - probs)))
    return FairnessReport(
        accuracy=expected_acc,
        q_a=q_a,
        q_b=q_b,
        cv_gap=_cv(decisions, groups),
        p_percent=_pp(decisions, groups),
        fpr_a=math.nan,
        fpr_b=math.nan,
        fnr_a=math.nan,
        fnr_b=math.nan,
        immediate_utility=immediate_utility(decisions, probs, 0.5),
        flips=flips,
    )


def equal_fpr_thresholds(probs, groups, labels) -> GroupThresholds:
    """Utility-maximizing cutoff pair with (empirically) equal group FPRs.

    Candidate cutoffs per group are the observed probabilities plus 0;
    a pair is admissible when the two false positive rates agree to within
    one example of the smaller negative class.
    """
    probs = as_probs(probs)
    groups = as_groups(groups)
    labels = as_bits(labels, "labels")
    check_same_length(probs=probs, groups=groups, labels=labels)
    mask_a, mask_b = group_masks(groups)

    sides = {}
    for name, mask in ((GROUP_A, mask_a), (GROUP_B, mask_b)):
        neg = int((labels[mask] == 0).sum())
        if neg == 0:
            raise ValueError(f"group '{name}' has no negative examples")
        cands = np.unique(np.concatenate(([0.0], probs[mask])))
        p_g = probs[mask]
        y_g = labels[mask]
        fpr = np.array([
            float(((p_g > t) & (y_g == 0)).sum()) / neg for t in cands
        ])
        util = np.array([float(np.sum((p_g > t) * (p_g - 0.5))) for t in cands])
        sides[name] = (cands, fpr, util, neg)

    cand_a, fpr_a, util_a, neg_a = sides[GROUP_A]
    cand_b, fpr_b, util_b, neg_b = sides[GROUP_B]
    tol = 1.0 / min(neg_a, neg_b) + 1e-12

    best = None
    for block in range(0, len(cand_a), 256):
        fa = fpr_a[block:block + 256, None]
        ok = np.abs(fa - fpr_b[None, :]) <= tol
        if not ok.any():
            continue
        total = np.where(ok, util_a[block:block + 256, None] + util_b[None, :],
                         -np.inf)
        flat = int(np.argmax(total))
        i, j = divmod(flat, len(cand_b))
        cand = (
            float(total[i, j]),
            -abs(float(fpr_a[block + i] - fpr_b[j])),
            float(cand_a[block + i]),
            float(cand_b[j]),
        )
        if best is None or cand > best:
            best = cand
    _, _, t_a, t_b = best
    return GroupThresholds(t_a=t_a, t_b=t_b)


__all__ = [
    "GroupThresholds",
    "FlipRecord",
    "apply_thresholds",
    "greedy_flip",
    "thresholds_from_flips",
    "optimal_thresholds",
    "equal_fpr_thresholds",
    "respects_rational_ordering",
]
