"""Exhaustive verifiers for small instances.

These are deliberately brute-force: they enumerate every decision vector
(or every decision rule on a finite world) and therefore serve as ground
truth for the greedy and sweep-based optimizers. Sizes are capped so the
enumeration stays cheap.
"""

from dataclasses import dataclass

import numpy as np

from .data import EXACT_PARITY, EQUAL_FPR, ParityConstraint
from .errors import InfeasibleTargetError
from .metrics import immediate_utility
from .validation import GROUP_A, GROUP_B, as_probs, as_groups, check_same_length, group_masks

MAX_EMPIRICAL_N = 16
MAX_WORLD_X = 12


def _feasible_mask(constraint: ParityConstraint, sel_a, n_a: int, sel_b, n_b: int):
    """Vectorized feasibility for arrays of per-group positive counts.

    Mirrors ParityConstraint.gap_counts operation-for-operation so scalar
    and vectorized callers agree on boundary cases.
    """
    sel_a = np.asarray(sel_a)
    sel_b = np.asarray(sel_b)
    if constraint.kind == EXACT_PARITY:
        ok = sel_a.astype(np.int64) * n_b == sel_b.astype(np.int64) * n_a
    else:
        q_a = sel_a / n_a
        q_b = sel_b / n_b
        if constraint.kind == "cv_gap":
            ok = (q_a - q_b) - constraint.gamma <= 0.0
        elif constraint.kind == "p_percent":
            ok = (constraint.p / 100.0) * q_a - q_b <= 0.0
        else:
            raise ValueError(f"{constraint.kind} target is not count-based")
    if constraint.resource_cap is not None:
        ok = ok & ((sel_a + sel_b) / (n_a + n_b) <= constraint.resource_cap)
    return ok


def brute_force_constrained(probs, groups,
                            target: ParityConstraint) -> tuple[np.ndarray, float]:
    """Best decision vector under the target, by enumerating all 2^n of them.

    Maximizes the immediate utility at c = 0.5. Ties are broken toward the
    lexicographically smallest vector. With ``do_no_harm`` set, every index
    positive under the plain 0.5 threshold must stay positive.
    """
    probs = as_probs(probs)
    groups = as_groups(groups)
    n = check_same_length(probs=probs, groups=groups)
    if target.kind == EQUAL_FPR:
        raise ValueError("equal_fpr targets need labels; use equal_fpr_thresholds")
    if n > MAX_EMPIRICAL_N:
        raise ValueError(f"instance too large for enumeration: n={n} > {MAX_EMPIRICAL_N}")
    mask_a, mask_b = group_masks(groups)
    n_a = int(mask_a.sum())
    n_b = int(mask_b.sum())

    # Row i holds the bits of i, most significant first, so ascending row
    # order is ascending lexicographic order on vectors.
    codes = np.arange(2 ** n, dtype=np.uint32)
    bits = (codes[:, None] >> np.arange(n - 1, -1, -1, dtype=np.uint32)) & 1
    bits = bits.astype(np.int8)

    utilities = bits @ (probs - 0.5) / n
    sel_a = bits @ mask_a.astype(np.int64)
    sel_b = bits @ mask_b.astype(np.int64)
    feasible = _feasible_mask(target, sel_a, n_a, sel_b, n_b)
    if target.do_no_harm:
        baseline = probs > 0.5
        feasible = feasible & (bits[:, baseline] == 1).all(axis=1)

    if not feasible.any():
        raise InfeasibleTargetError(
            f"no decision vector satisfies target {target.describe()}"
        )
    utilities = np.where(feasible, utilities, -np.inf)
    best = int(np.argmax(utilities))  # first max = lexicographically smallest
    decisions = bits[best].copy()
    return decisions, immediate_utility(decisions, probs, 0.5)


@dataclass(frozen=True)
class WorldCell:
    """One atom of a finite joint distribution over (x, group, y)."""

    x: int
    group: str
    weight: int
    prob: float

    def __post_init__(self):
        if self.group not in (GROUP_A, GROUP_B):
            raise ValueError(f"cell group must be 'a' or 'b', got {self.group!r}")
        if self.weight < 0 or self.weight != int(self.weight):
            raise ValueError("cell weight must be a nonnegative integer")
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError("cell prob must lie in [0, 1]")


class FiniteWorld:
    """A finite joint distribution over (x, z) cells with P(y=1) per cell.

    Masses are integer weights, normalized internally; keeping them integral
    lets exact-parity feasibility be decided with integer arithmetic instead
    of float comparisons.
    """

    def __init__(self, cells: list[WorldCell]):
        if not cells:
            raise ValueError("world needs at least one cell")
        self.cells = list(cells)
        self.x_values = sorted({c.x for c in cells})
        if len(self.x_values) > MAX_WORLD_X:
            raise ValueError(
                f"world too large for enumeration: |X|={len(self.x_values)} > {MAX_WORLD_X}"
            )
        seen = set()
        for c in cells:
            key = (c.x, c.group)
            if key in seen:
                raise ValueError(f"duplicate cell for (x={c.x}, group={c.group})")
            seen.add(key)
        self.total_weight = sum(c.weight for c in cells)
        if self.total_weight <= 0:
            raise ValueError("world must have positive total weight")
        for g in (GROUP_A, GROUP_B):
            if self.group_weight(g) <= 0:
                raise ValueError(f"group '{g}' has zero mass")

    def group_weight(self, group: str) -> int:
        return sum(c.weight for c in self.cells if c.group == group)

    def masses(self) -> list[float]:
        return [c.weight / self.total_weight for c in self.cells]

    def _group_arrays(self, group: str):
        """Per-x weight and utility-if-selected arrays for one group."""
        k = len(self.x_values)
        index = {x: i for i, x in enumerate(self.x_values)}
        w = np.zeros(k, dtype=np.int64)
        u = np.zeros(k, dtype=np.float64)
        for c in self.cells:
            if c.group == group:
                w[index[c.x]] = c.weight
                u[index[c.x]] = (c.weight / self.total_weight) * (c.prob - 0.5)
        return w, u


def _subset_sums(w: np.ndarray, u: np.ndarray):
    """Selected weight and utility for every subset of the x alphabet."""
    k = len(w)
    codes = np.arange(2 ** k, dtype=np.uint32)
    member = ((codes[:, None] >> np.arange(k, dtype=np.uint32)) & 1).astype(np.int64)
    return member @ w, member @ u


def brute_force_xonly(world: FiniteWorld,
                      target: ParityConstraint) -> tuple[float, float]:
    """Best utility of group-blind rules d(x) versus group-aware rules d(x, z).

    Both classes are enumerated exhaustively on the world's finite alphabet
    and scored by exact immediate utility at c = 0.5, subject to the target.
    Group-blind rules are a subclass of group-aware ones, so the first value
    never exceeds the second.
    """
    if target.kind == EQUAL_FPR:
        raise ValueError("equal_fpr targets are not supported in world mode")
    if target.do_no_harm:
        raise ValueError("do_no_harm is not supported in world mode")
    w_a, u_a = world._group_arrays(GROUP_A)
    w_b, u_b = world._group_arrays(GROUP_B)
    W_a = int(w_a.sum())
    W_b = int(w_b.sum())

    sel_a, util_a = _subset_sums(w_a, u_a)
    sel_b, util_b = _subset_sums(w_b, u_b)

    blind_ok = _feasible_mask(target, sel_a, W_a, sel_b, W_b)
    if not blind_ok.any():
        raise InfeasibleTargetError(
            f"no group-blind rule satisfies target {target.describe()}"
        )
    best_blind = float(np.max(np.where(blind_ok, util_a + util_b, -np.inf)))

    best_aware = -np.inf
    for i in range(len(sel_a)):
        ok = _feasible_mask(target, np.full_like(sel_b, sel_a[i]), W_a, sel_b, W_b)
        if ok.any():
            cand = util_a[i] + np.max(np.where(ok, util_b, -np.inf))
            if cand > best_aware:
                best_aware = float(cand)
    if best_aware == -np.inf:
        raise InfeasibleTargetError(
            f"no group-aware rule satisfies target {target.describe()}"
        )
    return best_blind, best_aware


__all__ = [
    "brute_force_constrained",
    "brute_force_xonly",
    "FiniteWorld",
    "WorldCell",
    "MAX_EMPIRICAL_N",
    "MAX_WORLD_X",
]
