"""Core data containers: datasets, parity targets, and audit reports."""

from dataclasses import dataclass, field, asdict
from fractions import Fraction

import numpy as np

from .validation import GROUP_A, GROUP_B, as_bits, as_groups, check_same_length

CV_GAP = "cv_gap"
P_PERCENT = "p_percent"
EXACT_PARITY = "exact"
EQUAL_FPR = "equal_fpr"


@dataclass
class Dataset:
    """A binary-outcome dataset with a two-valued group attribute.

    Group labels are canonical: ``"a"`` is the advantaged (reference) group
    and ``"b"`` the protected group. ``group_names`` optionally maps the
    canonical labels back to the source values (e.g. ``{"a": "man",
    "b": "woman"}``) for display; it carries no semantics.
    """

    features: np.ndarray
    labels: np.ndarray
    groups: np.ndarray
    feature_names: list[str]
    group_names: dict[str, str] | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim == 1:
            self.features = self.features.reshape(-1, 1)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {self.features.shape}")
        self.labels = as_bits(self.labels, "labels")
        self.groups = as_groups(self.groups)
        n = check_same_length(
            features=self.features, labels=self.labels, groups=self.groups
        )
        if n < 1:
            raise ValueError("dataset must contain at least one example")
        if len(self.feature_names) != self.features.shape[1]:
            raise ValueError(
                f"feature_names has {len(self.feature_names)} entries for "
                f"{self.features.shape[1]} feature columns"
            )

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def group_indicator(self) -> np.ndarray:
        """Group membership encoded numerically: a -> 1.0, b -> 0.0."""
        return (self.groups == GROUP_A).astype(np.float64)

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(
            features=self.features[indices],
            labels=self.labels[indices],
            groups=self.groups[indices],
            feature_names=list(self.feature_names),
            group_names=dict(self.group_names) if self.group_names else None,
        )


@dataclass(frozen=True)
class ParityConstraint:
    """A parity target for decision interventions.

    kind is one of ``cv_gap`` (q_a - q_b at most ``gamma``), ``p_percent``
    (q_b / q_a at least ``p``/100, tracked via the gap (p/100)*q_a - q_b),
    ``exact`` (q_a equal to q_b, to the resolution the search space allows),
    or ``equal_fpr`` (equal per-group false positive rates).

    ``do_no_harm`` restricts interventions to flips that benefit group b.
    ``resource_cap`` bounds the overall positive proportion; it is honored
    by the exhaustive and sweep-based optimizers.
    """

    kind: str
    gamma: float | None = None
    p: float | None = None
    do_no_harm: bool = False
    resource_cap: float | None = None

    def __post_init__(self):
        if self.kind not in (CV_GAP, P_PERCENT, EXACT_PARITY, EQUAL_FPR):
            raise ValueError(f"unknown parity target kind: {self.kind!r}")
        if self.kind == CV_GAP:
            if self.gamma is None or not 0.0 <= self.gamma <= 1.0:
                raise ValueError("cv_gap target needs gamma in [0, 1]")
        if self.kind == P_PERCENT:
            if self.p is None or self.p <= 0.0:
                raise ValueError("p_percent target needs p > 0")
        if self.resource_cap is not None and not 0.0 <= self.resource_cap <= 1.0:
            raise ValueError("resource_cap must lie in [0, 1]")

    @classmethod
    def cv(cls, gamma: float, **kw) -> "ParityConstraint":
        return cls(kind=CV_GAP, gamma=float(gamma), **kw)

    @classmethod
    def p_percent(cls, p: float, **kw) -> "ParityConstraint":
        return cls(kind=P_PERCENT, p=float(p), **kw)

    @classmethod
    def exact(cls, **kw) -> "ParityConstraint":
        return cls(kind=EXACT_PARITY, **kw)

    @classmethod
    def equal_fpr(cls, **kw) -> "ParityConstraint":
        return cls(kind=EQUAL_FPR, **kw)

    def gap_counts(self, pos_a: int, n_a: int, pos_b: int, n_b: int) -> float:
        """The constraint gap for given per-group positive counts.

        The target is met exactly when the gap is <= 0 (for ``exact``,
        when it is 0). Computed one way everywhere so the greedy, sweep,
        and exhaustive optimizers agree bit-for-bit on feasibility.
        """
        q_a = pos_a / n_a
        q_b = pos_b / n_b
        if self.kind == CV_GAP:
            return (q_a - q_b) - self.gamma
        if self.kind == P_PERCENT:
            return (self.p / 100.0) * q_a - q_b
        if self.kind == EXACT_PARITY:
            # Exact rational comparison, immune to float division.
            return float(Fraction(pos_a, n_a) - Fraction(pos_b, n_b))
        raise ValueError(f"{self.kind} target has no count-based gap")

    def satisfied_counts(self, pos_a: int, n_a: int, pos_b: int, n_b: int) -> bool:
        gap = self.gap_counts(pos_a, n_a, pos_b, n_b)
        if self.kind == EXACT_PARITY:
            satisfied = pos_a * n_b == pos_b * n_a
        else:
            satisfied = gap <= 0.0
        if satisfied and self.resource_cap is not None:
            satisfied = (pos_a + pos_b) / (n_a + n_b) <= self.resource_cap
        return satisfied

    def describe(self) -> str:
        if self.kind == CV_GAP:
            core = f"cv:{self.gamma:g}"
        elif self.kind == P_PERCENT:
            core = f"p-percent:{self.p:g}"
        elif self.kind == EXACT_PARITY:
            core = "exact"
        else:
            core = "equal-fpr"
        if self.do_no_harm:
            core += "+do-no-harm"
        if self.resource_cap is not None:
            core += f"+cap:{self.resource_cap:g}"
        return core


def parse_target(spec: str, do_no_harm: bool = False,
                 resource_cap: float | None = None) -> ParityConstraint:
    """Parse a command-line target spec like ``p-percent:80`` or ``cv:0.1``."""
    spec = spec.strip().lower()
    kw = {"do_no_harm": do_no_harm, "resource_cap": resource_cap}
    if spec == "exact":
        return ParityConstraint.exact(**kw)
    if spec == "equal-fpr":
        return ParityConstraint.equal_fpr(**kw)
    if ":" in spec:
        head, _, value = spec.partition(":")
        if head in ("p-percent", "p_percent", "p"):
            return ParityConstraint.p_percent(float(value), **kw)
        if head in ("cv", "cv-gap", "cv_gap"):
            return ParityConstraint.cv(float(value), **kw)
    raise ValueError(
        f"cannot parse target {spec!r}; expected p-percent:P, cv:G, exact, or equal-fpr"
    )


@dataclass
class FairnessReport:
    """Aggregate audit of one decision vector against labels and groups.

    Rates that are undefined on the data (a group without negatives has no
    false positive rate) are NaN. ``flips`` is populated only when the
    decisions came out of an intervention; each entry records
    ``{"index": i, "direction": "0->1" | "1->0", "group": "a" | "b"}``.
    """

    accuracy: float
    q_a: float
    q_b: float
    cv_gap: float
    p_percent: float
    fpr_a: float
    fpr_b: float
    fnr_a: float
    fnr_b: float
    immediate_utility: float
    flips: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "FairnessReport":
        return cls(**payload)


def flips_between(before: np.ndarray, after: np.ndarray,
                  groups: np.ndarray) -> list[dict]:
    """Flip ledger entries for every index where two decision vectors differ."""
    before = as_bits(before, "before")
    after = as_bits(after, "after")
    groups = as_groups(groups)
    check_same_length(before=before, after=after, groups=groups)
    out = []
    for i in np.flatnonzero(before != after):
        direction = "0->1" if after[i] == 1 else "1->0"
        out.append({"index": int(i), "direction": direction, "group": str(groups[i])})
    return out


__all__ = [
    "Dataset",
    "ParityConstraint",
    "FairnessReport",
    "parse_target",
    "flips_between",
    "CV_GAP",
    "P_PERCENT",
    "EXACT_PARITY",
    "EQUAL_FPR",
    "GROUP_A",
    "GROUP_B",
]
