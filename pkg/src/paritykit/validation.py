"""Input validation helpers.

Every public entry point funnels its array arguments through these
converters so error messages are uniform and downstream code can assume
canonical dtypes: float64 probabilities, int8 decision/label bits, and
group labels drawn from {"a", "b"} where "a" is the advantaged (reference)
group.
"""

import numpy as np

from .errors import EmptyGroupError

GROUP_A = "a"
GROUP_B = "b"


def as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def as_probs(values, name: str = "probs") -> np.ndarray:
    """Validate an array of probability estimates in [0, 1]."""
    arr = as_float_array(values, name)
    if arr.size and (np.isnan(arr).any() or arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def as_bits(values, name: str) -> np.ndarray:
    """Validate an array of {0, 1} values (decisions or labels)."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    out = arr.astype(np.int8, copy=True)
    if not np.array_equal(out, arr) or (out.size and not np.isin(out, (0, 1)).all()):
        raise ValueError(f"{name} entries must be 0 or 1")
    return out


def as_groups(values, name: str = "groups") -> np.ndarray:
    """Validate an array of group labels, values restricted to {'a', 'b'}."""
    arr = np.asarray(values, dtype="U1")
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    bad = ~np.isin(arr, (GROUP_A, GROUP_B))
    if bad.any():
        raise ValueError(
            f"{name} entries must be '{GROUP_A}' or '{GROUP_B}'; "
            f"found {sorted(set(np.asarray(values)[bad]))!r}"
        )
    return arr


def check_same_length(**named_arrays) -> int:
    lengths = {name: len(arr) for name, arr in named_arrays.items()}
    if len(set(lengths.values())) > 1:
        raise ValueError(f"length mismatch: {lengths}")
    return next(iter(lengths.values()))


def group_masks(groups: np.ndarray, require_nonempty: bool = True):
    """Boolean masks for groups a and b, erroring on empty groups by default."""
    mask_a = groups == GROUP_A
    mask_b = groups == GROUP_B
    if require_nonempty:
        for label, mask in ((GROUP_A, mask_a), (GROUP_B, mask_b)):
            if not mask.any():
                raise EmptyGroupError(
                    f"undefined group rate: group '{label}' is empty"
                )
    return mask_a, mask_b


def check_cost(c: float) -> float:
    c = float(c)
    if not 0.0 < c < 1.0:
        raise ValueError(f"cost parameter must satisfy 0 < c < 1, got {c}")
    return c
