"""Pointwise and aligned-group hard thresholding.

Both operators break magnitude ties toward the lower index so repeated runs
select identical supports.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidK, NotDivisible


def _top_k_mask(scores: np.ndarray, k: int) -> np.ndarray:
    """Boolean mask of the ``k`` largest scores, ties resolved to lower indices.

    Uses a partial selection for the threshold value so the cost is O(n)."""
    m = scores.shape[0]
    mask = np.zeros(m, dtype=bool)
    if k == 0:
        return mask
    if k == m:
        mask[:] = True
        return mask
    thr = np.partition(scores, m - k)[m - k]
    mask = scores > thr
    need = k - int(mask.sum())
    if need > 0:
        ties = np.flatnonzero(scores == thr)[:need]
        mask[ties] = True
    return mask


def hard_threshold(v: np.ndarray, k: int) -> np.ndarray:
    """Keep the ``k`` largest-magnitude entries of ``v`` and zero the rest."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    if not 0 <= k <= n:
        raise InvalidK(f"k={k} outside [0, {n}]")
    out = np.zeros_like(v)
    mask = _top_k_mask(np.abs(v), k)
    out[mask] = v[mask]
    return out


@dataclass(frozen=True)
class GroupPartition:
    n: int
    d: int

    @property
    def n_groups(self) -> int:
        return self.n // self.d

    @property
    def groups(self) -> list[range]:
        return [range(j * self.d, (j + 1) * self.d) for j in range(self.n_groups)]

    def group_norms_sq(self, v: np.ndarray) -> np.ndarray:
        return np.sum(np.asarray(v, dtype=float).reshape(self.n_groups, self.d) ** 2, axis=1)

    def group_support(self, v: np.ndarray) -> np.ndarray:
        """Indices of groups holding at least one nonzero entry."""
        blocks = np.asarray(v).reshape(self.n_groups, self.d)
        return np.flatnonzero(np.any(blocks != 0, axis=1))

    def columns(self, group_ids) -> np.ndarray:
        group_ids = np.asarray(group_ids, dtype=int)
        return (group_ids[:, None] * self.d + np.arange(self.d)[None, :]).ravel()


def group_partition(n: int, d: int) -> GroupPartition:
    if d < 1:
        raise NotDivisible(f"group size must be >= 1, got {d}")
    if n % d:
        raise NotDivisible(f"group size {d} does not divide n={n}")
    return GroupPartition(n=n, d=d)


def group_hard_threshold(v: np.ndarray, k: int, part: GroupPartition) -> np.ndarray:
    """Keep the ``k`` aligned groups of largest l2 norm and zero the rest."""
    v = np.asarray(v, dtype=float)
    if v.shape[0] != part.n:
        raise ValueError(f"vector length {v.shape[0]} does not match partition n={part.n}")
    if not 0 <= k <= part.n_groups:
        raise InvalidK(f"k={k} outside [0, {part.n_groups}]")
    keep = _top_k_mask(part.group_norms_sq(v), k)
    return np.where(np.repeat(keep, part.d), v, 0.0)
