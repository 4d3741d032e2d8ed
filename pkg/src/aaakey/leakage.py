"""Partial leakage: rank of Eve's accumulated error space and P(rank = L)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, LengthMismatchError
from .gf2 import BitMatrix, rank, reduce_into_basis
from .sources import TAG_LEAKAGE, LDist, LeakageRecord, make_rng, sample_full_rank_columns


@dataclass
class LeakageState:
    """Row-reduced basis of span[A_1, ..., A_n] (at most L vectors, O(L^2) bits).

    Columns are not stored; ``r`` always equals the rank of their concatenation.
    """

    L: int
    basis: dict[int, int] = field(default_factory=dict)
    n: int = 0
    total_cols: int = 0

    @property
    def r(self) -> int:
        return len(self.basis)

    @property
    def full(self) -> bool:
        return self.r == self.L


def absorb_leak(state: LeakageState, rec: LeakageRecord) -> LeakageState:
    """Fold one record's columns into the basis. Mutates and returns ``state``."""
    if rec.L != state.L:
        raise LengthMismatchError(f"record has {rec.L} rows, state expects L={state.L}")
    for col in rec.A.column_ints():
        if state.r == state.L:
            break
        reduce_into_basis(state.basis, col)
    state.n += 1
    state.total_cols += rec.l
    return state


def equiv_lower_bound(state: LeakageState) -> int:
    """Key bits Eve cannot resolve: at least the rank of her error space."""
    return state.r


def estimate_pn(L: int, l_dist: LDist | str, n_max: int, trials: int, seed: int) -> list[tuple[int, float, float]]:
    """Monte Carlo P(r_n = L) for n = 1..n_max, with binomial standard errors.

    Each trial samples a fresh sequence of records; rank never decreases
    within a trial, so the curve is nondecreasing.
    """
    if isinstance(l_dist, str):
        l_dist = LDist.parse(l_dist)
    l_dist.check_support(L)
    if trials < 1 or n_max < 1:
        raise ConfigError("trials and n_max must be >= 1")
    hits = np.zeros(n_max, dtype=np.int64)
    for t in range(trials):
        rng = make_rng(seed, TAG_LEAKAGE, t)
        ls = l_dist.sample(rng, n_max)
        basis: dict[int, int] = {}
        for i in range(n_max):
            if len(basis) < L:
                for col in sample_full_rank_columns(rng, L, int(ls[i])):
                    reduce_into_basis(basis, col)
            if len(basis) == L:
                hits[i:] += 1
                break
    out = []
    for i in range(n_max):
        p = hits[i] / trials
        out.append((i + 1, float(p), math.sqrt(p * (1 - p) / trials)))
    return out


def batch_rank_of(records: list[LeakageRecord], L: int) -> int:
    """Rank of the explicitly concatenated matrix (reference for the incremental path)."""
    m = BitMatrix.zeros(L, 0)
    for rec in records:
        m = m.concat_cols(rec.A)
    return rank(m)
