import numpy as np
import pytest

from aaakey.errors import LengthMismatchError
from aaakey.gf2 import BitMatrix
from aaakey.leakage import LeakageState, absorb_leak, batch_rank_of, equiv_lower_bound, estimate_pn
from aaakey.sources import LeakageRecord, gen_leakage

from oracles import pn_nonzero_columns


def rec(cols, L):
    return LeakageRecord(BitMatrix.from_array(np.array(cols, dtype=np.uint8).reshape(L, -1)))


def test_absorb_examples():
    s = LeakageState(4)
    absorb_leak(s, LeakageRecord(BitMatrix.zeros(4, 0)))
    assert s.r == 0 and s.n == 1
    s = absorb_leak(LeakageState(5), LeakageRecord(BitMatrix.identity(5)))
    assert s.r == 5 and s.full
    s = LeakageState(3)
    col = rec([[1], [1], [0]], 3)
    absorb_leak(s, col)
    absorb_leak(s, col)
    assert s.r == 1


def test_row_mismatch():
    with pytest.raises(LengthMismatchError):
        absorb_leak(LeakageState(4), LeakageRecord(BitMatrix.identity(3)))


def test_lower_bound():
    assert equiv_lower_bound(LeakageState(8)) == 0
    assert equiv_lower_bound(absorb_leak(LeakageState(8), LeakageRecord(BitMatrix.identity(8)))) == 8
    s = LeakageState(8)
    for r in gen_leakage(8, "fixed:1", 200, seed=1):
        absorb_leak(s, r)
        if s.r == 3:
            break
    assert equiv_lower_bound(s) == 3


def test_incremental_matches_batch_and_monotone():
    for t in range(200):
        L = 1 + t % 7
        recs = gen_leakage(L, f"uniform:0..{L}", 1 + t % 6, seed=t)
        s = LeakageState(L)
        prev = 0
        for i, r in enumerate(recs):
            absorb_leak(s, r)
            assert s.r >= prev
            prev = s.r
            assert s.r == batch_rank_of(recs[: i + 1], L)
            assert s.r <= min(L, s.total_cols)


def test_erasure_correspondence():
    s = LeakageState(6)
    for missed in (False, False, True, False):
        absorb_leak(s, LeakageRecord.from_erasure(6, missed))
    assert s.r == 6


def test_pn_edges():
    assert all(p == 1.0 for _, p, _ in estimate_pn(5, "fixed:5", 4, 50, seed=1))
    assert all(p == 0.0 for _, p, _ in estimate_pn(5, "fixed:0", 4, 50, seed=1))


def test_pn_matches_exact_rank_chain():
    rows = estimate_pn(4, "fixed:1", 12, 20_000, seed=3)
    exact = pn_nonzero_columns(4, 12)
    for (n, p, se), q in zip(rows, exact):
        tol = 3 * max(se, np.sqrt(q * (1 - q) / 20_000)) + 1e-12
        assert abs(p - q) <= tol, (n, p, q)


def test_pn_nondecreasing_and_converges():
    rows = estimate_pn(6, "binomial:6,0.2", 60, 2000, seed=5)
    ps = [p for _, p, _ in rows]
    assert all(b >= a for a, b in zip(ps, ps[1:]))
    assert ps[-1] >= 1 - 3 * max(rows[-1][2], 1 / 2000)


def test_pn_deterministic():
    assert estimate_pn(5, "uniform:0..2", 10, 300, seed=9) == estimate_pn(5, "uniform:0..2", 10, 300, seed=9)
