import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aaakey.equivocation import (
    all_erased_eta,
    bit_marginals,
    default_grid,
    eps1,
    eps2,
    eps2_published,
    eps3,
    eps_independent,
    eta_dp,
    eta_product,
    exact_eps,
    exact_eps_joint,
    mc_eps,
    surface_summary,
    sweep_surface,
)
from aaakey.errors import ResourceCapError
from aaakey.gf2 import binary_entropy as h

from oracles import brute_eps, brute_eta

GRID9 = np.linspace(0.1, 0.9, 9)
probs = st.floats(0.01, 0.99)


def test_eps_independent_examples():
    assert eps_independent([0.5], 1) == 0.5
    assert eps_independent([0.2, 1.0, 0.0], 8) == 8
    assert eps_independent([0.3] * 3, 8) == pytest.approx(8 * (1 - 0.7 ** 3), abs=1e-12)
    assert eps_independent([0.3] * 3, 8) == pytest.approx(5.256, abs=1e-12)


def test_eps1():
    assert (eps1(0), eps1(1), eps1(0.3)) == (0, 1, 0.3)


def test_eps2_examples():
    for m in (0.1, 0.5, 0.9):
        assert eps2(0.5, m) == pytest.approx(1 - (1 - m) ** 2, abs=1e-15)
    assert eps2(0.5, 0.5, 0.5) == pytest.approx(0.75, abs=1e-15)
    assert eps2_published(0.5, 0.5) == pytest.approx(0.75, abs=1e-15)


def test_eps2_both_missed_is_flip_entropy():
    # both packets missed: key bit is the flip indicator
    assert eps2(0.8, 1.0, 1.0) == pytest.approx(h(0.8), abs=1e-15)
    assert exact_eps(2, 0.8, 1.0) == pytest.approx(h(0.8), abs=1e-15)
    assert eps2_published(0.8, 1.0) == 1.0


def test_eps3_examples():
    assert eps3(0.7, 1.0) == pytest.approx(1.0, abs=1e-15)
    for m in (0.1, 0.4, 0.8):
        assert eps3(0.5, m) == pytest.approx(1 - (1 - m) ** 3, abs=1e-15)


def test_closed_forms_vs_brute_force():
    for a, m in [(0.8, 0.4), (0.95, 0.3), (0.3, 0.7)]:
        assert eps2(a, m) == pytest.approx(brute_eps(2, a, m), abs=1e-12)
        assert eps3(a, m) == pytest.approx(brute_eps(3, a, m), abs=1e-12)


def test_exact_eps_vs_brute_force():
    for n, a, mus in [(4, 0.8, 0.3), (5, 0.65, [0.1, 0.9, 0.4, 0.2, 0.6]), (6, 0.95, 0.5), (1, 0.7, 0.3)]:
        assert exact_eps(n, a, mus) == pytest.approx(brute_eps(n, a, mus), abs=1e-12)


def test_exact_eps_oracle_grid():
    for a in GRID9:
        for m in GRID9:
            assert abs(exact_eps(1, a, m) - m) < 1e-12
            assert abs(exact_eps(2, a, m) - eps2(a, m)) < 1e-12
            assert abs(exact_eps(3, a, m) - eps3(a, m)) < 1e-12


def test_exact_eps_independent_collapse():
    for n in range(1, 11):
        for m in (0.05, 0.3, 0.77):
            assert abs(exact_eps(n, 0.5, m) - (1 - (1 - m) ** n)) < 1e-12


def test_exact_eps_key_scaling_and_joint():
    for n, a, m in [(2, 0.8, 0.3), (4, 0.9, 0.5), (5, 0.7, [0.2, 0.4, 0.6, 0.8, 0.1])]:
        per_bit = exact_eps(n, a, m)
        assert exact_eps(n, a, m, L=2) == pytest.approx(2 * per_bit, abs=1e-12)
        assert exact_eps_joint(n, a, m, L=2) == pytest.approx(2 * per_bit, abs=1e-10)
        assert exact_eps_joint(n, a, m, L=1) == pytest.approx(per_bit, abs=1e-10)


def test_exact_eps_cap():
    with pytest.raises(ResourceCapError):
        exact_eps(13, 0.8, 0.3)
    with pytest.raises(ResourceCapError):
        exact_eps_joint(9, 0.8, 0.3, L=2)


def test_exact_eps_alpha_one_edge():
    # fully repeated packets: secret only if every packet is missed
    for n in (1, 3, 5):
        assert exact_eps(n, 1.0, 0.4) == pytest.approx(0.4 ** n, abs=1e-12)
    assert exact_eps(4, 1.0, 0.4) == pytest.approx(0.0, abs=1e-12)


# ---- eta

def test_eta_all_erased():
    for n in (1, 3, 7):
        assert eta_dp([None] * n, 0.8) == pytest.approx(0.5, abs=1e-15)
    # even n: the key is the xor of the n/2 flips at even positions
    for n in (2, 4, 10):
        assert eta_dp([None] * n, 0.8) == pytest.approx(all_erased_eta(n, 0.8), abs=1e-14)
        assert eta_dp([None] * n, 0.8) == pytest.approx(brute_eta([None] * n, 0.8), abs=1e-14)


def test_eta_all_observed():
    assert eta_dp([1, 0, 1, 1], 0.7) == 0.0
    assert eta_dp([1, 0, 1, 0], 0.7) == 1.0


def test_eta_middle_erased_example():
    same = 0.8 ** 2 / (0.8 ** 2 + 0.2 ** 2)
    assert same == pytest.approx(0.9411764705882353, abs=1e-15)
    assert eta_dp([0, None, 0], 0.8) == pytest.approx(same, abs=1e-14)
    assert eta_dp([1, None, 1], 0.8) == pytest.approx(1 - same, abs=1e-14)


def test_eta_product_example_and_discrepancy():
    obs = [0, None, None]
    beta = bit_marginals(obs, 0.8)
    assert beta == pytest.approx([0.0, 0.2, 0.32], abs=1e-14)
    assert eta_product(obs, 0.8) == pytest.approx(0.5 * (1 + 0.6 * 0.36), abs=1e-14)
    # exact: key = X2 xor X3 = the last flip, so eta = alpha
    assert eta_dp(obs, 0.8) == pytest.approx(0.8, abs=1e-14)
    assert abs(eta_product(obs, 0.8) - eta_dp(obs, 0.8)) == pytest.approx(0.192, abs=1e-12)


def test_eta_product_matches_dp_at_half_and_when_observed():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n = int(rng.integers(1, 10))
        obs = [None if rng.random() < 0.5 else int(rng.integers(0, 2)) for _ in range(n)]
        assert eta_product(obs, 0.5) == pytest.approx(eta_dp(obs, 0.5), abs=1e-12)
    assert eta_product([1, 0, 0], 0.9) == eta_dp([1, 0, 0], 0.9)


def test_eta_dp_vs_brute_force():
    rng = np.random.default_rng(12)
    for n in range(1, 11):
        for _ in range(15):
            a = float(rng.uniform(0.05, 0.99))
            obs = [None if rng.random() < 0.5 else int(rng.integers(0, 2)) for _ in range(n)]
            assert abs(eta_dp(obs, a) - brute_eta(obs, a)) < 1e-12


@settings(max_examples=100)
@given(st.lists(st.one_of(st.none(), st.integers(0, 1)), min_size=1, max_size=12), probs)
def test_entropy_invariant_to_flipping_observations(obs, alpha):
    flipped = [None if o is None else 1 - o for o in obs]
    assert h(eta_dp(obs, alpha)) == pytest.approx(h(eta_dp(flipped, alpha)), abs=1e-12)


def test_eta_empty_rejected():
    with pytest.raises(ValueError):
        eta_dp([], 0.5)


# ---- Monte Carlo

def test_mc_independent_case():
    est = mc_eps(5, 0.5, 0.3, 100_000, seed=1)
    assert abs(est.value - (1 - 0.7 ** 5)) <= 3 * est.std_err


def test_mc_all_missed():
    for n in (1, 3, 7):
        est = mc_eps(n, 0.8, 1.0, 1000, seed=2)
        assert est.value == pytest.approx(1.0, abs=1e-12) and est.std_err == pytest.approx(0.0, abs=1e-12)
    est = mc_eps(4, 0.8, 1.0, 1000, seed=2)
    assert est.value == pytest.approx(h(all_erased_eta(4, 0.8)), abs=1e-12)


def test_mc_vs_exact_n3():
    est = mc_eps(3, 0.8, 0.4, 100_000, seed=3)
    assert abs(est.value - exact_eps(3, 0.8, 0.4)) <= 3 * est.std_err


def test_mc_vs_exact_random_configs():
    rng = np.random.default_rng(2024)
    for k in range(20):
        n = int(rng.integers(1, 11))
        a = float(rng.uniform(0.05, 0.99))
        m = float(rng.uniform(0.05, 0.95))
        est = mc_eps(n, a, m, 20_000, seed=100 + k)
        assert abs(est.value - exact_eps(n, a, m)) <= 4 * est.std_err + 1e-12


def test_mc_deterministic_and_block_invariant():
    a = mc_eps(8, 0.9, 0.3, 5000, seed=5)
    b = mc_eps(8, 0.9, 0.3, 5000, seed=5)
    assert a == b
    assert a.to_json() == {"n": 8, "alpha": 0.9, "mu": 0.3, "value": a.value, "std_err": a.std_err, "trials": 5000, "seed": 5}


def test_mc_per_packet_mu():
    mus = [0.1, 0.9, 0.5, 0.3]
    est = mc_eps(4, 0.7, mus, 50_000, seed=8)
    assert abs(est.value - exact_eps(4, 0.7, mus)) <= 4 * est.std_err
    assert est.mu == tuple(mus)


def test_mc_large_n_stable():
    est = mc_eps(2000, 0.9, 0.3, 2000, seed=1)
    assert 0.99 < est.value <= 1.0


# ---- surfaces

def test_sweep_half_row_ratio_exceeds_one():
    mus = np.linspace(0.01, 0.99, 99)
    for r in sweep_surface([0.5], mus):
        expect = (1 - (1 - r.mu) ** 3) / (1 - (1 - r.mu) ** 2)
        assert r.r32 == pytest.approx(expect, rel=1e-12)
        assert r.r32 > 1


def test_sweep_mu_to_one_limits():
    for r in sweep_surface(np.linspace(0, 1, 11), [1.0]):
        assert r.eps2 == pytest.approx(1.0) and r.eps3 == pytest.approx(1.0)
        assert r.r21 == pytest.approx(1.0) and r.r32 == pytest.approx(1.0)


def test_sweep_exact_form_and_edges():
    rows = sweep_surface([0.0, 1.0], [0.5], eps2_form="exact")
    assert all(r.eps2 == 0.0 and math.isnan(r.r32) for r in rows)
    rows = sweep_surface([0.8], [0.4], eps2_form="exact")
    assert rows[0].eps2 == pytest.approx(exact_eps(2, 0.8, 0.4), abs=1e-12)


def test_sweep_non_monotone_point_exists():
    rows = sweep_surface(default_grid(), default_grid())
    s = surface_summary(rows)
    assert s["non_monotone_points"] > 0 and s["min_r32"]["r32"] < 1
    assert s["half_column_r32_gt_1"]
    # located near alpha -> 1
    assert s["min_r32"]["alpha"] > 0.9
