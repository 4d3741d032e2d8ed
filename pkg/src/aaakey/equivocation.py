"""Equivocation of the XOR key against an erasure eavesdropper.

Per key bit, with the Markov packet model (persistence ``alpha``) and Eve
missing packet ``i`` with probability ``mu_i``, the equivocation is

    eps_n = sum over observation sequences e of  p(e) * h(eta(e)),
    eta(e) = P(X_1 xor ... xor X_n = 0 | E = e).

This module provides closed forms for n <= 3, an exact conditional-parity
forward pass, full enumeration for n <= 12 and a Monte Carlo estimator for
larger n.

Lanes (bit indices of the key) are independent given the shared erasure
pattern, so the full-key equivocation is exactly ``L`` times the per-bit
value. :func:`exact_eps_joint` checks this by enumerating the joint law of
two lanes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, ResourceCapError
from .gf2 import binary_entropy as h
from .gf2 import binary_entropy_array
from .sources import TAG_MC, make_rng, mu_vector

EXACT_CAP = 12
JOINT_CAP_N = 8
JOINT_CAP_L = 2
MC_BLOCK = 1 << 15


@dataclass(frozen=True)
class EquivEstimate:
    value: float
    std_err: float
    method: str  # "closed" | "exact" | "mc"
    n: int
    alpha: float
    mu: float | tuple[float, ...]
    trials: int = 0
    seed: int | None = None
    per_bit: bool = True

    def to_json(self) -> dict:
        d = asdict(self)
        if isinstance(self.mu, tuple):
            d["mu"] = list(self.mu)
        return {k: d[k] for k in ("n", "alpha", "mu", "value", "std_err", "trials", "seed")}


# --------------------------------------------------------------------------
# closed forms

def eps_independent(mu: Sequence[float], L: int = 1) -> float:
    """L * (1 - prod(1 - mu_i)) for independent packets."""
    mu = list(mu)
    if any(not 0.0 <= m <= 1.0 for m in mu):
        raise ConfigError("mu entries must lie in [0, 1]")
    if any(m == 1.0 for m in mu):
        return float(L)
    return L * (1.0 - math.prod(1.0 - m for m in mu))


def eps1(mu: float) -> float:
    return float(mu)


def eps2(alpha: float, mu1: float, mu2: float | None = None) -> float:
    """Exact per-bit equivocation after two packets.

    When Eve misses both packets the key bit is ``X1 xor X2``, i.e. the flip
    indicator, whose entropy is h(alpha) rather than one bit. Hence

        eps2 = (1 - (1 - mu1)(1 - mu2)) * h(alpha).

    :func:`eps2_published` keeps the literature form, which assigns a full
    bit to the both-missed event; the two agree at ``alpha = 1/2``.
    """
    if mu2 is None:
        mu2 = mu1
    return (1.0 - (1.0 - mu1) * (1.0 - mu2)) * h(alpha)


def eps2_published(alpha: float, mu1: float, mu2: float | None = None) -> float:
    """mu1 mu2 + [mu1 (1 - mu2) + (1 - mu1) mu2] h(alpha)."""
    if mu2 is None:
        mu2 = mu1
    return mu1 * mu2 + (mu1 * (1.0 - mu2) + (1.0 - mu1) * mu2) * h(alpha)


def eps3(alpha: float, mu: float) -> float:
    a, ac = alpha, 1.0 - alpha
    m, mc = mu, 1.0 - mu
    same = a * a + ac * ac
    return (
        m ** 3
        + 2 * m * mc * h(a)
        + m * m * mc * h(same)
        + m * mc * mc * (2 * a * ac + same * h(a * a / same))
    )


# --------------------------------------------------------------------------
# conditional parity

def _eta_batch(observed: np.ndarray, values: np.ndarray, alpha: float, normalize: bool = True):
    """Forward pass over (current bit, running parity) for a batch of lanes.

    observed, values: (T, n) arrays. Returns (eta, z) where z is the
    probability of the observed values (only meaningful with normalize=False).
    """
    observed = np.asarray(observed, dtype=bool)
    values = np.asarray(values, dtype=np.uint8)
    T, n = observed.shape
    a, ac = float(alpha), 1.0 - float(alpha)
    allow0 = (~observed) | (values == 0)
    allow1 = (~observed) | (values == 1)
    # f[x][p]: P(bits so far, X_i = x, parity = p)
    f00 = 0.5 * allow0[:, 0]
    f11 = 0.5 * allow1[:, 0]
    f01 = np.zeros(T)
    f10 = np.zeros(T)
    for i in range(1, n):
        n00 = a * f00 + ac * f10
        n01 = a * f01 + ac * f11
        n10 = ac * f01 + a * f11
        n11 = ac * f00 + a * f10
        m0, m1 = allow0[:, i], allow1[:, i]
        f00, f01, f10, f11 = n00 * m0, n01 * m0, n10 * m1, n11 * m1
        if normalize:
            s = f00 + f01 + f10 + f11
            s = np.where(s > 0, s, 1.0)
            f00, f01, f10, f11 = f00 / s, f01 / s, f10 / s, f11 / s
    z = f00 + f01 + f10 + f11
    with np.errstate(invalid="ignore", divide="ignore"):
        eta = (f00 + f10) / z
    return eta, z


def _lane_arrays(obs: Sequence[int | None]):
    if len(obs) == 0:
        raise ValueError("observation sequence is empty")
    observed = np.array([[o is not None for o in obs]])
    values = np.array([[0 if o is None else int(o) for o in obs]], dtype=np.uint8)
    return observed, values


def eta_dp(obs: Sequence[int | None], alpha: float) -> float:
    """P(parity of all n bits is 0 | one lane of Eve's record).

    ``obs[i]`` is the observed bit or ``None`` for an erased packet.
    """
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    observed, values = _lane_arrays(obs)
    eta, z = _eta_batch(observed, values, alpha)
    if not z[0] > 0:
        raise ValueError("observation sequence has zero probability under this alpha")
    return float(eta[0])


def bit_marginals(obs: Sequence[int | None], alpha: float) -> np.ndarray:
    """beta_i = P(X_i = 1 | whole lane record), by forward-backward smoothing."""
    observed, values = _lane_arrays(obs)
    observed, values = observed[0], values[0]
    n = len(obs)
    trans = np.array([[alpha, 1 - alpha], [1 - alpha, alpha]])
    like = np.ones((n, 2))
    like[observed, 1 - values[observed]] = 0.0
    fwd = np.empty((n, 2))
    fwd[0] = 0.5 * like[0]
    fwd[0] /= fwd[0].sum()
    for i in range(1, n):
        fwd[i] = (fwd[i - 1] @ trans) * like[i]
        fwd[i] /= fwd[i].sum()
    bwd = np.ones((n, 2))
    for i in range(n - 2, -1, -1):
        bwd[i] = trans @ (like[i + 1] * bwd[i + 1])
        bwd[i] /= bwd[i].sum()
    post = fwd * bwd
    return post[:, 1] / post.sum(axis=1)


def eta_product(obs: Sequence[int | None], alpha: float) -> float:
    """(1 + prod(1 - 2 beta_i)) / 2 from the exact per-bit marginals.

    Equal to :func:`eta_dp` only when the hidden bits are conditionally
    independent given the record (e.g. alpha = 1/2); kept for comparison.
    """
    beta = bit_marginals(obs, alpha)
    return 0.5 * (1.0 + float(np.prod(1.0 - 2.0 * beta)))


# --------------------------------------------------------------------------
# exact enumeration

def _ternary_codes(n: int) -> np.ndarray:
    """All 3**n sequences over {0, 1, 2}; 2 marks an erasure. Row k is k in base 3."""
    k = np.arange(3 ** n, dtype=np.int64)
    return ((k[:, None] // (3 ** np.arange(n, dtype=np.int64))) % 3).astype(np.uint8)


def exact_eps(n: int, alpha: float, mu, L: int = 1, cap: int = EXACT_CAP) -> float:
    """Exact equivocation in bits for an ``L``-bit key (per bit when L=1).

    Sums p(erasure pattern) * p(observed values) * h(eta) over all 3**n
    observation sequences.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if n > cap:
        raise ResourceCapError(f"exact enumeration capped at n={cap} (asked n={n}); use mc_eps")
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    mus = mu_vector(mu, n)
    codes = _ternary_codes(n)
    erased = codes == 2
    p_pattern = np.prod(np.where(erased, mus, 1.0 - mus), axis=1)
    eta, z = _eta_batch(~erased, np.where(erased, 0, codes), alpha, normalize=False)
    weight = p_pattern * z
    live = weight > 0
    per_bit = float(np.sum(weight[live] * binary_entropy_array(eta[live])))
    return L * per_bit


def exact_eps_joint(n: int, alpha: float, mu, L: int = 2) -> float:
    """H(key | Eve's record) for an ``L``-bit key by joint enumeration of all lanes.

    Small sizes only (n <= 8, L <= 2). Checks the per-lane factorisation.
    """
    if L > JOINT_CAP_L or n > JOINT_CAP_N or L < 1 or n < 1:
        raise ResourceCapError(f"joint enumeration limited to n<={JOINT_CAP_N}, L<={JOINT_CAP_L}")
    mus = mu_vector(mu, n)
    nb = n * L
    t = np.arange(1 << nb, dtype=np.int64)
    bits = ((t[:, None] >> np.arange(nb)) & 1).reshape(-1, L, n)  # bit (l, i) at l*n + i
    same = bits[:, :, 1:] == bits[:, :, :-1]
    p_trace = (0.5 ** L) * np.prod(np.where(same, alpha, 1.0 - alpha), axis=(1, 2))
    key = np.zeros(t.size, dtype=np.int64)
    for l in range(L):
        key |= (bits[:, l, :].sum(axis=1) % 2) << l
    total = 0.0
    for pat in range(1 << n):
        miss = np.array([(pat >> i) & 1 for i in range(n)], dtype=bool)
        p_pat = float(np.prod(np.where(miss, mus, 1.0 - mus)))
        if p_pat == 0.0:
            continue
        mask = sum(1 << (l * n + i) for l in range(L) for i in range(n) if not miss[i])
        _, grp = np.unique(t & mask, return_inverse=True)
        joint = np.bincount(grp * (1 << L) + key, weights=p_trace)
        marg = np.bincount(grp, weights=p_trace)
        joint, marg = joint[joint > 0], marg[marg > 0]
        total += p_pat * float(-np.sum(joint * np.log2(joint)) + np.sum(marg * np.log2(marg)))
    return total


# --------------------------------------------------------------------------
# Monte Carlo

def _sample_block(rng: np.random.Generator, T: int, n: int, alpha: float, mus: np.ndarray):
    first = rng.integers(0, 2, size=(T, 1), dtype=np.uint8)
    flips = (rng.random((T, n - 1)) >= alpha).astype(np.uint8)
    trace = np.bitwise_xor.accumulate(np.hstack([first, flips]), axis=1)
    erased = rng.random((T, n)) < mus
    return trace, erased


def mc_eps(n: int, alpha: float, mu, trials: int, seed: int, block: int = MC_BLOCK) -> EquivEstimate:
    """Unbiased per-bit estimate of E[h(eta(E))].

    Each trial draws a trace and an erasure pattern and evaluates eta exactly.
    Trials are split into fixed blocks with their own derived streams, so the
    result depends only on (seed, trials).
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    if n < 1:
        raise ConfigError("n must be >= 1")
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
    mus = mu_vector(mu, n)
    total = 0.0
    total_sq = 0.0
    done = 0
    b = 0
    while done < trials:
        T = min(block, trials - done)
        trace, erased = _sample_block(make_rng(seed, TAG_MC, b), T, n, alpha, mus)
        eta, _ = _eta_batch(~erased, trace, alpha)
        hv = binary_entropy_array(eta)
        total += float(hv.sum())
        total_sq += float(np.dot(hv, hv))
        done += T
        b += 1
    mean = total / trials
    if trials > 1:
        var = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
        se = math.sqrt(var / trials)
    else:
        se = 0.0
    mu_out = float(mus[0]) if np.all(mus == mus[0]) else tuple(float(m) for m in mus)
    return EquivEstimate(mean, se, "mc", n, float(alpha), mu_out, trials, seed)


def all_erased_eta(n: int, alpha: float) -> float:
    """eta when every packet is missed: 1/2 for odd n, (1 + (2 alpha - 1)**(n/2)) / 2 for even n.

    For even n the key is the xor of the flips at packets 2, 4, ..., n.
    """
    if n % 2:
        return 0.5
    return 0.5 * (1.0 + (2.0 * alpha - 1.0) ** (n // 2))


# --------------------------------------------------------------------------
# surfaces

@dataclass(frozen=True)
class SurfaceRow:
    alpha: float
    mu: float
    eps2: float
    eps3: float
    r21: float
    r32: float


def sweep_surface(alpha_grid: Sequence[float], mu_grid: Sequence[float], eps2_form: str = "published") -> list[SurfaceRow]:
    """eps2, eps3, eps2/eps1 and eps3/eps2 on a grid (alpha outer, mu inner).

    ``eps2_form="published"`` uses :func:`eps2_published` (the surfaces as
    usually plotted); ``"exact"`` uses :func:`eps2`. Ratios with a zero
    denominator are NaN.
    """
    if eps2_form not in ("published", "exact"):
        raise ConfigError(f"eps2_form must be 'published' or 'exact', got {eps2_form!r}")
    f2 = eps2_published if eps2_form == "published" else eps2
    rows = []
    for a in alpha_grid:
        if not 0.0 <= a <= 1.0:
            raise ConfigError(f"alpha grid value {a} outside [0, 1]")
        for m in mu_grid:
            if not 0.0 <= m <= 1.0:
                raise ConfigError(f"mu grid value {m} outside [0, 1]")
            e1, e2, e3 = eps1(m), f2(a, m), eps3(a, m)
            rows.append(SurfaceRow(
                float(a), float(m), e2, e3,
                e2 / e1 if e1 > 0 else math.nan,
                e3 / e2 if e2 > 0 else math.nan,
            ))
    return rows


def default_grid(points: int = 51) -> np.ndarray:
    """Evenly spaced grid on [0.01, 0.99]; odd ``points`` puts 0.5 on the grid."""
    return np.linspace(0.01, 0.99, points)


def surface_summary(rows: Sequence[SurfaceRow], level: float = 0.9) -> dict:
    """Headline facts about a surface: where eps3 < eps2, the alpha=1/2 column, bulge areas."""
    r32 = np.array([r.r32 for r in rows])
    finite = np.isfinite(r32)
    below = [r for r, f in zip(rows, finite) if f and r.r32 < 1.0]
    half = [r for r in rows if abs(r.alpha - 0.5) < 1e-12]
    worst = min((r for r, f in zip(rows, finite) if f), key=lambda r: r.r32, default=None)
    return {
        "points": len(rows),
        "non_monotone_points": len(below),
        "min_r32": None if worst is None else {"alpha": worst.alpha, "mu": worst.mu, "r32": worst.r32},
        "half_column_points": len(half),
        "half_column_r32_gt_1": bool(half) and all(r.r32 > 1.0 for r in half),
        "area_eps2_gt": float(np.mean([r.eps2 > level for r in rows])) if rows else 0.0,
        "area_eps3_gt": float(np.mean([r.eps3 > level for r in rows])) if rows else 0.0,
        "level": level,
    }
