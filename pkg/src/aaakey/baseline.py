"""Reciprocal-channel key capacity versus AAA key size over Rayleigh fading.

Noise is unit variance, ``p`` is per-symbol SNR (linear), pilots are all
ones (only ``x^H x = S`` enters the estimator), and channel gains are
CN(0, 1).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .equivocation import eps_independent
from .errors import ConfigError
from .sources import TAG_MMSE, TAG_OUTAGE, make_rng

TIE_RTOL = 1e-9
_BLOCK = 1 << 17


def c1(S: int, p: float) -> float:
    """Secret-key capacity per coherence period, log2((Sp+1)^2 / (2Sp+1))."""
    sp = S * p
    # log1p form keeps precision for small Sp
    return math.log1p(sp * sp / (2 * sp + 1)) / math.log(2)


def c1_upper(S: int, p: float) -> float:
    """log2(1 + Sp/2), the high-power approximation and strict upper bound of :func:`c1`."""
    return math.log1p(S * p / 2) / math.log(2)


def mu_u(R: float, p: float, approx: bool = False) -> float:
    """Outage probability at the legitimate receiver, 1 - exp(-(2^R - 1)/p).

    ``approx=True`` returns the high-power form (2^R - 1)/p.
    """
    if R <= 0 or p <= 0:
        raise ConfigError("R and p must be positive")
    x = (2.0 ** R - 1.0) / p
    return x if approx else -math.expm1(-x)


def mu_e(R: float, p: float, gamma_m: float) -> float:
    """Eve's outage probability with large-scale amplitude factor ``gamma_m``."""
    if gamma_m <= 0:
        raise ConfigError("gamma_m must be positive")
    return mu_u(R, p * gamma_m * gamma_m)


def l1(S: int, p: float, M: int, gamma_eff: float) -> float:
    return gamma_eff * M * c1(S, p)


def l2(S: int, R: float, M: int, mu_U: float, mu_E: Sequence[float]) -> float:
    """S R (1 - mu_U^M) (1 - prod(1 - mu_E[m]))."""
    if len(mu_E) != M:
        raise ConfigError(f"mu_E has {len(mu_E)} entries for M={M}")
    return S * R * (1.0 - mu_U ** M) * eps_independent(mu_E)


@dataclass(frozen=True)
class ComparisonParams:
    S: int
    p: float
    M: int
    R: float
    gamma_eff: float = 1.0
    gamma_m: tuple[float, ...] = field(default=(1.0,))

    def __post_init__(self):
        g = self.gamma_m
        g = (float(g),) if isinstance(g, (int, float)) else tuple(float(x) for x in g)
        if len(g) == 1 and self.M > 1:
            g = g * self.M
        object.__setattr__(self, "gamma_m", g)
        if self.S < 1 or self.M < 1:
            raise ConfigError("S and M must be >= 1")
        if self.p <= 0 or self.R <= 0:
            raise ConfigError("p and R must be positive")
        if not 0 < self.gamma_eff <= 1:
            raise ConfigError("gamma_eff must lie in (0, 1]")
        if len(g) != self.M or any(x <= 0 for x in g):
            raise ConfigError(f"gamma_m needs {self.M} positive entries")

    def with_M(self, M: int) -> "ComparisonParams":
        g = self.gamma_m if len(set(self.gamma_m)) > 1 else self.gamma_m[:1]
        if len(g) > 1 and len(g) != M:
            raise ConfigError("per-period gamma_m cannot be resized; give a scalar gamma_m")
        return ComparisonParams(self.S, self.p, M, self.R, self.gamma_eff, g)


@dataclass(frozen=True)
class ComparisonResult:
    C1: float
    L1: float
    mu_U: float
    mu_E: tuple[float, ...]
    eps_M: float
    L2: float
    preferred: str  # "AAA" | "Reciprocal" | "Tie"
    SR: float
    cascade_hint: bool

    def to_json(self) -> dict:
        d = asdict(self)
        d["mu_E"] = list(self.mu_E)
        return d


def verdict(L1: float, L2: float, rtol: float = TIE_RTOL) -> str:
    if abs(L1 - L2) <= rtol * max(abs(L1), abs(L2)):
        return "Tie"
    return "AAA" if L2 > L1 else "Reciprocal"


def compare(params: ComparisonParams) -> ComparisonResult:
    """Both key sizes and the preferred method.

    ``cascade_hint`` is set when the reciprocal method wins on size: the AAA
    side can then concatenate packets from several periods to grow its key.
    """
    C1 = c1(params.S, params.p)
    L1 = params.gamma_eff * params.M * C1
    muU = mu_u(params.R, params.p)
    muE = tuple(mu_e(params.R, params.p, g) for g in params.gamma_m)
    epsM = eps_independent(muE)
    L2 = l2(params.S, params.R, params.M, muU, muE)
    pref = verdict(L1, L2)
    return ComparisonResult(C1, L1, muU, muE, epsM, L2, pref, params.S * params.R, pref == "Reciprocal")


def sweep_M(params: ComparisonParams, Ms: Sequence[int]) -> list[tuple[int, float, float, str]]:
    rows = []
    for M in Ms:
        res = compare(params.with_M(M))
        rows.append((M, res.L1, res.L2, res.preferred))
    return rows


def crossover_M(rows: Sequence[tuple[int, float, float, str]]) -> int | None:
    """First M in a sweep where L1 exceeds L2, or None."""
    for M, L1, L2, _ in rows:
        if L1 > L2 and verdict(L1, L2) == "Reciprocal":
            return M
    return None


def gamma_for_mu_e(R: float, p: float, target: float) -> float:
    """Amplitude factor that puts Eve's outage probability at ``target``."""
    if not 0 < target < 1:
        raise ConfigError("target outage must lie in (0, 1)")
    return math.sqrt((2.0 ** R - 1.0) / (p * -math.log1p(-target)))


# --------------------------------------------------------------------------
# Monte Carlo validation

def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)


def mc_validate_mmse(S: int, p: float, trials: int, seed: int, block: int = _BLOCK) -> dict:
    """Empirical moments of the two parties' MMSE channel estimates.

    Returns sigma_hhat_sq = E|h^|^2, sigma_dh_sq = E|h^ - h|^2,
    cross_corr = E{h^ h^'*} (real part; imaginary part averages to zero)
    and c1_emp, the Gaussian mutual information implied by those moments.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    g = math.sqrt(p) / (S * p + 1)
    acc = np.zeros(5)  # |hh|^2, |hh - h|^2, Re hh hh'*, |hh'|^2, Im hh hh'*
    done, b = 0, 0
    while done < trials:
        T = min(block, trials - done)
        rng = make_rng(seed, TAG_MMSE, b)
        h = _cn(rng, T)
        # x = 1: x^H y = S sqrt(p) h + sum_s w_s
        sw = _cn(rng, (T, S)).sum(axis=1)
        sw2 = _cn(rng, (T, S)).sum(axis=1)
        hh = g * (S * math.sqrt(p) * h + sw)
        hh2 = g * (S * math.sqrt(p) * h + sw2)
        cross = hh * np.conj(hh2)
        acc += [
            np.sum(np.abs(hh) ** 2),
            np.sum(np.abs(hh - h) ** 2),
            np.sum(cross.real),
            np.sum(np.abs(hh2) ** 2),
            np.sum(cross.imag),
        ]
        done += T
        b += 1
    s_hh, s_dh, s_x, s_hh2, s_xi = acc / trials
    if s_hh > 0 and s_hh2 > 0:
        cond = s_hh - (s_x * s_x + s_xi * s_xi) / s_hh2
        c1_emp = math.log2(s_hh / cond) if cond > 0 else math.inf
    else:
        c1_emp = 0.0
    return {
        "sigma_hhat_sq": float(s_hh),
        "sigma_dh_sq": float(s_dh),
        "cross_corr": float(s_x),
        "c1_emp": float(c1_emp),
        "trials": trials,
    }


def mc_validate_outage(R: float, p: float, gamma_m: float, trials: int, seed: int, block: int = _BLOCK) -> float:
    """Fraction of Rayleigh draws with log2(1 + p gamma^2 |g|^2) < R."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    fails, done, b = 0, 0, 0
    while done < trials:
        T = min(block, trials - done)
        gain = np.abs(_cn(make_rng(seed, TAG_OUTAGE, b), T)) ** 2
        fails += int(np.count_nonzero(np.log2(1.0 + p * gamma_m * gamma_m * gain) < R))
        done += T
        b += 1
    return fails / trials


PRESETS = {
    # payload bits per packet as S*R with R = 1; p = 10; Eve misses 10% of packets
    "wifi": {"S": 12000, "R": 1.0, "p": 10.0, "M": 22, "gamma_eff": 1.0, "mu_e_target": 0.1},
    "lora": {"S": 88, "R": 1.0, "p": 10.0, "M": 22, "gamma_eff": 1.0, "mu_e_target": 0.1},
    "zigbee": {"S": 640, "R": 1.0, "p": 10.0, "M": 22, "gamma_eff": 1.0, "mu_e_target": 0.1},
}


def preset_params(name: str, **overrides) -> ComparisonParams:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    cfg = dict(PRESETS[name])
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    target = cfg.pop("mu_e_target")
    if "gamma_m" not in cfg:
        cfg["gamma_m"] = gamma_for_mu_e(cfg["R"], cfg["p"], target)
    return ComparisonParams(int(cfg["S"]), float(cfg["p"]), int(cfg["M"]), float(cfg["R"]), float(cfg["gamma_eff"]), cfg["gamma_m"])
