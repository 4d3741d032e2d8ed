"""Packet-bit traces, Eve's erasure observations and partial-leakage records.

Randomness
----------
Every generator takes an integer ``seed`` and builds a PCG64 stream from
``numpy.random.SeedSequence([seed, *keys])``. Distinct key tuples give
statistically independent streams, so sweeps derive one stream per cell
(or per packet, per trial block) from a single master seed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, LengthMismatchError
from .gf2 import BitMatrix, BitVec, _pack, reduce_into_basis

# stream tags, so different generators never share a stream for the same seed
TAG_TRACE = 1
TAG_ERASURE = 2
TAG_LEAKAGE = 3
TAG_SELECT = 4
TAG_MC = 5
TAG_SESSION = 6
TAG_MMSE = 7
TAG_OUTAGE = 8


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    if seed is None or int(seed) < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


@dataclass(frozen=True)
class MarkovParams:
    """Packet model: ``n`` packets of ``L`` bits, per-bit persistence ``alpha``,
    Eve's per-packet miss probabilities ``mu`` (scalar or length-``n`` list)."""

    L: int
    n: int
    alpha: float = 0.5
    mu: float | tuple[float, ...] = 0.5

    def __post_init__(self):
        if not isinstance(self.mu, (int, float)):
            object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        self.validate()

    def validate(self):
        if self.L < 1:
            raise ConfigError(f"L must be >= 1, got {self.L}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        mus = self.mu_list()
        if len(mus) != self.n:
            raise ConfigError(f"mu has {len(mus)} entries for n={self.n} packets")
        if any(not 0.0 <= m <= 1.0 for m in mus):
            raise ConfigError(f"mu entries must lie in [0, 1], got {mus}")

    def mu_list(self) -> list[float]:
        if isinstance(self.mu, (int, float)):
            return [float(self.mu)] * self.n
        return list(self.mu)


def mu_vector(mu, n: int) -> np.ndarray:
    """Broadcast a scalar or per-packet miss probability to a length-``n`` array."""
    arr = np.atleast_1d(np.asarray(mu, dtype=float))
    if arr.size == 1:
        arr = np.full(n, float(arr[0]))
    if arr.size != n:
        raise LengthMismatchError(f"mu has {arr.size} entries for n={n} packets")
    if np.any((arr < 0) | (arr > 1)):
        raise ConfigError("mu entries must lie in [0, 1]")
    return arr


@dataclass(frozen=True)
class ObservationSeq:
    """Eve's record: ``entries[i]`` is the packet's bits, or ``None`` when erased."""

    entries: tuple[BitVec | None, ...]

    @property
    def n(self) -> int:
        return len(self.entries)

    def erased(self) -> np.ndarray:
        return np.array([e is None for e in self.entries], dtype=bool)

    @property
    def missed_count(self) -> int:
        return int(self.erased().sum())

    def lane(self, l: int) -> list[int | None]:
        """Observations of bit ``l`` across packets (``None`` for erasures)."""
        return [None if e is None else e[l] for e in self.entries]

    def pattern(self) -> str:
        """One character per packet: ``O`` observed, ``X`` erased."""
        return "".join("X" if e is None else "O" for e in self.entries)

    def to_json(self) -> list:
        return [None if e is None else e.to_json() for e in self.entries]


def _trace_bits(rng: np.random.Generator, L: int, n: int, alpha: float) -> np.ndarray:
    first = rng.integers(0, 2, size=L, dtype=np.uint8)
    flips = (rng.random((n - 1, L)) >= alpha).astype(np.uint8)
    steps = np.vstack([first[None, :], flips])
    return np.bitwise_xor.accumulate(steps, axis=0)


def gen_trace(params: MarkovParams, seed: int) -> list[BitVec]:
    """Draw ``n`` packets of ``L`` bits from the per-bit Markov chain.

    The first packet is uniform; each later bit repeats its predecessor with
    probability ``alpha`` (``alpha = 0.5`` gives independent uniform packets).
    """
    params.validate()
    bits = _trace_bits(make_rng(seed, TAG_TRACE), params.L, params.n, params.alpha)
    words = _pack(bits)
    return [BitVec(params.L, words[i]) for i in range(params.n)]


def apply_erasure(trace: Sequence[BitVec], mu, seed: int) -> ObservationSeq:
    """Erase each whole packet independently with probability ``mu[i]``."""
    mus = mu_vector(mu, len(trace))
    u = make_rng(seed, TAG_ERASURE).random(len(trace))
    return ObservationSeq(tuple(None if u[i] < mus[i] else pkt for i, pkt in enumerate(trace)))


@dataclass(frozen=True)
class LDist:
    """Distribution of the number of unknown bits per packet, parsed from
    ``fixed:k``, ``uniform:a..b`` or ``binomial:N,q``."""

    kind: str
    a: int
    b: int = 0
    q: float = 0.0
    spec: str = field(default="", compare=False)

    @classmethod
    def parse(cls, spec: str) -> "LDist":
        s = spec.strip().replace(" ", "")
        if m := re.fullmatch(r"fixed:(\d+)", s):
            return cls("fixed", int(m[1]), spec=s)
        if m := re.fullmatch(r"uniform:(\d+)\.\.(\d+)", s):
            a, b = int(m[1]), int(m[2])
            if a > b:
                raise ConfigError(f"empty uniform range in {spec!r}")
            return cls("uniform", a, b, spec=s)
        if m := re.fullmatch(r"binomial:(\d+),([0-9.eE+-]+)", s):
            q = float(m[2])
            if not 0.0 <= q <= 1.0:
                raise ConfigError(f"binomial q outside [0,1] in {spec!r}")
            return cls("binomial", int(m[1]), q=q, spec=s)
        raise ConfigError(f"unrecognised l_dist {spec!r}; use fixed:k, uniform:a..b or binomial:N,q")

    def support_max(self) -> int:
        return {"fixed": self.a, "uniform": self.b, "binomial": self.a}[self.kind]

    def mean(self) -> float:
        if self.kind == "fixed":
            return float(self.a)
        if self.kind == "uniform":
            return (self.a + self.b) / 2
        return self.a * self.q

    def prob_positive(self) -> float:
        if self.kind == "fixed":
            return float(self.a >= 1)
        if self.kind == "uniform":
            return 1.0 if self.a >= 1 else (self.b - self.a) / (self.b - self.a + 1)
        return 1.0 - (1.0 - self.q) ** self.a

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "fixed":
            return np.full(size, self.a, dtype=np.int64)
        if self.kind == "uniform":
            return rng.integers(self.a, self.b + 1, size=size)
        return rng.binomial(self.a, self.q, size=size)

    def check_support(self, L: int):
        if self.support_max() > L:
            raise ConfigError(f"l_dist {self.spec} reaches {self.support_max()} > L={L}")

    def __str__(self) -> str:
        return self.spec


@dataclass(frozen=True)
class LeakageRecord:
    """Eve's residual uncertainty on one packet: error lies in span(A), ``A`` is L x l."""

    A: BitMatrix

    @property
    def l(self) -> int:
        return self.A.cols

    @property
    def L(self) -> int:
        return self.A.rows

    @classmethod
    def from_erasure(cls, L: int, missed: bool) -> "LeakageRecord":
        """The all-or-nothing special case: a missed packet leaves all L bits unknown."""
        return cls(BitMatrix.identity(L) if missed else BitMatrix.zeros(L, 0))


def _random_int(rng: np.random.Generator, nbits: int) -> int:
    raw = int.from_bytes(rng.bytes((nbits + 7) // 8), "little")
    return raw & ((1 << nbits) - 1)


def sample_full_rank_columns(rng: np.random.Generator, L: int, l: int) -> list[int]:
    """Uniform L x l full-column-rank GF(2) matrix as column integers (rejection sampling)."""
    if not 0 <= l <= L:
        raise ConfigError(f"need 0 <= l <= L, got l={l}, L={L}")
    while True:
        cols = [_random_int(rng, L) for _ in range(l)]
        basis: dict[int, int] = {}
        if all(reduce_into_basis(basis, c) for c in cols):
            return cols


def gen_leakage(L: int, l_dist: LDist | str, n: int, seed: int) -> list[LeakageRecord]:
    if isinstance(l_dist, str):
        l_dist = LDist.parse(l_dist)
    l_dist.check_support(L)
    rng = make_rng(seed, TAG_LEAKAGE)
    ls = l_dist.sample(rng, n)
    return [LeakageRecord(BitMatrix.from_columns(sample_full_rank_columns(rng, L, int(l)), L)) for l in ls]


def selection_order(nbits: int, seed: int, index: int = 0) -> np.ndarray:
    """Public pseudorandom ordering of payload positions for packet ``index``.

    Both parties derive it from ``(seed, index)`` alone. Taking a longer
    prefix of the same ordering only appends positions.
    """
    return make_rng(seed, TAG_SELECT, index).permutation(nbits)


def select_bits(payload: BitVec, L: int, seed: int, index: int = 0) -> BitVec:
    """Pick ``L`` distinct payload positions, in the public order for ``(seed, index)``."""
    if payload.len < L:
        raise LengthMismatchError(
            f"payload has {payload.len} bits, fewer than L={L}; cascade packets instead"
        )
    pos = selection_order(payload.len, seed, index)[:L]
    return BitVec.from_bits(payload.to_bits()[pos])
