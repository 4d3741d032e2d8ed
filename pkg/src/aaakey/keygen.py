"""The XOR packet accumulator and a two-party session simulator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatchError
from .gf2 import BitVec, xor_into
from .sources import (
    TAG_SESSION,
    MarkovParams,
    ObservationSeq,
    apply_erasure,
    gen_trace,
    select_bits,
)


@dataclass(frozen=True)
class KeyState:
    """Running key: XOR of every packet absorbed so far. Constant size in ``n``."""

    key: BitVec
    n: int = 0

    @classmethod
    def empty(cls, L: int) -> "KeyState":
        return cls(BitVec.zeros(L), 0)

    @property
    def L(self) -> int:
        return self.key.len


def absorb(state: KeyState, packet_bits: BitVec) -> KeyState:
    if packet_bits.len != state.L:
        raise LengthMismatchError(f"packet has {packet_bits.len} bits, key has {state.L}")
    return KeyState(xor_into(state.key, packet_bits), state.n + 1)


def absorb_all(state: KeyState, packets: Sequence[BitVec]) -> KeyState:
    for p in packets:
        state = absorb(state, p)
    return state


def cascade(payloads: Sequence[BitVec], target_len: int, seed: int, index: int = 0) -> BitVec:
    """Concatenate payloads in order, then select ``target_len`` bits.

    Selection uses the public ordering for ``(seed, index)``, so for a fixed
    seed a longer target only appends positions to a shorter one.
    """
    total = sum(p.len for p in payloads)
    if total < target_len:
        raise LengthMismatchError(f"payloads carry {total} bits, need {target_len}")
    joined = BitVec.from_bits(np.concatenate([p.to_bits() for p in payloads])) if payloads else BitVec.zeros(0)
    return select_bits(joined, target_len, seed, index)


@dataclass(frozen=True)
class SessionReport:
    alice_key: BitVec
    bob_key: BitVec
    eve_observations: ObservationSeq
    n: int
    missed_count: int

    @property
    def agree(self) -> bool:
        return self.alice_key == self.bob_key

    def independent_equivocation_bound(self) -> int:
        """Key bits hidden from Eve under independent packets: L if she missed any packet."""
        return self.alice_key.len if self.missed_count >= 1 else 0

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "L": self.alice_key.len,
            "alice_key": self.alice_key.to_json(),
            "bob_key": self.bob_key.to_json(),
            "agree": self.agree,
            "missed_count": self.missed_count,
            "eve_pattern": self.eve_observations.pattern(),
            "equivocation_lower_bound": self.independent_equivocation_bound(),
        }


def run_session(params: MarkovParams, seed: int) -> SessionReport:
    """Alice and Bob each fold the same authenticated packets; Eve sees some of them."""
    params.validate()
    trace = gen_trace(params, seed=seed)
    alice = KeyState.empty(params.L)
    bob = KeyState.empty(params.L)
    for pkt in trace:
        alice = absorb(alice, pkt)
        bob = absorb(bob, pkt)
    eve = apply_erasure(trace, params.mu_list(), seed=seed)
    return SessionReport(alice.key, bob.key, eve, params.n, eve.missed_count)


def session_seed(master_seed: int, k: int) -> int:
    """Per-session seed derived from the master seed (stable, collision-resistant)."""
    ss = np.random.SeedSequence([int(master_seed), TAG_SESSION, int(k)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
