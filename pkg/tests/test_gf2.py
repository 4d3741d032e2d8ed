import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aaakey.errors import DomainError, LengthMismatchError
from aaakey.gf2 import BitMatrix, BitVec, binary_entropy, binary_entropy_array, concat_cols, rank, xor_into

from oracles import span_rank

bitstrings = st.integers(1, 200).flatmap(lambda n: st.lists(st.integers(0, 1), min_size=n, max_size=n))


def bv(s):
    return BitVec.from_str(s)


@pytest.mark.parametrize("a,b,expected", [
    ("1010", "0000", "1010"),
    ("1010", "1010", "0000"),
    ("1100", "1010", "0110"),
])
def test_xor_examples(a, b, expected):
    assert xor_into(bv(a), bv(b)) == bv(expected)


def test_xor_length_mismatch():
    with pytest.raises(LengthMismatchError):
        xor_into(bv("101"), bv("1010"))


@given(st.integers(1, 150).flatmap(lambda n: st.tuples(*[st.lists(st.integers(0, 1), min_size=n, max_size=n)] * 3)))
def test_xor_abelian_group(triple):
    a, b, c = (BitVec.from_bits(x) for x in triple)
    assert (a ^ b) ^ c == a ^ (b ^ c)
    assert a ^ b == b ^ a
    assert a ^ a == BitVec.zeros(a.len)
    assert a ^ BitVec.zeros(a.len) == a


@given(bitstrings)
def test_padding_zero_and_roundtrip(bits):
    v = BitVec.from_bits(bits)
    assert list(v.to_bits()) == bits
    tail = v.len % 64
    if tail:
        assert int(v.words[-1]) >> tail == 0
    assert BitVec.from_json(json.loads(json.dumps(v.to_json()))) == v
    assert v.to_int() == sum(b << i for i, b in enumerate(bits))


def test_bit_order_documented():
    # bit 0 is the least significant bit of the last hex digit
    v = bv("10110010")
    assert v.to_hex() == "4d"
    assert v[0] == 1 and v[1] == 0
    assert BitVec.from_int(1 << 64, 65).words.tolist() == [0, 1]


def test_bad_padding_rejected():
    with pytest.raises(ValueError):
        BitVec(3, np.array([0b1000], dtype=np.uint64))


def test_rank_examples():
    assert rank(BitMatrix.identity(7)) == 7
    assert rank(BitMatrix.zeros(4, 3)) == 0
    assert rank(BitMatrix.from_array([[1, 1], [1, 1], [0, 1]])) == 2
    assert rank(BitMatrix.zeros(0, 0)) == 0


def test_rank_large_identity_multiword():
    assert rank(BitMatrix.identity(130)) == 130


def test_rank_does_not_mutate():
    m = BitMatrix.from_array([[1, 1, 0], [1, 1, 0], [0, 1, 1]])
    before = m.to_array().copy()
    rank(m)
    assert np.array_equal(m.to_array(), before)


def test_rank_matches_span_enumeration_exhaustive_small():
    rng = np.random.default_rng(0)
    for rows in range(0, 6):
        for cols in range(1, 6):
            for _ in range(20):
                a = rng.integers(0, 2, size=(rows, cols))
                assert rank(BitMatrix.from_array(a)) == span_rank(a.tolist())


@settings(max_examples=200)
@given(st.integers(1, 6), st.integers(1, 5), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_rank_concat_bounds(rows, ca, cb, seed):
    rng = np.random.default_rng(seed)
    A = BitMatrix.from_array(rng.integers(0, 2, size=(rows, ca)))
    B = BitMatrix.from_array(rng.integers(0, 2, size=(rows, cb)))
    r = rank(concat_cols(A, B))
    assert max(rank(A), rank(B)) <= r <= rank(A) + rank(B)
    assert r <= min(rows, ca + cb)


def test_matrix_json_roundtrip():
    m = BitMatrix.from_array(np.random.default_rng(1).integers(0, 2, size=(5, 70)))
    assert BitMatrix.from_json(json.loads(json.dumps(m.to_json()))) == m


def test_column_ints():
    m = BitMatrix.from_array([[1, 0], [1, 1], [0, 1]])
    assert m.column_ints() == [0b011, 0b110]
    assert BitMatrix.from_columns([0b011, 0b110], 3) == m


def test_binary_entropy_examples():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    direct = -0.11 * math.log(0.11, 2) - 0.89 * math.log(0.89, 2)
    assert binary_entropy(0.11) == pytest.approx(direct, abs=1e-15)
    assert binary_entropy(0.11) == pytest.approx(0.4999, abs=1e-4)


def test_binary_entropy_symmetry_dense_grid():
    grid = np.linspace(0, 1, 10001)
    a = binary_entropy_array(grid)
    b = binary_entropy_array(1 - grid)
    assert np.max(np.abs(a - b)) <= 1e-15
    assert np.argmax(a) == 5000


def test_binary_entropy_domain():
    assert binary_entropy(-1e-13) == 0.0
    assert binary_entropy(1 + 1e-13) == 0.0
    with pytest.raises(DomainError):
        binary_entropy(-1e-6)
    with pytest.raises(DomainError):
        binary_entropy(1.01)
    with pytest.raises(DomainError):
        binary_entropy_array([0.5, 2.0])
