"""Known-answer tests for the xorshift64* stream.

Expected values were computed by an independent implementation of the
published algorithm (shifts 12/25/27, multiplier 2685821657736338717) before
this suite ran against the package.
"""

from hypothesis import given
from hypothesis import strategies as st

from ttd.host.prng import Xorshift64Star

_MASK = (1 << 64) - 1

# first outputs for seed 1, frozen from the reference run
SEED1_U64 = [
    5180492295206395165,
    12380297144915551517,
    13389498078930870103,
    5599127315341312413,
]
SEED1_FLOATS = [
    0.28083505005035947,
    0.6711372530266764,
    0.7258461452833668,
    0.303529299965799,
]


def _reference(seed: int, n: int) -> list:
    s = seed & _MASK
    if s == 0:
        s = 0x9E3779B97F4A7C15
    out = []
    for _ in range(n):
        s ^= s >> 12
        s = (s ^ (s << 25)) & _MASK
        s ^= s >> 27
        out.append((s * 2685821657736338717) & _MASK)
    return out


def test_seed1_known_answers():
    rng = Xorshift64Star(1)
    assert [rng.next_u64() for _ in range(4)] == SEED1_U64
    assert rng.state == 2306758490171379329


def test_seed1_float_mapping():
    rng = Xorshift64Star(1)
    got = [rng.next_float() for _ in range(4)]
    assert got == SEED1_FLOATS
    assert all(0.0 <= x < 1.0 for x in got)


def test_seed7_known_answers():
    rng = Xorshift64Star(7)
    assert rng.next_u64() == 15130880334998875822
    assert rng.next_u64() == 17123930943180875438


def test_zero_seed_uses_fallback():
    # state must be nonzero or the stream is constant zero
    assert Xorshift64Star(0).next_u64() == 973819730272012410
    assert Xorshift64Star(0).next_u64() == Xorshift64Star(0x9E3779B97F4A7C15).next_u64()


@given(st.integers(min_value=0, max_value=_MASK), st.integers(min_value=1, max_value=50))
def test_matches_reference_implementation(seed, n):
    rng = Xorshift64Star(seed)
    assert [rng.next_u64() for _ in range(n)] == _reference(seed, n)


@given(st.integers(min_value=1, max_value=_MASK))
def test_clone_diverges_nowhere(seed):
    a = Xorshift64Star(seed)
    a.next_u64()
    b = a.clone()
    assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]


def test_state_round_trips_through_constructor():
    a = Xorshift64Star(123456789)
    for _ in range(10):
        a.next_u64()
    b = Xorshift64Star(a.state)
    assert a.next_u64() == b.next_u64()
