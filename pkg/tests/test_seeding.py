"""Trial seed derivation."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vesselmc.seeding import mix64


def _splitmix64_stream(seed, count):
    """Reference SplitMix64 generator (public-domain algorithm)."""
    mask = (1 << 64) - 1
    out = []
    state = seed & mask
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append((z ^ (z >> 31)) & mask)
    return out


def test_known_vectors_master_zero():
    # First outputs of SplitMix64 seeded with 0.
    assert mix64(0, 0) == 0xE220A8397B1DCDAF
    assert mix64(0, 1) == 0x6E789E6AA1B965F4
    assert mix64(0, 2) == 0x06C45D188009454F
    assert mix64(0, 3) == 0xF88BB8A8724C81EC


@pytest.mark.parametrize("master", [0, 1, 42, 2**63, 2**64 - 1])
def test_equals_splitmix64_stream(master):
    stream = _splitmix64_stream(master, 16)
    assert [mix64(master, i) for i in range(16)] == stream


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        mix64(1, -1)


@given(master=st.integers(0, 2**64 - 1), index=st.integers(0, 10**6))
def test_output_range_and_determinism(master, index):
    v = mix64(master, index)
    assert 0 <= v < 2**64
    assert v == mix64(master, index)
