import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from czic.ld_channel import (
    ChannelUse,
    ConfigError,
    LdConfig,
    LevelWord,
    channel_step,
    channel_step_alt,
    feedback_view,
    partition,
)

import oracles


# symbolic bit labels are mapped onto distinct-looking concrete bits
A1, A2, A3 = 1, 0, 1
B1, B2, B3 = 1, 1, 0


def test_config_basics():
    c = LdConfig(4, 3, 1)
    assert c.word_length() == 3
    assert c.alpha() == Fraction(1, 3)
    assert LdConfig(3, 0, 2).alpha() == float("inf")


@pytest.mark.parametrize("args", [(1, 2, 1), (3, -1, 2), (3, 2, -1), (3, 0, 0), (2.5, 1, 1)])
def test_config_rejects_invalid(args):
    with pytest.raises(ConfigError):
        LdConfig(*args)


def test_partition_weak():
    p = partition((A1, A2, A3), LdConfig(2, 3, 1))
    assert p.U == (A1, A2) and p.V == (A1,) and p.L == (A3,)


def test_partition_strong():
    p = partition((A1, A2, A3), LdConfig(2, 1, 3))
    assert p.U == (A1, A2) and p.V == (A1,) and p.L == (A3,)


def test_partition_equal_levels():
    p = partition((1, 0), LdConfig(2, 2, 2))
    assert p.U == () and p.V == (1, 0) and p.L == (1, 0)


def test_partition_length_mismatch():
    with pytest.raises(ConfigError):
        partition((1, 0), LdConfig(2, 3, 1))


@given(st.integers(0, 8), st.integers(0, 8), st.data())
def test_partition_reassembles(n, m, data):
    if n + m == 0:
        n = 1
    c = LdConfig(2, n, m)
    w = tuple(data.draw(st.lists(st.integers(0, 1), min_size=c.word_length(), max_size=c.word_length())))
    p = partition(w, c)
    assert p.U + p.L == w
    assert len(p.U) == abs(n - m) and len(p.V) == len(p.L) == min(n, m)
    assert p.V == w[:min(n, m)]


def test_no_interference_is_identity():
    c = LdConfig(3, 2, 0)
    xs = [(1, 0), (0, 1), (1, 1)]
    assert channel_step(xs, c) == [LevelWord(x) for x in xs]


def test_weak_output_first_receiver():
    c = LdConfig(4, 3, 1)
    xs = [(A1, A2, A3), (B1, B2, B3), (0, 0, 0), (0, 0, 0)]
    ys = channel_step(xs, c)
    assert ys[0] == (A1, A2, A3 ^ B1)


def test_strong_output_first_receiver():
    c = LdConfig(4, 1, 3)
    xs = [(A1, A2, 0), (B1, B2, 0), (0, 0, 0), (0, 0, 0)]
    ys = channel_step(xs, c)
    assert ys[0] == (B1, B2, 0 ^ A1)


def test_channel_step_errors():
    c = LdConfig(3, 2, 1)
    with pytest.raises(ConfigError):
        channel_step([(0, 0)] * 2, c)
    with pytest.raises(ConfigError):
        channel_step([(0, 0), (0, 0), (0,)], c)


def test_levelword_xor():
    a, b = LevelWord((1, 0, 1)), LevelWord((1, 1, 0))
    assert a ^ b == (0, 1, 1)
    assert isinstance(a ^ b, LevelWord)
    with pytest.raises(ConfigError):
        a ^ LevelWord((1,))
    assert LevelWord.zeros(3) == (0, 0, 0)
    with pytest.raises(ConfigError):
        LevelWord.validated((0, 2))


def _configs():
    return st.tuples(st.integers(2, 6), st.integers(0, 9), st.integers(0, 9)).filter(lambda t: t[1] + t[2] > 0)


def _inputs(data, c):
    q = c.word_length()
    return [tuple(data.draw(st.lists(st.integers(0, 1), min_size=q, max_size=q))) for _ in range(c.K)]


@settings(max_examples=200)
@given(_configs(), st.data())
def test_matches_integer_oracle(kn, data):
    c = LdConfig(*kn)
    xs = _inputs(data, c)
    assert [tuple(y) for y in channel_step(xs, c)] == oracles.ld_outputs(xs, c.n, c.m)


@given(_configs(), st.data())
def test_linear_over_gf2(kn, data):
    c = LdConfig(*kn)
    x, x2 = _inputs(data, c), _inputs(data, c)
    s = [LevelWord(a) ^ LevelWord(b) for a, b in zip(x, x2)]
    lhs = channel_step(s, c)
    rhs = [a ^ b for a, b in zip(channel_step(x, c), channel_step(x2, c))]
    assert lhs == rhs


@given(_configs(), st.data())
def test_locality(kn, data):
    c = LdConfig(*kn)
    x = _inputs(data, c)
    j = data.draw(st.integers(0, c.K - 1))
    x2 = list(x)
    x2[j] = tuple(1 - b for b in x[j])
    before, after = channel_step(x, c), channel_step(x2, c)
    for k in range(c.K):
        if k not in (j, (j - 1) % c.K):
            assert before[k] == after[k]


@given(st.integers(2, 6), st.integers(1, 9), st.data())
def test_equal_levels_branches_agree(K, n, data):
    c = LdConfig(K, n, n)
    x = _inputs(data, c)
    assert channel_step(x, c) == channel_step_alt(x, c)


def _transcript(c, T):
    out = []
    for t in range(1, T + 1):
        xs = [tuple((t + k + i) % 2 for i in range(c.word_length())) for k in range(c.K)]
        out.append(ChannelUse(t, tuple(xs), tuple(channel_step(xs, c))))
    return out


def test_feedback_view_empty_at_start():
    c = LdConfig(3, 2, 1)
    assert feedback_view(_transcript(c, 3), 0, 1) == []


def test_feedback_view_is_causal():
    c = LdConfig(3, 2, 1)
    tr = _transcript(c, 4)
    k = 1
    assert feedback_view(tr, k, 3) == [tr[0].outputs[k], tr[1].outputs[k]]


def test_feedback_view_global():
    c = LdConfig(3, 2, 1)
    tr = _transcript(c, 2)
    assert feedback_view(tr, 0, 2, global_feedback=True) == [tr[0].outputs]
    with pytest.raises(ConfigError):
        feedback_view(tr, 0, 0)
