"""Symmetric linear deterministic cyclic Z-interference channel.

Transmitter ``k`` sends a word of ``max(n, m)`` bits; receiver ``k`` sees its
own transmitter through ``n`` levels and transmitter ``k+1 (mod K)`` through
``m`` levels, combined by XOR.  Users are indexed ``0..K-1`` and channel uses
(time slots) ``1..T``.  Bit index 0 is the top-most level.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

__all__ = [
    "ConfigError",
    "LdConfig",
    "LevelWord",
    "LevelPartition",
    "ChannelUse",
    "partition",
    "channel_step",
    "feedback_view",
]


class ConfigError(ValueError):
    """Raised for invalid channel parameters or mis-sized words."""


@dataclass(frozen=True)
class LdConfig:
    K: int
    n: int
    m: int

    def __post_init__(self):
        for name in ("K", "n", "m"):
            if not isinstance(getattr(self, name), int):
                raise ConfigError(f"{name} must be an integer")
        if self.K < 2:
            raise ConfigError(f"need at least 2 users, got K={self.K}")
        if self.n < 0 or self.m < 0:
            raise ConfigError("n and m must be non-negative")
        if self.n + self.m == 0:
            raise ConfigError("n and m cannot both be zero")

    def word_length(self) -> int:
        return max(self.n, self.m)

    def alpha(self) -> Fraction | float:
        """``m/n`` as an exact fraction, or ``math.inf`` when ``n == 0``."""
        if self.n == 0:
            return float("inf")
        return Fraction(self.m, self.n)

    @property
    def weak(self) -> bool:
        # n == m is handled by the n >= m branch
        return self.n >= self.m


class LevelWord(tuple):
    """Immutable bit vector over the signal levels, top level first."""

    __slots__ = ()

    def __new__(cls, bits: Sequence[int] = ()):
        return super().__new__(cls, bits)

    @classmethod
    def zeros(cls, length: int) -> "LevelWord":
        return cls((0,) * length)

    @classmethod
    def validated(cls, bits: Sequence[int]) -> "LevelWord":
        word = cls(bits)
        if any(b not in (0, 1) for b in word):
            raise ConfigError(f"bits must be 0 or 1: {bits!r}")
        return word

    def __xor__(self, other):
        if len(self) != len(other):
            raise ConfigError("XOR of words with different lengths")
        return LevelWord([a ^ b for a, b in zip(self, other)])

    def __repr__(self):
        return "LevelWord(" + "".join(map(str, self)) + ")"


class LevelPartition(NamedTuple):
    U: tuple
    V: tuple
    L: tuple


def _check_word(word: Sequence[int], config: LdConfig) -> None:
    if len(word) != config.word_length():
        raise ConfigError(
            f"word has {len(word)} levels, expected {config.word_length()}"
        )


def partition(word: Sequence[int], config: LdConfig) -> LevelPartition:
    """Split a transmit word into its (U, V, L) level groups.

    For ``n >= m``: U is the top ``n-m`` bits, V the top ``m`` bits and L the
    lower ``m`` bits.  For ``n < m`` the roles of ``n`` and ``m`` swap.
    ``U + L`` always reassembles the word.
    """
    _check_word(word, config)
    word = tuple(word)
    small = min(config.n, config.m)
    d = abs(config.n - config.m)
    return LevelPartition(U=word[:d], V=word[:small], L=word[len(word) - small:])


def _output(own: tuple, nxt: tuple, n: int, m: int) -> LevelWord:
    if n >= m:
        d = n - m
        return LevelWord(own[:d] + tuple(a ^ b for a, b in zip(own[d:], nxt)))
    d = m - n
    return LevelWord(nxt[:d] + tuple(a ^ b for a, b in zip(nxt[d:], own)))


def channel_step(inputs: Sequence[Sequence[int]], config: LdConfig) -> list[LevelWord]:
    """One channel use for all K users.

    ``n >= m``: ``Y_k = (U_k, L_k xor V_{k+1})``;
    ``n < m``:  ``Y_k = (U_{k+1}, L_{k+1} xor V_k)``.
    """
    K = config.K
    if len(inputs) != K:
        raise ConfigError(f"expected {K} inputs, got {len(inputs)}")
    for word in inputs:
        _check_word(word, config)
    n, m = config.n, config.m
    return [_output(tuple(inputs[k]), tuple(inputs[(k + 1) % K]), n, m) for k in range(K)]


def channel_step_alt(inputs: Sequence[Sequence[int]], config: LdConfig) -> list[LevelWord]:
    """Evaluate the ``n < m`` output formula regardless of regime.

    Only meaningful at ``n == m`` where both formulas must agree.
    """
    K = config.K
    n, m = config.n, config.m
    d = m - n if m >= n else 0
    out = []
    for k in range(K):
        own, nxt = tuple(inputs[k]), tuple(inputs[(k + 1) % K])
        out.append(LevelWord(nxt[:d] + tuple(a ^ b for a, b in zip(nxt[d:], own[:n]))))
    return out


@dataclass(frozen=True)
class ChannelUse:
    t: int
    inputs: tuple
    outputs: tuple


def feedback_view(transcript: Sequence[ChannelUse], k: int, t: int,
                  global_feedback: bool = False) -> list:
    """Outputs available to transmitter ``k`` before channel use ``t``.

    With local feedback this is ``[Y_k(1), ..., Y_k(t-1)]``; with global
    feedback each entry is the tuple of all K outputs of that use.
    """
    if t < 1:
        raise ConfigError("time index starts at 1")
    if global_feedback:
        return [use.outputs for use in transcript if use.t < t]
    return [use.outputs[k] for use in transcript if use.t < t]
