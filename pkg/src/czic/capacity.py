"""Closed-form capacity, GDoF and upper-bound formulas for the symmetric LD-CZIC.

Every function works in exact rational arithmetic.  ``alpha`` is ``m/n``;
pass an ``int`` or ``Fraction`` (floats are converted exactly, strings such as
``"7/12"`` are parsed).
"""

from __future__ import annotations

import enum
from fractions import Fraction

from .ld_channel import ConfigError, LdConfig

__all__ = [
    "Regime",
    "as_alpha",
    "classify_regime",
    "c_sym_ld_fb",
    "gdof_fb",
    "gdof_nofb",
    "c_sym_global_fb",
    "type1_upper",
    "type2_upper",
    "ld_fb_rate",
    "BOUNDARIES",
]

HALF = Fraction(1, 2)
TWO_THIRDS = Fraction(2, 3)
BOUNDARIES = (HALF, TWO_THIRDS, Fraction(1), Fraction(2))


class Regime(enum.Enum):
    VERY_WEAK = "very-weak"
    WEAK = "weak"
    MODERATE = "moderate"
    STRONG = "strong"
    VERY_STRONG = "very-strong"

    def __str__(self):
        return self.value


REGIME_ORDER = list(Regime)


def as_alpha(alpha) -> Fraction:
    a = Fraction(alpha)
    if a < 0:
        raise ConfigError(f"alpha must be non-negative, got {alpha}")
    return a


def _check_K(K: int):
    if not isinstance(K, int) or K < 2:
        raise ConfigError(f"K must be an integer >= 2, got {K!r}")


def classify_regime(alpha) -> Regime:
    """Interval membership; a boundary value goes to the lower regime."""
    a = as_alpha(alpha)
    if a <= HALF:
        return Regime.VERY_WEAK
    if a <= TWO_THIRDS:
        return Regime.WEAK
    if a <= 1:
        return Regime.MODERATE
    if a <= 2:
        return Regime.STRONG
    return Regime.VERY_STRONG


def fb_branch(regime: Regime, alpha, K: int) -> Fraction:
    """One branch of the feedback-capacity formula, evaluated at any alpha."""
    a = as_alpha(alpha)
    if regime is Regime.VERY_WEAK:
        return (1 - a) + a / K
    if regime is Regime.WEAK:
        return a + (2 - 3 * a) / K
    if regime is Regime.MODERATE:
        return 1 - a / 2
    if regime is Regime.STRONG:
        return a / 2
    return 1 + (a - 2) / K


def c_sym_ld_fb(alpha, K: int) -> Fraction:
    """Normalized symmetric feedback capacity of the K-user LD-CZIC."""
    _check_K(K)
    return fb_branch(classify_regime(alpha), alpha, K)


def gdof_fb(alpha, K: int) -> Fraction:
    """Per-user feedback GDoF of the Gaussian CZIC; same curve as the LD capacity."""
    return c_sym_ld_fb(alpha, K)


def gdof_nofb(alpha) -> Fraction:
    """No-feedback GDoF (the W-curve); independent of K."""
    a = as_alpha(alpha)
    r = classify_regime(a)
    if r is Regime.VERY_WEAK:
        return 1 - a
    if r is Regime.WEAK:
        return a
    if r is Regime.MODERATE:
        return 1 - a / 2
    if r is Regime.STRONG:
        return a / 2
    return Fraction(1)


def c_sym_global_fb(alpha) -> Fraction:
    """Normalized symmetric capacity with global feedback (the V-curve)."""
    a = as_alpha(alpha)
    return max(1 - a / 2, a / 2)


def type1_upper(alpha) -> Fraction:
    """Pairwise-rate upper bound, independent of K."""
    return c_sym_global_fb(alpha)


def type2_upper(config: LdConfig) -> Fraction | None:
    """Normalized permutation-chain upper bound.

    Evaluated with the identity ordering for alpha <= 2/3 and the reversed
    ordering for alpha >= 2.  Returns ``None`` (not applicable) in between,
    where the pairwise bound governs.
    """
    K, n, m = config.K, config.n, config.m
    if n == 0:
        raise ConfigError("the normalized bound needs n > 0")
    a = Fraction(m, n)
    if a <= TWO_THIRDS:
        total = n + (K - 2) * (max(0, n - 2 * m) + m) + (n - m)
        return Fraction(total, n * K)
    if a >= 2:
        return Fraction(m + (K - 2) * n, n * K)
    return None


def type2_upper_closed(alpha, K: int) -> Fraction | None:
    """Same bound as ``type2_upper`` written directly in alpha."""
    _check_K(K)
    a = as_alpha(alpha)
    if a <= TWO_THIRDS:
        return max(a, 1 - a) + min(a, 2 - 3 * a) / K
    if a >= 2:
        return 1 + (a - 2) / K
    return None


def ld_fb_rate(config: LdConfig) -> Fraction:
    """Symmetric feedback capacity in bits per channel use (not normalized).

    Defined for n = 0 as well, where only the very-strong branch applies.
    """
    K, n, m = config.K, config.n, config.m
    if n == 0:
        return n + Fraction(m - 2 * n, K)
    return c_sym_ld_fb(Fraction(m, n), K) * n
