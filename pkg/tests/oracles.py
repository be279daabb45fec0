"""Independent reference implementations used to cross-check the package.

Nothing here imports czic.  The LD channel is modelled on integers with
shifts, capacities through the minimum of the two upper bounds, and the
Gaussian expressions with mpmath at 50 significant digits.
"""

from fractions import Fraction

import mpmath

mpmath.mp.dps = 50


# LD channel on integers: bit 0 of a word is the most significant bit.

def word_to_int(bits):
    v = 0
    for b in bits:
        v = (v << 1) | b
    return v


def int_to_word(v, q):
    return tuple((v >> (q - 1 - i)) & 1 for i in range(q))


def ld_outputs(words, n, m):
    q = max(n, m)
    K = len(words)
    xs = [word_to_int(w) for w in words]
    out = []
    for k in range(K):
        own, nxt = xs[k], xs[(k + 1) % K]
        if n >= m:
            y = own ^ (nxt >> (n - m))
        else:
            y = nxt ^ (own >> (m - n))
        out.append(int_to_word(y, q))
    return out


# LD capacity as min(type-I, type-II) with type-II from its level-count form.

def type2_levels(K, n, m):
    a = Fraction(m, n)
    if a <= Fraction(2, 3):
        return Fraction(n + (K - 2) * (max(0, n - 2 * m) + m) + (n - m), n * K)
    if a >= 2:
        return Fraction(m + (K - 2) * n, n * K)
    return None


def capacity_oracle(K, n, m):
    a = Fraction(m, n)
    t1 = max(1 - a / 2, a / 2)
    t2 = type2_levels(K, n, m)
    return t1 if t2 is None else min(t1, t2)


def scheme_bits(K, n, m):
    """Payload in K uses from the level bookkeeping of each scheme."""
    if 2 * m <= n:
        return K * (n - m) + m
    if n <= 2 * m and 3 * m <= 2 * n:
        return K * m + (2 * n - 3 * m)
    if m >= 2 * n:
        return (K - 2) * n + m
    return None


# Gaussian expressions

def half_log(x):
    return mpmath.log(x, 2) / 2


def bounds(snr, inr):
    S, I = mpmath.mpf(snr), mpmath.mpf(inr)
    r = mpmath.sqrt(S * I)
    return {
        "A": half_log(1 + S + I + 2 * r),
        "B": half_log(1 + S + 2 * I + I ** 2 + 2 * r),
        "C": half_log(1 + S + I),
        "D": half_log(1 + S),
        "E": half_log(1 + I),
    }


def pos(x):
    return max(x, mpmath.mpf(0))


def very_weak_rsym(snr, inr, K):
    S, I = mpmath.mpf(snr), mpmath.mpf(inr)
    r1 = pos(half_log((I + 1) / 3))
    r2 = pos(half_log((S / I + 1) / (2 * I + 1)))
    r3 = pos(half_log((I + 1) / 2))
    return r1 / K + r2 + r3


def very_strong_rsym(snr, inr, K):
    S, I = mpmath.mpf(snr), mpmath.mpf(inr)
    return pos(half_log((I / S ** 2 + 1) / 2)) / K + pos(half_log((S + 1) / 3))
