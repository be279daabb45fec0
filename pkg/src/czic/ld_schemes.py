"""Bit-exact simulation of the feedback coding schemes on the LD channel.

Every scheme is described by a *layout*: for each block ``t`` the list of
levels that carry fresh message bits.  The remaining levels are either silent
or filled by a relay rule computed from the encoder's own past inputs and its
feedback.  A single executor drives all schemes, so an encoder can only ever
see its message and ``feedback_view(transcript, k, t)``.

Decoders receive only ``Y_k(1..T)`` and return one bit per fresh slot of their
own user, in layout order; ``verify_decode`` compares these to the message bank.
"""

from __future__ import annotations

import dataclasses
import json
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ld_channel import ChannelUse, ConfigError, LdConfig, channel_step, feedback_view

__all__ = [
    "WrongRegimeError",
    "SchemeInvariantError",
    "MessageBank",
    "SchemeResult",
    "SCHEMES",
    "run_very_weak",
    "run_weak",
    "run_very_strong",
    "run_global_fb",
    "run_scheme",
    "scheme_for",
    "verify_decode",
    "export_trace",
    "mutated_scheme",
]


class WrongRegimeError(ValueError):
    """The requested scheme does not apply to this (n, m)."""


class SchemeInvariantError(RuntimeError):
    """A decoder failed to recover its message; indicates a scheme bug."""


# Test-only hook: names of schemes whose user-0 encoder flips its first fresh bit.
_MUTATED: set = set()


@contextmanager
def mutated_scheme(name: str):
    """Corrupt one entry of the named scheme's encoder table while active."""
    _MUTATED.add(name)
    try:
        yield
    finally:
        _MUTATED.discard(name)


class MessageBank:
    """Independent uniform message bits for each user, from a seeded splittable PRNG."""

    def __init__(self, config: LdConfig, seed: int, role_counts: dict):
        self.config = config
        self.seed = seed
        self.role_counts = dict(role_counts)
        self.bits_per_user = sum(self.role_counts.values())
        children = np.random.SeedSequence(seed).spawn(config.K)
        self.bits = [
            tuple(np.random.default_rng(c).integers(0, 2, self.bits_per_user, dtype=np.uint8).tolist())
            for c in children
        ]

    def __getitem__(self, k):
        return self.bits[k]


@dataclass
class SchemeResult:
    scheme: str
    config: LdConfig
    bits_per_user: int
    blocks: int
    rate_per_user: Fraction
    normalized_rate: Fraction | None
    decode_success: bool
    decoded: list
    transcript: list = field(repr=False)
    global_feedback: bool = False
    bank: MessageBank | None = field(default=None, repr=False)

    @property
    def traces(self) -> list:
        """Per user, per block: sent word, received word and decoded own bits."""
        return _build_traces(SCHEMES[self.scheme](self.config), self.transcript, self.decoded)

    def summary(self) -> str:
        norm = "n/a" if self.normalized_rate is None else str(self.normalized_rate)
        return (f"{self.scheme} K={self.config.K} n={self.config.n} m={self.config.m}: "
                f"{self.bits_per_user} bits/user, {self.blocks} uses, "
                f"rate {self.rate_per_user}, normalized {norm}, "
                f"decode {'ok' if self.decode_success else 'FAILED'}")


class _Scheme:
    """Base class. Subclasses define layout, relay rule, role counts and decoder."""

    name = ""
    global_feedback = False

    def __init__(self, config: LdConfig):
        self.config = config
        self.q = config.word_length()
        self.check_regime()

    def check_regime(self):
        pass

    def blocks(self) -> int:
        return self.config.K

    def fresh(self, t: int) -> Sequence[int]:
        raise NotImplementedError

    def role_counts(self) -> dict:
        raise NotImplementedError

    def relay(self, k, t, word, past_inputs, fb):
        """Fill the non-fresh levels of ``word`` (a list) in place."""

    def decode(self, k, Y) -> dict:
        """Return {(t, position): bit} for every fresh slot of user k."""
        raise NotImplementedError

    def slots(self):
        return [(t, p) for t in range(1, self.blocks() + 1) for p in self.fresh(t)]


class _Encoder:
    def __init__(self, scheme: _Scheme, k: int, bits: Sequence[int]):
        self.scheme = scheme
        self.k = k
        self.bits = list(bits)
        if k == 0 and scheme.name in _MUTATED and self.bits:
            self.bits[0] ^= 1
        self.pos = 0
        self.past = []

    def transmit(self, t: int, fb: list) -> tuple:
        word = [0] * self.scheme.q
        for p in self.scheme.fresh(t):
            word[p] = self.bits[self.pos]
            self.pos += 1
        self.scheme.relay(self.k, t, word, self.past, fb)
        word = tuple(word)
        self.past.append(word)
        return word


def _execute(scheme: _Scheme, bank: MessageBank, encoder_cls=None) -> list:
    config = scheme.config
    encoder_cls = encoder_cls or _Encoder
    encoders = [encoder_cls(scheme, k, bank[k]) for k in range(config.K)]
    transcript: list = []
    for t in range(1, scheme.blocks() + 1):
        inputs = [enc.transmit(t, feedback_view(transcript, enc.k, t, scheme.global_feedback))
                  for enc in encoders]
        outputs = channel_step(inputs, config)
        transcript.append(ChannelUse(t, tuple(inputs), tuple(outputs)))
    return transcript


def _decode_all(scheme: _Scheme, transcript: list) -> list:
    slots = scheme.slots()
    out = []
    for k in range(scheme.config.K):
        Y = {use.t: tuple(use.outputs[k]) for use in transcript}
        got = scheme.decode(k, Y)
        out.append(tuple(got[s] for s in slots))
    return out


class VeryWeakScheme(_Scheme):
    """2m <= n.  Levels: top m, middle n-2m, low m.

    Block 1 is all fresh.  Afterwards each encoder repeats, on its top m
    levels, the neighbour's top m bits of the previous block, recovered from
    feedback.  Receivers cancel the interference on their low levels using the
    clean top levels of the following block.
    """

    name = "very-weak"

    def check_regime(self):
        n, m = self.config.n, self.config.m
        if 2 * m > n:
            raise WrongRegimeError(f"very-weak scheme needs 2m <= n, got n={n}, m={m}")

    def fresh(self, t):
        n, m = self.config.n, self.config.m
        return range(n) if t == 1 else range(m, n)

    def role_counts(self):
        n, m, K = self.config.n, self.config.m, self.config.K
        return {"top_first_block": m, "middle": K * (n - 2 * m), "low": K * m}

    def relay(self, k, t, word, past, fb):
        if t == 1:
            return
        n, m = self.config.n, self.config.m
        d = n - m
        prev_x, prev_y = past[-1], fb[-1]
        for j in range(m):
            word[j] = prev_y[d + j] ^ prev_x[d + j]

    def decode(self, k, Y):
        n, m, K = self.config.n, self.config.m, self.config.K
        d = n - m
        got = {}
        for t in range(1, K + 1):
            y = Y[t]
            for p in self.fresh(t):
                if p < d:
                    got[(t, p)] = y[p]
                else:
                    # neighbour's top bits at t reappear on our clean top levels at t+1
                    nxt = Y[t % K + 1]
                    got[(t, p)] = y[p] ^ nxt[p - d]
        return got


class WeakScheme(_Scheme):
    """n/2 <= m <= 2n/3.  Four level groups of sizes 2m-n, 2n-3m, 2m-n, n-m.

    Group 3 is always silent.  From block 2 on, group 2 carries the
    neighbour's group-2 bits of the previous block, read off the feedback.
    """

    name = "weak"

    def check_regime(self):
        n, m = self.config.n, self.config.m
        if not (n <= 2 * m and 3 * m <= 2 * n) or n == 0:
            raise WrongRegimeError(f"weak scheme needs n/2 <= m <= 2n/3, got n={n}, m={m}")
        self.s1 = 2 * m - n
        self.s2 = 2 * n - 3 * m
        self.s3 = 2 * m - n
        self.s4 = n - m
        self.o2 = self.s1
        self.o3 = self.s1 + self.s2
        self.o4 = self.o3 + self.s3

    def group(self, i):
        off = (0, self.o2, self.o3, self.o4)[i - 1]
        size = (self.s1, self.s2, self.s3, self.s4)[i - 1]
        return range(off, off + size)

    def fresh(self, t):
        g = list(self.group(1))
        if t == 1:
            g += list(self.group(2))
        return g + list(self.group(4))

    def role_counts(self):
        K = self.config.K
        return {"group1": K * self.s1, "group2_first_block": self.s2, "group4": K * self.s4}

    def relay(self, k, t, word, past, fb):
        if t == 1:
            return
        m = self.config.m
        prev_x, prev_y = past[-1], fb[-1]
        # neighbour's group 2 sits under our own group-4 top levels
        for i in range(self.s2):
            word[self.o2 + i] = prev_y[m + i] ^ prev_x[m + i]

    def decode(self, k, Y):
        K, m = self.config.K, self.config.m
        got = {}
        for t in range(1, K + 1):
            y = Y[t]
            nxt = Y[t % K + 1]
            for p in self.fresh(t):
                if p < self.o3:
                    got[(t, p)] = y[p]
                elif p < m + self.s2:
                    got[(t, p)] = y[p] ^ nxt[self.o2 + p - m]
                else:
                    got[(t, p)] = y[p]
        return got


class VeryStrongScheme(_Scheme):
    """m >= 2n.  The lowest n levels are always silent.

    Block 1 sends m-n fresh bits on the top.  Later blocks send n fresh bits
    on the top and repeat the neighbour's middle levels (n..m-n-1) from the
    previous block, which arrive in clear through feedback.
    """

    name = "very-strong"

    def check_regime(self):
        n, m = self.config.n, self.config.m
        if m < 2 * n:
            raise WrongRegimeError(f"very-strong scheme needs m >= 2n, got n={n}, m={m}")

    def fresh(self, t):
        n, m = self.config.n, self.config.m
        return range(m - n) if t == 1 else range(n)

    def role_counts(self):
        n, m, K = self.config.n, self.config.m, self.config.K
        return {"top": K * n, "middle_first_block": m - 2 * n}

    def relay(self, k, t, word, past, fb):
        if t == 1:
            return
        n, m = self.config.n, self.config.m
        prev_y = fb[-1]
        for p in range(n, m - n):
            word[p] = prev_y[p]

    def decode(self, k, Y):
        n, m, K = self.config.n, self.config.m, self.config.K
        d = m - n
        got = {}
        for t in range(1, K + 1):
            for p in range(n):
                got[(t, p)] = Y[t][d + p]
        # our block-1 middle bits have walked around the ring by block K
        for p in range(n, m - n):
            got[(1, p)] = Y[K][p]
        return got


class GlobalFeedbackScheme(_Scheme):
    """Two-block scheme where every transmitter sees every receiver's output.

    After block 1 every transmitter reconstructs all block-1 inputs and
    precodes block 2 so that each receiver observes exactly the bits it still
    needs, with the known interference cancelled in advance.
    """

    name = "global"
    global_feedback = True

    def blocks(self):
        return 2

    def fresh(self, t):
        n, m = self.config.n, self.config.m
        if n > m:
            return range(n) if t == 1 else range(m, n)
        if n < m:
            return range(m) if t == 1 else ()
        # n == m: one fresh word per user, always counted in block 1
        return range(n) if t == 1 else ()

    def role_counts(self):
        n, m = self.config.n, self.config.m
        if n > m:
            return {"first_block": n, "second_block": n - m}
        if n < m:
            return {"first_block": m}
        return {"first_block": n}

    # n > m -------------------------------------------------------------

    def _recover_weak(self, y1):
        n, m, K = self.config.n, self.config.m, self.config.K
        d = n - m
        X = [[0] * n for _ in range(K)]
        for p in range(n):
            for i in range(K):
                X[i][p] = y1[i][p] if p < d else y1[i][p] ^ X[(i + 1) % K][p - d]
        return X

    def _precode_weak(self, X1):
        n, m, K = self.config.n, self.config.m, self.config.K
        d = n - m
        # v_i: the top m levels each transmitter will send in block 2
        v = [[0] * m for _ in range(K)]
        for p in range(m):
            for i in range(K):
                v[i][p] = X1[i][d + p] ^ (v[(i + 1) % K][p - d] if p >= d else 0)
        return v

    # n < m -------------------------------------------------------------

    def _recover_strong(self, y1):
        n, m, K = self.config.n, self.config.m, self.config.K
        d = m - n
        X = [[0] * m for _ in range(K)]
        for p in range(m):
            for k in range(K):
                j = (k + 1) % K
                X[j][p] = y1[k][p] if p < d else y1[k][p] ^ X[k][p - d]
        return X

    def _target_strong(self, x):
        n = self.config.n
        return list(x[n:]) + list(x[:n])

    def _precode_strong(self, X1):
        n, m, K = self.config.n, self.config.m, self.config.K
        d = m - n
        D = [self._target_strong(x) for x in X1]
        X2 = [[0] * m for _ in range(K)]
        for p in range(m):
            for k in range(K):
                j = (k + 1) % K
                X2[j][p] = D[k][p] if p < d else D[k][p] ^ X2[k][p - d]
        return X2

    # --------------------------------------------------------------------

    def relay(self, k, t, word, past, fb):
        n, m, K = self.config.n, self.config.m, self.config.K
        if t == 1:
            return
        y1 = fb[0]
        if n > m:
            d = n - m
            X1 = self._recover_weak(y1)
            v = self._precode_weak(X1)
            nb = v[(k + 1) % K]
            for p in range(m):
                word[p] = X1[k][d + p]
            for i in range(m):
                word[d + i] ^= nb[i]
        else:
            X1 = self._recover_strong(y1)
            word[:] = self._precode_strong(X1)[k]

    def decode(self, k, Y):
        n, m, K = self.config.n, self.config.m, self.config.K
        got = {}
        if n > m:
            d = n - m
            own1 = list(Y[1][:d]) + list(Y[2][:m])
            for p in range(n):
                got[(1, p)] = own1[p]
            for p in range(m, n):
                got[(2, p)] = Y[2][p]
        elif n < m:
            own1 = Y[2][m - n:] + Y[2][:m - n]
            for p in range(m):
                got[(1, p)] = own1[p]
        else:
            y1, y2 = Y[1], Y[2]
            last_odd = K % 2 == 1 and k == K - 1
            for p in range(n):
                if last_odd:
                    got[(1, p)] = y2[p]
                elif k % 2 == 0:
                    got[(1, p)] = y1[p] ^ y2[p]
                elif K % 2 == 1 and k == K - 2:
                    got[(1, p)] = y1[p]
                else:
                    got[(1, p)] = y2[p]
        return got


class _EqualLevelsEncoder(_Encoder):
    """n == m: the precoding map is singular, so use a level-wise parity code.

    Users 1-based odd send (w, 0), even send (w, w); for odd K the last user
    sends (0, w).  Each receiver then solves for its word from Y(1), Y(2).
    """

    def transmit(self, t, fb):
        n = self.scheme.q
        if t == 1:
            word = list(self.bits[:n])
            self.msg = tuple(word)
        else:
            word = list(self.msg)
        K, k = self.scheme.config.K, self.k
        last_odd = K % 2 == 1 and k == K - 1
        if last_odd:
            send = t == 2
        elif k % 2 == 0:
            send = t == 1
        else:
            send = True
        word = tuple(word) if send else (0,) * n
        self.past.append(word)
        return word


SCHEMES: dict = {
    "very-weak": VeryWeakScheme,
    "weak": WeakScheme,
    "very-strong": VeryStrongScheme,
    "global": GlobalFeedbackScheme,
}


def scheme_for(config: LdConfig) -> str:
    """Name of the local-feedback scheme covering (n, m), or raise WrongRegimeError."""
    n, m = config.n, config.m
    if 2 * m <= n:
        return "very-weak"
    if n <= 2 * m and 3 * m <= 2 * n:
        return "weak"
    if m >= 2 * n:
        return "very-strong"
    raise WrongRegimeError(
        f"no local-feedback bit scheme for alpha={m}/{n} strictly between 2/3 and 2; "
        "implemented regimes: very-weak (alpha <= 1/2), weak (1/2 <= alpha <= 2/3), "
        "very-strong (alpha >= 2), or use the global-feedback scheme"
    )


def run_scheme(name: str, config: LdConfig, seed: int, strict: bool = True) -> SchemeResult:
    """Simulate scheme ``name`` on ``config`` with messages drawn from ``seed``.

    With ``strict`` a decode failure raises SchemeInvariantError; otherwise it
    is reported through ``decode_success``.
    """
    if name not in SCHEMES:
        raise ConfigError(f"unknown scheme {name!r}")
    scheme = SCHEMES[name](config)
    bank = MessageBank(config, seed, scheme.role_counts())
    expected = len(scheme.slots())
    if expected != bank.bits_per_user:
        raise SchemeInvariantError(f"layout has {expected} slots, bank has {bank.bits_per_user}")

    equal = name == "global" and config.n == config.m
    transcript = _execute(scheme, bank, _EqualLevelsEncoder if equal else _Encoder)

    decoded = _decode_all(scheme, transcript)
    ok = all(decoded[k] == bank[k] for k in range(config.K))
    blocks = scheme.blocks()
    bits = bank.bits_per_user
    result = SchemeResult(
        scheme=name,
        config=config,
        bits_per_user=bits,
        blocks=blocks,
        rate_per_user=Fraction(bits, blocks),
        normalized_rate=Fraction(bits, blocks * config.n) if config.n > 0 else None,
        decode_success=ok,
        decoded=decoded,
        transcript=transcript,
        global_feedback=scheme.global_feedback,
        bank=bank,
    )
    if strict and not ok:
        raise SchemeInvariantError(f"decode failure: {result.summary()}")
    return result


def _build_traces(scheme, transcript, decoded):
    slots = scheme.slots()
    traces = []
    for k in range(scheme.config.K):
        per_block = []
        for use in transcript:
            bits = [b for (t, _), b in zip(slots, decoded[k]) if t == use.t]
            per_block.append({
                "t": use.t,
                "sent": "".join(map(str, use.inputs[k])),
                "received": "".join(map(str, use.outputs[k])),
                "decoded": "".join(map(str, bits)),
            })
        traces.append(per_block)
    return traces


def run_very_weak(config: LdConfig, seed: int, strict: bool = True) -> SchemeResult:
    return run_scheme("very-weak", config, seed, strict)


def run_weak(config: LdConfig, seed: int, strict: bool = True) -> SchemeResult:
    return run_scheme("weak", config, seed, strict)


def run_very_strong(config: LdConfig, seed: int, strict: bool = True) -> SchemeResult:
    return run_scheme("very-strong", config, seed, strict)


def run_global_fb(config: LdConfig, seed: int, strict: bool = True) -> SchemeResult:
    return run_scheme("global", config, seed, strict)


def verify_decode(result: SchemeResult, bank: MessageBank) -> bool:
    """Re-run every decoder on the recorded outputs and compare with the bank."""
    scheme = SCHEMES[result.scheme](result.config)
    try:
        decoded = _decode_all(scheme, result.transcript)
    except (KeyError, IndexError):
        return False
    return all(decoded[k] == tuple(bank[k]) for k in range(result.config.K))


def flip_output_bit(result: SchemeResult, t: int, k: int, p: int) -> SchemeResult:
    """Copy of ``result`` with one received bit inverted (corruption test helper)."""
    transcript = []
    for use in result.transcript:
        outs = list(use.outputs)
        if use.t == t:
            y = list(outs[k])
            y[p] ^= 1
            outs[k] = tuple(y)
        transcript.append(ChannelUse(use.t, use.inputs, tuple(outs)))
    return dataclasses.replace(result, transcript=transcript)


def export_trace(result: SchemeResult) -> str:
    """JSON dump of the full transcript and per-user decode trace."""
    c = result.config
    doc = {
        "scheme": result.scheme,
        "K": c.K, "n": c.n, "m": c.m,
        "bits_per_user": result.bits_per_user,
        "blocks": result.blocks,
        "rate_per_user": {"num": result.rate_per_user.numerator, "den": result.rate_per_user.denominator},
        "decode_success": result.decode_success,
        "users": [{"k": k + 1, "blocks": tr} for k, tr in enumerate(result.traces)],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
