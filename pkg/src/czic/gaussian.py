"""Gaussian CZIC: bound expressions, rate allocations and constant-gap checks.

All logarithms are base 2.  Each formula is written against a small numeric
backend (double precision or 60-digit mpmath) so that any inequality that
fails by less than ``RECHECK_WINDOW`` in floats is re-evaluated at high
precision before it is reported as violated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import mpmath

from .capacity import Regime, as_alpha, gdof_fb

__all__ = [
    "GaussianPoint",
    "BoundSet",
    "RegimeAllocation",
    "CheckResult",
    "GapReport",
    "WrongRegimeError",
    "compute_bounds",
    "classify_point",
    "allocate",
    "allocate_very_weak",
    "allocate_weak",
    "allocate_moderate",
    "allocate_strong",
    "allocate_very_strong",
    "check_constraints",
    "check_constraints_very_weak",
    "rate_chain",
    "upper_bound",
    "gap_report",
    "excluded_range_case",
    "gdof_numeric",
    "GAP_CONSTANTS",
]

TOL = 1e-9
RECHECK_WINDOW = 1e-6
MP_DPS = 60
# slack (in log2 units, scaled) for closed-interval regime pre-checks
REGIME_SLACK = 1e-12

GAP_CONSTANTS = {
    Regime.VERY_WEAK: Fraction(11, 4),
    Regime.WEAK: Fraction(3),
    Regime.MODERATE: Fraction(5, 4),
    Regime.STRONG: Fraction(1, 2),
    Regime.VERY_STRONG: Fraction(2),
}

EXCLUDED_CASE_BOUNDS = {"II": Fraction(2), "III": Fraction(3), "IV": Fraction(5, 2)}


class WrongRegimeError(ValueError):
    pass


# --------------------------------------------------------------------------
# numeric backends


class _FloatOps:
    name = "float"

    @staticmethod
    def num(x):
        return float(x)

    log2 = staticmethod(math.log2)
    sqrt = staticmethod(math.sqrt)

    @staticmethod
    def max0(x):
        return x if x > 0 else 0.0


class _MpOps:
    name = "mpmath"

    @staticmethod
    def num(x):
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        return mpmath.mpf(x)

    @staticmethod
    def log2(x):
        return mpmath.log(x, 2)

    sqrt = staticmethod(mpmath.sqrt)

    @staticmethod
    def max0(x):
        return x if x > 0 else mpmath.mpf(0)


FLOAT = _FloatOps()
MP = _MpOps()


def _hl(ops, x):
    """Half log."""
    return ops.log2(x) / 2


def _hlp(ops, x):
    """Half log, clamped at zero."""
    return ops.max0(ops.log2(x) / 2)


# --------------------------------------------------------------------------
# points and bounds


@dataclass(frozen=True)
class GaussianPoint:
    snr: float
    inr: float
    K: int = 3

    def __post_init__(self):
        if not (0 < self.snr < math.inf and 0 < self.inr < math.inf):
            raise ValueError("snr and inr must be finite and positive")
        if not isinstance(self.K, int) or self.K < 2:
            raise ValueError("K must be an integer >= 2")

    @property
    def alpha(self) -> float:
        if self.snr <= 1:
            raise ValueError("alpha needs snr > 1")
        return math.log2(self.inr) / math.log2(self.snr)

    @property
    def c_snr(self) -> float:
        return math.log2(1 + self.snr) / 2

    @property
    def c_inr(self) -> float:
        return math.log2(1 + self.inr) / 2

    def regime(self) -> Regime:
        return classify_point(self)

    def key(self):
        return (self.snr, self.inr, self.K)


@dataclass(frozen=True)
class BoundSet:
    A: float
    B: float
    C: float
    D: float
    E: float


def _bounds(ops, S, I):
    root = ops.sqrt(S * I)
    return (
        _hl(ops, 1 + S + I + 2 * root),
        _hl(ops, 1 + S + 2 * I + I * I + 2 * root),
        _hl(ops, 1 + S + I),
        _hl(ops, 1 + S),
        _hl(ops, 1 + I),
    )


def compute_bounds(point: GaussianPoint, ops=FLOAT) -> BoundSet:
    """The five upper-bound building blocks A..E in bits."""
    return BoundSet(*_bounds(ops, ops.num(point.snr), ops.num(point.inr)))


def _logs(point_or_s, inr=None):
    if inr is None:
        return math.log2(point_or_s.snr), math.log2(point_or_s.inr)
    return math.log2(point_or_s), math.log2(inr)


def classify_point(point: GaussianPoint) -> Regime:
    """Half-open intervals [lo, hi) in alpha, with the last regime [2, inf).

    Compared as integer multiples of log2(snr) and log2(inr) (inr^2 vs snr,
    inr^3 vs snr^2, ...), which is exact for powers of two and cannot overflow.
    """
    ls, li = _logs(point)
    if 2 * li < ls:
        return Regime.VERY_WEAK
    if 3 * li < 2 * ls:
        return Regime.WEAK
    if li < ls:
        return Regime.MODERATE
    if li < 2 * ls:
        return Regime.STRONG
    return Regime.VERY_STRONG


def adjacent_regimes(point: GaussianPoint) -> list:
    """The regime of the point, plus the lower neighbour when it sits on a boundary."""
    ls, li = _logs(point)
    r = classify_point(point)
    out = [r]
    on_edge = {
        Regime.WEAK: 2 * li == ls,
        Regime.MODERATE: 3 * li == 2 * ls,
        Regime.STRONG: li == ls,
        Regime.VERY_STRONG: li == 2 * ls,
    }
    if on_edge.get(r):
        order = list(Regime)
        out.insert(0, order[order.index(r) - 1])
    return out


def _in_regime(regime: Regime, S: float, I: float) -> bool:
    """Closed-interval membership with a tiny slack."""
    ls, li = _logs(S, I)
    eps = REGIME_SLACK * max(1.0, abs(ls), abs(li))
    if regime is Regime.VERY_WEAK:
        return 2 * li <= ls + eps
    if regime is Regime.WEAK:
        return 2 * li >= ls - eps and 3 * li <= 2 * ls + eps
    if regime is Regime.MODERATE:
        return 3 * li >= 2 * ls - eps and li <= ls + eps
    if regime is Regime.STRONG:
        return li >= ls - eps and li <= 2 * ls + eps
    return li >= 2 * ls - eps


# --------------------------------------------------------------------------
# per-regime rate formulas (ops, S, I, K) -> dict of sub-message rates


def _rates_vw(ops, S, I, K):
    return {
        "R1": _hlp(ops, (I + 1) / 3),
        "R2": _hlp(ops, (S / I + 1) / (2 * I + 1)),
        "R3": _hlp(ops, (I + 1) / 2),
    }


def _rsym_vw(ops, S, I, K):
    r = _rates_vw(ops, S, I, K)
    return (r["R1"] + K * r["R2"] + K * r["R3"]) / K


def _rates_w(ops, S, I, K):
    return {
        "R1": _hlp(ops, (I + 1) / (2 * S / I + 1)),
        "R2": _hlp(ops, (1 + S * S) / (1 + 2 * I ** 3)),
        "R3": _hlp(ops, (S / I + 2) / 2),
    }


def _rsym_w(ops, S, I, K):
    r = _rates_w(ops, S, I, K)
    return (K * r["R1"] + r["R2"] + K * r["R3"]) / K


def _rates_m(ops, S, I, K):
    return {
        "R1": ops.max0(ops.log2((S + I + 1) / (S / I + 2)) / 4),
        "R2": _hl(ops, (S / I + 2) / 2),
    }


def _rsym_m(ops, S, I, K):
    r = _rates_m(ops, S, I, K)
    return r["R1"] + r["R2"]


def _rates_s(ops, S, I, K):
    return {"R": ops.log2(1 + S + I) / 4}


def _rsym_s(ops, S, I, K):
    return _rates_s(ops, S, I, K)["R"]


def _rates_vs(ops, S, I, K):
    return {
        "R1": _hlp(ops, (I / (S * S) + 1) / 2),
        "R2": _hlp(ops, (S + 1) / 3),
    }


def _rsym_vs(ops, S, I, K):
    r = _rates_vs(ops, S, I, K)
    return (r["R1"] + K * r["R2"]) / K


_RATES = {
    Regime.VERY_WEAK: (_rates_vw, _rsym_vw),
    Regime.WEAK: (_rates_w, _rsym_w),
    Regime.MODERATE: (_rates_m, _rsym_m),
    Regime.STRONG: (_rates_s, _rsym_s),
    Regime.VERY_STRONG: (_rates_vs, _rsym_vs),
}


def _powers(regime, S, I):
    """Fraction of transmit power per codeword layer (high, mid, low)."""
    if regime is Regime.VERY_WEAK:
        return {"high": (I - 1) / I, "mid": (S - I * I) / (S * I), "low": I / S}
    if regime is Regime.WEAK:
        return {"high": (I * I - S) / (I * I), "mid": (S - I) / (I * I), "low": 1 / I}
    if regime is Regime.MODERATE:
        return {"common": (I - 1) / I, "private": 1 / I}
    if regime is Regime.STRONG:
        return {"common": 1.0}
    return {"high": (S - 1) / S, "low": 1 / S}


def _guard(regime, S, I):
    if regime is Regime.VERY_WEAK:
        return I >= 2 and S >= 2 * I * I
    if regime is Regime.WEAK:
        return S >= I >= 1
    if regime is Regime.MODERATE:
        return I >= 1
    if regime is Regime.VERY_STRONG:
        return S >= 2
    return True


@dataclass
class RegimeAllocation:
    regime: Regime
    rates: dict
    powers: dict
    r_sym: float
    guard: bool
    point: GaussianPoint = field(repr=False, default=None)

    @property
    def betas(self) -> dict:
        return {k: math.sqrt(max(v, 0.0)) for k, v in self.powers.items()}

    def power_total(self) -> float:
        return sum(self.powers.values())


def allocate(point: GaussianPoint, regime: Regime | None = None) -> RegimeAllocation:
    """Rate and power allocation of ``regime`` (default: the point's own regime)."""
    regime = regime or classify_point(point)
    S, I, K = float(point.snr), float(point.inr), point.K
    if not _in_regime(regime, S, I):
        raise WrongRegimeError(f"snr={S:g}, inr={I:g} is outside the {regime} regime")
    rates_fn, rsym_fn = _RATES[regime]
    return RegimeAllocation(
        regime=regime,
        rates=rates_fn(FLOAT, S, I, K),
        powers=_powers(regime, S, I),
        r_sym=rsym_fn(FLOAT, S, I, K),
        guard=_guard(regime, S, I),
        point=point,
    )


def allocate_very_weak(point):
    return allocate(point, Regime.VERY_WEAK)


def allocate_weak(point):
    return allocate(point, Regime.WEAK)


def allocate_moderate(point):
    return allocate(point, Regime.MODERATE)


def allocate_strong(point):
    return allocate(point, Regime.STRONG)


def allocate_very_strong(point):
    return allocate(point, Regime.VERY_STRONG)


# --------------------------------------------------------------------------
# inequality checks with high-precision re-evaluation


@dataclass(frozen=True)
class CheckResult:
    id: str
    lhs: float
    rhs: float
    satisfied: bool
    rechecked: bool = False

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def _leq(ident: str, lhs_fn: Callable, rhs_fn: Callable, point: GaussianPoint) -> CheckResult:
    """Check lhs <= rhs + TOL, re-evaluating with mpmath when the miss is tiny."""
    S, I, K = float(point.snr), float(point.inr), point.K
    lhs = float(lhs_fn(FLOAT, S, I, K))
    rhs = float(rhs_fn(FLOAT, S, I, K))
    if lhs <= rhs + TOL:
        return CheckResult(ident, lhs, rhs, True)
    if lhs - rhs > RECHECK_WINDOW:
        return CheckResult(ident, lhs, rhs, False)
    with mpmath.workdps(MP_DPS):
        Sm, Im = MP.num(point.snr), MP.num(point.inr)
        l = lhs_fn(MP, Sm, Im, K)
        r = rhs_fn(MP, Sm, Im, K)
        ok = bool(l <= r + mpmath.mpf(TOL))
        return CheckResult(ident, float(l), float(r), ok, rechecked=True)


def _rate(regime, name):
    fn = _RATES[regime][0]
    return lambda ops, S, I, K: fn(ops, S, I, K)[name]


def _constraints(regime):
    """(id, lhs, rhs) for every decodability inequality of the regime."""
    hl = _hl
    if regime is Regime.VERY_WEAK:
        R1, R2, R3 = (_rate(regime, r) for r in ("R1", "R2", "R3"))
        return [
            ("VW-1", R1, lambda o, S, I, K: hl(o, (I + 1) / 2)),
            ("VW-2", R1, lambda o, S, I, K: hl(o, (S + I + 1) / (S / I + I + 1))),
            ("VW-3", R2, lambda o, S, I, K: hl(o, (S / I + I + 1) / (2 * I + 1))),
            ("VW-4", R3, lambda o, S, I, K: hl(o, (I + 2) / 2)),
            ("VW-identity", lambda o, S, I, K: o.num(0),
             lambda o, S, I, K: (S - I * I) + (S - S / I) + I + 2),
        ]
    if regime is Regime.WEAK:
        R1, R2, R3 = (_rate(regime, r) for r in ("R1", "R2", "R3"))
        return [
            ("W-enc-1", R1, lambda o, S, I, K: hl(o, (I + 1) / (S / I + 1))),
            ("W-enc-2", R2, lambda o, S, I, K: hl(o, (S / I + 1) / 2)),
            ("W-rx-1", R1, lambda o, S, I, K: hl(o, (S + I + 1) / (S * S / (I * I) + I + 1))),
            ("W-rx-2", R2, lambda o, S, I, K: hl(o, (S * S / (I * I) + I + 1) / (S / I + I + 1))),
            ("W-rx-3", R1, lambda o, S, I, K: hl(o, (S / I + I + 1) / (2 * S / I + 1))),
            ("W-delayed", R3, lambda o, S, I, K: hl(o, (S / I + 2) / 2)),
        ]
    if regime is Regime.MODERATE:
        R1 = _rate(regime, "R1")
        return [
            ("M-mac-1", R1, lambda o, S, I, K: hl(o, (S + 2) / (S / I + 2))),
            ("M-mac-2", R1, lambda o, S, I, K: hl(o, (I + S / I + 1) / (S / I + 2))),
            ("M-mac-sum", lambda o, S, I, K: 2 * R1(o, S, I, K),
             lambda o, S, I, K: hl(o, (S + I + 1) / (S / I + 2))),
        ]
    if regime is Regime.STRONG:
        R = _rate(regime, "R")
        return [
            ("S-mac-own", R, lambda o, S, I, K: hl(o, 1 + S)),
            ("S-mac-cross", R, lambda o, S, I, K: hl(o, 1 + I)),
            ("S-mac-sum", lambda o, S, I, K: 2 * R(o, S, I, K), lambda o, S, I, K: hl(o, 1 + S + I)),
        ]
    R1, R2 = _rate(regime, "R1"), _rate(regime, "R2")
    return [
        ("VS-enc-high", R2, lambda o, S, I, K: hl(o, (I + 1) / (I / S + 1))),
        ("VS-enc-low", R1, lambda o, S, I, K: hl(o, 1 + I / S)),
        ("VS-rx-1", R2, lambda o, S, I, K: hl(o, (I + S + 1) / (I / S + S + 1))),
        ("VS-rx-2", R1, lambda o, S, I, K: hl(o, (I / S + S + 1) / (S + 1))),
        ("VS-rx-3", R2, lambda o, S, I, K: hl(o, (S + 1) / 2)),
    ]


def check_constraints(alloc: RegimeAllocation, point: GaussianPoint | None = None) -> list:
    """Evaluate every decodability inequality of the allocation's regime."""
    point = point or alloc.point
    return [_leq(i, l, r, point) for i, l, r in _constraints(alloc.regime)]


def check_constraints_very_weak(alloc, point):
    if alloc.regime is not Regime.VERY_WEAK:
        raise WrongRegimeError("not a very-weak allocation")
    if not alloc.guard:
        return []
    return check_constraints(alloc, point)


def constraint_pairs(alloc, point=None) -> list:
    return [(c.id, c.satisfied) for c in check_constraints(alloc, point)]


# --------------------------------------------------------------------------
# lower-bound chains (achievable rate versus a closed form in D and E)

def _chain_rhs(name):
    def vw(o, S, I, K):
        D, E = _hl(o, 1 + S), _hl(o, 1 + I)
        return (D - E) + E / K - 1 - o.log2(3) / (2 * K)

    def w_printed(o, S, I, K):
        D, E = _hl(o, 1 + S), _hl(o, 1 + I)
        return E + (2 * D - 3 * E) / K - o.num(1) / 2 - o.num(1) / (2 * K)

    def w(o, S, I, K):
        D, E = _hl(o, 1 + S), _hl(o, 1 + I)
        return E + (2 * D - 3 * E) / K - 1 - o.num(1) / K

    def m(o, S, I, K):
        D, E = _hl(o, 1 + S), _hl(o, 1 + I)
        return D - E / 2 - o.num(1) / 2

    def s(o, S, I, K):
        return _hl(o, 1 + S + I) / 2

    def vs(o, S, I, K):
        D, E = _hl(o, 1 + S), _hl(o, 1 + I)
        return D + (E - 2 * D) / K - (K * o.log2(3) + 1) / (2 * K)

    return {"very-weak": vw, "weak-printed": w_printed, "weak": w,
            "moderate": m, "strong": s, "very-strong": vs}[name]


def rate_chain(point: GaussianPoint, regime: Regime | None = None, variant: str | None = None) -> CheckResult:
    """Check that the allocation's R_sym is at least the regime's closed form.

    ``variant="weak-printed"`` selects the weaker-constant form of the weak
    regime chain, which does not hold everywhere (kept for comparison).
    """
    regime = regime or classify_point(point)
    name = variant or regime.value
    rsym = _RATES[regime][1]
    return _leq(f"chain-{name}", _chain_rhs(name), rsym, point)


# --------------------------------------------------------------------------
# upper bounds and gaps


def _ub(regime, simplified=True):
    def f(o, S, I, K):
        A, B, C, D, E = _bounds(o, S, I)
        if regime is Regime.VERY_WEAK and simplified:
            return (B - E) + E / K
        if regime in (Regime.VERY_WEAK, Regime.WEAK):
            return (B - E) + (A + C + E - 2 * B) / K
        if regime in (Regime.MODERATE, Regime.STRONG):
            return (A + C - E) / 2
        return D + (A + C - 2 * D - E) / K
    return f


def upper_bound(point: GaussianPoint, regime: Regime | None = None, simplified: bool = True) -> float:
    """Per-user feedback capacity upper bound for the regime.

    For very-weak interference ``simplified`` selects (B-E)+E/K instead of
    the tighter (B-E)+(A+C+E-2B)/K.
    """
    regime = regime or classify_point(point)
    return float(_ub(regime, simplified)(FLOAT, float(point.snr), float(point.inr), point.K))


@dataclass
class GapReport:
    point: GaussianPoint
    regime: Regime
    lower: float
    upper: float
    gap: float
    regime_constant: Fraction
    passed: bool
    guarded: bool
    case: str | None = None
    note: str = ""
    rechecked: bool = False

    def as_record(self) -> dict:
        return {
            "snr": self.point.snr,
            "inr": self.point.inr,
            "K": self.point.K,
            "regime": self.regime.value,
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "regime_constant": self.regime_constant,
            "guarded": self.guarded,
            "case": self.case or "",
            "pass": self.passed,
            "note": self.note,
        }


def _gap_check(point, regime, bound) -> CheckResult:
    _, rsym = _RATES[regime]
    ub = _ub(regime, simplified=True)
    return _leq("gap", lambda o, S, I, K: ub(o, S, I, K) - rsym(o, S, I, K),
                lambda o, S, I, K: o.num(bound), point)


def excluded_range_case(point: GaussianPoint, K: int | None = None):
    """Very-weak points split by INR >= 2 and SNR >= 2 INR^2.

    Returns (case label, gap bound, pass).  Case I is the main analysis with
    bound 11/4.  Case IV is judged on the upper bound alone.
    """
    S, I = float(point.snr), float(point.inr)
    if not _in_regime(Regime.VERY_WEAK, S, I):
        raise WrongRegimeError("excluded-range analysis covers the very-weak regime only")
    big_i = I >= 2
    big_s = S >= 2 * I * I
    if big_i and big_s:
        label, bound = "I", GAP_CONSTANTS[Regime.VERY_WEAK]
    elif big_i:
        label, bound = "II", EXCLUDED_CASE_BOUNDS["II"]
    elif big_s:
        label, bound = "III", EXCLUDED_CASE_BOUNDS["III"]
    else:
        label, bound = "IV", EXCLUDED_CASE_BOUNDS["IV"]
    if label == "IV":
        res = _leq("upper", _ub(Regime.VERY_WEAK), lambda o, S, I, K: o.num(bound), point)
    else:
        res = _gap_check(point, Regime.VERY_WEAK, bound)
    return label, bound, res.satisfied


def gap_report(point: GaussianPoint, regime: Regime | None = None) -> GapReport:
    """Lower bound, upper bound and gap versus the regime's constant."""
    regime = regime or classify_point(point)
    alloc = allocate(point, regime)
    upper = upper_bound(point, regime)
    lower = alloc.r_sym
    if regime is Regime.VERY_WEAK:
        label, bound, ok = excluded_range_case(point)
        chk = _gap_check(point, regime, bound) if label != "IV" else None
        note = "upper <= 5/2" if label == "IV" else ""
        return GapReport(point, regime, lower, upper, upper - lower, bound, ok,
                         guarded=alloc.guard, case=label, note=note,
                         rechecked=bool(chk and chk.rechecked))
    if not alloc.guard:
        return GapReport(point, regime, lower, upper, upper - lower, GAP_CONSTANTS[regime],
                         True, guarded=False, note="unguarded: not asserted")
    chk = _gap_check(point, regime, GAP_CONSTANTS[regime])
    return GapReport(point, regime, lower, upper, upper - lower, GAP_CONSTANTS[regime],
                     chk.satisfied, guarded=True, rechecked=chk.rechecked)


# --------------------------------------------------------------------------
# GDoF from the achievable rates


def gdof_numeric(alpha, K: int, snr_exponent: float) -> float:
    """Achievable R_sym divided by C_SNR at snr = 2^e, inr = snr^alpha."""
    a = float(as_alpha(alpha))
    snr = 2.0 ** snr_exponent
    inr = 2.0 ** (a * snr_exponent)
    point = GaussianPoint(snr, inr, K)
    return allocate(point).r_sym / point.c_snr


def gdof_target(alpha, K: int) -> float:
    return float(gdof_fb(alpha, K))


# --------------------------------------------------------------------------
# grids


def main_grid(snr_exponents: Iterable[int] = range(2, 41, 2), K_values: Iterable[int] = range(3, 11),
              inr_step: Fraction = Fraction(1, 2), alpha_max: int = 4):
    """(point, regime) pairs: snr = 2^e, inr = 2^f for f in [0, alpha_max*e].

    Boundary points appear once per adjacent regime.
    """
    out = []
    for e in snr_exponents:
        f = Fraction(0)
        while f <= alpha_max * e:
            for K in K_values:
                p = GaussianPoint(2.0 ** e, 2.0 ** float(f), K)
                for r in adjacent_regimes(p):
                    out.append((p, r))
            f += inr_step
    out.sort(key=lambda pr: (pr[0].key(), list(Regime).index(pr[1])))
    return out


def excluded_grid(K_values: Iterable[int] = range(3, 11), snr_quarters: int = 40, inr_eighths: int = 8):
    """Fine grid of very-weak points with 1 <= inr and inr^2 <= snr, small snr."""
    out = []
    for k in range(0, snr_quarters + 1):
        s = 2.0 ** (k / 4)
        i = 0
        while True:
            inr = 2.0 ** (i / inr_eighths)
            if inr * inr > s:
                break
            for K in K_values:
                out.append(GaussianPoint(s, inr, K))
            i += 1
    out.sort(key=GaussianPoint.key)
    return out
