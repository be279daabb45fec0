"""Acceptance checks shared by the test-suite and ``czic verify-all``."""

from __future__ import annotations

import contextlib
import io
import os
import statistics
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from . import capacity as cap
from . import gaussian as g
from .capacity import Regime
from .ld_channel import LdConfig
from .ld_schemes import WrongRegimeError, mutated_scheme, run_scheme, scheme_for


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.detail}; {self.seconds:.2f}s)"


def default_workers() -> int:
    return os.cpu_count() or 1


def parallel_map(fn, items, workers: int = 1, chunksize: int = 64):
    """Order-preserving map, in-process when ``workers <= 1``."""
    items = list(items)
    if workers <= 1 or len(items) < 2 * chunksize:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def _timed(number, title, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(number, title, passed, detail, time.perf_counter() - t0)


# --------------------------------------------------------------------------
# LD reproductions


def _exact_run(scheme, K, n, m, bits, blocks, rate=None, normalized=None, seed=0):
    r = run_scheme(scheme, LdConfig(K, n, m), seed, strict=False)
    ok = r.decode_success and r.bits_per_user == bits and r.blocks == blocks
    if rate is not None:
        ok = ok and r.rate_per_user == rate
    if normalized is not None:
        ok = ok and r.normalized_rate == normalized
    return ok, r


def criterion_1(quick=False, workers=1):
    def body():
        ok, r = _exact_run("very-weak", 4, 3, 1, 9, 4, normalized=Fraction(3, 4))
        cfg = LdConfig(4, 3, 1)
        run_scheme("very-weak", cfg, 1, strict=False)
        samples = []
        for seed in range(25):
            t0 = time.perf_counter()
            run_scheme("very-weak", cfg, seed, strict=False)
            samples.append(time.perf_counter() - t0)
        ms = statistics.median(samples) * 1e3
        return ok and ms < 1.0, f"{r.bits_per_user} bits/user in {r.blocks} uses, normalized {r.normalized_rate}, median {ms:.3f} ms"
    return _timed(1, "very-weak (K=4,n=3,m=1) -> 9 bits, 3/4", body)


def criterion_2(quick=False, workers=1):
    def body():
        ok, r = _exact_run("weak", 3, 7, 4, 14, 3, rate=Fraction(14, 3))
        return ok, f"{r.bits_per_user} bits/user in {r.blocks} uses"
    return _timed(2, "weak (K=3,n=7,m=4) -> 14 bits", body)


def criterion_3(quick=False, workers=1):
    def body():
        ok, r = _exact_run("very-strong", 4, 1, 3, 5, 4, rate=Fraction(5, 4))
        return ok, f"{r.bits_per_user} bits/user in {r.blocks} uses, rate {r.rate_per_user}"
    return _timed(3, "very-strong (K=4,n=1,m=3) -> 5/4", body)


def criterion_4(quick=False, workers=1):
    def body():
        ok1, r1 = _exact_run("global", 3, 3, 1, 5, 2, rate=Fraction(5, 2))
        ok2, r2 = _exact_run("global", 3, 1, 3, 3, 2, rate=Fraction(3, 2))
        return ok1 and ok2, f"rates {r1.rate_per_user} and {r2.rate_per_user} over {r1.blocks} blocks"
    return _timed(4, "global feedback -> 5/2 and 3/2", body)


def ld_scheme_grid():
    """Every in-regime (K, n, m) for the local-feedback schemes."""
    out = []
    for K in range(2, 9):
        for n in range(13):
            for m in range(13):
                if n + m == 0:
                    continue
                cfg = LdConfig(K, n, m)
                try:
                    out.append((cfg, scheme_for(cfg)))
                except WrongRegimeError:
                    pass
    return out


def _check_config(job):
    cfg, scheme, seeds, mutate = job
    target = cap.c_sym_ld_fb(Fraction(cfg.m, cfg.n), cfg.K) if cfg.n else cap.ld_fb_rate(cfg)
    bad = 0
    if mutate:
        with mutated_scheme(mutate):
            results = [run_scheme(scheme, cfg, s, strict=False) for s in range(seeds)]
    else:
        results = [run_scheme(scheme, cfg, s, strict=False) for s in range(seeds)]
    for r in results:
        got = r.normalized_rate if cfg.n else r.rate_per_user
        if not r.decode_success or got != target:
            bad += 1
    return bad


def criterion_5(quick=False, workers=1, mutate=None):
    seeds = 10 if quick else 100

    def body():
        jobs = [(cfg, s, seeds, mutate) for cfg, s in ld_scheme_grid()]
        t0 = time.perf_counter()
        bad = parallel_map(_check_config, jobs, workers, chunksize=16)
        elapsed = time.perf_counter() - t0
        nbad = sum(bad)
        runs = len(jobs) * seeds
        return nbad == 0 and elapsed < 60, f"{runs} runs over {len(jobs)} configs, {nbad} failures"
    return _timed(5, "scheme rates equal the capacity formula, perfect decoding", body)


def criterion_6(quick=False, workers=1):
    def body():
        problems = []
        alphas = [Fraction(k, 48) for k in range(0, 4 * 48 + 1)]
        for K in range(2, 17):
            for k, a in enumerate(alphas):
                c = cap.c_sym_ld_fb(a, K)
                t1 = cap.type1_upper(a)
                if not (cap.gdof_nofb(a) <= c <= t1):
                    problems.append(("sandwich", a, K))
                if Fraction(2, 3) <= a <= 2 and c != t1:
                    problems.append(("type-I equality", a, K))
                t2 = cap.type2_upper(LdConfig(K, 48, k))
                if t2 is not None and t2 < c:
                    problems.append(("type-II", a, K))
            for b in cap.BOUNDARIES:
                i = cap.BOUNDARIES.index(b)
                lo, hi = cap.REGIME_ORDER[i], cap.REGIME_ORDER[i + 1]
                if cap.fb_branch(lo, b, K) != cap.fb_branch(hi, b, K):
                    problems.append(("continuity", b, K))
        return not problems, f"{len(alphas) * 15} (alpha, K) pairs, {len(problems)} violations" + (
            f", first {problems[0]}" if problems else "")
    return _timed(6, "LD bound sandwich and branch continuity", body)


# --------------------------------------------------------------------------
# Gaussian


def _snr_exponents(quick):
    return range(6, 41, 6) if quick else range(2, 41, 2)


def _gap_job(pr):
    p, r = pr
    rep = g.gap_report(p, r)
    return (r, rep.guarded, rep.case, rep.gap, rep.passed)


def criterion_7(quick=False, workers=1):
    def body():
        t0 = time.perf_counter()
        grid = g.main_grid(_snr_exponents(quick))
        reps = parallel_map(_gap_job, grid, workers, chunksize=512)
        elapsed = time.perf_counter() - t0
        worst = {}
        fails = 0
        n = 0
        for r, guarded, case, gap, passed in reps:
            if not guarded:
                continue
            n += 1
            worst[r] = max(worst.get(r, float("-inf")), gap)
            fails += not passed
        summary = ", ".join(f"{r.value} {worst[r]:.3f}<={float(g.GAP_CONSTANTS[r]):g}" for r in Regime if r in worst)
        return fails == 0 and elapsed < 30, f"{n} guarded points, {fails} failures; max gap {summary}"
    return _timed(7, "Gaussian constant-gap certification", body)


def criterion_8(quick=False, workers=1):
    def body():
        pts = [(p, r) for p, r in g.main_grid(_snr_exponents(quick)) if r is Regime.VERY_WEAK]
        pts += [(p, Regime.VERY_WEAK) for p in g.excluded_grid(range(3, 11, 3) if quick else range(3, 11))]
        counts = {"II": 0, "III": 0, "IV": 0}
        fails = 0
        for p, _ in pts:
            label, bound, ok = g.excluded_range_case(p)
            if label in counts:
                counts[label] += 1
                fails += not ok
        return fails == 0 and all(counts.values()), f"cases {counts}, {fails} failures"
    return _timed(8, "very-weak excluded-range cases II-IV", body)


GDOF_ALPHAS = [Fraction(1, 4), Fraction(1, 3), Fraction(7, 12), Fraction(3, 4),
               Fraction(1), Fraction(3, 2), Fraction(5, 2), Fraction(3)]


def criterion_9(quick=False, workers=1):
    def body():
        misses = []
        for a in GDOF_ALPHAS:
            for K in (3, 4, 10):
                err = abs(g.gdof_numeric(a, K, 40) - g.gdof_target(a, K))
                if err > 0.05:
                    misses.append(f"{a}/K={K}:{err:.3f}")
        return not misses, f"{24 - len(misses)}/24 within 0.05" + (f"; misses {' '.join(misses)}" if misses else "")
    return _timed(9, "GDoF of achievable rate at snr=2^40", body)


def criterion_10(quick=False, workers=1):
    def body():
        fails = {}
        n = 0
        for p, r in g.main_grid(_snr_exponents(quick)):
            alloc = g.allocate(p, r)
            if not alloc.guard:
                continue
            for c in g.check_constraints(alloc, p):
                n += 1
                if not c.satisfied:
                    fails.setdefault(c.id, set()).add((round(p.snr), round(p.inr)))
        detail = f"{n} inequality checks"
        if fails:
            detail += "; violated " + ", ".join(
                f"{cid} at {len(pts)} (snr,inr) e.g. {sorted(pts)[0]}" for cid, pts in sorted(fails.items()))
        return not fails, detail
    return _timed(10, "decodability constraints on the guarded grid", body)


def criterion_11(quick=False, workers=1):
    from . import cli

    def body():
        with tempfile.TemporaryDirectory() as tmp:
            outs = []
            for run in (0, 1):
                paths = []
                for mode, extra in (("gdof-curve", []), ("gauss-gap", ["--quick"] if quick else [])):
                    for fmt in ("csv", "json"):
                        path = os.path.join(tmp, f"{mode}-{fmt}-{run}")
                        with contextlib.redirect_stderr(io.StringIO()):
                            code = cli.main([mode, "--format", fmt, "--out", path, "--seed", "11",
                                             "--workers", str(workers)] + extra)
                        if code not in (0, 1):
                            return False, f"{mode} exited {code}"
                        paths.append(path)
                outs.append([open(p, "rb").read() for p in paths])
            same = outs[0] == outs[1]
            return same, f"{len(outs[0])} files byte-identical" if same else "outputs differ"
    return _timed(11, "deterministic CLI output", body)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


def run_all(quick=False, workers=1, mutate=None, only=None):
    results = []
    for fn in CRITERIA:
        num = int(fn.__name__.split("_")[1])
        if only and num not in only:
            continue
        if mutate:
            with mutated_scheme(mutate):
                res = fn(quick=quick, workers=workers, **({"mutate": mutate} if num == 5 else {}))
        else:
            res = fn(quick=quick, workers=workers)
        results.append(res)
    return results
