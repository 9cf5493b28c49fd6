"""
The acceptance suite: eleven numbered criteria, each run at its stated
sample size and tolerance (``scale=1``).

``scale`` shrinks every sample size proportionally.  Tolerances never
change, so reduced runs are only meaningful as smoke or determinism tests.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..lattice import LatticeParams
from ..paths import RngStream, TimeGrid, sample_brownian, skorohod_map
from ..stats import ks_one_sample, ks_two_sample
from . import lemmas
from .ensemble import TAG_PERMUTATION, TAG_SKOROHOD, run_ensemble, stream_id
from .runner import _clean, trend_ok
from .samples import (
    CONTINUUM_FIELDS,
    LATTICE_SIGMA,
    SZU_FIELDS,
    XN_FIELDS,
    continuum_sample,
    coupling_sample,
    half_normal_cdf,
    lattice_sample,
)

CONTINUUM_STEPS = 2**14
PERMUTATIONS = 999


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"AC{self.number:<2d} {'PASS' if self.passed else 'FAIL'}  {self.name}: {self.summary}"

    def to_json(self) -> str:
        d = {"criterion": self.number, "name": self.name, "passed": bool(self.passed), "details": self.details}
        return json.dumps(_clean(d), sort_keys=True, allow_nan=False)


@dataclass
class _Ctx:
    seed: int
    threads: int | None
    scale: float

    def count(self, full: int) -> int:
        return max(2, int(round(full * self.scale)))

    def sub_seed(self, k: int) -> int:
        return int(np.random.SeedSequence([self.seed, k]).generate_state(1, np.uint64)[0])

    def perm(self, k: int, j: int):
        return RngStream(self.sub_seed(k), stream_id(TAG_PERMUTATION, 0, j))


def _two(a, b, ctx, k, j):
    return ks_two_sample(a, b, n_resamples=PERMUTATIONS, rng=ctx.perm(k, j))


def ac1_levy(ctx: _Ctx) -> CriterionResult:
    N = ctx.count(100_000)
    seed = ctx.sub_seed(1)
    grid = TimeGrid(1.0, CONTINUUM_STEPS)

    def task(i):
        x, _ = skorohod_map(sample_brownian(grid, RngStream(seed, stream_id(TAG_SKOROHOD, 0, i))))
        return np.array([x.end])

    x = run_ensemble(task, N, threads=ctx.threads, chunk_size=2000)[:, 0]
    ks = ks_one_sample(x, half_normal_cdf(1.0))
    ok = ks.statistic < 0.01
    return CriterionResult(1, "reflection of Brownian motion is |B|", ok,
                           f"KS={ks.statistic:.4f} (< 0.01), N={N}",
                           {"N": N, "steps": CONTINUUM_STEPS, "ks": ks.statistic, "p_value": ks.pvalue})


def ac2_reflected_walk(ctx: _Ctx) -> CriterionResult:
    N = ctx.count(50_000)
    seed = ctx.sub_seed(2)
    exps = (3, 5, 6)
    ks = {}
    for n in exps:
        vals, _ = lattice_sample("xn", LatticeParams(n, 0.0, 0.0), seed, [1.0], N, threads=ctx.threads)
        ks[n] = ks_one_sample(vals[:, 0, XN_FIELDS["X"]], half_normal_cdf(LATTICE_SIGMA)).statistic
    trend = trend_ok([ks[n] for n in exps], N, N)
    ok = ks[6] < 0.03 and trend
    summary = ", ".join(f"n={n}: {ks[n]:.4f}" for n in exps) + f" (n=6 < 0.03, trend {'ok' if trend else 'broken'})"
    return CriterionResult(2, "reflected walk tends to half-normal", ok, summary,
                           {"N": N, "ks": {str(n): ks[n] for n in exps}, "trend_ok": trend})


AC3_FUNCTIONALS = (("X(1)", "X", 1.0), ("V(1)", "V", 1.0), ("M(1)", "M", 1.0), ("X(1/2)", "X", 0.5))


def ac3_main_theorem(ctx: _Ctx) -> CriterionResult:
    N = ctx.count(20_000)
    seed = ctx.sub_seed(3)
    exps = (3, 5, 7)
    obs = [0.5, 1.0]
    oracle = continuum_sample(1.0, 0.0, 1.0, CONTINUUM_STEPS, seed, obs, N, threads=ctx.threads)
    table = {label: {} for label, _, _ in AC3_FUNCTIONALS}
    for n in exps:
        vals, _ = lattice_sample("szu", LatticeParams(n, 1.0, 0.0), seed, obs, N, threads=ctx.threads)
        for j, (label, sym, t) in enumerate(AC3_FUNCTIONALS):
            col = obs.index(t)
            r = _two(vals[:, col, SZU_FIELDS[sym]], oracle[:, col, CONTINUUM_FIELDS[sym]], ctx, 3, 16 * n + j)
            table[label][n] = (r.statistic, r.pvalue)
    ok = True
    parts = []
    details = {"N": N, "steps": CONTINUUM_STEPS, "functionals": {}}
    for label, row in table.items():
        trend = trend_ok([row[n][0] for n in exps], N, N)
        d7, p7 = row[7]
        good = trend and d7 < 0.05 and p7 > 0.01
        ok &= good
        parts.append(f"{label} KS@7={d7:.4f} p={p7:.3f}{'' if trend else ' trend broken'}")
        details["functionals"][label] = {
            "ks": {str(n): row[n][0] for n in exps},
            "p_value": {str(n): row[n][1] for n in exps},
            "trend_ok": trend,
        }
    return CriterionResult(3, "lattice BMID converges (K=1, v=0)", ok, "; ".join(parts), details)


def ac4_constructions(ctx: _Ctx) -> CriterionResult:
    N = ctx.count(20_000)
    seed = ctx.sub_seed(4)
    params = LatticeParams(5, 1.0, 1.0)
    xn, _ = lattice_sample("xn", params, seed, [1.0], N, threads=ctx.threads)
    szu, _ = lattice_sample("szu", params, seed, [1.0], N, threads=ctx.threads)
    r = _two(xn[:, 0, XN_FIELDS["X"]], szu[:, 0, SZU_FIELDS["X"]], ctx, 4, 0)
    ok = r.pvalue > 0.01
    return CriterionResult(4, "direct walk and (S, Z) construction agree", ok,
                           f"KS={r.statistic:.4f} p={r.pvalue:.3f} (> 0.01), N={N}",
                           {"N": N, "ks": r.statistic, "p_value": r.pvalue})


def ac5_moment_bound(ctx: _Ctx) -> CriterionResult:
    N = ctx.count(20_000)
    seed = ctx.sub_seed(5)
    res = {n: lemmas.moment_check(n, 1.0, 0.0, 1.0, N, seed, threads=ctx.threads) for n in (4, 6)}
    bound = lemmas.moment_bound(1.0, 0.0)
    ok = all(r["mean_plus_3se"] < bound for r in res.values())
    summary = ", ".join(f"n={n}: {r['mean_plus_3se']:.4f}" for n, r in res.items()) + f" (< {bound:.5f})"
    return CriterionResult(5, "mean running minimum bound", ok, summary,
                           {"N": N, "bound": bound, "by_n": {str(n): r for n, r in res.items()}})


def ac6_coupling(ctx: _Ctx) -> CriterionResult:
    N = ctx.count(1_000)
    rows = coupling_sample(LatticeParams(5, 1.0, 1.0), ctx.sub_seed(6), N, threads=ctx.threads)
    viol = {"z_increment": int(rows[:, 0].sum()), "l_sandwich": int(rows[:, 1].sum()),
            "reflected_order": int(rows[:, 2].sum())}
    events = int(rows[:, 6].sum())
    ok = sum(viol.values()) == 0
    return CriterionResult(6, "coupling inequalities hold pathwise", ok,
                           f"violations {viol} over {N} paths / {events} events",
                           {"N": N, "events": events, **viol})


def ac7_local_time(ctx: _Ctx) -> CriterionResult:
    N = ctx.count(20_000)
    seed = ctx.sub_seed(7)
    rows = coupling_sample(LatticeParams(7, 1.0, 1.0), seed, N, threads=ctx.threads)
    oracle = continuum_sample(0.0, 1.0, 1.0, CONTINUUM_STEPS, seed, [1.0], N, threads=ctx.threads)
    r = _two(rows[:, 4], oracle[:, 0, CONTINUUM_FIELDS["M"]], ctx, 7, 0)
    ok = r.statistic < 0.05
    return CriterionResult(7, "primed local time tends to running max of drifted BM", ok,
                           f"KS={r.statistic:.4f} (< 0.05) p={r.pvalue:.3f}, N={N}",
                           {"N": N, "ks": r.statistic, "p_value": r.pvalue,
                            "lp_mean": float(rows[:, 4].mean()),
                            "oracle_mean": float(oracle[:, 0, CONTINUUM_FIELDS["M"]].mean())})


def ac8_geometric(ctx: _Ctx) -> CriterionResult:
    N = ctx.count(100_000)
    res = [lemmas.geometric_sum_check(p, lam, N, ctx.sub_seed(8)) for p, lam in lemmas.GEOMETRIC_CASES]
    ok = all(r["ks"] < 0.006 for r in res)
    summary = ", ".join(f"(p={r['p']:g}, lam={r['lam']:g}) KS={r['ks']:.4f}" for r in res) + " (< 0.006)"
    return CriterionResult(8, "geometric sum of exponentials is exponential", ok, summary,
                           {"N": N, "cases": res})


def ac9_flln(ctx: _Ctx) -> CriterionResult:
    runs = ctx.count(1_000)
    dev = lemmas.flln_deviations(10, 1.0, 1.0, runs, ctx.sub_seed(9))
    frac = float(np.mean(dev < 0.1))
    ok = frac >= 0.99
    return CriterionResult(9, "scaled Poisson counts follow the line", ok,
                           f"{frac:.3f} of {runs} runs within 0.1 (>= 0.99)",
                           {"runs": runs, "fraction": frac, "max_deviation": float(dev.max())})


def ac10_clock(ctx: _Ctx) -> CriterionResult:
    N = ctx.count(10_000)
    err = lemmas.clock_inversion_errors(N, ctx.sub_seed(10))
    worst = float(err.max())
    ok = worst <= 1e-9
    return CriterionResult(10, "clock inversion matches quadrature", ok,
                           f"max |error| = {worst:.2e} over {N} cases (<= 1e-9)",
                           {"cases": N, "max_abs_error": worst})


DETERMINISM_SCALE = 0.01


def ac11_determinism(ctx: _Ctx) -> CriterionResult:
    # The reduced suite is run twice at different thread counts; the
    # serialized records must match byte for byte.
    sub = _Ctx(ctx.seed, None, DETERMINISM_SCALE)
    blobs = []
    for threads in (1, 2):
        sub.threads = threads
        blobs.append("\n".join(fn(sub).to_json() for fn in CRITERIA[:-1]).encode())
    same = blobs[0] == blobs[1]
    return CriterionResult(11, "records are byte-identical across thread counts", same,
                           f"{len(blobs[0])} bytes, threads 1 vs 2: {'identical' if same else 'DIFFERENT'}",
                           {"scale": DETERMINISM_SCALE, "identical": same})


CRITERIA: tuple[Callable[[_Ctx], CriterionResult], ...] = (
    ac1_levy, ac2_reflected_walk, ac3_main_theorem, ac4_constructions, ac5_moment_bound,
    ac6_coupling, ac7_local_time, ac8_geometric, ac9_flln, ac10_clock, ac11_determinism,
)


def run_criterion(number: int, seed: int = 42, threads: int | None = None, scale: float = 1.0) -> CriterionResult:
    return CRITERIA[number - 1](_Ctx(seed, threads, scale))


def run_acceptance(seed: int = 42, threads: int | None = None, scale: float = 1.0, only=None,
                   out: str | Path | None = None, report: Callable[[str], None] | None = print,
                   ) -> list[CriterionResult]:
    """Run the selected criteria (all by default) in order.

    With ``out`` set, ``acceptance.jsonl`` (deterministic) and
    ``acceptance_timings.jsonl`` are written there.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    numbers = list(range(1, len(CRITERIA) + 1)) if only is None else sorted(set(only))
    results, timings = [], []
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "acceptance.jsonl").write_text("")
    for k in numbers:
        t0 = time.perf_counter()
        res = run_criterion(k, seed, threads, scale)
        timings.append({"criterion": k, "seconds": round(time.perf_counter() - t0, 3)})
        results.append(res)
        if report is not None:
            report(res.line())
        if out is not None:
            with open(out / "acceptance.jsonl", "a", encoding="utf-8", newline="\n") as fh:
                fh.write(res.to_json() + "\n")
    if out is not None:
        with open(out / "acceptance_timings.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for t in timings:
                fh.write(json.dumps(t, sort_keys=True) + "\n")
    return results
