"""
Experiment orchestration: discrete ensembles against their limit oracles.

``run_experiment`` writes ``records.jsonl`` (one JSON object per
``(n, functional)``, sorted keys, no timing information) and
``timings.jsonl`` (wall-clock seconds per ensemble) into ``out_dir``.
Finished replica chunks live under ``out_dir/partials/<fingerprint>`` so
an interrupted run resumes where it stopped.
"""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..lattice import LatticeParams
from ..paths import RngStream
from ..stats import ks_one_sample, ks_two_sample, mean_with_ci, wasserstein1
from . import lemmas
from .config import ExperimentConfig
from .ensemble import TAG_PERMUTATION, ChunkStore, stream_id
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

log = logging.getLogger(__name__)


@dataclass
class ResultRecord:
    fingerprint: str
    kind: str
    n: int | None
    functional: str
    replicas: int
    seed: int
    stats: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(_clean(asdict(self)), sort_keys=True, allow_nan=False)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def trend_ok(stats, n_a: int, n_b: int) -> bool:
    """Loose decreasing trend: last below first, no rise beyond KS noise.

    The allowance is the 95% two-sample KS critical value
    ``1.36 * sqrt((n_a + n_b) / (n_a n_b))``.
    """
    s = [x for x in stats if x is not None]
    if len(s) < 2:
        return True
    slack = 1.36 * math.sqrt((n_a + n_b) / (n_a * n_b))
    return s[-1] < s[0] and all(b <= a + slack for a, b in zip(s, s[1:]))


def _summary(x):
    x = np.asarray(x, dtype=np.float64)
    if x.size >= 2:
        mean, hw = mean_with_ci(x)
    else:
        mean, hw = float(x[0]), None
    return {"mean": mean, "ci95_halfwidth": hw}


class Experiment:
    def __init__(self, config: ExperimentConfig, threads=None, resume: bool = True):
        self.cfg = config
        self.threads = threads
        self.out = Path(config.out_dir)
        self.fp = config.fingerprint()
        self.store = ChunkStore(self.out / "partials" / self.fp) if resume else None
        self.records: list[ResultRecord] = []
        self.timings: list[dict] = []

    def _opts(self):
        return dict(threads=self.threads, chunk_size=self.cfg.chunk_size, store=self.store)

    def _timed(self, label, fn, *args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        self.timings.append({"ensemble": label, "seconds": round(time.perf_counter() - t0, 3)})
        return res

    def _emit(self, n, functional, stats):
        rec = ResultRecord(self.fp, self.cfg.kind, n, functional, self.cfg.replicas, self.cfg.seed, stats)
        self.records.append(rec)
        with open(self.out / "records.jsonl", "a", encoding="utf-8", newline="\n") as fh:
            fh.write(rec.to_json() + "\n")

    def run(self) -> list[ResultRecord]:
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "records.jsonl").write_text("")
        handler = {
            "reflected-limit": self._reflected,
            "bmid-convergence": self._bmid,
            "coupling-check": self._coupling,
            "lemma-suite": self._lemmas,
        }[self.cfg.kind]
        handler()
        with open(self.out / "timings.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for t in self.timings:
                fh.write(json.dumps(t, sort_keys=True) + "\n")
        return self.records

    def _params(self, n):
        c = self.cfg
        return LatticeParams(n, c.K, c.v, c.t_max, c.event_cap)

    def _perm_rng(self, n, j):
        return RngStream(self.cfg.seed, stream_id(TAG_PERMUTATION, n, j))

    def _two_sample(self, a, b, n, j):
        if a.size < 2 or b.size < 2:
            return {"single_sample": True, "ks": None, "p_value": None, "w1": None}
        ks = ks_two_sample(a, b, n_resamples=self.cfg.permutations, rng=self._perm_rng(n, j))
        return {"single_sample": False, "ks": ks.statistic, "p_value": ks.pvalue, "w1": wasserstein1(a, b)}

    def _reflected(self):
        c = self.cfg
        funcs = c.functionals
        obs = [f.time(c.t_max) for f in funcs]
        for n in c.exponents:
            if not funcs:
                continue
            vals, events = self._timed(f"xn_n{n}", lattice_sample, "xn", self._params(n), c.seed, obs,
                                       c.replicas, **self._opts())
            for j, f in enumerate(funcs):
                x = vals[:, j, XN_FIELDS[f.symbol]]
                st = {"single_sample": c.replicas < 2, "oracle": "half-normal",
                      "events_mean": float(np.mean(events)), **_summary(x)}
                t = f.time(c.t_max)
                if c.replicas >= 2 and t > 0:
                    ks = ks_one_sample(x, half_normal_cdf(LATTICE_SIGMA * math.sqrt(t)))
                    st.update(ks=ks.statistic, p_value=ks.pvalue,
                              oracle_mean=LATTICE_SIGMA * math.sqrt(2 * t / math.pi))
                else:
                    st.update(ks=None, p_value=None)
                self._emit(n, f.label, st)

    def _bmid(self):
        c = self.cfg
        funcs = c.functionals
        if not funcs:
            return
        obs = [f.time(c.t_max) for f in funcs]
        oracle = self._timed("continuum", continuum_sample, c.K, c.v, c.t_max, c.continuum_steps,
                             c.seed, obs, c.replicas, **self._opts())
        for n in c.exponents:
            vals, events = self._timed(f"szu_n{n}", lattice_sample, "szu", self._params(n), c.seed, obs,
                                       c.replicas, **self._opts())
            for j, f in enumerate(funcs):
                a = vals[:, j, SZU_FIELDS[f.symbol]]
                b = oracle[:, j, CONTINUUM_FIELDS[f.symbol]]
                st = {"oracle": "continuum", "events_mean": float(np.mean(events)), **_summary(a),
                      "oracle_mean": float(np.mean(b))}
                st.update(self._two_sample(a, b, n, j))
                self._emit(n, f.label, st)

    def _coupling(self):
        c = self.cfg
        oracle = self._timed("continuum", continuum_sample, 0.0, c.v, c.t_max, c.continuum_steps,
                             c.seed, [c.t_max], c.replicas, **self._opts())[:, 0, 3]
        for n in c.exponents:
            rows = self._timed(f"coupling_n{n}", coupling_sample, self._params(n), c.seed, c.replicas,
                               **self._opts())
            self._emit(n, "violations", {
                "z_increment": int(rows[:, 0].sum()),
                "l_sandwich": int(rows[:, 1].sum()),
                "reflected_order": int(rows[:, 2].sum()),
                "events_mean": float(np.mean(rows[:, 6])),
            })
            lp = rows[:, 4]
            st = {"oracle": "running max of sigma*B - v t", **_summary(lp), "oracle_mean": float(np.mean(oracle))}
            st.update(self._two_sample(lp, oracle, n, 0))
            self._emit(n, "Lp(T)", st)

    def _lemmas(self):
        c = self.cfg
        for name, stats in lemmas.lemma_suite(c.seed, c.replicas, c.exponents, c.t_max, c.K, c.v, **self._opts()):
            self._emit(stats.pop("n", None), name, stats)


def run_experiment(config: ExperimentConfig, threads=None, resume: bool = True) -> list[ResultRecord]:
    """Run ``config`` and persist its records; see the module docstring."""
    return Experiment(config, threads=threads, resume=resume).run()


def convergence_trend(records: list[ResultRecord], replicas: int) -> dict[str, dict]:
    """Per functional: KS statistics ordered by ``n`` and whether they trend down."""
    by_f: dict[str, list] = {}
    for r in records:
        if r.n is not None and "ks" in r.stats:
            by_f.setdefault(r.functional, []).append((r.n, r.stats["ks"]))
    out = {}
    for f, pairs in by_f.items():
        pairs.sort()
        ks = [k for _, k in pairs]
        out[f] = {"n": [p for p, _ in pairs], "ks": ks, "trend_ok": trend_ok(ks, replicas, replicas)}
    return out
