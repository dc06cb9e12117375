"""
Run statistics: phase timings, peak memory, interval-set and use-count histograms
"""

import logging
import time
from contextlib import contextmanager
from typing import Dict, Iterable, Iterator, List

import numpy as np
import psutil

from app.core.interproc import InterprocSolver
from app.ir.model import Module
from app.models import IntervalHistogram, PhaseTimings, StatsReport, UseCountHistogram

logger = logging.getLogger(__name__)

PHASES = ("parse", "preprocess", "analysis", "verification", "output")


class StatsCollector:
    """
    Collects wall time per phase and samples resident memory at phase boundaries

    Usage:
        stats = StatsCollector()
        with stats.phase("parse"):
            m = parse_file(path)
    """

    def __init__(self):
        self._process = psutil.Process()
        self._started = time.perf_counter()
        self.timings: Dict[str, float] = {name: 0.0 for name in PHASES}
        self.peak_rss = 0
        self.sample()

    def sample(self) -> int:
        info = self._process.memory_info()
        # peak_wset exists on Windows only
        rss = max(info.rss, getattr(info, "peak_wset", 0))
        self.peak_rss = max(self.peak_rss, rss)
        return rss

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        if name not in self.timings:
            raise ValueError(f"unknown phase '{name}'")
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] += time.perf_counter() - start
            self.sample()

    @property
    def total_seconds(self) -> float:
        return time.perf_counter() - self._started

    @property
    def peak_rss_mb(self) -> float:
        return self.peak_rss / (1024 * 1024)

    def report(self, target: str, client: str, m: Module, solver: InterprocSolver) -> StatsReport:
        return StatsReport(
            target=target,
            client=client,
            v_edge=sum(s.imap.v_edge for s in solver.states.values()),
            v_vertex=sum(s.imap.v_vertex for s in solver.states.values()),
            phases=PhaseTimings(**self.timings),
            analysis_seconds=self.timings["analysis"],
            total_seconds=self.total_seconds,
            peak_rss_mb=self.peak_rss_mb,
            interval_sets=interval_histogram(solver),
            use_counts=use_count_histogram(m),
            interval_rounds=sum(s.imap.rounds for s in solver.states.values()),
            worklist_pops=solver.worklist_pops,
            propagations=solver.propagations,
            psi_rounds=solver.psi_rounds,
        )


def interval_set_sizes(solver: InterprocSolver) -> List[int]:
    """|Π_v| for every vertex with a non-empty interval set, over all functions"""
    sizes: List[int] = []
    for state in solver.states.values():
        sizes.extend(len(pi) for pi in state.imap.pi.values() if pi)
    return sizes


def histogram(sizes: Iterable[int]) -> IntervalHistogram:
    data = np.asarray(list(sizes), dtype=float)
    if data.size == 0:
        return IntervalHistogram()
    q = np.percentile(data, [0, 25, 50, 75, 100])
    return IntervalHistogram(
        count=int(data.size),
        min=float(q[0]),
        q1=float(q[1]),
        median=float(q[2]),
        q3=float(q[3]),
        max=float(q[4]),
    )


def interval_histogram(solver: InterprocSolver) -> IntervalHistogram:
    return histogram(interval_set_sizes(solver))


def use_count_histogram(m: Module) -> UseCountHistogram:
    """Fraction of SSA values with 0, 1, 2 and 3+ uses"""
    counts = np.asarray(
        [len(v.uses) for f in m.functions for v in f.values()],
        dtype=int,
    )
    if counts.size == 0:
        return UseCountHistogram()
    n = float(counts.size)
    return UseCountHistogram(
        values=int(counts.size),
        zero=float(np.count_nonzero(counts == 0)) / n,
        one=float(np.count_nonzero(counts == 1)) / n,
        two=float(np.count_nonzero(counts == 2)) / n,
        three_or_more=float(np.count_nonzero(counts >= 3)) / n,
    )
