"""Brute-force design-space exploration of the reflection amplifier.

Sweeps line impedances, resonator impedance, and pump frequency on a grid;
at each point the amplification strength is ramped until the gain blows
past 40 dB, and the widest qualifying two-peak bandwidth is recorded
together with its drive strength and the pump efficiency eta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .circuits import IDEAL_ENV, three_stage_design
from .errors import InvalidParameter
from .material import KineticInductorModel
from .simulator import GainProfile, ReflectionEngine, bandwidth_report

TWO_PI = 2.0 * math.pi


def _grid(lo: float, hi: float, step: float) -> List[float]:
    if not (step > 0 and hi >= lo):
        raise InvalidParameter("range needs hi >= lo and step > 0")
    n = int(round((hi - lo) / step))
    vals = [lo + k * step for k in range(n + 1)]
    return [v for v in vals if v <= hi + 1e-9 * step]


@dataclass(frozen=True)
class SearchRanges:
    """Grid definition: (lo, hi, step) per swept axis, fixed rest."""

    z_quarter_range: Tuple[float, float, float]
    z_half_range: Tuple[float, float, float]
    z_nr_range: Tuple[float, float, float]
    omega_p_half_range: Tuple[float, float, float]   # rad/s, pump HALF frequency
    z_ki: float
    omega0: float                                    # rad/s, resonator design point
    circuit_kind: str = "three-stage"

    def __post_init__(self):
        if self.circuit_kind not in ("three-stage", "conventional"):
            raise InvalidParameter(f"unknown circuit kind {self.circuit_kind!r}")
        if self.circuit_kind == "three-stage" and not self.z_ki > 0:
            raise InvalidParameter("three-stage search needs z_ki > 0")
        if not self.omega0 > 0:
            raise InvalidParameter("omega0 must be > 0")
        for rng in (self.z_quarter_range, self.z_half_range, self.z_nr_range,
                    self.omega_p_half_range):
            _grid(*rng)

    def axes(self):
        return (
            _grid(*self.z_quarter_range),
            _grid(*self.z_half_range),
            _grid(*self.z_nr_range),
            _grid(*self.omega_p_half_range),
        )


def default_ranges(circuit_kind: str = "three-stage") -> SearchRanges:
    """Desk-scale sweep: 10-ohm / 0.25-GHz steps, resonator fixed at 8 GHz."""
    f0 = TWO_PI * 8.0e9
    if circuit_kind == "three-stage":
        z_nr = (50.0, 100.0, 10.0)
        z_ki = 150.0
    else:
        # the conventional circuit only suits low resonator impedances; the
        # model keeps qualifying at ever larger z_nr if the pump strength is
        # allowed to grow without bound, so the sweep imposes the envelope
        z_nr = (2.0, 10.0, 2.0)
        z_ki = 0.0
    return SearchRanges(
        z_quarter_range=(30.0, 100.0, 10.0),
        z_half_range=(30.0, 100.0, 10.0),
        z_nr_range=z_nr,
        omega_p_half_range=(TWO_PI * 7.5e9, TWO_PI * 8.5e9, TWO_PI * 0.25e9),
        z_ki=z_ki,
        omega0=f0,
        circuit_kind=circuit_kind,
    )


@dataclass(frozen=True)
class DesignRecord:
    z_quarter: float
    z_half: float
    z_nr: float
    omega_p_half: float     # rad/s
    max_bandwidth: float    # rad/s
    optimal_xi3: float      # rad/s
    eta: float              # max_bandwidth / optimal_xi3
    omega0: float           # rad/s, resonator design point of the search

    @property
    def capacitance(self) -> float:
        return 1.0 / (self.omega0 * self.z_nr)


def _design_for(ranges: SearchRanges, z14: float, z12: float, z_nr: float):
    l0 = z_nr / ranges.omega0
    c = 1.0 / (z_nr * ranges.omega0)
    model = KineticInductorModel("parabolic", l_k0=l0, l_geo=0.0)
    z_ki = ranges.z_ki if ranges.circuit_kind == "three-stage" else None
    return three_stage_design(50.0, z14, z12, z_ki, c, model, ranges.omega0)


def search_designs(ranges: SearchRanges,
                   xi3_start: float = TWO_PI * 1e6,
                   xi3_step_ratio: float = 1.02,
                   gain_stop_db: float = 40.0,
                   threshold_db: float = 17.0,
                   ripple_max_db: float = 5.0,
                   freq_half_span: float = TWO_PI * 1.2e9,
                   freq_step: float = TWO_PI * 4e6,
                   alpha_max: float = 0.9,
                   threads: int = 1) -> Iterator[DesignRecord]:
    """Yield one record per qualifying grid point, in lexicographic order.

    At each grid point |xi3| grows multiplicatively from ``xi3_start`` until
    the maximum gain passes ``gain_stop_db`` (or an oscillation pole is
    crossed); profiles with >= 17 dB gain, two peaks, and ripple under 5 dB
    along the way compete for the recorded maximum bandwidth.  Grid cells
    are independent; with ``threads > 1`` they are evaluated concurrently
    and merged back in grid order, so output is identical either way.
    """
    z14s, z12s, znrs, fp2s = ranges.axes()
    cells = []
    design_cache = {}
    for z14 in z14s:
        for z12 in z12s:
            for z_nr in znrs:
                key = (z14, z12, z_nr)
                if key not in design_cache:
                    design_cache[key] = _design_for(ranges, z14, z12, z_nr)
                for wp2 in fp2s:
                    cells.append((design_cache[key], z14, z12, z_nr, wp2))

    def run(cell):
        design, z14, z12, z_nr, wp2 = cell
        return _search_cell(design, ranges, z14, z12, z_nr, wp2,
                            xi3_start, xi3_step_ratio, gain_stop_db,
                            threshold_db, ripple_max_db,
                            freq_half_span, freq_step, alpha_max)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for rec in pool.map(run, cells):
                if rec is not None:
                    yield rec
    else:
        for cell in cells:
            rec = run(cell)
            if rec is not None:
                yield rec


def _search_cell(design, ranges, z14, z12, z_nr, wp2, xi3_start, ratio,
                 stop_db, threshold_db, ripple_max_db, half_span, step,
                 alpha_max) -> Optional[DesignRecord]:
    wp = 2.0 * wp2
    ws = np.arange(wp2 - half_span, wp2 + half_span, step)
    ws = ws[(ws > 0) & (wp - ws > 0)]
    if ws.size < 16:
        return None
    engine = ReflectionEngine(design, IDEAL_ENV, ws, wp, 0.0)
    best_bw, best_xi = 0.0, 0.0
    xi3 = xi3_start
    while True:
        alpha = engine.alpha_for_xi3(xi3)
        if alpha >= alpha_max:
            break
        gdb = engine.gain_db(alpha)
        if not np.isfinite(gdb).all():
            break
        if gdb.max() > stop_db:
            break
        if gdb.max() >= threshold_db:
            prof = GainProfile(ws, None, gdb, wp)
            rep = bandwidth_report(prof, threshold_db, ripple_max_db,
                                   require_two_peaks=True)
            if rep.qualified and rep.bandwidth > best_bw:
                best_bw, best_xi = rep.bandwidth, xi3
        xi3 *= ratio
    if best_bw <= 0.0:
        return None
    return DesignRecord(z14, z12, z_nr, wp2, best_bw, best_xi,
                        best_bw / best_xi, ranges.omega0)


@dataclass(frozen=True)
class ZnrAggregate:
    z_nr: float
    mean_bandwidth: float
    std_bandwidth: float
    max_eta: float
    min_eta: float
    max_bandwidth: float
    capacitance: float
    count: int


def aggregate_by_znr(records: Sequence[DesignRecord]) -> List[ZnrAggregate]:
    """Per-z_nr statistics over qualifying records, ordered by z_nr."""
    records = list(records)
    if not records:
        return []
    by_znr = {}
    for rec in records:
        by_znr.setdefault(rec.z_nr, []).append(rec)
    out = []
    for z_nr in sorted(by_znr):
        group = by_znr[z_nr]
        bws = np.array([r.max_bandwidth for r in group])
        etas = np.array([r.eta for r in group])
        out.append(ZnrAggregate(
            z_nr=z_nr,
            mean_bandwidth=float(bws.mean()),
            std_bandwidth=float(bws.std()),
            max_eta=float(etas.max()),
            min_eta=float(etas.min()),
            max_bandwidth=float(bws.max()),
            capacitance=1.0 / (group[0].omega0 * z_nr),
            count=len(group),
        ))
    return out


def required_capacitance(aggregates: Sequence[ZnrAggregate],
                         fractional_bandwidth: float, omega0: float) -> float:
    """Smallest shunt capacitance whose z_nr bin reaches the target bandwidth.

    A bin qualifies when its best recorded bandwidth is at least
    ``fractional_bandwidth``·omega0; returns inf when no bin qualifies.
    """
    target = fractional_bandwidth * omega0
    winners = [agg.capacitance for agg in aggregates if agg.max_bandwidth >= target]
    return min(winners) if winners else math.inf
