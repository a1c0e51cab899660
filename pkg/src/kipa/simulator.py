"""Pumped reflection simulation of the full amplifier network.

Evaluates S11 spectra with the two-frequency linearization of the pumped
inductor embedded in the exact transmission-line ladder, extracts
bandwidth/peak/ripple figures, sweeps pump maps, and fits the
negative-resistance power law.

S11 against a complex (rippled) environment uses the traveling-wave
convention (z_in - z_env)/(z_in + z_env): a lossless pump-off network then
shows the measured amplitude ripple, while an ideal real environment keeps
|S11| = 1 exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import find_peaks

from .circuits import (
    DesignSpec,
    EnvironmentModel,
    IDEAL_ENV,
    environment_impedance,
    idler_admittance,
    port_line_abcd,
)
from .errors import InsufficientData, InvalidParameter
from .material import PumpOperatingPoint, pump_coefficients
from .pump import ModulatedInductor

PEAK_PROMINENCE_DB = 0.5


@dataclass(frozen=True)
class PumpDrive:
    """Amplification-strength drive given directly as |xi3|.

    Unlike :class:`PumpOperatingPoint`, this bypasses the critical-current
    budget: it is the natural control variable for simulation sweeps where
    the pump current needed may exceed what the film model allows.
    """

    xi3_mag: float            # rad/s
    omega_p: float            # rad/s
    i_dc: float = 0.0         # A, sets the biased inductance
    phi_p: float = 0.0

    def __post_init__(self):
        if self.xi3_mag < 0:
            raise InvalidParameter("xi3_mag must be >= 0")
        if not self.omega_p > 0:
            raise InvalidParameter("omega_p must be > 0")


Pump = Union[PumpOperatingPoint, PumpDrive]


@dataclass
class GainProfile:
    freqs: np.ndarray        # angular signal frequencies, strictly increasing
    s11: np.ndarray          # complex reflection per point
    gain_db: np.ndarray      # 20 log10 |s11|; +inf marks oscillation poles
    omega_p: float


@dataclass(frozen=True)
class BandwidthReport:
    bandwidth: float                      # rad/s
    peak_frequencies: Tuple[float, ...]   # rad/s, at or above threshold
    peak_count: int
    ripple_db: float
    threshold_db: float
    contiguous_span: Optional[Tuple[float, float]]
    qualified: bool
    rejection_reason: Optional[str] = None
    oscillation_points: int = 0


def _resolve_drive(design: DesignSpec, pump: Pump):
    """Reduce either pump description to (alpha, l0, omega_p, i_dc)."""
    if isinstance(pump, PumpOperatingPoint):
        omega0 = design.resonance_at_bias(pump.i_dc)
        coeffs = pump_coefficients(design.ki_model, pump, omega0)
        return coeffs.alpha, coeffs.l_i, pump.omega_p, pump.i_dc
    l0 = design.inductance_at_bias(pump.i_dc)
    omega0 = 1.0 / np.sqrt(l0 * design.c_shunt)
    alpha = (pump.xi3_mag / (2.0 * omega0)) ** 2
    return alpha, l0, pump.omega_p, pump.i_dc


class ReflectionEngine:
    """Pre-assembled network arrays for repeated pump-strength evaluation.

    The line cascade, idler chain, and environment depend only on the
    frequency grid, so sweeping pump strength reduces to scalar-vector
    arithmetic per step.
    """

    def __init__(self, design: DesignSpec, env: EnvironmentModel, freqs,
                 omega_p: float, i_dc: float = 0.0):
        ws = np.asarray(freqs, dtype=float)
        if ws.ndim != 1 or ws.size == 0:
            raise InvalidParameter("frequency grid must be a non-empty 1-D array")
        if np.any(np.diff(ws) <= 0):
            raise InvalidParameter("frequency grid must be strictly increasing")
        wi = omega_p - ws
        if np.any(wi <= 0):
            raise InvalidParameter("grid extends beyond the pump: omega_i must stay > 0")
        self.design = design
        self.ws = ws
        self.wi = wi
        self.omega_p = omega_p
        self.i_dc = i_dc
        self.l0 = design.inductance_at_bias(i_dc)
        self.c = design.c_shunt
        self.omega0 = 1.0 / np.sqrt(self.l0 * self.c)
        self.y_idler_conj = np.conj(idler_admittance(design, env, wi))
        self.abcd = port_line_abcd(design, ws)
        self.z_env = np.asarray(environment_impedance(env, ws), dtype=complex)
        if self.z_env.ndim == 0:
            self.z_env = np.full(ws.shape, complex(self.z_env))

    def alpha_for_xi3(self, xi3_mag: float) -> float:
        return (xi3_mag / (2.0 * self.omega0)) ** 2

    def s11(self, alpha: float) -> np.ndarray:
        if not 0 <= alpha < 1:
            raise InvalidParameter(f"alpha = {alpha:.4g} outside [0, 1)")
        lp = self.l0 * (1.0 - alpha)
        den = 1j * self.wi * lp * self.y_idler_conj - 1.0
        pole = den == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            y_eff = (1.0 / (1j * self.ws * lp)) * (1.0 + alpha / den)
            y_node = 1j * self.ws * self.c + y_eff
            a, b, c, d = self.abcd
            p = a + b * y_node
            q = c + d * y_node
            s11 = (p - self.z_env * q) / (p + self.z_env * q)
        if np.any(pole):
            s11 = np.where(pole, np.inf + 0j, s11)
        return s11

    def gain_db(self, alpha: float) -> np.ndarray:
        mag = np.abs(self.s11(alpha))
        with np.errstate(divide="ignore"):
            g = 20.0 * np.log10(mag)
        return np.where(np.isfinite(mag), g, np.inf)

    def y_eff(self, alpha: float) -> np.ndarray:
        lp = self.l0 * (1.0 - alpha)
        den = 1j * self.wi * lp * self.y_idler_conj - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            return (1.0 / (1j * self.ws * lp)) * (1.0 + alpha / den)


def gain_spectrum(design: DesignSpec, pump: Pump, env: Optional[EnvironmentModel],
                  freqs) -> GainProfile:
    """Reflection spectrum over the angular-frequency grid ``freqs``.

    ``env=None`` means the ideal flat environment.  Oscillation poles are
    reported as +inf gain at the affected grid points.
    """
    env = env if env is not None else IDEAL_ENV
    alpha, l0, omega_p, i_dc = _resolve_drive(design, pump)
    # guards shared with the ModulatedInductor invariant
    ModulatedInductor.from_alpha(l0, alpha)
    engine = ReflectionEngine(design, env, freqs, omega_p, i_dc)
    s11 = engine.s11(alpha)
    mag = np.abs(s11)
    with np.errstate(divide="ignore"):
        gdb = 20.0 * np.log10(mag)
    gdb = np.where(np.isfinite(mag), gdb, np.inf)
    return GainProfile(freqs=np.asarray(freqs, dtype=float), s11=s11,
                       gain_db=gdb, omega_p=omega_p)


def _spans_above(freqs, gain, threshold):
    """Contiguous spans with gain >= threshold, linearly interpolated edges."""
    finite = np.isfinite(gain)
    above = finite & (gain >= threshold)
    spans = []
    n = len(freqs)
    i = 0
    while i < n:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and above[j + 1]:
            j += 1
        lo = freqs[i]
        if i > 0 and finite[i - 1] and gain[i - 1] < threshold:
            lo = np.interp(threshold, [gain[i - 1], gain[i]], [freqs[i - 1], freqs[i]])
        hi = freqs[j]
        if j + 1 < n and finite[j + 1] and gain[j + 1] < threshold:
            hi = np.interp(threshold, [gain[j + 1], gain[j]], [freqs[j + 1], freqs[j]])
        spans.append((lo, hi, i, j))
        i = j + 1
    return spans


def bandwidth_report(profile: GainProfile, threshold_db: float = 17.0,
                     ripple_max_db: float = 5.0,
                     require_two_peaks: bool = False) -> BandwidthReport:
    """Bandwidth, peaks, and ripple of the largest contiguous >=threshold span.

    Peaks are local maxima of the profile with prominence >= 0.5 dB sitting
    at or above the threshold.  Oscillation-pole points never count toward
    a span.  Rejection (two-peak or ripple rule) is reported as a value.
    """
    f, g = profile.freqs, profile.gain_db
    if f.size == 0:
        raise InvalidParameter("empty gain profile")
    n_osc = int(np.sum(~np.isfinite(g)))
    finite_g = np.where(np.isfinite(g), g, -np.inf)
    idx, _ = find_peaks(finite_g, prominence=PEAK_PROMINENCE_DB)
    peak_idx = [k for k in idx if finite_g[k] >= threshold_db]
    peaks = tuple(float(f[k]) for k in peak_idx)

    spans = _spans_above(f, g, threshold_db)
    if not spans:
        return BandwidthReport(0.0, peaks, len(peaks), 0.0, threshold_db, None,
                               qualified=False, rejection_reason="below threshold",
                               oscillation_points=n_osc)
    lo, hi, i, j = max(spans, key=lambda s: s[1] - s[0])
    seg = g[i:j + 1]
    ripple = float(seg.max() - seg.min()) if j > i else 0.0
    reason = None
    if require_two_peaks and len(peaks) < 2:
        reason = "fewer than two peaks"
    elif ripple > ripple_max_db:
        reason = "ripple above limit"
    return BandwidthReport(
        bandwidth=float(hi - lo),
        peak_frequencies=peaks,
        peak_count=len(peaks),
        ripple_db=ripple,
        threshold_db=threshold_db,
        contiguous_span=(float(lo), float(hi)),
        qualified=reason is None,
        rejection_reason=reason,
        oscillation_points=n_osc,
    )


@dataclass(frozen=True)
class PumpRampPolicy:
    """How a sweep increases the pump at each map cell.

    mode "current" ramps |I_p| in 0.1-dB power steps and stops at the
    critical-current budget i_dc + |I_p| < i_c; mode "xi3" ramps |xi3|
    directly with no material cap (the regime the simulations explore).
    """

    mode: str = "current"
    step_db: float = 0.1
    start_current: float = 1e-6      # A
    start_xi3: float = 2 * np.pi * 1e6  # rad/s
    gain_stop_db: float = 40.0
    alpha_max: float = 0.9
    xi3_cap: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("current", "xi3"):
            raise InvalidParameter("policy mode must be 'current' or 'xi3'")
        if not self.step_db > 0:
            raise InvalidParameter("step_db must be > 0")


@dataclass(frozen=True)
class MapCell:
    omega_p: float
    i_dc: float
    bandwidth: float
    peak_count: int
    ripple_db: float
    optimal_drive: float   # |I_p| (A) or |xi3| (rad/s) depending on policy mode


def _ramp_cell(engine: ReflectionEngine, design: DesignSpec, policy: PumpRampPolicy,
               threshold_db: float, ripple_max_db: float):
    """Best qualifying (bandwidth, peaks, ripple, drive) along one pump ramp."""
    step = 10.0 ** (policy.step_db / 20.0)
    best = (0.0, 0, 0.0, 0.0)
    if policy.mode == "current":
        i_c = design.ki_model.i_c
        istar2 = design.ki_model.i_star2
        i_dc = engine.i_dc
        drive = policy.start_current
        if i_dc <= 0:
            return best  # no three-wave mixing without bias
        while True:
            if i_c is not None and i_dc + drive >= i_c:
                break
            ratio = i_dc * drive / (istar2**2 + i_dc**2)
            alpha = (9.0 / 16.0) * ratio**2
            if alpha >= policy.alpha_max:
                break
            stop, best = _ramp_step(engine, alpha, drive, best,
                                    threshold_db, ripple_max_db, policy.gain_stop_db)
            if stop:
                break
            drive *= step
    else:
        drive = policy.start_xi3
        while True:
            if policy.xi3_cap is not None and drive > policy.xi3_cap:
                break
            alpha = engine.alpha_for_xi3(drive)
            if alpha >= policy.alpha_max:
                break
            stop, best = _ramp_step(engine, alpha, drive, best,
                                    threshold_db, ripple_max_db, policy.gain_stop_db)
            if stop:
                break
            drive *= step
    return best


def _ramp_step(engine, alpha, drive, best, threshold_db, ripple_max_db, stop_db):
    gdb = engine.gain_db(alpha)
    finite = np.isfinite(gdb)
    if not finite.all():
        return True, best  # oscillation pole crossed
    peak = gdb.max()
    if peak > stop_db:
        return True, best
    if peak >= threshold_db:
        prof = GainProfile(engine.ws, None, gdb, engine.omega_p)
        rep = bandwidth_report(prof, threshold_db, ripple_max_db, require_two_peaks=True)
        if rep.qualified and rep.bandwidth > best[0]:
            best = (rep.bandwidth, rep.peak_count, rep.ripple_db, drive)
    return False, best


def pump_bias_map(design: DesignSpec, env: Optional[EnvironmentModel],
                  omega_p_grid: Sequence[float], i_dc_grid: Sequence[float],
                  policy: PumpRampPolicy = PumpRampPolicy(),
                  freq_half_span: float = 2 * np.pi * 1.2e9,
                  freq_step: float = 2 * np.pi * 1e6,
                  threshold_db: float = 17.0,
                  ripple_max_db: float = 5.0,
                  threads: int = 1) -> list:
    """Best qualifying bandwidth per (omega_p, i_dc) cell, in grid order.

    Cells without any qualifying profile report zero bandwidth.  Output
    order is lexicographic in (omega_p, i_dc) regardless of evaluation
    order; cells are pure and independent, so threaded evaluation returns
    bit-identical results.
    """
    env = env if env is not None else IDEAL_ENV
    omega_p_grid = list(omega_p_grid)
    i_dc_grid = list(i_dc_grid)
    if not omega_p_grid or not i_dc_grid:
        raise InvalidParameter("map grids must be non-empty")
    points = [(wp, idc) for wp in omega_p_grid for idc in i_dc_grid]

    def run(point):
        wp, idc = point
        ws = np.arange(wp / 2 - freq_half_span, wp / 2 + freq_half_span, freq_step)
        engine = ReflectionEngine(design, env, ws, wp, idc)
        bw, peaks, ripple, drive = _ramp_cell(engine, design, policy,
                                              threshold_db, ripple_max_db)
        return MapCell(wp, idc, bw, peaks, ripple, drive)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, points))
    return [run(p) for p in points]


def rnr_power_law(design: DesignSpec, xi3_grid: Sequence[float], omega_p: float,
                  i_dc: float = 0.0, env: Optional[EnvironmentModel] = None,
                  signal_offset: float = 0.0) -> dict:
    """Power-law fit of the node negative resistance against |xi3|.

    Evaluates R_NR = -1/Re[Y_eff] at ω_s = ω_p/2 + signal_offset for each
    grid value; points without gain are excluded.  Returns the log-log
    slope (exponent), the prefactor, and the retained points.
    """
    env = env if env is not None else IDEAL_ENV
    xi3 = np.asarray(sorted(xi3_grid), dtype=float)
    if xi3.size < 2 or xi3[0] <= 0:
        raise InvalidParameter("xi3 grid must hold positive values")
    if xi3[-1] / xi3[0] < np.sqrt(10.0):
        raise InvalidParameter("xi3 grid must span at least half a decade")
    ws = np.array([omega_p / 2.0 + signal_offset])
    engine = ReflectionEngine(design, env, ws, omega_p, i_dc)
    rs, xs = [], []
    for x in xi3:
        alpha = engine.alpha_for_xi3(x)
        if alpha >= 1:
            continue
        y = engine.y_eff(alpha)[0]
        if np.isfinite(y) and y.real < 0:
            rs.append(-1.0 / y.real)
            xs.append(x)
    if len(xs) < 4:
        raise InsufficientData(f"only {len(xs)} grid points produced gain")
    slope, intercept = np.polyfit(np.log(xs), np.log(rs), 1)
    return {
        "exponent": float(slope),
        "prefactor": float(np.exp(intercept)),
        "xi3": np.array(xs),
        "r_nr": np.array(rs),
    }
