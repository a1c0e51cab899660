"""Kinetic-inductance material models and pump-coefficient arithmetic.

Covers the current-dependent inductance (parabolic, quartic, and the
Clem-style full expression), the pump linearization coefficients
(delta_l, alpha, xi3, Kerr, pump-induced shift), the material ceiling on
xi3, the stepped-impedance filter external Q, and least-squares fitting
of measured frequency-shift curves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.constants import hbar
from scipy.optimize import least_squares, minimize_scalar

from .errors import (
    FitFailure,
    InvalidParameter,
    SuperconductivityBreakdown,
)

MODEL_KINDS = ("parabolic", "quartic", "clem")


@dataclass(frozen=True)
class KineticInductorModel:
    """Current-dependent kinetic inductor with a fixed series geometric part.

    model_kind : "parabolic", "quartic", or "clem"
    l_k0 : zero-current kinetic inductance, H
    l_geo : series geometric inductance, H (does not modulate)
    i_star2 : quadratic current scale, A
    i_star4 : quartic current scale, A (quartic kind only)
    i_star_star : Clem current scale, A (clem kind only)
    n_exp : Clem exponent (default 2.21)
    i_c : critical current, A (optional; enforces bias limits when set)
    """

    model_kind: str
    l_k0: float
    l_geo: float = 0.0
    i_star2: float = math.inf
    i_star4: Optional[float] = None
    i_star_star: Optional[float] = None
    n_exp: float = 2.21
    i_c: Optional[float] = None

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise InvalidParameter(f"unknown model kind {self.model_kind!r}")
        if self.l_k0 < 0 or self.l_geo < 0:
            raise InvalidParameter("inductances must be >= 0")
        if not self.i_star2 > 0:
            raise InvalidParameter("i_star2 must be > 0")
        if self.model_kind == "quartic":
            if self.i_star4 is None or not self.i_star4 > 0:
                raise InvalidParameter("quartic kind requires i_star4 > 0")
        if self.model_kind == "clem":
            if self.i_star_star is None or not self.i_star_star > 0:
                raise InvalidParameter("clem kind requires i_star_star > 0")
        if self.i_c is not None:
            if not self.i_c > 0:
                raise InvalidParameter("i_c must be > 0")
            if math.isfinite(self.i_star2) and not self.i_c < self.i_star2:
                raise InvalidParameter("critical current must lie below i_star2")


@dataclass(frozen=True)
class PumpOperatingPoint:
    """DC bias plus pump tone driving the modulated inductor.

    i_dc : A; i_p_mag : |I_p|, A; phi_p : pump phase, rad; omega_p : rad/s
    """

    i_dc: float
    i_p_mag: float
    phi_p: float = 0.0
    omega_p: float = 0.0

    def __post_init__(self):
        if self.i_dc < 0:
            raise InvalidParameter("i_dc must be >= 0")
        if self.i_p_mag < 0:
            raise InvalidParameter("i_p_mag must be >= 0")


@dataclass(frozen=True)
class PumpCoefficients:
    """Linearized pump coefficients at one operating point."""

    delta_l: complex      # complex modulation amplitude, H
    alpha: float          # dimensionless modulation strength |dL|^2/(4 L_I^2)
    xi3: complex          # amplification coefficient, rad/s
    kerr: float           # Kerr coefficient K, rad/s
    pump_shift: float     # pump-induced frequency shift, rad/s
    l_i: float            # inductance at the dc bias, H


def kinetic_inductance(model: KineticInductorModel, i_dc: float) -> float:
    """Total inductance L_k(I) + l_geo at bias ``i_dc`` (henries)."""
    i = abs(i_dc)
    if model.model_kind == "parabolic":
        lk = model.l_k0 * (1.0 + (i / model.i_star2) ** 2)
    elif model.model_kind == "quartic":
        lk = model.l_k0 * (1.0 + (i / model.i_star2) ** 2 + (i / model.i_star4) ** 4)
    else:  # clem
        x = (i / model.i_star_star) ** model.n_exp
        if x >= 1.0:
            raise SuperconductivityBreakdown(
                f"bias {i_dc} at or beyond the breakdown scale {model.i_star_star}"
            )
        lk = model.l_k0 / (1.0 - x) ** (1.0 / model.n_exp)
    return lk + model.l_geo


def pump_coefficients(model: KineticInductorModel, op: PumpOperatingPoint,
                      omega0: float) -> PumpCoefficients:
    """Linearization coefficients for ``op`` around resonance ``omega0``.

    Uses the quadratic scale i_star2 throughout, even for quartic/clem
    inductance kinds: the closed forms derive from the parabolic expansion,
    which underestimates the modulation for strongly nonlinear films.
    """
    if not omega0 > 0:
        raise InvalidParameter("omega0 must be > 0")
    if model.i_c is not None and not op.i_dc + op.i_p_mag < model.i_c:
        raise SuperconductivityBreakdown(
            f"i_dc + |I_p| = {op.i_dc + op.i_p_mag:.4g} A reaches i_c = {model.i_c:.4g} A"
        )
    l_i = kinetic_inductance(model, op.i_dc)
    istar2 = model.i_star2
    denom = istar2**2 + op.i_dc**2
    ratio = op.i_dc * op.i_p_mag / denom
    delta_l = 1.5 * ratio * l_i * np.exp(-1j * op.phi_p)
    alpha = (9.0 / 16.0) * ratio**2
    xi3 = -1.5 * ratio * omega0 * np.exp(-1j * op.phi_p)
    quart = (8.0 * op.i_dc**2 - istar2**2) / denom**2
    kerr = 0.75 * quart * hbar * omega0**2 / l_i
    pump_shift = 1.5 * quart * omega0 * op.i_p_mag**2
    return PumpCoefficients(complex(delta_l), float(alpha), complex(xi3),
                            float(kerr), float(pump_shift), float(l_i))


def pump_current_for_xi3(model: KineticInductorModel, i_dc: float, omega0: float,
                         xi3_mag: float) -> float:
    """|I_p| that produces the given |xi3| at bias ``i_dc`` (no i_c cap applied)."""
    if not (i_dc > 0 and omega0 > 0 and xi3_mag >= 0):
        raise InvalidParameter("i_dc, omega0 must be > 0 and xi3_mag >= 0")
    return xi3_mag * (model.i_star2**2 + i_dc**2) / (1.5 * i_dc * omega0)


def xi3_upper_bound(i_c: float, omega0: float) -> dict:
    """Material ceiling on |xi3| given the critical current.

    Maximizes (3/2)(I_c-|I_p|)|I_p| / (5.7 I_c² + (I_c-|I_p|)²) over
    |I_p| in (0, I_c).  The maximum of the dimensionless ratio is
    independent of I_c; the rad/s ceiling scales with omega0.
    """
    if not i_c > 0:
        raise InvalidParameter("i_c must be > 0")
    if not omega0 > 0:
        raise InvalidParameter("omega0 must be > 0")

    def ratio(x):  # x = |I_p|/I_c
        return 1.5 * (1.0 - x) * x / (5.7 + (1.0 - x) ** 2)

    xs = np.linspace(1e-6, 1.0 - 1e-6, 2001)
    x0 = xs[np.argmax(ratio(xs))]
    res = minimize_scalar(lambda x: -ratio(x),
                          bounds=(max(x0 - 1e-3, 0.0), min(x0 + 1e-3, 1.0)),
                          method="bounded", options={"xatol": 1e-12})
    x_opt = float(res.x)
    return {"max_xi3": ratio(x_opt) * omega0, "optimal_ip_fraction": x_opt,
            "dimensionless_max": float(ratio(x_opt))}


def stepped_filter_qe(n_sections: int, z_h: float, z_l: float, z0: float,
                      z_nr: float) -> float:
    """External Q of an N-section stepped-impedance quarter-wave filter."""
    if n_sections < 1:
        raise InvalidParameter("n_sections must be >= 1")
    if min(z_h, z_l, z0, z_nr) <= 0:
        raise InvalidParameter("impedances must be > 0")
    return (z_h / z_l) ** (2 * n_sections) * math.pi * z0 / (4.0 * z_nr)


def frequency_shift(model: KineticInductorModel, i_dc) -> np.ndarray:
    """Fractional resonance shift δω/ω0 of an LC with this inductor.

    δω/ω0 ≈ -(1/2)·δL_k/(L_k0 + L_geo), with δL_k the kinetic-inductance
    rise at bias relative to zero bias.
    """
    i_dc = np.asarray(i_dc, dtype=float)
    l_tot0 = model.l_k0 + model.l_geo
    lk = np.array([kinetic_inductance(model, i) for i in np.atleast_1d(i_dc)])
    shift = -0.5 * (lk - l_tot0) / l_tot0
    return shift if i_dc.ndim else float(shift[0])


_SENTINEL_ZERO = 1e-12   # below this |u|, a fitted 1/I*^2 is treated as zero


def fit_ki_curve(data: Sequence[Tuple[float, float]], model_kind: str,
                 l_k0: float = 1.0, l_geo: float = 0.0,
                 max_iter: int = 200, tol: float = 1e-10):
    """Fit the current scales of an inductance model to shift data.

    data : sequence of (i_dc [A], δω/ω [dimensionless]) pairs
    model_kind : which inductance law to fit
    l_k0, l_geo : fixed inductance split; only the kinetic participation
        ratio l_k0/(l_k0+l_geo) affects the fit

    Returns (model, rms_residual).  Damped least squares with analytic
    Jacobians; a parabolic fit of flat data returns an infinite i_star2.
    """
    pts = np.asarray(list(data), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise InvalidParameter("need at least 4 (i_dc, dfrac) data points")
    if model_kind not in MODEL_KINDS:
        raise InvalidParameter(f"unknown model kind {model_kind!r}")
    i, y = pts[:, 0], pts[:, 1]
    part = l_k0 / (l_k0 + l_geo)  # kinetic participation of the resonator inductance

    if model_kind in ("parabolic", "quartic"):
        # dfrac = -(part/2)(u2 I^2 + u4^2 I^4): linear in (u2, w4), u2 = 1/I*2^2
        def resid(p):
            u2 = p[0]
            w4 = p[1] if model_kind == "quartic" else 0.0
            return -0.5 * part * (u2 * i**2 + w4 * i**4) - y

        def jac(p):
            cols = [-0.5 * part * i**2]
            if model_kind == "quartic":
                cols.append(-0.5 * part * i**4)
            return np.stack(cols, axis=1)

        n_par = 2 if model_kind == "quartic" else 1
        x0 = np.zeros(n_par)
        res = least_squares(resid, x0, jac=jac, method="lm",
                            xtol=tol, ftol=tol, gtol=tol, max_nfev=max_iter)
        u2 = res.x[0]
        istar2 = math.inf if abs(u2) < _SENTINEL_ZERO else 1.0 / math.sqrt(abs(u2))
        kwargs = dict(model_kind=model_kind, l_k0=l_k0, l_geo=l_geo, i_star2=istar2)
        if model_kind == "quartic":
            w4 = res.x[1]
            kwargs["i_star4"] = math.inf if abs(w4) < _SENTINEL_ZERO else abs(w4) ** -0.25
            if not kwargs["i_star4"] > 0:
                raise FitFailure("degenerate quartic scale", {"w4": w4})
        model = KineticInductorModel(**kwargs)
        rms = float(np.sqrt(np.mean(res.fun**2)))
        return model, rms

    # clem: dfrac = -(part/2)([1-(I v)^n]^(-1/n) - 1), fit v = 1/I**
    n = 2.21
    imax = np.max(np.abs(i))
    if imax <= 0:
        raise FitFailure("clem fit needs nonzero bias points")
    # invert the largest-shift point for the starting scale
    y_big = y[np.argmax(np.abs(i))]
    lk_ratio = 1.0 - 2.0 * y_big / part  # L_k(I)/L_k0 at the largest bias
    if lk_ratio <= 1.0:
        v0 = 0.1 / imax
    else:
        v0 = (1.0 - lk_ratio**-n) ** (1.0 / n) / imax

    def model_of(v):
        x = np.clip((np.abs(i) * v) ** n, 0.0, 1.0 - 1e-12)
        return (1.0 - x) ** (-1.0 / n)

    def resid(p):
        return -0.5 * part * (model_of(p[0]) - 1.0) - y

    def jac(p):
        v = p[0]
        x = np.clip((np.abs(i) * v) ** n, 0.0, 1.0 - 1e-12)
        g = (1.0 - x) ** (-1.0 / n - 1.0)
        dx_dv = n * (np.abs(i)) ** n * v ** (n - 1.0)
        return (-0.5 * part * (1.0 / n) * g * dx_dv).reshape(-1, 1)

    res = least_squares(resid, np.array([v0]), jac=jac, method="lm",
                        xtol=tol, ftol=tol, gtol=tol, max_nfev=max_iter)
    if not res.success:
        raise FitFailure("clem fit did not converge", {"status": res.status,
                                                       "message": res.message})
    v = abs(res.x[0])
    istar_star = math.inf if v < _SENTINEL_ZERO else 1.0 / v
    model = KineticInductorModel(model_kind="clem", l_k0=l_k0, l_geo=l_geo,
                                 i_star_star=istar_star, n_exp=n)
    rms = float(np.sqrt(np.mean(res.fun**2)))
    return model, rms


def parse_shift_csv(text: str) -> list:
    """Parse two-column shift data with header ``i_dc_A,dfrac``."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidParameter("empty shift data")
    header = [h.strip() for h in lines[0].split(",")]
    if header != ["i_dc_A", "dfrac"]:
        raise InvalidParameter(f"expected header 'i_dc_A,dfrac', got {lines[0]!r}")
    out = []
    for ln in lines[1:]:
        cols = ln.split(",")
        if len(cols) != 2:
            raise InvalidParameter(f"expected two columns, got {ln!r}")
        out.append((float(cols[0]), float(cols[1])))
    return out
