"""Scalar noise-cascade algebra and qubit-based power calibration.

All noise levels are photon quanta referred to the measurement frequency;
gains and attenuations are linear power ratios (convert dB upstream).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.constants import hbar, k as k_B
from scipy.optimize import least_squares

from .errors import FitFailure, InvalidParameter


@dataclass(frozen=True)
class NoiseChainModel:
    """Measurement cascade: input loss, amplifier, post-loss, system amplifier.

    a_in : input-line attenuation (power ratio <= 1)
    a_23 : loss between the amplifier and the following chain (power ratio)
    n_t23 : thermal occupation re-injected by that loss, quanta
    g_s : amplifier gain (power ratio)
    g_sys : downstream system gain (power ratio)
    n_sys : downstream added noise, quanta
    n1 : input noise at the amplifier, quanta (0.5 = vacuum)
    """

    a_in: float
    a_23: float
    n_t23: float
    g_s: float
    g_sys: float
    n_sys: float
    n1: float = 0.5

    def __post_init__(self):
        for name in ("a_in", "a_23", "g_s", "g_sys"):
            if not getattr(self, name) > 0:
                raise InvalidParameter(f"{name} must be > 0")
        if self.a_in > 1 or self.a_23 > 1:
            raise InvalidParameter("attenuations are power ratios <= 1")
        if self.n1 < 0.5:
            raise InvalidParameter("n1 cannot be below the vacuum level 0.5")
        if self.n_t23 < 0 or self.n_sys < 0:
            raise InvalidParameter("noise occupations must be >= 0")

    @property
    def g_sys_eff(self) -> float:
        return self.a_23 * self.g_sys


def cascade_forward(chain: NoiseChainModel, n_a: float) -> dict:
    """Noise at each stage for amplifier added noise ``n_a`` (quanta)."""
    n2 = chain.g_s * (chain.n1 + n_a)
    n3 = chain.a_23 * n2 + (1.0 - chain.a_23) * chain.n_t23
    n4 = chain.g_sys * (n3 + chain.n_sys)
    return {"n2": n2, "n3": n3, "n4": n4}


def pump_off_reference(chain: NoiseChainModel) -> float:
    """n4 with the pump off: the amplifier reflects without adding noise."""
    n3 = chain.a_23 * chain.n1 + (1.0 - chain.a_23) * chain.n_t23
    return chain.g_sys * (n3 + chain.n_sys)


def added_noise(n4: float, n4_off: float, g_s: float, g_sys_eff: float,
                n1: float = 0.5) -> float:
    """Input-referred amplifier noise from on/off output noise levels.

    N_A = (n4 - n4_off)/(g_s·g_sys_eff) + n1/g_s - n1
    """
    if not g_s > 1:
        raise InvalidParameter("added-noise extraction requires g_s > 1")
    if not g_sys_eff > 0:
        raise InvalidParameter("g_sys_eff must be > 0")
    return (n4 - n4_off) / (g_s * g_sys_eff) + n1 / g_s - n1


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose factor 1/(exp(ħω/kT) - 1); zero temperature maps to 0."""
    if temperature < 0 or not omega > 0:
        raise InvalidParameter("need omega > 0 and temperature >= 0")
    if temperature == 0:
        return 0.0
    x = hbar * omega / (k_B * temperature)
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def excess_noise(q_e: float, q_i: float, g_s: float, temperature: float,
                 omega: float) -> float:
    """Added noise beyond the quantum limit from internal loss and thermal photons.

    N_ex = (Q_e/2Q_i)·(√G+1)²/(G-1)·(2N_th+1) + N_th
    """
    if not q_i > 0:
        raise InvalidParameter("q_i must be > 0")
    if not g_s > 1:
        raise InvalidParameter("excess-noise formula requires g_s > 1")
    n_th = thermal_occupation(omega, temperature)
    root = math.sqrt(g_s)
    return (q_e / (2.0 * q_i)) * (root + 1.0) ** 2 / (g_s - 1.0) * (2.0 * n_th + 1.0) + n_th


def snr_gain(p_n4: float, p_n4_off: float, g_s: float) -> float:
    """Signal-to-noise-ratio gain from the noise-floor shift.

    P_N4/P_N4off = G_s/G_SNR, so G_SNR = G_s·P_N4off/P_N4.
    """
    if not (p_n4 > 0 and p_n4_off > 0):
        raise InvalidParameter("noise powers must be > 0")
    return g_s * p_n4_off / p_n4


def system_noise_temperature(n4_off: float, omega: float, g_sys_eff: float) -> float:
    """T_sys = n4_off·ħω / (k_B·g_sys_eff), kelvin."""
    if not (n4_off > 0 and omega > 0 and g_sys_eff > 0):
        raise InvalidParameter("inputs must be > 0")
    return n4_off * hbar * omega / (k_B * g_sys_eff)


def power_to_quanta(power: float, omega: float, bandwidth_hz: float = 10.0) -> float:
    """Measured power (W) in an IF bandwidth (Hz) to photon quanta."""
    if not (omega > 0 and bandwidth_hz > 0):
        raise InvalidParameter("omega and bandwidth must be > 0")
    return power / (hbar * omega * bandwidth_hz)


@dataclass(frozen=True)
class QubitCalibration:
    """Decay and dephasing rates of the calibration qubit (rad/s)."""

    omega_q: float
    gamma_1e: float
    gamma_1i: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        if not self.gamma_1e > 0:
            raise InvalidParameter("gamma_1e must be > 0")
        if self.gamma_1i < 0 or self.gamma_phi < 0:
            raise InvalidParameter("rates must be >= 0")

    @property
    def gamma_1(self) -> float:
        return self.gamma_1e + self.gamma_1i

    @property
    def gamma_2(self) -> float:
        return self.gamma_phi + self.gamma_1 / 2.0


def qubit_s21(cal: QubitCalibration, detuning, drive) -> complex:
    """Steady-state transmission past a waveguide-coupled qubit.

    S21 = 1 - (γ1e/2γ2)·(1 + iΔ/γ2) / (1 + (Δ/γ2)² + Ω²/(γ1·γ2))
    """
    g1, g2 = cal.gamma_1, cal.gamma_2
    d = np.asarray(detuning, dtype=float) / g2
    den = 1.0 + d**2 + np.asarray(drive, dtype=float) ** 2 / (g1 * g2)
    s = 1.0 - (cal.gamma_1e / (2.0 * g2)) * (1.0 + 1j * d) / den
    return complex(s) if np.ndim(s) == 0 else s


def drive_strength(gamma_1e: float, p_drive: float, omega_q: float) -> float:
    """Rabi drive Ω = sqrt(2·γ1e·P_d/(ħω_q)) for power P_d at the qubit."""
    if gamma_1e < 0 or p_drive < 0 or not omega_q > 0:
        raise InvalidParameter("rates/powers must be >= 0 and omega_q > 0")
    return math.sqrt(2.0 * gamma_1e * p_drive / (hbar * omega_q))


def fit_qubit_saturation(data: Sequence[Tuple[float, float, complex]],
                         omega_q: float, p_ref: float = 1e-11,
                         max_iter: int = 200, tol: float = 1e-10) -> dict:
    """Joint saturation fit over a (detuning, VNA power, S21) grid.

    data : (detuning rad/s, VNA power W, measured complex S21) triples
    omega_q : qubit angular frequency used in the drive conversion
    p_ref : reference VNA power at which the fitted drive is reported

    Assumes γ1 ≈ γ1e and Ω² proportional to VNA power.  Fits log(γ1),
    log(γφ), log(Ω_ref) by damped least squares with analytic Jacobians and
    converts the drive into the input-line attenuation a_in = P_d/P_VNA.
    Returns the rates, drive, attenuation, and RMS residual.
    """
    rows = list(data)
    det = np.array([r[0] for r in rows], dtype=float)
    pw = np.array([r[1] for r in rows], dtype=float)
    s21 = np.array([r[2] for r in rows], dtype=complex)
    if len(rows) < 10 or len(set(pw.tolist())) < 2 or len(set(det.tolist())) < 5:
        raise InvalidParameter("need >= 2 powers and >= 5 detunings")
    if np.any(pw <= 0):
        raise InvalidParameter("powers must be > 0")
    contrast = np.max(np.abs(1.0 - s21))
    if contrast < 1e-9:
        raise FitFailure("no dip contrast: saturation parameters unidentifiable",
                         {"contrast": float(contrast)})

    scale = np.sqrt(pw / p_ref)

    def model_and_grads(x):
        g1, gphi, om_ref = np.exp(x)
        g2 = gphi + g1 / 2.0
        om = om_ref * scale
        d = det / g2
        den = 1.0 + d**2 + om**2 / (g1 * g2)
        pref = g1 / (2.0 * g2)
        num = 1.0 + 1j * d
        s = 1.0 - pref * num / den
        # partials wrt (g1, gphi, om_ref); gamma_2 depends on both rates
        dden_dg2 = -2.0 * d**2 / g2 - om**2 / (g1 * g2**2)
        dden_dg1_ex = -(om**2) / (g1**2 * g2)
        dnum_dg2 = -1j * d / g2
        dpref_dg2 = -g1 / (2.0 * g2**2)
        dpref_dg1_ex = 1.0 / (2.0 * g2)
        dS_dg2 = -(dpref_dg2 * num / den + pref * dnum_dg2 / den
                   - pref * num * dden_dg2 / den**2)
        dS_dg1 = -(dpref_dg1_ex * num / den - pref * num * dden_dg1_ex / den**2) \
            + dS_dg2 * 0.5
        dS_dgphi = dS_dg2
        dden_dom = 2.0 * om * scale / (g1 * g2)
        dS_dom = pref * num * dden_dom / den**2
        return s, (dS_dg1 * g1, dS_dgphi * gphi, dS_dom * om_ref)

    def resid(x):
        s, _ = model_and_grads(x)
        r = s - s21
        return np.concatenate([r.real, r.imag])

    def jac(x):
        _, grads = model_and_grads(x)
        cols = [np.concatenate([g.real, g.imag]) for g in grads]
        return np.stack(cols, axis=1)

    # starting point: dip width and depth at the lowest power
    low = pw == pw.min()
    depth = np.max(np.abs(1.0 - s21[low]))
    g2_guess = max((det[low].max() - det[low].min()) / 4.0, 1e3)
    g1_guess = max(2.0 * g2_guess * min(depth, 0.999), 1e3)
    x0 = np.log([g1_guess, max(g1_guess * 1e-3, 1.0), g2_guess * 0.3])
    res = least_squares(resid, x0, jac=jac, method="lm",
                        xtol=tol, ftol=tol, gtol=tol, max_nfev=max_iter * 4)
    if not res.success:
        raise FitFailure("qubit saturation fit did not converge",
                         {"status": res.status, "message": res.message})
    g1, gphi, om_ref = np.exp(res.x)
    p_d = hbar * omega_q * om_ref**2 / (2.0 * g1)
    rms = float(np.sqrt(np.mean(res.fun**2)))
    return {
        "gamma_1": float(g1),
        "gamma_phi": float(gphi),
        "drive_ref": float(om_ref),
        "p_ref": p_ref,
        "a_in": float(p_d / p_ref),
        "rms_residual": rms,
    }
