"""Amplifier network descriptions and the ladder arithmetic built on them.

A design is the physical reflection circuit: source, impedance-transformer
lines, and the nonlinear resonator (shunt capacitor + kinetic inductor).
The environment generalizes the 50 Ω source to a rippled impedance made of
superimposed sinusoids.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidParameter, SingularNetwork, UnphysicalEnvironment
from .material import KineticInductorModel, kinetic_inductance
from .netcore import TransmissionLineSegment, input_impedance

CIRCUIT_KINDS = ("three-stage", "conventional")


@dataclass(frozen=True)
class EnvironmentModel:
    """Source impedance z0 plus sinusoidal ripple terms (z_n, tau_n, phi_n).

    Z_env(ω) = z0 + Σ z_n · exp(i(ω·τ_n + φ_n)); an empty term list is the
    ideal flat environment.
    """

    z0: float = 50.0
    terms: Tuple[Tuple[float, float, float], ...] = ()

    def __post_init__(self):
        if not self.z0 > 0:
            raise InvalidParameter("environment z0 must be > 0")
        if len(self.terms) > 2:
            raise InvalidParameter("at most two ripple terms are supported")
        object.__setattr__(self, "terms", tuple(tuple(t) for t in self.terms))


IDEAL_ENV = EnvironmentModel()


def environment_impedance(env: EnvironmentModel, omega):
    """Z_env(ω); raises if the real part is not positive at any requested ω."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise InvalidParameter("omega must be >= 0")
    z = np.full(w.shape, env.z0, dtype=complex)
    for zn, tau, phi in env.terms:
        z = z + zn * np.exp(1j * (w * tau + phi))
    if np.any(z.real <= 0):
        raise UnphysicalEnvironment("environment impedance has Re <= 0 in the band")
    return complex(z[()]) if z.ndim == 0 else z


@dataclass(frozen=True)
class DesignSpec:
    """Reflection amplifier: transformer lines plus the nonlinear resonator.

    The three-stage kind cascades, from the port inward, a quarter-wave
    line, a half-wave line, and a high-impedance quarter-wave line before
    the shunt-C / modulated-inductor node; the conventional kind omits the
    final quarter-wave line.  ``f0`` is the angular design frequency at
    which the line length fractions hold.
    """

    circuit_kind: str
    z0: float
    line_quarter: TransmissionLineSegment
    line_half: TransmissionLineSegment
    line_ki_quarter: Optional[TransmissionLineSegment]
    c_shunt: float
    ki_model: KineticInductorModel
    f0: float

    def __post_init__(self):
        if self.circuit_kind not in CIRCUIT_KINDS:
            raise InvalidParameter(f"unknown circuit kind {self.circuit_kind!r}")
        if not self.z0 > 0:
            raise InvalidParameter("z0 must be > 0")
        if not self.c_shunt > 0:
            raise InvalidParameter("c_shunt must be > 0")
        if not self.f0 > 0:
            raise InvalidParameter("f0 must be > 0")
        if self.line_quarter.length_fraction != 0.25:
            raise InvalidParameter("line_quarter must be a quarter-wave segment")
        if self.line_half.length_fraction != 0.5:
            raise InvalidParameter("line_half must be a half-wave segment")
        if self.circuit_kind == "three-stage":
            if self.line_ki_quarter is None:
                raise InvalidParameter("three-stage kind requires line_ki_quarter")
            if self.line_ki_quarter.length_fraction != 0.25:
                raise InvalidParameter("line_ki_quarter must be a quarter-wave segment")
        elif self.line_ki_quarter is not None:
            raise InvalidParameter("conventional kind has no line_ki_quarter")

    def lines_node_to_port(self) -> Tuple[TransmissionLineSegment, ...]:
        """Segments in order from the resonator node out to the port."""
        if self.circuit_kind == "three-stage":
            return (self.line_ki_quarter, self.line_half, self.line_quarter)
        return (self.line_half, self.line_quarter)

    def inductance_at_bias(self, i_dc: float) -> float:
        return kinetic_inductance(self.ki_model, i_dc)

    def resonance_at_bias(self, i_dc: float) -> float:
        """Angular resonance of the shunt-C / biased-inductor tank."""
        return 1.0 / np.sqrt(self.inductance_at_bias(i_dc) * self.c_shunt)


def three_stage_design(z0: float, z_quarter: float, z_half: float,
                       z_ki_quarter: Optional[float], c_shunt: float,
                       ki_model: KineticInductorModel, f0: float) -> DesignSpec:
    """Convenience constructor; pass ``z_ki_quarter=None`` for the conventional kind."""
    kind = "three-stage" if z_ki_quarter is not None else "conventional"
    return DesignSpec(
        circuit_kind=kind,
        z0=z0,
        line_quarter=TransmissionLineSegment(z_quarter, 0.25, f0),
        line_half=TransmissionLineSegment(z_half, 0.5, f0),
        line_ki_quarter=(TransmissionLineSegment(z_ki_quarter, 0.25, f0)
                         if z_ki_quarter is not None else None),
        c_shunt=c_shunt,
        ki_model=ki_model,
        f0=f0,
    )


def chain_impedance_from_node(design: DesignSpec, env: EnvironmentModel, omega):
    """Impedance looking out from the resonator node toward the source at ω."""
    z = environment_impedance(env, omega)
    # walk outward-to-inward: transform the source through each line,
    # starting with the segment adjacent to the port
    for seg in reversed(design.lines_node_to_port()):
        z = input_impedance(seg, z, omega)
    return z


def idler_admittance(design: DesignSpec, env: EnvironmentModel, omega_i):
    """Admittance of {shunt C, lines, source} seen from the inductor at ω_i.

    Excludes the inductor itself; callers conjugate per the idler-frequency
    convention.
    """
    z_chain = chain_impedance_from_node(design, env, omega_i)
    z_arr = np.asarray(z_chain)
    if np.any(z_arr == 0):
        raise SingularNetwork("outward chain presents a short at the resonator node")
    return 1j * np.asarray(omega_i, dtype=float) * design.c_shunt + 1.0 / z_chain


def port_line_abcd(design: DesignSpec, omega):
    """(A, B, C, D) arrays of the port-to-node line cascade at ω.

    The cascade is ordered port side first, so the node-side load Z_N maps
    to the port as Z_in = (A·Z_N + B)/(C·Z_N + D).
    """
    w = np.asarray(omega, dtype=float)
    a = np.ones(w.shape, dtype=complex)
    b = np.zeros(w.shape, dtype=complex)
    c = np.zeros(w.shape, dtype=complex)
    d = np.ones(w.shape, dtype=complex)
    # port-side segment first
    for seg in reversed(design.lines_node_to_port()):
        th = seg.electrical_length(w)
        ca, sa = np.cos(th), np.sin(th)
        la, lb, lc, ld = ca, 1j * seg.z_c * sa, 1j * sa / seg.z_c, ca
        a, b, c, d = (a * la + b * lc, a * lb + b * ld,
                      c * la + d * lc, c * lb + d * ld)
    return a, b, c, d
