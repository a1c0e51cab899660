"""Command-line front end: config ingestion, presets, sweeps, tabular output.

Commands: synth, simulate, map, search, fit-ki, fit-qubit, noise.
All user-facing frequencies are ordinary Hz (angular conversion happens
internally); values carry units like ``8.4GHz``, ``56 ohm``, ``330fF``,
``0.57mA``, ``-29.6dBm``.  Exit codes: 0 success, 1 validation error,
2 numerical failure, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import material, noise as noise_mod, presets, search as search_mod
from . import simulator, synthesis
from .circuits import EnvironmentModel, three_stage_design
from .errors import ConfigError, InvalidParameter, NumericalError, ValidationError
from .material import KineticInductorModel
from .simulator import PumpDrive, PumpRampPolicy

TWO_PI = 2.0 * math.pi

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


# ---------------------------------------------------------------- units

_UNIT_TABLE = {
    # frequency -> Hz
    "hz": ("frequency", 1.0), "khz": ("frequency", 1e3), "mhz": ("frequency", 1e6),
    "ghz": ("frequency", 1e9),
    # impedance -> ohm
    "ohm": ("impedance", 1.0), "ohms": ("impedance", 1.0), "Ω": ("impedance", 1.0),
    "kohm": ("impedance", 1e3),
    # capacitance -> F
    "ff": ("capacitance", 1e-15), "pf": ("capacitance", 1e-12),
    "nf": ("capacitance", 1e-9), "f": ("capacitance", 1.0),
    # inductance -> H
    "ph": ("inductance", 1e-12), "nh": ("inductance", 1e-9),
    "uh": ("inductance", 1e-6), "h": ("inductance", 1.0),
    # current -> A
    "ua": ("current", 1e-6), "ma": ("current", 1e-3), "a": ("current", 1.0),
    # time -> s
    "ns": ("time", 1e-9), "us": ("time", 1e-6), "ps": ("time", 1e-12), "s": ("time", 1.0),
    # angles
    "rad": ("angle", 1.0), "pi": ("angle", math.pi), "deg": ("angle", math.pi / 180.0),
}

_Qty = Tuple[float, str]
_NUM_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([a-zA-ZΩ]*)\s*$")


def parse_quantity(text: str) -> _Qty:
    """Parse ``'8.4GHz'``-style values into SI units plus a dimension tag.

    dBm becomes watts ("power"); dB becomes a linear power ratio ("ratio");
    a bare number is tagged "none".
    """
    s = text.strip()
    m = _NUM_RE.match(s)
    if not m:
        raise InvalidParameter(f"cannot parse quantity {text!r}")
    value = float(m.group(1))
    unit = m.group(2)
    if not unit:
        return value, "none"
    low = unit.lower()
    if low == "dbm":
        return 10.0 ** ((value - 30.0) / 10.0), "power"
    if low == "db":
        return 10.0 ** (value / 10.0), "ratio"
    if unit == "Ω":
        low = "ohm"
    if low not in _UNIT_TABLE:
        raise InvalidParameter(f"unknown unit {unit!r} in {text!r}")
    kind, mult = _UNIT_TABLE[low]
    return value * mult, kind


def parse_span(text: str) -> Tuple[float, float, float]:
    """``7.9GHz:8.9GHz:1MHz`` -> (start, stop, step) in SI units.

    The three parts must share one dimension (bare numbers mix freely).
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidParameter(f"span must be start:stop:step, got {text!r}")
    vals, kinds = [], set()
    for p in parts:
        v, kind = parse_quantity(p)
        vals.append(v)
        if kind != "none":
            kinds.add(kind)
    if len(kinds) > 1:
        raise InvalidParameter(f"span mixes units: {text!r}")
    start, stop, step = vals
    if not (stop >= start and step > 0):
        raise InvalidParameter(f"span must satisfy stop >= start and step > 0: {text!r}")
    return start, stop, step


# ---------------------------------------------------------------- config

def parse_config(text: str, schema: Dict[str, str]) -> Dict[str, object]:
    """Parse a ``key = value`` document against a per-command schema.

    schema maps key -> expected dimension tag ("frequency", "impedance",
    "current", ..., "str" for raw strings, "span" for range triples).
    Unknown keys and dimension mismatches raise with line/column info.
    """
    out: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno,
                              column=len(line) - len(line.lstrip()) + 1)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in schema:
            col = raw.index(key) + 1 if key in raw else 1
            raise ConfigError(f"unknown key {key!r}", line=lineno, column=col)
        if not value:
            raise ConfigError(f"key {key!r} has no value", line=lineno)
        try:
            out[key] = _coerce(value, schema[key])
        except (InvalidParameter, ValueError) as exc:
            raise ConfigError(f"key {key!r}: {exc}", line=lineno) from None
    return out


def _coerce(value: str, want: str):
    if want == "str":
        return value
    if want == "span":
        return parse_span(value)
    qty, kind = parse_quantity(value)
    if want == "any":
        return qty
    if kind not in (want, "none"):
        raise InvalidParameter(f"expected {want}, got {kind} ({value!r})")
    if want == "impedance" and qty <= 0:
        raise InvalidParameter(f"impedance must be positive, got {value!r}")
    return qty


# ---------------------------------------------------------------- output

def format_number(x) -> str:
    """Serialize a value: numbers carry 12 significant digits."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    xf = float(x)
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    if math.isnan(xf):
        return "nan"
    return f"{xf:.12g}"


def _json_value(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return int(x)
    xf = float(x)
    if math.isinf(xf) or math.isnan(xf):
        return format_number(xf)
    return float(format_number(xf))


def emit_results(records: Sequence[dict], columns: Sequence[str],
                 fmt: str = "csv") -> str:
    """Render records in the fixed column order as CSV or structured JSON."""
    if fmt == "csv":
        lines = [",".join(columns)]
        for rec in records:
            lines.append(",".join(format_number(rec[c]) for c in columns))
        return "\n".join(lines) + "\n"
    if fmt == "structured":
        rows = [{c: _json_value(rec[c]) for c in columns} for rec in records]
        return json.dumps({"columns": list(columns), "records": rows}, indent=2) + "\n"
    raise InvalidParameter(f"unknown output format {fmt!r}")


def _write_out(payload: str, path: Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(payload)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as exc:
        raise RuntimeError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------- design/env assembly

_DESIGN_KEYS = {
    "preset": "str", "circuit_kind": "str",
    "z0": "impedance", "z_quarter": "impedance", "z_half": "impedance",
    "z_ki_quarter": "impedance", "c_shunt": "capacitance", "f0": "frequency",
    "model_kind": "str", "l_k0": "inductance", "l_geo": "inductance",
    "i_star2": "current", "i_star4": "current", "i_star_star": "current",
    "i_c": "current",
}

_PUMP_KEYS = {"idc": "current", "fp": "frequency", "xi3": "frequency",
              "ip": "current", "phip": "angle"}

_ENV_KEYS = {"env": "str", "env_z0": "impedance",
             "env_z1": "impedance", "env_tau1": "time", "env_phi1": "angle",
             "env_z2": "impedance", "env_tau2": "time", "env_phi2": "angle"}


def _require(cfg: dict, *keys):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise InvalidParameter(f"missing required key(s): {', '.join(missing)}")


def _build_design(cfg: dict):
    name = cfg.get("preset")
    if name is not None:
        design = presets.design_preset(name)
        if any(k in cfg for k in _DESIGN_KEYS if k not in ("preset",)):
            raise InvalidParameter("preset designs take no inline design keys")
        return design
    missing = [k for k in ("z_quarter", "z_half", "c_shunt", "f0") if k not in cfg]
    if missing:
        raise InvalidParameter(f"inline design missing keys: {missing}")
    kind = cfg.get("model_kind", "parabolic")
    model = KineticInductorModel(
        model_kind=kind,
        l_k0=cfg.get("l_k0", 1e-9),
        l_geo=cfg.get("l_geo", 0.0),
        i_star2=cfg.get("i_star2", math.inf),
        i_star4=cfg.get("i_star4"),
        i_star_star=cfg.get("i_star_star"),
        i_c=cfg.get("i_c"),
    )
    return three_stage_design(
        z0=cfg.get("z0", 50.0),
        z_quarter=cfg["z_quarter"],
        z_half=cfg["z_half"],
        z_ki_quarter=cfg.get("z_ki_quarter"),
        c_shunt=cfg["c_shunt"],
        ki_model=model,
        f0=TWO_PI * cfg["f0"],
    )


def _build_env(cfg: dict) -> Optional[EnvironmentModel]:
    name = cfg.get("env")
    if name is not None:
        return presets.env_preset(name)
    if "env_z1" not in cfg and "env_z0" not in cfg:
        return None
    terms = []
    for i in ("1", "2"):
        if f"env_z{i}" in cfg:
            terms.append((cfg[f"env_z{i}"], cfg.get(f"env_tau{i}", 0.0),
                          cfg.get(f"env_phi{i}", 0.0)))
    return EnvironmentModel(z0=cfg.get("env_z0", 50.0), terms=tuple(terms))


def _build_pump(cfg: dict, design) -> PumpDrive:
    if "fp" not in cfg:
        raise InvalidParameter("pump frequency 'fp' is required")
    omega_p = TWO_PI * cfg["fp"]
    i_dc = cfg.get("idc", presets.PAPER_DEVICE_BIAS if cfg.get("preset") else 0.0)
    if "xi3" in cfg:
        if "ip" in cfg:
            raise InvalidParameter("give either xi3 or ip, not both")
        return PumpDrive(xi3_mag=TWO_PI * cfg["xi3"], omega_p=omega_p,
                         i_dc=i_dc, phi_p=cfg.get("phip", 0.0))
    if "ip" in cfg:
        omega0 = design.resonance_at_bias(i_dc)
        op = material.PumpOperatingPoint(i_dc=i_dc, i_p_mag=cfg["ip"],
                                         phi_p=cfg.get("phip", 0.0), omega_p=omega_p)
        coeffs = material.pump_coefficients(design.ki_model, op, omega0)
        return PumpDrive(xi3_mag=abs(coeffs.xi3), omega_p=omega_p, i_dc=i_dc,
                         phi_p=cfg.get("phip", 0.0))
    return PumpDrive(xi3_mag=0.0, omega_p=omega_p, i_dc=i_dc)


# ---------------------------------------------------------------- commands

def _cmd_synth(cfg: dict, fmt: str, out: Optional[str], threads: int = 1) -> int:
    _require(cfg, "epsilon", "z_nr", "z_ki")
    proto = synthesis.PrototypeCoefficients(
        g0=cfg.get("g0", synthesis.GETSINGER_17DB[0]),
        g1=cfg.get("g1", synthesis.GETSINGER_17DB[1]),
        g2=cfg.get("g2", synthesis.GETSINGER_17DB[2]),
        g3=cfg.get("g3", synthesis.GETSINGER_17DB[3]),
        epsilon=cfg["epsilon"],
    )
    res = synthesis.synthesize_transformer(proto, z_nr=cfg["z_nr"],
                                           z_ki=cfg["z_ki"], z0=cfg.get("z0", 50.0))
    rec = {
        "z_ref": res.z_ref, "z_quarter": res.z_quarter,
        "z_parallel": res.z_parallel, "z_half": res.z_half,
        "z_nr_primed": res.z_nr_primed, "r_nr_primed": res.r_nr_primed,
        "residual": res.residual,
    }
    _write_out(emit_results([rec], list(rec), fmt), out)
    return EXIT_OK


def _hz_grid(start: float, stop: float, step: float, inclusive: bool = False):
    n = int(round((stop - start) / step)) + (1 if inclusive else 0)
    return start + step * np.arange(max(n, 1))


def _cmd_simulate(cfg: dict, fmt: str, out: Optional[str], threads: int = 1) -> int:
    design = _build_design(cfg)
    env = _build_env(cfg)
    pump = _build_pump(cfg, design)
    start, stop, step = cfg.get("span", (7.9e9, 8.9e9, 1e6))
    freqs = TWO_PI * _hz_grid(start, stop, step)
    profile = simulator.gain_spectrum(design, pump, env, freqs)
    records = [
        {"freq_hz": f / TWO_PI, "re_s11": s.real, "im_s11": s.imag, "gain_db": g}
        for f, s, g in zip(profile.freqs, profile.s11, profile.gain_db)
    ]
    _write_out(emit_results(records, ["freq_hz", "re_s11", "im_s11", "gain_db"], fmt), out)
    return EXIT_OK


def _cmd_map(cfg: dict, fmt: str, out: Optional[str], threads: int = 1) -> int:
    _require(cfg, "fp_span", "idc_start", "idc_stop", "idc_step")
    design = _build_design(cfg)
    env = _build_env(cfg)
    fp_lo, fp_hi, fp_step = cfg["fp_span"]
    idc_lo, idc_hi, idc_step = cfg["idc_start"], cfg["idc_stop"], cfg["idc_step"]
    fps = TWO_PI * _hz_grid(fp_lo, fp_hi, fp_step, inclusive=True)
    idcs = _hz_grid(idc_lo, idc_hi, idc_step, inclusive=True)
    policy = PumpRampPolicy(mode=cfg.get("policy", "current"))
    step = cfg.get("freq_step", 2e6)
    cells = simulator.pump_bias_map(design, env, fps, idcs, policy,
                                    freq_step=TWO_PI * step, threads=threads)
    records = [
        {"fp_hz": c.omega_p / TWO_PI, "idc_a": c.i_dc, "bandwidth_hz": c.bandwidth / TWO_PI,
         "peaks": c.peak_count, "ripple_db": c.ripple_db}
        for c in cells
    ]
    _write_out(emit_results(records, ["fp_hz", "idc_a", "bandwidth_hz", "peaks", "ripple_db"], fmt), out)
    return EXIT_OK


def _cmd_search(cfg: dict, fmt: str, out: Optional[str], threads: int = 1) -> int:
    kind = cfg.get("kind", "three-stage")
    base = search_mod.default_ranges(kind)
    def _rng(key, default, scale=1.0):
        if key in cfg:
            lo, hi, st = cfg[key]
            return (lo * scale, hi * scale, st * scale)
        return default
    ranges = search_mod.SearchRanges(
        z_quarter_range=_rng("z14", base.z_quarter_range),
        z_half_range=_rng("z12", base.z_half_range),
        z_nr_range=_rng("znr", base.z_nr_range),
        omega_p_half_range=_rng("fp2", base.omega_p_half_range, TWO_PI),
        z_ki=cfg.get("z_ki", base.z_ki),
        omega0=TWO_PI * cfg["f0"] if "f0" in cfg else base.omega0,
        circuit_kind=kind,
    )
    records = [
        {"z14": r.z_quarter, "z12": r.z_half, "znr": r.z_nr,
         "fp2_hz": r.omega_p_half / TWO_PI, "bandwidth_hz": r.max_bandwidth / TWO_PI,
         "xi3_hz": r.optimal_xi3 / TWO_PI, "eta": r.eta}
        for r in search_mod.search_designs(ranges, threads=threads)
    ]
    _write_out(emit_results(records, ["z14", "z12", "znr", "fp2_hz",
                                      "bandwidth_hz", "xi3_hz", "eta"], fmt), out)
    return EXIT_OK


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _cmd_fit_ki(cfg: dict, fmt: str, out: Optional[str], threads: int = 1) -> int:
    _require(cfg, "input")
    data = material.parse_shift_csv(_read_text(cfg["input"]))
    model, rms = material.fit_ki_curve(
        data, cfg.get("model_kind", "quartic"),
        l_k0=cfg.get("l_k0", 1.0), l_geo=cfg.get("l_geo", 0.0))
    rec = {
        "model_kind": model.model_kind,
        "i_star2_a": model.i_star2,
        "i_star4_a": model.i_star4 if model.i_star4 is not None else float("nan"),
        "i_star_star_a": model.i_star_star if model.i_star_star is not None else float("nan"),
        "rms_residual": rms,
    }
    _write_out(emit_results([rec], list(rec), fmt), out)
    return EXIT_OK


def _cmd_fit_qubit(cfg: dict, fmt: str, out: Optional[str], threads: int = 1) -> int:
    _require(cfg, "input", "fq")
    rows = []
    text = _read_text(cfg["input"])
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].strip()
    if header != "detuning_hz,p_vna_dbm,re_s21,im_s21":
        raise InvalidParameter(f"expected header 'detuning_hz,p_vna_dbm,re_s21,im_s21', got {header!r}")
    for ln in lines[1:]:
        d, p, re_, im_ = (float(x) for x in ln.split(","))
        rows.append((TWO_PI * d, 10.0 ** ((p - 30.0) / 10.0), re_ + 1j * im_))
    res = noise_mod.fit_qubit_saturation(rows, omega_q=TWO_PI * cfg["fq"],
                                         p_ref=cfg.get("p_ref", 1e-11))
    rec = {
        "gamma1_hz": res["gamma_1"] / TWO_PI,
        "gamma_phi_hz": res["gamma_phi"] / TWO_PI,
        "drive_ref_hz": res["drive_ref"] / TWO_PI,
        "a_in_db": 10.0 * math.log10(res["a_in"]),
        "rms_residual": res["rms_residual"],
    }
    _write_out(emit_results([rec], list(rec), fmt), out)
    return EXIT_OK


def _cmd_noise(cfg: dict, fmt: str, out: Optional[str], threads: int = 1) -> int:
    _require(cfg, "input", "gs", "gsys_eff")
    text = _read_text(cfg["input"])
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines[0].strip() != "freq_hz,p_on_dbm,p_off_dbm":
        raise InvalidParameter(f"expected header 'freq_hz,p_on_dbm,p_off_dbm', got {lines[0]!r}")
    g_s = cfg["gs"]
    g_sys_eff = cfg["gsys_eff"]
    bm = cfg.get("bm", 10.0)
    n1 = cfg.get("n1", 0.5)
    records = []
    for ln in lines[1:]:
        f_hz, p_on_dbm, p_off_dbm = (float(x) for x in ln.split(","))
        omega = TWO_PI * f_hz
        n4 = noise_mod.power_to_quanta(10 ** ((p_on_dbm - 30) / 10), omega, bm)
        n4_off = noise_mod.power_to_quanta(10 ** ((p_off_dbm - 30) / 10), omega, bm)
        n_a = noise_mod.added_noise(n4, n4_off, g_s, g_sys_eff, n1)
        t_sys = noise_mod.system_noise_temperature(n4_off, omega, g_sys_eff)
        records.append({"freq_hz": f_hz, "n4": n4, "n4_off": n4_off,
                        "added_noise": n_a, "t_sys_k": t_sys})
    _write_out(emit_results(records, ["freq_hz", "n4", "n4_off", "added_noise", "t_sys_k"], fmt), out)
    return EXIT_OK


# ---------------------------------------------------------------- argparse

_SCHEMAS = {
    "synth": {"epsilon": "none", "g0": "none", "g1": "none", "g2": "none",
              "g3": "none", "z_nr": "impedance", "z_ki": "impedance", "z0": "impedance"},
    "simulate": {**_DESIGN_KEYS, **_PUMP_KEYS, **_ENV_KEYS, "span": "span"},
    "map": {**_DESIGN_KEYS, **_ENV_KEYS, "fp_span": "span", "idc_start": "current",
            "idc_stop": "current", "idc_step": "current", "policy": "str",
            "freq_step": "frequency"},
    "search": {"kind": "str", "z14": "span", "z12": "span", "znr": "span",
               "fp2": "span", "z_ki": "impedance", "f0": "frequency"},
    "fit-ki": {"input": "str", "model_kind": "str", "l_k0": "inductance",
               "l_geo": "inductance"},
    "fit-qubit": {"input": "str", "fq": "frequency", "p_ref": "power"},
    "noise": {"input": "str", "gs": "ratio", "gsys_eff": "ratio",
              "bm": "frequency", "n1": "none"},
}

_HANDLERS = {
    "synth": _cmd_synth,
    "simulate": _cmd_simulate,
    "map": _cmd_map,
    "search": _cmd_search,
    "fit-ki": _cmd_fit_ki,
    "fit-qubit": _cmd_fit_qubit,
    "noise": _cmd_noise,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kipa",
        description="Kinetic-inductance parametric amplifier design toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value parameter file")
        p.add_argument("--preset", help="named design preset")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "structured"], default="csv")
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("KIPA_THREADS", "1")))
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key")
        # common shorthand overrides
        p.add_argument("--idc", help="dc bias, e.g. 0.57mA")
        p.add_argument("--fp", help="pump frequency, e.g. 16.9GHz")
        p.add_argument("--xi3", help="amplification strength as a frequency, e.g. 1.3GHz")
        p.add_argument("--span", help="frequency span start:stop:step")
        p.add_argument("--input", help="input data file (fit/noise commands)")
    return parser


def _gather_config(args, schema) -> dict:
    text = ""
    if args.config:
        text = _read_text(args.config)
    cfg = parse_config(text, schema)
    overrides = list(args.set)
    for key in ("idc", "fp", "xi3", "span", "input", "preset"):
        val = getattr(args, key, None)
        if val is not None:
            overrides.append(f"{key}={val}")
    for item in overrides:
        if "=" not in item:
            raise InvalidParameter(f"override must be KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if key not in schema:
            raise InvalidParameter(f"unknown key {key!r} for this command")
        cfg[key] = _coerce(value, schema[key])
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    schema = _SCHEMAS[args.command]
    try:
        cfg = _gather_config(args, schema)
        return _HANDLERS[args.command](cfg, args.format, args.out,
                                       max(args.threads, 1))
    except (ValidationError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, RuntimeError) as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
