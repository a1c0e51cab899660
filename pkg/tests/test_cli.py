import json
import math

import numpy as np
import pytest

from kipa.cli import (
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    emit_results,
    format_number,
    main,
    parse_config,
    parse_quantity,
    parse_span,
)
from kipa.errors import ConfigError, InvalidParameter
from kipa.material import frequency_shift
from kipa.presets import NBTIN_NANOWIRE, PAPER_DEVICE_BIAS, design_preset

TWO_PI = 2 * math.pi


def test_parse_quantity_units():
    assert parse_quantity("8.4GHz") == (8.4e9, "frequency")
    assert parse_quantity("56 ohm") == (56.0, "impedance")
    assert parse_quantity("330fF") == (330e-15, "capacitance")
    assert parse_quantity("0.57mA") == (0.57e-3 if True else 0, "current")
    assert parse_quantity("1.2") == (1.2, "none")
    val, kind = parse_quantity("-29.6dBm")
    assert kind == "power"
    assert val == pytest.approx(10 ** ((-29.6 - 30) / 10))
    val, kind = parse_quantity("20dB")
    assert (val, kind) == (pytest.approx(100.0), "ratio")
    with pytest.raises(InvalidParameter):
        parse_quantity("56 bogus")
    with pytest.raises(InvalidParameter):
        parse_quantity("notanumber")


def test_parse_span():
    assert parse_span("7.9GHz:8.9GHz:1MHz") == (7.9e9, 8.9e9, 1e6)
    with pytest.raises(InvalidParameter):
        parse_span("7.9GHz:8.9GHz")
    with pytest.raises(InvalidParameter):
        parse_span("8.9GHz:7.9GHz:1MHz")


def test_parse_config_minimal_synth_defaults():
    cfg = parse_config("epsilon = 0.0625\nz_nr = 60 ohm\nz_ki = 180 ohm\n",
                       {"epsilon": "none", "z_nr": "impedance", "z_ki": "impedance"})
    assert cfg == {"epsilon": 0.0625, "z_nr": 60.0, "z_ki": 180.0}


def test_parse_config_unknown_key_has_location():
    with pytest.raises(ConfigError) as err:
        parse_config("epsilon = 0.06\nbogus = 1\n", {"epsilon": "none"})
    assert "line 2" in str(err.value)
    assert "bogus" in str(err.value)


def test_parse_config_rejects_negative_impedance():
    with pytest.raises(ConfigError) as err:
        parse_config("z_nr = -5 ohm\n", {"z_nr": "impedance"})
    assert "z_nr" in str(err.value)


def test_parse_config_comments_and_blank_lines():
    text = "# comment line\n\nepsilon = 0.05  # trailing\n"
    cfg = parse_config(text, {"epsilon": "none"})
    assert cfg == {"epsilon": 0.05}


def test_paper_device_preset_values():
    design = design_preset("paper-device")
    assert design.line_quarter.z_c == 80.0
    assert design.line_half.z_c == 30.0
    assert design.line_ki_quarter.z_c == 180.0
    assert design.c_shunt == pytest.approx(330e-15)
    z_nr = math.sqrt(design.inductance_at_bias(PAPER_DEVICE_BIAS) / design.c_shunt)
    assert z_nr == pytest.approx(56.0, abs=0.1)
    with pytest.raises(InvalidParameter):
        design_preset("unknown-device")


def test_emit_empty_records_header_only():
    assert emit_results([], ["a", "b"], "csv") == "a,b\n"


def test_emit_single_row():
    out = emit_results([{"freq_hz": 8.4e9, "gain_db": 17.25}],
                       ["freq_hz", "gain_db"], "csv")
    assert out == "freq_hz,gain_db\n8400000000,17.25\n"


def test_emit_parse_round_trip_twelve_digits():
    rng = np.random.default_rng(1)
    records = [{"x": float(v)} for v in rng.uniform(-1e9, 1e9, 50)]
    payload = emit_results(records, ["x"], "csv")
    lines = payload.strip().splitlines()[1:]
    for line, rec in zip(lines, records):
        assert float(line) == pytest.approx(rec["x"], rel=1e-11)
        # 12-significant-digit serialization re-emits identically
        assert format_number(float(line)) == line


def test_emit_structured_mirrors_csv():
    records = [{"a": 1.5, "b": 2}]
    data = json.loads(emit_results(records, ["a", "b"], "structured"))
    assert data["columns"] == ["a", "b"]
    assert data["records"] == [{"a": 1.5, "b": 2}]


def test_synth_command_end_to_end(tmp_path, capsys):
    cfg = tmp_path / "synth.cfg"
    cfg.write_text("epsilon = 0.0625\nz_nr = 60 ohm\nz_ki = 180 ohm\nz0 = 50 ohm\n")
    rc = main(["synth", "--config", str(cfg)])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    header, row = out.strip().splitlines()
    vals = dict(zip(header.split(","), (float(x) for x in row.split(","))))
    assert vals["z_ref"] == pytest.approx(82.7, abs=0.1)
    assert vals["z_half"] == pytest.approx(33.9, abs=0.2)


def test_synth_command_validation_exit_code(tmp_path, capsys):
    cfg = tmp_path / "synth.cfg"
    cfg.write_text("epsilon = 0.0625\nz_nr = -5 ohm\nz_ki = 180 ohm\n")
    assert main(["synth", "--config", str(cfg)]) == EXIT_VALIDATION


def test_synth_numerical_exit_code(tmp_path):
    cfg = tmp_path / "synth.cfg"
    cfg.write_text("epsilon = 1e-8\nz_nr = 60 ohm\nz_ki = 180 ohm\n")
    assert main(["synth", "--config", str(cfg)]) == EXIT_NUMERICAL


def test_missing_input_io_exit_code(tmp_path):
    assert main(["fit-ki", "--input", str(tmp_path / "nope.csv")]) == EXIT_IO


def test_simulate_command_with_preset_and_overrides(tmp_path):
    out = tmp_path / "spec.csv"
    rc = main(["simulate", "--preset", "paper-device", "--idc", "0.57mA",
               "--fp", "16.9GHz", "--xi3", "2.0GHz",
               "--span", "8.2GHz:8.6GHz:10MHz", "--out", str(out)])
    assert rc == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "freq_hz,re_s11,im_s11,gain_db"
    assert len(lines) == 1 + 40
    first = lines[1].split(",")
    assert float(first[0]) == 8.2e9
    gain = float(first[3])
    re_s11, im_s11 = float(first[1]), float(first[2])
    assert gain == pytest.approx(20 * math.log10(abs(complex(re_s11, im_s11))), abs=1e-6)


def test_simulate_byte_identical_runs(tmp_path):
    args = ["simulate", "--preset", "paper-device", "--fp", "16.9GHz",
            "--xi3", "1.5GHz", "--span", "8.3GHz:8.5GHz:20MHz"]
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(args + ["--out", str(path)]) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_fit_ki_command(tmp_path, capsys):
    data = tmp_path / "shift.csv"
    lines = ["i_dc_A,dfrac"]
    for i in np.linspace(0.05e-3, 1.1e-3, 20):
        lines.append(f"{i},{frequency_shift(NBTIN_NANOWIRE, i)}")
    data.write_text("\n".join(lines) + "\n")
    rc = main(["fit-ki", "--input", str(data), "--set", "model_kind=quartic",
               "--set", "l_k0=0.8nH", "--set", "l_geo=0.2nH"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    header, row = out.strip().splitlines()
    vals = dict(zip(header.split(","), row.split(",")))
    assert float(vals["i_star2_a"]) == pytest.approx(3.25e-3, rel=1e-3)
    assert float(vals["i_star4_a"]) == pytest.approx(1.7e-3, rel=1e-3)


def test_noise_command(tmp_path, capsys):
    spectra = tmp_path / "spectra.csv"
    spectra.write_text("freq_hz,p_on_dbm,p_off_dbm\n8.4e9,-62.0,-75.0\n")
    rc = main(["noise", "--input", str(spectra), "--set", "gs=20dB",
               "--set", "gsys_eff=75dB"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    header, row = out.strip().splitlines()
    vals = dict(zip(header.split(","), (float(x) for x in row.split(","))))
    from scipy.constants import hbar, k as k_B
    w = TWO_PI * 8.4e9
    n4 = 10 ** ((-62.0 - 30) / 10) / (hbar * w * 10.0)
    n4_off = 10 ** ((-75.0 - 30) / 10) / (hbar * w * 10.0)
    assert vals["n4"] == pytest.approx(n4, rel=1e-9)
    expected_na = (n4 - n4_off) / (100.0 * 10 ** 7.5) + 0.5 / 100.0 - 0.5
    assert vals["added_noise"] == pytest.approx(expected_na, rel=1e-9)
    assert vals["t_sys_k"] == pytest.approx(n4_off * hbar * w / (k_B * 10 ** 7.5), rel=1e-9)


def test_fit_qubit_command(tmp_path, capsys):
    from kipa.noise import QubitCalibration, drive_strength, qubit_s21
    gamma_1 = TWO_PI * 3.35e6
    a_in = 10 ** (-82 / 10)
    cal = QubitCalibration(TWO_PI * 8.4e9, gamma_1e=gamma_1, gamma_phi=TWO_PI * 1.06e3)
    rows = ["detuning_hz,p_vna_dbm,re_s21,im_s21"]
    for p_dbm in np.arange(-95.0, -56.0, 4.0):
        p_vna = 10 ** ((p_dbm - 30) / 10)
        om = drive_strength(gamma_1, a_in * p_vna, TWO_PI * 8.4e9)
        for d_hz in np.linspace(-12e6, 12e6, 31):
            s = qubit_s21(cal, TWO_PI * d_hz, om)
            rows.append(f"{d_hz},{p_dbm},{s.real},{s.imag}")
    data = tmp_path / "qubit.csv"
    data.write_text("\n".join(rows) + "\n")
    rc = main(["fit-qubit", "--input", str(data), "--set", "fq=8.4GHz"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    header, row = out.strip().splitlines()
    vals = dict(zip(header.split(","), (float(x) for x in row.split(","))))
    assert vals["gamma1_hz"] == pytest.approx(3.35e6, rel=1e-2)
    assert vals["a_in_db"] == pytest.approx(-82.0, abs=0.1)


def test_map_command_small_grid(tmp_path):
    out = tmp_path / "map.csv"
    cfg = tmp_path / "map.cfg"
    cfg.write_text(
        "preset = paper-device\n"
        "fp_span = 16.8GHz:17.0GHz:100MHz\n"
        "idc_start = 0.57mA\nidc_stop = 0.57mA\nidc_step = 0.05mA\n"
        "policy = xi3\nfreq_step = 4MHz\n"
    )
    rc = main(["map", "--config", str(cfg), "--out", str(out)])
    assert rc == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "fp_hz,idc_a,bandwidth_hz,peaks,ripple_db"
    assert len(lines) == 1 + 3  # inclusive pump grid x one bias


def test_search_command_single_point(tmp_path):
    out = tmp_path / "search.csv"
    cfg = tmp_path / "search.cfg"
    cfg.write_text(
        "kind = three-stage\n"
        "z14 = 80ohm:80ohm:10ohm\nz12 = 60ohm:60ohm:10ohm\n"
        "znr = 50ohm:50ohm:10ohm\nfp2 = 8.0GHz:8.0GHz:0.25GHz\n"
    )
    rc = main(["search", "--config", str(cfg), "--out", str(out)])
    assert rc == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "z14,z12,znr,fp2_hz,bandwidth_hz,xi3_hz,eta"
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), (float(x) for x in lines[1].split(","))))
    assert row["eta"] == pytest.approx(row["bandwidth_hz"] / row["xi3_hz"], rel=1e-9)
