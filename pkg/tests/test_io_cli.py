"""Field files, config parsing, presets, and the command-line surface."""

import math
import struct

import numpy as np
import pytest

from halfspace_ns import cli
from halfspace_ns.config import (
    ConfigError,
    build_run_config,
    parse_config_text,
    parse_extended,
    parse_length,
)
from halfspace_ns.fieldio import FieldFormatError, load_field, store_field
from halfspace_ns.fields import HalfSpaceField, TangentialField
from halfspace_ns.fixed_point import SolverConfig
from halfspace_ns.grid import Grid, desk_grid
from halfspace_ns.presets import PRESET_NAMES, make_preset


# --- field files -------------------------------------------------------------


def _sample_fields(seed=0, with_tail=True):
    grid = desk_grid(3)
    rng = np.random.default_rng(seed)
    a = TangentialField.random(grid, 3, rng, band=(0.5, 4.0))
    F = HalfSpaceField.random(grid, 9, rng, band=(0.5, 4.0), with_tail=with_tail)
    return grid, a, F


def test_half_space_round_trip_bit_exact(tmp_path):
    grid, _, F = _sample_fields(1)
    p1 = tmp_path / "f.hsf1"
    p2 = tmp_path / "g.hsf1"
    store_field(p1, F)
    back = load_field(p1)
    store_field(p2, back)
    assert p1.read_bytes() == p2.read_bytes()
    assert back.grid == grid
    assert back.tail is not None
    np.testing.assert_allclose(back.slabs, F.slabs, rtol=0, atol=1e-14)


def test_tail_flag_preserved(tmp_path):
    grid, _, F = _sample_fields(2, with_tail=False)
    path = tmp_path / "f.hsf1"
    store_field(path, F)
    back = load_field(path)
    assert back.tail is None


def test_boundary_round_trip_bit_exact(tmp_path):
    grid, a, _ = _sample_fields(3)
    p1 = tmp_path / "a.tbf1"
    p2 = tmp_path / "b.tbf1"
    store_field(p1, a)
    back = load_field(p1, grid)
    store_field(p2, back)
    assert p1.read_bytes() == p2.read_bytes()
    np.testing.assert_allclose(back.coeffs, a.coeffs, rtol=0, atol=1e-14)


def test_truncated_file_rejected_with_offset(tmp_path):
    grid, _, F = _sample_fields(4)
    path = tmp_path / "f.hsf1"
    store_field(path, F)
    raw = path.read_bytes()
    short = tmp_path / "short.hsf1"
    short.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(FieldFormatError, match="offset"):
        load_field(short)
    header_only = tmp_path / "header.hsf1"
    header_only.write_bytes(raw[:10])
    with pytest.raises(FieldFormatError, match="truncated header"):
        load_field(header_only)


def test_bad_magic_and_trailing_bytes(tmp_path):
    grid, _, F = _sample_fields(5)
    path = tmp_path / "f.hsf1"
    store_field(path, F)
    raw = path.read_bytes()
    bad = tmp_path / "bad.hsf1"
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(FieldFormatError, match="magic"):
        load_field(bad)
    fat = tmp_path / "fat.hsf1"
    fat.write_bytes(raw + b"\x00" * 8)
    with pytest.raises(FieldFormatError, match="trailing"):
        load_field(fat)


def test_version_check(tmp_path):
    grid, a, _ = _sample_fields(6)
    path = tmp_path / "a.tbf1"
    store_field(path, a)
    raw = bytearray(path.read_bytes())
    raw[4:6] = struct.pack("<H", 9)
    path.write_bytes(bytes(raw))
    with pytest.raises(FieldFormatError, match="version"):
        load_field(path)


def test_grid_mismatch_rejected(tmp_path):
    grid, _, F = _sample_fields(7)
    path = tmp_path / "f.hsf1"
    store_field(path, F)
    other = desk_grid(4)
    with pytest.raises(FieldFormatError, match="grid"):
        load_field(path, other)


# --- config files ------------------------------------------------------------


def test_parse_length_forms():
    assert parse_length("16pi") == pytest.approx(16 * math.pi)
    assert parse_length("1.5*pi") == pytest.approx(1.5 * math.pi)
    assert parse_length("12.5") == 12.5
    with pytest.raises(ValueError):
        parse_length("pie")


def test_parse_extended_inf():
    assert parse_extended("inf") == math.inf
    assert parse_extended("2") == 2.0


def test_config_text_full():
    text = """
    # solver setup
    n = 4
    q = inf
    L = 16pi
    enforce_smallness = false
    preset = single-mode
    amplitude = 0.25
    format = json-lines
    """
    rc = build_run_config(parse_config_text(text, "inline"), "inline")
    assert rc.n == 4
    assert math.isinf(rc.q)
    assert rc.L == pytest.approx(16 * math.pi)
    assert rc.enforce_smallness is False
    assert rc.preset == "single-mode"
    assert rc.format == "json-lines"
    grid = rc.grid()
    assert grid.d == 3 and grid.N == 32


def test_config_rejects_duplicates_and_unknown_keys():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("n = 3\nn = 4\n", "inline")
    with pytest.raises(ConfigError, match="unknown key"):
        build_run_config(parse_config_text("frobnicate = 1\n", "inline"), "inline")
    with pytest.raises(ConfigError, match="inline:1"):
        parse_config_text("just some words\n", "inline")
    with pytest.raises(ConfigError, match="format"):
        build_run_config(parse_config_text("format = yaml\n", "inline"), "inline")


# --- presets -------------------------------------------------------------


def test_preset_names_and_zero():
    cfg = SolverConfig(n=3)
    assert "zero" in PRESET_NAMES
    data = make_preset("zero", cfg)
    assert data.F is None
    assert np.all(data.a.coeffs == 0.0)
    with pytest.raises(ValueError):
        make_preset("nope", cfg)


def test_single_mode_scales_linearly():
    cfg = SolverConfig(n=3)
    d1 = make_preset("single-mode", cfg, amplitude=0.2)
    d2 = make_preset("single-mode", cfg, amplitude=0.4)
    nz = np.abs(d1.a.coeffs) > 0.0
    np.testing.assert_allclose(d2.a.coeffs[nz], 2.0 * d1.a.coeffs[nz], rtol=1e-12)
    target = 0.2 * cfg.calibration().delta0
    assert abs(d1.data_norm - target) <= 1e-12 * target


def test_presets_hit_requested_fraction():
    cfg = SolverConfig(n=3)
    delta0 = cfg.calibration().delta0
    for name in ("single-mode", "gaussian-bump"):
        data = make_preset(name, cfg, amplitude=0.5, seed=4)
        assert abs(data.data_norm - 0.5 * delta0) <= 1e-9 * delta0


def test_tail_preset_divergence_consistency():
    cfg = SolverConfig(n=4, q=math.inf)
    data = make_preset("tail-constant-force", cfg, amplitude=0.4, seed=9)
    assert data.F.tail is not None
    # zero-mean: the spatial mean of every component vanishes
    zero_idx = (0,) * cfg.grid.d
    assert np.abs(data.F.tail[(slice(None),) + zero_idx]).max() == 0.0


# --- command line --------------------------------------------------------


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main(["solve"]) == 1
    assert "error[usage]" in capsys.readouterr().err
    assert cli.main(["bogus-command"]) == 1
    assert cli.main(["solve", "--seed", "not-a-number"]) == 1
    err = capsys.readouterr().err
    assert "error[usage]" in err


def test_cli_data_errors(tmp_path, capsys):
    cfgp = _write(tmp_path / "c.cfg", "unknown_thing = 3\n")
    assert cli.main(["solve", "--config", cfgp]) == 2
    assert "error[data]" in capsys.readouterr().err
    assert cli.main(["solve", "--config", str(tmp_path / "missing.cfg")]) == 2
    cfgp2 = _write(tmp_path / "d.cfg", "a_file = /does/not/exist.tbf1\n")
    assert cli.main(["besov", "--config", cfgp2]) == 2


def test_cli_gate_error(tmp_path, capsys):
    cfgp = _write(tmp_path / "big.cfg", "n = 3\npreset = single-mode\namplitude = 2.0\n")
    assert cli.main(["solve", "--config", cfgp]) == 3
    assert "error[gate]" in capsys.readouterr().err


def test_cli_besov_deterministic(tmp_path, capsys):
    cfgp = _write(
        tmp_path / "b.cfg", "n = 3\npreset = gaussian-bump\namplitude = 0.3\nseed = 5\n"
    )
    out1 = tmp_path / "o1"
    out2 = tmp_path / "o2"
    assert cli.main(["besov", "--config", cfgp, "--out", str(out1)]) == 0
    assert cli.main(["besov", "--config", cfgp, "--out", str(out2)]) == 0
    capsys.readouterr()
    for name in ("block_norms.csv", "besov_summary.txt"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_cli_besov_from_files(tmp_path, capsys):
    grid, a, F = _sample_fields(11, with_tail=False)
    ap = tmp_path / "a.tbf1"
    fp = tmp_path / "f.hsf1"
    store_field(ap, a * 1e-4)
    store_field(fp, F * 1e-4)
    cfgp = _write(tmp_path / "c.cfg", f"n = 3\na_file = {ap}\nf_file = {fp}\n")
    assert cli.main(["besov", "--config", cfgp, "--out", str(tmp_path / "out")]) == 0
    text = capsys.readouterr().out
    assert "boundary_norm" in text and "forcing_norm" in text


def test_cli_json_lines_format(tmp_path, capsys):
    cfgp = _write(tmp_path / "b.cfg", "n = 3\npreset = single-mode\n")
    out = tmp_path / "o"
    assert cli.main(["besov", "--config", cfgp, "--out", str(out), "--format", "json-lines"]) == 0
    capsys.readouterr()
    lines = (out / "block_norms.jsonl").read_text().strip().splitlines()
    import json

    rows = [json.loads(line) for line in lines]
    assert all("block" in row and "boundary_weighted_norm" in row for row in rows)


def test_cli_preset_and_files_conflict(tmp_path, capsys):
    grid, a, _ = _sample_fields(12)
    ap = tmp_path / "a.tbf1"
    store_field(ap, a)
    cfgp = _write(tmp_path / "c.cfg", f"n = 3\npreset = zero\na_file = {ap}\n")
    assert cli.main(["besov", "--config", cfgp]) == 1
    assert "mutually exclusive" in capsys.readouterr().err


def test_cli_asymptotics_needs_four_dimensions(tmp_path, capsys):
    cfgp = _write(tmp_path / "c.cfg", "n = 3\npreset = single-mode\n")
    assert cli.main(["asymptotics", "--config", cfgp]) == 2
    assert "n = 4" in capsys.readouterr().err


def test_cli_solve_writes_reports(tmp_path, capsys):
    cfgp = _write(tmp_path / "s.cfg", "n = 3\npreset = single-mode\namplitude = 0.5\n")
    out = tmp_path / "out"
    assert cli.main(["solve", "--config", cfgp, "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert "converged = true" in captured.out
    table = (out / "iterations.csv").read_text().splitlines()
    assert table[0] == "iteration,difference,ratio"
    assert len(table) >= 2
    u = load_field(out / "solution.hsf1")
    assert isinstance(u, HalfSpaceField)
    summary = (out / "solve_summary.txt").read_text()
    assert "residual_fixed_point" in summary
    assert "e-" in summary  # %.17g renders the small residuals in scientific form
