"""CLI surface: every subcommand in-process, outputs against the library."""

import json

import pytest

from fibmachine import (
    ConstantTail,
    all_ones,
    eigen_residual,
    encode,
    stationary_measure,
    transition_terms,
)
from fibmachine.cli import fmt, fmt_complex, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def cfg_file(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


HALF_DOC = {"prob_seq": {"variant": "constant_tail", "prefix": [], "param": 0.5}}


# ---------------------------------------------------------------------------
# words


def test_encode_decode_succ(capsys):
    assert run(capsys, "encode", "12") == (0, "10101\n", "")
    assert run(capsys, "decode", "10101") == (0, "12\n", "")
    code, out, _ = run(capsys, "succ", "100101")  # 17 -> 18
    assert code == 0 and out == encode(18) + "\n"


def test_succ_methods_and_verbose(capsys):
    code, out, _ = run(capsys, "succ", "101", "--method", "carry", "--verbose")
    assert code == 0
    assert "carry branch" in out and out.endswith("1000\n")
    code, out, _ = run(capsys, "succ", "101", "--method", "transducer", "--verbose")
    assert code == 0
    assert "transducer path" in out and out.endswith("1000\n")


def test_decode_rejects_inadmissible(capsys):
    code, out, err = run(capsys, "decode", "11")
    assert code == 2 and out == "" and "error:" in err


def test_encode_capacity_exit(capsys):
    code, _, err = run(capsys, "encode", str(2**64))
    assert code == 3 and "error:" in err


# ---------------------------------------------------------------------------
# chain


def test_chain_row_matches_library(capsys, tmp_path):
    cfg = cfg_file(tmp_path, HALF_DOC)
    code, out, _ = run(capsys, "chain", "row", "4", "--config", cfg)
    assert code == 0
    p = ConstantTail((), 0.5)
    want_lines = [
        f"{t} {fmt(f.value(p))} {f.text()}" for t, f in transition_terms(4)
    ]
    assert out.splitlines() == want_lines
    assert "0 0.125 p1*p2*(1-p3)" in want_lines


def test_chain_matrix_csv(capsys, tmp_path):
    out_file = tmp_path / "m.csv"
    cfg = cfg_file(tmp_path, HALF_DOC)
    code, out, _ = run(
        capsys, "chain", "matrix", "3", "--config", cfg, "--out", str(out_file)
    )
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "from,to,prob"
    assert lines[1] == "0,0,0.5"
    assert lines[-1].startswith("# leak from state 4:")


def test_chain_matrix_budget_exit(capsys):
    code, _, err = run(capsys, "chain", "matrix", "32")
    assert code == 3 and "error:" in err


def test_chain_simulate_deterministic(capsys, tmp_path):
    cfg = cfg_file(tmp_path, HALF_DOC)
    args = ("chain", "simulate", "--steps", "200", "--seed", "9", "--config", cfg)
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second and first[0] == 0
    assert "final_state" in first[1]
    # the deterministic machine walks straight up
    code, out, _ = run(capsys, "chain", "simulate", "--steps", "50")
    assert code == 0 and "final_state 50" in out and "max_state 50" in out


def test_chain_classify(capsys, tmp_path):
    code, out, _ = run(capsys, "chain", "classify")
    assert code == 0 and out.startswith("Transient:")
    cfg = cfg_file(tmp_path, HALF_DOC)
    code, out, _ = run(capsys, "chain", "classify", "--config", cfg)
    assert code == 0 and out.startswith("NullRecurrent:")


def test_chain_stationary(capsys):
    code, out, _ = run(capsys, "chain", "stationary", "7")
    assert code == 0
    sm = stationary_measure(7, all_ones())
    assert f"partial_sum {fmt(sm.partial_sum)}" in out
    assert "unsummable false" in out
    assert "residual 0" in out


# ---------------------------------------------------------------------------
# spectrum


def test_spectrum_orbit_fixed_point(capsys):
    code, out, _ = run(capsys, "spectrum", "orbit", "1", "0", "--levels", "5")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 6
    assert lines[0] == f"0 {fmt_complex(1 + 0j)}"
    assert all(line.endswith(fmt_complex(1 + 0j)) for line in lines)


def test_spectrum_member_inside_and_escaped(capsys):
    code, out, _ = run(capsys, "spectrum", "member", "0", "0")
    assert code == 0
    assert "E inside" in out
    assert "point_spectrum inside (running max 1)" in out
    code, out, _ = run(capsys, "spectrum", "member", "2", "0")
    assert code == 0
    assert "E escaped at level" in out and "point_spectrum escaped" in out


def test_spectrum_connectivity(capsys, tmp_path):
    code, out, _ = run(capsys, "spectrum", "connectivity")
    assert code == 0 and out == "Inconclusive\n"
    doc = {"prob_seq": {"variant": "constant_tail", "prefix": [1.0, 1.0, 0.4], "param": 0.4}}
    cfg = cfg_file(tmp_path, doc)
    code, out, _ = run(capsys, "spectrum", "connectivity", "--config", cfg)
    assert code == 0 and out == "NonConnected at level 3 (modulus 1.5)\n"


def test_spectrum_residual(capsys):
    code, out, _ = run(capsys, "spectrum", "residual", "1", "0", "8")
    assert code == 0
    res = eigen_residual(1.0, all_ones(), 8)
    lines = out.splitlines()
    assert lines[0] == f"value {fmt(res.value)}"
    assert lines[1] == "interior 0"
    assert lines[2] == f"bound {fmt(res.bound)}"
    assert lines[3] == "sup_norm 1"


# ---------------------------------------------------------------------------
# render and repro


SMALL_RENDER = {
    "prob_seq": {"variant": "constant_tail", "prefix": [], "param": 0.5},
    "grid": {"pixels": 20, "width": 5.0, "height": 5.0},
    "escape": {"max_level": 12},
}


def test_render_ppm_worker_independence(capsys, tmp_path):
    cfg = cfg_file(tmp_path, SMALL_RENDER)
    one = tmp_path / "a.ppm"
    many = tmp_path / "b.ppm"
    code, out, _ = run(capsys, "render", "--config", cfg, "--out", str(one))
    assert code == 0 and out.startswith(f"wrote {one} (20x20, ")
    code, _, _ = run(
        capsys, "render", "--config", cfg, "--out", str(many), "--workers", "4"
    )
    assert code == 0
    assert one.read_bytes() == many.read_bytes()
    assert one.read_bytes().startswith(b"P6\n20 20\n255\n")


def test_render_csv_and_png(capsys, tmp_path):
    pytest.importorskip("PIL.Image")
    cfg = cfg_file(tmp_path, SMALL_RENDER)
    csv_out = tmp_path / "r.csv"
    png_out = tmp_path / "r.png"
    assert run(capsys, "render", "--config", cfg, "--out", str(csv_out), "--format", "csv")[0] == 0
    assert run(capsys, "render", "--config", cfg, "--out", str(png_out), "--format", "png")[0] == 0
    assert csv_out.read_text().count("\n") == 400
    assert png_out.read_bytes().startswith(b"\x89PNG")


def test_repro_single_panel_and_figure_alias(capsys, tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    code, out, _ = run(
        capsys, "repro", "3", "--out-dir", str(a_dir), "--pixels", "12"
    )
    assert code == 0 and "panel03.ppm" in out
    code, _, _ = run(
        capsys, "repro", "fig4-3", "--out-dir", str(b_dir), "--pixels", "12"
    )
    assert code == 0
    assert (a_dir / "panel03.ppm").read_bytes() == (b_dir / "panel03.ppm").read_bytes()


def test_repro_bad_target_exit(capsys, tmp_path):
    code, _, err = run(capsys, "repro", "fig9-1", "--out-dir", str(tmp_path))
    assert code == 2 and "error:" in err


def test_bad_config_exit(capsys, tmp_path):
    bad = cfg_file(tmp_path, {"prob_seq": {"variant": "constant_tail"}, "oops": 1})
    code, _, err = run(capsys, "chain", "classify", "--config", bad)
    assert code == 2 and "error:" in err
