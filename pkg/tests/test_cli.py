import math

import numpy as np

from stokeslab import (SpectralField, gaussian_profile,
                       make_grid, random_field, single_mode_field,
                       write_field)
from stokeslab.cli import load_config, run
from stokeslab.field import SPECTRAL


def _small_args(out, extra=()):
    return ["--out", str(out), "--nx", "32", "--ny", "32", "--nz", "65"] + list(extra)


def _forcing_file(tmp_path, nx=32, nz=65):
    g = make_grid(nx, nx, 2 * math.pi, 2 * math.pi, nz, -8.0, 8.0)
    data = np.zeros((9, g.nz, g.nx, g.ny), complex)
    f = single_mode_field(g, mode=(1, 0), profile=gaussian_profile(g, 2.0),
                          amplitude=0.1)
    data[2] = f.data[0]
    path = tmp_path / "f.sfld"
    write_field(SpectralField(g, data, SPECTRAL), path)
    return path


def test_solve_from_forcing_file(tmp_path):
    out = tmp_path / "run"
    code = run(["solve", "--input", str(_forcing_file(tmp_path)),
                "--out", str(out), "--nx", "32", "--ny", "32", "--nz", "65"])
    assert code == 0
    for name in ("u.sfld", "u_d3.sfld", "f.sfld", "trace.csv",
                 "residual.csv", "trace.png"):
        assert (out / name).exists()
    header, row = (out / "residual.csv").read_text().splitlines()
    assert "rel_div" in header
    assert "True" in row


def test_solve_missing_config(tmp_path):
    code = run(["solve", "--config", str(tmp_path / "missing.ini"),
                "--out", str(tmp_path)])
    assert code == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("# comment\nnx = 32\nseed = 3\n")
    parsed = load_config(str(cfg))
    assert parsed == {"nx": "32", "seed": "3"}
    bad = tmp_path / "bad.ini"
    bad.write_text("just words\n")
    code = run(["norm", "--config", str(bad), "--input", "x",
                "--out", str(tmp_path)])
    assert code == 2


def test_norm_command(tmp_path, grid, rng):
    f = random_field(grid, rng)
    path = tmp_path / "u.sfld"
    write_field(f, path)
    out = tmp_path / "norm"
    code = run(["norm", "--input", str(path), "--out", str(out)])
    assert code == 0
    assert (out / "norm.csv").exists()
    assert (out / "norm_total.csv").exists()
    assert (out / "norm.png").exists()
    total = float((out / "norm_total.csv").read_text().splitlines()[1])
    assert total > 0.0


def test_norm_missing_input(tmp_path):
    code = run(["norm", "--input", str(tmp_path / "nothing.sfld"),
                "--out", str(tmp_path)])
    assert code == 2


def test_verify_kernel_command(tmp_path):
    out = tmp_path / "vk"
    code = run(["verify-kernel", "--kind", "D0", "--trials", "2",
                "--jmax", "3"] + _small_args(out))
    assert code == 0
    fit = (out / "kernel_fit.csv").read_text().splitlines()[1].split(",")
    assert abs(float(fit[1]) - (-2.0)) <= 0.15
    assert (out / "kernel.csv").exists()
    assert (out / "kernel.png").exists()


def test_verify_bony_command(tmp_path):
    out = tmp_path / "vb"
    code = run(["verify-bony", "--trials", "3"]
               + _small_args(out, ["--nz", "33"]))
    assert code == 0
    lines = (out / "bony.csv").read_text().splitlines()
    assert len(lines) == 4
    worst = max(float(l.split(",")[1]) for l in lines[1:])
    assert worst <= 1e-11


def test_scaling_check_command(tmp_path):
    out = tmp_path / "sc"
    code = run(["scaling-check"] + _small_args(out))
    assert code == 0
    assert (out / "scaling.csv").exists()


def test_residual_command(tmp_path):
    fpath = _forcing_file(tmp_path)
    out = tmp_path / "run"
    assert run(["solve", "--input", str(fpath), "--out", str(out),
                "--nx", "32", "--ny", "32", "--nz", "65"]) == 0
    rout = tmp_path / "res"
    code = run(["residual", "--input", str(out / "u.sfld"),
                "--d3", str(out / "u_d3.sfld"), "--forcing", str(fpath),
                "--out", str(rout)])
    assert code == 0
    assert (rout / "residual.csv").exists()


def test_hypothesis_command(tmp_path):
    out = tmp_path / "hyp"
    code = run(["hypothesis", "--seed", "3", "--amplitude", "0.5"]
               + _small_args(out))
    assert code == 0
    lines = (out / "hypothesis.csv").read_text().splitlines()
    assert lines[-1].startswith("eta,")


def test_unknown_subcommand():
    assert run(["no-such-command"]) == 2


def test_verify_kernel_thread_count_is_bitwise_invisible(tmp_path):
    outs = {}
    for threads in ("1", "4"):
        out = tmp_path / ("t" + threads)
        code = run(["verify-kernel", "--kind", "D1", "--trials", "2",
                    "--jmax", "3", "--seed", "9", "--threads", threads]
                   + _small_args(out))
        assert code == 0
        outs[threads] = out
    for name in ("kernel.csv", "kernel_fit.csv", "kernel.png"):
        assert ((outs["1"] / name).read_bytes()
                == (outs["4"] / name).read_bytes())
