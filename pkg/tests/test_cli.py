"""Runner contract: exit codes, outputs, determinism, env overrides.

Everything runs in-process through greendec.cli.main with throwaway
configs, so the suite never shells out or touches the repository tree.
"""

import json

import pytest

from greendec.cli import main
from greendec.reports import hash_bytes


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _mesh_gen_cfg(tmp_path, resolutions="8"):
    return _write(tmp_path, "mesh.ini", f"""
[mesh]
shape = disk
radius = 1.0
resolutions = {resolutions}
""")


def _solve_d_cfg(tmp_path, generator="exact", shape_block=None, trials=2):
    shape_block = shape_block or "shape = disk\nradius = 1.0\nresolution = 12"
    return _write(tmp_path, "solve.ini", f"""
[mesh]
{shape_block}

[experiment]
p = 1
generator = {generator}
trials = {trials}
seed = 0

[assert]
residual_max = 1e-8
""")


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "mesh-gen" in capsys.readouterr().out


def test_no_command_is_usage_error(capsys):
    assert main([]) == 1


def test_unknown_subcommand_is_usage_error():
    assert main(["frobnicate", "--config", "x.ini"]) == 1


def test_missing_config_is_usage_error(tmp_path, capsys):
    code = main(["mesh-gen", "--config", str(tmp_path / "absent.ini")])
    assert code == 1
    assert "config error:" in capsys.readouterr().err


def test_malformed_config_is_usage_error(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.ini", "resolution = 8\n")  # no section header
    assert main(["mesh-gen", "--config", cfg]) == 1
    assert "config error:" in capsys.readouterr().err


def test_mesh_gen_writes_outputs(tmp_path, capsys):
    cfg = _mesh_gen_cfg(tmp_path)
    out = tmp_path / "out"
    assert main(["mesh-gen", "--config", cfg, "--out-dir", str(out)]) == 0
    assert "PASS mesh-gen" in capsys.readouterr().out
    assert (out / "disk_8.mesh").exists()
    csv = (out / "mesh_gen.csv").read_text().splitlines()
    assert csv[0] == "shape,resolution,vertices,tops,mesh_width,volume"
    assert csv[1].startswith("disk,8,")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["experiment"] == "mesh-gen"
    assert manifest["config_hash"] == hash_bytes(open(cfg, "rb").read())
    assert "mesh_gen.csv" in manifest["outputs"]


def test_refinements_flag_extends_ladder(tmp_path):
    cfg = _mesh_gen_cfg(tmp_path)
    out = tmp_path / "out"
    code = main(["mesh-gen", "--config", cfg, "--out-dir", str(out),
                 "--refinements", "2"])
    assert code == 0
    assert (out / "disk_8.mesh").exists()
    assert (out / "disk_16.mesh").exists()


def test_out_dir_from_environment(tmp_path, monkeypatch):
    cfg = _mesh_gen_cfg(tmp_path)
    env_dir = tmp_path / "envout"
    monkeypatch.setenv("GREENDEC_OUT_DIR", str(env_dir))
    monkeypatch.chdir(tmp_path)
    assert main(["mesh-gen", "--config", cfg]) == 0
    assert (env_dir / "mesh_gen.csv").exists()


def test_solve_d_exact_passes(tmp_path, capsys):
    cfg = _solve_d_cfg(tmp_path)
    out = tmp_path / "out"
    assert main(["solve-d", "--config", cfg, "--out-dir", str(out)]) == 0
    assert "PASS solve-d" in capsys.readouterr().out
    lines = (out / "solve_d.csv").read_text().splitlines()
    assert lines[0].startswith("claim,")
    assert len(lines) == 3  # header + 2 trials
    assert all(line.startswith("Thm1.6,") for line in lines[1:])


def test_solve_d_harmonic_obstruction_exits_two(tmp_path, capsys):
    annulus = "shape = annulus\nr_in = 0.5\nr_out = 1.0\nresolution = 12"
    cfg = _solve_d_cfg(tmp_path, generator="harmonic",
                       shape_block=annulus, trials=1)
    out = tmp_path / "out"
    assert main(["solve-d", "--config", cfg, "--out-dir", str(out)]) == 2
    captured = capsys.readouterr()
    assert "FAIL solve-d" in captured.out
    assert "ObstructionNonExact" in captured.out
    row = (out / "solve_d.csv").read_text().splitlines()[1]
    assert "ObstructionNonExact" in row


def test_seed_flag_lands_in_manifest(tmp_path):
    cfg = _mesh_gen_cfg(tmp_path)
    out = tmp_path / "out"
    main(["mesh-gen", "--config", cfg, "--out-dir", str(out), "--seed", "5"])
    assert json.loads((out / "manifest.json").read_text())["seed"] == 5


def test_rerun_is_byte_identical(tmp_path):
    cfg = _solve_d_cfg(tmp_path)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["solve-d", "--config", cfg, "--out-dir", str(out_a)]) == 0
    assert main(["solve-d", "--config", cfg, "--out-dir", str(out_b)]) == 0
    for name in ("solve_d.csv", "manifest.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_inadmissible_sobolev_exponents_are_config_error(tmp_path, capsys):
    cfg = _write(tmp_path, "sob.ini", """
[mesh]
shape = disk
radius = 1.0
resolutions = 12

[experiment]
which = laplace
exponents = 2:2
ensemble = 5
""")
    code = main(["sobolev", "--config", cfg,
                 "--out-dir", str(tmp_path / "out")])
    assert code == 1
    assert "config error:" in capsys.readouterr().err
