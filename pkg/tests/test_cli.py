import json
import random
import subprocess
import sys

import pytest

from sphereshape.cli import g6, main

SMALL = ["--m", "3", "--N", "4", "--Emax", "28"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_g6():
    assert g6(1096.9213) == "1096.92"
    assert g6(19) == "19"
    assert g6(2**168) == "3.74144e+50"
    assert g6(float("inf")) == "inf"


def test_trellis_info_text(capsys):
    code, out, _ = run(capsys, "trellis-info", *SMALL)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "alphabet      (1, 3, 5, 7)"
    assert lines[2] == "|S|           19"
    assert lines[3] == "k             4"
    assert lines[5] == "P_A           1:0.578947  3:0.368421  5:0.0526316  7:0"
    assert lines[6] == "E_av          20.8421"


def test_trellis_info_running_example(capsys):
    code, out, _ = run(capsys, "trellis-info", "--m", "3", "--N", "96", "--Emax", "1120")
    assert code == 0
    assert "k             168\n" in out
    assert "R_s           1.75027 bit/amp" in out
    assert "E_av          1096.92\n" in out
    assert "G_s           1.10" in out


def test_trellis_info_json(capsys):
    code, out, _ = run(capsys, "trellis-info", "--m", "3", "--N", "32", "--Emax", "408", "--json")
    info = json.loads(out)
    assert code == 0 and info["k"] == 56
    assert info["Rs"] == pytest.approx(1.7557, abs=1e-4)
    assert info["E_av"] == pytest.approx(384, abs=0.5)
    assert info["complexity"]["SM"]["bit_ops_per_dim"] == 155952


def test_complexity_golden(capsys):
    code, out, _ = run(capsys, "complexity", "--N", "96", "--Emax", "1120", "--nm", "12", "--np", "8")
    assert code == 0
    assert out.splitlines()[:3] == ["method,bit_ops_per_dim,storage_bits", "ESS,36,250260", "Laroia1,52,250260"]
    code, out, _ = run(capsys, "complexity", "--N", "96", "--Emax", "1120", "--method", "ESS")
    assert out.splitlines()[1].startswith("ESS,507,")


def test_wachsmann_golden(capsys):
    code, out, _ = run(capsys, "wachsmann", "--hx", "2.25,3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "Hx,delta_snr_db,code_rate,gamma"
    assert lines[1].startswith("2.25,0.0310") and lines[1].endswith(",0.75,0.25")
    assert lines[2].startswith("3.0,0.987")
    code, out, _ = run(capsys, "wachsmann", "--optimum")
    assert "H(X)*        2.254" in out


def test_rate_loss_sweep_golden(capsys, tmp_path):
    path = tmp_path / "rl.csv"
    code, _, err = run(capsys, "rate-loss-sweep", "--N-range", "16,96", "-o", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "N,rate_loss_sphere,rate_loss_shell,rate_loss_cc"
    assert len(lines) == 2 and lines[1].startswith("96,")
    assert "skipped: N=16" in err


def test_shape_worked_example(capsys, tmp_path):
    src = tmp_path / "in.hex"
    src.write_text("7\n")
    code, out, _ = run(capsys, "shape", *SMALL, str(src))
    assert code == 0 and out == "1 3 1 3\n"


def test_shape_deshape_identity(capsys, tmp_path):
    rng = random.Random(5)
    args = ["--m", "3", "--N", "96", "--Emax", "1120"]
    hexfile = tmp_path / "in.hex"
    hexfile.write_text("".join(f"{rng.getrandbits(168):042x}\n" for _ in range(10)))
    amps, back, again = tmp_path / "a.txt", tmp_path / "b.hex", tmp_path / "c.txt"
    assert main(["shape", *args, str(hexfile), "-o", str(amps)]) == 0
    assert main(["deshape", *args, str(amps), "-o", str(back)]) == 0
    assert back.read_bytes() == hexfile.read_bytes()
    assert main(["shape", *args, str(back), "-o", str(again)]) == 0
    assert again.read_bytes() == amps.read_bytes()
    for line in amps.read_text().splitlines():
        vals = [int(v) for v in line.split()]
        assert len(vals) == 96 and sum(v * v for v in vals) <= 1120


def test_deshape_errors(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 3 1 3\n1 9 1 1\n")
    code, out, err = run(capsys, "deshape", *SMALL, str(bad))
    assert code == 2 and "line 2" in err
    bad.write_text("7 7 1 1\n")  # energy 100 > 28
    code, _, err = run(capsys, "deshape", *SMALL, str(bad))
    assert code == 2 and "line 1" in err
    bad.write_text("5 1 1 1\n")  # index 18 is outside the 4-bit range
    code, _, err = run(capsys, "deshape", *SMALL, str(bad))
    assert code == 2 and "line 1" in err


def test_shape_errors(capsys, tmp_path):
    bad = tmp_path / "bad.hex"
    bad.write_text("3\nzz\n")
    code, _, err = run(capsys, "shape", *SMALL, str(bad))
    assert code == 2 and "line 2" in err
    bad.write_text("10\n")
    code, _, err = run(capsys, "shape", *SMALL, str(bad))
    assert code == 2 and "4 bits" in err


def test_exit_codes(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["trellis-info", "--m", "3", "--N", "4"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["trellis-info", *SMALL, "--bogus"])
    assert exc.value.code == 1
    assert main(["trellis-info", "--m", "3", "--N", "4", "--Emax", "3"]) == 2
    assert main(["trellis-info", *SMALL, "--nm", "4"]) == 1
    assert main(["complexity", "--N", "96"]) == 1
    capsys.readouterr()


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "sphereshape.cli", "trellis-info", *SMALL],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "|S|           19" in res.stdout


def _tiny_config(path, **over):
    cfg = dict(shaping="ess", m=3, N=96, Emax=1120, alpha=1, code_rate="5/6", seed=7,
               snr_db=[12.0, 13.0], max_frames=40, target_errors=5)
    cfg.update(over)
    path.write_text(json.dumps(cfg))
    return path


def test_simulate_deterministic(capsys, tmp_path):
    cfg = _tiny_config(tmp_path / "cfg.json")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", str(cfg), "-o", str(a)]) == 0
    _, err = capsys.readouterr()
    assert main(["simulate", str(cfg), "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "snr_db,frames,frame_errors,fer,ci_low,ci_high"
    assert "frame errors" in err  # progress goes to stderr only
    meta = json.loads((tmp_path / "a.json").read_text())
    assert meta["seed"] == 7 and meta["config"]["code_rate"] == "5/6"
    assert meta["config"]["snr_db"] == [12.0, 13.0]


def test_simulate_zero_noise(capsys, tmp_path):
    cfg = _tiny_config(tmp_path / "cfg.json", snr_db=[300.0], max_frames=20)
    out = tmp_path / "z.csv"
    assert main(["simulate", str(cfg), "-o", str(out), "--seed", "3"]) == 0
    rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
    assert rows and all(r[2] == "0" and float(r[3]) == 0.0 for r in rows)
    assert json.loads((tmp_path / "z.json").read_text())["seed"] == 3


def test_simulate_bad_config(capsys, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"m": 3.5, "snr_db": 4, "colour": "red"}))
    code, _, err = run(capsys, "simulate", str(cfg))
    assert code == 2
    for part in ("colour", "snr_db", "m must", "max_frames"):
        assert part in err
    cfg.write_text("{not json")
    assert run(capsys, "simulate", str(cfg))[0] == 2
    assert run(capsys, "simulate", str(tmp_path / "missing.json"))[0] == 2
