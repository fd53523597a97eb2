import filecmp
import os

import pytest

from afcmem.cli import main
from afcmem.config import (
    ConfigError,
    canonical_text,
    config_hash,
    default_config,
    parse_config_text,
)


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_config_canonical_round_trip():
    cfg = default_config()
    text = canonical_text(cfg)
    assert canonical_text(parse_config_text(text)) == text


def test_config_hash_pinned():
    # reproduction runs stamp this hash into every CSV; changing a default
    # must show up here first
    assert config_hash(default_config()) == "2684be655112"


def test_config_override_and_types():
    cfg = parse_config_text("[simulate]\ntrials = 5000\ninput_state = R\n"
                            "[memory]\neta = 0.05\n")
    assert cfg["simulate"]["trials"] == 5000
    assert cfg["simulate"]["input_state"] == "R"
    assert cfg["memory"]["eta"] == 0.05
    assert cfg["schedule"]["n_modes"] == 5  # untouched sections keep defaults


def test_config_rejects_unknown_names():
    with pytest.raises(ConfigError):
        parse_config_text("[memory]\netaa = 0.05\n")
    with pytest.raises(ConfigError):
        parse_config_text("[warp]\nspeed = 9\n")
    with pytest.raises(ConfigError):
        parse_config_text("[simulate]\ntrials = lots\n")


def test_show_defaults_round_trips(capsys):
    assert main(["show-defaults"]) == 0
    printed = capsys.readouterr().out
    assert canonical_text(parse_config_text(printed)) == canonical_text(default_config())


def test_predict_writes_band(tmp_path):
    out = os.path.join(tmp_path, "p")
    assert main(["predict", "--out", out, "--mu", "0.8,1.4"]) == 0
    lines = _read(os.path.join(out, "predict_fidelity.csv")).decode().splitlines()
    rows = [l for l in lines if l and not l.startswith("#")]
    assert rows[0] == "mu,band_low,fidelity,band_high"
    assert len(rows) == 3
    lo, mid, hi = map(float, rows[1].split(",")[1:])
    assert lo < mid < hi


def test_stochastic_commands_require_seed(tmp_path, capsys):
    out = os.path.join(tmp_path, "s")
    assert main(["simulate", "--out", out]) == 2
    assert "--seed" in capsys.readouterr().err


def test_seed_must_fit_uint64(tmp_path):
    out = os.path.join(tmp_path, "s")
    assert main(["simulate", "--out", out, "--seed", str(2 ** 64)]) == 2


def test_bad_flags_rejected(tmp_path):
    out = os.path.join(tmp_path, "x")
    assert main(["simulate", "--out", out, "--seed", "1", "--mu", "abc"]) == 2
    assert main(["simulate", "--out", out, "--seed", "1", "--trials", "0"]) == 2
    assert main(["predict", "--out", out, "--config", "/nonexistent.ini"]) == 2


def test_bad_config_value_exits_2(tmp_path):
    cfg = os.path.join(tmp_path, "bad.ini")
    with open(cfg, "w") as fh:
        fh.write("[memory]\neta = 1.7\n")
    assert main(["simulate", "--out", os.path.join(tmp_path, "o"),
                 "--seed", "1", "--config", cfg]) == 2


def test_simulate_outputs_and_determinism(tmp_path):
    cfg = os.path.join(tmp_path, "small.ini")
    with open(cfg, "w") as fh:
        fh.write("[simulate]\ntrials = 20000\n")
    out_a = os.path.join(tmp_path, "a")
    out_b = os.path.join(tmp_path, "b")
    out_c = os.path.join(tmp_path, "c")
    assert main(["simulate", "--config", cfg, "--out", out_a, "--seed", "11"]) == 0
    assert main(["simulate", "--config", cfg, "--out", out_b, "--seed", "11"]) == 0
    assert main(["simulate", "--config", cfg, "--out", out_c, "--seed", "12"]) == 0
    names = ["histogram_parallel.csv", "histogram_orthogonal.csv",
             "histogram_noise.csv", "estimate.csv", "transmitted.csv"]
    for name in names:
        assert os.path.exists(os.path.join(out_a, name))
        assert _read(os.path.join(out_a, name)) == _read(os.path.join(out_b, name))
    assert _read(os.path.join(out_a, "histogram_parallel.csv")) != _read(
        os.path.join(out_c, "histogram_parallel.csv"))


def test_simulate_estimate_contents(tmp_path):
    out = os.path.join(tmp_path, "est")
    assert main(["simulate", "--out", out, "--seed", "7", "--trials", "50000"]) == 0
    text = _read(os.path.join(out, "estimate.csv")).decode()
    for q in ("eta", "p_n", "fidelity", "fidelity_mode_1", "fidelity_mode_5"):
        assert f"\n{q}," in text


def test_tomography_from_counts_file(tmp_path):
    counts = os.path.join(tmp_path, "counts.csv")
    ideal = {"H": ("H", 1000, "V", 0), "V": ("V", 1000, "H", 0),
             "D": ("D", 1000, "A", 0), "R": ("R", 1000, "L", 0)}
    with open(counts, "w") as fh:
        fh.write("input,setting,counts\n")
        for inp, (s1, n1, s2, n2) in ideal.items():
            rest = {"H": 500, "V": 500, "D": 500, "A": 500, "R": 500, "L": 500}
            rest[s1], rest[s2] = n1, n2
            for s, n in rest.items():
                fh.write(f"{inp},{s},{n}\n")
    cfg = os.path.join(tmp_path, "t.ini")
    with open(cfg, "w") as fh:
        fh.write(f"[tomography]\ncounts_file = {counts}\nresamples = 100\n")
    out = os.path.join(tmp_path, "tomo")
    assert main(["tomography", "--config", cfg, "--out", out, "--seed", "3"]) == 0
    fid_rows = [l for l in _read(os.path.join(out, "state_fidelity.csv")).decode().splitlines()
                if l and not l.startswith("#")][1:]
    assert len(fid_rows) == 4
    for row in fid_rows:
        assert float(row.split(",")[1]) > 0.99  # noiseless counts, pure inputs
    chi_text = _read(os.path.join(out, "chi.csv")).decode()
    chi00 = float(next(l for l in chi_text.splitlines() if "chi00" in l).split(":")[1])
    assert chi00 > 0.99


def test_tomography_counts_file_validation(tmp_path):
    bad = os.path.join(tmp_path, "bad.csv")
    with open(bad, "w") as fh:
        fh.write("input,setting,counts\nH,Q,100\n")
    cfg = os.path.join(tmp_path, "t.ini")
    with open(cfg, "w") as fh:
        fh.write(f"[tomography]\ncounts_file = {bad}\n")
    assert main(["tomography", "--config", cfg, "--out",
                 os.path.join(tmp_path, "o"), "--seed", "3"]) == 2


def test_tomography_zero_counts_exits_3(tmp_path):
    counts = os.path.join(tmp_path, "zero.csv")
    with open(counts, "w") as fh:
        fh.write("input,setting,counts\n")
        for inp in ("H", "V", "D", "R"):
            for s in ("H", "V", "D", "A", "R", "L"):
                fh.write(f"{inp},{s},0\n")
    cfg = os.path.join(tmp_path, "t.ini")
    with open(cfg, "w") as fh:
        fh.write(f"[tomography]\ncounts_file = {counts}\n")
    assert main(["tomography", "--config", cfg, "--out",
                 os.path.join(tmp_path, "o"), "--seed", "3"]) == 3


def test_bounds_command_outputs(tmp_path):
    cfg = os.path.join(tmp_path, "b.ini")
    with open(cfg, "w") as fh:
        fh.write("[bounds]\ngrid_points = 20\nrefine_rounds = 1\n")
    out = os.path.join(tmp_path, "bounds")
    assert main(["bounds", "--config", cfg, "--out", out, "--mu", "0.8,1.4"]) == 0
    curve = [l for l in _read(os.path.join(out, "bound_curve.csv")).decode().splitlines()
             if l and not l.startswith("#")]
    assert curve[0].startswith("mu,plain,threshold,transmitted")
    assert len(curve) == 3
    verdicts = _read(os.path.join(out, "verdicts.csv")).decode()
    assert "quantum" in verdicts


def test_output_tree_comparable_across_runs(tmp_path):
    # same command, same seed, fresh directories: identical trees
    cfg = os.path.join(tmp_path, "s.ini")
    with open(cfg, "w") as fh:
        fh.write("[simulate]\ntrials = 10000\n")
    a, b = os.path.join(tmp_path, "ta"), os.path.join(tmp_path, "tb")
    assert main(["simulate", "--config", cfg, "--out", a, "--seed", "5"]) == 0
    assert main(["simulate", "--config", cfg, "--out", b, "--seed", "5"]) == 0
    cmp = filecmp.dircmp(a, b)
    assert not cmp.diff_files and not cmp.left_only and not cmp.right_only
