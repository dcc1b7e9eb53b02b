import subprocess
import sys

import numpy as np
import pytest

from franks.cli import (
    EXPERIMENTS,
    build_config,
    list_experiments,
    load_config,
    main,
    parse_overrides,
    parse_text,
    run,
    scalar_curvature,
    seeded_targets,
)
from franks.errors import ConfigError, OutOfBall
from franks.highdim import sp_coordinates
from franks.jacobi import dp_from_curvature
from franks.numkit import sin_fn, symplectic_defect
from franks.rng import MASK, XorShift64Star, splitmix64
from franks.surface import sp1_coords

# -- rng --------------------------------------------------------------------


def reference_stream(seed, count):
    # independent transcription of the documented update rule
    x = splitmix64(seed) or 0x9E3779B97F4A7C15
    out = []
    for _ in range(count):
        x ^= x >> 12
        x = (x ^ (x << 25)) % 2 ** 64
        x ^= x >> 27
        out.append((x * 0x2545F4914F6CDD1D) % 2 ** 64)
    return out


def test_xorshift_matches_update_rule():
    g = XorShift64Star(42)
    assert [g.next_u64() for _ in range(100)] == reference_stream(42, 100)


def test_splitmix_known_value():
    # first output of splitmix64 seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_rng_deterministic_and_seed_sensitive():
    a = XorShift64Star(7).normals(50)
    b = XorShift64Star(7).normals(50)
    c = XorShift64Star(8).normals(50)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_uniform_range_and_moments():
    u = XorShift64Star(3).uniforms(20000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) <= 0.01
    z = XorShift64Star(3).normals(20000)
    assert abs(z.mean()) <= 0.03 and abs(z.std() - 1.0) <= 0.03


def test_unit_vector():
    v = XorShift64Star(1).unit_vector(5)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-15)
    assert MASK == 2 ** 64 - 1


# -- seeded targets -----------------------------------------------------------

BASE1 = dp_from_curvature(sin_fn(2 * np.pi))


def test_targets_reproducible():
    a = seeded_targets(5, 4, 1e-4, 1, BASE1)
    b = seeded_targets(5, 4, 1e-4, 1, BASE1)
    assert all(x.matrix.tobytes() == y.matrix.tobytes() for x, y in zip(a, b))


def test_radius_zero_returns_base():
    for t in seeded_targets(5, 3, 0.0, 1, BASE1):
        assert np.array_equal(t.matrix, BASE1.matrix)
    base2 = np.eye(4)
    for t in seeded_targets(5, 2, 0.0, 2, base2):
        assert np.array_equal(t.matrix, base2)


def test_targets_within_radius_and_symplectic():
    r = 5e-4
    for t in seeded_targets(2, 10, r, 1, BASE1):
        assert np.linalg.norm(sp1_coords(t) - sp1_coords(BASE1)) <= r * (1 + 1e-6)
        assert symplectic_defect(t) <= 1e-10
    base2 = np.eye(4)
    for t in seeded_targets(2, 3, 1e-5, 2, base2):
        assert np.linalg.norm(sp_coordinates(t) - sp_coordinates(base2)) <= 1e-5 * (1 + 1e-6)
        assert symplectic_defect(t) <= 1e-10


def test_targets_out_of_ball():
    with pytest.raises(OutOfBall):
        seeded_targets(1, 1, 1e-3, 1, BASE1, delta_est=1e-4)


# -- config -----------------------------------------------------------------

def test_parse_text_and_overrides():
    raw = parse_text("# comment\nexperiment = scaling\n\ndeltas = 0.3, 0.2,0.13  # tail\n")
    assert raw == {"experiment": "scaling", "deltas": "0.3, 0.2,0.13"}
    assert parse_overrides(["--epsilon", "0.02", "--t-points", "9"]) == {"epsilon": "0.02", "t_points": "9"}
    cfg = build_config(raw)
    assert cfg["deltas"] == [0.3, 0.2, 0.13]
    assert cfg["scheme"] == "I"


@pytest.mark.parametrize("raw", [
    {"deltas": "0.1"},
    {"experiment": "nope"},
    {"experiment": "scaling", "epsilon": "-1"},
    {"experiment": "scaling", "epsilon": "abc"},
    {"experiment": "scaling", "colour": "red"},
    {"experiment": "invariants", "curvature": "banana"},
    {"experiment": "invariants", "curvature": "constant"},
    {"experiment": "invariants", "curvature": "tabulated", "curvature_table": "0:1,1:1"},
    {"experiment": "invariants", "curvature": "tabulated",
     "curvature_table": ",".join(f"{t}:0" for t in (0, .1, .2, .5, .4, .6, .7, .8, 1))},
])
def test_config_errors(raw):
    with pytest.raises(ConfigError):
        build_config(raw)


def test_override_pairs_required():
    with pytest.raises(ConfigError):
        parse_overrides(["--epsilon"])
    with pytest.raises(ConfigError):
        parse_overrides(["epsilon", "1"])


def test_tabulated_curvature_matches_samples():
    t = np.linspace(0.0, 1.0, 17)
    table = ",".join(f"{float(a)!r}:{float(np.sin(2 * np.pi * a))!r}" for a in t)
    cfg = build_config({"experiment": "invariants", "curvature": "tabulated", "curvature_table": table})
    k = scalar_curvature(cfg)
    assert np.max(np.abs(k(t) - np.sin(2 * np.pi * t))) <= 1e-12
    s = np.linspace(0.0, 1.0, 101)
    assert np.max(np.abs(k(s) - np.sin(2 * np.pi * s))) <= 1e-3


# -- catalog -------------------------------------------------------------------

def test_catalog():
    text = list_experiments()
    lines = text.splitlines()
    assert len(lines) == 6
    assert [ln.split("\t")[0] for ln in lines] == list(EXPERIMENTS)
    for ln in lines:
        assert ln.split("\t")[1].startswith("franks.")
    assert list_experiments() == text


# -- runs ------------------------------------------------------------------------

def write_cfg(path, **kw):
    path.write_text("".join(f"{k} = {v}\n" for k, v in kw.items()))
    return path


def test_invariants_flat(tmp_path):
    cfg = load_config(write_cfg(tmp_path / "c.cfg", experiment="invariants", profiles=3))
    status, text = run(cfg)
    assert status == 0
    lines = text.splitlines()
    assert lines[0] == "experiment,row,quantity,parameters,measured,predicted,pass"
    assert all(ln.endswith(",true") for ln in lines[1:])


def test_csv_byte_identical(tmp_path):
    out = []
    for i in range(2):
        csv = tmp_path / f"out{i}.csv"
        cfg = write_cfg(tmp_path / f"c{i}.cfg", experiment="invariants", n=2, profiles=3, seed=11,
                        output=csv)
        assert main(["run", str(cfg)]) == 0
        out.append(csv.read_bytes())
    assert out[0] == out[1]


def test_seed_changes_csv(tmp_path):
    texts = [run(load_config(write_cfg(tmp_path / "c.cfg", experiment="invariants", profiles=2),
                             ["--seed", str(s)]))[1] for s in (1, 2)]
    assert texts[0] != texts[1]


def test_csv_seventeen_digits(tmp_path):
    cfg = load_config(write_cfg(tmp_path / "c.cfg", experiment="scaling"))
    status, text = run(cfg)
    row = text.splitlines()[1].split(",")
    assert float(row[4]) != 0.0
    assert format(float(row[4]), ".17g") == row[4]
    assert status == 0


def test_exit_code_failing_row(tmp_path):
    csv = tmp_path / "m.csv"
    cfg = write_cfg(tmp_path / "m.cfg", experiment="metric-bounds", eta="0.2,0.025", t_points=129,
                    x_points=129, output=csv)
    assert main(["run", str(cfg)]) == 1
    assert "false" in csv.read_text()


def test_exit_code_config_error_leaves_no_csv(tmp_path, capsys):
    csv = tmp_path / "bad.csv"
    cfg = write_cfg(tmp_path / "bad.cfg", experiment="scaling", epsilon=-1, output=csv)
    assert main(["run", str(cfg)]) == 2
    assert not csv.exists()
    assert "ConfigError" in capsys.readouterr().err
    cfg = write_cfg(tmp_path / "bad2.cfg", experiment="scaling", deltas="0.3,0.2", output=csv)
    assert main(["run", str(cfg)]) == 2
    assert not csv.exists()
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2


def test_exit_code_library_error(tmp_path, capsys):
    csv = tmp_path / "h.csv"
    cfg = write_cfg(tmp_path / "h.cfg", experiment="highdim-realize", lambdas="1,1", output=csv)
    assert main(["run", str(cfg)]) == 3
    assert "NoDistinctEigenvalues" in capsys.readouterr().err
    assert not csv.exists()


def test_console_script_list():
    out = subprocess.run([sys.executable, "-m", "franks.cli", "list"], capture_output=True, text=True,
                         check=True).stdout
    assert len(out.strip().splitlines()) == 6
