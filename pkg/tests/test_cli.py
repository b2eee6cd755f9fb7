import csv
import hashlib
import json
import os
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from zalcman.cli import ConfigError, main, parse_complex, resolve_config, validate
from zalcman.compact import read_pgm
from zalcman.schemas import CSV_COLUMNS, JSON_SCHEMAS

# render mandelbrot, centre -0.5, half width 1.6, N = 256, cap 500: produced once and frozen
GOLDEN_MANDELBROT_PGM = "871ed10ab30c3d0b0384a281b35c95e739366fba7288720594069534c1127b7f"


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def csv_header(path):
    with open(path) as fh:
        return next(csv.reader(fh))


def check_json(out, name):
    obj = json.loads((out / name).read_text())
    jsonschema.validate(obj, JSON_SCHEMAS[name])
    return obj


# -- parsing and configuration -----------------------------------------------------


@pytest.mark.parametrize(
    "text, value",
    [("i", 1j), ("-i", -1j), ("-1+i", -1 + 1j), ("0.2+1.1i", 0.2 + 1.1j), ("1j", 1j), ("-2", -2), ([0.5, -1], 0.5 - 1j),
     ("1e-3-2.5i", 0.001 - 2.5j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+", "nan", "i i", "inf"])
def test_parse_complex_rejects(text):
    with pytest.raises(ConfigError):
        parse_complex(text)


def test_config_precedence(tmp_path):
    cfg_file = tmp_path / "job.json"
    cfg_file.write_text(json.dumps({"resolution": 64, "cap": 77, "half-width": 1.0}))
    cfg = resolve_config("render", {"config": str(cfg_file), "cap": "99"})
    assert cfg["resolution"] == 64 and cfg["cap"] == 99 and cfg["half_width"] == 1.0
    assert cfg["tau"] == 1.0
    cfg_file.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ConfigError):
        resolve_config("render", {"config": str(cfg_file)})
    with pytest.raises(ConfigError):
        validate("render", resolve_config("render", {"resolution": "1"}))


@pytest.mark.parametrize(
    "args",
    [
        ["render", "--resolution", "1"],
        ["render", "--kind", "sierpinski"],
        ["render", "--resolution", "many"],
        ["similarity", "--k-min", "4", "--k-max", "2"],
        ["census", "--mode", "thm9"],
        ["conical", "--tests", "mm7"],
        ["conical", "--radii", "4,2"],
        ["poincare", "--radius", "0"],
        ["render", "--degree", "1"],
        ["render", "--config", "/nonexistent/job.json"],
    ],
)
def test_config_errors_exit_2(tmp_path, args, capsys):
    code, _ = run(tmp_path, *args)
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_compute_errors_exit_3(tmp_path, capsys):
    code, out = run(tmp_path, "similarity", "--c0=-1", "--resolution", "32", "--k-max", "1")
    assert code == 3 and "not Misiurewicz" in capsys.readouterr().err
    code, _ = run(tmp_path, "conical", "--c", "0", "--z0", "0.3", "--tests", "mm0")
    assert code == 3
    code, _ = run(tmp_path, "conical", "--c", "0", "--z0", "2", "--tests", "mm0")
    assert code == 3
    code, _ = run(tmp_path, "poincare", "--c=-1", "--period", "2", "--seed", "0.1")
    assert code == 3


# -- commands ------------------------------------------------------------------------


def test_render_julia_unit_circle(tmp_path):
    code, out = run(tmp_path, "render", "--kind", "julia", "--c", "0", "--resolution", "256")
    assert code == 0
    mask = read_pgm(out / "render.pgm") == 0
    h = 4.0 / 256
    xs = -2 + h * (np.arange(256) + 0.5)
    pts = xs[None, :] + 1j * xs[::-1, None]
    assert np.all(np.abs(np.abs(pts[mask]) - 1) < 2 * h)
    assert mask.sum() > 400
    rows = (out / "render.csv").read_text().splitlines()
    assert rows[0] == "re,im" and len(rows) == mask.sum() + 1
    meta = check_json(out, "render.json")
    assert meta["marked"] == mask.sum() and meta["mode"] == "boundary"
    assert (out / "VERSION").exists()


def test_render_mandelbrot_golden(tmp_path):
    code, out = run(tmp_path, "render", "--kind", "mandelbrot", "--resolution", "256", "--cap", "500")
    assert code == 0
    assert sha256(out / "render.pgm") == GOLDEN_MANDELBROT_PGM
    check_json(out, "render.json")
    assert csv_header(out / "render.csv") == CSV_COLUMNS["render.csv"]


def test_similarity_outputs(tmp_path):
    code, out = run(tmp_path, "similarity", "--c0=-2", "--resolution", "65", "--k-max", "3", "--cap", "512")
    assert code == 0
    assert csv_header(out / "similarity.csv") == CSV_COLUMNS["similarity.csv"]
    with open(out / "similarity.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["k"]) for r in rows] == [1, 2, 3]
    for r in rows:
        assert float(r["re_Q"]) == pytest.approx(1.5, abs=1e-10)
        assert float(r["re_lambda"]) == pytest.approx(2 / 3, abs=1e-10)
        assert all(np.isfinite(float(r[c])) for c in ("d_H_julia", "d_H_mandelbrot", "d_H_between"))
    meta = check_json(out, "similarity.json")
    assert meta["l"] == 1 and meta["p"] == 1
    assert (out / "panel_k3.ppm").read_bytes().startswith(b"P6")
    assert (out / "model.pgm").exists()


def test_census_outputs(tmp_path):
    code, out = run(tmp_path, "census", "--mode", "thm1-1", "--t0", "i", "--fixed", "2", "--max-index", "8")
    assert code == 0
    assert csv_header(out / "census.csv") == CSV_COLUMNS["census.csv"]
    with open(out / "census.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert [int(r["k"]) for r in rows] == list(range(2, 10))
    assert all(float(r["residual"]) < 1e-10 for r in rows)
    code, out = run(tmp_path, "census", "--mode", "centers", "--l", "3")
    with open(out / "census.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert code == 0 and len(rows) == 3


def test_conical_outputs(tmp_path):
    code, out = run(tmp_path, "conical", "--c", "i", "--z0=-1+i", "--radii", "1,2")
    assert code == 0
    recs = check_json(out, "conical.json")
    assert [r["test"] for r in recs] == ["mm0", "lm1", "semi"]
    assert recs[0]["verdict"] == "conical-certified"
    assert recs[1]["verdict"] == "LM1-evidence"
    assert recs[2]["semi_hyperbolic"] is True


def test_poincare_outputs(tmp_path):
    code, out = run(tmp_path, "poincare", "--c=-2", "--seed", "1.8", "--radius", "1", "--samples", "9")
    assert code == 0
    meta = check_json(out, "poincare.json")
    assert csv_header(out / "poincare.csv") == CSV_COLUMNS["poincare.csv"]
    data = np.loadtxt(out / "poincare.csv", delimiter=",", skiprows=1)
    w = data[:, 0] + 1j * data[:, 1]
    phi = data[:, 2] + 1j * data[:, 3]
    assert len(w) == meta["samples"]
    assert np.abs(phi - 2 * np.cosh(np.sqrt(w))).max() < 1e-8


def test_rerun_is_byte_identical(tmp_path):
    args = ["census", "--mode", "thm1-3", "--t0=-2", "--max-index", "5"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main([*args, "--out", str(a)]) == 0 and main([*args, "--out", str(b)]) == 0
    assert (a / "census.csv").read_bytes() == (b / "census.csv").read_bytes()


# -- threads never change outputs ----------------------------------------------------------


@pytest.mark.parametrize(
    "args",
    [
        ["render", "--kind", "julia", "--c", "i", "--resolution", "200"],
        ["similarity", "--c0", "i", "--resolution", "96", "--k-max", "3", "--cap", "1024"],
    ],
)
def test_thread_count_does_not_change_outputs(tmp_path, args):
    env = {**os.environ, "NUMBA_NUM_THREADS": "4"}
    outs = []
    for threads in ("1", "4"):
        out = tmp_path / f"t{threads}"
        subprocess.run([sys.executable, "-m", "zalcman", *args, "--threads", threads, "--out", str(out)],
                       env=env, check=True, capture_output=True)
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir()) and len(names) >= 4
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
