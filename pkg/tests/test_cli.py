import json
import math

import numpy as np
import pytest

from relicert.cli import main, read_points_csv
from relicert.core import read_dataset_csv
from relicert.estimators import ESTIMATE_CSV_HEADER
from relicert.losses import LossKind
from relicert.reliability import certify
from relicert.version_space import fit_version_space

GAUSS1 = '{"kind":"gaussian","d":1}'
THRESH = '{"kind":"threshold"}'
HSTAR = '{"kind":"threshold","t":0.0}'


def run(*argv):
    return main(list(argv))


@pytest.fixture()
def train_csv(tmp_path):
    out = tmp_path / "train.csv"
    code = run(
        "gen", "--dist", GAUSS1, "--hstar", HSTAR, "--m", "80",
        "--seed", "7", "--out", str(out),
    )
    assert code == 0
    return out


def test_gen_round_trip(train_csv):
    S = read_dataset_csv(train_csv)
    assert len(S) == 80 and S.dimension == 1
    # labels consistent with the generating threshold
    assert np.all((S.X[:, 0] >= 0) == (S.y > 0))


def test_certify_matches_library(tmp_path, train_csv):
    pts = tmp_path / "pts.csv"
    pts.write_text("x1\n-1.5\n0.4\n0.01\n2.5\n")
    out = tmp_path / "certs.json"
    code = run(
        "certify", "--data", str(train_csv), "--points", str(pts),
        "--loss", "st", "--concept", THRESH, "--out", str(out), "--seed", "3",
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["version"].startswith("relicert ")
    S = read_dataset_csv(train_csv)
    vs = fit_version_space(S, "threshold")
    for i, rec in enumerate(payload["certificates"]):
        cert = certify(vs, rec["point"], LossKind.ST, seed=3 ^ i)
        want = cert.to_json_dict(rec["point"], seed=3)
        assert rec == want  # radii equal the direct library call exactly


def test_rerun_byte_identical(tmp_path, train_csv):
    pts = tmp_path / "pts.csv"
    pts.write_text("x1\n0.9\n-0.2\n")
    out = tmp_path / "c.json"
    argv = ["certify", "--data", str(train_csv), "--points", str(pts),
            "--loss", "tl", "--concept", THRESH, "--out", str(out), "--seed", "1"]
    assert run(*argv) == 0
    first = out.read_bytes()
    assert run(*argv) == 0
    assert out.read_bytes() == first


def test_unknown_flag_exits_2(capsys):
    assert run("--definitely-not-a-flag") == 2


def test_unknown_loss_exits_2(train_csv, tmp_path):
    pts = tmp_path / "p.csv"
    pts.write_text("x1\n0.0\n")
    code = run("certify", "--data", str(train_csv), "--points", str(pts),
               "--loss", "zz", "--concept", THRESH, "--out", str(tmp_path / "o"))
    assert code == 2


def test_missing_file_exits_2(tmp_path):
    code = run("certify", "--data", str(tmp_path / "nope.csv"),
               "--points", str(tmp_path / "nope2.csv"), "--loss", "st",
               "--concept", THRESH, "--out", str(tmp_path / "o.json"))
    assert code == 2


def test_malformed_csv_exits_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x1,label\n0.5,7\n")
    pts = tmp_path / "p.csv"
    pts.write_text("x1\n0.0\n")
    code = run("certify", "--data", str(bad), "--points", str(pts),
               "--loss", "st", "--concept", THRESH, "--out", str(tmp_path / "o.json"))
    assert code == 2


def test_missing_required_option_exits_2(tmp_path):
    assert run("sr-mass", "--out", str(tmp_path / "x.csv")) == 2


def test_attack_verify_exit_codes(tmp_path):
    out = tmp_path / "rep.json"
    code = run(
        "attack-verify", "--concept", THRESH, "--hstar", HSTAR, "--dist", GAUSS1,
        "--m", "120", "--trials", "150", "--budget", "0.05", "--loss", "st",
        "--strategy", "random-ball", "--seed", "5", "--out", str(out),
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["report"]["violations"] == 0
    assert payload["report"]["certified"] > 0


def test_sr_mass_csv_schema(tmp_path):
    out = tmp_path / "sr.csv"
    code = run(
        "sr-mass", "--concept", THRESH, "--hstar", HSTAR,
        "--dist", '{"kind":"uniform_cube","d":1,"lo":-1,"hi":1}',
        "--m", "150", "--eta1", "0.05", "--eta2", "0.05", "--loss", "st",
        "--trials", "3", "--n", "1000", "--seed", "2", "--out", str(out),
    )
    assert code == 0
    lines = out.read_text().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    data = [ln for ln in lines if not ln.startswith("#")]
    assert any("config" in c for c in comments)
    assert data[0] == ESTIMATE_CSV_HEADER
    parts = data[1].split(",")
    assert parts[0] == "sr-mass" and parts[2] == "st"
    mass = float(parts[9])
    assert 0.7 <= mass <= 1.0


def test_theta_cli(tmp_path):
    out = tmp_path / "theta.csv"
    code = run(
        "theta", "--concept", THRESH, "--hstar", HSTAR,
        "--p", '{"kind":"uniform_cube","d":1,"lo":-0.5,"hi":0.5}',
        "--q", '{"kind":"uniform_cube","d":1,"lo":-1,"hi":1}',
        "--epsilon", "0.01", "--out", str(out),
    )
    assert code == 0
    text = out.read_text()
    final = [ln for ln in text.splitlines() if ln.startswith("# theta ")][0]
    assert float(final.split()[-1]) == pytest.approx(1.0, abs=0.1)


def test_shift_cli(tmp_path):
    out = tmp_path / "shift.csv"
    code = run(
        "shift", "--concept", THRESH, "--hstar", HSTAR,
        "--p", '{"kind":"uniform_cube","d":1,"lo":-0.5,"hi":0.5}',
        "--q", '{"kind":"uniform_cube","d":1,"lo":-1,"hi":1}',
        "--m", "500", "--trials", "4", "--n", "1000", "--out", str(out),
    )
    assert code == 0
    row = [ln for ln in out.read_text().splitlines() if ln.startswith("pq-")][0]
    assert float(row.split(",")[9]) > 0.99


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "concept": {"kind": "threshold"},
        "hstar": {"kind": "threshold", "t": 0.0},
        "dist": {"kind": "gaussian", "d": 1},
        "m": 100, "trials": 60, "budget": 0.05, "loss": "tl",
        "strategy": "random-ball", "seed": 1,
    }))
    assert run("attack-verify", "--config", str(cfg)) == 0
    # flags win over the config file: an invalid override must surface
    assert run("attack-verify", "--config", str(cfg), "--budget", "-1") == 2


def test_margin_method_cli(tmp_path, train_csv):
    pts = tmp_path / "pts.csv"
    pts.write_text("x1\n0.9\n")
    out = tmp_path / "m.json"
    code = run("certify", "--data", str(train_csv), "--points", str(pts),
               "--loss", "st", "--concept", '{"kind":"linear"}', "--method", "margin",
               "--eps", "0.05", "--out", str(out))
    assert code == 0
    rec = json.loads(out.read_text())["certificates"][0]
    assert rec["method"] == "margin"


def test_points_csv_requires_coordinate_header(tmp_path):
    bad = tmp_path / "p.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(Exception):
        read_points_csv(str(bad))


def test_version_flag():
    assert run("--version") == 0
