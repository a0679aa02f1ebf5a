import csv
import json
import math

import pytest

from starpath.cli import ConfigError, ExperimentConfig, main


def run(tmp_path, *args):
    return main([*args, "--output", str(tmp_path)])


def test_amplitude_pass(tmp_path):
    assert run(tmp_path, "amplitude") == 0
    report = json.loads((tmp_path / "amplitude.json").read_text())
    assert report["relative_errors"]["star-oracle"] <= 1e-8
    assert report["config"]["routes"] == ["star", "oracle"]
    assert "timing_seconds" in report
    assert (tmp_path / "amplitude.txt").read_text().splitlines()[-1].startswith("PASS")


def test_amplitude_tolerance_failure(tmp_path):
    args = ["amplitude", "--routes", "star,oracle,sliced", "--N", "2", "--rtol", "1e-8"]
    assert run(tmp_path, *args) == 1


def test_amplitude_bad_routes(tmp_path):
    assert run(tmp_path, "amplitude", "--routes", "") == 2
    assert run(tmp_path, "amplitude", "--routes", "star,bogus") == 2


def test_amplitude_truncation_too_coarse(tmp_path):
    assert run(tmp_path, "amplitude", "--alpha-i", "[6, 0]", "--D", "8") == 3


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"T": 0.5, "alpha_f": [-0.5, 0]}))
    assert main(["amplitude", "--T", "2.0", "--config", str(cfg), "--output", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "amplitude.json").read_text())
    assert report["config"]["T"] == 0.5


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert main(["amplitude", "--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({"unknown": 1}))
    assert main(["amplitude", "--config", str(cfg)]) == 2


def test_unknown_subcommand_is_config_error():
    assert main(["frobnicate"]) == 2


def test_config_round_trip():
    cfg = ExperimentConfig(alpha_i=[0.1, 0.2], routes=["star"], D=40)
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig(K=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(alpha_i=[1, 2, 3])


def test_amplitude_outputs_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["amplitude", "--routes", "star,oracle,sliced,optical", "--rtol", "1",
                     "--output", str(d)]) == 0

    def strip(p):
        obj = json.loads((p / "amplitude.json").read_text())
        obj.pop("timing_seconds")
        obj["config"].pop("output")
        return json.dumps(obj, sort_keys=True)

    assert strip(a) == strip(b)
    assert (a / "amplitude.txt").read_bytes() == (b / "amplitude.txt").read_bytes()


def test_convergence_outputs(tmp_path):
    assert run(tmp_path, "convergence", "--nodes", "24") == 0
    rows = list(csv.reader((tmp_path / "convergence.csv").open()))
    assert rows[0] == ["N", "epsilon", "abs_error", "rel_error"]
    side = json.loads((tmp_path / "convergence.json").read_text())
    assert abs(side["slope"] - 1) <= 0.1


def test_convergence_free_exact(tmp_path):
    assert run(tmp_path, "convergence", "--hamiltonian", "[]", "--N-list", "2,4,8") == 0
    assert json.loads((tmp_path / "convergence.json").read_text())["exact"] is True


def test_convergence_too_few_points(tmp_path):
    assert run(tmp_path, "convergence", "--N-list", "10,20") == 2


@pytest.mark.parametrize("s", [-1.0, 0.0])
def test_qdist_vacuum(tmp_path, s):
    assert run(tmp_path, "qdist", "--s", str(s), "--grid", "13") == 0
    rows = list(csv.DictReader((tmp_path / "qdist.csv").open()))
    assert len(rows) == 169
    c = 2 / (1 - s)
    for r in rows:
        x2 = float(r["re_alpha"]) ** 2 + float(r["im_alpha"]) ** 2
        assert abs(float(r["value"]) - c / math.pi * math.exp(-c * x2)) <= 1e-8
    side = json.loads((tmp_path / "qdist.json").read_text())
    assert side["normalization_residual"] <= 1e-6


def test_qdist_positive_s_refused(tmp_path):
    assert run(tmp_path, "qdist", "--s", "1") == 3


def test_star_product(tmp_path, capsys):
    assert main(["star-product", "[[0,1,1,0]]", "[[1,0,1,0]]"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert sorted(map(tuple, out["product"])) == [(0, 0, 1.0, 0.0), (1, 1, 1.0, 0.0)]
    assert main(["star-product", "[[0,1]]", "[]"]) == 2
