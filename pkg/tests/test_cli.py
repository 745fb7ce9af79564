import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from baecv.cli import main

from conftest import small_robin_config


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "config.json"
    with open(path, "w") as fh:
        json.dump(small_robin_config(), fh)
    return str(path)


def _run(args):
    return CliRunner().invoke(main, args, catch_exceptions=False)


class TestCli:
    def test_mesh_export(self, config_path, tmp_path):
        out = str(tmp_path / "out")
        res = _run(["mesh", "--config", config_path, "--out", out])
        assert res.exit_code == 0
        with open(os.path.join(out, "mesh.json")) as fh:
            obj = json.load(fh)
        assert len(obj["vertices"]) == 12 * 5

    def test_sample_command(self, config_path, tmp_path):
        out = str(tmp_path / "out")
        res = _run(["sample", "--config", config_path, "--out", out, "-n", "2"])
        assert res.exit_code == 0
        with open(os.path.join(out, "prior_samples.json")) as fh:
            obj = json.load(fh)
        assert len(obj["samples"]) == 2

    def test_estimate_and_spectrum(self, config_path, tmp_path):
        out = str(tmp_path / "out")
        res = _run(["estimate", "--config", config_path, "--out", out,
                    "--estimator", "cv-lin", "-n", "4"])
        assert res.exit_code == 0
        with open(os.path.join(out, "stats_cv-lin.json")) as fh:
            obj = json.load(fh)
        assert obj["tag"] == "cv-lin" and obj["N"] == 4
        res = _run(["spectrum", "--config", config_path, "--out", out, "-n", "4"])
        assert res.exit_code == 0
        assert os.path.exists(os.path.join(out, "spectrum.csv"))

    def test_invert_command(self, config_path, tmp_path):
        out = str(tmp_path / "out")
        res = _run(["invert", "--config", config_path, "--out", out,
                    "--estimator", "zero"])
        assert res.exit_code == 0
        with open(os.path.join(out, "posterior_zero.json")) as fh:
            obj = json.load(fh)
        assert len(obj["posterior"]["m_map"]) == 12

    def test_cost_command(self, config_path, tmp_path):
        out = str(tmp_path / "out")
        res = _run(["cost", "--config", config_path, "--out", out, "-n", "3"])
        assert res.exit_code == 0
        assert os.path.exists(os.path.join(out, "cost_ledger.csv"))

    def test_builtin_example_flag(self, tmp_path):
        out = str(tmp_path / "out")
        res = _run(["mesh", "--example", "robin", "--out", out])
        assert res.exit_code == 0
        with open(os.path.join(out, "mesh.json")) as fh:
            obj = json.load(fh)
        assert len(obj["vertices"]) == 750

    def test_missing_config_exits_2(self, tmp_path):
        res = CliRunner().invoke(main, ["mesh", "--out", str(tmp_path)])
        assert res.exit_code == 2

    def test_invalid_config_exits_2(self, tmp_path):
        path = tmp_path / "bad.json"
        with open(path, "w") as fh:
            json.dump({"problem": "robin"}, fh)
        res = CliRunner().invoke(main, ["mesh", "--config", str(path),
                                        "--out", str(tmp_path)])
        assert res.exit_code == 2

    def test_small_studies_run(self, config_path, tmp_path):
        out = str(tmp_path / "conv")
        res = _run(["study-convergence", "--config", config_path, "--out", out])
        assert res.exit_code == 0
        assert os.path.exists(os.path.join(out, "convergence.csv"))
