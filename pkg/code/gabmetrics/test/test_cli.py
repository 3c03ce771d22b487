import json
import logging
import math

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from gabmetrics.__main__ import gabmetrics
from gabmetrics.pde_lab import constant_transform_closed_form
from gabmetrics.phi_families import bryant_b_o

pytestmark = pytest.mark.cli


@pytest.fixture(autouse=True)
def reset_root_logger():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)


def invoke(*args):
    return CliRunner().invoke(gabmetrics, list(args), obj={})


def manifest(test_data_dir, name):
    return str(test_data_dir / name)


def test_validate_regular(test_data_dir, tmp_path):
    out = tmp_path / "validate.json"
    result = invoke(
        "validate", "--config", manifest(test_data_dir, "constant.yaml"), "--out", str(out)
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["valid"]
    assert report["b_o"] == "inf"
    assert report["phi"] == {"kind": "constant"}


def test_validate_past_bryant_bound(test_data_dir, tmp_path):
    out = tmp_path / "validate.json"
    result = invoke(
        "validate",
        "--config",
        manifest(test_data_dir, "bryant_wide.yaml"),
        "--grid",
        "121",
        "--out",
        str(out),
    )
    assert result.exit_code == 1
    report = json.loads(out.read_text())
    assert not report["valid"]
    assert report["first_failure_b"] == pytest.approx(bryant_b_o(0.9 * math.pi), abs=0.02)


BAD_MANIFESTS = [
    "malformed.yaml",
    "unknown_key.yaml",
    "preset_list.yaml",
    "g_list.yaml",
    "negative_seed.yaml",
    "nan_p.yaml",
]


@pytest.mark.parametrize("name", BAD_MANIFESTS)
def test_bad_manifest_exit_code(test_data_dir, tmp_path, name):
    result = invoke(
        "validate",
        "--config",
        manifest(test_data_dir, name),
        "--out",
        str(tmp_path / "validate.json"),
    )
    assert result.exit_code == 2
    assert not (tmp_path / "validate.json").exists()


def test_missing_config(tmp_path):
    result = invoke("validate", "--config", str(tmp_path / "nothing.yaml"))
    assert result.exit_code == 2


def test_negative_seed_flag(test_data_dir, tmp_path):
    result = invoke(
        "geodesic",
        "--config",
        manifest(test_data_dir, "funk.yaml"),
        "--seed",
        "-1",
        "--out",
        str(tmp_path / "geodesic.csv"),
    )
    assert result.exit_code == 2
    assert not (tmp_path / "geodesic.csv").exists()


def test_flatness_flat(test_data_dir, tmp_path):
    out = tmp_path / "flatness.json"
    result = invoke(
        "flatness", "--config", manifest(test_data_dir, "funk.yaml"), "--out", str(out)
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["verdict"] == "projectively flat at tested scale"
    assert report["seed"] == 42
    assert report["max_fd_spray_gap"] < 1e-4
    assert report["max_conformal_spray_gap"] < 1e-8


def test_flatness_riemannian_bryant(test_data_dir, tmp_path):
    out = tmp_path / "flatness.json"
    result = invoke(
        "flatness",
        "--config",
        manifest(test_data_dir, "bryant_flat.yaml"),
        "--out",
        str(out),
    )
    assert result.exit_code == 0, result.output
    assert json.loads(out.read_text())["completed"] == 3


def test_flatness_not_flat(test_data_dir, tmp_path):
    out = tmp_path / "flatness.json"
    result = invoke(
        "flatness",
        "--config",
        manifest(test_data_dir, "randers_rotation.yaml"),
        "--out",
        str(out),
    )
    assert result.exit_code == 1
    report = json.loads(out.read_text())
    assert report["verdict"] == "not projectively flat"
    assert report["max_conformal_spray_gap"] is None


def test_spray(test_data_dir, tmp_path):
    out = tmp_path / "spray.json"
    result = invoke(
        "spray",
        "--config",
        manifest(test_data_dir, "funk.yaml"),
        "--out",
        str(out),
        "--tol",
        "1e-4",
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert [spray["method"] for spray in report["sprays"]] == [
        "closed",
        "conformal",
        "fd_oracle",
    ]
    assert report["projectively_flat"]
    assert report["agrees"]


def test_spray_needs_point(test_data_dir, tmp_path):
    result = invoke(
        "spray",
        "--config",
        manifest(test_data_dir, "constant.yaml"),
        "--out",
        str(tmp_path / "spray.json"),
    )
    assert result.exit_code == 2


def test_geodesic_is_reproducible(test_data_dir, tmp_path):
    paths = [tmp_path / "first.csv", tmp_path / "second.csv"]
    for path in paths:
        result = invoke(
            "geodesic",
            "--config",
            manifest(test_data_dir, "funk.yaml"),
            "--seed",
            "42",
            "--out",
            str(path),
        )
        assert result.exit_code == 0, result.output
    assert paths[0].read_bytes() == paths[1].read_bytes()

    frame = pd.read_csv(paths[0])
    assert list(frame.columns) == ["t", "x1", "x2", "v1", "v2"]
    summary = json.loads(paths[0].with_suffix(".json").read_text())
    assert summary["seed"] == 42
    assert summary["x0"] == [0.3, 0.0]
    assert summary["passed"]


def test_indicatrix(test_data_dir, tmp_path):
    out = tmp_path / "indicatrix.csv"
    result = invoke(
        "indicatrix",
        "--config",
        manifest(test_data_dir, "funk.yaml"),
        "--samples",
        "90",
        "--out",
        str(out),
    )
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["angle", "y1", "y2"]
    assert len(frame) == 90


def test_pde_with_group_laws(test_data_dir, tmp_path):
    out = tmp_path / "pde.json"
    result = invoke(
        "pde",
        "--config",
        manifest(test_data_dir, "berwald.yaml"),
        "--grid",
        "31",
        "--out",
        str(out),
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["max_residual"] < 1e-10
    assert report["transformed"]["max_residual"] < 1e-8
    assert report["group_laws"]["nu"] == -0.25
    assert report["group_laws"]["composition_deviation"] < 1e-10


def test_transform(test_data_dir, tmp_path):
    out = tmp_path / "transform.csv"
    result = invoke(
        "transform",
        "--config",
        manifest(test_data_dir, "constant.yaml"),
        "--out",
        str(out),
    )
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out)
    assert len(table) == 21 * 21
    expected = [
        constant_transform_closed_form(1.0, b * b, s)
        for b, s in zip(table["b"], table["s"])
    ]
    np.testing.assert_allclose(table["phi"], expected, rtol=1e-12)


def test_transform_needs_mu(test_data_dir, tmp_path):
    result = invoke(
        "transform",
        "--config",
        manifest(test_data_dir, "funk.yaml"),
        "--out",
        str(tmp_path / "transform.csv"),
    )
    assert result.exit_code == 2


def test_bryant_bound():
    result = invoke("bryant-bound", "--p", str(0.9 * math.pi))
    assert result.exit_code == 0
    assert float(result.output) == pytest.approx(1.10874, abs=1e-5)

    result = invoke("bryant-bound", "--p", "0")
    assert result.output.strip() == "inf"

    assert invoke("bryant-bound", "--p", "4").exit_code == 2


def test_defaults_reach_the_spray_oracle(test_data_dir, tmp_path):
    defaults = tmp_path / "defaults.yaml"
    defaults.write_text("NUMERICS:\n  fd_richardson_rtol: 1.0e-30\n")
    out = tmp_path / "spray.json"
    result = CliRunner().invoke(
        gabmetrics,
        [
            "--defaults",
            str(defaults),
            "spray",
            "--config",
            manifest(test_data_dir, "funk.yaml"),
            "--out",
            str(out),
        ],
        obj={},
    )
    assert result.exit_code == 0, result.output
    methods = [spray["method"] for spray in json.loads(out.read_text())["sprays"]]
    assert methods == ["closed", "conformal"]


def test_defaults_reach_the_flat_tolerance(test_data_dir, tmp_path):
    defaults = tmp_path / "defaults.yaml"
    defaults.write_text("SPRAY:\n  flat_tol_closed: 0.0\n")
    out = tmp_path / "spray.json"
    result = CliRunner().invoke(
        gabmetrics,
        [
            "--defaults",
            str(defaults),
            "spray",
            "--config",
            manifest(test_data_dir, "funk.yaml"),
            "--out",
            str(out),
        ],
        obj={},
    )
    assert result.exit_code == 0, result.output
    assert not json.loads(out.read_text())["projectively_flat"]


def test_unused_flags_warn(test_data_dir, tmp_path):
    result = invoke(
        "validate",
        "--config",
        manifest(test_data_dir, "constant.yaml"),
        "--seed",
        "3",
        "--out",
        str(tmp_path / "validate.json"),
    )
    assert result.exit_code == 0, result.output
    assert "validate does not use --seed" in result.output
