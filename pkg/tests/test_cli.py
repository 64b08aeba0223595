import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from constants import MASS_RTOL
from data.tables import _jsonable
import handlers
from logging_utils import _runs_from_log
from main import main


def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == 1
    err = capsys.readouterr().err
    assert "code=usage" in err
    assert "homogenize" in err


def test_bad_flag_is_usage_error(capsys):
    assert main(["simulate", "--order", "7"]) == 1
    assert "code=usage" in capsys.readouterr().err


def test_help_lists_recipes(capsys):
    assert main(["help"]) == 0
    out = capsys.readouterr().out
    for recipe in ("dd-both", "field-order2", "dd-branches"):
        assert recipe in out


def test_missing_config_reports_code(tmp_path, capsys):
    code = main(["homogenize", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)])
    assert code == 1
    assert "code=config_missing" in capsys.readouterr().err


def test_homogenize_writes_report_and_run_log(tmp_path, capsys):
    assert main(["homogenize", "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "homogenize.json").read_text(encoding="utf-8"))
    assert payload["dimensional"]["sigma0"] == pytest.approx(29.7, abs=0.1)
    assert payload["identity_summary"]["failed"] == 0
    assert "order0" in payload["effective_equations"]
    correctors = pd.read_csv(tmp_path / "correctors.csv")
    assert "P" in correctors.columns
    runs = _runs_from_log(tmp_path)
    assert len(runs) == 1
    assert runs[0]["subcommand"] == "homogenize"
    assert str(tmp_path / "homogenize.json") in runs[0]["outputs"]
    assert _runs_from_log(tmp_path, record_type="audit")[0]["scope"] == "identities"
    assert "sigma0=" in capsys.readouterr().out


def test_dispersion_effective_table(tmp_path):
    code = main(["dispersion", "effective", "--order", "0", "--kappa-points", "9", "--out", str(tmp_path)])
    assert code == 0
    table = pd.read_csv(tmp_path / "dispersion_effective.csv")
    assert list(table.columns) == ["branch", "kappa", "re_omega", "im_omega", "residual", "frame", "order"]
    assert len(table) == 18
    fixed = table[table["frame"] == "fixed"]
    assert np.all(fixed["im_omega"] >= 0.0)


def test_model_override_without_density_fails(tmp_path, capsys):
    assert main(["homogenize", "--model", "2", "--out", str(tmp_path)]) == 1
    assert "code=config_schema" in capsys.readouterr().err


def test_jsonable_handles_complex_and_non_finite():
    out = _jsonable({"w": 1 + 2j, "bad": float("nan"), "arr": np.array([1.0, np.inf]), "flag": np.bool_(True)})
    assert out == {"w": {"re": 1.0, "im": 2.0}, "bad": "nan", "arr": [1.0, "inf"], "flag": True}


@pytest.mark.slow
def test_validate_quick(tmp_path):
    assert main(["validate", "--quick", "--seeds", "3", "--out", str(tmp_path)]) == 0
    reports = json.loads((tmp_path / "validate.json").read_text(encoding="utf-8"))
    assert reports
    assert all(r["pass"] for r in reports)


@pytest.mark.slow
def test_figure_recipe_sigma_only(tmp_path):
    code = main(["figures", "dd-sigma-only", "--kappa-points", "20", "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads((tmp_path / "dd-sigma-only" / "summary.json").read_text(encoding="utf-8"))
    assert summary["failed_points"] == 0
    for name in ("exact.csv", "order0.csv", "order2.csv", "compare_order2.csv", "config.json"):
        assert (tmp_path / "dd-sigma-only" / name).exists()


def test_zero_branches_is_usage_error(tmp_path, capsys):
    assert main(["dispersion", "exact", "--branches", "0", "--out", str(tmp_path)]) == 1
    assert "code=usage" in capsys.readouterr().err


def test_zero_seeds_is_usage_error(tmp_path, capsys):
    assert main(["validate", "--seeds", "0", "--out", str(tmp_path)]) == 1
    assert "code=usage" in capsys.readouterr().err


def test_plain_value_error_maps_to_code(tmp_path, capsys, monkeypatch):
    def broken(ctx):
        raise ValueError("kappa grid must be sorted")

    monkeypatch.setitem(handlers.COMMAND_HANDLERS, "homogenize", broken)
    assert main(["homogenize", "--out", str(tmp_path)]) == 1
    assert "code=invalid_argument" in capsys.readouterr().err


def test_simulate_default_config_falls_back_to_cascade(tmp_path):
    assert main(["simulate", "--t-end", "50", "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "simulate.json").read_text(encoding="utf-8"))
    assert "cascade" in payload
    assert payload["mass_drift"] <= MASS_RTOL
    assert payload["eta"] == pytest.approx(2.0 * np.pi * 0.1 / 6.0)
    assert (tmp_path / "snapshots.csv").exists()


def test_compare_recomputes_table_from_other_laminate(tmp_path):
    out = str(tmp_path)
    assert main(["dispersion", "effective", "--order", "0", "--kappa-points", "9", "--out", out]) == 0
    exact = tmp_path / "exact_copy.csv"
    exact.write_text((tmp_path / "dispersion_effective.csv").read_text(encoding="utf-8"), encoding="utf-8")
    config = str(Path(__file__).resolve().parents[1] / "configs" / "bilayer_sigma_only.json")
    code = main(
        ["dispersion", "compare", "--config", config, "--exact", str(exact), "--order", "0", "--kappa-points", "9", "--out", out]
    )
    assert code == 0
    last = _runs_from_log(tmp_path)[-1]
    assert str(tmp_path / "dispersion_effective.csv") in last["outputs"]
    assert str(exact) in last["inputs"]


@pytest.mark.slow
def test_dispersion_exact_reports_mirrored_grid(tmp_path):
    assert main(["dispersion", "exact", "--kappa-points", "5", "--out", str(tmp_path)]) == 0
    table = pd.read_csv(tmp_path / "dispersion_exact.csv")
    assert (table["kappa"] < 0.0).any()
    meta = json.loads((tmp_path / "dispersion_exact.json").read_text(encoding="utf-8"))
    assert [b["kappa_sign"] for b in meta["branches"]] == ["+", "-"]
    parity = meta["parity"][0]
    assert parity["max_re_odd_defect"] < 1e-8
    assert parity["max_im_even_defect"] < 1e-8
