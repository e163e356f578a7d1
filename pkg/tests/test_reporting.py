import json
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest
from box import Box

from src.utils.reporting import (
    CsvTableWriter,
    JsonReportWriter,
    get_project_version,
    report_writer_factory,
    write_reports,
)


@pytest.fixture
def mock_config(tmp_path):
    return Box({"output": {"directory": str(tmp_path / "out")}})


@pytest.fixture
def table():
    return pd.DataFrame({"theta": [0.0, 0.5], "chi_nats": [1 / 3, 2.0]})


def test_csv_writer(mock_config, table, tmp_path):
    path = CsvTableWriter("curve", table, mock_config).write()
    assert path == tmp_path / "out" / "curve.csv"
    lines = path.read_text().splitlines()
    assert lines[0] == "theta,chi_nats"
    assert lines[1] == "0,0.333333333333"
    assert pd.read_csv(path).shape == (2, 2)


@patch("src.utils.reporting.get_project_version", return_value="0.0.0")
def test_json_writer(mock_get_version, mock_config):
    payload = {
        "b": np.float64(1 / 3),
        "a": np.int64(2),
        "flag": np.bool_(True),
        "values": np.array([1.0, 2.5]),
        "nested": {"x": (np.float64(0.1), None)},
    }
    path = JsonReportWriter("report", payload, mock_config).write()
    text = path.read_text()
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"') < text.index('"version"')
    document = json.loads(text)
    assert document == {
        "version": "0.0.0",
        "a": 2,
        "b": 0.333333333333,
        "flag": True,
        "values": [1.0, 2.5],
        "nested": {"x": [0.1, None]},
    }
    mock_get_version.assert_called_once()


def test_factory(mock_config, table):
    assert isinstance(report_writer_factory("csv", "t", table, mock_config), CsvTableWriter)
    assert isinstance(report_writer_factory("json", "r", {}, mock_config), JsonReportWriter)
    with pytest.raises(ValueError, match="Unknown report format: xlsx"):
        report_writer_factory("xlsx", "t", table, mock_config)


@patch("src.utils.reporting.get_project_version", return_value="0.0.0")
def test_write_reports_tables_first(mock_get_version, mock_config, table):
    written = write_reports({"a": table, "b": table}, {"summary": {"passed": True}}, mock_config)
    assert [p.name for p in written] == ["a.csv", "b.csv", "summary.json"]
    assert all(p.exists() for p in written)


def test_project_version_read_from_pyproject(tmp_path, monkeypatch):
    (tmp_path / "pyproject.toml").write_text('[project]\nname = "x"\nversion = "1.2.3"\n')
    monkeypatch.chdir(tmp_path)
    assert get_project_version() == "1.2.3"


def test_project_version_without_pyproject(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert get_project_version() == "unknown"
