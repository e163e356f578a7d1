import json
import logging
import math
import re
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import pandas as pd

from .types_custom import Config

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def get_project_version():
    """
    Reads the project version from the pyproject.toml file.

    Returns:
        str: The project version number.
    """
    try:
        with open("pyproject.toml", "r") as f:
            content = f.read()
    except OSError:
        return "unknown"
    match = re.search(r"version = \"(.*?)\"", content)
    if match:
        return match.group(1)
    return "unknown"


def _to_builtin(value: Any) -> Any:
    """numpy scalars/arrays to plain Python, floats rounded to 12 significant digits."""
    if isinstance(value, Mapping):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if not math.isfinite(value) else float(FLOAT_FORMAT % value)
    return value


class ReportWriter(ABC):
    """
    Abstract base class for all output writers.

    Attributes:
        name (str): File stem of the output.
        payload: The table or report to write.
        output_dir (Path): The directory where outputs are saved.
    """
    def __init__(self, name: str, payload: Any, config: Config):
        self.name = name
        self.payload = payload
        self.output_dir = Path(config["output"]["directory"])
        self.output_dir.mkdir(parents=True, exist_ok=True)

    @abstractmethod
    def write(self) -> Path:
        """
        Writes the payload and returns the path of the written file.
        """
        pass


class CsvTableWriter(ReportWriter):
    """
    Writes a DataFrame as CSV: header row, no index, 12 significant digits.
    """
    def write(self) -> Path:
        filename = self.output_dir / f"{self.name}.csv"
        self.payload.to_csv(filename, index=False, float_format=FLOAT_FORMAT)
        logger.info(f"Wrote {len(self.payload)} rows to {filename}")
        return filename


class JsonReportWriter(ReportWriter):
    """
    Writes a scalar report as sorted, indented JSON tagged with the project version.
    """
    def write(self) -> Path:
        filename = self.output_dir / f"{self.name}.json"
        document = {"version": get_project_version(), **_to_builtin(self.payload)}
        with open(filename, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write("\n")
        logger.info(f"Wrote report {filename}")
        return filename


def report_writer_factory(format: str, name: str, payload: Any, config: Config) -> ReportWriter:
    """
    Factory function to create a ReportWriter for the specified format.

    Args:
        format (str): "csv" or "json".
        name (str): File stem of the output.
        payload: DataFrame for "csv", mapping for "json".
        config (Config): The configuration object.

    Returns:
        ReportWriter: An instance of a concrete ReportWriter subclass.

    Raises:
        ValueError: If an unknown format is provided.
    """
    if format == "csv":
        return CsvTableWriter(name, payload, config)
    elif format == "json":
        return JsonReportWriter(name, payload, config)
    else:
        raise ValueError(f"Unknown report format: {format}")


def write_reports(
    tables: Mapping[str, pd.DataFrame], reports: Mapping[str, Mapping[str, Any]], config: Config
) -> list[Path]:
    """
    Writes every table as CSV and every report as JSON, one file each.

    Args:
        tables (Mapping[str, pd.DataFrame]): Tables keyed by file stem.
        reports (Mapping[str, Mapping]): Scalar reports keyed by file stem.
        config (Config): The configuration object.

    Returns:
        list[Path]: The written files, tables first.
    """
    written = [report_writer_factory("csv", name, df, config).write() for name, df in tables.items()]
    written += [report_writer_factory("json", name, report, config).write() for name, report in reports.items()]
    return written
