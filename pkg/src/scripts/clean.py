"""
Deletes the CSV tables and JSON reports written to the configured output
directory. Other files and the directory itself are left alone.

    uv run python -m src.scripts.clean
"""

import logging
from pathlib import Path
from typing import Sequence

from src.utils.config_loader import ConfigLoader
from src.utils.types_custom import Config

logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")

OUTPUT_PATTERNS = ("*.csv", "*.json")


def clean_output_directory(config: Config, patterns: Sequence[str] = OUTPUT_PATTERNS) -> list[Path]:
    """
    :return: the files that were removed.
    """
    output_dir = Path(config["output"]["directory"])
    if not output_dir.is_dir():
        logging.info(f"No output directory at '{output_dir}'; nothing to clean.")
        return []

    removed = []
    for path in sorted(p for pattern in patterns for p in output_dir.glob(pattern)):
        try:
            path.unlink()
        except OSError as e:
            logging.error(f"Could not remove {path}: {e}")
            continue
        removed.append(path)
    logging.info(f"Removed {len(removed)} output files from '{output_dir}'.")
    return removed


if __name__ == "__main__":
    clean_output_directory(ConfigLoader().settings)
