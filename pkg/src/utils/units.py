"""
Presents entropy-valued table columns in the configured logarithm base.
"""

import collections.abc
import functools
from typing import Sequence

import pandas as pd

from .qmath import nats_to_bits

LOG_BASES = ("nats", "bits")


def _check_log_base(log_base: str) -> None:
    if log_base not in LOG_BASES:
        raise ValueError(f"Unknown log base: {log_base} (expected one of {LOG_BASES})")


def value_in_log_base(value: float, log_base: str) -> float:
    """A single entropy given in nats, expressed in `log_base`."""
    _check_log_base(log_base)
    return value if log_base == "nats" else nats_to_bits(value)


def to_log_base(df: pd.DataFrame, log_base: str, columns: Sequence[str]) -> pd.DataFrame:
    """
    Rescale `columns` by 1/log 2 when `log_base` is "bits" and rename any
    `*_nats` column to `*_bits`. Other columns are returned untouched.
    """
    _check_log_base(log_base)
    if log_base == "nats":
        return df
    out = df.copy()
    for col in columns:
        out[col] = nats_to_bits(out[col])
    return out.rename(columns={c: c[: -len("_nats")] + "_bits" for c in columns if c.endswith("_nats")})


def in_log_base(
    log_base: str, columns: Sequence[str]
) -> collections.abc.Callable[[collections.abc.Callable[..., pd.DataFrame]], collections.abc.Callable[..., pd.DataFrame]]:
    """
    Decorator converting the entropy columns of a DataFrame-returning function.
    """
    def decorator(table_func: collections.abc.Callable[..., pd.DataFrame]) -> collections.abc.Callable[..., pd.DataFrame]:
        @functools.wraps(table_func)
        def wrapper(*args, **kwargs) -> pd.DataFrame:
            return to_log_base(table_func(*args, **kwargs), log_base, columns)
        return wrapper
    return decorator
