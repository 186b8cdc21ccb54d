"""
CSV helpers shared by every file format of the pipeline

Floats are written with 17 significant digits so that a write/read cycle
reproduces every double exactly.
"""

import os
from typing import List, Optional

import numpy as np
import pandas as pd

from pop_cnn.exceptions import ArgumentError, throw

FLOAT_FORMAT = "%.17g"


def ensure_dir(path: str) -> str:
    """Create ``path`` (and parents) if missing and return it"""
    os.makedirs(path, exist_ok=True)
    return path


def write_matrix(path: str, values: np.ndarray) -> None:
    """
    Write a 2-D array as a header-less CSV (one row per sensor)

    Args:
        path: Output file
        values: Real matrix
    """
    pd.DataFrame(np.asarray(values, dtype=np.float64)).to_csv(
        path, header=False, index=False, float_format=FLOAT_FORMAT
    )


def read_matrix(path: str) -> np.ndarray:
    """
    Read a header-less numeric CSV into a float64 matrix

    Raises:
        FileNotFoundError: path does not exist
        ArgumentError: file is empty or holds non-numeric cells
    """
    try:
        frame = pd.read_csv(path, header=None, float_precision="round_trip")
    except pd.errors.EmptyDataError:
        throw("Sample file {0} is empty".format(path))
    try:
        return frame.to_numpy(dtype=np.float64)
    except ValueError:
        throw("Sample file {0} contains non-numeric cells".format(path))


def write_frame(path: str, frame: pd.DataFrame) -> None:
    """Write a DataFrame with header and exact float formatting"""
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_frame(path: str, required: Optional[List[str]] = None) -> pd.DataFrame:
    """
    Read a CSV with header, checking required columns

    Args:
        path: Input file
        required: Columns that must be present

    Returns:
        The parsed frame

    Raises:
        FileNotFoundError: path does not exist
        ArgumentError: empty file or missing columns
    """
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except pd.errors.EmptyDataError:
        throw("{0} is empty".format(path))
    except pd.errors.ParserError as e:
        throw("{0} is not a valid CSV: {1}".format(path, e))

    if frame.empty:
        throw("{0} holds no rows".format(path), ArgumentError)

    missing = [column for column in (required or []) if column not in frame.columns]
    if missing:
        throw("{0} lacks columns: {1}".format(path, ", ".join(missing)))

    return frame


def write_column(path: str, name: str, values) -> None:
    """Write a single named column"""
    write_frame(path, pd.DataFrame({name: list(values)}))
