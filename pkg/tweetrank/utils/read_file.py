"""Utils for reading the tab-separated inputs of the pipeline."""

import csv
from typing import List, Optional

import fsspec
import pandas as pd

from tweetrank.utils.fs import require_exists


def file_opener(filename, mode="r"):
    """File reader stream. `.gz` files are decompressed on the fly."""
    filename = str(filename)
    if "w" in mode:
        filename = "simplecache::" + filename
    if filename.endswith(".gz"):
        instream = fsspec.open(filename, mode=mode, compression="gzip", encoding="utf-8")
    elif "b" in mode:
        instream = fsspec.open(filename, mode=mode)
    else:
        instream = fsspec.open(filename, mode=mode, encoding="utf-8")
    return instream


def read_tsv(filepath, names: List[str], what: Optional[str] = None) -> pd.DataFrame:
    r"""
    Read a header-less TSV file into a `pandas.DataFrame` of strings.

    Quoting is disabled so tweets can contain any character but tabs, and
    empty fields are kept as empty strings instead of NaN.

    Parameters:
        filepath: Path supported by `fsspec`. Also supports `.gz` files.
        names: Column names, in file order. Missing trailing columns are empty.
        what: Description of the file, used in the error message when it is missing.
    """
    require_exists(filepath, what=what or "file")
    with file_opener(filepath, "r") as file_in:
        df = pd.read_csv(
            file_in,
            sep="\t",
            header=None,
            names=names,
            dtype=str,
            quoting=csv.QUOTE_NONE,
            keep_default_na=False,
            na_filter=False,
            index_col=False,
        )
    return df.fillna("")
