"""Path helpers that work the same on local disk and on remote `fsspec` URLs."""

import os
from typing import Optional, Union

import fsspec

from tweetrank.errors import MissingPathError

PathLike = Union[str, os.PathLike]


def _filesystem(path: PathLike) -> fsspec.AbstractFileSystem:
    fs, _ = fsspec.core.url_to_fs(str(path))
    return fs


def exists(path: Optional[PathLike]) -> bool:
    """True when `path` names an existing file or directory. `None` never exists."""
    if path is None:
        return False
    return _filesystem(path).exists(str(path))


def require_exists(path: Optional[PathLike], what: str = "file"):
    """Raise `MissingPathError` (exit code 2) naming `path` when it does not exist."""
    if not exists(path):
        raise MissingPathError(str(path), what=what)


def mkdir(path: PathLike, exist_ok: bool = True):
    _filesystem(path).mkdirs(str(path), exist_ok=exist_ok)


def join(*paths) -> str:
    """Glue path parts with the separator of the filesystem the first part lives on."""
    head, *tail = [str(path) for path in paths]
    sep = _filesystem(head).sep
    return sep.join([head.rstrip(sep)] + tail)


def get_basename(path: PathLike) -> str:
    """Last component of `path`, ignoring a trailing separator."""
    path = str(path)
    sep = _filesystem(path).sep
    return path.rstrip(sep).rsplit(sep, 1)[-1]
