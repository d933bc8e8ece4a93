"""
Tree-syntax file persistence.

Stores and reports are written as canonical tree documents. Writes go to
a sibling temporary file first and then replace the target, so a reader
never sees a half-written store.
"""

import logging
import os
from pathlib import Path
from typing import Any, Union

from sysdesc.tree import dumps, load_file


logger = logging.getLogger(__name__)


def save_tree(path: Union[str, Path], value: Any) -> Path:
    """Write a value as a canonical tree document, replacing the file atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    scratch = path.with_name(path.name + ".tmp")
    scratch.write_text(dumps(value), encoding="utf-8")
    os.replace(scratch, path)
    logger.debug("saved %s", path)
    return path


def load_tree(path: Union[str, Path]) -> Any:
    """Read a tree document written by save_tree."""
    return load_file(path)


def write_text(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
