"""Plain-text set files.

Format::

    n=<dim>
    # comments are allowed anywhere
    0101
    1100

Elements are binary strings of exactly n characters, coordinate 1 first.
Writers emit them in ascending order; readers accept any order but reject
duplicates.
"""

from __future__ import annotations

import hashlib
import os
from typing import Union

from .gf2core import MAX_DIM, F2Set

PathLike = Union[str, os.PathLike]


class SetFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<set>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def parse_set(text: str, source: str = "<set>") -> F2Set:
    dim = None
    elements: list[int] = []
    seen: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if dim is None:
            if not line.startswith("n="):
                raise SetFileError(f"expected header 'n=<dim>', got {line!r}", lineno, source)
            try:
                dim = int(line[2:])
            except ValueError:
                raise SetFileError(f"bad dimension in header {line!r}", lineno, source) from None
            if not 1 <= dim <= MAX_DIM:
                raise SetFileError(f"dimension {dim} outside [1, {MAX_DIM}]", lineno, source)
            continue
        if len(line) != dim or set(line) - {"0", "1"}:
            raise SetFileError(
                f"expected a binary string of length {dim}, got {line!r}", lineno, source
            )
        value = int(line, 2)
        if value in seen:
            raise SetFileError(f"duplicate element {line}", lineno, source)
        seen.add(value)
        elements.append(value)
    if dim is None:
        raise SetFileError("missing header 'n=<dim>'", None, source)
    return F2Set(dim, elements)


def format_set(A: F2Set) -> str:
    lines = [f"n={A.dim}"]
    lines.extend(format(b, f"0{A.dim}b") for b in A.bits)
    return "\n".join(lines) + "\n"


def read_set(path: PathLike) -> F2Set:
    with open(path, encoding="utf-8") as fh:
        return parse_set(fh.read(), source=os.fspath(path))


def write_set(A: F2Set, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_set(A))


def set_digest(A: F2Set) -> str:
    """sha256 of the canonical file rendering."""
    return hashlib.sha256(format_set(A).encode("utf-8")).hexdigest()
