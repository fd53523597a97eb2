"""CSV output with a '#' metadata preamble.

Every emitted file starts with comment lines of the form '# key: value'
followed by a normal header row. Floats are rendered with %.12g so a
rerun with the same seed is byte-identical.
"""

from __future__ import annotations

import os
from typing import Iterable, Mapping, Sequence


def format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def write_csv(path: str, metadata: Mapping[str, object], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for key, value in metadata.items():
            fh.write(f"# {key}: {format_cell(value)}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(cell) for cell in row) + "\n")
