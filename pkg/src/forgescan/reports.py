"""Atomic JSON/CSV/PNG output."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Callable, Iterable

from .imaging import PathLike

SCHEMA_VERSION = "1"


def atomic_write(path: PathLike, write: Callable[[Path], None]) -> None:
    """Call ``write`` on a temp file beside ``path``, then rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    os.close(fd)
    try:
        write(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text(path: PathLike, text: str) -> None:
    def _w(tmp: Path) -> None:
        tmp.write_text(text, encoding="utf-8")
    atomic_write(path, _w)


def write_json(path: PathLike, payload: dict) -> None:
    body = {"schema_version": SCHEMA_VERSION, **payload}
    write_text(path, json.dumps(body, indent=2, sort_keys=True) + "\n")


def write_csv(path: PathLike, header: list[str], rows: Iterable[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    write_text(path, buf.getvalue())
