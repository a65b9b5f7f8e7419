"""Columnar dataset container persisted as JSON on the storage directory.

Layout: {"meta": {name: scalar}, "columns": {name: [finite numbers]}}.
Complex data is stored by convention as paired ``<name>_re`` / ``<name>_im``
columns. Canonical path: <storage_root>/<session_id>/<label>.ds.json.
"""

from __future__ import annotations

import json
import math
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path


class DatasetError(Exception):
    pass


class MissingDatasetError(DatasetError):
    pass


class MalformedDatasetError(DatasetError):
    pass


_LABEL_RE = re.compile(r"^[A-Za-z0-9._-]+$")


@dataclass
class Dataset:
    meta: dict = field(default_factory=dict)
    columns: dict = field(default_factory=dict)

    def validate(self):
        lengths = set()
        for name, values in self.columns.items():
            if not isinstance(name, str):
                raise MalformedDatasetError("column names must be strings")
            try:
                vals = [float(v) for v in values]
            except (TypeError, ValueError) as exc:
                raise MalformedDatasetError(
                    f"column {name!r} holds non-numeric data") from exc
            if any(not math.isfinite(v) for v in vals):
                raise MalformedDatasetError(
                    f"column {name!r} holds non-finite values")
            lengths.add(len(vals))
        if len(lengths) > 1:
            raise MalformedDatasetError("ragged columns")
        for key, value in self.meta.items():
            if not isinstance(key, str):
                raise MalformedDatasetError("meta keys must be strings")
            if not isinstance(value, (str, int, float, bool, type(None))):
                raise MalformedDatasetError(
                    f"meta value for {key!r} is not a scalar")
            if isinstance(value, float) and not math.isfinite(value):
                raise MalformedDatasetError(
                    f"meta value for {key!r} is not finite")

    def to_json(self) -> str:
        return json.dumps({"meta": self.meta, "columns": self.columns},
                          sort_keys=True)


class Storage:
    """Dataset store rooted at a directory; writes are atomic."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, session_id: str, label: str) -> Path:
        if not _LABEL_RE.match(label):
            raise DatasetError(f"invalid dataset label {label!r}")
        if not _LABEL_RE.match(session_id):
            raise DatasetError(f"invalid session id {session_id!r}")
        return self.root / session_id / f"{label}.ds.json"

    def save(self, session_id: str, label: str, dataset: Dataset) -> str:
        dataset.validate()
        path = self.path_for(session_id, label)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(dataset.to_json())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return str(path)

    def load(self, path) -> Dataset:
        return load_dataset(path)

    def relative(self, path) -> str:
        """Path relative to the storage root (for portable reports)."""
        return str(Path(path).resolve().relative_to(self.root.resolve()))


def load_dataset(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise MissingDatasetError(f"no dataset at {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedDatasetError(f"unreadable dataset at {path}: {exc}") from exc
    if not isinstance(raw, dict) or "columns" not in raw:
        raise MalformedDatasetError(f"not a dataset container: {path}")
    ds = Dataset(meta=raw.get("meta", {}), columns=raw["columns"])
    ds.validate()
    return ds
