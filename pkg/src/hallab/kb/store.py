"""Document store with embedding index and on-disk persistence.

Documents persist one file per document: a front-matter header (id, title,
kind, refs) followed by a blank line and the body. Embeddings live in a
sidecar binary file: magic ``HALV``, u32 dimension, u32 count, then per
record a u16 id length, the id bytes, and D little-endian float32 values.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedding import DEFAULT_DIM, embed

DOC_KINDS = ("plan", "api", "example", "tutorial")
_MAGIC = b"HALV"


class DocumentError(ValueError):
    pass


@dataclass
class Document:
    id: str
    title: str
    kind: str
    body: str
    refs: list = field(default_factory=list)
    embedding: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in DOC_KINDS:
            raise DocumentError(f"unknown document kind {self.kind!r}")
        if not self.id or any(c in self.id for c in " \t\n/"):
            raise DocumentError(f"invalid document id {self.id!r}")


class KnowledgeBase:
    """In-memory index; writers take the lock, searches read a snapshot."""

    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim
        self._docs: dict[str, Document] = {}
        self._lock = threading.Lock()
        self._snapshot = ((), None)  # (ids tuple, matrix)

    def __len__(self) -> int:
        return len(self._docs)

    def get(self, doc_id: str) -> Document | None:
        return self._docs.get(doc_id)

    def ids(self) -> list:
        return list(self._docs)

    def documents(self) -> list:
        return list(self._docs.values())

    def add_document(self, doc_id, title, kind, body, refs=None) -> str:
        doc = Document(id=doc_id, title=title, kind=kind, body=body,
                       refs=list(refs or []))
        doc.embedding = embed(f"{title}\n{body}", self.dim)
        with self._lock:
            if doc.id in self._docs:
                raise DocumentError(f"duplicate document id {doc.id!r}")
            self._docs[doc.id] = doc
            self._rebuild_snapshot()
        return doc.id

    def _rebuild_snapshot(self):
        ids = tuple(self._docs)
        if ids:
            matrix = np.stack([self._docs[i].embedding for i in ids])
        else:
            matrix = None
        self._snapshot = (ids, matrix)

    def top_k(self, query_vector, k: int):
        """Ranked (doc id, cosine) pairs, score descending then id ascending."""
        ids, matrix = self._snapshot
        if matrix is None:
            return []
        query = np.asarray(query_vector, dtype=float)
        scores = matrix @ query
        order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
        return [(ids[i], float(scores[i])) for i in order[:max(k, 0)]]

    def search_text(self, text: str, k: int = 4):
        return self.top_k(embed(text, self.dim), k)

    def lint(self) -> list:
        """Dangling-reference warnings: (doc id, missing ref id) pairs."""
        warnings = []
        for doc in self._docs.values():
            for ref in doc.refs:
                if ref not in self._docs:
                    warnings.append((doc.id, ref))
        return warnings

    # -- persistence --------------------------------------------------------

    def save_dir(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with self._lock:
            docs = list(self._docs.values())
        for doc in docs:
            header = (f"id: {doc.id}\n"
                      f"title: {doc.title}\n"
                      f"kind: {doc.kind}\n"
                      f"refs: {', '.join(doc.refs)}\n\n")
            (directory / f"{doc.id}.md").write_text(header + doc.body,
                                                    encoding="utf-8")
        self._save_vectors(directory / "embeddings.halv", docs)

    def _save_vectors(self, path, docs):
        chunks = [_MAGIC, struct.pack("<II", self.dim, len(docs))]
        for doc in docs:
            id_bytes = doc.id.encode("utf-8")
            chunks.append(struct.pack("<H", len(id_bytes)))
            chunks.append(id_bytes)
            chunks.append(np.asarray(doc.embedding,
                                     dtype="<f4").tobytes())
        Path(path).write_bytes(b"".join(chunks))

    @classmethod
    def load_dir(cls, directory, dim: int = DEFAULT_DIM) -> "KnowledgeBase":
        directory = Path(directory)
        kb = cls(dim=dim)
        vectors = _load_vectors(directory / "embeddings.halv")
        for path in sorted(directory.glob("*.md")):
            doc = parse_document_file(path.read_text(encoding="utf-8"))
            stored = vectors.get(doc.id)
            doc.embedding = (stored if stored is not None
                             else embed(f"{doc.title}\n{doc.body}", kb.dim))
            with kb._lock:
                kb._docs[doc.id] = doc
        with kb._lock:
            kb._rebuild_snapshot()
        return kb


def parse_document_file(text: str) -> Document:
    head, sep, body = text.partition("\n\n")
    if not sep:
        raise DocumentError("document file has no blank line after header")
    fields = {}
    for line in head.splitlines():
        key, sep2, value = line.partition(":")
        if not sep2:
            raise DocumentError(f"malformed header line {line!r}")
        fields[key.strip()] = value.strip()
    for required in ("id", "title", "kind"):
        if required not in fields:
            raise DocumentError(f"document header missing {required!r}")
    refs = [r.strip() for r in fields.get("refs", "").split(",") if r.strip()]
    return Document(id=fields["id"], title=fields["title"],
                    kind=fields["kind"], body=body, refs=refs)


def _load_vectors(path) -> dict:
    path = Path(path)
    if not path.exists():
        return {}
    data = path.read_bytes()
    if data[:4] != _MAGIC:
        raise DocumentError("embedding sidecar has a bad magic")
    dim, count = struct.unpack_from("<II", data, 4)
    offset = 12
    vectors = {}
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        doc_id = data[offset:offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset)
        offset += 4 * dim
        vec = vec.astype(float)
        norm = np.linalg.norm(vec)
        # Renormalize away float32 quantization to keep unit-norm exact.
        vectors[doc_id] = vec / norm if norm > 0 else vec
    return vectors
