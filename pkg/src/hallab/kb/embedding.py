"""Deterministic hashed bag-of-words embeddings.

Stands in for a remote embedding service: lowercase, split on
non-alphanumerics, expand a small set of lab abbreviations, hash each token
into one of D buckets, weight counts by 1 + log, and normalize. Identical
text always embeds to an identical unit vector.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

DEFAULT_DIM = 256

_TOKEN_RE = re.compile(r"[0-9a-z]+")

# Shorthand common in lab notes, expanded so that abbreviated queries land
# near documents written out in full. Original tokens are kept alongside.
ABBREVIATIONS = {
    "vna": ("vector", "network", "analyzer"),
    "qnd": ("quantum", "non", "demolition"),
    "rilb": ("readout", "induced", "leakage", "benchmarking"),
    "rf": ("radio", "frequency"),
    "dc": ("direct", "current"),
    "api": ("application", "programming", "interface"),
}


class EmptyTextError(ValueError):
    """Embedding input was empty after trimming."""


class InvalidVectorError(ValueError):
    """Vector arguments with mismatched dimensions or zero norm."""


def tokenize(text: str) -> list[str]:
    tokens = []
    for token in _TOKEN_RE.findall(text.lower()):
        tokens.append(token)
        tokens.extend(ABBREVIATIONS.get(token, ()))
    return tokens


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    if not isinstance(text, str) or not text.strip():
        raise EmptyTextError("cannot embed empty text")
    counts = np.zeros(dim, dtype=float)
    for token in tokenize(text):
        counts[_bucket(token, dim)] += 1.0
    nonzero = counts > 0
    counts[nonzero] = 1.0 + np.log(counts[nonzero])
    norm = np.linalg.norm(counts)
    if norm == 0.0:
        # Text with no alphanumeric tokens: fall back to a whole-string bucket.
        counts[_bucket(text.strip().lower(), dim)] = 1.0
        norm = 1.0
    return counts / norm


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidVectorError("cosine needs two vectors of equal dimension")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise InvalidVectorError("cosine of a zero vector is undefined")
    return float(a @ b / (na * nb))
