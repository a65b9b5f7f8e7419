"""Knowledge base: documents, embeddings, iterative retrieval."""

from .embedding import (DEFAULT_DIM, EmptyTextError, InvalidVectorError,
                        cosine, embed, tokenize)
from .search import (MAX_ITERATIONS, TOP_K, MemorizeError, SearchProtocolError,
                     SearchState, iterative_search, memorize,
                     parse_search_reply)
from .store import Document, DocumentError, KnowledgeBase, parse_document_file

__all__ = [
    "DEFAULT_DIM", "Document", "DocumentError", "EmptyTextError",
    "InvalidVectorError", "KnowledgeBase", "MAX_ITERATIONS", "MemorizeError",
    "SearchProtocolError", "SearchState", "TOP_K", "cosine", "embed",
    "iterative_search", "memorize", "parse_document_file",
    "parse_search_reply", "tokenize",
]
