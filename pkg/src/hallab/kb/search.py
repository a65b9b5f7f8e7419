"""Iterative retrieval agent over the knowledge base.

Plain cosine retrieval misses documents that are only reachable through
cross-references, so the agent loops: the model prunes irrelevant gathered
documents and raises follow-up queries for anything still missing; each new
query pulls fresh candidates into the gathered set. Termination is enforced
structurally (duplicate queries are skipped, iterations are capped), never
assumed of the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..models import ModelRequest
from .embedding import embed
from .store import KnowledgeBase

MAX_ITERATIONS = 5
TOP_K = 4

SEARCH_INSTRUCTIONS = """\
You maintain the document set for a lab task. Review the gathered documents
below. Reply with two labeled sections and nothing else that matters:
DROP: followed by one gathered document id per line that is irrelevant
(leave the section empty to keep everything), then QUERIES: followed by one
short search query per line for information still missing (leave empty when
the gathered set is sufficient).
"""


class SearchProtocolError(Exception):
    """Unparseable search reply; carries the raw model text."""

    def __init__(self, message: str, raw_reply: str):
        super().__init__(message)
        self.raw_reply = raw_reply


@dataclass
class SearchState:
    task: str
    queries_done: list = field(default_factory=list)
    gathered: list = field(default_factory=list)  # ordered, no duplicates
    iteration: int = 0

    def add(self, doc_id: str):
        if doc_id not in self.gathered:
            self.gathered.append(doc_id)

    def render(self, kb: KnowledgeBase) -> str:
        lines = [f"TASK: {self.task}", "",
                 f"QUERIES ALREADY SEARCHED: {'; '.join(self.queries_done)}",
                 "", "GATHERED DOCUMENTS:"]
        if not self.gathered:
            lines.append("(none)")
        for doc_id in self.gathered:
            doc = kb.get(doc_id)
            title = doc.title if doc else "(missing)"
            body = doc.body if doc else ""
            lines.append(f"[{doc_id}] {title}")
            lines.append(body)
            lines.append("")
        return "\n".join(lines)


def parse_search_reply(reply: str) -> tuple[list, list]:
    """Extract DROP/QUERIES sections; text outside the labels is ignored."""
    drops, queries = [], []
    section = None
    seen_label = False
    for raw in reply.splitlines():
        line = raw.strip()
        upper = line.upper()
        if upper.startswith("DROP:"):
            section, seen_label = "drop", True
            line = line[len("DROP:"):].strip()
        elif upper.startswith("QUERIES:"):
            section, seen_label = "queries", True
            line = line[len("QUERIES:"):].strip()
        if not line or section is None:
            continue
        if section == "drop":
            drops.append(line)
        else:
            queries.append(line)
    if not seen_label:
        raise SearchProtocolError("search reply has no DROP:/QUERIES: labels",
                                  reply)
    return drops, queries


def iterative_search(task: str, kb: KnowledgeBase, model,
                     max_iter: int = MAX_ITERATIONS, k: int = TOP_K,
                     instructions: str = SEARCH_INSTRUCTIONS) -> list:
    """Gather documents relevant to ``task``; returns them in
    first-gathered order. An empty knowledge base short-circuits to []."""
    if len(kb) == 0:
        return []
    state = SearchState(task=task)
    state.queries_done.append(task)
    for doc_id, _score in kb.top_k(embed(task, kb.dim), k):
        state.add(doc_id)

    while state.iteration < max_iter:
        state.iteration += 1
        reply = model.generate(ModelRequest(
            role="search",
            instructions=instructions + "\n" + state.render(kb),
        ))
        drops, queries = parse_search_reply(reply)
        for doc_id in drops:
            if doc_id in state.gathered:
                state.gathered.remove(doc_id)
        new_queries = [q for q in queries if q not in state.queries_done]
        if not new_queries:
            break
        for query in new_queries:
            state.queries_done.append(query)
            for doc_id, _score in kb.top_k(embed(query, kb.dim), k):
                state.add(doc_id)
    return [kb.get(doc_id) for doc_id in state.gathered if kb.get(doc_id)]


class MemorizeError(Exception):
    """Step not found or not successful."""


def memorize(kb: KnowledgeBase, session, step_index: int, title: str) -> str:
    """Convert a successful session step into a retrievable code example.

    The stored body carries the step's prompt, signal description, and the
    script source inside a fenced block, so the runtime's invoke can run it
    by document id.
    """
    record = None
    for rec in session.history:
        if rec.index == step_index:
            record = rec
            break
    if record is None:
        raise MemorizeError(f"no step {step_index} in session {session.id!r}")
    if record.status != "executed":
        raise MemorizeError(
            f"step {step_index} has status {record.status!r}, not executed")
    doc_id = f"example-{session.id}-step-{step_index}"
    body = (f"Prompt: {record.prompt}\n"
            f"Signal description: {record.signal_description}\n"
            f"Observed signal: {record.signal_value}\n"
            "\n"
            "```\n"
            f"{record.script_source.rstrip()}\n"
            "```\n")
    return kb.add_document(doc_id, title, "example", body)
