"""The plan/develop cycle: the control loop of a lab session.

Each cycle asks two questions: what to do next (plan) and how to do it
(develop). Execution feedback returns as a free-text signal that the
planner reads in the next cycle, so no step needs a response schema.
Runtime failures become failure signals rather than session aborts.
"""

from __future__ import annotations

import logging

from ..kb.search import iterative_search
from ..kb.store import KnowledgeBase
from ..models import ModelRequest, ProtocolError
from ..runtime.ast_nodes import Assign, Call, ExprStmt, Index, Literal, Name
from ..runtime.environment import Environment, Script, register
from ..runtime.errors import DslSyntaxError, RegistryError
from ..runtime.interp import execute
from . import prompts
from .records import CycleRecord, Session, history_digest

logger = logging.getLogger(__name__)

DEVELOP_RETRIES = 2
NO_SIGNAL_TEXT = "(no signal reported)"


class EngineError(Exception):
    pass


class DevelopError(EngineError):
    """Developer kept producing unusable scripts."""


class ConflictError(EngineError):
    """Step approval attempted in the wrong state."""


def preprocess(raw: str, model) -> dict:
    """Split raw user input into queries and commands (original order)."""
    if not raw or not raw.strip():
        raise ValueError("empty user input")
    reply = model.generate(ModelRequest(
        role="preprocess",
        instructions=prompts.PREPROCESS_INSTRUCTIONS + raw,
    ))
    queries, commands = [], []
    section = None
    seen = False
    for line in reply.splitlines():
        line = line.strip()
        upper = line.upper()
        if upper.startswith("QUERIES:"):
            section, seen = "q", True
            line = line[len("QUERIES:"):].strip()
        elif upper.startswith("COMMANDS:"):
            section, seen = "c", True
            line = line[len("COMMANDS:"):].strip()
        if not line or section is None:
            continue
        (queries if section == "q" else commands).append(line)
    if not seen:
        raise ProtocolError(f"preprocess reply has no labels: {reply!r}")
    return {"queries": queries, "commands": commands}


def plan(session: Session, kb: KnowledgeBase, model) -> dict:
    """Ask what to do next.

    Returns {prompt, signal_description, done}; done means the protocol is
    complete and no further cycles should run without fresh input.
    """
    docs = iterative_search(session.objective or "next step", kb, model,
                            instructions=prompts.SEARCH_FOR_PLAN)
    reply = model.generate(ModelRequest(
        role="plan",
        instructions=prompts.PLAN_INSTRUCTIONS
        + f"\nCURRENT OBJECTIVE: {session.objective}",
        context_documents=docs,
        history_digest=history_digest(session),
    ))
    lines = reply.strip().splitlines()
    if not lines or not lines[0].strip():
        raise ProtocolError("empty planner reply")
    first = lines[0].strip()
    if first == "DONE":
        return {"prompt": "", "signal_description": "", "done": True}
    if not first.upper().startswith("SIGNAL:"):
        raise ProtocolError(
            f"planner reply must open with DONE or SIGNAL:, got {first!r}")
    signal_description = first[len("SIGNAL:"):].strip()
    body = "\n".join(lines[1:]).strip()
    if not body:
        raise ProtocolError("planner reply has no prompt body")
    return {"prompt": body, "signal_description": signal_description,
            "done": False}


def _strip_code_fences(text: str) -> str:
    lines = text.strip().splitlines()
    if lines and lines[0].strip().startswith("```"):
        lines = lines[1:]
        if lines and lines[-1].strip().startswith("```"):
            lines = lines[:-1]
    return "\n".join(lines).strip() + "\n"


def _assigns_signal(program) -> bool:
    """True when the script can report: it assigns the signal key itself or
    invokes other code that may (re-running a step keeps its signal)."""
    def signals(stmt) -> bool:
        if isinstance(stmt, Assign):
            t = stmt.target
            if (isinstance(t, Index) and isinstance(t.obj, Name)
                    and t.obj.ident == "STATE"
                    and isinstance(t.index, Literal)
                    and t.index.value == "__signal__"):
                return True
        if (isinstance(stmt, ExprStmt) and isinstance(stmt.expr, Call)
                and isinstance(stmt.expr.callee, Name)
                and stmt.expr.callee.ident == "invoke"):
            return True
        return False

    def walk(stmts):
        for stmt in stmts:
            if signals(stmt):
                return True
            for attr in ("body", "orelse"):
                block = getattr(stmt, attr, None)
                if block and walk(block):
                    return True
            for cond_block in getattr(stmt, "branches", []) or []:
                if walk(cond_block[1]):
                    return True
        return False

    return walk(program.body)


def develop(prompt: str, signal_description: str, kb: KnowledgeBase,
            runtime_info: str, model, retries: int = DEVELOP_RETRIES) -> str:
    """Turn a planner prompt into script source that parses and reports.

    Bad generations are retried with the parse error appended, at most
    ``retries`` times.
    """
    if not prompt.strip():
        raise ValueError("empty developer prompt")
    docs = iterative_search(prompt, kb, model,
                            instructions=prompts.SEARCH_FOR_DEVELOP)
    base = (prompts.DEVELOP_INSTRUCTIONS
            + f"\nEXPECTED SIGNAL: {signal_description}"
            + f"\n\nPROMPT:\n{prompt}\n\nRUNTIME:\n{runtime_info}")
    feedback = ""
    for _attempt in range(retries + 1):
        reply = model.generate(ModelRequest(
            role="develop",
            instructions=base + feedback,
            context_documents=docs,
        ))
        source = _strip_code_fences(reply)
        try:
            program = Script(source)
        except DslSyntaxError as exc:
            feedback = f"\n\nPREVIOUS ATTEMPT FAILED TO PARSE: {exc}"
            continue
        if not _assigns_signal(program.ast):
            feedback = "\n\nPREVIOUS ATTEMPT NEVER ASSIGNED SIGNAL"
            continue
        return source
    raise DevelopError(f"developer produced no usable script "
                       f"after {retries} retries")


def execute_record(session: Session, env: Environment, record: CycleRecord):
    """Run a developed script and fold the outcome into the record."""
    session.events.append("execution_started", {"cycle": record.index})
    result = execute(Script(record.script_source), env)
    if result.error is not None:
        record.status = "failed"
        err = result.error
        record.signal_value = (f"{err['kind']} error at line {err['line']}: "
                               f"{err['message']}")
        session.events.append("error", {"cycle": record.index,
                                        "error": err,
                                        "signal": record.signal_value})
    else:
        record.status = "executed"
        record.signal_value = (result.signal if result.signal is not None
                               else NO_SIGNAL_TEXT)
        session.events.append("signal", {"cycle": record.index,
                                         "value": record.signal_value,
                                         "log": result.log})
    return record


def run_cycle(session: Session, kb: KnowledgeBase, env: Environment, model,
              user_input: str | None = None) -> CycleRecord | None:
    """Advance the session by one cycle.

    Queries in the input are answered without creating a cycle. Returns the
    new record, or None when the input was queries only or the planner
    declared the protocol done. Manual mode stops at pending_approval.
    """
    if session.done and user_input is None:
        raise EngineError("session is done; provide new input to continue")

    command = None
    if user_input is not None:
        session.events.append("user_input", {"text": user_input})
        split = preprocess(user_input, model)
        for query in split["queries"]:
            reply = answer(query, kb, model)
            session.events.append("query_answer",
                                  {"query": query, "answer": reply})
        if not split["commands"]:
            return None
        command = "; ".join(split["commands"])
        session.objective = command
        session.done = False

    planned = plan(session, kb, model)
    if planned["done"]:
        session.done = True
        session.events.append("done", {"cycles": len(session.history)})
        return None

    record = CycleRecord(index=session.next_index(), user_input=command,
                         prompt=planned["prompt"],
                         signal_description=planned["signal_description"])
    session.history.append(record)
    session.events.append("plan", {
        "cycle": record.index,
        "prompt": record.prompt,
        "signal_description": record.signal_description,
        "user_input": command,
    })

    source = develop(record.prompt, record.signal_description, kb,
                     prompts.runtime_info(env), model)
    record.script_source = source
    record.status = "developed"
    try:
        register(env, f"step-{record.index}", Script(source))
    except RegistryError:
        logger.warning("step-%d already registered; keeping first version",
                       record.index)
    session.events.append("code", {"cycle": record.index, "source": source})

    if session.mode == "manual":
        record.status = "pending_approval"
        return record
    return execute_record(session, env, record)


def approve_step(session: Session, env: Environment,
                 cycle_index: int) -> CycleRecord:
    """Execute a step held for human review (manual mode)."""
    record = session.record(cycle_index)
    if record is None:
        raise ConflictError(f"no cycle {cycle_index} in session {session.id!r}")
    if record.status != "pending_approval":
        raise ConflictError(
            f"cycle {cycle_index} is {record.status!r}, not pending_approval")
    return execute_record(session, env, record)


def answer(query: str, kb: KnowledgeBase, model, thinking: str = "low") -> str:
    """Context-supported chatbot; answers never mutate the cycle history."""
    if not query.strip():
        raise ValueError("empty query")
    docs = iterative_search(query, kb, model,
                            instructions=prompts.SEARCH_FOR_ANSWER)
    reply = model.generate(ModelRequest(
        role="answer",
        instructions=prompts.ANSWER_INSTRUCTIONS + f"\nQUESTION: {query}",
        context_documents=docs,
        thinking=thinking,
    ))
    if not docs:
        return "[no documents retrieved] " + reply
    return reply


def prepare_knowledge(lab_independent_text: str, leading_prompt: str,
                      kb: KnowledgeBase, model) -> str:
    """Turn published-procedure text into a lab-specific plan document.

    The answer component (high thinking) merges the lab-independent
    instructions with retrieved house conventions; the reply is stored as a
    plan document and is immediately retrievable.
    """
    if not lab_independent_text.strip() or not leading_prompt.strip():
        raise ValueError("both texts must be non-empty")
    reply = answer(leading_prompt + "\n\nLAB-INDEPENDENT INSTRUCTIONS:\n"
                   + lab_independent_text, kb, model, thinking="high")
    if not reply.strip():
        raise ProtocolError("empty knowledge-preparation reply")

    lines = reply.strip().splitlines()
    title = lines[0].strip().lstrip("# ") if len(lines[0]) < 80 else "Generated plan"
    body = reply.strip() + "\n"
    count = 1
    while True:
        doc_id = f"plan-gen-{count}"
        if kb.get(doc_id) is None:
            break
        count += 1
    return kb.add_document(doc_id, title, "plan", body)
