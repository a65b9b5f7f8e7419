"""Instruction texts for each model role.

These are tunable fixtures: the protocol lines (DONE / SIGNAL: / DROP: /
QUERIES: / COMMANDS:) are load-bearing, the prose is not.
"""

from __future__ import annotations

PREPROCESS_INSTRUCTIONS = """\
Split the user message into questions and actions. A query is phrased as a
question and expects a written answer; a command asks for something to be
done in the lab. Keep the original wording and order. Reply with:
QUERIES: one query per line (possibly none)
COMMANDS: one command per line (possibly none)

USER MESSAGE:
"""

PLAN_INSTRUCTIONS = """\
You are the planner of an autonomous lab session. Given the relevant
documents and the step history below, decide the single next step.
If the protocol is complete, reply with a single first line: DONE
Otherwise reply with a first line
SIGNAL: <one-line description of the signal the step must report>
followed by a detailed prompt for the developer describing the step. Keep
data acquisition and data analysis in separate steps.
"""

DEVELOP_INSTRUCTIONS = """\
You are the developer. Implement the prompt below as a script for the lab
runtime. Reply with the script source only, no commentary. The script must
assign SIGNAL at least once to report the outcome described by the
expected-signal line.
"""

ANSWER_INSTRUCTIONS = """\
Answer the question below for a lab user, grounded on the attached
documents when they are relevant. Be concrete and concise.
"""

from ..kb.search import SEARCH_INSTRUCTIONS as _SEARCH_BASE

SEARCH_FOR_PLAN = _SEARCH_BASE + """\
Focus on experimental plans and protocol documents relevant to the task.
"""

SEARCH_FOR_DEVELOP = _SEARCH_BASE + """\
Focus on API documents and code examples needed to implement the task.
"""

SEARCH_FOR_ANSWER = _SEARCH_BASE + """\
Focus on any documents that help answer the question.
"""

RUNTIME_GRAMMAR_NOTE = """\
Script language: newline-terminated statements; assignments, arithmetic,
comparisons, and/or/not, if/elif/else, while, for-in over lists, list and
map literals with string keys, indexing, builtin calls. Blocks use braces.
STATE is the persistent shared map; SIGNAL = expr reports the step result.
"""


def runtime_info(env) -> str:
    """Developer-facing summary of what the sandbox currently offers."""
    from ..runtime.builtins import default_builtins

    by_group: dict[str, list] = {}
    for name, (group, _fn) in sorted(default_builtins().items()):
        if group == "always" or group in env.capabilities:
            by_group.setdefault(group, []).append(name)
    lines = [RUNTIME_GRAMMAR_NOTE, "Available builtins:"]
    for group in sorted(by_group):
        lines.append(f"  {group}: {', '.join(by_group[group])}")
    if env.registry:
        lines.append("Registered scripts (runnable via invoke):")
        lines.append("  " + ", ".join(sorted(env.registry)))
    if env.state:
        lines.append("Current STATE keys: " + ", ".join(sorted(env.state)))
    return "\n".join(lines)
