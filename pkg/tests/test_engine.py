from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hallab.engine import (ConflictError, DevelopError, ProtocolError,
                           ScriptedModel, ScriptedModelMismatch, Session,
                           answer, approve_step, develop, history_digest,
                           plan, prepare_knowledge, preprocess, run_cycle)
from hallab.engine.records import CycleRecord
from hallab.events import counting_clock
from hallab.kb import KnowledgeBase
from hallab.models import ModelRequest, parse_transcript
from hallab.runtime import Environment
from hallab.engine.prompts import runtime_info


NO_SEARCH = ("search", "", "DROP:\nQUERIES:\n")


def make_kb():
    kb = KnowledgeBase()
    kb.add_document("coding-guide", "Scripting guide", "tutorial",
                    "Assign SIGNAL to report results.")
    return kb


# -- preprocess ----------------------------------------------------------------

def test_preprocess_query_vs_command():
    model = ScriptedModel([
        ("preprocess", "how to restart the computer",
         "QUERIES:\nhow to restart the computer\nCOMMANDS:\n"),
        ("preprocess", "restart the computer",
         "QUERIES:\nCOMMANDS:\nrestart the computer\n"),
        ("preprocess", "measure resonator 3",
         "QUERIES:\nwhat is Qc?\nCOMMANDS:\nthen measure resonator 3\n"),
    ])
    assert preprocess("how to restart the computer", model) == {
        "queries": ["how to restart the computer"], "commands": []}
    assert preprocess("restart the computer", model) == {
        "queries": [], "commands": ["restart the computer"]}
    split = preprocess("what is Qc? then measure resonator 3", model)
    assert len(split["queries"]) == 1 and len(split["commands"]) == 1


def test_preprocess_protocol_error():
    model = ScriptedModel([("preprocess", "", "just some text")])
    with pytest.raises(ProtocolError):
        preprocess("hello", model)


# -- plan -----------------------------------------------------------------------

def test_plan_parses_signal_line_and_done():
    kb = make_kb()
    session = Session(id="s", objective="characterize resonators")
    model = ScriptedModel([
        NO_SEARCH,
        ("plan", "characterize resonators",
         "SIGNAL: number of found resonators\nAcquire a wide spectrum "
         "with the configured range and save the dataset."),
    ])
    out = plan(session, kb, model)
    assert out["done"] is False
    assert out["signal_description"] == "number of found resonators"
    assert "wide spectrum" in out["prompt"]

    model_done = ScriptedModel([NO_SEARCH, ("plan", "", "DONE")])
    assert plan(session, kb, model_done)["done"] is True


def test_plan_rejects_malformed_reply():
    kb = make_kb()
    session = Session(id="s")
    model = ScriptedModel([NO_SEARCH, ("plan", "", "do something")])
    with pytest.raises(ProtocolError):
        plan(session, kb, model)


# -- develop ---------------------------------------------------------------------

def test_develop_returns_parsing_source():
    kb = make_kb()
    model = ScriptedModel([
        NO_SEARCH,
        ("develop", "acquire", 'x = 1\nSIGNAL = "Success"\n'),
    ])
    src = develop("acquire wide sweep", "success indicator", kb,
                  "runtime info", model)
    assert 'SIGNAL = "Success"' in src


def test_develop_retries_on_parse_error_then_succeeds():
    kb = make_kb()
    model = ScriptedModel([
        NO_SEARCH,
        ("develop", "", "x = 1 +"),
        ("develop", "PREVIOUS ATTEMPT FAILED TO PARSE",
         '```\nSIGNAL = "ok"\n```'),
    ])
    src = develop("do it", "sig", kb, "", model)
    assert src == 'SIGNAL = "ok"\n'
    assert model.remaining == 0


def test_develop_gives_up_after_retries():
    kb = make_kb()
    model = ScriptedModel([
        NO_SEARCH,
        ("develop", "", "x = ("),
        ("develop", "", "x = ("),
        ("develop", "", "x = ("),
    ])
    with pytest.raises(DevelopError):
        develop("do it", "sig", kb, "", model)


def test_develop_requires_signal_assignment():
    kb = make_kb()
    model = ScriptedModel([
        NO_SEARCH,
        ("develop", "", "x = 1\n"),
        ("develop", "NEVER ASSIGNED SIGNAL", 'SIGNAL = "done"\n'),
    ])
    src = develop("do it", "sig", kb, "", model)
    assert src == 'SIGNAL = "done"\n'


# -- run_cycle -------------------------------------------------------------------

def auto_session(**kwargs):
    return Session(id="sess", mode=kwargs.pop("mode", "auto"),
                   events=__import__("hallab.events", fromlist=["EventLog"])
                   .EventLog(clock=counting_clock()))


def cycle_model(reply_script='STATE["x"] = 2\nSIGNAL = "Success"\n'):
    return ScriptedModel([
        ("preprocess", "run the scan",
         "QUERIES:\nCOMMANDS:\nrun the scan\n"),
        NO_SEARCH,
        ("plan", "run the scan",
         "SIGNAL: success indicator\nImplement the scan."),
        NO_SEARCH,
        ("develop", "Implement the scan.", reply_script),
    ])


def test_auto_cycle_executes_and_records_signal():
    session = auto_session()
    env = Environment()
    record = run_cycle(session, make_kb(), env, cycle_model(), "run the scan")
    assert record.status == "executed"
    assert record.signal_value == "Success"
    assert env.state["x"] == 2
    assert env.registry["step-1"] is not None
    kinds = [e.kind for e in session.events.snapshot()]
    assert kinds == ["user_input", "plan", "code", "execution_started",
                     "signal"]


def test_runtime_error_becomes_failure_signal():
    session = auto_session()
    env = Environment()
    record = run_cycle(session, make_kb(), env,
                       cycle_model('SIGNAL = "x"\ny = boom\n'),
                       "run the scan")
    assert record.status == "failed"
    assert "name error" in record.signal_value
    kinds = [e.kind for e in session.events.snapshot()]
    assert kinds[-1] == "error"


def test_manual_cycle_stops_pending_and_approval_runs_it():
    session = auto_session(mode="manual")
    session.mode = "manual"
    env = Environment()
    record = run_cycle(session, make_kb(), env, cycle_model(),
                       "run the scan")
    assert record.status == "pending_approval"
    assert env.state == {}  # nothing executed yet

    done = approve_step(session, env, record.index)
    assert done.status == "executed"
    assert env.state["x"] == 2
    with pytest.raises(ConflictError):
        approve_step(session, env, record.index)


def test_pure_query_creates_no_cycle():
    session = auto_session()
    env = Environment()
    model = ScriptedModel([
        ("preprocess", "", "QUERIES:\nwhat format are datasets?\nCOMMANDS:\n"),
        NO_SEARCH,
        ("answer", "what format are datasets?",
         "Datasets are JSON containers with meta and columns."),
    ])
    out = run_cycle(session, make_kb(), env, model,
                    "what format are datasets?")
    assert out is None
    assert session.history == []
    kinds = [e.kind for e in session.events.snapshot()]
    assert kinds == ["user_input", "query_answer"]


def test_planner_done_finishes_session():
    session = auto_session()
    env = Environment()
    model = ScriptedModel([NO_SEARCH, ("plan", "", "DONE")])
    session.objective = "anything"
    out = run_cycle(session, make_kb(), env, model)
    assert out is None
    assert session.done is True
    from hallab.engine import EngineError
    with pytest.raises(EngineError):
        run_cycle(session, make_kb(), env, ScriptedModel([]))


def test_event_log_determinism_byte_identical():
    def run_once():
        session = auto_session()
        env = Environment()
        run_cycle(session, make_kb(), env, cycle_model(), "run the scan")
        return session.events.to_jsonl()

    assert run_once() == run_once()


# -- answer / prepare_knowledge ---------------------------------------------------

def test_answer_flags_empty_retrieval():
    model = ScriptedModel([("answer", "", "Plain reply.")])
    out = answer("what is this?", KnowledgeBase(), model)
    assert out.startswith("[no documents retrieved] ")


def test_answer_grounded_reply():
    kb = make_kb()
    model = ScriptedModel([
        NO_SEARCH,
        ("answer", "Scripting guide", "Use SIGNAL per the scripting guide."),
    ])
    out = answer("how do scripts report results?", kb, model)
    assert out == "Use SIGNAL per the scripting guide."


def test_prepare_knowledge_stores_retrievable_plan():
    kb = make_kb()
    reply = ("QND Leakage Benchmark Plan\n"
             "Interleave randomized pi pulses with readouts, fit the "
             "correlation decay, and report the leakage rate.")
    model = ScriptedModel([
        NO_SEARCH,
        ("answer", "LAB-INDEPENDENT INSTRUCTIONS", reply),
    ])
    doc_id = prepare_knowledge("published procedure text",
                               "write a lab plan for QND benchmarking",
                               kb, model)
    doc = kb.get(doc_id)
    assert doc.kind == "plan"
    assert doc.title == "QND Leakage Benchmark Plan"
    ranked = kb.search_text("QND leakage benchmark", k=1)
    assert ranked[0][0] == doc_id

    # Same call again yields a distinct id (no dedup).
    model2 = ScriptedModel([
        NO_SEARCH,
        ("answer", "", reply),
    ])
    doc_id2 = prepare_knowledge("published procedure text", "write a plan",
                                kb, model2)
    assert doc_id2 != doc_id


def test_prepare_knowledge_validates_inputs():
    with pytest.raises(ValueError):
        prepare_knowledge("", "x", KnowledgeBase(), ScriptedModel([]))


# -- history digest ----------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.text("ab", min_size=1, max_size=6),
                          st.text("cd", min_size=1, max_size=6)),
                min_size=1, max_size=8))
def test_digest_always_contains_descriptions_and_values(pairs):
    session = Session(id="h")
    for i, (desc, value) in enumerate(pairs, start=1):
        session.history.append(CycleRecord(
            index=i, prompt=f"prompt {i}", signal_description=desc,
            script_source="x = 1\n" * i, signal_value=value,
            status="executed"))
    digest = history_digest(session)
    for desc, value in pairs:
        assert desc in digest
        assert value in digest


def test_digest_elides_only_old_scripts():
    session = Session(id="h")
    for i in range(1, 6):
        session.history.append(CycleRecord(
            index=i, prompt=f"p{i}", signal_description=f"d{i}",
            script_source=f'SIGNAL = "s{i}"\n', signal_value=f"v{i}",
            status="executed"))
    digest = history_digest(session, keep_scripts=3)
    assert '[elided, 1 lines, runnable via invoke("step-1")]' in digest
    assert 'SIGNAL = "s5"' in digest
    assert "d1" in digest and "v1" in digest


# -- model adapters -----------------------------------------------------------------

def test_transcript_parsing_and_mismatch():
    text = """\
role: plan
match: objective
reply: SIGNAL: things
Do the thing.
---
role: develop
reply:
SIGNAL = "ok"
"""
    entries = parse_transcript(text)
    assert entries[0] == ("plan", "objective",
                          "SIGNAL: things\nDo the thing.")
    assert entries[1] == ("develop", "", 'SIGNAL = "ok"')

    model = ScriptedModel(entries)
    with pytest.raises(ScriptedModelMismatch):
        model.generate(ModelRequest(role="search", instructions="objective"))

    model2 = ScriptedModel(entries)
    with pytest.raises(ScriptedModelMismatch):
        model2.generate(ModelRequest(role="plan", instructions="no match"))

    model3 = ScriptedModel([])
    with pytest.raises(ScriptedModelMismatch):
        model3.generate(ModelRequest(role="plan", instructions="x"))


def test_model_request_thinking_defaults():
    assert ModelRequest(role="plan", instructions="").thinking == "high"
    assert ModelRequest(role="develop", instructions="").thinking == "high"
    assert ModelRequest(role="search", instructions="").thinking == "low"
    assert ModelRequest(role="preprocess", instructions="").thinking == "low"
    assert ModelRequest(role="answer", instructions="").thinking == "low"
    assert ModelRequest(role="answer", instructions="",
                        thinking="high").thinking == "high"
    with pytest.raises(ValueError):
        ModelRequest(role="wizard", instructions="")


def test_runtime_info_lists_builtins_and_state():
    env = Environment()
    env.state["f_start"] = 1.0
    info = runtime_info(env)
    assert "vna_sweep" in info and "invoke" in info
    assert "f_start" in info
