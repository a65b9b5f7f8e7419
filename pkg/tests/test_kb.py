from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hallab.engine import ScriptedModel
from hallab.kb import (DocumentError, EmptyTextError,
                       InvalidVectorError, KnowledgeBase, MemorizeError,
                       SearchProtocolError, cosine, embed, iterative_search,
                       memorize, parse_search_reply)
from hallab.engine.records import CycleRecord, Session


# -- embeddings ---------------------------------------------------------------

def test_embed_deterministic_and_unit_norm():
    a = embed("wide VNA spectrum sweep")
    b = embed("wide VNA spectrum sweep")
    assert np.array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-9)
    assert cosine(a, b) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.text(min_size=1).filter(lambda s: s.strip()))
def test_embed_pure_function_property(text):
    v1 = embed(text)
    v2 = embed(text)
    assert np.array_equal(v1, v2)
    assert np.linalg.norm(v1) == pytest.approx(1.0, abs=1e-9)


def test_embed_rejects_empty():
    with pytest.raises(EmptyTextError):
        embed("   ")


def test_semantic_ordering_on_fixed_triple():
    probe = embed("vna sweep spectrum")
    near = cosine(probe, embed("vector network analyzer scan"))
    far = cosine(probe, embed("qubit pi pulse calibration"))
    assert near > far


def test_cosine_analytic_values():
    assert cosine([1, 0, 0], [1, 0, 0]) == pytest.approx(1.0)
    assert cosine([1, 0, 0], [0, 1, 0]) == pytest.approx(0.0)
    assert cosine([1, 0, 0], [0.6, 0.8, 0.0]) == pytest.approx(0.6)
    with pytest.raises(InvalidVectorError):
        cosine([1, 0], [1, 0, 0])
    with pytest.raises(InvalidVectorError):
        cosine([0, 0, 0], [1, 0, 0])


# -- store --------------------------------------------------------------------

def make_kb():
    kb = KnowledgeBase()
    kb.add_document("vna-api", "VNA sweep builtin",
                    "api", "vna_sweep acquires a spectrum over a range.")
    kb.add_document("res-plan", "Resonator characterization plan",
                    "plan", "Scan, count resonances, fine scan, fit. "
                            "See also storage-format.",
                    refs=["storage-format"])
    kb.add_document("qubit-api", "Qubit pulse sequences",
                    "api", "qubit_sequence interleaves pi pulses with readouts.")
    return kb


def test_top_k_hand_built_vectors():
    kb = KnowledgeBase(dim=3)
    for doc_id, vec in (("doc1", [1.0, 0.0, 0.0]),
                        ("doc2", [0.0, 1.0, 0.0]),
                        ("doc3", [0.8, 0.6, 0.0])):
        kb.add_document(doc_id, doc_id, "api", "body")
        kb.get(doc_id).embedding = np.asarray(vec)
        kb._rebuild_snapshot()
    ranked = kb.top_k(np.array([1.0, 0.0, 0.0]), 3)
    assert [r[0] for r in ranked] == ["doc1", "doc3", "doc2"]
    assert [round(r[1], 6) for r in ranked] == [1.0, 0.8, 0.0]
    # k beyond the corpus returns the whole ranked corpus.
    assert len(kb.top_k(np.array([1.0, 0.0, 0.0]), 10)) == 3


def test_top_k_empty_index():
    assert KnowledgeBase().top_k(np.zeros(256), 4) == []


def test_top_k_is_shuffle_invariant():
    docs = [(f"d{i}", f"title {i}", f"text about topic {i} resonator") for i in range(12)]
    kb1 = KnowledgeBase()
    for d in docs:
        kb1.add_document(d[0], d[1], "api", d[2])
    kb2 = KnowledgeBase()
    for d in reversed(docs):
        kb2.add_document(d[0], d[1], "api", d[2])
    q = embed("resonator topic")
    assert kb1.top_k(q, 5) == kb2.top_k(q, 5)


def test_duplicate_id_rejected():
    kb = make_kb()
    with pytest.raises(DocumentError):
        kb.add_document("vna-api", "again", "api", "dup")


def test_lint_flags_dangling_refs():
    kb = make_kb()
    assert kb.lint() == [("res-plan", "storage-format")]
    kb.add_document("storage-format", "Dataset container", "api", "json")
    assert kb.lint() == []


def test_persistence_round_trip(tmp_path):
    kb = make_kb()
    kb.save_dir(tmp_path / "knowledge")
    back = KnowledgeBase.load_dir(tmp_path / "knowledge")
    assert sorted(back.ids()) == sorted(kb.ids())
    for doc_id in kb.ids():
        orig, loaded = kb.get(doc_id), back.get(doc_id)
        assert loaded.title == orig.title
        assert loaded.kind == orig.kind
        assert loaded.body == orig.body
        assert loaded.refs == orig.refs
        assert np.linalg.norm(loaded.embedding) == pytest.approx(1.0, abs=1e-9)
        assert cosine(loaded.embedding, orig.embedding) > 0.999999
    # Sidecar binary carries the magic and dimensions.
    blob = (tmp_path / "knowledge" / "embeddings.halv").read_bytes()
    assert blob[:4] == b"HALV"
    assert int.from_bytes(blob[4:8], "little") == kb.dim
    assert int.from_bytes(blob[8:12], "little") == len(kb.ids())


# -- search protocol ----------------------------------------------------------

def test_parse_search_reply_sections():
    drops, queries = parse_search_reply(
        "Thinking aloud first.\nDROP: d1\nd2\nQUERIES:\nhow to save data\n")
    assert drops == ["d1", "d2"]
    assert queries == ["how to save data"]
    drops, queries = parse_search_reply("DROP:\nQUERIES:\n")
    assert drops == [] and queries == []
    with pytest.raises(SearchProtocolError) as err:
        parse_search_reply("no labels here")
    assert err.value.raw_reply == "no labels here"


def test_search_empty_kb_short_circuits():
    model = ScriptedModel([])  # would fail loudly if ever called
    assert iterative_search("anything", KnowledgeBase(), model) == []


def test_search_single_match_one_iteration():
    kb = make_kb()
    model = ScriptedModel([("search", "vna", "DROP:\nQUERIES:\n")])
    docs = iterative_search("vna sweep acquisition", kb, model)
    assert docs and docs[0].id == "vna-api"
    assert model.remaining == 0


def test_reference_chasing_within_two_iterations():
    kb = KnowledgeBase()
    kb.add_document("res-plan", "Resonator characterization plan", "plan",
                    "Wide scan then fit resonances. Data layout is described "
                    "in the storage container guide.",
                    refs=["storage-format"])
    kb.add_document("storage-format", "Columnar container layout", "api",
                    "Columnar container layout with meta and columns keys.")
    kb.add_document("qubit-api", "Qubit pulses", "api",
                    "pi pulse interleaving for readout chains.")
    task = "characterize resonators with a wide scan"
    probe = embed(task)
    assert cosine(probe, kb.get("storage-format").embedding) < 0.15

    model = ScriptedModel([
        ("search", "res-plan",
         "DROP:\nQUERIES:\ncolumnar container layout guide\n"),
        ("search", "storage-format", "DROP:\nQUERIES:\n"),
    ])
    docs = iterative_search(task, kb, model)
    ids = [d.id for d in docs]
    assert "res-plan" in ids and "storage-format" in ids
    assert model.remaining == 0


def test_search_prunes_dropped_documents():
    kb = make_kb()
    model = ScriptedModel([
        ("search", "", "DROP:\nqubit-api\nres-plan\nQUERIES:\n"),
    ])
    docs = iterative_search("vna scan of resonator plan", kb, model, k=3)
    assert [d.id for d in docs] == ["vna-api"]


def test_search_terminates_at_max_iterations():
    kb = make_kb()
    # A model that always asks a fresh query would loop forever without the
    # structural cap.
    entries = [("search", "", f"DROP:\nQUERIES:\nnovel query {i}\n")
               for i in range(50)]
    model = ScriptedModel(entries)
    iterative_search("resonator", kb, model, max_iter=5)
    assert model.remaining == 45  # exactly five model calls

    # Duplicate queries are skipped silently and stop the loop.
    model2 = ScriptedModel([
        ("search", "", "DROP:\nQUERIES:\nsame thing\n"),
        ("search", "", "DROP:\nQUERIES:\nsame thing\n"),
    ])
    iterative_search("resonator", kb, model2, max_iter=5)
    assert model2.remaining == 0


def test_search_protocol_error_carries_reply():
    kb = make_kb()
    model = ScriptedModel([("search", "", "I refuse to use labels")])
    with pytest.raises(SearchProtocolError):
        iterative_search("resonator", kb, model)


# -- memorize -----------------------------------------------------------------

def _session_with_step(status="executed"):
    session = Session(id="sess")
    session.history.append(CycleRecord(
        index=1, user_input="scan", prompt="Acquire a wide sweep",
        signal_description="success indicator",
        script_source='SIGNAL = "Success"\n',
        signal_value="Success", status=status))
    return session


def test_memorize_success_step_retrievable_and_runnable():
    kb = make_kb()
    session = _session_with_step()
    doc_id = memorize(kb, session, 1, "VNA wide scan example")
    ranked = kb.search_text("wide scan example", k=4)
    assert doc_id in [r[0] for r in ranked]
    doc = kb.get(doc_id)
    assert doc.kind == "example"
    assert "Acquire a wide sweep" in doc.body
    assert '```' in doc.body

    from hallab.runtime import Environment, Script, execute
    env = Environment(kb=kb)
    result = execute(Script(f'invoke("{doc_id}")\n'), env)
    assert result.error is None
    assert result.signal == "Success"


def test_memorize_rejects_failed_step():
    kb = make_kb()
    session = _session_with_step(status="failed")
    with pytest.raises(MemorizeError):
        memorize(kb, session, 1, "nope")
    with pytest.raises(MemorizeError):
        memorize(kb, session, 7, "missing")
