"""Scenario bundles: packaged experiments (docs, transcripts, lab fixtures).

A bundle ties together everything a scripted run needs: knowledge documents,
the model transcript, the simulated-lab configuration, scheduled user
inputs, and the expected-value table the report asserts against. Expected
values live here, next to the fixtures, never inline in engine code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..kb import KnowledgeBase, parse_document_file
from ..models import ScriptedModel, parse_transcript
from ..runtime import parse as parse_script
from ..runtime.ast_nodes import Call, Name
from ..virtlab import LabConfig

BUNDLES = {
    "resonator": ("resonator", "bundle.json"),
    "resonator-wide": ("resonator", "bundle_wide.json"),
    "resonator-empty": ("resonator", "bundle_empty.json"),
    "qnd": ("qnd", "bundle.json"),
    "qnd-zero": ("qnd", "bundle_zero.json"),
    "qnd-prep": ("qnd", "bundle_prep.json"),
    "power": ("power", "bundle.json"),
}

LAB_BUILTINS = {"vna_sweep", "qubit_sequence"}
# Conclusions may not share a cycle with acquisition. Fine-scan fitting and
# the per-shot correlation reduction are part of taking data (the protocol's
# own final step loops scan-and-fit), so they are deliberately not listed.
CONCLUSION_BUILTINS = {"find_resonances", "fit_leakage", "readout_metrics"}


class ScenarioError(Exception):
    pass


@dataclass
class ScenarioBundle:
    name: str
    kind: str  # resonator | qnd | power
    root: Path
    lab_config: LabConfig
    transcript_path: Path | None
    doc_paths: list = field(default_factory=list)
    entry_inputs: list = field(default_factory=list)
    expected: dict = field(default_factory=dict)
    max_cycles: int = 10
    knowledge_prep: dict | None = None
    acquisition: dict = field(default_factory=dict)
    default_seed: int = 0

    def build_kb(self) -> KnowledgeBase:
        kb = KnowledgeBase()
        self.seed_kb(kb)
        return kb

    def seed_kb(self, kb: KnowledgeBase):
        """Add the bundle's documents, skipping ids already present."""
        for path in self.doc_paths:
            doc = parse_document_file(path.read_text(encoding="utf-8"))
            if kb.get(doc.id) is None:
                kb.add_document(doc.id, doc.title, doc.kind, doc.body,
                                doc.refs)

    def build_model(self) -> ScriptedModel:
        if self.transcript_path is None:
            raise ScenarioError(f"bundle {self.name!r} has no transcript")
        return ScriptedModel.from_file(self.transcript_path)

    def transcript_entries(self) -> list:
        if self.transcript_path is None:
            return []
        return parse_transcript(self.transcript_path.read_text("utf-8"))


def data_root() -> Path:
    return Path(resources.files("hallab.scenarios") / "data")


def list_bundles() -> list:
    return sorted(BUNDLES)


def load_bundle(name: str) -> ScenarioBundle:
    if name not in BUNDLES:
        raise ScenarioError(
            f"unknown scenario {name!r}; available: {', '.join(list_bundles())}")
    subdir, bundle_file = BUNDLES[name]
    root = data_root() / subdir
    raw = json.loads((root / bundle_file).read_text(encoding="utf-8"))
    lab_config = LabConfig.from_dict(
        json.loads((root / raw["lab_config"]).read_text(encoding="utf-8")))
    transcript = raw.get("transcript")
    knowledge_prep = raw.get("knowledge_prep")
    if knowledge_prep:
        knowledge_prep = dict(knowledge_prep)
        knowledge_prep["lab_independent_text"] = (
            root / knowledge_prep["lab_independent"]).read_text("utf-8")
    return ScenarioBundle(
        name=name,
        kind=raw["kind"],
        root=root,
        lab_config=lab_config,
        transcript_path=(root / transcript) if transcript else None,
        doc_paths=[root / p for p in raw.get("docs", [])],
        entry_inputs=raw.get("entry_inputs", []),
        expected=raw.get("expected", {}),
        max_cycles=raw.get("max_cycles", 10),
        knowledge_prep=knowledge_prep,
        acquisition=raw.get("acquisition", {}),
        default_seed=raw.get("default_seed", 0),
    )


def _called_builtins(program) -> set:
    names = set()

    def walk_expr(node):
        if isinstance(node, Call):
            if isinstance(node.callee, Name):
                names.add(node.callee.ident)
            for a in node.args:
                walk_expr(a)
        for attr in ("obj", "index", "left", "right", "operand", "expr",
                     "value", "target", "iterable", "cond"):
            child = getattr(node, attr, None)
            if child is not None and hasattr(child, "line"):
                walk_expr(child)
        for attr in ("items",):
            for child in getattr(node, attr, []) or []:
                walk_expr(child)
        for pair in getattr(node, "pairs", []) or []:
            walk_expr(pair[1])

    def walk_stmts(stmts):
        for stmt in stmts:
            walk_expr(stmt)
            for attr in ("body", "orelse"):
                block = getattr(stmt, attr, None)
                if block:
                    walk_stmts(block)
            for cond, block in getattr(stmt, "branches", []) or []:
                walk_expr(cond)
                walk_stmts(block)

    walk_stmts(program.body)
    return names


def lint_transcript(entries) -> list:
    """Acquisition/analysis separation over shipped transcripts.

    No generated script may both talk to the lab and draw conclusions
    (count resonances, fit decay models, compute fidelity metrics) in the
    same cycle. Returns violation messages; empty means clean.
    """
    violations = []
    for i, (role, _match, reply) in enumerate(entries):
        if role != "develop":
            continue
        source = reply
        if source.strip().startswith("```"):
            lines = source.strip().splitlines()
            source = "\n".join(lines[1:-1] if lines[-1].startswith("```")
                               else lines[1:])
        try:
            program = parse_script(source + "\n")
        except Exception:
            continue  # retry fodder in adversarial fixtures
        called = _called_builtins(program)
        if called & LAB_BUILTINS and called & CONCLUSION_BUILTINS:
            violations.append(
                f"entry {i + 1}: script mixes acquisition "
                f"({sorted(called & LAB_BUILTINS)}) with analysis "
                f"({sorted(called & CONCLUSION_BUILTINS)})")
    return violations
