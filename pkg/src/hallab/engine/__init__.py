"""Session engine: plan/develop cycle, chatbot, model adapters."""

from ..models import (ModelRequest, ProtocolError, RemoteModel, ScriptedModel,
                      ScriptedModelMismatch, parse_transcript)
from .cycle import (ConflictError, DevelopError, EngineError, answer,
                    approve_step, develop, execute_record, plan,
                    prepare_knowledge, preprocess, run_cycle)
from .records import CycleRecord, Session, history_digest

__all__ = [
    "ConflictError", "CycleRecord", "DevelopError", "EngineError",
    "ModelRequest", "ProtocolError", "RemoteModel", "ScriptedModel",
    "ScriptedModelMismatch", "Session", "answer", "approve_step", "develop",
    "execute_record", "history_digest", "parse_transcript", "plan",
    "prepare_knowledge", "preprocess", "run_cycle",
]
