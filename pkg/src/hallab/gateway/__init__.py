"""HTTP gateway: sessions, knowledge, datasets, and the event stream."""

from ..events import EVENT_KINDS, Event, EventLog, counting_clock
from .http import ApiError, GatewayServer, serve_gateway
from .manager import SessionManager, UnknownSessionError

__all__ = [
    "ApiError", "EVENT_KINDS", "Event", "EventLog", "GatewayServer",
    "SessionManager", "UnknownSessionError", "counting_clock",
    "serve_gateway",
]
