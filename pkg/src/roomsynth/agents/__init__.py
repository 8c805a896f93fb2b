from .backends import API_KEY_ENV, AgentBackend, BackendError, Message, MissingAPIKeyError, RemoteBackend
from .mock import MockBackend
from .parsing import ParseError, extract_json, parse_model_output, strip_fences
from .roles import AgentError, CallLog, EvalVerdict, PlanCoverError, design, evaluate, plan, semantic_refine

__all__ = [
    "API_KEY_ENV",
    "AgentBackend",
    "AgentError",
    "BackendError",
    "CallLog",
    "EvalVerdict",
    "Message",
    "MissingAPIKeyError",
    "MockBackend",
    "ParseError",
    "PlanCoverError",
    "RemoteBackend",
    "design",
    "evaluate",
    "extract_json",
    "parse_model_output",
    "plan",
    "semantic_refine",
    "strip_fences",
]
