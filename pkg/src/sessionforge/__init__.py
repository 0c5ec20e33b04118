"""Asynchronous multiparty session types: projection, subtyping, semantics and checking."""
from .core import (
    END, Arm, Branch, Comm, End, EnRoute, Message, Rec, Select, Sort, Var, bisimilar,
    canonical_type, graph_of, normalize_queue, queue_equiv, role_sets, unfold,
)
from .frontend import (
    ParseError, parse_context, parse_global, parse_local, parse_process, parse_queue, print_type,
)
from .projection import merge, project
from .semantics import TypingContext, context_transitions, global_transitions, local_transitions
from .subtyping import Verdict3, async_subtype_bounded, queue_subtype, sync_subtype

__version__ = "0.1.0"
