"""Concrete syntax: lexer, parser, printer and the command line."""
from .lexer import ParseError, Span
from .parser import (
    parse_context, parse_expr, parse_global, parse_global_with_spans, parse_local, parse_process,
    parse_queue, parse_type,
)
from .printer import print_context, print_expr, print_process, print_queue, print_type

__all__ = [
    "ParseError", "Span", "parse_context", "parse_expr", "parse_global", "parse_global_with_spans",
    "parse_local", "parse_process", "parse_queue", "parse_type", "print_context", "print_expr",
    "print_process", "print_queue", "print_type",
]
