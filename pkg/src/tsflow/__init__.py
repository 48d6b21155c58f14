"""Declarative time-series analysis workflows.

Parse a JSON-LD workflow description, validate it against the compiled-in
vocabulary, execute it (tests, models, forecasts, measures, plots) and keep
the result in a queryable file-backed catalog.
"""

from .document import parse_document, serialize, validate
from .engine import best_model, execute
from .vocabulary import load_vocabulary, param_schema_of, resolve

__all__ = [
    "parse_document", "serialize", "validate",
    "execute", "best_model",
    "load_vocabulary", "resolve", "param_schema_of",
]

__version__ = "0.1.0"
