"""Java-syntax frontend: lexer, parser and the normalized code model."""
from .model import (
    CallableDecl,
    ClassRecord,
    CodeModel,
    FieldDecl,
    FrontendDiagnostic,
    ProjectError,
    SourceUnit,
    callable_id,
    collapse_ws,
    extract_doc,
    model_from_texts,
    parse_project,
)

__all__ = [
    "CallableDecl",
    "ClassRecord",
    "CodeModel",
    "FieldDecl",
    "FrontendDiagnostic",
    "ProjectError",
    "SourceUnit",
    "callable_id",
    "collapse_ws",
    "extract_doc",
    "model_from_texts",
    "parse_project",
]
