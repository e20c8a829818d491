"""Two-stage text-to-SQL core: schema linking, symbolic plan compilation,
execution metrics, and hallucination auditing."""

from pathlib import Path

from ._tasql import (
    TasqlError,
    audit_pair,
    compile_plan,
    execution_accuracy,
    extract_entities,
    infer_join_path,
    introspect,
    parse_plan,
    parse_sql,
    schema_linking_scores,
    set_resource_root,
)

# wheels bundle the prompt templates and data files next to the module
_bundled = Path(__file__).resolve().parent / "resources"
if _bundled.is_dir():
    set_resource_root(str(_bundled))

__all__ = [
    "TasqlError",
    "audit_pair",
    "compile_plan",
    "execution_accuracy",
    "extract_entities",
    "infer_join_path",
    "introspect",
    "parse_plan",
    "parse_sql",
    "schema_linking_scores",
    "set_resource_root",
]
