from .files import (
    ModelSpec,
    format_model,
    load_model,
    load_report,
    parse_model_text,
    read_csv,
    read_model_spec,
    read_states,
    solution_to_dict,
    spec_from_system,
    write_csv,
    write_model,
    write_report,
    write_states,
)
from .parser import parse, parse_operator, parse_scalar, to_text

__all__ = [
    "ModelSpec",
    "format_model",
    "load_model",
    "load_report",
    "parse",
    "parse_model_text",
    "parse_operator",
    "parse_scalar",
    "read_csv",
    "read_model_spec",
    "read_states",
    "solution_to_dict",
    "spec_from_system",
    "to_text",
    "write_csv",
    "write_model",
    "write_report",
    "write_states",
]
