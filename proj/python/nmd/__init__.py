"""Structured spreadsheet models: formulas, walker and audit log."""

import json

from ._nmd import (
    AuditLog,
    NmdError,
    NotFoundError,
    PreconditionError,
    WalkSession,
    Workbook,
    compile,
    decompile,
)
from . import _nmd

__all__ = [
    "AuditLog",
    "NmdError",
    "NotFoundError",
    "PreconditionError",
    "WalkSession",
    "Workbook",
    "compile",
    "decompile",
    "validate",
    "evaluate",
    "what_if",
    "diff",
    "inspect",
]


def validate(workbook):
    return json.loads(_nmd.validate_json(workbook))


def evaluate(workbook):
    return json.loads(_nmd.evaluate_json(workbook))


def what_if(workbook, overrides):
    """Overrides map a cell or name to a number, string, bool or None."""
    return json.loads(_nmd.what_if_json(workbook, json.dumps(overrides)))


def diff(before, after):
    return json.loads(_nmd.diff_json(before, after))


def inspect(workbook, cell):
    return json.loads(WalkSession(workbook, cell).inspection_json())
