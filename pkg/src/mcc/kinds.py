"""Constraint vocabulary and value shapes."""

from __future__ import annotations

import enum

UNBOUNDED = "*"

ASSOCIATIVITY_KEYWORDS = ("left", "right", "non")
COMPOSITION_KEYWORDS = ("eager", "lazy")


class ConstraintKind(enum.Enum):
    PATTERN = "Pattern"
    VALUE = "Value"
    PREFIX = "Prefix"
    SUFFIX = "Suffix"
    SEPARATOR = "Separator"
    OPTIONAL = "Optional"
    MINIMUM = "Minimum"
    MAXIMUM = "Maximum"
    ASSOCIATIVITY = "Associativity"
    COMPOSITION = "Composition"
    PRIORITY = "Priority"
    ID = "ID"
    REFERENCE = "Reference"
    # internal kinds, produced by lowering only
    PRECEDES = "Precedes"
    MEMBER_ORDER = "MemberOrder"

    @classmethod
    def from_keyword(cls, keyword: str) -> "ConstraintKind | None":
        """Map a DSL ``[constraintID]`` keyword to its kind."""
        return _BY_KEYWORD.get(keyword)

    @classmethod
    def from_annotation(cls, name: str) -> "ConstraintKind | None":
        kind = _BY_ANNOTATION.get(name)
        return kind

    @property
    def keyword(self) -> str:
        return self.value.lower()


DELIMITER_KINDS = frozenset({ConstraintKind.PREFIX, ConstraintKind.SUFFIX, ConstraintKind.SEPARATOR})
MULTIPLICITY_KINDS = frozenset({ConstraintKind.OPTIONAL, ConstraintKind.MINIMUM, ConstraintKind.MAXIMUM})
MARKER_KINDS = frozenset({ConstraintKind.ID, ConstraintKind.REFERENCE})

_INTERNAL = {ConstraintKind.MEMBER_ORDER}
_BY_KEYWORD = {k.value.lower(): k for k in ConstraintKind if k not in _INTERNAL}
_BY_ANNOTATION = {
    k.value: k for k in ConstraintKind if k not in _INTERNAL and k is not ConstraintKind.PRECEDES
}

CONSTRAINT_KEYWORDS = tuple(sorted(_BY_KEYWORD))


def check_value(kind: ConstraintKind, value) -> str | None:
    """Return a complaint if ``value`` has the wrong shape for ``kind``."""
    if kind in DELIMITER_KINDS:
        if not (isinstance(value, tuple) and value and all(isinstance(v, str) for v in value)):
            return f"{kind.value} expects one or more literal strings"
        if any(v == "" for v in value):
            return f"{kind.value} literals must not be empty"
    elif kind is ConstraintKind.PATTERN:
        if not isinstance(value, str):
            return "Pattern expects a pattern string"
    elif kind is ConstraintKind.VALUE:
        if not isinstance(value, str):
            return "Value expects a member name"
    elif kind in (ConstraintKind.OPTIONAL, ConstraintKind.ID, ConstraintKind.REFERENCE):
        if not isinstance(value, bool):
            return f"{kind.value} expects true or false"
    elif kind is ConstraintKind.MINIMUM or kind is ConstraintKind.PRIORITY:
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            return f"{kind.value} expects a non-negative integer"
    elif kind is ConstraintKind.MAXIMUM:
        if value != UNBOUNDED and (isinstance(value, bool) or not isinstance(value, int) or value < 1):
            return "Maximum expects a positive integer"
    elif kind is ConstraintKind.ASSOCIATIVITY:
        if value not in ASSOCIATIVITY_KEYWORDS:
            return "Associativity expects one of left, right, non"
    elif kind is ConstraintKind.COMPOSITION:
        if value not in COMPOSITION_KEYWORDS:
            return "Composition expects eager or lazy"
    elif kind is ConstraintKind.MEMBER_ORDER:
        if not (isinstance(value, tuple) and all(isinstance(v, str) for v in value)):
            return "MemberOrder expects member names"
    return None
