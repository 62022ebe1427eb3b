"""Token pattern dialect.

Supported: literal characters, escapes, character classes with ranges and
negation, grouping, alternation and the postfix quantifiers ``* + ?``.
Anything else (backreferences, anchors, ``.``, counted repetition, lazy
quantifiers) is rejected.  Valid patterns mean the same thing under Python's
``re`` module, which does the actual matching.
"""

from __future__ import annotations

import re
from functools import lru_cache

_SPECIAL = set("()[]{}*+?|^$.\\")
_CLASS_ESCAPES = set("dDwWsS")
_CONTROL_ESCAPES = set("ntrfv")


class PatternError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class _Checker:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str | None:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def fail(self, message: str):
        raise PatternError(message, self.pos)

    def alternation(self, depth: int) -> None:
        self.sequence(depth)
        while self.peek() == "|":
            self.pos += 1
            self.sequence(depth)

    def sequence(self, depth: int) -> None:
        while True:
            ch = self.peek()
            if ch is None or ch == "|" or (ch == ")" and depth):
                return
            self.atom(depth)
            if self.peek() in ("*", "+", "?"):
                self.pos += 1
                if self.peek() in ("*", "+", "?"):
                    self.fail("stacked quantifier")

    def atom(self, depth: int) -> None:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            if self.peek() == "?":
                self.fail("group extensions are not supported")
            self.alternation(depth + 1)
            if self.peek() != ")":
                self.fail("unbalanced '('")
            self.pos += 1
        elif ch == "[":
            self.char_class()
        elif ch == "\\":
            self.escape(in_class=False)
        elif ch in ("*", "+", "?"):
            self.fail("quantifier without operand")
        elif ch in _SPECIAL:
            self.fail(f"unsupported or unescaped {ch!r}")
        else:
            self.pos += 1

    def escape(self, in_class: bool) -> None:
        self.pos += 1
        ch = self.peek()
        if ch is None:
            self.fail("dangling backslash")
        if ch.isalnum():
            if ch not in _CONTROL_ESCAPES and ch not in _CLASS_ESCAPES:
                self.fail(f"unsupported escape \\{ch}")
        self.pos += 1

    def char_class(self) -> None:
        start = self.pos
        self.pos += 1
        if self.peek() == "^":
            self.pos += 1
        count = 0
        while True:
            ch = self.peek()
            if ch is None:
                self.pos = start
                self.fail("unterminated character class")
            if ch == "]":
                if not count:
                    self.fail("empty character class")
                self.pos += 1
                return
            if ch == "[":
                self.fail("nested '[' in character class must be escaped")
            if ch == "\\":
                self.escape(in_class=True)
            else:
                self.pos += 1
            count += 1
            if self.peek() == "-" and self.pos + 1 < len(self.text) and self.text[self.pos + 1] != "]":
                low = self.text[self.pos - 1]
                self.pos += 1
                high = self.peek()
                if high == "\\":
                    self.escape(in_class=True)
                else:
                    self.pos += 1
                    if high < low:
                        self.fail("reversed range")


def check_pattern(text: str) -> None:
    checker = _Checker(text)
    checker.alternation(0)
    if checker.pos != len(text):
        checker.fail("unbalanced ')'")


@lru_cache(maxsize=None)
def compile_pattern(text: str) -> re.Pattern:
    check_pattern(text)
    return re.compile(text)


def literal_pattern(text: str) -> str:
    """Pattern in the dialect matching exactly ``text``."""
    return "".join("\\" + ch if ch in _SPECIAL or ch == "-" else ch for ch in text)
