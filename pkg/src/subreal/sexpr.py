"""Minimal s-expression reader and writer shared by the file formats.

Atoms are kept as strings together with their source offset so that the
higher level parsers can report positions.
"""
from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import quote, unquote


class SexprError(ValueError):
    """Syntax error with a source position."""

    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.col = line, col
        super().__init__(f"{message} at line {line}, column {col}")


@dataclass(frozen=True)
class Atom:
    text: str
    pos: int = 0

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple
    pos: int = 0

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def head(self) -> str | None:
        if self.items and isinstance(self.items[0], Atom):
            return self.items[0].text
        return None


_DELIMS = set("();")


def _tokens(text: str):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c, i
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in _DELIMS:
                j += 1
            yield text[i:j], i
            i = j


def read_all(text: str) -> list:
    """Parse every top-level form in ``text``."""
    stack: list[tuple[list, int]] = []
    out: list = []
    for tok, pos in _tokens(text):
        if tok == "(":
            stack.append(([], pos))
        elif tok == ")":
            if not stack:
                raise SexprError("unbalanced ')'", pos, text)
            items, start = stack.pop()
            node = SList(tuple(items), start)
            (stack[-1][0] if stack else out).append(node)
        else:
            (stack[-1][0] if stack else out).append(Atom(tok, pos))
    if stack:
        raise SexprError("unclosed '('", stack[-1][1], text)
    return out


def read(text: str):
    """Parse exactly one form."""
    forms = read_all(text)
    if not forms:
        raise SexprError("empty input", len(text), text)
    if len(forms) > 1:
        second = forms[1]
        raise SexprError("trailing input after first form", second.pos, text)
    return forms[0]


def keyword_slots(form: SList, start: int, text: str = "") -> dict:
    """Collect ``:key value`` pairs from ``form.items[start:]``."""
    slots = {}
    items = form.items[start:]
    if len(items) % 2:
        raise SexprError("keyword without value", items[-1].pos, text)
    for key, value in zip(items[::2], items[1::2]):
        if not (isinstance(key, Atom) and key.text.startswith(":")):
            raise SexprError("expected :keyword", key.pos, text)
        if key.text[1:] in slots:
            raise SexprError(f"duplicate slot {key.text}", key.pos, text)
        slots[key.text[1:]] = value
    return slots


_LABEL_SAFE = "-_.:[]@,+*/^'<>=!?"


def encode_label(label: str) -> str:
    """Label text as a single atom (spaces, parentheses and ';' escaped)."""
    return quote(label, safe=_LABEL_SAFE)


def decode_label(atom: str) -> str:
    return unquote(atom)
