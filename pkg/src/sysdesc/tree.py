"""
Canonical key-value tree syntax.

Brace/bracket object-and-list syntax with `#` comments, used for system
descriptions, structured traces, search reports, licenses, DRM message
payloads and store files. Numbers are exact decimals with at most six
fractional digits; exponents are rejected.

    {
      name: "example",
      sizes: [1, 2.5, -3],
      nested: {"quoted key": true, empty: null},
    }

`parse_tree` keeps source positions on every node for diagnostics;
`loads` returns plain Python values (dict, list, str, int, Decimal, bool,
None). `dumps` is the canonical multi-line form, `dumps_inline` the
single-line form.
"""

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, VisitError

from constants.kinds import MAX_FRACTION_DIGITS
from core.errors import F4msError
from utils.decimals import format_decimal, fraction_digits


GRAMMAR = r"""
    ?start: value

    ?value: object
          | array
          | string
          | number
          | TRUE  -> true
          | FALSE -> false
          | NULL  -> null

    object: LBRACE RBRACE
          | LBRACE pair ("," pair)* ","? RBRACE
    pair: key ":" value
    ?key: CNAME -> bare_key
        | ESCAPED_STRING -> quoted_key

    array: LSQB RSQB
         | LSQB value ("," value)* ","? RSQB

    string: ESCAPED_STRING
    number: NUMBER

    LBRACE: "{"
    RBRACE: "}"
    LSQB: "["
    RSQB: "]"
    TRUE: "true"
    FALSE: "false"
    NULL: "null"
    NUMBER: /-?(0|[1-9][0-9]*)(\.[0-9]+)?/
    COMMENT: /#[^\n]*/

    %import common.CNAME
    %import common.ESCAPED_STRING
    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_BARE_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_KEYWORDS = frozenset({"true", "false", "null"})
_INLINE_WIDTH = 72


# =============================================================================
# Diagnostics
# =============================================================================

@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int = 1
    column: int = 1
    path: str = ""


@dataclass(frozen=True)
class Diagnostic:
    """
    One problem found in a description file.

    Attributes:
        category: SyntaxError, SchemaError or ValidationError
        location: Where the problem is
        message: Human readable explanation
        code: Violation category for validation diagnostics
    """
    category: str
    location: SourceLocation
    message: str
    code: Optional[str] = None

    def __str__(self) -> str:
        loc = self.location
        head = f"{loc.file}:{loc.line}:{loc.column}: {self.category}: "
        if self.code:
            head += f"{self.code}: "
        return head + self.message


class SystemDescriptionError(F4msError, ValueError):
    """Raised with the complete list of diagnostics for a description."""

    category = "SystemDescriptionError"

    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


# =============================================================================
# Positioned Nodes
# =============================================================================

@dataclass
class Node:
    """A parsed value with its source position. Objects hold Dict[str, Node]."""
    value: Any
    line: int
    column: int
    keys: Dict[str, "Node"] = field(default_factory=dict)   # key token positions

    @property
    def kind(self) -> str:
        if isinstance(self.value, dict):
            return "object"
        if isinstance(self.value, list):
            return "array"
        if isinstance(self.value, bool):
            return "boolean"
        if self.value is None:
            return "null"
        if isinstance(self.value, str):
            return "string"
        return "number"


def to_plain(node: Node) -> Any:
    """Strip positions, recursively."""
    if isinstance(node.value, dict):
        return {k: to_plain(v) for k, v in node.value.items()}
    if isinstance(node.value, list):
        return [to_plain(v) for v in node.value]
    return node.value


class _TreeBuilder(Transformer):
    """Turn the lark parse tree into Nodes, noting duplicate keys and bad numbers."""

    def __init__(self, file: str):
        super().__init__()
        self.file = file
        self.problems: List[Diagnostic] = []

    def _problem(self, line: int, column: int, message: str):
        self.problems.append(Diagnostic("SyntaxError", SourceLocation(self.file, line, column), message))

    def object(self, items):
        brace = items[0]
        node = Node({}, brace.line, brace.column)
        for key, value in (i for i in items if isinstance(i, tuple)):
            if key.value in node.value:
                self._problem(key.line, key.column, f"duplicate key {key.value!r}")
                continue
            node.value[key.value] = value
            node.keys[key.value] = key
        return node

    def pair(self, items):
        key, value = items
        return key, value

    def bare_key(self, items):
        (token,) = items
        return Node(str(token), token.line, token.column)

    def quoted_key(self, items):
        (token,) = items
        return Node(self._unquote(token), token.line, token.column)

    def array(self, items):
        bracket = items[0]
        return Node([i for i in items if isinstance(i, Node)], bracket.line, bracket.column)

    def string(self, items):
        (token,) = items
        return Node(self._unquote(token), token.line, token.column)

    def number(self, items):
        (token,) = items
        text = str(token)
        if "." not in text:
            return Node(int(text), token.line, token.column)
        value = Decimal(text)
        if fraction_digits(value) > MAX_FRACTION_DIGITS:
            self._problem(token.line, token.column,
                          f"number {text} has more than {MAX_FRACTION_DIGITS} fractional digits")
        return Node(value, token.line, token.column)

    def true(self, items):
        return Node(True, items[0].line, items[0].column)

    def false(self, items):
        return Node(False, items[0].line, items[0].column)

    def null(self, items):
        return Node(None, items[0].line, items[0].column)

    def _unquote(self, token: Token) -> str:
        try:
            return json.loads(str(token))
        except ValueError as e:
            self._problem(token.line, token.column, f"bad string literal: {e}")
            return str(token)[1:-1]


_PARSER = Lark(GRAMMAR, parser="lalr", propagate_positions=True)


def _end_position(text: str) -> tuple:
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def parse_tree(text: str, file: str = "<string>") -> Node:
    """
    Parse tree syntax, keeping positions.

    Args:
        text: Source text
        file: File name used in diagnostics

    Returns:
        The root Node

    Raises:
        SystemDescriptionError: With SyntaxError diagnostics
    """
    if not re.sub(r"#[^\n]*", "", text).strip():
        raise SystemDescriptionError([
            Diagnostic("SyntaxError", SourceLocation(file, 1, 1), "empty input")])

    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as e:
        line, column = getattr(e, "line", -1), getattr(e, "column", -1)
        if not isinstance(line, int) or line < 1 or isinstance(e, UnexpectedEOF):
            line, column = _end_position(text)
        if isinstance(e, UnexpectedCharacters):
            message = f"unexpected character {e.char!r}"
        elif isinstance(e, UnexpectedEOF):
            message = "unexpected end of input"
        else:
            token = getattr(e, "token", None)
            if token is None or token.type == "$END":
                message = "unexpected end of input"
            else:
                message = f"unexpected {str(token)!r}"
        raise SystemDescriptionError([
            Diagnostic("SyntaxError", SourceLocation(file, line, max(column, 1)), message)]) from None

    builder = _TreeBuilder(file)
    try:
        root = builder.transform(tree)
    except VisitError as e:
        raise e.orig_exc from None
    if builder.problems:
        raise SystemDescriptionError(builder.problems)
    return root


def loads(text: str, file: str = "<string>") -> Any:
    """Parse tree syntax to plain Python values."""
    return to_plain(parse_tree(text, file))


def load_file(path: Union[str, Path]) -> Any:
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), str(path))


# =============================================================================
# Serialization
# =============================================================================

def _key(key: str) -> str:
    if _BARE_KEY.match(key) and key not in _KEYWORDS:
        return key
    return json.dumps(key, ensure_ascii=False)


def _scalar(value: Any) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (int, Decimal, Fraction)):
        return format_decimal(value)
    raise TypeError(f"cannot serialize {type(value).__name__} in tree syntax")


def dumps_inline(value: Any) -> str:
    """Single-line canonical form: `{key: value, ...}` / `[a, b]`."""
    if isinstance(value, dict):
        return "{" + ", ".join(f"{_key(k)}: {dumps_inline(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(dumps_inline(v) for v in value) + "]"
    return _scalar(value)


def _flat(value: Any) -> bool:
    """True for containers holding only scalars or lists of scalars."""
    children = value.values() if isinstance(value, dict) else value
    for child in children:
        if isinstance(child, dict):
            return False
        if isinstance(child, (list, tuple)) and any(isinstance(c, (dict, list, tuple)) for c in child):
            return False
    return True


def _dump(value: Any, indent: int, out: List[str]):
    if not isinstance(value, (dict, list, tuple)) or not value:
        out.append(dumps_inline(value))
        return
    inline = dumps_inline(value)
    if _flat(value) and indent * 2 + len(inline) <= _INLINE_WIDTH:
        out.append(inline)
        return

    pad = "  " * (indent + 1)
    is_dict = isinstance(value, dict)
    out.append("{\n" if is_dict else "[\n")
    items = list(value.items()) if is_dict else [(None, v) for v in value]
    for position, (key, child) in enumerate(items):
        out.append(pad)
        if is_dict:
            out.append(f"{_key(key)}: ")
        _dump(child, indent + 1, out)
        out.append(",\n" if position < len(items) - 1 else "\n")
    out.append("  " * indent + ("}" if is_dict else "]"))


def dumps(value: Any) -> str:
    """Canonical multi-line form, two-space indent, trailing newline."""
    out: List[str] = []
    _dump(value, 0, out)
    return "".join(out) + "\n"
