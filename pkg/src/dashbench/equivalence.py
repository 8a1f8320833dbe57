"""Two-stage SQL equivalence checking over the compiler's dialect subset.

Stage 1 normalizes both statements (keyword case, whitespace, WHERE
conjunct order, GROUP BY order, IN-list order) and compares normal forms;
equal forms are equivalent. Stage 2, when a live driver is supplied,
executes both statements and compares result multisets column-name-aligned
and order-insensitively. Without a database, differing normal forms give
the honest third verdict: unknown.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .errors import DialectError

EQUIVALENT = "equivalent"
NOT_EQUIVALENT = "not_equivalent"
UNKNOWN = "unknown"

_KEYWORDS = {
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "AS", "AND", "OR", "NOT",
    "BETWEEN", "IN", "IS", "NULL",
}
_AGGREGATES = {"SUM", "AVG", "MIN", "MAX", "COUNT"}

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<string>'(?:[^']|'')*')"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><=|>=|<>|!=|[(),=<>*])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # keyword | ident | number | string | op
    value: str


def _tokenize(sql: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(sql):
        m = _TOKEN_RE.match(sql, pos)
        if m is None:
            rest = sql[pos:].strip()
            if not rest:
                break
            raise DialectError(f"cannot tokenize near {rest[:20]!r}")
        pos = m.end()
        if m.lastgroup == "ident":
            word = m.group("ident")
            upper = word.upper()
            if upper in _KEYWORDS or upper in _AGGREGATES:
                tokens.append(_Token("keyword", upper))
            else:
                tokens.append(_Token("ident", word))
        elif m.lastgroup == "number":
            tokens.append(_Token("number", m.group("number")))
        elif m.lastgroup == "string":
            tokens.append(_Token("string", m.group("string")))
        else:
            tokens.append(_Token("op", m.group("op")))
    return tokens


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class SelectItem:
    column: str
    aggregate: str | None = None
    alias: str | None = None


@dataclass(frozen=True)
class Comparison:
    column: str
    op: str  # = < <= > >= <> BETWEEN IN NOTNULL
    values: tuple[str, ...]  # canonical literal renderings


@dataclass(frozen=True)
class BoolExpr:
    op: str  # and | or | not
    children: tuple


@dataclass(frozen=True)
class Query:
    select: tuple[SelectItem, ...]
    table: str
    where: object | None
    group_by: tuple[str, ...]


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise DialectError("unexpected end of statement")
        self.pos += 1
        return tok

    def expect_keyword(self, word: str) -> None:
        tok = self.next()
        if tok.kind != "keyword" or tok.value != word:
            raise DialectError(f"expected {word}, got {tok.value!r}")

    def accept_keyword(self, word: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.kind == "keyword" and tok.value == word:
            self.pos += 1
            return True
        return False

    def expect_op(self, op: str) -> None:
        tok = self.next()
        if tok.kind != "op" or tok.value != op:
            raise DialectError(f"expected {op!r}, got {tok.value!r}")

    def ident(self) -> str:
        tok = self.next()
        if tok.kind != "ident":
            raise DialectError(f"expected identifier, got {tok.value!r}")
        return tok.value

    def literal(self) -> str:
        tok = self.next()
        if tok.kind == "number":
            return _canonical_number(tok.value)
        if tok.kind == "string":
            return tok.value
        raise DialectError(f"expected literal, got {tok.value!r}")

    # query := SELECT items FROM ident [WHERE expr] [GROUP BY idents]
    def query(self) -> Query:
        self.expect_keyword("SELECT")
        items = [self.select_item()]
        while self.accept_op(","):
            items.append(self.select_item())
        self.expect_keyword("FROM")
        table = self.ident()
        where = None
        if self.accept_keyword("WHERE"):
            where = self.or_expr()
        group: tuple[str, ...] = ()
        if self.accept_keyword("GROUP"):
            self.expect_keyword("BY")
            cols = [self.ident()]
            while self.accept_op(","):
                cols.append(self.ident())
            group = tuple(cols)
        if self.peek() is not None:
            raise DialectError(f"trailing content near {self.peek().value!r}")
        return Query(select=tuple(items), table=table, where=where, group_by=group)

    def accept_op(self, op: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.value == op:
            self.pos += 1
            return True
        return False

    def select_item(self) -> SelectItem:
        tok = self.peek()
        if tok is not None and tok.kind == "keyword" and tok.value in _AGGREGATES:
            agg = self.next().value
            self.expect_op("(")
            inner = self.peek()
            if inner is not None and inner.kind == "op" and inner.value == "*":
                self.next()
                column = "*"
            else:
                column = self.ident()
            self.expect_op(")")
            alias = None
            if self.accept_keyword("AS"):
                alias = self.ident()
            return SelectItem(column=column, aggregate=agg, alias=alias)
        column = self.ident()
        alias = None
        if self.accept_keyword("AS"):
            alias = self.ident()
        return SelectItem(column=column, alias=alias)

    def or_expr(self):
        left = self.and_expr()
        parts = [left]
        while self.accept_keyword("OR"):
            parts.append(self.and_expr())
        if len(parts) == 1:
            return left
        return BoolExpr(op="or", children=tuple(parts))

    def and_expr(self):
        left = self.not_expr()
        parts = [left]
        while self.accept_keyword("AND"):
            parts.append(self.not_expr())
        if len(parts) == 1:
            return left
        return BoolExpr(op="and", children=tuple(parts))

    def not_expr(self):
        if self.accept_keyword("NOT"):
            return BoolExpr(op="not", children=(self.not_expr(),))
        return self.atom()

    def atom(self):
        if self.accept_op("("):
            inner = self.or_expr()
            self.expect_op(")")
            return inner
        column = self.ident()
        tok = self.next()
        if tok.kind == "op" and tok.value in ("=", "<", "<=", ">", ">=", "<>", "!="):
            op = "<>" if tok.value == "!=" else tok.value
            return Comparison(column=column, op=op, values=(self.literal(),))
        if tok.kind == "keyword" and tok.value == "BETWEEN":
            lo = self.literal()
            self.expect_keyword("AND")
            hi = self.literal()
            return Comparison(column=column, op="BETWEEN", values=(lo, hi))
        if tok.kind == "keyword" and tok.value == "IN":
            self.expect_op("(")
            vals = [self.literal()]
            while self.accept_op(","):
                vals.append(self.literal())
            self.expect_op(")")
            return Comparison(column=column, op="IN", values=tuple(vals))
        if tok.kind == "keyword" and tok.value == "IS":
            self.expect_keyword("NOT")
            self.expect_keyword("NULL")
            return Comparison(column=column, op="NOTNULL", values=())
        raise DialectError(f"unsupported predicate near {tok.value!r}")


def _canonical_number(text: str) -> str:
    value = float(text)
    if value == int(value) and "e" not in text.lower() and "." not in text:
        return repr(int(value))
    return repr(value)


def parse_sql(sql: str) -> Query:
    """Parse one statement of the supported subset; DialectError otherwise."""
    stripped = sql.strip().rstrip(";")
    return _Parser(_tokenize(stripped)).query()


# -- normalization -----------------------------------------------------------

def _render_expr(expr) -> str:
    if isinstance(expr, Comparison):
        if expr.op == "NOTNULL":
            return f"{expr.column} IS NOT NULL"
        if expr.op == "BETWEEN":
            return f"{expr.column} BETWEEN {expr.values[0]} AND {expr.values[1]}"
        if expr.op == "IN":
            return f"{expr.column} IN ({', '.join(sorted(expr.values))})"
        return f"{expr.column} {expr.op} {expr.values[0]}"
    if expr.op == "not":
        return f"NOT ({_render_expr(expr.children[0])})"
    joiner = " AND " if expr.op == "and" else " OR "
    return "(" + joiner.join(_render_expr(c) for c in expr.children) + ")"


def _top_level_conjuncts(expr) -> list:
    """Flatten associatively nested ANDs at the top of the WHERE clause."""
    if isinstance(expr, BoolExpr) and expr.op == "and":
        out = []
        for child in expr.children:
            out.extend(_top_level_conjuncts(child))
        return out
    return [expr]


def normalize_sql(sql: str) -> str:
    """Canonical rendering used for the stage-1 syntactic check."""
    q = parse_sql(sql)
    select_parts = []
    for item in q.select:
        if item.aggregate:
            part = f"{item.aggregate}({item.column})"
        else:
            part = item.column
        if item.alias:
            part += f" AS {item.alias}"
        select_parts.append(part)
    out = f"SELECT {', '.join(select_parts)} FROM {q.table}"
    if q.where is not None:
        conjuncts = sorted(_render_expr(c) for c in _top_level_conjuncts(q.where))
        out += " WHERE " + " AND ".join(conjuncts)
    if q.group_by:
        out += " GROUP BY " + ", ".join(sorted(q.group_by))
    return out


# -- verdicts ----------------------------------------------------------------

def _normalize_value(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, (int, float)):
        return float(v)
    return v


def result_multiset(columns: list[str], rows: list[tuple]) -> Counter:
    counter: Counter = Counter()
    for row in rows:
        counter[tuple(sorted((c, _normalize_value(v)) for c, v in zip(columns, row)))] += 1
    return counter


def sql_equivalent(a: str, b: str, db=None) -> str:
    """Check two statements of the supported subset for equivalence.

    `db` is an optional live driver (see dashbench.drivers); when given,
    statements with differing normal forms are settled by executing both
    and comparing result multisets.
    """
    norm_a = normalize_sql(a)
    norm_b = normalize_sql(b)
    if norm_a == norm_b:
        return EQUIVALENT
    if db is None:
        return UNKNOWN
    cols_a, rows_a = db.query(a)
    cols_b, rows_b = db.query(b)
    if result_multiset(cols_a, rows_a) == result_multiset(cols_b, rows_b):
        return EQUIVALENT
    return NOT_EQUIVALENT
