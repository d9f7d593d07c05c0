"""Line-oriented text format for differential systems.

Example::

    system sl2r
    dim 2
    oneforms w1 w2 w3
    pseudos y1 y2
    connection [[w1, w2], [w3, -w1]]
    curvature auto

Optional lines: ``twoforms <ident>+`` (curvature generator names),
``traceless`` (assert a traceless connection), ``d <ident> = <form-expr>``
(structure equation overrides; required for every one-form under
``curvature explicit``).

Form expressions use ``+ - * ^ **`` and parentheses.  ``*`` and ``^`` are
both the exterior product (on scalars it is ordinary multiplication).
Atoms: integers and ``p/q`` rationals, ``i``, ``sqrt3``, ``exp(c*y)``,
declared generator names and any other identifier as a scalar
indeterminate.  Floats are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .exterior import Form, Gen, Matrix, render_form
from .scalar import I_C, SQRT3_C, Scalar

_TOKEN = re.compile(
    r"(?P<ws>[ \t]+)|(?P<float>\d+\.\d*|\.\d+)|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<pow>\*\*)|(?P<op>[-+*/^()\[\],=])"
)


class DSLError(ValueError):
    """Lex/parse/semantic error carrying a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self):
        return f"line {self.line}, col {self.col}: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col0: int = 1) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        if kind == "float":
            raise DSLError(f"floating-point literal {m.group()!r} not allowed; use p/q", line, col0 + pos)
        if kind != "ws":
            out.append(Token(kind, m.group(), line, col0 + pos))
        pos = m.end()
    out.append(Token("eof", "", line, col0 + len(text)))
    return out


class ExprParser:
    """Recursive-descent parser producing :class:`Form` values."""

    def __init__(self, tokens: list[Token], generators: Mapping[str, Gen]):
        self.toks = tokens
        self.i = 0
        self.gens = generators

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise DSLError(msg, tok.line, tok.col)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            self.error(f"expected {text!r}, found {self.tok.text or 'end of line'!r}")
        return self.advance()

    def expr(self) -> Form:
        sign = 1
        if self.tok.text in "+-" and self.tok.kind == "op":
            sign = -1 if self.advance().text == "-" else 1
        acc = self.term() * sign
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> Form:
        acc = self.power()
        while self.tok.kind == "op" and self.tok.text in ("*", "^"):
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                acc = acc * self.power() * -1
            else:
                acc = acc * self.power()
        return acc

    def power(self) -> Form:
        start = self.tok
        base = self.atom()
        if self.tok.kind == "pow":
            self.advance()
            neg = False
            if self.tok.text == "-":
                self.advance()
                neg = True
            if self.tok.kind != "int":
                self.error("expected integer exponent")
            n = int(self.advance().text)
            try:
                s = base.as_scalar()
            except ValueError:
                self.error("only scalars can be raised to a power", start)
            try:
                return Form.scalar(s ** (-n if neg else n))
            except ValueError as e:
                self.error(str(e), start)
        return base

    def rational(self) -> Fraction:
        t = self.advance()
        value = Fraction(int(t.text))
        if self.tok.text == "/":
            self.advance()
            if self.tok.kind != "int":
                self.error("expected integer denominator")
            den = int(self.advance().text)
            if den == 0:
                self.error("zero denominator", t)
            value /= den
        return value

    def atom(self) -> Form:
        t = self.tok
        if t.kind == "int":
            return Form.scalar(self.rational())
        if t.kind == "ident":
            self.advance()
            if t.text == "i":
                return Form.scalar(I_C)
            if t.text == "sqrt3":
                return Form.scalar(SQRT3_C)
            if t.text == "exp" and self.tok.text == "(":
                self.advance()
                inner = self.expr()
                self.expect(")")
                return Form.scalar(_exp_of(inner, t, self))
            if t.text in self.gens:
                return Form.gen(self.gens[t.text])
            return Form.scalar(Scalar.var(t.text))
        if t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.error(f"unexpected {t.text or 'end of input'!r}")


def _exp_of(inner: Form, tok: Token, parser: ExprParser) -> Scalar:
    try:
        s = inner.as_scalar()
    except ValueError:
        parser.error("exp() argument must be a scalar", tok)
    if len(s.terms) != 1:
        parser.error("exp() argument must be c*y with rational c", tok)
    (m, c), = s.terms.items()
    if len(m) != 1 or m[0][1] != 1 or not c.is_rational():
        parser.error("exp() argument must be c*y with rational c", tok)
    return Scalar.exp(m[0][0], c.a)


def parse_form(text: str, generators: Mapping[str, Gen], line: int = 1, col: int = 1) -> Form:
    p = ExprParser(tokenize(text, line, col), generators)
    f = p.expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    return f


# ---------------------------------------------------------------- systems

KEYWORDS = ("system", "dim", "oneforms", "pseudos", "twoforms", "connection", "curvature", "traceless", "d")


def _parse_matrix(p: ExprParser) -> list[list[Form]]:
    p.expect("[")
    rows = []
    while True:
        row_tok = p.tok
        p.expect("[")
        row = [p.expr()]
        while p.tok.text == ",":
            p.advance()
            row.append(p.expr())
        p.expect("]")
        rows.append((row_tok, row))
        if p.tok.text == ",":
            p.advance()
            continue
        break
    p.expect("]")
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after connection matrix")
    return rows


def parse_system(text: str):
    """Parse a system description into a :class:`~prolongation.catalog.SystemSpec`."""
    from .catalog import SystemError_, build_system

    header: dict = {}
    connection_line = None
    overrides: list = []
    traceless = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        lm = re.match(r"(\s*)(\S+)\s*(.*)$", line)
        indent = len(lm.group(1))
        word, rest = lm.group(2), lm.group(3).strip()
        rest_col = lm.start(3) + 1
        if word not in KEYWORDS:
            raise DSLError(f"unknown keyword {word!r}", lineno, indent + 1)
        if word in header and word not in ("d",):
            raise DSLError(f"duplicate {word!r} line", lineno, indent + 1)
        if word == "system":
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", rest):
                raise DSLError("system needs one identifier", lineno, rest_col)
            header["system"] = rest
        elif word == "dim":
            if not re.fullmatch(r"\d+", rest) or int(rest) < 1:
                raise DSLError("dim needs a positive integer", lineno, rest_col)
            header["dim"] = int(rest)
        elif word in ("oneforms", "pseudos", "twoforms"):
            names = rest.split()
            if not names:
                raise DSLError(f"{word} needs at least one identifier", lineno, rest_col)
            seen = set()
            for nm in list(re.finditer(r"\S+", line))[1:]:
                n, col = nm.group(), nm.start() + 1
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n) or n in ("i", "sqrt3", "exp"):
                    raise DSLError(f"invalid identifier {n!r}", lineno, col)
                if n in seen:
                    raise DSLError(f"duplicate generator name {n!r}", lineno, col)
                seen.add(n)
            header[word] = (names, lineno, rest_col)
        elif word == "connection":
            header["connection"] = True
            connection_line = (rest, lineno, rest_col)
        elif word == "curvature":
            if rest not in ("auto", "explicit"):
                raise DSLError("curvature must be 'auto' or 'explicit'", lineno, rest_col)
            header["curvature"] = rest
        elif word == "traceless":
            if rest:
                raise DSLError("traceless takes no arguments", lineno, rest_col)
            header["traceless"] = True
            traceless = True
        elif word == "d":
            m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$", rest)
            if not m:
                raise DSLError("expected 'd <oneform> = <form-expr>'", lineno, rest_col)
            expr_col = rest_col + m.start(2)
            overrides.append((m.group(1), m.group(2), lineno, rest_col, expr_col))

    for req in ("system", "dim", "oneforms", "pseudos", "connection", "curvature"):
        if req not in header:
            raise DSLError(f"missing {req!r} line", 0, 0)

    name = header["system"]
    dim = header["dim"]
    oneforms, of_line, _ = header["oneforms"]
    pseudos, ps_line, _ = header["pseudos"]
    twoforms = header.get("twoforms", (None, 0, 0))[0]
    all_names = list(oneforms) + list(pseudos) + list(twoforms or [])
    dup = {n for n in all_names if all_names.count(n) > 1}
    if dup:
        raise DSLError(f"duplicate generator names {sorted(dup)}", of_line, 1)
    if len(pseudos) != dim:
        raise DSLError(f"{len(pseudos)} pseudopotentials for dim {dim}", ps_line, 1)

    from .catalog import generator_context
    ctx = generator_context(oneforms, pseudos, twoforms or [f"theta{k}" for k in range(1, len(oneforms) + 1)])

    rest, lineno, col = connection_line
    p = ExprParser(tokenize(rest, lineno, col), ctx)
    rows = _parse_matrix(p)
    for tok, r in rows:
        if len(r) != dim:
            raise DSLError(f"dimension mismatch: row has {len(r)} entries, dim is {dim}", tok.line, tok.col)
    if len(rows) != dim:
        raise DSLError(f"dimension mismatch: connection has {len(rows)} rows, dim is {dim}", lineno, col)

    parsed_overrides = {}
    for target, expr, ln, tcol, ecol in overrides:
        if target not in oneforms:
            raise DSLError(f"'d {target}': {target!r} is not a declared one-form", ln, tcol)
        if target in parsed_overrides:
            raise DSLError(f"duplicate structure equation for {target!r}", ln, tcol)
        parsed_overrides[target] = parse_form(expr, ctx, ln, ecol)
    if header["curvature"] == "explicit" and set(parsed_overrides) != set(oneforms):
        missing = [w for w in oneforms if w not in parsed_overrides]
        raise DSLError(f"curvature explicit needs 'd' lines for {missing}", 0, 0)

    try:
        return build_system(
            name, dim, oneforms, pseudos, Matrix([r for _, r in rows]),
            thetas=twoforms, overrides=parsed_overrides, traceless=traceless,
            explicit=header["curvature"] == "explicit",
        )
    except SystemError_ as e:
        raise DSLError(str(e), lineno, col) from None


def emit_system(sys) -> str:
    """Inverse of :func:`parse_system` up to formatting."""
    lines = [
        f"system {sys.name}",
        f"dim {sys.dim}",
        "oneforms " + " ".join(sys.oneforms),
        "pseudos " + " ".join(sys.pseudos),
    ]
    if list(sys.thetas) != [f"theta{k}" for k in range(1, len(sys.oneforms) + 1)]:
        lines.append("twoforms " + " ".join(sys.thetas))
    rows = ", ".join("[" + ", ".join(render_form(e) for e in r) + "]" for r in sys.connection.rows)
    lines.append(f"connection [{rows}]")
    lines.append("curvature explicit" if sys.explicit else "curvature auto")
    if sys.traceless:
        lines.append("traceless")
    for w in sys.oneforms:
        if w in sys.overrides:
            lines.append(f"d {w} = {render_form(sys.overrides[w])}")
    return "\n".join(lines) + "\n"
