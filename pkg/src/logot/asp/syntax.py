"""Abstract syntax, parser and printer for the ASP fragment used by the puzzle encodings.

The fragment covers normal rules, integrity constraints, head disjunction
(``;`` and ``|`` are synonyms), bounded choice rules with conditional
literals, classical negation (``-p``), default negation (``not p``),
comparisons, ``+ - *`` arithmetic, intervals, ``#const`` and a single
``#minimize`` statement.  Anything else is rejected with an
:class:`ASPSyntaxError`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union

__all__ = [
    "ASPSyntaxError",
    "ArityError",
    "Num",
    "Const",
    "Var",
    "Fun",
    "BinOp",
    "Neg",
    "Interval",
    "Term",
    "Atom",
    "Literal",
    "Comparison",
    "BodyItem",
    "ConditionalLiteral",
    "Disjunction",
    "Choice",
    "Rule",
    "ConstDecl",
    "MinimizeElement",
    "Minimize",
    "Program",
    "parse_program",
    "parse_term",
    "format_program",
    "format_statement",
    "format_term",
    "format_atom",
]


class ASPSyntaxError(ValueError):
    """Raised for text outside the supported fragment."""

    def __init__(self, message: str, line: int = 0, column: int = 0, token: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.token = token
        where = f"line {line}, column {column}" if line else "end of input"
        super().__init__(f"{where}: {message}" + (f" (at {token!r})" if token else ""))


class ArityError(ValueError):
    def __init__(self, predicate: str, first: int, second: int):
        self.predicate = predicate
        super().__init__(f"predicate {predicate!r} used with arity {first} and {second}")


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Const:
    """Symbolic constant; a ``#const`` name resolves to an integer at grounding."""

    name: str


@dataclass(frozen=True)
class Var:
    name: str  # "_" is anonymous, fresh per occurrence


@dataclass(frozen=True)
class Fun:
    name: str
    args: tuple


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Neg:
    arg: "Term"


@dataclass(frozen=True)
class Interval:
    lo: "Term"
    hi: "Term"


Term = Union[Num, Const, Var, Fun, BinOp, Neg, Interval]


# ---------------------------------------------------------------------------
# Literals, rules, statements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()
    negated: bool = False  # classical negation

    @property
    def signature(self) -> tuple:
        return (self.predicate, len(self.args))


@dataclass(frozen=True)
class Literal:
    atom: Atom
    naf: bool = False  # default negation ("not")


@dataclass(frozen=True)
class Comparison:
    op: str  # = != < <= > >=
    lhs: Term
    rhs: Term


BodyItem = Union[Literal, Comparison]


@dataclass(frozen=True)
class ConditionalLiteral:
    atom: Atom
    condition: tuple = ()


@dataclass(frozen=True)
class Disjunction:
    atoms: tuple  # one atom for a normal rule or fact


@dataclass(frozen=True)
class Choice:
    elements: tuple
    lower: Optional[Term] = None
    upper: Optional[Term] = None


@dataclass(frozen=True)
class Rule:
    head: Union[Disjunction, Choice, None]
    body: tuple = ()

    @property
    def is_fact(self) -> bool:
        return isinstance(self.head, Disjunction) and len(self.head.atoms) == 1 and not self.body

    @property
    def is_constraint(self) -> bool:
        return self.head is None


@dataclass(frozen=True)
class ConstDecl:
    name: str
    value: int


@dataclass(frozen=True)
class MinimizeElement:
    weight: Term
    terms: tuple = ()
    condition: tuple = ()


@dataclass(frozen=True)
class Minimize:
    elements: tuple


Statement = Union[Rule, ConstDecl, Minimize]


@dataclass(frozen=True)
class Program:
    statements: tuple = ()

    @property
    def rules(self) -> list:
        return [s for s in self.statements if isinstance(s, Rule)]

    @property
    def consts(self) -> dict:
        return {s.name: s.value for s in self.statements if isinstance(s, ConstDecl)}

    @property
    def minimize(self) -> Optional[Minimize]:
        for s in self.statements:
            if isinstance(s, Minimize):
                return s
        return None

    def __add__(self, other: "Program") -> "Program":
        return merge_programs(self, other)


def merge_programs(*programs: Program) -> Program:
    """Union of programs, re-validated (duplicate ``#const`` or ``#minimize`` raise)."""
    statements = tuple(s for p in programs for s in p.statements)
    merged = Program(statements)
    _validate(merged)
    return merged


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<blockcomment>%\*.*?\*%)
  | (?P<comment>%[^\n]*)
  | (?P<directive>\#[a-z]+)
  | (?P<if>:-)
  | (?P<dots>\.\.)
  | (?P<op><=|>=|!=|==|<|>|=)
  | (?P<int>[0-9]+)
  | (?P<var>[A-Z][A-Za-z0-9_']*)
  | (?P<anon>_(?![A-Za-z0-9_]))
  | (?P<ident>[a-z][A-Za-z0-9_']*)
  | (?P<punct>[.,;|(){}:+\-*])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ASPSyntaxError("unexpected character", line, pos - line_start + 1, text[pos])
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment", "blockcomment"):
            if kind in ("punct", "if"):
                kind = chunk
            elif kind == "ident" and chunk == "not":
                kind = "not"
            tokens.append(_Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    # token helpers
    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> _Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: Optional[_Token] = None):
        tok = tok or self.tok
        if tok.kind == "eof":
            raise ASPSyntaxError(message + " (unexpected end of input)", tok.line, tok.column)
        raise ASPSyntaxError(message, tok.line, tok.column, tok.text)

    def expect(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            self.error(f"expected {kind!r}")
        return self.advance()

    # statements
    def program(self) -> Program:
        statements = []
        while self.tok.kind != "eof":
            statements.append(self.statement())
        return Program(tuple(statements))

    def statement(self):
        t = self.tok
        if t.kind == "directive":
            if t.text == "#const":
                return self.const_decl()
            if t.text == "#minimize":
                return self.minimize()
            self.error("unsupported directive")
        if t.kind == ":-":
            self.advance()
            body = self.body()
            self.expect(".")
            return Rule(None, body)
        head = self.head()
        body = ()
        if self.tok.kind == ":-":
            self.advance()
            body = self.body()
        self.expect(".")
        return Rule(head, body)

    def const_decl(self) -> ConstDecl:
        self.advance()
        name = self.expect("ident").text
        if self.tok.kind != "op" or self.tok.text != "=":
            self.error("expected '='")
        self.advance()
        value = self.term()
        self.expect(".")
        folded = _fold_constant(value)
        if folded is None:
            self.error("#const value must be an integer expression", self.tokens[self.i - 2])
        return ConstDecl(name, folded)

    def minimize(self) -> Minimize:
        self.advance()
        self.expect("{")
        elements = []
        if self.tok.kind != "}":
            while True:
                elements.append(self.minimize_element())
                if self.tok.kind == ";":
                    self.advance()
                    continue
                break
        self.expect("}")
        self.expect(".")
        return Minimize(tuple(elements))

    def minimize_element(self) -> MinimizeElement:
        weight = self.term()
        if self.tok.text == "@":
            self.error("priority levels are not supported")
        terms = []
        while self.tok.kind == ",":
            self.advance()
            terms.append(self.term())
        condition = ()
        if self.tok.kind == ":":
            self.advance()
            condition = self.condition()
        return MinimizeElement(weight, tuple(terms), condition)

    def head(self):
        t = self.tok
        if t.kind == "{" or self._starts_bound():
            return self.choice()
        atoms = [self.signed_atom()]
        while self.tok.kind in (";", "|"):
            self.advance()
            atoms.append(self.signed_atom())
        if self.tok.kind == "{":
            self.error("choice bound must precede '{'")
        return Disjunction(tuple(atoms))

    def _starts_bound(self) -> bool:
        t = self.tok
        if t.kind in ("int", "var", "("):
            return True
        if t.kind == "-" and self.peek().kind in ("int", "var", "("):
            return True
        return t.kind == "ident" and self.peek().kind == "{"

    def choice(self) -> Choice:
        lower = None
        if self.tok.kind != "{":
            lower = self.arith()
        self.expect("{")
        elements = []
        if self.tok.kind != "}":
            while True:
                atom = self.signed_atom()
                condition = ()
                if self.tok.kind == ":":
                    self.advance()
                    condition = self.condition()
                elements.append(ConditionalLiteral(atom, condition))
                if self.tok.kind == ";":
                    self.advance()
                    continue
                break
        self.expect("}")
        upper = None
        if self.tok.kind in ("int", "var", "ident", "(", "-"):
            upper = self.arith()
        if isinstance(lower, Num) and isinstance(upper, Num) and lower.value > upper.value:
            raise ASPSyntaxError(
                f"choice bounds {lower.value} > {upper.value}", self.tok.line, self.tok.column
            )
        return Choice(tuple(elements), lower, upper)

    def condition(self) -> tuple:
        items = [self.body_item(in_condition=True)]
        while self.tok.kind == ",":
            self.advance()
            items.append(self.body_item(in_condition=True))
        return tuple(items)

    def body(self) -> tuple:
        items = [self.body_item()]
        while self.tok.kind == ",":
            self.advance()
            items.append(self.body_item())
        return tuple(items)

    def body_item(self, in_condition: bool = False):
        if self.tok.kind == "not":
            tok = self.advance()
            if in_condition:
                self.error("default negation inside a condition is not supported", tok)
            if self.tok.kind == "not":
                self.error("double default negation is not supported")
            return Literal(self.signed_atom(), naf=True)
        if self.tok.kind == "directive":
            self.error("aggregates are not supported")
        start = self.tok
        term = self.term()
        if self.tok.kind == "op":
            op = self.advance().text
            if op == "==":
                op = "="
            rhs = self.term()
            if isinstance(term, Interval) or isinstance(rhs, Interval):
                self.error("intervals are not allowed in comparisons", start)
            return Comparison(op, term, rhs)
        return Literal(self._term_to_atom(term, start))

    def signed_atom(self) -> Atom:
        negated = False
        if self.tok.kind == "-":
            self.advance()
            negated = True
        if self.tok.kind != "ident":
            self.error("expected an atom")
        name = self.advance().text
        args = ()
        if self.tok.kind == "(":
            args = self.arguments()
        return Atom(name, args, negated)

    def _term_to_atom(self, term, start: _Token) -> Atom:
        negated = False
        if isinstance(term, Neg):
            negated = True
            term = term.arg
        if isinstance(term, Const):
            return Atom(term.name, (), negated)
        if isinstance(term, Fun):
            return Atom(term.name, term.args, negated)
        self.error("expected an atom or comparison", start)

    def arguments(self) -> tuple:
        self.expect("(")
        args = []
        if self.tok.kind != ")":
            while True:
                args.append(self.term())
                if self.tok.kind == ",":
                    self.advance()
                    continue
                if self.tok.kind == ";":
                    self.error("pooling is not supported")
                break
        self.expect(")")
        return tuple(args)

    # terms: interval < additive < multiplicative < unary < primary
    def term(self):
        lo = self.arith()
        if self.tok.kind == "dots":
            self.advance()
            hi = self.arith()
            return Interval(lo, hi)
        return lo

    def arith(self):
        left = self.product()
        while self.tok.kind in ("+", "-"):
            op = self.advance().text
            left = BinOp(op, left, self.product())
        return left

    def product(self):
        left = self.unary()
        while self.tok.kind == "*":
            self.advance()
            left = BinOp("*", left, self.unary())
        return left

    def unary(self):
        if self.tok.kind == "-":
            self.advance()
            if self.tok.kind == "int":
                return Num(-int(self.advance().text))
            return Neg(self.unary())
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Num(int(t.text))
        if t.kind == "var":
            self.advance()
            return Var(t.text)
        if t.kind == "anon":
            self.advance()
            return Var("_")
        if t.kind == "ident":
            self.advance()
            if self.tok.kind == "(":
                return Fun(t.text, self.arguments())
            return Const(t.text)
        if t.kind == "(":
            self.advance()
            inner = self.term()
            if self.tok.kind == ",":
                self.error("tuples are not supported")
            self.expect(")")
            return inner
        if t.kind in ("/", "\\", "@"):
            self.error("unsupported operator")
        self.error("expected a term")


def _fold_constant(term) -> Optional[int]:
    if isinstance(term, Num):
        return term.value
    if isinstance(term, Neg):
        v = _fold_constant(term.arg)
        return None if v is None else -v
    if isinstance(term, BinOp):
        a, b = _fold_constant(term.left), _fold_constant(term.right)
        if a is None or b is None:
            return None
        return a + b if term.op == "+" else a - b if term.op == "-" else a * b
    return None


def _atoms_of(statement) -> Iterator[Atom]:
    def body_atoms(items):
        for item in items:
            if isinstance(item, Literal):
                yield item.atom

    if isinstance(statement, Rule):
        if isinstance(statement.head, Disjunction):
            yield from statement.head.atoms
        elif isinstance(statement.head, Choice):
            for el in statement.head.elements:
                yield el.atom
                yield from body_atoms(el.condition)
        yield from body_atoms(statement.body)
    elif isinstance(statement, Minimize):
        for el in statement.elements:
            yield from body_atoms(el.condition)


def _validate(program: Program) -> None:
    arity: dict[str, int] = {}
    for st in program.statements:
        for atom in _atoms_of(st):
            n = len(atom.args)
            seen = arity.setdefault(atom.predicate, n)
            if seen != n:
                raise ArityError(atom.predicate, seen, n)
    names = set()
    minimize_count = 0
    for st in program.statements:
        if isinstance(st, ConstDecl):
            if st.name in names:
                raise ASPSyntaxError(f"duplicate #const {st.name}")
            names.add(st.name)
        elif isinstance(st, Minimize):
            minimize_count += 1
            if minimize_count > 1:
                raise ASPSyntaxError("at most one #minimize statement is supported")


def parse_program(text: str) -> Program:
    """Parse ASP source text into a :class:`Program`.

    >>> parse_program("#const num_step=3.").statements
    (ConstDecl(name='num_step', value=3),)
    """
    program = _Parser(text).program()
    _validate(program)
    return program


def parse_term(text: str):
    parser = _Parser(text)
    term = parser.term()
    parser.expect("eof")
    return term


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2}


def format_term(term) -> str:
    if isinstance(term, Num):
        return str(term.value)
    if isinstance(term, (Const, Var)):
        return term.name
    if isinstance(term, Fun):
        return f"{term.name}({', '.join(format_term(a) for a in term.args)})"
    if isinstance(term, Interval):
        return f"{format_term(term.lo)}..{format_term(term.hi)}"
    if isinstance(term, Neg):
        inner = format_term(term.arg)
        if isinstance(term.arg, (BinOp, Neg)) or (isinstance(term.arg, Num)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(term, BinOp):
        prec = _PREC[term.op]
        left = format_term(term.left)
        if isinstance(term.left, BinOp) and _PREC[term.left.op] < prec:
            left = f"({left})"
        right = format_term(term.right)
        if (isinstance(term.right, BinOp) and _PREC[term.right.op] <= prec) or (
            isinstance(term.right, Num) and term.right.value < 0
        ):
            right = f"({right})"
        return f"{left}{term.op}{right}"
    raise TypeError(f"not a term: {term!r}")


def format_atom(atom: Atom) -> str:
    sign = "-" if atom.negated else ""
    if not atom.args:
        return sign + atom.predicate
    return f"{sign}{atom.predicate}({', '.join(format_term(a) for a in atom.args)})"


def _format_body_item(item) -> str:
    if isinstance(item, Comparison):
        return f"{format_term(item.lhs)} {item.op} {format_term(item.rhs)}"
    return ("not " if item.naf else "") + format_atom(item.atom)


def _format_condition(condition) -> str:
    return ", ".join(_format_body_item(c) for c in condition)


def format_statement(st) -> str:
    if isinstance(st, ConstDecl):
        return f"#const {st.name}={st.value}."
    if isinstance(st, Minimize):
        parts = []
        for el in st.elements:
            tup = ", ".join(format_term(t) for t in (el.weight, *el.terms))
            if el.condition:
                tup += f" : {_format_condition(el.condition)}"
            parts.append(tup)
        return "#minimize { " + "; ".join(parts) + " }."
    body = ", ".join(_format_body_item(b) for b in st.body)
    if st.head is None:
        return f":- {body}."
    if isinstance(st.head, Choice):
        elements = []
        for el in st.head.elements:
            s = format_atom(el.atom)
            if el.condition:
                s += f" : {_format_condition(el.condition)}"
            elements.append(s)
        head = "{ " + "; ".join(elements) + " }" if elements else "{ }"
        if st.head.lower is not None:
            head = f"{format_term(st.head.lower)} {head}"
        if st.head.upper is not None:
            head = f"{head} {format_term(st.head.upper)}"
    else:
        head = "; ".join(format_atom(a) for a in st.head.atoms)
    return f"{head} :- {body}." if body else f"{head}."


def format_program(program: Program) -> str:
    """Canonical text, one statement per line; ``parse_program`` inverts it."""
    return "\n".join(format_statement(s) for s in program.statements)
