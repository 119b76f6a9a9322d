"""Formulas, sequents and their ASCII surface syntax.

Grammar (loosest to tightest)::

    join    := meet ('|' meet)*
    meet    := prod ('&' prod)*
    prod    := div ('.' div)*
    div     := postfix (('\\' | '/') postfix)?     # chains need parentheses
    postfix := atom ('^+' | '^*')*
    atom    := IDENT | 'top' | 'bot' | 'one' | '(' join ')'

``A\\B`` is left division (``LDiv(A, B)``), ``B/A`` right division
(``RDiv(B, A)``).  Divisions bind tighter than product, so
``np . (np\\s)/np . np`` is a product of three factors.

A sequent is written ``A1, ..., An => C``; the antecedent may be empty only
in unrestricted mode.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

RESTRICTED = "restricted"
UNRESTRICTED = "unrestricted"
MODES = (RESTRICTED, UNRESTRICTED)

KEYWORDS = {"top", "bot", "one"}


class ParseError(ValueError):
    """Malformed formula or sequent text; ``pos`` is a 0-based offset."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)


class ModeError(ValueError):
    """A construct not allowed in the requested mode."""


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)

    def subformulas(self) -> Iterator["Formula"]:
        yield self
        for child in self.children():
            yield from child.subformulas()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children())

    def variables(self) -> set[str]:
        return {f.name for f in self.subformulas() if isinstance(f, Var)}


@dataclass(frozen=True, slots=True)
class Var(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Bot(Formula):
    pass


@dataclass(frozen=True, slots=True)
class One(Formula):
    pass


@dataclass(frozen=True, slots=True)
class _Binary(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, slots=True)
class LDiv(_Binary):
    """``left \\ right``: what yields ``right`` when ``left`` is prepended."""


@dataclass(frozen=True, slots=True)
class RDiv(_Binary):
    """``left / right``: what yields ``left`` when ``right`` is appended."""


@dataclass(frozen=True, slots=True)
class Prod(_Binary):
    pass


@dataclass(frozen=True, slots=True)
class Meet(_Binary):
    pass


@dataclass(frozen=True, slots=True)
class Join(_Binary):
    pass


@dataclass(frozen=True, slots=True)
class PlusIter(Formula):
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True, slots=True)
class StarIter(Formula):
    body: Formula

    def children(self):
        return (self.body,)


TOP = Top()
BOT = Bot()
ONE = One()


@dataclass(frozen=True, slots=True)
class Sequent:
    antecedent: tuple[Formula, ...]
    succedent: Formula

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(self.antecedent))

    def __str__(self) -> str:
        return print_sequent(self)

    def formulas(self) -> tuple[Formula, ...]:
        return self.antecedent + (self.succedent,)

    def variables(self) -> set[str]:
        out: set[str] = set()
        for f in self.formulas():
            out |= f.variables()
        return out


HypothesisSet = frozenset  # frozenset[Sequent]


def validate_formula(f: Formula, mode: str) -> Formula:
    check_mode(mode)
    if mode == RESTRICTED:
        for sub in f.subformulas():
            if isinstance(sub, One):
                raise ModeError("constant 'one' is not allowed in restricted mode")
            if isinstance(sub, StarIter):
                raise ModeError("Kleene star '^*' is not allowed in restricted mode")
    return f


def validate_sequent(s: Sequent, mode: str) -> Sequent:
    for f in s.formulas():
        validate_formula(f, mode)
    if mode == RESTRICTED and not s.antecedent:
        raise ModeError("empty antecedent is not allowed in restricted mode")
    return s


# --------------------------------------------------------------------------
# lexer / parser

_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[a-z][A-Za-z0-9_']*)|(?P<post>\^[+*])|(?P<arrow>=>)"
    r"|(?P<op>[\\/.&|(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        value = m.group(kind)
        tokens.append((kind, value, m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def at(self, *values: str) -> bool:
        return self.peek()[1] in values and self.peek()[0] != "ident"

    def join(self) -> Formula:
        f = self.meet()
        while self.at("|"):
            self.take()
            f = Join(f, self.meet())
        return f

    def meet(self) -> Formula:
        f = self.prod()
        while self.at("&"):
            self.take()
            f = Meet(f, self.prod())
        return f

    def prod(self) -> Formula:
        f = self.div()
        while self.at("."):
            self.take()
            f = Prod(f, self.div())
        return f

    def div(self) -> Formula:
        f = self.postfix()
        if self.at("\\", "/"):
            _, op, _ = self.take()
            g = self.postfix()
            f = LDiv(f, g) if op == "\\" else RDiv(f, g)
            if self.at("\\", "/"):
                raise ParseError("division chains need parentheses", self.peek()[2])
        return f

    def postfix(self) -> Formula:
        f = self.atom()
        while self.peek()[0] == "post":
            _, op, _ = self.take()
            f = PlusIter(f) if op == "^+" else StarIter(f)
        return f

    def atom(self) -> Formula:
        kind, v, pos = self.take()
        if kind == "ident":
            if v == "top":
                return TOP
            if v == "bot":
                return BOT
            if v == "one":
                return ONE
            return Var(v)
        if v == "(":
            f = self.join()
            self.expect(")")
            return f
        raise ParseError(f"expected a formula, found {v or 'end of input'!r}", pos)

    def end(self) -> None:
        kind, v, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {v!r}", pos)


def parse_formula(text: str, mode: str = UNRESTRICTED) -> Formula:
    p = _Parser(text)
    f = p.join()
    p.end()
    return validate_formula(f, mode)


def parse_sequent(text: str, mode: str = UNRESTRICTED) -> Sequent:
    p = _Parser(text)
    ante: list[Formula] = []
    if p.peek()[0] != "arrow":
        ante.append(p.join())
        while p.at(","):
            p.take()
            ante.append(p.join())
    kind, v, pos = p.take()
    if kind != "arrow":
        raise ParseError(f"expected '=>', found {v or 'end of input'!r}", pos)
    succ = p.join()
    p.end()
    return validate_sequent(Sequent(tuple(ante), succ), mode)


def parse_hypotheses(lines: Iterable[str], mode: str = UNRESTRICTED) -> frozenset[Sequent]:
    """One sequent per line; ``#`` starts a comment; blank lines are skipped."""
    hyps = []
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            hyps.append(parse_sequent(line, mode))
        except (ParseError, ModeError) as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
    return frozenset(hyps)


# --------------------------------------------------------------------------
# printer

_PREC = {Join: 1, Meet: 2, Prod: 3, LDiv: 4, RDiv: 4, PlusIter: 5, StarIter: 5}
_SYM = {Join: "|", Meet: "&", Prod: ".", LDiv: "\\", RDiv: "/"}


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), 6)


def print_formula(f: Formula) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, One):
        return "one"
    if isinstance(f, (PlusIter, StarIter)):
        body = print_formula(f.body)
        if _prec(f.body) < 5:
            body = f"({body})"
        return body + ("^+" if isinstance(f, PlusIter) else "^*")
    p = _prec(f)
    left = print_formula(f.left)
    right = print_formula(f.right)
    if isinstance(f, (LDiv, RDiv)):
        # non-associative: any division child needs parentheses
        if _prec(f.left) <= p:
            left = f"({left})"
        if _prec(f.right) <= p:
            right = f"({right})"
    else:
        if _prec(f.left) < p:
            left = f"({left})"
        if _prec(f.right) <= p:
            right = f"({right})"
    return f"{left}{_SYM[type(f)]}{right}"


def print_sequent(s: Sequent) -> str:
    ante = ", ".join(print_formula(f) for f in s.antecedent)
    return f"{ante} => {print_formula(s.succedent)}" if ante else f"=> {print_formula(s.succedent)}"


# --------------------------------------------------------------------------
# random generation

CONSTRUCTORS = {
    "ldiv": LDiv,
    "rdiv": RDiv,
    "prod": Prod,
    "meet": Meet,
    "join": Join,
    "plus": PlusIter,
    "star": StarIter,
    "top": TOP,
    "bot": BOT,
    "one": ONE,
}
_UNARY = {"plus", "star"}
_CONSTANTS = {"top", "bot", "one"}


def random_formula(rng, depth: int, variables: Iterable[str], allowed: Iterable[str]) -> Formula:
    """A formula of height at most ``depth`` using the named constructors."""
    variables = list(variables)
    allowed = sorted(set(allowed))
    constants = [CONSTRUCTORS[c] for c in allowed if c in _CONSTANTS]
    ops = [c for c in allowed if c not in _CONSTANTS]
    if depth <= 1 or not ops or rng.random() < 0.25:
        if constants and rng.random() < 0.15:
            return rng.choice(constants)
        return Var(rng.choice(variables))
    op = rng.choice(ops)
    if op in _UNARY:
        return CONSTRUCTORS[op](random_formula(rng, depth - 1, variables, allowed))
    return CONSTRUCTORS[op](
        random_formula(rng, depth - 1, variables, allowed),
        random_formula(rng, depth - 1, variables, allowed),
    )


def random_sequent(rng, depth: int, variables: Iterable[str], allowed: Iterable[str], max_antecedent: int = 3, allow_empty: bool = False) -> Sequent:
    variables = list(variables)
    n = rng.randint(0 if allow_empty else 1, max_antecedent)
    ante = tuple(random_formula(rng, depth, variables, allowed) for _ in range(n))
    return Sequent(ante, random_formula(rng, depth, variables, allowed))
