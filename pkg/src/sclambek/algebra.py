"""Finite residuated lattices given by tables.

Elements are indices ``0..n-1`` with display names.  Division tables follow
the formula syntax: ``ldiv[a][c]`` is ``a\\c`` and ``rdiv[c][b]`` is ``c/b``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .syntax import (
    Bot,
    Formula,
    Join,
    LDiv,
    Meet,
    One,
    PlusIter,
    Prod,
    RDiv,
    Sequent,
    StarIter,
    Top,
    Var,
)

SRBL = "SRBL"
RBL = "RBL"
OMEGA_PAL = "omegaPAL"
OMEGA_AL = "omegaAL"
KINDS = (SRBL, RBL, OMEGA_PAL, OMEGA_AL)


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple

    def __str__(self) -> str:
        return f"{self.axiom}: {self.witness}"


Table = tuple[tuple[int, ...], ...]


@dataclass(frozen=True, eq=False)
class FiniteResiduatedAlgebra:
    elements: tuple[str, ...]
    leq: tuple[tuple[bool, ...], ...]
    prod: Table
    ldiv: Table
    rdiv: Table
    meet: Table
    join: Table
    top: int
    bot: int
    unit: int | None = None
    plus: tuple[int, ...] | None = None
    star: tuple[int, ...] | None = None
    kind: str = OMEGA_PAL
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(self.elements)})

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, name: str | int) -> int:
        if isinstance(name, int):
            return name
        try:
            return self._index[name]
        except KeyError:
            raise AlgebraError(f"unknown element {name!r}") from None

    def le(self, a: int, b: int) -> bool:
        return self.leq[a][b]

    def power(self, a: int, n: int) -> int:
        if n == 0:
            if self.unit is None:
                raise AlgebraError("a^0 needs a unit")
            return self.unit
        x = a
        for _ in range(n - 1):
            x = self.prod[x][a]
        return x

    def word_value(self, letters: Sequence[int]) -> int:
        """Product of a sequence of elements; the empty product is the unit."""
        if not letters:
            if self.unit is None:
                raise AlgebraError("the empty product needs a unit")
            return self.unit
        x = letters[0]
        for a in letters[1:]:
            x = self.prod[x][a]
        return x

    def key(self) -> tuple:
        return (self.elements, self.leq, self.prod, self.unit, self.kind)

    def __eq__(self, other):
        return isinstance(other, FiniteResiduatedAlgebra) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def without_unit(self) -> "FiniteResiduatedAlgebra":
        return _replace(self, unit=None, star=None, kind=OMEGA_PAL)

    def with_prod(self, prod: Sequence[Sequence[int]]) -> "FiniteResiduatedAlgebra":
        """Same algebra with the product table swapped and nothing re-derived."""
        return _replace(self, prod=_freeze(prod))

    def to_json(self) -> dict:
        n = self.size
        name = self.elements
        out = {
            "elements": list(name),
            "leq": [[bool(self.leq[a][b]) for b in range(n)] for a in range(n)],
            "prod": [[name[self.prod[a][b]] for b in range(n)] for a in range(n)],
            "ldiv": [[name[self.ldiv[a][b]] for b in range(n)] for a in range(n)],
            "rdiv": [[name[self.rdiv[a][b]] for b in range(n)] for a in range(n)],
            "meet": [[name[self.meet[a][b]] for b in range(n)] for a in range(n)],
            "join": [[name[self.join[a][b]] for b in range(n)] for a in range(n)],
            "top": name[self.top],
            "bot": name[self.bot],
            "unit": None if self.unit is None else name[self.unit],
        }
        if self.plus is not None:
            out["plus"] = [name[x] for x in self.plus]
        if self.star is not None:
            out["star"] = [name[x] for x in self.star]
        return out

    @classmethod
    def from_json(cls, data: Mapping | str) -> "FiniteResiduatedAlgebra":
        if isinstance(data, str):
            data = json.loads(data)
        names = [str(x) for x in data["elements"]]
        idx = {x: i for i, x in enumerate(names)}

        def conv(v):
            if isinstance(v, int) and not isinstance(v, bool) and str(v) not in idx:
                return v
            try:
                return idx[str(v)]
            except KeyError:
                raise AlgebraError(f"unknown element {v!r}") from None

        def table(key):
            if data.get(key) is None:
                return None
            return [[conv(v) for v in row] for row in data[key]]

        def unary(key):
            if data.get(key) is None:
                return None
            return [conv(v) for v in data[key]]

        return from_tables(
            names,
            [[bool(v) for v in row] for row in data["leq"]],
            table("prod"),
            unit=None if data.get("unit") is None else conv(data["unit"]),
            top=None if data.get("top") is None else conv(data["top"]),
            bot=None if data.get("bot") is None else conv(data["bot"]),
            ldiv=table("ldiv"),
            rdiv=table("rdiv"),
            meet=table("meet"),
            join=table("join"),
            plus=unary("plus"),
            star=unary("star"),
            kind=data.get("kind"),
        )


def _freeze(t):
    return tuple(tuple(row) for row in t)


def _replace(alg: FiniteResiduatedAlgebra, **changes) -> FiniteResiduatedAlgebra:
    fields = {
        k: getattr(alg, k)
        for k in ("elements", "leq", "prod", "ldiv", "rdiv", "meet", "join", "top", "bot", "unit", "plus", "star", "kind")
    }
    fields.update(changes)
    return FiniteResiduatedAlgebra(**fields)


# --------------------------------------------------------------------------
# construction


def _bound(n, leq, candidates, upper: bool):
    """Least upper bound (``upper``) or greatest lower bound of ``candidates``."""
    if upper:
        bounds = [x for x in range(n) if all(leq[c][x] for c in candidates)]
        best = [x for x in bounds if all(leq[x][y] for y in bounds)]
    else:
        bounds = [x for x in range(n) if all(leq[x][c] for c in candidates)]
        best = [x for x in bounds if all(leq[y][x] for y in bounds)]
    return best[0] if len(best) == 1 else None


def _maximum(n, leq, candidates):
    best = [x for x in candidates if all(leq[y][x] for y in candidates)]
    return best[0] if len(best) == 1 else None


def derive_residuals(n, leq, prod):
    ldiv = [[None] * n for _ in range(n)]
    rdiv = [[None] * n for _ in range(n)]
    for a in range(n):
        for c in range(n):
            ldiv[a][c] = _maximum(n, leq, [b for b in range(n) if leq[prod[a][b]][c]])
            if ldiv[a][c] is None:
                raise AlgebraError(f"{a}\\{c} has no maximum solution; product is not residuated")
    for c in range(n):
        for b in range(n):
            rdiv[c][b] = _maximum(n, leq, [a for a in range(n) if leq[prod[a][b]][c]])
            if rdiv[c][b] is None:
                raise AlgebraError(f"{c}/{b} has no maximum solution; product is not residuated")
    return ldiv, rdiv


def iteration_table(n, leq, prod, join, unit=None):
    """``a -> sup{a^n | n >= 1}`` (or ``n >= 0`` when ``unit`` is given)."""
    out = []
    for a in range(n):
        acc = a if unit is None else join[unit][a]
        power = a
        seen = {power}
        while True:
            power = prod[power][a]
            acc = join[acc][power]
            if power in seen:
                break
            seen.add(power)
        out.append(acc)
    return out


def from_tables(
    elements: Sequence[str],
    leq: Sequence[Sequence[bool]],
    prod: Sequence[Sequence[int]],
    *,
    unit: int | None = None,
    top: int | None = None,
    bot: int | None = None,
    ldiv=None,
    rdiv=None,
    meet=None,
    join=None,
    plus=None,
    star=None,
    kind: str | None = None,
) -> FiniteResiduatedAlgebra:
    """Build an algebra, deriving every table that is not given.

    Lattice operations and bounds come from ``leq``; residuals are the
    pointwise maxima; iterations are suprema of powers.
    """
    n = len(elements)
    if n == 0:
        raise AlgebraError("an algebra needs at least one element")
    if len(leq) != n or any(len(r) != n for r in leq):
        raise AlgebraError("leq must be an n x n matrix")
    if prod is None or len(prod) != n or any(len(r) != n for r in prod):
        raise AlgebraError("prod must be an n x n table")
    for t in (prod, ldiv, rdiv, meet, join):
        if t is not None and any(not 0 <= v < n for row in t for v in row):
            raise AlgebraError("table entry out of range")
    if meet is None:
        meet = [[_bound(n, leq, [a, b], upper=False) for b in range(n)] for a in range(n)]
    if join is None:
        join = [[_bound(n, leq, [a, b], upper=True) for b in range(n)] for a in range(n)]
    if any(v is None for row in list(meet) + list(join) for v in row):
        raise AlgebraError("leq is not a lattice order")
    if top is None:
        top = _bound(n, leq, list(range(n)), upper=True)
    if bot is None:
        bot = _bound(n, leq, list(range(n)), upper=False)
    if top is None or bot is None:
        raise AlgebraError("lattice has no top or bottom")
    if ldiv is None or rdiv is None:
        dl, dr = derive_residuals(n, leq, prod)
        ldiv = dl if ldiv is None else ldiv
        rdiv = dr if rdiv is None else rdiv
    if plus is None:
        plus = iteration_table(n, leq, prod, join)
    if unit is not None and star is None:
        star = iteration_table(n, leq, prod, join, unit)
    if kind is None:
        kind = OMEGA_AL if unit is not None else OMEGA_PAL
    if kind not in KINDS:
        raise AlgebraError(f"unknown kind {kind!r}")
    return FiniteResiduatedAlgebra(
        tuple(str(e) for e in elements),
        tuple(tuple(bool(v) for v in row) for row in leq),
        _freeze(prod),
        _freeze(ldiv),
        _freeze(rdiv),
        _freeze(meet),
        _freeze(join),
        top,
        bot,
        unit,
        tuple(plus) if plus is not None else None,
        tuple(star) if star is not None else None,
        kind,
    )


def chain_order(n: int) -> list[list[bool]]:
    return [[a <= b for b in range(n)] for a in range(n)]


def diamond_order() -> list[list[bool]]:
    # 0 = bot, 1, 2 atoms, 3 = top
    up = {0: {0, 1, 2, 3}, 1: {1, 3}, 2: {2, 3}, 3: {3}}
    return [[b in up[a] for b in range(4)] for a in range(4)]


def two_chain(unit: bool = True) -> FiniteResiduatedAlgebra:
    """The Boolean two-element chain with product = meet."""
    leq = chain_order(2)
    prod = [[min(a, b) for b in range(2)] for a in range(2)]
    return from_tables(("bot", "top"), leq, prod, unit=1 if unit else None)


def trivial_algebra(unit: bool = True) -> FiniteResiduatedAlgebra:
    return from_tables(("o",), [[True]], [[0]], unit=0 if unit else None)


# --------------------------------------------------------------------------
# validation


def validate(alg: FiniteResiduatedAlgebra, max_witnesses: int = 5) -> list[Violation]:
    """All axiom failures for the algebra's kind (empty list means valid)."""
    n = alg.size
    R = range(n)
    leq, prod, ldiv, rdiv = alg.leq, alg.prod, alg.ldiv, alg.rdiv
    out: list[Violation] = []

    def fail(axiom, *witness):
        if sum(1 for v in out if v.axiom == axiom) < max_witnesses:
            out.append(Violation(axiom, tuple(alg.elements[w] if isinstance(w, int) else w for w in witness)))

    for t, name in ((prod, "prod"), (ldiv, "ldiv"), (rdiv, "rdiv"), (alg.meet, "meet"), (alg.join, "join")):
        if len(t) != n or any(len(r) != n or any(not 0 <= v < n for v in r) for r in t):
            raise AlgebraError(f"malformed {name} table")

    for a in R:
        if not leq[a][a]:
            fail("reflexivity", a)
    for a, b in itertools.product(R, R):
        if a != b and leq[a][b] and leq[b][a]:
            fail("antisymmetry", a, b)
    for a, b, c in itertools.product(R, R, R):
        if leq[a][b] and leq[b][c] and not leq[a][c]:
            fail("transitivity", a, b, c)
    for a, b in itertools.product(R, R):
        m, j = alg.meet[a][b], alg.join[a][b]
        if not (leq[m][a] and leq[m][b] and all(leq[x][m] for x in R if leq[x][a] and leq[x][b])):
            fail("meet is greatest lower bound", a, b)
        if not (leq[a][j] and leq[b][j] and all(leq[j][x] for x in R if leq[a][x] and leq[b][x])):
            fail("join is least upper bound", a, b)
    for a in R:
        if not leq[a][alg.top]:
            fail("top is maximum", a)
        if not leq[alg.bot][a]:
            fail("bot is minimum", a)
    for a, b, c in itertools.product(R, R, R):
        if prod[prod[a][b]][c] != prod[a][prod[b][c]]:
            fail("associativity", a, b, c)
    for a, b, c in itertools.product(R, R, R):
        mid = leq[prod[a][b]][c]
        if leq[b][ldiv[a][c]] != mid:
            fail("residuation (left division)", a, b, c)
        if leq[a][rdiv[c][b]] != mid:
            fail("residuation (right division)", a, b, c)

    needs_unit = alg.kind in (RBL, OMEGA_AL)
    if needs_unit and alg.unit is None:
        fail("unit required by kind", alg.kind)
    if alg.unit is not None:
        u = alg.unit
        for a in R:
            if prod[u][a] != a or prod[a][u] != a:
                fail("unit is two-sided identity", a)

    def sup_of_powers(a, from_zero):
        powers = set()
        x = a
        while x not in powers:
            powers.add(x)
            x = prod[x][a]
        if from_zero:
            powers.add(alg.unit)
        ubs = [y for y in R if all(leq[p][y] for p in powers)]
        least = [y for y in ubs if all(leq[y][z] for z in ubs)]
        return least[0] if least else None

    if alg.kind in (OMEGA_PAL, OMEGA_AL):
        if alg.plus is None:
            fail("positive iteration required by kind", alg.kind)
    if alg.kind == OMEGA_AL and alg.star is None:
        fail("Kleene iteration required by kind", alg.kind)
    if alg.plus is not None:
        for a in R:
            if alg.plus[a] != sup_of_powers(a, False):
                fail("plus is supremum of positive powers", a)
    if alg.star is not None:
        if alg.unit is None:
            fail("Kleene iteration needs a unit")
        else:
            for a in R:
                if alg.star[a] != sup_of_powers(a, True):
                    fail("star is supremum of all powers", a)
    return out


def is_valid(alg: FiniteResiduatedAlgebra) -> bool:
    return not validate(alg, max_witnesses=1)


# --------------------------------------------------------------------------
# evaluation


def evaluate_formula(alg: FiniteResiduatedAlgebra, interp: Mapping[str, int | str], f: Formula) -> int:
    if isinstance(f, Var):
        if f.name not in interp:
            raise KeyError(f"variable {f.name!r} is not interpreted")
        return alg.index(interp[f.name])
    if isinstance(f, Top):
        return alg.top
    if isinstance(f, Bot):
        return alg.bot
    if isinstance(f, One):
        if alg.unit is None:
            raise AlgebraError("'one' used in an algebra without a unit")
        return alg.unit
    if isinstance(f, PlusIter):
        if alg.plus is None:
            raise AlgebraError("'^+' used in an algebra without positive iteration")
        return alg.plus[evaluate_formula(alg, interp, f.body)]
    if isinstance(f, StarIter):
        if alg.star is None:
            raise AlgebraError("'^*' used in an algebra without Kleene iteration")
        return alg.star[evaluate_formula(alg, interp, f.body)]
    a = evaluate_formula(alg, interp, f.left)
    b = evaluate_formula(alg, interp, f.right)
    if isinstance(f, Prod):
        return alg.prod[a][b]
    if isinstance(f, LDiv):
        return alg.ldiv[a][b]
    if isinstance(f, RDiv):
        return alg.rdiv[a][b]
    if isinstance(f, Meet):
        return alg.meet[a][b]
    if isinstance(f, Join):
        return alg.join[a][b]
    raise TypeError(f"not a formula: {f!r}")


def evaluate_sequent(alg: FiniteResiduatedAlgebra, interp: Mapping[str, int | str], seq: Sequent) -> bool:
    values = [evaluate_formula(alg, interp, f) for f in seq.antecedent]
    if not values and alg.unit is None:
        raise AlgebraError("an empty antecedent needs a unit")
    lhs = alg.word_value(values)
    return alg.leq[lhs][evaluate_formula(alg, interp, seq.succedent)]


# --------------------------------------------------------------------------
# enumeration


def _lattices(max_size: int):
    for n in range(1, max_size + 1):
        yield f"chain{n}", chain_order(n), _chain_generators(n), []
        if n == 4:
            yield "diamond", diamond_order(), [1, 2], [(1, 2)]


def _chain_generators(n):
    return list(range(1, n))


def _join_preserving_products(n, leq, join, bot, gens):
    """All products that preserve joins in both arguments (residuated ones).

    A join-preserving binary map is fixed by its values on pairs of
    join-irreducible generators; the rest is filled by joins.
    """
    # every non-bottom element as a join of generators below it
    decomp = {}
    for x in range(n):
        if x == bot:
            decomp[x] = []
            continue
        below = [g for g in gens if leq[g][x]]
        acc = bot
        for g in below:
            acc = join[acc][g]
        if acc != x:
            raise AlgebraError("generators do not join-generate the lattice")
        decomp[x] = below
    pairs = [(a, b) for a in gens for b in gens]
    for values in itertools.product(range(n), repeat=len(pairs)):
        on_gens = dict(zip(pairs, values))
        # monotone on generators is necessary; cheap prefilter
        ok = True
        for (a, b), v in on_gens.items():
            for (c, d), w in on_gens.items():
                if leq[a][c] and leq[b][d] and not leq[v][w]:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        prod = [[bot] * n for _ in range(n)]
        for x in range(n):
            for y in range(n):
                acc = bot
                for a in decomp[x]:
                    for b in decomp[y]:
                        acc = join[acc][on_gens[(a, b)]]
                prod[x][y] = acc
        # join preservation must hold for the filled table too
        if any(prod[join[x][y]][z] != join[prod[x][z]][prod[y][z]] or prod[z][join[x][y]] != join[prod[z][x]][prod[z][y]]
               for x in range(n) for y in range(n) for z in range(n)):
            continue
        yield prod


def _canonical(prod, autos):
    forms = []
    for perm in autos:
        inv = {v: k for k, v in perm.items()}
        n = len(prod)
        forms.append(tuple(tuple(perm[prod[inv[a]][inv[b]]] for b in range(n)) for a in range(n)))
    return min(forms)


def enumerate_algebras(max_size: int, kind: str = OMEGA_PAL) -> Iterator[FiniteResiduatedAlgebra]:
    """All valid algebras of the given kind on chains (and the diamond) up to ``max_size``.

    Lattice reducts are fixed; products range over associative residuated
    maps; algebras are listed once per isomorphism class.  Kinds with a unit
    keep only products that have one.
    """
    if max_size > 4:
        raise ValueError("enumeration is limited to max_size <= 4")
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    with_unit = kind in (RBL, OMEGA_AL)
    for name, leq, gens, swaps in _lattices(max_size):
        n = len(leq)
        base = from_tables([str(i) for i in range(n)], leq, [[0] * n for _ in range(n)])
        join = base.join
        bot = base.bot
        autos = [{i: i for i in range(n)}]
        for a, b in swaps:
            p = {i: i for i in range(n)}
            p[a], p[b] = b, a
            autos.append(p)
        seen = set()
        for prod in _join_preserving_products(n, leq, join, bot, gens):
            R = range(n)
            if any(prod[prod[a][b]][c] != prod[a][prod[b][c]] for a in R for b in R for c in R):
                continue
            unit = None
            if with_unit:
                units = [u for u in R if all(prod[u][a] == a and prod[a][u] == a for a in R)]
                if not units:
                    continue
                unit = units[0]
            key = _canonical(prod, autos)
            if key in seen:
                continue
            seen.add(key)
            names = _element_names(name, n)
            alg = from_tables(names, leq, prod, unit=unit, kind=kind)
            if kind in (SRBL, RBL):
                alg = _replace(alg, plus=None, star=None)
            if validate(alg, max_witnesses=1):
                continue
            yield alg


def _element_names(lattice: str, n: int) -> list[str]:
    if n == 1:
        return ["o"]
    if lattice == "diamond":
        return ["bot", "l", "r", "top"]
    if n == 2:
        return ["bot", "top"]
    return ["bot"] + [f"m{i}" for i in range(1, n - 1)] + ["top"]
