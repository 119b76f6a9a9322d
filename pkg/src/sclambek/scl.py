"""Syntactic concept lattices over a regular designated language.

Closed languages are unions of syntactic classes, so a concept is stored as a
bitmask over the elements of a :class:`~sclambek.langkit.SyntacticMonoid`
(its *behaviors*) together with the bitmask of realized context behaviors
accepting all of them (its *polar*).  Everything here is exact; the bounded
:func:`oracle_closure` works on explicit words and is kept independent of the
monoid machinery so it can be used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .langkit import EPSILON, POSITIVE, Dfa, SyntacticMonoid, Word, words_upto

MAX_CONCEPTS = 20_000
SUBSET_ENUMERATION_LIMIT = 16


class LatticeTooLarge(RuntimeError):
    pass


class ClosednessViolation(AssertionError):
    """A division result was not Galois-closed."""


def _bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@dataclass(frozen=True)
class Concept:
    mask: int
    polar_mask: int
    space: "SyntacticMonoid" = field(compare=False, repr=False, hash=False)

    @property
    def behaviors(self) -> frozenset[int]:
        return frozenset(_bits(self.mask))

    @property
    def polar(self) -> frozenset[int]:
        return frozenset(_bits(self.polar_mask))

    def __le__(self, other: "Concept") -> bool:
        return self.mask & ~other.mask == 0

    def __contains__(self, word) -> bool:
        b = self.space.behavior_of(word)
        return b is not None and bool(self.mask >> b & 1)

    def witnesses(self) -> list[Word]:
        return sorted((self.space.elements[b].realized_by for b in _bits(self.mask)), key=lambda w: (len(w), w))

    def __repr__(self) -> str:
        words = ["".join(w) if all(len(a) == 1 for a in w) else " ".join(w) for w in self.witnesses()]
        return f"Concept({{{', '.join(x or 'ε' for x in words)}}})"


class SclAlgebra:
    """The concept lattice of ``dfa`` with its residuated operations.

    ``floor`` replaces the bottom element when the algebra is an upper cone
    over a local zero; it defaults to the closure of the empty set.
    """

    def __init__(self, dfa_or_monoid: Dfa | SyntacticMonoid, mode: str = POSITIVE, floor: Concept | None = None):
        if isinstance(dfa_or_monoid, SyntacticMonoid):
            monoid = dfa_or_monoid
            if monoid.mode != mode:
                raise ValueError("monoid mode does not match algebra mode")
        else:
            monoid = SyntacticMonoid(dfa_or_monoid, mode)
        self.monoid = monoid
        self.mode = mode
        m = len(monoid.elements)
        c = len(monoid.contexts)
        self.n_behaviors = m
        self.n_contexts = c
        self.all_behaviors = (1 << m) - 1
        self.all_contexts = (1 << c) - 1
        ctx_of = [0] * m
        beh_of = [0] * c
        for ci, ctx in enumerate(monoid.contexts):
            for bi, el in enumerate(monoid.elements):
                if el.func[ctx.entry] in ctx.exit_set:
                    ctx_of[bi] |= 1 << ci
                    beh_of[ci] |= 1 << bi
        self._ctx_of = ctx_of  # behavior -> contexts accepting it
        self._beh_of = beh_of  # context -> behaviors it accepts
        self._floor = floor
        self._product_cache: dict[tuple[int, int], int] = {}

    # -- Galois connection ------------------------------------------------

    def polar_of(self, mask: int) -> int:
        out = self.all_contexts
        for b in _bits(mask):
            out &= self._ctx_of[b]
            if not out:
                break
        return out

    def polar_back(self, cmask: int) -> int:
        out = self.all_behaviors
        for c in _bits(cmask):
            out &= self._beh_of[c]
            if not out:
                break
        return out

    def closure_mask(self, mask: int) -> int:
        return self.polar_back(self.polar_of(mask))

    def concept(self, mask: int) -> Concept:
        """Wrap a mask that is already closed."""
        return Concept(mask, self.polar_of(mask), self.monoid)

    def closure(self, behaviors: Iterable[int] | int) -> Concept:
        mask = behaviors if isinstance(behaviors, int) else sum(1 << b for b in set(behaviors))
        polar = self.polar_of(mask)
        return Concept(self.polar_back(polar), polar, self.monoid)

    def from_contexts(self, contexts: Iterable[int]) -> Concept:
        cmask = sum(1 << c for c in set(contexts))
        mask = self.polar_back(cmask)
        return Concept(mask, self.polar_of(mask), self.monoid)

    def closure_of_words(self, words: Iterable[Iterable[str]]) -> Concept:
        mask = 0
        for w in words:
            b = self.monoid.behavior_of(w)
            if b is None:
                raise ValueError("the empty word is not available in positive mode")
            mask |= 1 << b
        return self.closure(mask)

    def is_closed(self, mask: int) -> bool:
        return self.closure_mask(mask) == mask

    def leq_words(self, w1, w2) -> bool:
        """Replaceability: every context accepting ``w2`` accepts ``w1``."""
        b1 = self.monoid.behavior_of(w1)
        b2 = self.monoid.behavior_of(w2)
        return self._ctx_of[b2] & ~self._ctx_of[b1] == 0

    def leq_behaviors(self, b1: int, b2: int) -> bool:
        return self._ctx_of[b2] & ~self._ctx_of[b1] == 0

    # -- constants --------------------------------------------------------

    @cached_property
    def top(self) -> Concept:
        return self.concept(self.all_behaviors)

    @cached_property
    def bot_closure(self) -> Concept:
        return self.closure(0)

    @property
    def bot(self) -> Concept:
        return self._floor if self._floor is not None else self.bot_closure

    @cached_property
    def unit(self) -> Concept:
        if self.mode != EPSILON:
            raise ValueError("the unit exists only in epsilon mode")
        return self.closure(1 << self.monoid.identity)

    # -- operations -------------------------------------------------------

    def _check(self, *concepts: Concept) -> None:
        for c in concepts:
            if c.space is not self.monoid:
                raise ValueError("concepts belong to a different algebra")

    def product_set(self, mask1: int, mask2: int) -> int:
        """Behaviors of concatenations, without closure."""
        key = (mask1, mask2)
        hit = self._product_cache.get(key)
        if hit is not None:
            return hit
        table = self.monoid.table
        out = 0
        right = list(_bits(mask2))
        for i in _bits(mask1):
            row = table[i]
            for j in right:
                out |= 1 << row[j]
        if len(self._product_cache) < 200_000:
            self._product_cache[key] = out
        return out

    def meet(self, p: Concept, q: Concept) -> Concept:
        self._check(p, q)
        return self.concept(p.mask & q.mask)

    def join(self, p: Concept, q: Concept) -> Concept:
        self._check(p, q)
        return self.closure(p.mask | q.mask)

    def prod(self, p: Concept, q: Concept) -> Concept:
        self._check(p, q)
        return self.closure(self.product_set(p.mask, q.mask))

    def ldiv_mask(self, den: int, num: int) -> int:
        """``{t | s.t in num for all s in den}`` on raw masks."""
        table = self.monoid.table
        dens = list(_bits(den))
        out = 0
        for t in range(self.n_behaviors):
            if all(num >> table[s][t] & 1 for s in dens):
                out |= 1 << t
        return out

    def rdiv_mask(self, num: int, den: int) -> int:
        """``{t | t.s in num for all s in den}`` on raw masks."""
        table = self.monoid.table
        dens = list(_bits(den))
        out = 0
        for t in range(self.n_behaviors):
            row = table[t]
            if all(num >> row[s] & 1 for s in dens):
                out |= 1 << t
        return out

    def _closed(self, mask: int, what: str) -> Concept:
        polar = self.polar_of(mask)
        if self.polar_back(polar) != mask:
            raise ClosednessViolation(f"{what} produced a non-closed language")
        return Concept(mask, polar, self.monoid)

    def ldiv(self, p: Concept, q: Concept) -> Concept:
        """``p \\ q``."""
        self._check(p, q)
        return self._closed(self.ldiv_mask(p.mask, q.mask), "left division")

    def rdiv(self, q: Concept, p: Concept) -> Concept:
        """``q / p``."""
        self._check(p, q)
        return self._closed(self.rdiv_mask(q.mask, p.mask), "right division")

    def powers_union(self, mask: int, include_empty: bool = False) -> int:
        """Behaviors of ``P^1 ∪ P^2 ∪ ...`` (plus ``P^0`` if requested), unclosed."""
        acc = mask
        frontier = mask
        while frontier:
            nxt = self.product_set(frontier, mask) & ~acc
            acc |= nxt
            frontier = nxt
        if include_empty:
            if self.monoid.identity is None:
                raise ValueError("the empty power needs epsilon mode")
            acc |= 1 << self.monoid.identity
        return acc

    def plus_iter(self, p: Concept) -> Concept:
        self._check(p)
        return self.closure(self.powers_union(p.mask))

    def star_iter(self, p: Concept) -> Concept:
        self._check(p)
        if self.mode != EPSILON:
            raise ValueError("Kleene star needs epsilon mode")
        return self.join(self.unit, self.plus_iter(p))

    def plus_iter_stepwise(self, p: Concept) -> Concept:
        """Least closed X containing p with X.p inside X, built step by step."""
        x = p.mask
        while True:
            nxt = self.closure_mask(x | self.product_set(x, p.mask))
            if nxt == x:
                return self.concept(x)
            x = nxt

    # -- lattice ----------------------------------------------------------

    def is_local_zero(self, z: Concept) -> bool:
        """Whether ``m.z = z.m = z`` for every concept ``m`` above ``z``.

        By monotonicity of the product it suffices to check ``m = z`` and
        ``m = top``; :meth:`is_local_zero_exhaustive` checks every ``m``.
        """
        self._check(z)
        if not self.is_closed(z.mask):
            return False
        zz = self.prod(z, z).mask
        return zz == z.mask and self.prod(self.top, z).mask == z.mask and self.prod(z, self.top).mask == z.mask

    def is_local_zero_exhaustive(self, z: Concept) -> bool:
        self._check(z)
        for m in self.enumerate_concepts():
            if z.mask & ~m.mask == 0:
                if self.prod(m, z).mask != z.mask or self.prod(z, m).mask != z.mask:
                    return False
        return True

    def enumerate_concepts(self, limit: int = MAX_CONCEPTS) -> list[Concept]:
        """All closed sets, in order of increasing size then mask."""
        floor = self.bot.mask
        found: set[int] = set()
        if self.n_contexts <= SUBSET_ENUMERATION_LIMIT:
            for cmask in range(1 << self.n_contexts):
                m = self.polar_back(cmask)
                if m & floor == floor:
                    found.add(m)
                    if len(found) > limit:
                        raise LatticeTooLarge(f"more than {limit} concepts")
        else:
            found.add(floor)
            frontier = [floor]
            while frontier:
                nxt = []
                for m in frontier:
                    for b in range(self.n_behaviors):
                        if not m >> b & 1:
                            c = self.closure_mask(m | 1 << b)
                            if c not in found:
                                found.add(c)
                                nxt.append(c)
                                if len(found) > limit:
                                    raise LatticeTooLarge(f"more than {limit} concepts")
                frontier = nxt
        return [self.concept(m) for m in sorted(found, key=lambda x: (bin(x).count("1"), x))]

    def local_zeros(self) -> list[Concept]:
        return [z for z in self.enumerate_concepts() if self.is_local_zero(z)]

    def upper_cone(self, z: Concept) -> "SclAlgebra":
        """The sub-algebra of concepts above the local zero ``z``."""
        self._check(z)
        if not self.is_local_zero(z):
            raise ValueError("upper cones are taken over local zeros only")
        cone = SclAlgebra.__new__(SclAlgebra)
        cone.__dict__.update({k: v for k, v in self.__dict__.items() if k not in ("bot_closure",)})
        cone._floor = z
        return cone

    def in_algebra(self, c: Concept) -> bool:
        return c.space is self.monoid and self.bot.mask & ~c.mask == 0

    def words_of(self, c: Concept, max_len: int) -> set[Word]:
        """Members of ``c`` up to the given length."""
        alphabet = self.monoid.dfa.alphabet
        lo = 0 if self.mode == EPSILON else 1
        return {w for w in words_upto(alphabet, max_len, lo) if w in c}


# --------------------------------------------------------------------------
# bounded brute-force oracle


class BoundedContextTable:
    """Acceptance of ``x w y`` for all bounded words and contexts, by direct DFA runs.

    Contexts are pairs with ``len(x) + len(y) <= ctx_len_bound``.
    """

    def __init__(self, dfa: Dfa, word_len_bound: int, ctx_len_bound: int, mode: str = POSITIVE):
        self.dfa = dfa
        self.mode = mode
        alphabet = dfa.alphabet
        lo = 1 if mode == POSITIVE else 0
        self.words: list[Word] = list(words_upto(alphabet, word_len_bound, lo))
        self.word_index = {w: i for i, w in enumerate(self.words)}
        short = list(words_upto(alphabet, ctx_len_bound))
        contexts = [(x, y) for x in short for y in short if len(x) + len(y) <= ctx_len_bound]
        self.contexts = contexts
        n = dfa.state_count
        after_x = np.array([dfa.run(x) for x, _ in contexts], dtype=np.int64)
        y_maps = np.array([[dfa.run(y, q) for q in range(n)] for _, y in contexts], dtype=np.int64)
        accepting = np.zeros(n, dtype=bool)
        accepting[list(dfa.accepting)] = True
        rows = np.arange(len(contexts))
        acc = np.zeros((len(contexts), len(self.words)), dtype=bool)
        for wi, w in enumerate(self.words):
            wmap = np.array([dfa.run(w, q) for q in range(n)], dtype=np.int64)
            acc[:, wi] = accepting[y_maps[rows, wmap[after_x]]]
        self.acc = acc

    def closure(self, words: Iterable[Iterable[str]]) -> set[Word]:
        cols = []
        for w in words:
            w = tuple(w)
            if w not in self.word_index:
                raise ValueError(f"word {w!r} exceeds the oracle's word bound or mode")
            cols.append(self.word_index[w])
        polar = self.acc[:, cols].all(axis=1) if cols else np.ones(len(self.contexts), dtype=bool)
        members = self.acc[polar].all(axis=0)
        return {self.words[i] for i in np.flatnonzero(members)}


_oracle_cache: dict = {}


def oracle_closure(
    dfa: Dfa,
    words: Iterable[Iterable[str]],
    word_len_bound: int,
    ctx_len_bound: int,
    mode: str = POSITIVE,
) -> set[Word]:
    """Bounded double-polar of an explicit word set by direct membership tests."""
    key = (dfa, word_len_bound, ctx_len_bound, mode)
    table = _oracle_cache.get(key)
    if table is None:
        table = BoundedContextTable(dfa, word_len_bound, ctx_len_bound, mode)
        if len(_oracle_cache) > 32:
            _oracle_cache.clear()
        _oracle_cache[key] = table
    return table.closure(words)
