"""From a finite residuated algebra to a syntactic concept lattice.

Each element ``a`` of the algebra contributes a barred letter ``a^`` and an
underlined letter ``a_``.  A template fixes the designated language L over
these letters; the map ``h(b)`` sends ``b`` to the set of words ``x`` with
``x b_`` in L, i.e. the polar of the single context ``(ε, b_)``.

Templates
  ``psc``     positive words, algebras without unit:
              L = {w b_ : w barred, non-empty, w• <= b} ∪ {x : at least two underlined letters}
  ``scl``     words may be empty, algebras with unit 1:
              L = {w b_ u : w, u barred, w• <= b, u• <= 1} ∪ {x : at least two underlined letters}
  ``botstd``  words may be empty, underlined letters are ignored by x•:
              L = {x b_ : x• <= b} ∪ {z : z• = bot}
              (the empty product is the unit, so the algebra needs one; the
              unit and Kleene star are not part of the transferred signature)
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .algebra import (
    OMEGA_AL,
    OMEGA_PAL,
    RBL,
    SRBL,
    FiniteResiduatedAlgebra,
    evaluate_sequent,
    validate,
)
from .langkit import EPSILON, POSITIVE, Dfa, SyntacticMonoid, Word, pentus_decode, pentus_encode, pentus_encode_lang, words_upto
from .models import SclModel, eval_sequent
from .scl import Concept, SclAlgebra
from .syntax import RESTRICTED, UNRESTRICTED, One, Sequent, StarIter, validate_sequent

PSC = "psc"
SCL = "scl"
BOTSTD = "botstd"
TEMPLATES = (PSC, SCL, BOTSTD)

# formula constructors each template transfers (names as in syntax.random_formula)
SIGNATURES = {
    PSC: frozenset({"ldiv", "rdiv", "prod", "meet", "join", "plus", "top", "bot"}),
    SCL: frozenset({"ldiv", "rdiv", "prod", "meet", "join", "plus", "star", "top", "bot", "one"}),
    BOTSTD: frozenset({"ldiv", "rdiv", "prod", "meet", "join", "plus", "top", "bot"}),
}


class TemplateError(ValueError):
    pass


def template_for_mode(mode: str) -> str:
    return PSC if mode == RESTRICTED else SCL


def calculus_mode(template: str) -> str:
    return RESTRICTED if template == PSC else UNRESTRICTED


def barred(name: str) -> str:
    return f"{name}^"


def underlined(name: str) -> str:
    return f"{name}_"


@dataclass(frozen=True)
class _Letters:
    """Decoding of template symbols back to algebra elements."""

    alg: FiniteResiduatedAlgebra

    @property
    def sigma(self) -> tuple[str, ...]:
        return tuple(barred(e) for e in self.alg.elements) + tuple(underlined(e) for e in self.alg.elements)

    def split(self, word: Sequence[str]) -> list[tuple[bool, int]]:
        """``(is_underlined, element)`` per letter."""
        out = []
        for sym in word:
            name, mark = sym[:-1], sym[-1]
            if mark not in "^_":
                raise ValueError(f"not a template letter: {sym!r}")
            out.append((mark == "_", self.alg.index(name)))
        return out


def _value(alg: FiniteResiduatedAlgebra, letters: Iterable[int]) -> int | None:
    """Product of elements, or None for the empty product without a unit."""
    letters = list(letters)
    if not letters:
        return alg.unit
    return alg.word_value(letters)


def template_accepts(alg: FiniteResiduatedAlgebra, template: str, word: Sequence[str]) -> bool:
    """Membership in the designated language, straight from its set-builder form."""
    parts = _Letters(alg).split(word)
    unders = [i for i, (u, _) in enumerate(parts) if u]
    if template in (PSC, SCL):
        if len(unders) >= 2:
            return True
        if len(unders) != 1:
            return False
        k = unders[0]
        b = parts[k][1]
        w = [e for _, e in parts[:k]]
        u = [e for _, e in parts[k + 1:]]
        if template == PSC:
            return not u and bool(w) and alg.le(alg.word_value(w), b)
        return alg.le(_value(alg, w), b) and alg.le(_value(alg, u), alg.unit)
    if template == BOTSTD:
        v = _value(alg, [e for un, e in parts if not un])
        if v == alg.bot:
            return True
        return bool(parts) and parts[-1][0] and alg.le(v, parts[-1][1])
    raise TemplateError(f"unknown template {template!r}")


def _template_dfa(alg: FiniteResiduatedAlgebra, template: str) -> Dfa:
    n = alg.size
    sigma = _Letters(alg).sigma
    le, prod = alg.le, alg.prod
    states: dict[Any, int] = {}
    delta: list[list[int]] = []
    accepting: set[int] = set()
    queue: list = []

    def state(key) -> int:
        if key not in states:
            states[key] = len(states)
            delta.append([])
            queue.append(key)
        return states[key]

    def accept(key) -> bool:
        kind = key[0]
        if template == PSC:
            return kind in ("one_ok", "two")
        if template == SCL:
            return kind == "two" or (kind == "tail" and le(key[1], alg.unit))
        v, last = key[1], key[2]
        return v == alg.bot or (last is not None and le(v, last))

    def step(key, under: bool, e: int):
        kind = key[0]
        if template in (PSC, SCL):
            if kind == "two":
                return key
            if kind in ("one_ok", "one", "tail"):
                if under:
                    return ("two",)
                if kind == "tail":
                    return ("tail", prod[key[1]][e])
                return ("one",)
            # before any underlined letter; PSC start carries no value
            v = key[1]
            if under:
                if template == PSC:
                    return ("one_ok",) if v is not None and le(v, e) else ("one",)
                return ("tail", alg.unit) if le(v, e) else ("one",)
            return ("pre", e if v is None else prod[v][e])
        v = key[1]
        return ("x", v, e) if under else ("x", prod[v][e], None)

    if template == PSC:
        start = ("pre", None)
    elif template == SCL:
        start = ("pre", alg.unit)
    else:
        start = ("x", alg.unit, None)
    state(start)
    while queue:
        key = queue.pop(0)
        sid = states[key]
        row = []
        for under in (False, True):
            for e in range(n):
                row.append(state(step(key, under, e)))
        delta[sid] = row
        if accept(key):
            accepting.add(sid)
    return Dfa(sigma, len(states), 0, frozenset(accepting), tuple(tuple(r) for r in delta)).minimize()


def _check_template(alg: FiniteResiduatedAlgebra, template: str) -> None:
    if template not in TEMPLATES:
        raise TemplateError(f"unknown template {template!r}; expected one of {TEMPLATES}")
    if template == PSC and alg.unit is not None:
        raise TemplateError("template psc takes algebras without unit (SRBL / omegaPAL); drop the unit first")
    if template == PSC and alg.kind not in (SRBL, OMEGA_PAL):
        raise TemplateError(f"template psc does not accept kind {alg.kind}")
    if template in (SCL, BOTSTD) and alg.unit is None:
        raise TemplateError(f"template {template} needs an algebra with unit (RBL / omegaAL)")
    if template in (SCL, BOTSTD) and alg.kind not in (RBL, OMEGA_AL):
        raise TemplateError(f"template {template} does not accept kind {alg.kind}")


@dataclass
class EmbeddingConstruction:
    algebra: FiniteResiduatedAlgebra
    template: str
    sigma: tuple[str, ...]
    L: Dfa
    scl: SclAlgebra
    h: tuple[Concept, ...]
    cone: SclAlgebra = field(repr=False)

    @property
    def mode(self) -> str:
        return calculus_mode(self.template)

    def h_of(self, a: str | int) -> Concept:
        return self.h[self.algebra.index(a)]

    def value(self, word: Sequence[str]) -> int | None:
        """``x•``: product of the barred letters (all letters must be barred
        except in the botstd template, which skips underlined ones)."""
        parts = _Letters(self.algebra).split(word)
        if self.template != BOTSTD and any(u for u, _ in parts):
            raise ValueError("x• is defined on barred words only in this template")
        return _value(self.algebra, [e for u, e in parts if not u])

    def model(self, interp: Mapping[str, str | int]) -> SclModel:
        """The SCL model ``α = h ∘ β`` over the (upper-cone) lattice."""
        return SclModel(self.cone, {v: self.h_of(a) for v, a in interp.items()}, self.mode)


def build(alg: FiniteResiduatedAlgebra, template: str, *, check_algebra: bool = True) -> EmbeddingConstruction:
    _check_template(alg, template)
    if check_algebra:
        bad = validate(alg, max_witnesses=1)
        if bad:
            raise TemplateError(f"algebra is not valid: {bad[0]}")
    dfa = _template_dfa(alg, template)
    mode = POSITIVE if template == PSC else EPSILON
    sa = SclAlgebra(SyntacticMonoid(dfa, mode), mode)
    h = tuple(sa.from_contexts([sa.monoid.context_of((), (underlined(e),))]) for e in alg.elements)
    if template == BOTSTD:
        cone = sa
    else:
        z = h[alg.bot]
        cone = sa.upper_cone(z) if sa.is_local_zero(z) else sa
    return EmbeddingConstruction(alg, template, dfa.alphabet, dfa, sa, h, cone)


# --------------------------------------------------------------------------
# lemma checks


@dataclass
class LemmaResult:
    lemma: str
    passed: bool
    checked: int = 0
    witness: Any = None

    def to_json(self) -> dict:
        return {"lemma": self.lemma, "status": "pass" if self.passed else {"fail": self.witness}, "checked": self.checked}


@dataclass
class LemmaReport:
    template: str
    results: list[LemmaResult]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, lemma: str) -> LemmaResult:
        for r in self.results:
            if r.lemma == lemma:
                return r
        raise KeyError(lemma)

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.results]

    def __str__(self) -> str:
        lines = []
        for r in self.results:
            status = "pass" if r.passed else f"FAIL  {r.witness}"
            lines.append(f"{r.lemma:<12} {status}  ({r.checked} checks)")
        return "\n".join(lines)


def _word(w: Word) -> str:
    return " ".join(w) if w else "ε"


class _Checker:
    def __init__(self, con: EmbeddingConstruction, rng: random.Random, word_len: int):
        self.con = con
        self.alg = con.algebra
        self.rng = rng
        self.word_len = word_len
        lo = 1 if con.template == PSC else 0
        self.lo = lo
        self.bar = [barred(e) for e in self.alg.elements]
        self.words = list(words_upto(con.sigma, word_len, lo))
        self.barred_words = list(words_upto(self.bar, word_len, lo))

    def _sample_long(self, count: int, alphabet: Sequence[str]) -> list[Word]:
        out = []
        for _ in range(count):
            k = self.rng.randint(self.word_len + 1, self.word_len + 4)
            out.append(tuple(self.rng.choice(alphabet) for _ in range(k)))
        return out

    def language(self) -> LemmaResult:
        con, checked = self.con, 0
        for w in self.words + self._sample_long(300, con.sigma):
            checked += 1
            if con.L.accepts(w) != template_accepts(self.alg, con.template, w):
                return LemmaResult("language", False, checked, {"word": _word(w)})
        if len(con.sigma) != 2 * self.alg.size:
            return LemmaResult("language", False, checked, {"alphabet_size": len(con.sigma)})
        return LemmaResult("language", True, checked)

    def _hb_expected(self, w: Word, b: int) -> bool:
        parts = _Letters(self.alg).split(w)
        if self.con.template == BOTSTD:
            return self.alg.le(_value(self.alg, [e for u, e in parts if not u]), b)
        if any(u for u, _ in parts):
            return True
        return self.alg.le(_value(self.alg, [e for _, e in parts]), b)

    def hb(self) -> LemmaResult:
        checked = 0
        sample = self.words + self._sample_long(200, self.con.sigma)
        for b in range(self.alg.size):
            hb = self.con.h[b]
            for w in sample:
                checked += 1
                if (w in hb) != self._hb_expected(w, b):
                    return LemmaResult("hb", False, checked, {"element": self.alg.elements[b], "word": _word(w)})
        return LemmaResult("hb", True, checked)

    def replace(self) -> LemmaResult:
        sa, checked = self.con.scl, 0
        value = self.con.value
        if self.con.template == BOTSTD:
            # any x against a non-empty barred u
            lefts = self.words
            rights = [u for u in self.barred_words if u]
        else:
            lefts = rights = self.barred_words
        for v in lefts:
            for u in rights:
                checked += 1
                if self.alg.le(value(v), value(u)) != sa.leq_words(v, u):
                    return LemmaResult("replace", False, checked, {"v": _word(v), "u": _word(u)})
        if self.con.template != BOTSTD:
            # words with an underlined letter sit below every barred word
            marked = [x for x in self.words if any(s.endswith("_") for s in x)]
            for x in marked[:200]:
                for u in rights[:40]:
                    checked += 1
                    if not sa.leq_words(x, u):
                        return LemmaResult("replace", False, checked, {"x": _word(x), "u": _word(u)})
        return LemmaResult("replace", True, checked)

    def hom(self) -> LemmaResult:
        alg, sa, h, tpl = self.alg, self.con.scl, self.con.h, self.con.template
        names = alg.elements
        checked = 0

        def fail(op, *args):
            return LemmaResult("hom", False, checked, {"op": op, "args": [names[a] for a in args]})

        n = alg.size
        for a in range(n):
            for b in range(n):
                pairs = (
                    ("prod", alg.prod[a][b], sa.prod(h[a], h[b])),
                    ("ldiv", alg.ldiv[a][b], sa.ldiv(h[a], h[b])),
                    ("rdiv", alg.rdiv[a][b], sa.rdiv(h[a], h[b])),
                    ("meet", alg.meet[a][b], sa.meet(h[a], h[b])),
                    ("join", alg.join[a][b], sa.join(h[a], h[b])),
                )
                for op, expect, got in pairs:
                    checked += 1
                    if h[expect].mask != got.mask:
                        return fail(op, a, b)
            if alg.plus is not None:
                checked += 1
                if h[alg.plus[a]].mask != sa.plus_iter(h[a]).mask:
                    return fail("plus", a)
            if tpl == SCL and alg.star is not None:
                checked += 1
                if h[alg.star[a]].mask != sa.star_iter(h[a]).mask:
                    return fail("star", a)
        checked += 1
        if h[alg.top].mask != sa.top.mask:
            return fail("top")
        if tpl == SCL:
            checked += 1
            if h[alg.unit].mask != sa.unit.mask:
                return fail("unit")
        return LemmaResult("hom", True, checked)

    def lz(self) -> LemmaResult:
        sa, z = self.con.scl, self.con.h[self.alg.bot]
        if not sa.is_local_zero(z):
            return LemmaResult("lz", False, 1, {"reason": "h(bot) is not a local zero"})
        if self.con.template == SCL and not z <= sa.unit:
            # the cone must still contain the unit
            return LemmaResult("lz", False, 2, {"reason": "h(bot) is not below the unit"})
        return LemmaResult("lz", True, 2)

    def hbot(self) -> LemmaResult:
        sa, z = self.con.scl, self.con.h[self.alg.bot]
        ok = z.mask == sa.bot_closure.mask
        return LemmaResult("hbot", ok, 1, None if ok else {"h(bot)": repr(z), "closure(empty)": repr(sa.bot_closure)})

    def order(self) -> LemmaResult:
        alg, h, checked = self.alg, self.con.h, 0
        for a in range(alg.size):
            for b in range(alg.size):
                checked += 1
                if alg.le(a, b) != (h[a] <= h[b]):
                    return LemmaResult("order", False, checked, {"a": alg.elements[a], "b": alg.elements[b]})
        return LemmaResult("order", True, checked)


def check_lemmas(con: EmbeddingConstruction, *, seed: int = 0, word_len: int = 3, two_letter: bool = False) -> LemmaReport:
    """Machine-check the construction; failures are report entries, not exceptions."""
    ck = _Checker(con, random.Random(seed), word_len)
    results = [ck.language(), ck.hb(), ck.replace(), ck.hom()]
    results.append(ck.hbot() if con.template == BOTSTD else ck.lz())
    results.append(ck.order())
    if two_letter:
        results.append(two_letter_lemma(con.L, EPSILON if con.template != PSC else POSITIVE, seed=seed))
    return LemmaReport(con.template, results)


# --------------------------------------------------------------------------
# truth transfer


@dataclass(frozen=True)
class Transfer:
    algebra_truth: bool
    scl_truth: bool

    @property
    def agree(self) -> bool:
        return self.algebra_truth == self.scl_truth


def truth_transfer(con: EmbeddingConstruction, interp: Mapping[str, str | int], seq: Sequent) -> Transfer:
    """Evaluate ``seq`` in the algebra under ``interp`` and in the SCL under ``h ∘ interp``."""
    validate_sequent(seq, con.mode)
    if con.template == BOTSTD:
        for f in seq.formulas():
            if any(isinstance(s, (One, StarIter)) for s in f.subformulas()):
                raise TemplateError("the botstd template transfers neither the unit nor Kleene star")
    missing = seq.variables() - set(interp)
    if missing:
        raise KeyError(f"unassigned variables: {', '.join(sorted(missing))}")
    algebra_truth = evaluate_sequent(con.algebra, interp, seq)
    scl_truth = eval_sequent(con.model(interp), seq)
    return Transfer(algebra_truth, scl_truth)


# --------------------------------------------------------------------------
# two-letter reduction


@dataclass
class TwoLetterResult:
    holds: bool
    nonempty_word: bool
    nonempty_polar: bool
    checked_words: int
    witness: str | None = None

    @property
    def preconditions(self) -> bool:
        return self.nonempty_word and self.nonempty_polar


class TwoLetterReduction:
    """Compare ``g(cl M)`` with ``cl(g M)`` where ``g(a_i) = e f^i e``.

    Closures on both sides are exact (computed in the two syntactic concept
    lattices); the two resulting word sets are compared up to ``word_bound``.
    """

    def __init__(self, dfa: Dfa, mode: str = EPSILON):
        self.src = SclAlgebra(dfa, mode)
        self.dfa = self.src.monoid.dfa
        self.alphabet = self.dfa.alphabet
        self.dst = SclAlgebra(pentus_encode_lang(self.dfa), mode)
        self.mode = mode
        m1, m2 = self.src.monoid, self.dst.monoid
        # pairs (behavior of w, behavior of g(w)) over non-empty words w
        letters = [
            (m1.behavior_of((a,)), m2.behavior_of(pentus_encode((a,), self.alphabet)))
            for a in self.alphabet
        ]
        pairs = set(letters)
        frontier = list(pairs)
        while frontier:
            nxt = []
            for b1, b2 in frontier:
                for l1, l2 in letters:
                    p = (m1.table[b1][l1], m2.table[b2][l2])
                    if p not in pairs:
                        pairs.add(p)
                        nxt.append(p)
            frontier = nxt
        # classes containing some non-empty word
        self.nonempty = sum(1 << b for b in {b1 for b1, _ in pairs})
        if mode == EPSILON:
            pairs.add((m1.identity, m2.identity))
        self.pairs = pairs

    def image_mask(self, mask: int) -> int:
        out = 0
        for b1, b2 in self.pairs:
            if mask >> b1 & 1:
                out |= 1 << b2
        return out

    def check_mask(self, mask: int, word_bound: int = 6) -> TwoLetterResult:
        """The lemma for the union of behavior classes ``mask``."""
        closed = self.src.closure_mask(mask)
        target = self.dst.closure_mask(self.image_mask(mask))
        return self._compare(
            closed,
            target,
            nonempty_word=bool(mask & self.nonempty),
            nonempty_polar=self.src.polar_of(mask) != 0,
            word_bound=word_bound,
        )

    def check_words(self, words: Iterable[Sequence[str]], word_bound: int = 6) -> TwoLetterResult:
        """The lemma for an explicit finite word set."""
        words = [tuple(w) for w in words]
        m1, m2 = self.src.monoid, self.dst.monoid
        mask = image = 0
        for w in words:
            b = m1.behavior_of(w)
            if b is None:
                raise ValueError("the empty word needs epsilon mode")
            mask |= 1 << b
            image |= 1 << m2.behavior_of(pentus_encode(w, self.alphabet))
        return self._compare(
            self.src.closure_mask(mask),
            self.dst.closure_mask(image),
            nonempty_word=any(words),
            nonempty_polar=self.src.polar_of(mask) != 0,
            word_bound=word_bound,
        )

    def _compare(self, closed, target, *, nonempty_word, nonempty_polar, word_bound) -> TwoLetterResult:
        m1, m2 = self.src.monoid, self.dst.monoid
        lo = 1 if self.mode == POSITIVE else 0
        checked = 0
        for x in words_upto(("e", "f"), word_bound, lo):
            checked += 1
            in_rhs = bool(target >> m2.behavior_of(x) & 1)
            pre = pentus_decode(x, self.alphabet)
            in_lhs = pre is not None and bool(closed >> m1.behavior_of(pre) & 1)
            if in_lhs != in_rhs:
                side = "only in cl(g(M))" if in_rhs else "only in g(cl(M))"
                return TwoLetterResult(False, nonempty_word, nonempty_polar, checked, f"{''.join(x) or 'ε'} {side}")
        return TwoLetterResult(True, nonempty_word, nonempty_polar, checked)


def two_letter_lemma(dfa: Dfa, mode: str = EPSILON, *, samples: int = 20, word_bound: int = 6, seed: int = 0) -> LemmaResult:
    """Check the lemma on sampled closed sets that satisfy both preconditions."""
    red = TwoLetterReduction(dfa, mode)
    rng = random.Random(seed)
    src = red.src
    tested = 0
    checked = 0
    for _ in range(samples * 20):
        if tested >= samples:
            break
        k = rng.randint(1, min(3, src.n_behaviors))
        mask = src.closure_mask(sum(1 << b for b in rng.sample(range(src.n_behaviors), k)))
        if not (mask & red.nonempty and src.polar_of(mask)):
            continue
        tested += 1
        res = red.check_mask(mask, word_bound)
        checked += res.checked_words
        if not res.holds:
            return LemmaResult("two_letter", False, checked, {"closed_set": repr(src.concept(mask)), "word": res.witness})
    return LemmaResult("two_letter", tested > 0, checked, None if tested else {"reason": "no admissible sample"})
