"""SCL models: interpretations of formulas as closed languages, and countermodel search."""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .algebra import OMEGA_AL, OMEGA_PAL, enumerate_algebras, evaluate_sequent
from .langkit import EPSILON, POSITIVE, Dfa
from .scl import Concept, SclAlgebra
from .syntax import (
    RESTRICTED,
    Bot,
    Formula,
    Join,
    LDiv,
    Meet,
    ModeError,
    One,
    PlusIter,
    Prod,
    RDiv,
    Sequent,
    StarIter,
    Top,
    Var,
    check_mode,
    validate_formula,
    validate_sequent,
)

NOT_FOUND_CAVEAT = (
    "No countermodel was found within the budget. This is not a proof that the "
    "goal follows from the hypotheses: regular (finite) SCL models are not "
    "strongly complete, so some non-entailments have no finite countermodel."
)


class UnassignedVariable(KeyError):
    pass


def language_mode(mode: str) -> str:
    """The word-space mode matching a calculus mode."""
    return POSITIVE if check_mode(mode) == RESTRICTED else EPSILON


@dataclass
class SclModel:
    algebra: SclAlgebra
    assignment: dict[str, Concept]
    mode: str = RESTRICTED

    def __post_init__(self):
        check_mode(self.mode)
        if self.algebra.mode != language_mode(self.mode):
            raise ModeError(f"{self.mode} models need a {language_mode(self.mode)}-mode lattice")
        for name, c in self.assignment.items():
            if not self.algebra.in_algebra(c):
                raise ValueError(f"value of {name!r} is not an element of the model's lattice")

    def eval(self, f: Formula) -> Concept:
        return eval_formula(self, f)

    def holds(self, s: Sequent) -> bool:
        return eval_sequent(self, s)

    def to_json(self, witness_len: int = 4) -> dict:
        alg = self.algebra
        return {
            "mode": self.mode,
            "language": alg.monoid.dfa.to_json(),
            "floor": _concept_json(alg.bot, alg, witness_len),
            "assignment": {v: _concept_json(c, alg, witness_len) for v, c in sorted(self.assignment.items())},
        }


def _concept_json(c: Concept, alg: SclAlgebra, witness_len: int) -> dict:
    words = sorted(alg.words_of(c, witness_len), key=lambda w: (len(w), w))
    return {
        "behaviors": sorted(c.behaviors),
        "class_witnesses": [" ".join(w) for w in c.witnesses()],
        "words_upto_%d" % witness_len: [" ".join(w) for w in words[:50]],
    }


def eval_formula(model: SclModel, f: Formula, _memo: dict | None = None) -> Concept:
    validate_formula(f, model.mode)
    return _eval(model, f, {} if _memo is None else _memo)


def _eval(model: SclModel, f: Formula, memo: dict) -> Concept:
    hit = memo.get(f)
    if hit is not None:
        return hit
    alg = model.algebra
    if isinstance(f, Var):
        try:
            out = model.assignment[f.name]
        except KeyError:
            raise UnassignedVariable(f"variable {f.name!r} has no value") from None
    elif isinstance(f, Top):
        out = alg.top
    elif isinstance(f, Bot):
        out = alg.bot
    elif isinstance(f, One):
        out = alg.unit
    elif isinstance(f, Prod):
        out = alg.prod(_eval(model, f.left, memo), _eval(model, f.right, memo))
    elif isinstance(f, LDiv):
        out = alg.ldiv(_eval(model, f.left, memo), _eval(model, f.right, memo))
    elif isinstance(f, RDiv):
        out = alg.rdiv(_eval(model, f.left, memo), _eval(model, f.right, memo))
    elif isinstance(f, Meet):
        out = alg.meet(_eval(model, f.left, memo), _eval(model, f.right, memo))
    elif isinstance(f, Join):
        out = alg.join(_eval(model, f.left, memo), _eval(model, f.right, memo))
    elif isinstance(f, PlusIter):
        out = alg.plus_iter(_eval(model, f.body, memo))
    elif isinstance(f, StarIter):
        out = alg.star_iter(_eval(model, f.body, memo))
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = out
    return out


def eval_sequent(model: SclModel, s: Sequent, _memo: dict | None = None) -> bool:
    """Truth of ``A1, ..., An => B``; an empty antecedent asks for the empty word in B."""
    validate_sequent(s, model.mode)
    memo = {} if _memo is None else _memo
    alg = model.algebra
    succ = _eval(model, s.succedent, memo)
    if not s.antecedent:
        return bool(succ.mask >> alg.monoid.identity & 1)
    acc = _eval(model, s.antecedent[0], memo)
    for f in s.antecedent[1:]:
        acc = alg.prod(acc, _eval(model, f, memo))
    return acc <= succ


# --------------------------------------------------------------------------
# countermodel search


@dataclass(frozen=True)
class SearchBudget:
    max_dfa_states: int = 3
    max_letters: int = 2
    max_algebra_size: int = 4
    sample_limit: int = 200_000
    seed: int = 0

    def __post_init__(self):
        for name in ("max_dfa_states", "max_letters", "max_algebra_size", "sample_limit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class CountermodelReport:
    found: bool
    model: SclModel | None = None
    source: str | None = None  # "algebra-embedding" or "dfa"
    checked_count: int = 0
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"found": self.found, "L_source": self.source, "checked_count": self.checked_count}
        if self.model is not None:
            out["model"] = self.model.to_json()
        out.update(self.detail)
        if not self.found:
            out["caveat"] = NOT_FOUND_CAVEAT
        return out


def _variables(hyps: Iterable[Sequent], goal: Sequent) -> list[str]:
    names: set[str] = set(goal.variables())
    for h in hyps:
        names |= h.variables()
    return sorted(names)


def _all_dfas(max_states: int, max_letters: int) -> Iterator[Dfa]:
    """Minimal DFAs up to the given size, each reported once, smallest first."""
    seen: set[str] = set()
    for k in range(1, max_letters + 1):
        alphabet = tuple("abcdefghijklmnopqrstuvwxyz"[:k])
        for n in range(1, max_states + 1):
            cells = n * k
            for targets in itertools.product(range(n), repeat=cells):
                delta = tuple(tuple(targets[q * k:(q + 1) * k]) for q in range(n))
                for acc_bits in range(1 << n):
                    accepting = frozenset(q for q in range(n) if acc_bits >> q & 1)
                    dfa = Dfa(alphabet, n, 0, accepting, delta).minimize()
                    if dfa.state_count != n:
                        continue
                    key = repr(dfa.to_json())
                    if key not in seen:
                        seen.add(key)
                        yield dfa


def _small_concepts(alg: SclAlgebra) -> list[Concept]:
    masks = {alg.closure_mask(0)}
    m = alg.n_behaviors
    for i in range(m):
        masks.add(alg.closure_mask(1 << i))
        for j in range(i + 1, m):
            masks.add(alg.closure_mask(1 << i | 1 << j))
    return [alg.concept(x) for x in sorted(masks, key=lambda x: (bin(x).count("1"), x))]


def _search_unit(unit_index: int, spec) -> tuple[int, int, dict | None]:
    """Search one work unit; returns (checked, position of first hit or -1, payload)."""
    kind, payload, hyps, goal, mode, variables, seed, cap = spec
    rng = random.Random(seed)
    checked = 0
    if kind == "algebra":
        from .algebra import FiniteResiduatedAlgebra

        alg = FiniteResiduatedAlgebra.from_json(payload)
        assignments = list(itertools.product(range(alg.size), repeat=len(variables)))
        rng.shuffle(assignments)
        for pos, values in enumerate(assignments[:cap]):
            checked += 1
            interp = dict(zip(variables, values))
            if all(evaluate_sequent(alg, interp, h) for h in hyps) and not evaluate_sequent(alg, interp, goal):
                return checked, pos, {"interp": {v: alg.elements[i] for v, i in interp.items()}}
        return checked, -1, None
    dfa = Dfa.from_json(payload)
    sa = SclAlgebra(dfa, language_mode(mode))
    pool = _small_concepts(sa)
    assignments = list(itertools.product(range(len(pool)), repeat=len(variables)))
    rng.shuffle(assignments)
    for pos, values in enumerate(assignments[:cap]):
        checked += 1
        model = SclModel(sa, {v: pool[i] for v, i in zip(variables, values)}, mode)
        memo: dict = {}
        if all(eval_sequent(model, h, memo) for h in hyps) and not eval_sequent(model, goal, memo):
            return checked, pos, {"assignment": {v: pool[i].mask for v, i in zip(variables, values)}}
    return checked, -1, None


STRATEGIES = ("algebra", "dfa")


def _units(mode, budget: SearchBudget, strategies):
    """Interleaved work units: algebras (strategy A) and languages (strategy B)."""
    kind = OMEGA_PAL if mode == RESTRICTED else OMEGA_AL
    streams = []
    if "algebra" in strategies:
        streams.append(("algebra", a.to_json()) for a in enumerate_algebras(min(budget.max_algebra_size, 4), kind))
    if "dfa" in strategies:
        streams.append(("dfa", d.to_json()) for d in _all_dfas(budget.max_dfa_states, budget.max_letters))
    for pair in itertools.zip_longest(*streams):
        for item in pair:
            if item is not None:
                yield item


def countermodel_search(
    hyps: Iterable[Sequent],
    goal: Sequent,
    mode: str = RESTRICTED,
    budget: SearchBudget | None = None,
    jobs: int = 1,
    strategies: Iterable[str] = STRATEGIES,
) -> CountermodelReport:
    """Look for a regular SCL model of ``hyps`` in which ``goal`` fails.

    Work units are processed in a fixed order and the lowest-indexed hit wins,
    so the answer does not depend on ``jobs``.
    """
    budget = budget or SearchBudget()
    check_mode(mode)
    strategies = tuple(strategies)
    unknown = set(strategies) - set(STRATEGIES)
    if unknown or not strategies:
        raise ValueError(f"strategies must be drawn from {STRATEGIES}")
    hyps = [validate_sequent(h, mode) for h in hyps]
    validate_sequent(goal, mode)
    variables = _variables(hyps, goal) or ["p"]
    remaining = budget.sample_limit
    checked_total = 0
    units = _units(mode, budget, strategies)
    batch_size = max(1, jobs) * 2
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        index = 0
        while remaining > 0:
            batch = list(itertools.islice(units, batch_size))
            if not batch:
                break
            specs = [
                (k, p, hyps, goal, mode, variables, budget.seed * 1_000_003 + index + i, remaining)
                for i, (k, p) in enumerate(batch)
            ]
            if pool is None:
                results = []
                for i, s in enumerate(specs):
                    r = _search_unit(index + i, s)
                    results.append(r)
                    if r[1] >= 0:
                        break
            else:
                results = list(pool.map(_search_unit, range(index, index + len(specs)), specs))
            for (kind, unit), (checked, pos, hit) in zip(batch, results):
                checked_total += min(checked, remaining)
                remaining -= checked
                if pos >= 0:
                    return _report(kind, unit, hit, hyps, goal, mode, checked_total)
                if remaining <= 0:
                    break
            index += len(batch)
    finally:
        if pool is not None:
            pool.shutdown()
    return CountermodelReport(False, checked_count=checked_total)


def _report(kind, unit, hit, hyps, goal, mode, checked) -> CountermodelReport:
    if kind == "algebra":
        # imported here: the embedding module itself builds on SclModel
        from .algebra import FiniteResiduatedAlgebra
        from .embedding import build, template_for_mode

        con = build(FiniteResiduatedAlgebra.from_json(unit), template_for_mode(mode))
        model = con.model(hit["interp"])
        detail = {"algebra": con.algebra.to_json(), "interp": hit["interp"], "template": con.template}
        source = "algebra-embedding"
    else:
        sa = SclAlgebra(Dfa.from_json(unit), language_mode(mode))
        model = SclModel(sa, {v: sa.concept(m) for v, m in hit["assignment"].items()}, mode)
        detail = {}
        source = "dfa"
    # re-verify directly in the realized lattice
    if not (all(eval_sequent(model, h) for h in hyps) and not eval_sequent(model, goal)):
        raise AssertionError("countermodel failed re-verification")
    return CountermodelReport(True, model, source, checked, detail)


def verify_countermodel(model: SclModel, hyps: Iterable[Sequent], goal: Sequent) -> bool:
    memo: dict = {}
    return all(eval_sequent(model, h, memo) for h in hyps) and not eval_sequent(model, goal, memo)


def model_from_words(dfa: Dfa, assignment: Mapping[str, Iterable[Iterable[str]]], mode: str = RESTRICTED) -> SclModel:
    """A model whose variables denote closures of explicit word sets."""
    alg = SclAlgebra(dfa, language_mode(mode))
    return SclModel(alg, {v: alg.closure_of_words(ws) for v, ws in assignment.items()}, mode)
