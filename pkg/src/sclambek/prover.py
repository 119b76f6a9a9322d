"""Backward cut-free proof search with three-valued answers.

Without hypotheses every rule premise is smaller than its conclusion in the
multiset-of-subformulas order, so the search terminates; the only source of
incompleteness is the omega-rule for iteration in the antecedent, whose
premise family is unrolled up to ``omega_bound``.  A refuted premise refutes
the goal (the left iteration rules are invertible), while a family that is
proved up to the bound leaves the goal undecided.

With hypotheses, Cut is searched over subformulas of the goal and of the
hypotheses, nested at most ``cut_depth`` deep; failure there is reported as
undecided, never as a refutation.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

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
    check_mode,
    validate_formula,
    validate_sequent,
)

DEFAULT_OMEGA_BOUND = 8
DEFAULT_CUT_DEPTH = 4

REFUTED, UNKNOWN, PROVED = 0, 1, 2


class Verdict(enum.Enum):
    DERIVABLE = "Derivable"
    NOT_DERIVABLE = "NotDerivable"
    UNKNOWN_BOUNDED = "UnknownBounded"

    @property
    def exit_code(self) -> int:
        return {"Derivable": 0, "NotDerivable": 1, "UnknownBounded": 2}[self.value]


LEAF_RULES = {"Id", "botL", "topR", "oneR", "starR_0", "Hyp"}


@dataclass(frozen=True)
class ProofTree:
    rule: str
    sequent: Sequent
    premises: tuple["ProofTree", ...] = ()

    def leaves(self):
        if not self.premises:
            yield self
        for p in self.premises:
            yield from p.leaves()

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()

    def cut_nesting(self) -> int:
        inner = max((p.cut_nesting() for p in self.premises), default=0)
        return inner + (self.rule == "Cut")

    def render(self, indent: int = 0) -> str:
        lines = [f"{'  ' * indent}{self.sequent}   [{self.rule}]"]
        for p in self.premises:
            lines.append(p.render(indent + 1))
        return "\n".join(lines)


@dataclass(frozen=True)
class ProofResult:
    verdict: Verdict
    witness: ProofTree | None
    bound_used: int
    cut_depth_used: int
    goal: Sequent | None = field(default=None, compare=False)

    @property
    def derivable(self) -> bool:
        return self.verdict is Verdict.DERIVABLE


class _Search:
    def __init__(self, mode: str, hyps: frozenset[Sequent], omega_bound: int, cut_candidates: Sequence[Formula]):
        self.mode = mode
        self.restricted = mode == RESTRICTED
        self.hyps = hyps
        self.definite = not hyps
        self.omega_bound = omega_bound
        self.cut_candidates = list(cut_candidates)
        self.memo: dict = {}
        self.in_progress: set = set()
        self.reentries = 0
        self.max_unrolled = 0

    def solve(self, ante: tuple, succ: Formula, depth: int):
        key = (ante, succ, 0 if self.definite else depth)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if key in self.in_progress:
            self.reentries += 1
            return (UNKNOWN, None)
        self.in_progress.add(key)
        before = self.reentries
        result = self._solve(ante, succ, depth)
        self.in_progress.discard(key)
        if result[0] == PROVED or self.reentries == before:
            self.memo[key] = result
        return result

    def _instance(self, rule, seq, premises, depth):
        """Evaluate one rule instance; ``premises`` is a list of (ante, succ, depth)."""
        status = PROVED
        proofs = []
        for ante, succ, d in premises:
            st, pr = self.solve(ante, succ, d)
            status = min(status, st)
            if status == REFUTED or (status != PROVED and not self.definite):
                return status, None
            proofs.append(pr)
        if status == PROVED:
            return PROVED, ProofTree(rule, seq, tuple(proofs))
        return status, None

    def _solve(self, ante: tuple, succ: Formula, depth: int):
        seq = Sequent(ante, succ)
        restricted = self.restricted

        # axioms
        if len(ante) == 1 and ante[0] == succ:
            return PROVED, ProofTree("Id", seq)
        if any(isinstance(f, Bot) for f in ante):
            return PROVED, ProofTree("botL", seq)
        if isinstance(succ, Top) and (ante or not restricted):
            return PROVED, ProofTree("topR", seq)
        if not ante and isinstance(succ, One):
            return PROVED, ProofTree("oneR", seq)
        if not ante and isinstance(succ, StarIter):
            return PROVED, ProofTree("starR_0", seq)
        if seq in self.hyps:
            return PROVED, ProofTree("Hyp", seq)

        undecided = False

        # invertible rules: their premises decide the goal
        inv = self._invertible(ante, succ, depth)
        if inv is not None:
            rule, premises = inv
            st, pr = self._instance(rule, seq, premises, depth)
            if st == PROVED:
                return PROVED, pr
            if st == REFUTED and self.definite:
                return REFUTED, None
            undecided = True

        # omega-rule on the first iteration in the antecedent
        for i, f in enumerate(ante):
            if isinstance(f, (PlusIter, StarIter)):
                lo = 1 if isinstance(f, PlusIter) else 0
                for n in range(lo, self.omega_bound + 1):
                    self.max_unrolled = max(self.max_unrolled, n)
                    new = ante[:i] + (f.body,) * n + ante[i + 1:]
                    st, _ = self.solve(new, succ, depth)
                    if st == REFUTED and self.definite:
                        return REFUTED, None
                    if st != PROVED and not self.definite:
                        break
                # a premise family proved up to the bound is still not a proof
                undecided = True
                break

        best = REFUTED
        for rule, premises in self._alternatives(ante, succ, depth):
            st, pr = self._instance(rule, seq, premises, depth)
            if st == PROVED:
                return PROVED, self._flatten(pr)
            best = max(best, st)
        if undecided:
            best = max(best, UNKNOWN)
        return best, None

    def _flatten(self, proof: ProofTree) -> ProofTree:
        """Merge a chain of right iteration steps into one n-premise node."""
        if proof.rule not in ("plusR", "starR"):
            return proof
        prem = proof.premises
        if len(prem) == 2:
            if not re.fullmatch(proof.rule + r"_\d+", prem[1].rule):
                # the tail was closed by some other rule: keep the sound
                # derived step  G => A,  D => A^+  /  G, D => A^+
                return ProofTree(proof.rule + "_cons", proof.sequent, prem)
            prem = (prem[0],) + prem[1].premises
        return ProofTree(f"{proof.rule}_{len(prem)}", proof.sequent, prem)

    def _invertible(self, ante, succ, depth):
        for i, f in enumerate(ante):
            if isinstance(f, Prod):
                return "prodL", [(ante[:i] + (f.left, f.right) + ante[i + 1:], succ, depth)]
            if isinstance(f, One):
                return "oneL", [(ante[:i] + ante[i + 1:], succ, depth)]
            if isinstance(f, Join):
                return "joinL", [
                    (ante[:i] + (f.left,) + ante[i + 1:], succ, depth),
                    (ante[:i] + (f.right,) + ante[i + 1:], succ, depth),
                ]
        if isinstance(succ, Meet):
            return "meetR", [(ante, succ.left, depth), (ante, succ.right, depth)]
        if isinstance(succ, LDiv) and (ante or not self.restricted):
            return "ldivR", [((succ.left,) + ante, succ.right, depth)]
        if isinstance(succ, RDiv) and (ante or not self.restricted):
            return "rdivR", [(ante + (succ.right,), succ.left, depth)]
        return None

    def _alternatives(self, ante, succ, depth):
        n = len(ante)
        allow_empty = not self.restricted
        for i, f in enumerate(ante):
            if isinstance(f, Meet):
                yield "meetL", [(ante[:i] + (f.left,) + ante[i + 1:], succ, depth)]
                yield "meetL", [(ante[:i] + (f.right,) + ante[i + 1:], succ, depth)]
            elif isinstance(f, LDiv):
                # Pi = ante[j:i], immediately left of A\B
                for j in range(i - 1 if not allow_empty else i, -1, -1):
                    pi = ante[j:i]
                    yield "ldivL", [(pi, f.left, depth), (ante[:j] + (f.right,) + ante[i + 1:], succ, depth)]
            elif isinstance(f, RDiv):
                for j in range(i + 2 if not allow_empty else i + 1, n + 1):
                    pi = ante[i + 1:j]
                    yield "rdivL", [(pi, f.right, depth), (ante[:i] + (f.left,) + ante[j:], succ, depth)]
        if isinstance(succ, Prod):
            lo, hi = (1, n - 1) if self.restricted else (0, n)
            for k in range(lo, hi + 1):
                yield "prodR", [(ante[:k], succ.left, depth), (ante[k:], succ.right, depth)]
        elif isinstance(succ, Join):
            yield "joinR", [(ante, succ.left, depth)]
            yield "joinR", [(ante, succ.right, depth)]
        elif isinstance(succ, PlusIter):
            if not ante:
                yield "plusR", [((), succ.body, depth)]
            for k in range(1, n + 1):
                prem = [(ante[:k], succ.body, depth)]
                if k < n:
                    prem.append((ante[k:], succ, depth))
                yield "plusR", prem
        elif isinstance(succ, StarIter):
            for k in range(1, n + 1):
                prem = [(ante[:k], succ.body, depth)]
                if k < n:
                    prem.append((ante[k:], succ, depth))
                yield "starR", prem
        if self.hyps and depth > 0:
            yield from self._cuts(ante, succ, depth)

    def _cuts(self, ante, succ, depth):
        n = len(ante)
        for length in range(0 if not self.restricted else 1, n + 1):
            for i in range(0, n - length + 1):
                j = i + length
                pi = ante[i:j]
                for a in self.cut_candidates:
                    if pi == (a,):
                        continue
                    rest = ante[:i] + (a,) + ante[j:]
                    yield "Cut", [(pi, a, depth - 1), (rest, succ, depth - 1)]


def _cut_candidates(goal: Sequent, hyps: Iterable[Sequent]) -> list[Formula]:
    seen: dict[Formula, None] = {}
    for s in list(hyps) + [goal]:
        for f in s.formulas():
            for sub in f.subformulas():
                seen.setdefault(sub, None)
    return sorted(seen, key=lambda f: (f.size(), str(f)))


def prove(
    goal: Sequent,
    mode: str = RESTRICTED,
    hyps: Iterable[Sequent] = (),
    omega_bound: int = DEFAULT_OMEGA_BOUND,
    cut_depth: int = DEFAULT_CUT_DEPTH,
) -> ProofResult:
    """Search for a derivation of ``goal`` from ``hyps`` in the given mode."""
    check_mode(mode)
    if omega_bound < 1:
        raise ValueError("omega_bound must be at least 1")
    if cut_depth < 0:
        raise ValueError("cut_depth must be non-negative")
    validate_sequent(goal, mode)
    hyps = frozenset(hyps)
    for h in hyps:
        validate_sequent(h, mode)
    search = _Search(mode, hyps, omega_bound, _cut_candidates(goal, hyps) if hyps else [])
    status, proof = search.solve(tuple(goal.antecedent), goal.succedent, cut_depth if hyps else 0)
    if status == PROVED:
        verdict = Verdict.DERIVABLE
    elif status == REFUTED and not hyps:
        verdict = Verdict.NOT_DERIVABLE
    else:
        verdict = Verdict.UNKNOWN_BOUNDED
    used_cut = proof.cut_nesting() if proof is not None else (cut_depth if hyps else 0)
    return ProofResult(verdict, proof, search.max_unrolled, used_cut, goal)


# --------------------------------------------------------------------------
# categorial grammar parsing


class UnknownWords(KeyError):
    def __init__(self, words):
        self.words = list(words)
        super().__init__(f"unknown words: {', '.join(self.words)}")


@dataclass(frozen=True)
class SentenceParse:
    accepted: bool
    assignments: list[tuple[tuple[Formula, ...], ProofResult]]


def parse_sentence(
    lexicon: Mapping[str, Iterable[Formula]],
    sentence: Sequence[str],
    goal_type: Formula,
    mode: str = RESTRICTED,
    omega_bound: int = DEFAULT_OMEGA_BOUND,
) -> SentenceParse:
    """Accept ``sentence`` as ``goal_type`` if some lexical type assignment is derivable."""
    check_mode(mode)
    missing = [w for w in sentence if w not in lexicon]
    if missing:
        raise UnknownWords(dict.fromkeys(missing))
    if not sentence and mode == RESTRICTED:
        raise ModeError("the empty sentence cannot be parsed in restricted mode")
    validate_formula(goal_type, mode)
    choices = [list(dict.fromkeys(lexicon[w])) for w in sentence]
    accepted = []
    for types in itertools.product(*choices):
        result = prove(Sequent(types, goal_type), mode, omega_bound=omega_bound)
        if result.derivable:
            accepted.append((tuple(types), result))
    return SentenceParse(bool(accepted), accepted)


def read_lexicon(lines: Iterable[str], mode: str = RESTRICTED) -> dict[str, list[Formula]]:
    """Tab-separated ``word<TAB>formula`` lines; repeated words add alternatives."""
    from .syntax import parse_formula

    lex: dict[str, list[Formula]] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise ValueError(f"line {lineno}: expected word<TAB>formula")
        word, text = line.split("\t", 1)
        lex.setdefault(word.strip(), []).append(parse_formula(text.strip(), mode))
    return lex
