"""Command-line entry point: ``sclambek <command> ...``.

Exit codes
  prove         0 Derivable, 1 NotDerivable, 2 UnknownBounded
  parse         0 accepted, 1 rejected
  eval          0 true, 1 false
  embed         0 every lemma (and transfer) passed, 1 otherwise
  countermodel  0 found, 1 not found within the budget
  reduce2       0 lemma holds on every checked set, 1 otherwise
  scl           0
  any command   64 usage or input error, 70 internal invariant breach
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .algebra import (
    AlgebraError,
    FiniteResiduatedAlgebra,
    evaluate_sequent,
    trivial_algebra,
    two_chain,
)
from .embedding import TEMPLATES, TemplateError, TwoLetterReduction, build, check_lemmas, truth_transfer, two_letter_lemma
from .langkit import EPSILON, LANG_MODES, POSITIVE, Dfa, dfa_all_nonempty, dfa_for_word_set, dfa_template_uavb, pentus_encode_lang
from .models import NOT_FOUND_CAVEAT, STRATEGIES, SclModel, SearchBudget, countermodel_search, eval_sequent, language_mode
from .prover import DEFAULT_CUT_DEPTH, DEFAULT_OMEGA_BOUND, UnknownWords, parse_sentence, prove, read_lexicon
from .scl import ClosednessViolation, LatticeTooLarge, SclAlgebra
from .syntax import MODES, RESTRICTED, ModeError, ParseError, parse_formula, parse_hypotheses, parse_sequent

SCHEMA = "scl-lambek/1"
EX_USAGE = 64
EX_SOFTWARE = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


BUILTIN_LANGS = {
    "uavb": lambda: dfa_template_uavb(("a", "b", "c", "d")),
    "ab": lambda: dfa_for_word_set([("a", "b")], ("a", "b")),
    "aplus": lambda: dfa_all_nonempty(("a",)),
}

BUILTIN_ALGEBRAS = {
    "two_chain": lambda: two_chain(unit=False),
    "two_chain_unit": lambda: two_chain(unit=True),
    "trivial": lambda: trivial_algebra(unit=False),
    "trivial_unit": lambda: trivial_algebra(unit=True),
}


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def load_language(spec: str) -> Dfa:
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTIN_LANGS:
            raise UsageError(f"unknown builtin language {name!r}; choose from {sorted(BUILTIN_LANGS)}")
        return BUILTIN_LANGS[name]()
    try:
        return Dfa.from_json(_read_json(spec))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{spec}: not a valid DFA file ({exc})") from None


def load_algebra(spec: str) -> FiniteResiduatedAlgebra:
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTIN_ALGEBRAS:
            raise UsageError(f"unknown builtin algebra {name!r}; choose from {sorted(BUILTIN_ALGEBRAS)}")
        return BUILTIN_ALGEBRAS[name]()
    data = _read_json(spec)
    try:
        return FiniteResiduatedAlgebra.from_json(data)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"{spec}: not a valid algebra file ({exc})") from None


def _read_lines(path: str) -> list[str]:
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def parse_word(text: str, alphabet: Sequence[str]) -> tuple[str, ...]:
    """``"a b"`` or ``"ab"`` (single-character alphabets); ``"ε"`` or ``""`` is empty."""
    text = text.strip()
    if text in ("", "ε", "eps"):
        return ()
    if " " in text:
        word = tuple(text.split())
    elif text in alphabet:
        word = (text,)
    elif all(len(a) == 1 for a in alphabet):
        word = tuple(text)
    else:
        raise UsageError(f"cannot split {text!r} into letters; separate them with spaces")
    bad = [a for a in word if a not in alphabet]
    if bad:
        raise UsageError(f"letters not in the alphabet: {', '.join(bad)}")
    return word


def parse_words(text: str, alphabet: Sequence[str]) -> list[tuple[str, ...]]:
    return [parse_word(w, alphabet) for w in text.split(",")] if text.strip() else []


def parse_assignments(text: str) -> dict[str, str]:
    out = {}
    for item in text.replace(",", " ").split():
        if "=" not in item:
            raise UsageError(f"expected var=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps({"schema": SCHEMA, "command": args.command, **payload}, indent=2, default=str))
    else:
        print(text)


# --------------------------------------------------------------------------
# commands


def cmd_prove(args) -> int:
    hyps = parse_hypotheses(_read_lines(args.hyp), args.mode) if args.hyp else frozenset()
    goal = parse_sequent(args.sequent, args.mode)
    res = prove(goal, args.mode, hyps, omega_bound=args.omega_bound, cut_depth=args.cut_depth)
    lines = [res.verdict.value]
    if args.show_proof and res.witness is not None:
        lines.append(res.witness.render())
    payload = {
        "sequent": str(goal),
        "mode": args.mode,
        "verdict": res.verdict.value,
        "bound_used": res.bound_used,
        "cut_depth_used": res.cut_depth_used,
    }
    if args.show_proof and res.witness is not None:
        payload["proof"] = res.witness.render()
    _emit(args, payload, "\n".join(lines))
    return res.verdict.exit_code


def cmd_parse(args) -> int:
    lexicon = read_lexicon(_read_lines(args.lexicon), args.mode)
    goal = parse_formula(args.goal, args.mode)
    words = args.sentence.split()
    try:
        result = parse_sentence(lexicon, words, goal, args.mode)
    except UnknownWords as exc:
        raise UsageError(str(exc.args[0])) from None
    assignments = [[str(t) for t in types] for types, _ in result.assignments]
    text = "accepted" if result.accepted else "rejected"
    for types in assignments:
        text += "\n  " + ", ".join(types) + f" => {goal}"
    _emit(args, {"sentence": words, "goal": str(goal), "accepted": result.accepted, "assignments": assignments}, text)
    return 0 if result.accepted else 1


def _concept_payload(alg: SclAlgebra, c, max_len: int) -> dict:
    return {
        "behaviors": sorted(c.behaviors),
        "class_witnesses": [" ".join(w) or "ε" for w in c.witnesses()],
        "words": [" ".join(w) or "ε" for w in sorted(alg.words_of(c, max_len), key=lambda w: (len(w), w))],
    }


def _concept_text(alg: SclAlgebra, c, max_len: int) -> str:
    p = _concept_payload(alg, c, max_len)
    return f"classes {p['behaviors']}  witnesses {{{', '.join(p['class_witnesses'])}}}"


def _count(n: int, noun: str) -> str:
    return f"{n} {noun}" + ("" if n == 1 else "s")


def cmd_scl(args) -> int:
    dfa = load_language(args.lang)
    alg = SclAlgebra(dfa, args.mode)
    alphabet = alg.monoid.dfa.alphabet
    if args.scl_command == "closure":
        words = parse_words(args.words, alphabet)
        c = alg.closure_of_words(words)
        _emit(args, {"closure": _concept_payload(alg, c, args.max_len)}, _concept_text(alg, c, args.max_len))
        return 0
    if args.scl_command == "op":
        operands = [alg.closure_of_words(parse_words(w, alphabet)) for w in args.operands]
        arity = {"meet": 2, "join": 2, "prod": 2, "ldiv": 2, "rdiv": 2, "plus": 1, "star": 1}[args.op]
        if len(operands) != arity:
            raise UsageError(f"{args.op} takes {arity} operand(s)")
        fn = {"plus": alg.plus_iter, "star": alg.star_iter}.get(args.op) or getattr(alg, args.op)
        c = fn(*operands)
        _emit(args, {"op": args.op, "result": _concept_payload(alg, c, args.max_len)}, _concept_text(alg, c, args.max_len))
        return 0
    if args.scl_command == "lattice":
        concepts = alg.enumerate_concepts(args.limit)
        payload = {"size": len(concepts), "concepts": [_concept_payload(alg, c, args.max_len) for c in concepts]}
        text = "\n".join(_concept_text(alg, c, args.max_len) for c in concepts)
        _emit(args, payload, f"{_count(len(concepts), 'concept')}\n{text}")
        return 0
    zeros = alg.local_zeros()
    payload = {"local_zeros": [_concept_payload(alg, c, args.max_len) for c in zeros], "bot": _concept_payload(alg, alg.bot, args.max_len)}
    text = "\n".join(_concept_text(alg, c, args.max_len) for c in zeros)
    _emit(args, payload, f"{_count(len(zeros), 'local zero')}\n{text}")
    return 0


def _read_transfers(path: str) -> list[tuple[dict[str, str], str]]:
    out = []
    for lineno, line in enumerate(_read_lines(path), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ";" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'p=a q=b ; SEQUENT'")
        left, seq = line.split(";", 1)
        out.append((parse_assignments(left), seq.strip()))
    return out


def cmd_embed(args) -> int:
    alg = load_algebra(args.algebra)
    con = build(alg, args.template)
    ok = True
    payload: dict = {"template": args.template, "elements": list(alg.elements), "states": con.L.state_count,
                     "classes": con.scl.n_behaviors, "contexts": con.scl.n_contexts}
    lines = [f"template {args.template}: L has {con.L.state_count} states, "
             f"{con.scl.n_behaviors} word classes, {con.scl.n_contexts} context classes"]
    if args.verify:
        report = check_lemmas(con, two_letter=args.two_letter)
        ok = ok and report.all_passed
        payload["lemmas"] = report.to_json()
        lines.append(str(report))
    if args.transfer:
        rows = []
        for interp, text in _read_transfers(args.transfer):
            seq = parse_sequent(text, con.mode)
            t = truth_transfer(con, interp, seq)
            ok = ok and t.agree
            rows.append({"sequent": str(seq), "interp": interp, "algebra": t.algebra_truth, "scl": t.scl_truth})
            lines.append(f"{str(seq):<30} algebra={t.algebra_truth} scl={t.scl_truth}")
        payload["transfer"] = rows
    if args.dump_language:
        Path(args.dump_language).write_text(json.dumps(con.L.to_json()))
    _emit(args, payload, "\n".join(lines))
    return 0 if ok else 1


def cmd_countermodel(args) -> int:
    hyps = parse_hypotheses(_read_lines(args.hyp), args.mode) if args.hyp else frozenset()
    goal = parse_sequent(args.goal, args.mode)
    budget = SearchBudget(args.max_states, args.max_letters, args.max_alg, args.sample_limit, args.seed)
    strategies = STRATEGIES if args.strategy == "both" else (args.strategy,)
    rep = countermodel_search(sorted(hyps, key=str), goal, args.mode, budget, jobs=args.jobs, strategies=strategies)
    if rep.found:
        model = rep.model
        if args.out_dfa:
            Path(args.out_dfa).write_text(json.dumps(model.algebra.monoid.dfa.to_json()))
        lines = [f"countermodel found ({rep.source}) after {rep.checked_count} candidates"]
        if "interp" in rep.detail:
            lines.append(f"algebra {list(rep.detail['algebra']['elements'])}, interpretation {rep.detail['interp']}")
        lines.append("language: " + json.dumps(model.algebra.monoid.dfa.to_json()))
        lines.append("floor: " + _concept_text(model.algebra, model.algebra.bot, 3))
        for v, c in sorted(model.assignment.items()):
            lines.append(f"{v}: " + _concept_text(model.algebra, c, 3))
        text = "\n".join(lines)
    else:
        text = f"no countermodel after {rep.checked_count} candidates\n{NOT_FOUND_CAVEAT}"
    _emit(args, rep.to_json(), text)
    return 0 if rep.found else 1


def cmd_reduce2(args) -> int:
    dfa = load_language(args.lang)
    encoded = pentus_encode_lang(dfa.minimize())
    payload: dict = {"encoded_language": encoded.to_json()}
    lines = [json.dumps(encoded.to_json())]
    ok = True
    if args.out:
        Path(args.out).write_text(json.dumps(encoded.to_json()))
    if args.words is not None:
        red = TwoLetterReduction(dfa, args.mode)
        res = red.check_words(parse_words(args.words, red.alphabet), args.word_bound)
        ok = res.holds
        payload["check"] = {"holds": res.holds, "nonempty_word": res.nonempty_word,
                            "nonempty_polar": res.nonempty_polar, "witness": res.witness}
        lines.append(f"lemma {'holds' if res.holds else 'fails: ' + str(res.witness)} "
                     f"(non-empty word: {res.nonempty_word}, non-empty polar: {res.nonempty_polar})")
    if args.verify:
        r = two_letter_lemma(dfa, args.mode, samples=args.samples, word_bound=args.word_bound, seed=args.seed)
        ok = ok and r.passed
        payload["verify"] = r.to_json()
        lines.append(f"sampled check: {'pass' if r.passed else 'FAIL ' + str(r.witness)} ({r.checked} words)")
    _emit(args, payload, "\n".join(lines))
    return 0 if ok else 1


def cmd_eval(args) -> int:
    interp = parse_assignments(args.interp)
    seq = parse_sequent(args.sequent, args.mode)
    if bool(args.algebra) == bool(args.lang):
        raise UsageError("give exactly one of --algebra or --lang")
    if args.algebra:
        alg = load_algebra(args.algebra)
        value = evaluate_sequent(alg, interp, seq)
    else:
        dfa = load_language(args.lang)
        sa = SclAlgebra(dfa, language_mode(args.mode))
        alphabet = sa.monoid.dfa.alphabet
        model = SclModel(sa, {v: sa.closure_of_words(parse_words(w.replace("+", ","), alphabet)) for v, w in interp.items()}, args.mode)
        value = eval_sequent(model, seq)
    _emit(args, {"sequent": str(seq), "true": value}, "true" if value else "false")
    return 0 if value else 1


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sclambek", description="Lambek calculus prover and syntactic concept lattice workbench.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, mode=True):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if mode:
            sp.add_argument("--mode", choices=MODES, default=RESTRICTED)

    sp = sub.add_parser("prove", help="search for a derivation")
    common(sp)
    sp.add_argument("sequent")
    sp.add_argument("--hyp", metavar="FILE", help="hypotheses, one sequent per line")
    sp.add_argument("--omega-bound", type=int, default=DEFAULT_OMEGA_BOUND)
    sp.add_argument("--cut-depth", type=int, default=DEFAULT_CUT_DEPTH)
    sp.add_argument("--show-proof", action="store_true")
    sp.set_defaults(func=cmd_prove)

    sp = sub.add_parser("parse", help="categorial grammar parsing of a sentence")
    common(sp)
    sp.add_argument("sentence")
    sp.add_argument("--lexicon", required=True, metavar="FILE", help="word<TAB>formula per line")
    sp.add_argument("--goal", required=True, metavar="TYPE")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("scl", help="syntactic concept lattice of a regular language")
    scl_sub = sp.add_subparsers(dest="scl_command", required=True, parser_class=_Parser)
    for name in ("closure", "op", "lattice", "localzeros"):
        ssp = scl_sub.add_parser(name)
        ssp.add_argument("--json", action="store_true")
        ssp.add_argument("--lang", required=True, metavar="DFA", help="DFA JSON file or builtin:uavb|ab|aplus")
        ssp.add_argument("--mode", choices=LANG_MODES, default=POSITIVE)
        ssp.add_argument("--max-len", type=int, default=3, help="list member words up to this length")
        if name == "closure":
            ssp.add_argument("--words", required=True, help='comma-separated words, e.g. "a,ca,ac"')
        elif name == "op":
            ssp.add_argument("op", choices=("meet", "join", "prod", "ldiv", "rdiv", "plus", "star"))
            ssp.add_argument("operands", nargs="+", help="each operand is a comma-separated word list (closed first)")
        elif name == "lattice":
            ssp.add_argument("--limit", type=int, default=20_000)
        ssp.set_defaults(func=cmd_scl)

    sp = sub.add_parser("embed", help="build the SCL of a finite algebra and check the construction")
    common(sp, mode=False)
    sp.add_argument("--algebra", required=True, metavar="FILE", help="algebra JSON file or builtin:NAME")
    sp.add_argument("--template", required=True, choices=TEMPLATES)
    sp.add_argument("--verify", action="store_true", help="check all lemmas")
    sp.add_argument("--two-letter", action="store_true", help="also check the two-letter reduction")
    sp.add_argument("--transfer", metavar="SEQFILE", help="lines 'p=a q=b ; SEQUENT'")
    sp.add_argument("--dump-language", metavar="FILE", help="write the designated language as DFA JSON")
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("countermodel", help="search for a regular SCL countermodel")
    common(sp)
    sp.add_argument("--hyp", metavar="FILE")
    sp.add_argument("--goal", required=True)
    sp.add_argument("--max-states", type=int, default=3)
    sp.add_argument("--max-letters", type=int, default=2)
    sp.add_argument("--max-alg", type=int, default=4)
    sp.add_argument("--sample-limit", type=int, default=200_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--strategy", choices=("both",) + STRATEGIES, default="both")
    sp.add_argument("--out-dfa", metavar="FILE", help="write the model's language as DFA JSON")
    sp.set_defaults(func=cmd_countermodel)

    sp = sub.add_parser("reduce2", help="encode a language over two letters")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--lang", required=True, metavar="DFA")
    sp.add_argument("--mode", choices=LANG_MODES, default=EPSILON)
    sp.add_argument("--out", metavar="FILE")
    sp.add_argument("--words", help="check the closure lemma for this comma-separated word set")
    sp.add_argument("--verify", action="store_true", help="check the lemma on sampled closed sets")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--word-bound", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_reduce2)

    sp = sub.add_parser("eval", help="truth of a sequent in an algebra or an SCL model")
    common(sp)
    sp.add_argument("sequent")
    sp.add_argument("--interp", required=True, help='e.g. "p=top q=bot"; with --lang, values are word lists joined by +')
    sp.add_argument("--algebra", metavar="FILE")
    sp.add_argument("--lang", metavar="DFA")
    sp.set_defaults(func=cmd_eval)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("jobs", "omega_bound", "samples"):
        if getattr(args, name, 1) < 1:
            parser.error(f"--{name.replace('_', '-')} must be at least 1")
    try:
        return args.func(args)
    except (UsageError, ParseError, ModeError, TemplateError, AlgebraError, KeyError, ValueError, LatticeTooLarge) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"sclambek {args.command}: error: {msg}", file=sys.stderr)
        return EX_USAGE
    except (ClosednessViolation, AssertionError) as exc:
        print(f"sclambek {args.command}: internal invariant violated: {exc}", file=sys.stderr)
        return EX_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
