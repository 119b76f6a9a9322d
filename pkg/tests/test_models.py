import pytest

from sclambek.langkit import EPSILON, POSITIVE, dfa_for_word_set, dfa_template_uavb
from sclambek.models import (
    NOT_FOUND_CAVEAT,
    SclModel,
    SearchBudget,
    _all_dfas,
    countermodel_search,
    eval_formula,
    eval_sequent,
    model_from_words,
    verify_countermodel,
)
from sclambek.scl import SclAlgebra
from sclambek.syntax import RESTRICTED, UNRESTRICTED, ModeError, parse_formula, parse_hypotheses, parse_sequent


def seq(text, mode=RESTRICTED):
    return parse_sequent(text, mode)


def test_eval_follows_lattice_ops():
    d = dfa_for_word_set([("a", "b")], ("a", "b"))
    m = model_from_words(d, {"p": [("a",)], "q": [("b",)]})
    alg = m.algebra
    p, q = m.assignment["p"], m.assignment["q"]
    assert eval_formula(m, parse_formula("p . q")) == alg.prod(p, q)
    assert eval_formula(m, parse_formula("p \\ (p . q)")) == alg.ldiv(p, alg.prod(p, q))
    assert eval_formula(m, parse_formula("bot")) == alg.bot
    assert eval_sequent(m, seq("p, q => p . q"))
    assert eval_sequent(m, seq("p, p\\(p . q) => p . q"))
    assert not eval_sequent(m, seq("q, p => p . q"))


def test_empty_antecedent_uses_identity():
    d = dfa_for_word_set([(), ("a",)], ("a",))
    m = model_from_words(d, {"p": [()]}, UNRESTRICTED)
    assert m.algebra.mode == EPSILON
    assert eval_sequent(m, seq("=> p", UNRESTRICTED))
    assert eval_sequent(m, seq("=> one", UNRESTRICTED))


def test_model_mode_must_match():
    alg = SclAlgebra(dfa_template_uavb(), POSITIVE)
    with pytest.raises(ModeError):
        SclModel(alg, {}, UNRESTRICTED)


def test_unassigned_variable():
    m = model_from_words(dfa_template_uavb(), {"p": [("a",)]})
    with pytest.raises(KeyError):
        eval_sequent(m, seq("p => q"))


def test_dfa_enumeration_is_deduplicated():
    dfas = list(_all_dfas(2, 1))
    keys = {repr(d.to_json()) for d in dfas}
    assert len(keys) == len(dfas)
    assert all(d.is_minimal() for d in dfas)


def test_countermodel_square():
    hyps = sorted(parse_hypotheses(["p => p . p"]), key=str)
    rep = countermodel_search(hyps, seq("p => q"), RESTRICTED, SearchBudget())
    assert rep.found and verify_countermodel(rep.model, hyps, seq("p => q"))
    out = rep.to_json()
    assert out["found"] and "caveat" not in out and out["model"]["language"]


@pytest.mark.parametrize("strategies", [("algebra",), ("dfa",)])
def test_each_strategy_alone(strategies):
    hyps = sorted(parse_hypotheses(["p => p . p"]), key=str)
    rep = countermodel_search(hyps, seq("p => q"), RESTRICTED, SearchBudget(), strategies=strategies)
    assert rep.found
    assert rep.source == ("algebra-embedding" if strategies == ("algebra",) else "dfa")


def test_countermodel_unrestricted_and_jobs_independent():
    mode = UNRESTRICTED
    hyps = sorted(parse_hypotheses(["p => p . p", "q => p"], mode), key=str)
    goal = seq("q => p . q", mode)
    one = countermodel_search(hyps, goal, mode, SearchBudget(), jobs=1)
    two = countermodel_search(hyps, goal, mode, SearchBudget(), jobs=2)
    assert one.found and verify_countermodel(one.model, hyps, goal)
    assert (one.source, one.checked_count, one.detail) == (two.source, two.checked_count, two.detail)


def test_no_countermodel_for_theorem():
    rep = countermodel_search([], seq("p => p"), RESTRICTED, SearchBudget(max_dfa_states=2, max_algebra_size=2))
    assert not rep.found
    assert rep.to_json()["caveat"] == NOT_FOUND_CAVEAT
