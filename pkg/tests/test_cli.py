import json
from pathlib import Path

import pytest

from sclambek.cli import EX_USAGE, SCHEMA, main, parse_word

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "sclambek" in capsys.readouterr().out


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["prove"])
    assert exc.value.code == EX_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["countermodel", "--goal", "p => p", "--jobs", "0"])
    assert exc.value.code == EX_USAGE


@pytest.mark.parametrize(
    "argv, code, first",
    [
        (["prove", "np, (np\\s)/np, np => s"], 0, "Derivable"),
        (["prove", "(p\\p)\\q => q"], 1, "NotDerivable"),
        (["prove", "--mode", "unrestricted", "(p\\p)\\q => q"], 0, "Derivable"),
        (["prove", "p => q", "--hyp", str(DATA / "hyp_square.txt")], 2, "UnknownBounded"),
    ],
)
def test_prove(capsys, argv, code, first):
    rc, out, _ = run(capsys, *argv)
    assert rc == code and out.splitlines()[0] == first


def test_prove_json_and_proof(capsys):
    rc, out, _ = run(capsys, "prove", "--json", "--show-proof", "p, p\\q => q")
    data = json.loads(out)
    assert rc == 0 and data["schema"] == SCHEMA and data["verdict"] == "Derivable"
    assert "[ldivL]" in data["proof"]


def test_prove_bad_input(capsys):
    rc, _, err = run(capsys, "prove", "p => => q")
    assert rc == EX_USAGE and "position" in err
    rc, _, err = run(capsys, "prove", "p => one")
    assert rc == EX_USAGE
    rc, _, err = run(capsys, "prove", "p => q", "--hyp", "/nonexistent/hyps.txt")
    assert rc == EX_USAGE and "cannot read" in err


def test_parse(capsys):
    lex = str(DATA / "lexicon.tsv")
    assert run(capsys, "parse", "--lexicon", lex, "--goal", "np", "the girl whom John loves")[0] == 0
    assert run(capsys, "parse", "--lexicon", lex, "--goal", "s", "John John")[0] == 1
    rc, _, err = run(capsys, "parse", "--lexicon", lex, "--goal", "s", "Bob sleeps")
    assert rc == EX_USAGE and "Bob" in err


def test_scl_commands(capsys):
    rc, out, _ = run(capsys, "scl", "localzeros", "--lang", "builtin:uavb", "--json")
    data = json.loads(out)
    assert rc == 0 and data["bot"]["behaviors"] == []
    assert any(z["behaviors"] for z in data["local_zeros"])
    rc, out, _ = run(capsys, "scl", "op", "prod", "--lang", str(DATA / "ab.json"), "a", "b", "--json")
    assert rc == 0 and "a b" in json.loads(out)["result"]["words"]
    rc, out, _ = run(capsys, "scl", "closure", "--lang", "builtin:ab", "--mode", "epsilon", "--words", "ε")
    assert rc == 0
    rc, out, _ = run(capsys, "scl", "lattice", "--lang", "builtin:aplus")
    assert rc == 0 and out.startswith("1 concept\n")


def test_scl_bad_words(capsys):
    rc, _, err = run(capsys, "scl", "closure", "--lang", "builtin:ab", "--words", "x")
    assert rc == EX_USAGE
    rc, _, err = run(capsys, "scl", "closure", "--lang", "builtin:nope", "--words", "a")
    assert rc == EX_USAGE


def test_embed(capsys):
    rc, out, _ = run(
        capsys, "embed", "--algebra", str(DATA / "two_chain.json"), "--template", "psc",
        "--verify", "--transfer", str(DATA / "transfer.txt"), "--json",
    )
    data = json.loads(out)
    assert rc == 0
    assert all(r["status"] == "pass" for r in data["lemmas"])
    assert all(row["algebra"] == row["scl"] for row in data["transfer"])


def test_embed_template_mismatch(capsys):
    rc, _, err = run(capsys, "embed", "--algebra", "builtin:two_chain", "--template", "scl")
    assert rc == EX_USAGE and "unit" in err


def test_countermodel(capsys, tmp_path):
    out_dfa = tmp_path / "model.json"
    rc, out, _ = run(
        capsys, "countermodel", "--hyp", str(DATA / "hyp_square.txt"), "--goal", "p => q",
        "--json", "--out-dfa", str(out_dfa),
    )
    data = json.loads(out)
    assert rc == 0 and data["found"] and data["schema"] == SCHEMA
    assert json.loads(out_dfa.read_text())["alphabet"]


def test_countermodel_not_found_prints_caveat(capsys):
    rc, out, _ = run(capsys, "countermodel", "--goal", "p => p", "--max-states", "1", "--max-alg", "2")
    assert rc == 1 and "not a proof" in out


def test_reduce2(capsys, tmp_path):
    target = tmp_path / "enc.json"
    rc, out, _ = run(capsys, "reduce2", "--lang", "builtin:ab", "--words", "ab", "--verify",
                     "--samples", "3", "--out", str(target))
    assert rc == 0 and "holds" in out
    assert json.loads(target.read_text())["alphabet"] == ["e", "f"]
    rc, out, _ = run(capsys, "reduce2", "--lang", "builtin:uavb", "--words", "ε")
    assert rc == 1


def test_eval(capsys):
    assert run(capsys, "eval", "p, p\\q => q", "--algebra", "builtin:two_chain", "--interp", "p=top q=bot")[0] == 0
    assert run(capsys, "eval", "p => q", "--algebra", "builtin:two_chain", "--interp", "p=top q=bot")[0] == 1
    assert run(capsys, "eval", "p, q => r", "--lang", "builtin:ab", "--interp", "p=a q=b r=ab")[0] == 0
    assert run(capsys, "eval", "p => q", "--interp", "p=top")[0] == EX_USAGE


def test_parse_word():
    assert parse_word("ab", ("a", "b")) == ("a", "b")
    assert parse_word("ε", ("a",)) == ()
    assert parse_word("x^ y_", ("x^", "y_")) == ("x^", "y_")
    assert parse_word("x^", ("x^", "y_")) == ("x^",)


def test_invariant_breach_exit_code(capsys, monkeypatch):
    from sclambek import cli
    from sclambek.scl import ClosednessViolation

    def boom(args):
        raise ClosednessViolation("left division produced a non-closed language")

    monkeypatch.setattr(cli, "cmd_prove", boom)
    rc, _, err = run(capsys, "prove", "p => p")
    assert rc == cli.EX_SOFTWARE and "invariant" in err
