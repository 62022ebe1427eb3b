import json

import pytest

from mcc.cli import main
from mcc.pipeline import fixture_path, fixture_text


def fx(name):
    return str(fixture_path(name))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_clean(capsys):
    code, out, err = run(capsys, "check", fx("metamodel.asm"), fx("grammar_style.mcd"))
    assert code == 0 and out == "" and err.strip() == "0 error(s), 0 other diagnostic(s)"


def test_check_lenient_by_default_and_strict_on_request(capsys):
    code, _, err = run(capsys, "check", fx("metamodel.asm"), fx("property_style.mcd"))
    assert code == 0 and err.count("missing-colon") == 2
    code, out, _ = run(capsys, "check", fx("metamodel.asm"), fx("property_style.mcd"), "--strict")
    assert code == 1


def test_check_json(capsys):
    code, out, _ = run(capsys, "check", fx("arith.asm"), fx("arith.mcd"), "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["ok"] and data["diagnostics"] == []
    assert ["Mul", "Add"] not in data["constraints"]["precedes"]  # priorities stay integers here


def test_check_reports_conflicts(capsys, tmp_path):
    model = tmp_path / "m.asm"
    model.write_text(fixture_text("metamodel.asm").replace("constraintID: Identifier?", "constraintID: Identifier"))
    code, _, err = run(capsys, "check", str(model), fx("grammar_style.mcd"))
    assert code == 1 and "multiplicity-conflict" in err


def test_grammar_ebnf_and_json(capsys):
    code, out, _ = run(capsys, "grammar", fx("add.asm"), fx("add.mcd"), "--format", "ebnf")
    assert code == 0 and out.count("::=") == 3
    code, out, _ = run(capsys, "grammar", fx("arith.asm"), fx("arith.mcd"), "--format", "json", "--start", "Mul")
    assert code == 0 and json.loads(out)["start"] == "Mul"


def test_parse_text_and_json(capsys, tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("1+2*3")
    code, out, _ = run(capsys, "parse", fx("arith.asm"), fx("arith.mcd"), str(src))
    assert code == 0 and out.splitlines()[0] == "#0 Add left=#1 right=#2"
    code, out, _ = run(capsys, "parse", fx("arith.asm"), fx("arith.mcd"), str(src), "--format", "json")
    assert json.loads(out)["nodes"][0]["element"] == "Add"


def test_parse_errors_exit_one(capsys, tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("def a\nuse b\n")
    code, _, err = run(capsys, "parse", fx("refs.asm"), str(src))
    assert code == 1 and "unknown-reference" in err and "in.txt:2:1" in err


def test_check_unknown_member_warns_once(capsys, tmp_path):
    mapping = tmp_path / "extra.mcd"
    mapping.write_text(fixture_text("grammar_style.mcd") + 'ConstraintDefinition.nonexistent[prefix]: "@"\n')
    code, _, err = run(capsys, "check", fx("metamodel.asm"), str(mapping))
    assert code == 0 and err.strip().endswith("0 error(s), 1 other diagnostic(s)")


def test_grammar_json_is_byte_stable(capsys):
    outputs = {run(capsys, "grammar", fx("metamodel.asm"), fx("grammar_style.mcd"), "--format", "json")[1]
               for _ in range(3)}
    assert len(outputs) == 1


def test_parse_property_style_mapping_with_self_hosted_parser(capsys):
    code, out, err = run(capsys, "parse", fx("metamodel.asm"), fx("grammar_style.mcd"), fx("property_style.mcd"),
                         "--format", "json")
    assert code == 0 and err.count("missing-colon") == 2
    data = json.loads(out)
    root = data["nodes"][data["roots"][0]]
    assert root["element"] == "MappingFile" and len(root["members"]["definitions"]) == 17


def test_missing_file_exits_two(capsys):
    code, _, err = run(capsys, "check", "does-not-exist.asm")
    assert code == 2 and "does-not-exist.asm" in err


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_color_follows_environment(capsys, monkeypatch):
    monkeypatch.setenv("MCC_COLOR", "1")
    _, _, err = run(capsys, "check", fx("metamodel.asm"), fx("property_style.mcd"))
    assert "\x1b[33m" in err
    monkeypatch.setenv("MCC_COLOR", "0")
    _, _, err = run(capsys, "check", fx("metamodel.asm"), fx("property_style.mcd"))
    assert "\x1b[" not in err


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and out.count("PASS") == 6 and "FAIL" not in out


def test_selftest_catches_a_mutated_fixture(capsys, tmp_path):
    (tmp_path / "property_style.mcd").write_text(
        fixture_text("property_style.mcd").replace('[suffix]: "\\*"', '[prefix]: "\\*"'))
    code, out, _ = run(capsys, "selftest", "--fixtures", str(tmp_path))
    assert code == 1 and "FAIL mapping styles are equivalent" in out


def test_selftest_names_the_missing_key(capsys, tmp_path):
    lines = fixture_text("mixed_style.mcd").splitlines(keepends=True)
    (victim,) = [line for line in lines if "[separator]" in line and "Alternation" in line]
    (tmp_path / "mixed_style.mcd").write_text("".join(line for line in lines if line != victim))
    code, out, _ = run(capsys, "selftest", "--fixtures", str(tmp_path))
    assert code == 1 and "FAIL mapping styles are equivalent" in out and "AlternationSpecification" in out


def test_selftest_flags_single_valued_element_name(capsys, tmp_path):
    (tmp_path / "metamodel.asm").write_text(
        fixture_text("metamodel.asm").replace("name: Identifier+", "name: Identifier"))
    code, out, _ = run(capsys, "selftest", "--fixtures", str(tmp_path))
    assert code == 1 and "FAIL mappings agree with the model" in out and "multiplicity-conflict" in out
