import json

import pytest

from slufst.dialog import SlotEntry, expand_template, parse_dialog_spec, parse_template
from slufst.errors import BuildError

from conftest import ANIMAL_SPEC


def test_animal_spec(animal_spec):
    assert list(animal_spec.intents) == ["get-looks"]
    assert len(animal_spec.intents["get-looks"]) == 1
    animal = animal_spec.lookups["animal"]
    assert len(animal) == 4
    assert [e for e in animal if e.is_synonym] == [SlotEntry(("hairy", "frogfish"), ("striated", "frogfish"))]
    assert animal[2] == SlotEntry(("aye", "aye"), ("aye", "aye"))


def test_expand_animal_template():
    t = parse_template("(is a|are) [---](animal) cute")
    assert [" ".join(s) for s in expand_template(t)] == ["is a ⟨animal⟩ cute", "are ⟨animal⟩ cute"]


def test_expand_without_groups():
    assert expand_template(parse_template("turn the light on")) == [("turn", "the", "light", "on")]


def test_expand_counts_by_enumeration():
    t = parse_template("(a|b) x (c|d e|)")
    got = expand_template(t)
    want = [(p,) + ("x",) + q for p in ("a", "b") for q in (("c",), ("d", "e"), ())]
    assert got == want and len(got) == 6


def test_synonym_alternation():
    spec = parse_dialog_spec(json.dumps({
        "intents": {"order": ["[---](drink)"]},
        "lookups": {"drink": ["(rose|roast)->roast", "mocha"]}}))
    entries = spec.lookups["drink"]
    assert entries == [SlotEntry(("rose",), ("roast",)), SlotEntry(("roast",), ("roast",)),
                       SlotEntry(("mocha",), ("mocha",))]


@pytest.mark.parametrize("doc, needle", [
    ({"intents": {}, "lookups": {}}, "no intents"),
    ({"intents": {"x": ["i like [---](color)"]}, "lookups": {}}, "color"),
    ({"intents": {"x": []}}, "no example sentences"),
    ({"intents": {"x": ["(a|(b))"]}}, "nested"),
    ({"intents": {"x": ["a (b"]}}, "unbalanced"),
    ({"intents": {"x": ["a b)"]}}, "unbalanced"),
    ({"intents": {"x": ["a | b"]}}, "outside"),
    ({"intents": {"x": ["#intent:y"]}}, "invalid word"),
    ({"intents": {"x": ["   "]}}, "empty template"),
    ({"intents": {"x": ["[---](s)"]}, "lookups": {"s": ["a->"]}}, "synonym target"),
])
def test_spec_errors(doc, needle):
    with pytest.raises(BuildError, match=needle):
        parse_dialog_spec(json.dumps(doc))


def test_error_names_intent_and_line():
    doc = {"intents": {"greet": ["hello", "hi [---](name)"]}, "lookups": {}}
    with pytest.raises(BuildError, match=r"greet.*line 2.*name"):
        parse_dialog_spec(json.dumps(doc))


def test_duplicate_intent_rejected():
    text = '{"intents": {"a": ["x"], "a": ["y"]}}'
    with pytest.raises(BuildError, match="duplicate"):
        parse_dialog_spec(text)


def test_invalid_json():
    with pytest.raises(BuildError):
        parse_dialog_spec(ANIMAL_SPEC[:-3])
