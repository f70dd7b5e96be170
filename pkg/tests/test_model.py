import json

import pytest

from slufst import ModelBundle, build_model, parse_dialog_spec
from slufst.errors import BuildError, InputError
from slufst.ops import accepts
from slufst.wfst import Wfst

from conftest import ANIMAL_SPEC, ENGLISH, TOY
from oracles import relation

SPEC3 = json.dumps({
    "intents": {"stop": ["stop", "halt"], "go": ["go to the [---](place)"], "wait": ["wait (here|there)"]},
    "lookups": {"place": ["park", "(shops)->shop", "beach"], "unused": ["x"]},
})


def out_strings(model, name):
    return [[model.words.symbol(x) for x in o] for (_, o) in relation(model.lg[name], max_arcs=80)]


def test_animal_model(animal_model):
    assert animal_model.intents == ["get-looks"]
    assert animal_model.lookups.keys() == {"animal"}
    assert animal_model.labels.symbols[1:] == list(ENGLISH.labels)
    assert "striated" in animal_model.vocabulary and "⟨animal⟩" not in animal_model.vocabulary


def test_one_lg_per_intent():
    m = build_model(parse_dialog_spec(SPEC3), ENGLISH)
    assert m.intents == ["go", "stop", "wait"]
    assert m.lookups.keys() == {"place"}  # unused lookups are dropped
    lg = m.lg["stop"]
    chars = m.chars

    def read(name, text):
        res = accepts(m.lg[name], [chars.id(c) for c in text])
        return None if res is None else " ".join(m.words.symbol(x) for x in res[1])

    assert read("stop", "halt ") == "halt #intent:stop"
    assert read("stop", "go to the park ") is None
    assert read("go", "go to the shops ") == "go to the #slot:place shop #/slot ⟨place⟩ #intent:go"
    assert lg.isyms == chars and lg.osyms == m.words


def test_accepted_sentences_equal_enumeration():
    m = build_model(parse_dialog_spec(SPEC3), ENGLISH)
    spoken = {"stop": {"stop", "halt"}, "wait": {"wait here", "wait there"},
              "go": {"go to the park", "go to the shops", "go to the beach"}}
    for name, want in spoken.items():
        got = {"".join(m.chars.symbol(c) for c in i).strip() for (i, _) in relation(m.lg[name], max_arcs=80)}
        assert got == want


def test_tags_balanced_and_synonyms_canonical(animal_model):
    outs = out_strings(animal_model, "get-looks")
    assert len(outs) == 8
    canon = {" ".join(e.canonical) for e in animal_model.lookups["animal"]}
    for o in outs:
        assert o[-1] == "#intent:get-looks" and sum(w.startswith("#intent:") for w in o) == 1
        i, j = o.index("#slot:animal"), o.index("#/slot")
        assert i < j and o[j + 1] == "⟨animal⟩"
        assert " ".join(o[i + 1:j]) in canon
    assert not any("hairy" in o for o in outs)


def test_build_is_deterministic(tmp_path):
    spec = parse_dialog_spec(ANIMAL_SPEC)
    for d in ("a", "b"):
        build_model(spec, ENGLISH, "2gram").save(tmp_path / d)
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == ["intent-get-looks.fwf", "manifest.json", "symbols.json", "tokens.fwf"]
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_save_load_round_trip(tmp_path, animal_model):
    animal_model.save(tmp_path)
    back = ModelBundle.load(tmp_path)
    assert back.intents == animal_model.intents and back.mode == "fixed"
    assert back.alphabet == animal_model.alphabet and back.lookups == animal_model.lookups
    assert back.words == animal_model.words
    assert relation(back.lg["get-looks"], max_arcs=80) == relation(animal_model.lg["get-looks"], max_arcs=80)
    assert isinstance(back.tokens, Wfst) and back.tokens.num_arcs() == animal_model.tokens.num_arcs()


def test_load_rejects_other_directories(tmp_path):
    with pytest.raises(InputError):
        ModelBundle.load(tmp_path)
    (tmp_path / "manifest.json").write_text('{"format": "other"}')
    with pytest.raises(InputError):
        ModelBundle.load(tmp_path)


def test_build_errors():
    spec = parse_dialog_spec(ANIMAL_SPEC)
    with pytest.raises(BuildError, match="mode"):
        build_model(spec, ENGLISH, "3gram")
    with pytest.raises(BuildError):
        build_model(spec, TOY)  # words need letters outside {a, b}


def test_2gram_model_costs_nonnegative():
    m = build_model(parse_dialog_spec(SPEC3), ENGLISH, "2gram")
    for lg in m.lg.values():
        assert all(a.weight >= 0 for q in lg.states() for a in lg.arcs(q))
        assert all(w >= 0 for w in lg.finals.values())
