import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slufst import DecodeParams, LogitMatrix, build_model, decode, parse_dialog_spec, text_to_logits
from slufst.decoder import NoMatch, build_input_fst, frame_arcs, parse_output_labels
from slufst.errors import ConfigError, InputError, InvariantError
from slufst.ops import best_path, compose

from conftest import ENGLISH, TOY
from oracles import brute_force_decode
from trials import ctc_path, random_trial

UNPRUNED = DecodeParams(top_k=None, mean_k=None)
TOY_SPEC = json.dumps({"intents": {"say": ["ab ab", "abba abba"]}, "lookups": {}})


@pytest.fixture(scope="module")
def toy_model():
    return build_model(parse_dialog_spec(TOY_SPEC), TOY)


def peaked(labels, path, hit=0.9):
    V = len(labels)
    frames = np.full((len(path), V), (1 - hit) / (V - 1))
    frames[np.arange(len(path)), [labels.index(x) for x in path]] = hit
    return LogitMatrix(frames, tuple(labels))


def test_input_fst_two_frames():
    m = LogitMatrix([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]], TOY.labels)
    f = build_input_fst(m, UNPRUNED)
    # two frames plus the appended space frame
    assert f.num_states == 4 and f.finals == {3: 0.0}
    hits = [[(f.isyms.symbol(a.ilabel), a.weight) for a in f.arcs(q)] for q in range(2)]
    assert hits == [[("a", 0.0)], [("b", 0.0)]]
    space_costs = {f.isyms.symbol(a.ilabel): a.weight for a in f.arcs(2)}
    assert space_costs[" "] == pytest.approx(-math.log(0.9))
    assert space_costs["a"] == pytest.approx(-math.log(0.1 / 3))


@settings(deadline=None, max_examples=50)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_top_k_bounds_arcs(seed, k):
    rng = np.random.default_rng(seed)
    m = LogitMatrix(rng.dirichlet(np.ones(4), size=5), TOY.labels)
    arcs = frame_arcs(m, DecodeParams(top_k=k, mean_k=None))
    assert all(1 <= len(a) <= k for a in arcs)
    full = frame_arcs(m, UNPRUNED)
    for kept, every in zip(arcs, full):
        best = sorted(c for _, c in every)[:k]
        assert sorted(c for _, c in kept) == pytest.approx(best)


def test_mean_k_threshold():
    frames = [[0.7, 0.2, 0.05, 0.05], [0.4, 0.3, 0.2, 0.1]]
    m = LogitMatrix(frames, TOY.labels)
    arcs = frame_arcs(m, DecodeParams(top_k=None, mean_k=2))
    # second-best per frame: 0.2, 0.3 and 0.1 for the space frame; mean 0.2
    assert [sorted(TOY.labels[c] for c, _ in a) for a in arcs] == [[" ", "a"], [" ", "a", "b"], [" "]]


def test_k_above_label_count_is_clamped():
    m = LogitMatrix(np.full((3, 4), 0.25), TOY.labels)
    assert frame_arcs(m, DecodeParams(top_k=50, mean_k=50)) == frame_arcs(m, UNPRUNED)


def test_bad_params():
    for kw in ({"top_k": 0}, {"mean_k": -1}, {"gamma": 0}, {"acoustic_scale": -1.0}):
        with pytest.raises(ConfigError):
            DecodeParams(**kw)


def test_toy_decode(toy_model):
    m = peaked(TOY.labels, list("aab-a-bb"))
    res = decode(m, toy_model)
    assert res.text == "ab ab" and res.intent == "say"
    m = peaked(TOY.labels, list("ab-ba ab-ba"))
    assert decode(m, toy_model).text == "abba abba"


def test_animal_synonym(animal_model):
    res = decode(text_to_logits("is a hairy frogfish cute", ENGLISH), animal_model)
    assert res.intent == "get-looks"
    assert res.slot_map() == {"animal": "striated frogfish"}
    assert res.slots[0].raw == "hairy frogfish"
    assert res.text == "is a striated frogfish cute"
    res = decode(text_to_logits("are aye aye cute", ENGLISH), animal_model)
    assert (res.slots[0].value, res.slots[0].raw) == ("aye aye", "aye aye")


def test_no_match(animal_model, toy_model):
    res = decode(peaked(TOY.labels, ["a"]), toy_model)
    assert isinstance(res, NoMatch) and res.stage == "grammar" and not res.matched
    doc = res.to_json()
    assert doc["intent"] is None and doc["no_match"]["stage"] == "grammar"
    with pytest.raises(InputError):
        decode(peaked(TOY.labels, ["a"]), animal_model)  # label set differs from the model


def test_intent_filter():
    spec = json.dumps({"intents": {"x": ["ab"], "y": ["ba"]}, "lookups": {}})
    model = build_model(parse_dialog_spec(spec), TOY)
    m = peaked(TOY.labels, list("ab"))
    assert decode(m, model).intent == "x"
    assert decode(m, model, DecodeParams(intent_filter={"y"})).intent == "y"
    with pytest.raises(ConfigError):
        decode(m, model, DecodeParams(intent_filter={"z"}))
    assert decode(m, model, DecodeParams(intent_filter=set())).stage == "filter"


def test_workers_do_not_change_result():
    rng = np.random.default_rng(3)
    for _ in range(20):
        t = random_trial(rng)
        model = t.model()
        assert decode(t.matrix(), model, workers=3) == decode(t.matrix(), model)


@settings(deadline=None, max_examples=60)
@given(st.integers(0, 2 ** 32 - 1))
def test_decode_matches_brute_force(seed):
    t = random_trial(np.random.default_rng(seed), max_frames=6)
    res = decode(t.matrix(), t.model(), UNPRUNED)
    want = brute_force_decode(t.frames, list(t.alphabet.labels), t.alphabet.blank, " ", t.sentences)
    if want is None:
        assert not res.matched
        return
    assert res.cost == pytest.approx(want[0], abs=1e-6)
    assert res.transcript == want[1] and res.intent == t.intent_of[want[1]]


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.5, 2.0, 3.7]))
def test_acoustic_scale_scales_cost_only(seed, c):
    t = random_trial(np.random.default_rng(seed))
    model = t.model()
    base = decode(t.matrix(), model)
    scaled = decode(t.matrix(), model, DecodeParams(acoustic_scale=c))
    assert scaled.matched == base.matched
    if base.matched:
        assert (scaled.intent, scaled.transcript) == (base.intent, base.transcript)
        assert scaled.cost == pytest.approx(c * base.cost, rel=1e-9, abs=1e-9)


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.2, 0.9))
def test_probability_scaling_invariance(seed, c):
    t = random_trial(np.random.default_rng(seed))
    model = t.model()
    base = decode(t.matrix(), model)
    other = decode(LogitMatrix(t.frames * c, t.alphabet.labels), model)
    assert (other.intent, other.transcript, other.slots) == (base.intent, base.transcript, base.slots)


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 2 ** 32 - 1))
def test_pruning_only_raises_cost(seed):
    t = random_trial(np.random.default_rng(seed))
    model = t.model()
    costs = [decode(t.matrix(), model, DecodeParams(top_k=k, mean_k=None)).cost for k in (1, 2, 3, None)]
    assert all(a >= b - 1e-9 for a, b in zip(costs, costs[1:]))


def test_gamma_sharpens():
    model = build_model(parse_dialog_spec(TOY_SPEC), TOY)
    m = peaked(TOY.labels, list("ab ab"), hit=0.6)
    plain = decode(m, model)
    assert decode(m, model, DecodeParams(gamma=1.0, acoustic_scale=1.0)) == plain
    assert decode(m, model, DecodeParams(gamma=2.0)).text == plain.text


def test_decoded_path_ends_in_space(toy_model):
    m = peaked(TOY.labels, list("ab ab"))
    inp = build_input_fst(m, DecodeParams(), toy_model.labels)
    path = best_path(compose(compose(inp, toy_model.tokens), toy_model.lg["say"]))
    assert toy_model.labels.symbol(path.ilabels[-1]) == " "


@pytest.mark.parametrize("labels, transcript, intent, slots", [
    ("is a #slot:animal aye aye #/slot ⟨animal⟩ cute #intent:get-looks", "is a aye aye cute", "get-looks",
     {"animal": "aye aye"}),
    ("#intent:stop", "", "stop", {}),
    ("go #slot:a x #/slot ⟨a⟩ #slot:b y z #/slot ⟨b⟩ #intent:g", "go x y z", "g", {"a": "x", "b": "y z"}),
])
def test_parse_output_labels(labels, transcript, intent, slots):
    res = parse_output_labels(labels)
    assert (res.text, res.intent, res.slot_map()) == (transcript, intent, slots)


def test_parse_output_labels_raw_values(animal_spec):
    labels = "is a #slot:animal striated frogfish #/slot ⟨animal⟩ cute #intent:get-looks"
    res = parse_output_labels(labels, "is a hairy frogfish cute".split(), animal_spec.lookups)
    assert res.slots[0].raw == "hairy frogfish" and res.slots[0].value == "striated frogfish"


@pytest.mark.parametrize("labels", [
    "a b", "#intent:x y", "#slot:a x #intent:g", "#/slot #intent:g", "#slot:a x #/slot #intent:g",
    "#slot:a x #/slot ⟨b⟩ #intent:g", "#slot:a #slot:b #/slot #intent:g",
])
def test_parse_output_labels_rejects_unbalanced(labels):
    with pytest.raises(InvariantError):
        parse_output_labels(labels)


def test_result_json(animal_model):
    doc = decode(text_to_logits("are aye aye cute", ENGLISH), animal_model).to_json()
    assert set(doc) == {"text", "intent", "slots", "cost"}
    assert doc["slots"] == [{"name": "animal", "value": "aye aye", "raw": "aye aye"}]
    assert math.isfinite(doc["cost"])
    json.dumps(doc)


def test_ctc_path_helper():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = ctc_path(rng, "aa b", list(TOY.labels), "-", 8)
        labels = [TOY.labels[i] for i in p]
        collapsed = [x for i, x in enumerate(labels) if x != "-" and (i == 0 or labels[i - 1] != x)]
        assert "".join(collapsed) == "aa b"
    assert ctc_path(rng, "aa", list(TOY.labels), "-", 2) is None
