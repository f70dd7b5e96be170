"""Seeded synthetic dialog specs and in-grammar test cases."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .dialog import DialogSpec, expand_template, parse_dialog_spec, placeholder_token
from .evaluation import BenchCase

# carrier words are disjoint across intents so every sentence has one reading
_HOME = {
    "intents": {
        "lights-on": ["(switch|turn) on the (light|lamp) in the [---](room)",
                      "(light|brighten) up the [---](room)"],
        "lights-off": ["(switch|turn) off the (light|lamp) in the [---](room)",
                       "darken the [---](room)"],
        "set-color": ["(make|paint) the [---](room) (light|lamp) [---](color)",
                      "i want [---](color) (light|lamp) in the [---](room)"],
    },
    "lookups": {
        "room": ["kitchen", "living room", "bedroom", "hall", "(bath room)->bathroom", "bathroom",
                 "garage", "attic", "office"],
        "color": ["red", "green", "blue", "(dark blue)->navy", "navy", "yellow", "white",
                  "(pinkish)->pink", "pink", "orange"],
    },
}


def home_spec_json(seed: int = 0, n_room: int = 7, n_color: int = 8) -> str:
    """The home-automation spec with a seeded subset of slot values."""
    rng = random.Random(seed)
    doc = json.loads(json.dumps(_HOME))
    for slot, n in (("room", n_room), ("color", n_color)):
        entries = doc["lookups"][slot]
        doc["lookups"][slot] = sorted(rng.sample(entries, min(n, len(entries))))
    return json.dumps(doc, indent=2)


def home_spec(seed: int = 0, **kw) -> DialogSpec:
    return parse_dialog_spec(home_spec_json(seed, **kw))


@dataclass(frozen=True)
class Sample:
    text: str
    intent: str
    slots: dict
    transcript: str

    def case(self) -> BenchCase:
        return BenchCase(self.intent, dict(self.slots), self.text, None, self.transcript)

    def to_json(self) -> dict:
        return {"text": self.text, "intent": self.intent, "slots": self.slots, "transcript": self.transcript}


def sample_sentences(spec: DialogSpec, n: int, seed: int = 0) -> list[Sample]:
    """Draw ``n`` in-grammar utterances: intent, template expansion and slot entries uniformly.

    A slot that occurs twice in one sentence gets the same value both times,
    so the gold slot map stays well defined.
    """
    rng = random.Random(seed)
    names = sorted(spec.intents)
    out = []
    for _ in range(n):
        intent = rng.choice(names)
        template = rng.choice(spec.intents[intent])
        words = rng.choice(expand_template(template))
        chosen = {s: rng.choice(spec.lookups[s]) for s in sorted(template.slots)}
        said, canon = [], []
        for w in words:
            slot = next((s for s in chosen if placeholder_token(s) == w), None)
            if slot is None:
                said.append(w)
                canon.append(w)
            else:
                said.extend(chosen[slot].raw)
                canon.extend(chosen[slot].canonical)
        out.append(Sample(" ".join(said), intent,
                          {s: " ".join(e.canonical) for s, e in chosen.items()}, " ".join(canon)))
    return out

