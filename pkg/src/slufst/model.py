"""Compile a dialog specification into per-intent LG transducers."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .dialog import DialogSpec, SlotEntry, is_structural, placeholder_token
from .errors import BuildError, InputError
from .grammar import (SLOT_CLOSE, build_intent_fst, build_lexicon_fst, build_slot_fst,
                      insert_slots, intent_tag, slot_open, word_table)
from .ops import arc_sort, compose
from .tokens import Alphabet, build_token_fst
from .wfst import SymbolTable, Wfst

log = logging.getLogger(__name__)

MODES = ("fixed", "2gram")
MANIFEST = "manifest.json"
SYMBOLS = "symbols.json"
TOKENS = "tokens.fwf"


@dataclass
class ModelBundle:
    alphabet: Alphabet
    mode: str
    lg: dict[str, Wfst]
    tokens: Wfst
    words: SymbolTable
    lookups: dict[str, list[SlotEntry]] = field(default_factory=dict)

    @property
    def intents(self) -> list[str]:
        return sorted(self.lg)

    @property
    def labels(self) -> SymbolTable:
        return self.tokens.isyms

    @property
    def chars(self) -> SymbolTable:
        return self.tokens.osyms

    @property
    def vocabulary(self) -> list[str]:
        return [w for w in self.words.symbols[1:] if not is_structural(w)]

    def manifest(self) -> dict:
        return {
            "format": "slufst-model",
            "version": __version__,
            "mode": self.mode,
            "alphabet": self.alphabet.to_json(),
            "intents": self.intents,
            "vocabulary": self.vocabulary,
            "lookups": {name: [{"raw": " ".join(e.raw), "value": " ".join(e.canonical)} for e in entries]
                        for name, entries in sorted(self.lookups.items())},
            "files": {"tokens": TOKENS, "symbols": SYMBOLS,
                      "intents": {name: intent_filename(name) for name in self.intents}},
        }

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        _write_text(d / MANIFEST, json.dumps(self.manifest(), indent=2, sort_keys=True, ensure_ascii=False) + "\n")
        symbols = {"labels": self.labels.symbols, "chars": self.chars.symbols, "words": self.words.symbols}
        _write_text(d / SYMBOLS, json.dumps(symbols, indent=1, ensure_ascii=False) + "\n")
        self.tokens.save(d / TOKENS)
        for name in self.intents:
            self.lg[name].save(d / intent_filename(name))

    @classmethod
    def load(cls, directory) -> "ModelBundle":
        d = Path(directory)
        try:
            with open(d / MANIFEST, encoding="utf-8") as fh:
                manifest = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read model manifest in {d}: {exc}") from None
        if manifest.get("format") != "slufst-model":
            raise InputError(f"{d} is not a model directory")
        alphabet = Alphabet.from_json(manifest["alphabet"])
        tokens = Wfst.load(d / TOKENS)
        lg = {name: Wfst.load(d / fname) for name, fname in manifest["files"]["intents"].items()}
        lookups = {name: [SlotEntry(tuple(e["raw"].split()), tuple(e["value"].split())) for e in entries]
                   for name, entries in manifest["lookups"].items()}
        words = next(iter(lg.values())).osyms
        return cls(alphabet, manifest["mode"], lg, tokens, words, lookups)


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def intent_filename(name: str) -> str:
    if os.sep in name or "/" in name:
        raise BuildError(f"intent name {name!r} cannot be used as a file name")
    return f"intent-{name}.fwf"


def spec_words(spec: DialogSpec) -> set[str]:
    """Every output symbol any intent grammar can produce."""
    words: set[str] = set()
    for name, templates in spec.intents.items():
        words.add(intent_tag(name))
        for sent in spec.sentences(name):
            words.update(sent)
    for slot, entries in spec.lookups.items():
        words.update((slot_open(slot), SLOT_CLOSE, placeholder_token(slot)))
        for e in entries:
            words.update(e.raw)
            words.update(e.canonical)
    return words


def build_intent_lg(spec: DialogSpec, intent: str, mode: str, chars: SymbolTable, words: SymbolTable) -> Wfst:
    sentences = spec.sentences(intent)
    g = build_intent_fst(sentences, mode, intent, words)
    used = sorted({s for t in spec.intents[intent] for s in t.slots})
    slots = {s: build_slot_fst(s, spec.lookups[s], words) for s in used}
    g = insert_slots(g, slots)
    vocab = {w for sent in sentences for w in sent if not is_structural(w)}
    for s in used:
        for e in spec.lookups[s]:
            vocab.update(e.raw)
    lexicon = build_lexicon_fst(vocab, chars, words)
    return arc_sort(compose(lexicon, g))


def build_model(spec: DialogSpec, alphabet: Alphabet, mode: str = "fixed") -> ModelBundle:
    """Build the Token-FST and one LG-FST per intent.  Deterministic."""
    if mode not in MODES:
        raise BuildError(f"unknown mode {mode!r}; expected one of {MODES}")
    chars = alphabet.char_table()
    words = word_table(spec_words(spec))
    lg = {}
    for name in sorted(spec.intents):
        lg[name] = build_intent_lg(spec, name, mode, chars, words)
        log.debug("intent %s: LG has %d states, %d arcs", name, lg[name].num_states, lg[name].num_arcs())
        if not lg[name].finals:
            raise BuildError(f"intent {name!r}: grammar accepts nothing")
    used_slots = {s for ts in spec.intents.values() for t in ts for s in t.slots}
    lookups = {s: list(spec.lookups[s]) for s in sorted(used_slots)}
    return ModelBundle(alphabet, mode, lg, build_token_fst(alphabet), words, lookups)
