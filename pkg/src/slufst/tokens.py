"""CTC label sets and the Token-FST that collapses frame labels into characters."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import BuildError, InputError
from .grammar import SPACE
from .wfst import EPSILON, SymbolTable, Wfst

DEFAULT_BLANK = "<blank>"
DEFAULT_BOUNDARY = "▁"


@dataclass(frozen=True)
class Alphabet:
    """CTC output labels in model order, one of which is the blank.

    ``kind`` is ``"chars"`` (each label one character, ``" "`` is the space) or
    ``"pieces"`` (sentencepiece-style labels where ``word_boundary`` marks a
    space).
    """

    labels: tuple[str, ...]
    blank: str = DEFAULT_BLANK
    kind: str = "chars"
    word_boundary: str = DEFAULT_BOUNDARY
    _chars: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("chars", "pieces"):
            raise BuildError(f"unknown alphabet kind {self.kind!r}")
        if len(set(self.labels)) != len(self.labels):
            raise BuildError("alphabet labels must be unique")
        if self.blank not in self.labels:
            raise BuildError(f"blank label {self.blank!r} missing from alphabet")
        if self.kind == "chars":
            for lab in self.labels:
                if lab != self.blank and len(lab) != 1:
                    raise BuildError(f"character alphabet has multi-character label {lab!r}")
            if SPACE not in self.labels:
                raise BuildError("character alphabet has no space label")
            chars = tuple(lab for lab in self.labels if lab != self.blank)
        else:
            if self.word_boundary not in self.labels:
                raise BuildError(f"piece alphabet lacks a bare word-boundary piece {self.word_boundary!r}")
            seen = {SPACE}
            for lab in self.labels:
                if lab != self.blank:
                    seen.update(self.piece_chars(lab))
            chars = tuple(sorted(seen))
        object.__setattr__(self, "_chars", chars)

    @property
    def space_label(self) -> str:
        return SPACE if self.kind == "chars" else self.word_boundary

    @property
    def characters(self) -> tuple[str, ...]:
        return self._chars

    def piece_chars(self, piece: str) -> str:
        return piece.replace(self.word_boundary, SPACE)

    def label_table(self) -> SymbolTable:
        return SymbolTable(self.labels)

    def char_table(self) -> SymbolTable:
        return SymbolTable(self.characters)

    def to_json(self) -> dict:
        d = {"labels": list(self.labels), "blank": self.blank, "kind": self.kind}
        if self.kind == "pieces":
            d["word_boundary"] = self.word_boundary
        return d

    @classmethod
    def from_json(cls, doc) -> "Alphabet":
        if isinstance(doc, list):
            return cls(tuple(doc))
        if not isinstance(doc, dict) or "labels" not in doc:
            raise InputError("alphabet must be a JSON list or an object with 'labels'")
        return cls(tuple(doc["labels"]), doc.get("blank", DEFAULT_BLANK), doc.get("kind", "chars"),
                   doc.get("word_boundary", DEFAULT_BOUNDARY))

    @classmethod
    def load(cls, path) -> "Alphabet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def build_token_fst(alphabet: Alphabet) -> Wfst:
    """CTC collapse for single-character labels.

    State 0 means "after blank or at start"; one state per character remembers
    the last label.  Repeating the last label emits nothing, a blank resets to
    state 0, any other character is emitted.  Every state is final.
    """
    if alphabet.kind != "chars":
        return build_token_fst_pieces(alphabet)
    labels, chars = alphabet.label_table(), alphabet.char_table()
    f = Wfst(labels, chars)
    reset = f.add_state()
    f.set_start(reset)
    blank = labels.id(alphabet.blank)
    char_labels = [(labels.id(c), chars.id(c)) for c in alphabet.labels if c != alphabet.blank]
    last = {lab: f.add_state() for lab, _ in char_labels}
    for q in f.states():
        f.set_final(q)
    for q in f.states():
        f.add_arc(q, blank, EPSILON, 0.0, reset)
        for lab, ch in char_labels:
            target = last[lab]
            f.add_arc(q, lab, EPSILON if q == target else ch, 0.0, target)
    return f


def build_token_fst_pieces(alphabet: Alphabet) -> Wfst:
    """CTC collapse for sentencepiece labels, spelling each piece as characters.

    Multi-character pieces emit their first character on the consuming arc and
    the rest on a shared epsilon-input chain.  A word-boundary marker before
    anything has been emitted is dropped, so the output starts with a word.
    """
    labels, chars = alphabet.label_table(), alphabet.char_table()
    blank = labels.id(alphabet.blank)
    f = Wfst(labels, chars)
    start = f.add_state()  # nothing emitted yet
    reset = f.add_state()  # after blank, something emitted
    f.set_start(start)
    pieces = [p for p in alphabet.labels if p != alphabet.blank]
    spelled = {p: alphabet.piece_chars(p) for p in pieces}
    leading = {p: spelled[p].lstrip(SPACE) for p in pieces}
    # last-piece states; "quiet" variants for pure boundary pieces seen before any output
    last = {p: f.add_state() for p in pieces}
    quiet = {p: f.add_state() for p in pieces if not leading[p]}
    for q in f.states():
        f.set_final(q)

    chains: dict[tuple[str, str], tuple[int, int] | None] = {}

    def entry(piece: str, text: str, target: int):
        # first output char and the state after it, building the chain once
        key = (piece, text)
        if key not in chains:
            if len(text) <= 1:
                chains[key] = None
            else:
                q = f.add_state()
                head = q
                for ch in text[1:-1]:
                    n = f.add_state()
                    f.add_arc(q, EPSILON, chars.id(ch), 0.0, n)
                    q = n
                f.add_arc(q, EPSILON, chars.id(text[-1]), 0.0, target)
                chains[key] = (head, target)
        chain = chains[key]
        return chars.id(text[0]), (chain[0] if chain else target)

    for q in [start, *quiet.values()]:
        f.add_arc(q, blank, EPSILON, 0.0, start)
        for p in pieces:
            lab = labels.id(p)
            if not leading[p]:
                f.add_arc(q, lab, EPSILON, 0.0, quiet[p])
            else:
                ch, n = entry(p, leading[p], last[p])
                f.add_arc(q, lab, ch, 0.0, n)
    for q in [reset, *last.values()]:
        f.add_arc(q, blank, EPSILON, 0.0, reset)
        for p in pieces:
            lab = labels.id(p)
            if q == last[p]:
                f.add_arc(q, lab, EPSILON, 0.0, q)
            else:
                ch, n = entry(p, spelled[p], last[p])
                f.add_arc(q, lab, ch, 0.0, n)
    return f
