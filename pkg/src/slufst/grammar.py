"""Word-level grammar FSTs and the character lexicon.

Structural output symbols:

* ``#intent:<name>`` appended after every sentence of an intent grammar,
* ``#slot:<name>`` / ``#/slot`` around slot values,
* ``⟨<name>⟩`` placeholder kept after each spliced slot.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Mapping, Sequence

from .dialog import SlotEntry, is_structural
from .errors import BuildError, ConfigError
from .wfst import EPSILON, Arc, SymbolTable, Wfst

SLOT_CLOSE = "#/slot"
BOS, EOS = "<s>", "</s>"
SPACE = " "


def intent_tag(name: str) -> str:
    return f"#intent:{name}"


def slot_open(name: str) -> str:
    return f"#slot:{name}"


def word_table(words: Iterable[str]) -> SymbolTable:
    """Word table with plain words first (sorted) then structural symbols (sorted)."""
    words = set(words)
    plain = sorted(w for w in words if not is_structural(w))
    tags = sorted(w for w in words if is_structural(w))
    return SymbolTable(plain + tags)


def build_intent_fst(sentences: Sequence[Sequence[str]], mode: str, intent: str,
                     symbols: SymbolTable | None = None) -> Wfst:
    """Word acceptor for one intent, ending in an ``#intent:<name>`` arc.

    ``fixed`` builds a prefix tree of the exact sentences with zero weights.
    ``2gram`` builds an add-one-smoothed bigram model over the sentences,
    sentence boundaries included, with arc cost ``-ln P(w | prev)``.
    """
    if not sentences:
        raise BuildError(f"intent {intent!r}: no sentences")
    tag = intent_tag(intent)
    if symbols is None:
        symbols = word_table([w for s in sentences for w in s] + [tag])
    for s in sentences:
        for w in s:
            if w not in symbols:
                raise BuildError(f"intent {intent!r}: word {w!r} missing from symbol table")
    if mode == "fixed":
        f = _fixed_grammar(sentences, symbols)
    elif mode == "2gram":
        f = _bigram_grammar(sentences, symbols)
    else:
        raise ConfigError(f"unknown grammar mode {mode!r}")

    # forward every final state through one epsilon arc carrying the intent tag
    tag_id = symbols.id(tag)
    end = f.add_state()
    old_finals, f.finals = f.finals, {}
    for q in sorted(old_finals):
        f.add_arc(q, EPSILON, tag_id, old_finals[q], end)
    f.set_final(end)
    return f


def _fixed_grammar(sentences, symbols: SymbolTable) -> Wfst:
    f = Wfst(symbols)
    root = f.add_state()
    f.set_start(root)
    children: dict[tuple[int, int], int] = {}
    for sent in sentences:
        q = root
        for w in sent:
            lab = symbols.id(w)
            nxt = children.get((q, lab))
            if nxt is None:
                nxt = f.add_state()
                children[(q, lab)] = nxt
                f.add_arc(q, lab, lab, 0.0, nxt)
            q = nxt
        f.set_final(q)
    return f


def bigram_probabilities(sentences) -> dict[str, dict[str, float]]:
    """``P(next | prev)`` with add-one smoothing over the seen vocabulary plus ``</s>``."""
    vocab = sorted({w for s in sentences for w in s})
    outcomes = vocab + [EOS]
    counts: Counter[tuple[str, str]] = Counter()
    context: Counter[str] = Counter()
    for s in sentences:
        seq = [BOS, *s, EOS]
        for prev, nxt in zip(seq, seq[1:]):
            counts[(prev, nxt)] += 1
            context[prev] += 1
    probs = {}
    for prev in [BOS] + vocab:
        denom = context[prev] + len(outcomes)
        probs[prev] = {w: (counts[(prev, w)] + 1) / denom for w in outcomes}
    return probs


def _bigram_grammar(sentences, symbols: SymbolTable) -> Wfst:
    probs = bigram_probabilities(sentences)
    f = Wfst(symbols)
    state = {}
    for ctx in probs:
        state[ctx] = f.add_state()
    f.set_start(state[BOS])
    for ctx, dist in probs.items():
        q = state[ctx]
        for w, p in dist.items():
            if w == EOS:
                f.set_final(q, -math.log(p))
            else:
                lab = symbols.id(w)
                f.add_arc(q, lab, lab, -math.log(p), state[w])
    return f


def build_slot_fst(slot: str, entries: Sequence[SlotEntry], symbols: SymbolTable | None = None) -> Wfst:
    """Word transducer ``#slot:<name> value #/slot`` over all entries.

    Plain entries read and write their words.  Synonym entries read the raw
    words with epsilon output, then write the canonical words on
    epsilon-input arcs.  Branches share common (input, output) prefixes.
    """
    if not entries:
        raise BuildError(f"slot {slot!r}: no values")
    opener, closer = slot_open(slot), SLOT_CLOSE
    if symbols is None:
        words = [w for e in entries for w in e.raw + e.canonical]
        symbols = word_table(words + [opener, closer])
    f = Wfst(symbols)
    start, body = f.add_state(), f.add_state()
    f.set_start(start)
    f.add_arc(start, EPSILON, symbols.id(opener), 0.0, body)
    end = None
    children: dict[tuple[int, int, int], int] = {}
    ends = set()
    for e in entries:
        if e.is_synonym:
            steps = [(symbols.id(w), EPSILON) for w in e.raw] + [(EPSILON, symbols.id(w)) for w in e.canonical]
        else:
            steps = [(symbols.id(w), symbols.id(w)) for w in e.raw]
        q = body
        for i, o in steps:
            nxt = children.get((q, i, o))
            if nxt is None:
                nxt = f.add_state()
                children[(q, i, o)] = nxt
                f.add_arc(q, i, o, 0.0, nxt)
            q = nxt
        if q not in ends:
            ends.add(q)
            if end is None:
                end = f.add_state()
            f.add_arc(q, EPSILON, symbols.id(closer), 0.0, end)
    f.set_final(end)
    return f


def insert_slots(intent_fst: Wfst, slots: Mapping[str, Wfst]) -> Wfst:
    """Splice a copy of the slot FST in front of every ``⟨name⟩`` placeholder.

    The placeholder arc ``p -⟨x⟩:⟨x⟩/w-> q`` becomes ``p -[slot copy]-> exit
    -<eps>:⟨x⟩/w-> q``: the placeholder survives on the output tape only, and
    its weight moves to the exit arc.
    """
    syms = intent_fst.osyms
    placeholders = {}
    for sym in syms:
        if sym.startswith("⟨") and sym.endswith("⟩"):
            placeholders[syms.id(sym)] = sym[1:-1]

    out = intent_fst.copy()
    for q in intent_fst.states():
        kept = []
        for a in intent_fst.arcs(q):
            name = placeholders.get(a.ilabel)
            if name is None:
                kept.append(a)
                continue
            slot = slots.get(name)
            if slot is None:
                raise BuildError(f"no slot FST for placeholder {name!r}")
            if slot.isyms != syms or slot.osyms != syms:
                raise ConfigError(f"slot {name!r}: symbol table differs from the intent grammar")
            _splice(out, q, slot, a)
        out._arcs[q] = kept + out._arcs[q][len(intent_fst.arcs(q)):]
    return out


def _splice(out: Wfst, p: int, slot: Wfst, arc: Arc) -> None:
    # the slot start has no incoming arcs and is not final, so it is merged into p
    off = out.add_states(slot.num_states)
    remap = lambda s: p if s == slot.start else off + s
    for s in slot.states():
        for a in slot.arcs(s):
            out.add_arc(remap(s), a.ilabel, a.olabel, a.weight, remap(a.nextstate))
    for s, w in slot.finals.items():
        out.add_arc(remap(s), EPSILON, arc.olabel, arc.weight + w, arc.nextstate)


def build_lexicon_fst(vocabulary: Iterable[str], chars: SymbolTable, words: SymbolTable) -> Wfst:
    """Character-to-word transducer: a prefix-shared trie closed under repetition.

    Each word is read as its characters followed by one space; the characters
    carry epsilon output and the final space arc emits the word, returning to
    the root.  The root is the only final state.
    """
    vocab = sorted(set(vocabulary))
    if not vocab:
        raise BuildError("empty lexicon vocabulary")
    f = Wfst(chars, words)
    root = f.add_state()
    f.set_start(root)
    f.set_final(root)
    space = chars.get(SPACE)
    if space is None:
        raise BuildError("character set has no space symbol")
    children: dict[tuple[int, int], int] = {}
    for w in vocab:
        if not w or SPACE in w or is_structural(w):
            raise BuildError(f"invalid lexicon word {w!r}")
        q = root
        for ch in w:
            lab = chars.get(ch)
            if lab is None:
                raise BuildError(f"word {w!r}: character {ch!r} not in the alphabet")
            nxt = children.get((q, lab))
            if nxt is None:
                nxt = f.add_state()
                children[(q, lab)] = nxt
                f.add_arc(q, lab, EPSILON, 0.0, nxt)
            q = nxt
        f.add_arc(q, space, words.id(w), 0.0, root)
    return f
