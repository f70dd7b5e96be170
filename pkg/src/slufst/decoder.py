"""Decode CTC label probabilities into transcript, intent and slots.

Pipeline: Input-FST from the (scaled, pruned) probabilities, composed with
the Token-FST once, then with each intent's LG-FST; the cheapest path over
all intents wins and its output labels are parsed into a :class:`ParseResult`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dialog import SlotEntry
from .errors import ConfigError, InputError, InvariantError
from .grammar import SLOT_CLOSE, SPACE
from .logits import LogitMatrix
from .model import ModelBundle
from .ops import TIE_TOL, Path, accepts, best_path, compose
from .wfst import SymbolTable, Wfst

SPACE_FRAME_PROB = 0.9


@dataclass(frozen=True)
class DecodeParams:
    """Decoder knobs.  ``top_k``/``mean_k`` of ``None`` disable that pruning;
    values above the label count are clamped to it."""

    top_k: int | None = 8
    mean_k: int | None = 21
    gamma: float = 1.0
    acoustic_scale: float = 1.0
    intent_filter: frozenset[str] | None = None

    def __post_init__(self):
        for name in ("top_k", "mean_k"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        if not self.acoustic_scale >= 0:
            raise ConfigError("acoustic_scale must be non-negative")
        if self.intent_filter is not None:
            object.__setattr__(self, "intent_filter", frozenset(self.intent_filter))


@dataclass(frozen=True)
class Slot:
    name: str
    value: str
    raw: str


@dataclass(frozen=True)
class ParseResult:
    transcript: tuple[str, ...]
    intent: str
    slots: tuple[Slot, ...] = ()
    cost: float = 0.0
    matched = True

    @property
    def text(self) -> str:
        return " ".join(self.transcript)

    def slot_map(self) -> dict[str, str]:
        return {s.name: s.value for s in self.slots}

    def to_json(self) -> dict:
        return {"text": self.text, "intent": self.intent,
                "slots": [{"name": s.name, "value": s.value, "raw": s.raw} for s in self.slots],
                "cost": self.cost}


@dataclass(frozen=True)
class NoMatch:
    """No intent accepted the input. ``stage`` names where the search emptied."""

    stage: str
    detail: str = ""
    matched = False
    intent = None
    transcript: tuple[str, ...] = ()
    slots: tuple[Slot, ...] = ()
    cost: float = math.inf

    @property
    def text(self) -> str:
        return ""

    def slot_map(self) -> dict[str, str]:
        return {}

    def to_json(self) -> dict:
        return {"text": None, "intent": None, "slots": [], "cost": None,
                "no_match": {"stage": self.stage, "detail": self.detail}}


def _clamp(k: int | None, v: int) -> int:
    return v if k is None else min(k, v)


def frame_arcs(m: LogitMatrix, p: DecodeParams, space_label: str = SPACE) -> list[list[tuple[int, float]]]:
    """Surviving ``(column, cost)`` pairs per frame, synthetic space frame included.

    Probabilities are raised to ``gamma`` and renormalized per frame.  A label
    survives if it ranks within the frame's ``top_k`` and is not below the
    mean over frames of each frame's ``mean_k``-th best probability.  Costs
    are ``acoustic_scale * -ln(p)``; zero-probability labels never survive.
    """
    if m.num_frames < 1:
        raise InputError("logit matrix has no frames")
    try:
        space = m.symbols.index(space_label)
    except ValueError:
        raise InputError(f"logit symbols lack the space label {space_label!r}") from None
    V = m.num_labels
    extra = np.full((1, V), (1.0 - SPACE_FRAME_PROB) / (V - 1))
    extra[0, space] = SPACE_FRAME_PROB
    probs = np.vstack([m.frames, extra]) ** p.gamma
    probs /= probs.sum(axis=1, keepdims=True)

    order = np.argsort(-probs, axis=1, kind="stable")
    ranks = np.empty_like(order)
    rows = np.arange(probs.shape[0])[:, None]
    ranks[rows, order] = np.arange(V)[None, :]
    keep = ranks < _clamp(p.top_k, V)
    mean_k = _clamp(p.mean_k, V)
    if mean_k < V:
        # at mean_k == V the threshold would be built from frame minima; treat as off
        threshold = probs[rows[:, 0], order[:, mean_k - 1]].mean()
        keep &= probs >= threshold
    keep &= probs > 0
    empty = ~keep.any(axis=1)
    keep[empty, order[empty, 0]] = True

    with np.errstate(divide="ignore"):
        costs = -np.log(probs) * p.acoustic_scale
    out = []
    for t in range(probs.shape[0]):
        cols = np.flatnonzero(keep[t])
        out.append([(int(c), float(costs[t, c])) for c in cols])
    return out


def build_input_fst(m: LogitMatrix, p: DecodeParams, labels: SymbolTable | None = None,
                    space_label: str = SPACE) -> Wfst:
    """Linear lattice with one arc per surviving label between frame states."""
    if labels is None:
        labels = SymbolTable(m.symbols)
    col_ids = []
    for s in m.symbols:
        lab = labels.get(s)
        if lab is None:
            raise InputError(f"logit symbol {s!r} is not a model label")
        col_ids.append(lab)
    f = Wfst(labels)
    q = f.add_state()
    f.set_start(q)
    for arcs in frame_arcs(m, p, space_label):
        n = f.add_state()
        for col, cost in arcs:
            f.add_arc(q, col_ids[col], col_ids[col], cost, n)
        q = n
    f.set_final(q)
    return f


def decode(m: LogitMatrix, model: ModelBundle, p: DecodeParams = DecodeParams(),
           workers: int = 1) -> ParseResult | NoMatch:
    names = model.intents
    if p.intent_filter is not None:
        unknown = p.intent_filter - set(names)
        if unknown:
            raise ConfigError(f"unknown intents in filter: {sorted(unknown)}")
        names = [n for n in names if n in p.intent_filter]
    if not names:
        return NoMatch("filter", "intent filter excludes every intent")

    inp = build_input_fst(m, p, model.labels, model.alphabet.space_label)
    it = compose(inp, model.tokens)
    if not it.finals:
        return NoMatch("tokens", "no CTC label path survives the Token-FST")

    def search(name: str) -> Path | None:
        return best_path(compose(it, model.lg[name]))

    if workers > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            paths = list(pool.map(search, names))
    else:
        paths = [search(n) for n in names]

    # names are sorted, so on equal cost the first intent is kept
    best_name, best = None, None
    for name, path in zip(names, paths):
        if path is None:
            continue
        if best is None or path.cost < best.cost - TIE_TOL * max(1.0, abs(best.cost)):
            best_name, best = name, path
    if best is None:
        return NoMatch("grammar", f"none of {len(names)} intent grammars accepts the input")

    out = [model.words.symbol(o) for o in best.olabels]
    spoken = accepts(model.tokens, best.ilabels)
    raw_words = None
    if spoken is not None:
        raw_words = "".join(model.chars.symbol(c) for c in spoken[1]).split()
    result = parse_output_labels(out, raw_words, model.lookups)
    if result.intent != best_name:
        raise InvariantError(f"intent tag {result.intent!r} decoded from grammar {best_name!r}")
    return ParseResult(result.transcript, result.intent, result.slots, best.cost)


def parse_output_labels(labels: Sequence[str] | str, raw_words: Sequence[str] | None = None,
                        lookups: Mapping[str, Sequence[SlotEntry]] | None = None) -> ParseResult:
    """Turn an output label sequence into transcript, slots and intent.

    ``raw_words`` are the words actually read on the input side; they give
    each slot its raw (pre-synonym) value.  Without them raw equals value.
    """
    if isinstance(labels, str):
        labels = labels.split()
    lookups = lookups or {}
    transcript: list[str] = []
    slots: list[Slot] = []
    intent = None
    open_slot: str | None = None
    value: list[str] = []
    pending: str | None = None  # slot whose placeholder has not been seen yet
    pos = 0  # index into raw_words

    for lab in labels:
        if intent is not None:
            raise InvariantError(f"label {lab!r} after the intent tag")
        if lab.startswith("#intent:"):
            if open_slot is not None or pending is not None:
                raise InvariantError("intent tag inside an unfinished slot")
            intent = lab[len("#intent:"):]
        elif lab.startswith("#slot:"):
            if open_slot is not None or pending is not None:
                raise InvariantError(f"nested slot marker {lab!r}")
            open_slot, value = lab[len("#slot:"):], []
        elif lab == SLOT_CLOSE:
            if open_slot is None:
                raise InvariantError("slot close without open")
            raw, pos = _raw_value(open_slot, tuple(value), raw_words, pos, lookups)
            slots.append(Slot(open_slot, " ".join(value), " ".join(raw)))
            transcript.extend(value)
            pending, open_slot = open_slot, None
        elif lab.startswith("⟨") and lab.endswith("⟩"):
            if pending != lab[1:-1]:
                raise InvariantError(f"placeholder {lab!r} does not follow its slot")
            pending = None
        else:
            if pending is not None:
                raise InvariantError(f"slot {pending!r} not confirmed by its placeholder")
            if open_slot is not None:
                value.append(lab)
            else:
                transcript.append(lab)
                pos += 1
    if open_slot is not None or pending is not None:
        raise InvariantError("unterminated slot")
    if intent is None:
        raise InvariantError("output has no intent tag")
    return ParseResult(tuple(transcript), intent, tuple(slots))


def _raw_value(slot, value, raw_words, pos, lookups):
    if raw_words is None:
        return value, pos
    for e in lookups.get(slot, ()):
        if e.canonical == value and tuple(raw_words[pos:pos + len(e.raw)]) == e.raw:
            return e.raw, pos + len(e.raw)
    raw = tuple(raw_words[pos:pos + len(value)])
    return raw, pos + len(raw)
