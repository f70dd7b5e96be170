"""Dialog specifications: intents with sentence templates and slot lookups.

Template syntax::

    (is a|are) [---](animal) cute      alternation over word sequences
    (please|)                          optional word via an empty alternative
    [---](animal)                      slot placeholder

Lookup entries are phrases, optionally ``raw->canonical``; the raw side may
use the same alternation syntax, e.g. ``(hairy frogfish)->striated frogfish``.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Union

from .errors import BuildError

PLACEHOLDER_RE = re.compile(r"\[---\]\(([^()\s\[\]]+)\)")
_TOKEN_RE = re.compile(r"\[---\]\([^()]*\)|\(|\)|\||[^\s()|]+")
_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


def placeholder_token(slot: str) -> str:
    return f"⟨{slot}⟩"


def is_structural(token: str) -> bool:
    return token.startswith("#") or token.startswith("⟨")


@dataclass(frozen=True)
class Placeholder:
    slot: str

    @property
    def token(self) -> str:
        return placeholder_token(self.slot)


@dataclass(frozen=True)
class Group:
    alternatives: tuple[tuple[str, ...], ...]


TemplateItem = Union[str, Group, Placeholder]


@dataclass(frozen=True)
class SentenceTemplate:
    text: str
    items: tuple[TemplateItem, ...]

    @property
    def slots(self) -> list[str]:
        return [it.slot for it in self.items if isinstance(it, Placeholder)]


@dataclass(frozen=True)
class SlotEntry:
    raw: tuple[str, ...]
    canonical: tuple[str, ...]

    @property
    def is_synonym(self) -> bool:
        return self.raw != self.canonical


@dataclass
class DialogSpec:
    intents: dict[str, list[SentenceTemplate]]
    lookups: dict[str, list[SlotEntry]] = field(default_factory=dict)

    def sentences(self, intent: str) -> list[tuple[str, ...]]:
        out = []
        for t in self.intents[intent]:
            out.extend(expand_template(t))
        return out


def _check_word(word: str, where: str) -> None:
    if is_structural(word) or "->" in word or "[" in word or "]" in word:
        raise BuildError(f"{where}: invalid word {word!r}")


def parse_template(text: str, where: str = "template", allow_placeholders: bool = True) -> SentenceTemplate:
    if not text or not text.strip():
        raise BuildError(f"{where}: empty template")
    tokens = _TOKEN_RE.findall(text.lower())
    items: list[TemplateItem] = []
    group: list[list[str]] | None = None
    for tok in tokens:
        if tok == "(":
            if group is not None:
                raise BuildError(f"{where}: nested alternation in {text!r}")
            group = [[]]
        elif tok == ")":
            if group is None:
                raise BuildError(f"{where}: unbalanced ')' in {text!r}")
            items.append(Group(tuple(tuple(alt) for alt in group)))
            group = None
        elif tok == "|":
            if group is None:
                raise BuildError(f"{where}: '|' outside of a group in {text!r}")
            group.append([])
        elif tok.startswith("[---]"):
            m = PLACEHOLDER_RE.fullmatch(tok)
            if m is None:
                raise BuildError(f"{where}: malformed placeholder {tok!r}")
            if group is not None:
                raise BuildError(f"{where}: placeholder inside alternation in {text!r}")
            if not allow_placeholders:
                raise BuildError(f"{where}: placeholders are not allowed here")
            items.append(Placeholder(m.group(1)))
        else:
            _check_word(tok, where)
            if group is not None:
                group[-1].append(tok)
            else:
                items.append(tok)
    if group is not None:
        raise BuildError(f"{where}: unbalanced '(' in {text!r}")
    return SentenceTemplate(text, tuple(items))


def expand_template(t: SentenceTemplate) -> list[tuple[str, ...]]:
    """Cartesian expansion of alternation groups, left to right, in written order.

    Placeholders become single ``⟨slot⟩`` tokens.
    """
    choices: list[list[tuple[str, ...]]] = []
    for it in t.items:
        if isinstance(it, Group):
            choices.append(list(it.alternatives))
        elif isinstance(it, Placeholder):
            choices.append([(it.token,)])
        else:
            choices.append([(it,)])
    return [tuple(w for part in combo for w in part) for combo in itertools.product(*choices)]


def parse_lookup_entry(text: str, where: str) -> list[SlotEntry]:
    if "->" in text:
        raw_text, _, canonical_text = text.partition("->")
        canonical = tuple(canonical_text.lower().split())
        if not canonical:
            raise BuildError(f"{where}: empty synonym target in {text!r}")
        for w in canonical:
            _check_word(w, where)
    else:
        raw_text, canonical = text, None
    template = parse_template(raw_text, where, allow_placeholders=False)
    entries = []
    for raw in expand_template(template):
        if not raw:
            raise BuildError(f"{where}: empty slot value in {text!r}")
        entries.append(SlotEntry(raw, canonical if canonical is not None else raw))
    return entries


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise BuildError(f"duplicate key {k!r}")
        out[k] = v
    return out


def parse_dialog_spec(text: str) -> DialogSpec:
    """Parse and validate a JSON dialog specification."""
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise BuildError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise BuildError("dialog spec must be a JSON object")
    raw_intents = doc.get("intents") or {}
    raw_lookups = doc.get("lookups") or {}
    if not isinstance(raw_intents, dict) or not isinstance(raw_lookups, dict):
        raise BuildError("'intents' and 'lookups' must be objects")
    if not raw_intents:
        raise BuildError("no intents defined")

    lookups: dict[str, list[SlotEntry]] = {}
    for name, values in raw_lookups.items():
        if not _NAME_RE.match(name):
            raise BuildError(f"lookup {name!r}: invalid slot name")
        if not isinstance(values, list) or not values:
            raise BuildError(f"lookup {name!r}: needs a non-empty list of values")
        entries = []
        for i, v in enumerate(values):
            entries.extend(parse_lookup_entry(str(v), f"lookup {name!r} line {i + 1}"))
        lookups[name] = entries

    intents: dict[str, list[SentenceTemplate]] = {}
    for name, templates in raw_intents.items():
        if not _NAME_RE.match(name):
            raise BuildError(f"intent {name!r}: invalid intent name")
        if not isinstance(templates, list) or not templates:
            raise BuildError(f"intent {name!r}: no example sentences")
        parsed = []
        for i, t in enumerate(templates):
            where = f"intent {name!r} line {i + 1}"
            tpl = parse_template(str(t), where)
            for slot in tpl.slots:
                if slot not in lookups:
                    raise BuildError(f"{where}: unknown slot {slot!r}")
            parsed.append(tpl)
        intents[name] = parsed
    return DialogSpec(intents, lookups)


def load_dialog_spec(path) -> DialogSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_dialog_spec(fh.read())
