"""Pseudo-CTC probabilities from plain text, for NLU on textual input."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .logits import LogitMatrix
from .tokens import Alphabet


@dataclass(frozen=True)
class TextEncodeParams:
    p_hit: float = 0.99
    p_floor: float = 0.001
    noise_amplitude: float = 0.0005
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.p_hit <= 1 or self.p_floor < 0 or self.noise_amplitude < 0:
            raise ConfigError("p_hit must be in (0, 1], floor and noise non-negative")
        if self.p_hit <= self.p_floor + self.noise_amplitude:
            raise ConfigError("p_hit must exceed every floor value")


def normalize_text(text: str) -> str:
    return " ".join(text.lower().split())


def text_to_logits(text: str, alphabet: Alphabet, p: TextEncodeParams = TextEncodeParams()) -> LogitMatrix:
    """One peaked frame per character, each followed by a blank-peaked frame.

    Non-peak labels get ``p_floor`` plus uniform noise in
    ``[0, noise_amplitude]``; rows are renormalized.  Spaces map to the
    alphabet's space label.  Empty text yields a single blank frame.
    """
    labels = list(alphabet.labels)
    col = {lab: i for i, lab in enumerate(labels)}
    blank = col[alphabet.blank]
    text = normalize_text(text)
    peaks = []
    missing = set()
    for ch in text:
        lab = alphabet.space_label if ch == " " else ch
        if lab not in col or lab == alphabet.blank:
            missing.add(ch)
        else:
            peaks.append(col[lab])
    if missing:
        raise InputError(f"characters not in the alphabet: {''.join(sorted(missing))!r}")
    hot = [blank] if not peaks else [c for pk in peaks for c in (pk, blank)]
    rng = np.random.default_rng(p.rng_seed)
    frames = p.p_floor + rng.uniform(0.0, p.noise_amplitude, size=(len(hot), len(labels)))
    frames[np.arange(len(hot)), hot] = p.p_hit
    frames /= frames.sum(axis=1, keepdims=True)
    return LogitMatrix(frames, tuple(labels))
