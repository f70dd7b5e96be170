"""Exact-match accuracy and word error rate over benchmark cases."""

from __future__ import annotations

import json
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .decoder import DecodeParams, decode
from .errors import InputError, SluFstError
from .logits import LogitMatrix
from .model import ModelBundle
from .text import TextEncodeParams, normalize_text, text_to_logits


def edit_distance(ref: Sequence[str], hyp: Sequence[str]) -> int:
    prev = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, 1):
        cur = [i] + [0] * len(hyp)
        for j, h in enumerate(hyp, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (r != h))
        prev = cur
    return prev[-1]


def wer(reference: Sequence[str] | str, hypothesis: Sequence[str] | str) -> float:
    """Word-level Levenshtein distance divided by the reference length."""
    ref = reference.split() if isinstance(reference, str) else list(reference)
    hyp = hypothesis.split() if isinstance(hypothesis, str) else list(hypothesis)
    if not ref:
        raise ValueError("WER is undefined for an empty reference")
    return edit_distance(ref, hyp) / len(ref)


@dataclass
class BenchCase:
    intent: str
    slots: dict[str, str] = field(default_factory=dict)
    text: str | None = None
    logits: str | None = None
    transcript: str | None = None

    @classmethod
    def from_json(cls, doc: dict, base: Path | None = None) -> "BenchCase":
        if "intent" not in doc or ("text" not in doc and "logits" not in doc):
            raise InputError("a case needs 'intent' and one of 'text'/'logits'")
        logits = doc.get("logits")
        if logits is not None and base is not None and not Path(logits).is_absolute():
            logits = str(base / logits)
        slots = doc.get("slots") or {}
        if isinstance(slots, list):
            slots = {s["name"]: s["value"] for s in slots}
        return cls(doc["intent"], dict(slots), doc.get("text"), logits, doc.get("transcript"))


def load_cases(path) -> list[BenchCase | InputError]:
    """JSON lines, one case per line.  Bad lines become error entries."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read cases file {path}: {exc}") from None
    cases: list[BenchCase | InputError] = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            cases.append(BenchCase.from_json(json.loads(line), path.parent))
        except (json.JSONDecodeError, InputError, KeyError, TypeError) as exc:
            cases.append(InputError(f"line {n}: {exc}"))
    return cases


def _norm_slots(slots: dict[str, str]) -> dict[str, str]:
    return {k: normalize_text(str(v)) for k, v in slots.items()}


@dataclass
class BenchReport:
    n_cases: int
    n_correct: int
    accuracy: float
    wer: float | None
    confusion: dict[str, dict[str, int]]
    errors: list[dict]
    predictions: list[dict]
    timings: dict[str, float] = field(default_factory=dict)

    def to_json(self, include_timings: bool = False) -> dict:
        d = {"n_cases": self.n_cases, "n_correct": self.n_correct, "accuracy": self.accuracy,
             "wer": self.wer, "confusion": self.confusion, "errors": self.errors,
             "predictions": self.predictions}
        if include_timings:
            d["timings"] = self.timings
        return d


def run_bench(model: ModelBundle, cases: Sequence[BenchCase | InputError],
              params: DecodeParams = DecodeParams(), text_params: TextEncodeParams = TextEncodeParams(),
              workers: int = 1) -> BenchReport:
    """Decode every case; a case is correct iff intent and all slot values match."""

    def run(item):
        idx, case = item
        if isinstance(case, Exception):
            return idx, None, str(case), 0.0
        try:
            if case.text is not None:
                m = text_to_logits(case.text, model.alphabet, text_params)
            else:
                m = LogitMatrix.load(case.logits)
            t0 = time.perf_counter()
            res = decode(m, model, params)
            return idx, res, None, time.perf_counter() - t0
        except SluFstError as exc:
            return idx, None, str(exc), 0.0

    items = list(enumerate(cases))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, items))
    else:
        outcomes = [run(it) for it in items]

    n_correct = 0
    edits = ref_words = 0
    confusion: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    errors, predictions = [], []
    decode_s = 0.0
    for idx, res, err, dt in outcomes:
        decode_s += dt
        case = cases[idx]
        gold = case.intent if isinstance(case, BenchCase) else "<error>"
        if err is not None:
            errors.append({"case": idx, "error": err})
            confusion[gold]["<error>"] += 1
            continue
        pred = res.intent if res.matched else "<no-match>"
        confusion[gold][pred] += 1
        ok = res.matched and res.intent == case.intent and _norm_slots(res.slot_map()) == _norm_slots(case.slots)
        n_correct += ok
        predictions.append({"case": idx, "correct": bool(ok), **res.to_json()})
        if case.transcript:
            ref = normalize_text(case.transcript).split()
            edits += edit_distance(ref, list(res.transcript))
            ref_words += len(ref)
    n = len(cases)
    return BenchReport(
        n_cases=n, n_correct=n_correct, accuracy=n_correct / n if n else 0.0,
        wer=edits / ref_words if ref_words else None,
        confusion={g: dict(sorted(p.items())) for g, p in sorted(confusion.items())},
        errors=errors, predictions=predictions,
        timings={"decode_ms_total": decode_s * 1000.0, "decode_ms_mean": decode_s * 1000.0 / n if n else 0.0},
    )
