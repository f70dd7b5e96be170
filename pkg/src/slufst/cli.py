"""Command line: build / decode / decode-text / bench / dot.

Errors exit non-zero with a JSON object ``{"error": ..., "type": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from .decoder import DecodeParams, decode
from .dialog import load_dialog_spec
from .errors import SluFstError
from .evaluation import load_cases, run_bench
from .logits import LogitMatrix
from .model import ModelBundle, build_model
from .text import TextEncodeParams, text_to_logits
from .tokens import Alphabet
from .wfst import Wfst, to_dot


class UsageError(SluFstError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(doc) -> None:
    print(json.dumps(doc, indent=2, ensure_ascii=False))


def _decode_params(args) -> DecodeParams:
    intents = frozenset(i for i in args.intents.split(",") if i) if args.intents else None
    return DecodeParams(top_k=args.top_k, mean_k=args.mean_k, gamma=args.gamma,
                        acoustic_scale=args.acoustic_scale, intent_filter=intents)


def cmd_build(args) -> int:
    t0 = time.perf_counter()
    spec = load_dialog_spec(args.spec)
    model = build_model(spec, Alphabet.load(args.alphabet), args.mode)
    build_ms = (time.perf_counter() - t0) * 1000.0
    model.save(args.out)
    _emit({"model": str(args.out), "intents": model.intents, "mode": model.mode,
           "states": {n: f.num_states for n, f in model.lg.items()}, "build_ms": round(build_ms, 3)})
    return 0


def cmd_decode(args) -> int:
    model = ModelBundle.load(args.model)
    m = LogitMatrix.load(args.logits)
    t0 = time.perf_counter()
    res = decode(m, model, _decode_params(args))
    out = res.to_json()
    out["decode_ms"] = round((time.perf_counter() - t0) * 1000.0, 3)
    _emit(out)
    return 0


def cmd_decode_text(args) -> int:
    model = ModelBundle.load(args.model)
    m = text_to_logits(args.text, model.alphabet, TextEncodeParams(rng_seed=args.seed))
    if args.dump_logits:
        m.save(args.dump_logits)
    t0 = time.perf_counter()
    res = decode(m, model, _decode_params(args))
    out = res.to_json()
    out["decode_ms"] = round((time.perf_counter() - t0) * 1000.0, 3)
    _emit(out)
    return 0


def cmd_bench(args) -> int:
    model = ModelBundle.load(args.model)
    cases = load_cases(args.cases)
    report = run_bench(model, cases, _decode_params(args), TextEncodeParams(rng_seed=args.seed),
                       workers=args.workers)
    doc = report.to_json(include_timings=args.timings)
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    _emit({"accuracy": report.accuracy, "wer": report.wer, "n_cases": report.n_cases,
           "errors": len(report.errors), **{k: round(v, 3) for k, v in report.timings.items()}})
    return 0


def cmd_dot(args) -> int:
    f = Wfst.load(args.fst)
    text = to_dot(f)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _add_decode_flags(p) -> None:
    d = DecodeParams()
    p.add_argument("--top-k", type=int, default=d.top_k)
    p.add_argument("--mean-k", type=int, default=d.mean_k)
    p.add_argument("--gamma", type=float, default=d.gamma)
    p.add_argument("--acoustic-scale", type=float, default=d.acoustic_scale)
    p.add_argument("--intents", default=None, help="comma separated intent names to search")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slufst", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="compile a dialog spec into a model directory")
    p.add_argument("--spec", required=True)
    p.add_argument("--alphabet", required=True)
    p.add_argument("--mode", choices=["fixed", "2gram"], default="fixed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("decode", help="decode a logit file")
    p.add_argument("--model", required=True)
    p.add_argument("--logits", required=True)
    _add_decode_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("decode-text", help="decode text through pseudo CTC probabilities")
    p.add_argument("--model", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-logits", default=None, help="also write the generated matrix (.flgt or .json)")
    _add_decode_flags(p)
    p.set_defaults(func=cmd_decode_text)

    p = sub.add_parser("bench", help="exact-match accuracy and WER over a JSONL case file")
    p.add_argument("--model", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report file")
    _add_decode_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("dot", help="export an .fwf file as Graphviz DOT")
    p.add_argument("--fst", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dot)
    return parser


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except SluFstError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "type": type(exc).__name__}) + "\n")
        return 2 if isinstance(exc, UsageError) else 1
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "type": "OSError"}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
