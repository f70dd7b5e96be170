"""Build the two-sentence toy model over {space, a, b, blank}, write DOT files and decode one matrix."""

import argparse
import json
from pathlib import Path

import numpy as np

from slufst import Alphabet, LogitMatrix, build_model, decode, parse_dialog_spec
from slufst.ops import accepts
from slufst.wfst import to_dot

TOY = Alphabet((" ", "a", "b", "-"), blank="-")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="toy_dot", help="directory for the .dot files")
    ap.add_argument("--labels", default="aaab ab-b", help="frame labels to collapse with the Token-FST")
    args = ap.parse_args()

    spec = parse_dialog_spec(json.dumps({"intents": {"say": ["ab ab", "abba abba"]}, "lookups": {}}))
    model = build_model(spec, TOY)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "tokens.dot").write_text(to_dot(model.tokens, "tokens"), encoding="utf-8")
    (out / "lg-say.dot").write_text(to_dot(model.lg["say"], "lg"), encoding="utf-8")

    res = accepts(model.tokens, [model.labels.id(x) for x in args.labels])
    print(f"collapse {args.labels!r} -> {''.join(model.chars.symbol(c) for c in res[1])!r}")

    path = "aab--ab"
    frames = np.full((len(path), 4), 0.1)
    frames[np.arange(len(path)), [TOY.labels.index(x) for x in path]] = 0.7
    r = decode(LogitMatrix(frames, TOY.labels), model)
    print(f"argmax {path!r} decodes to {r.text!r} (cost {r.cost:.4f})")
    print(f"DOT files in {out}/")


if __name__ == "__main__":
    main()
