"""Sample in-grammar sentences from the synthetic home spec and report accuracy/WER via the text frontend."""

import argparse
import json
import time

from slufst import Alphabet, DecodeParams, TextEncodeParams, build_model
from slufst.evaluation import run_bench
from slufst.synthetic import home_spec, sample_sentences

ENGLISH = Alphabet(tuple(" abcdefghijklmnopqrstuvwxyz'") + ("<blank>",))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=250)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mode", choices=["fixed", "2gram"], default="fixed")
    ap.add_argument("--top-k", type=int, default=8)
    ap.add_argument("--mean-k", type=int, default=21)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    spec = home_spec(args.seed)
    t0 = time.perf_counter()
    model = build_model(spec, ENGLISH, args.mode)
    build_s = time.perf_counter() - t0
    cases = [s.case() for s in sample_sentences(spec, args.n, args.seed)]
    r = run_bench(model, cases, DecodeParams(top_k=args.top_k, mean_k=args.mean_k),
                  TextEncodeParams(rng_seed=args.seed), workers=args.workers)
    print(json.dumps({"build_s": round(build_s, 3), "n": r.n_cases, "accuracy": r.accuracy, "wer": r.wer,
                      "decode_ms_mean": round(r.timings["decode_ms_mean"], 2)}, indent=2))


if __name__ == "__main__":
    main()
