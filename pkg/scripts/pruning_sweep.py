"""Accuracy and decode time as top_k varies, on noisy text-frontend input from the home spec."""

import argparse
import time

from slufst import Alphabet, DecodeParams, TextEncodeParams, build_model
from slufst.evaluation import run_bench
from slufst.synthetic import home_spec, sample_sentences

ENGLISH = Alphabet(tuple(" abcdefghijklmnopqrstuvwxyz'") + ("<blank>",))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p-hit", type=float, default=0.99, help="peak probability; lower means noisier frames")
    ap.add_argument("--noise", type=float, default=0.0005)
    ap.add_argument("--ks", default="1,2,3,5,8,12")
    ap.add_argument("--mean-k", type=int, default=None)
    args = ap.parse_args()

    spec = home_spec(args.seed)
    model = build_model(spec, ENGLISH)
    cases = [s.case() for s in sample_sentences(spec, args.n, args.seed)]
    text_p = TextEncodeParams(p_hit=args.p_hit, noise_amplitude=args.noise, rng_seed=args.seed)
    print(f"{'top_k':>6} {'acc':>6} {'wer':>6} {'ms/utt':>8}")
    for k in (int(x) for x in args.ks.split(",")):
        t0 = time.perf_counter()
        r = run_bench(model, cases, DecodeParams(top_k=k, mean_k=args.mean_k), text_p)
        ms = (time.perf_counter() - t0) * 1000 / max(1, r.n_cases)
        print(f"{k:>6} {r.accuracy:>6.3f} {r.wer:>6.3f} {ms:>8.2f}")


if __name__ == "__main__":
    main()
