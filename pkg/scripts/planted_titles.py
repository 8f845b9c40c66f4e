"""Recall of planted section titles as corpus size and K vary.

Example: python scripts/planted_titles.py --docs 50 100 200 --top-k 30 50
"""

import argparse
import time

from notesections.segmenter import DEFAULT_TITLES
from notesections.synthetic import generate_documents
from notesections.titler import extract_titles


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--docs", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--top-k", type=int, nargs="+", default=[30, 50])
    ap.add_argument("--max-ngram", type=int, default=5)
    ap.add_argument("--seed", type=int, default=2023)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print("docs\tK\trecall\tseconds\tmissed")
    for n in args.docs:
        docs = generate_documents(n, DEFAULT_TITLES, seed=args.seed)
        for k in args.top_k:
            start = time.perf_counter()
            found = {c.text for c in extract_titles(docs, args.max_ngram, k, workers=args.threads)}
            missed = sorted(set(DEFAULT_TITLES) - found)
            recall = 1 - len(missed) / len(DEFAULT_TITLES)
            print(f"{n}\t{k}\t{recall:.3f}\t{time.perf_counter() - start:.2f}\t{', '.join(missed)}")


if __name__ == "__main__":
    main()
