"""Command-line entry point: one subcommand per pipeline stage.

Exit codes: 0 success, 1 runtime error, 2 usage error. Every output file
starts with a ``#`` header line recording version, subcommand, and the
effective configuration, so reruns can be audited and diffed.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, TextIO

from . import __version__
from .augment import DEFAULT_GAMMA, derive_seed, mask_and_permute
from .corpus import load_corpus, write_corpus
from .labeltree import AlphaCache, format_hierarchy, load_hierarchy
from .metrics import DEFAULT_THRESHOLD, evaluate, load_predictions
from .pairs import DEFAULT_MAX_RETRIES, sample_quadruples
from .segmenter import (DEFAULT_INELIGIBLE, DEFAULT_TITLES, TitleSet, format_titles, iter_segmented_lines,
                        load_segmented, load_titles, segment)
from .synthetic import generate_documents, generated_hierarchy
from .titler import DEFAULT_MAX_NGRAM, DEFAULT_TOP_K, extract_titles, format_candidates

log = logging.getLogger("notesections")

SUBCOMMANDS = ("extract-titles", "segment", "similarity", "make-pairs", "augment", "evaluate", "gen-synthetic")


@dataclass
class PipelineConfig:
    corpus: str | None = None
    segmented: str | None = None
    titles: str | None = None
    hierarchy: str | None = None
    max_ngram: int = DEFAULT_MAX_NGRAM
    top_k: int = DEFAULT_TOP_K
    gamma: float = DEFAULT_GAMMA
    seed: int | None = None
    similarity: str = "tree"
    out_dir: str | None = None
    threads: int = 1


_CASTS = {"max_ngram": int, "top_k": int, "gamma": float, "seed": int, "threads": int}


class UsageError(Exception):
    pass


def read_config(path: str | Path) -> dict:
    """Parse a flat ``key=value`` file into PipelineConfig field values."""
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in known:
                raise UsageError(f"{path}:{lineno}: expected key=value with key in {sorted(known)}")
            value = value.strip()
            try:
                values[key] = _CASTS.get(key, str)(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig(**(read_config(args.config) if args.config else {}))
    for f in dataclasses.fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    return cfg


def header(subcommand: str, settings: dict) -> str:
    parts = " ".join(f"{k}={settings[k]}" for k in sorted(settings))
    return f"# notesections {__version__} {subcommand} {parts}\n"


@contextlib.contextmanager
def open_output(path: str | None, cfg: PipelineConfig, default_name: str) -> Iterator[TextIO]:
    if path is None and cfg.out_dir is not None:
        path = str(Path(cfg.out_dir) / default_name)
    if path is None:
        yield sys.stdout
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        yield fh


def _titles(cfg: PipelineConfig) -> TitleSet:
    if cfg.titles is None:
        return TitleSet.from_strings(DEFAULT_TITLES, DEFAULT_INELIGIBLE)
    return load_titles(cfg.titles)


def _require(cfg: PipelineConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def cmd_extract_titles(args, cfg: PipelineConfig) -> None:
    _require(cfg, "corpus")
    candidates = extract_titles(load_corpus(cfg.corpus), cfg.max_ngram, cfg.top_k, workers=cfg.threads)
    settings = {"corpus": cfg.corpus, "max_ngram": cfg.max_ngram, "top_k": cfg.top_k}
    with open_output(args.out, cfg, "title_candidates.tsv") as fh:
        fh.write(header("extract-titles", settings))
        fh.write(format_candidates(candidates))


def cmd_segment(args, cfg: PipelineConfig) -> None:
    _require(cfg, "corpus")
    titles = _titles(cfg)
    corpus = load_corpus(cfg.corpus)
    settings = {"corpus": cfg.corpus, "titles": cfg.titles or "<default>"}
    with open_output(args.out, cfg, "segmented.jsonl") as fh:
        fh.write(header("segment", settings))
        fh.writelines(iter_segmented_lines(segment(doc, titles) for doc in corpus))


def _parse_labels(text: str) -> list[str]:
    labels = [x.strip() for x in text.split(",") if x.strip()]
    if not labels:
        raise UsageError("label list is empty")
    return labels


def cmd_similarity(args, cfg: PipelineConfig) -> None:
    a, b = _parse_labels(args.labels_a), _parse_labels(args.labels_b)
    if cfg.similarity == "tree":
        _require(cfg, "hierarchy")
        provider = AlphaCache(load_hierarchy(cfg.hierarchy))
    else:
        provider = AlphaCache(None, mode="jaccard")
    print(f"{provider(a, b):.6f}")


def cmd_make_pairs(args, cfg: PipelineConfig) -> None:
    _require(cfg, "segmented", "seed")
    titles = _titles(cfg)
    if cfg.similarity == "tree":
        _require(cfg, "hierarchy")
        provider = AlphaCache(load_hierarchy(cfg.hierarchy))
    else:
        provider = AlphaCache(None, mode="jaccard")
    notes = load_segmented(cfg.segmented)
    settings = {"segmented": cfg.segmented, "hierarchy": cfg.hierarchy, "titles": cfg.titles or "<default>",
                "count": args.count, "seed": cfg.seed, "similarity": cfg.similarity,
                "strict": args.strict, "max_retries": args.max_retries}
    quads = sample_quadruples(notes, titles, provider, args.count, cfg.seed,
                              max_retries=args.max_retries, strict=args.strict)
    lines = [q.to_json() + "\n" for q in quads]
    with open_output(args.out, cfg, "pairs.jsonl") as fh:
        fh.write(header("make-pairs", settings))
        fh.writelines(lines)
    log.info("similarity cache: %d hits, %d misses", provider.hits, provider.misses)


def cmd_augment(args, cfg: PipelineConfig) -> None:
    _require(cfg, "segmented", "seed")
    if args.epochs < 1:
        raise UsageError("--epochs must be >= 1")
    notes = load_segmented(cfg.segmented)
    settings = {"segmented": cfg.segmented, "gamma": cfg.gamma, "seed": cfg.seed, "epochs": args.epochs}
    lines = []
    fully_masked = 0
    for epoch in range(args.epochs):
        for sd in notes:
            view = mask_and_permute(sd, cfg.gamma, derive_seed(cfg.seed, sd.doc_id, epoch))
            fully_masked += view.fully_masked and bool(sd.sections)
            lines.append(json.dumps({"id": sd.doc_id, "epoch": epoch, "tokens": list(view.tokens),
                                     "kept_titles": [" ".join(t) for t in view.kept_titles]},
                                    ensure_ascii=False) + "\n")
    with open_output(args.out, cfg, "augmented.jsonl") as fh:
        fh.write(header("augment", settings))
        fh.writelines(lines)
    if fully_masked:
        log.warning("%d views had every section masked (preamble only)", fully_masked)


def cmd_evaluate(args, cfg: PipelineConfig) -> None:
    try:
        ks = [int(k) for k in args.k.split(",") if k.strip()]
    except ValueError:
        raise UsageError(f"bad --k list {args.k!r}") from None
    results = evaluate(load_predictions(args.pred), ks, args.threshold)
    settings = {"pred": args.pred, "k": ",".join(map(str, ks)), "threshold": args.threshold}
    with open_output(args.out, cfg, "metrics.txt") as fh:
        fh.write(header("evaluate", settings))
        fh.writelines(f"{name}={value:.4f}\n" for name, value in results.items())


def cmd_gen_synthetic(args, cfg: PipelineConfig) -> None:
    _require(cfg, "seed")
    titles = [" ".join(t) for t in _titles(cfg).titles]
    docs = generate_documents(args.docs, titles, cfg.seed)
    settings = {"docs": args.docs, "titles": cfg.titles or "<default>", "seed": cfg.seed}
    with open_output(args.out, cfg, "synthetic.jsonl") as fh:
        fh.write(header("gen-synthetic", settings))
        write_corpus(docs, fh)
    if args.hierarchy_out:
        with open(args.hierarchy_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header("gen-synthetic", settings))
            fh.write(format_hierarchy(generated_hierarchy(docs)))
    if args.titles_out:
        with open(args.titles_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(format_titles(_titles(cfg)))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file; flags override it")
    common.add_argument("--threads", type=int, help="cap on worker processes")
    common.add_argument("--out", help="output file (default: <out-dir>/<name> or stdout)")
    common.add_argument("--out-dir", dest="out_dir")

    parser = argparse.ArgumentParser(prog="notesections", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True

    p = sub.add_parser("extract-titles", parents=[common], help="rank section-title candidates")
    p.add_argument("--corpus")
    p.add_argument("--max-ngram", dest="max_ngram", type=int)
    p.add_argument("--top-k", dest="top_k", type=int)
    p.set_defaults(func=cmd_extract_titles)

    p = sub.add_parser("segment", parents=[common], help="split notes into sections")
    p.add_argument("--corpus")
    p.add_argument("--titles")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("similarity", parents=[common], help="soft similarity of two label sets")
    p.add_argument("--hierarchy")
    p.add_argument("--labels-a", dest="labels_a", required=True)
    p.add_argument("--labels-b", dest="labels_b", required=True)
    p.add_argument("--similarity", choices=("tree", "jaccard"))
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("make-pairs", parents=[common], help="sample contrastive quadruples")
    p.add_argument("--segmented", dest="segmented")
    p.add_argument("--hierarchy")
    p.add_argument("--titles")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--similarity", choices=("tree", "jaccard"))
    p.add_argument("--strict", action="store_true", help="draw only from enumerated feasible configurations")
    p.add_argument("--max-retries", dest="max_retries", type=int, default=DEFAULT_MAX_RETRIES)
    p.set_defaults(func=cmd_make_pairs)

    p = sub.add_parser("augment", parents=[common], help="masked and shuffled training views")
    p.add_argument("--segmented", dest="segmented")
    p.add_argument("--gamma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int, default=1)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("evaluate", parents=[common], help="micro/macro F1 and P@k")
    p.add_argument("--pred", required=True)
    p.add_argument("--k", default="5,8,15")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gen-synthetic", parents=[common], help="write a synthetic note corpus")
    p.add_argument("--docs", type=int, default=200)
    p.add_argument("--titles")
    p.add_argument("--seed", type=int)
    p.add_argument("--hierarchy-out", dest="hierarchy_out", help="also write the label hierarchy here")
    p.add_argument("--titles-out", dest="titles_out", help="also write the titles file here")
    p.set_defaults(func=cmd_gen_synthetic)
    for name, sp in sub.choices.items():
        sp.set_defaults(subparser=sp)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        cfg = resolve_config(args)
        args.func(args, cfg)
    except UsageError as exc:
        args.subparser.print_usage(sys.stderr)
        print(f"notesections {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"notesections {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
