"""Command-line entry point: prepare, train, tag, evaluate, grid.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import checkpoint
from .config import load_run_config
from .corpus import (
    TAGS,
    bio_to_spans,
    load_bio_file,
    load_offset_annotations,
    read_offset_annotations,
    write_bio_file,
)
from .errors import ConfigError, DataError, DeepVarError, NumericError
from .evaluation import score_tag_output
from .tokenizer import tokenize

logger = logging.getLogger("deepvar")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_prepare(args) -> int:
    spans = read_offset_annotations(args.annotations)
    sentences, report = load_offset_annotations(args.text, spans)
    out = _out_dir(args.out_dir)
    write_bio_file(sentences, out / "corpus.bio")
    (out / "alignment.txt").write_text(report.format(), encoding="utf-8")
    print(f"sentences: {len(sentences)}")
    print(f"misaligned: {len(report.misaligned)}")
    return 0


def _load_config(args):
    cfg = load_run_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def cmd_train(args) -> int:
    from .pipeline import run

    cfg = _load_config(args)
    out = _out_dir(args.out_dir)
    try:
        _, report = run(cfg, out)
    except NumericError as e:
        if e.report is not None:
            e.report.write(out)
        raise
    print(f"best epoch: {report.best_epoch}  validation macro F1: {report.best_validation_f1}")
    if report.test is not None:
        print(f"test macro F1: {report.test['macro_f1']:.4f}")
    print(f"stop: {report.stop_reason}")
    return 0


def _read_tag_input(path, fmt: str, tokenizer_config):
    """Return (words, tokens or None) per sentence."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such input file: {path}")
    if fmt == "bio":
        return [(s.words, None) for s in load_bio_file(path, strict=False)]
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        toks = tokenize(line, tokenizer_config)
        if toks:
            out.append(([t.text for t in toks], (line, toks)))
    return out


def format_tagged(words, tags, source=None) -> str:
    """``token<TAB>tag`` lines, then ``# type<TAB>first<TAB>last<TAB>surface`` per span (token indices inclusive)."""
    lines = [f"{w}\t{TAGS[t]}" for w, t in zip(words, tags)]
    spans = bio_to_spans(tags)
    lines.append(f"# spans: {len(spans)}")
    for s in spans:
        if source is not None:
            text, toks = source
            surface = text[toks[s.token_start].start:toks[s.token_end].end]
        else:
            surface = " ".join(words[s.token_start:s.token_end + 1])
        lines.append(f"# {s.entity_type}\t{s.token_start}\t{s.token_end}\t{surface}")
    return "\n".join(lines) + "\n\n"


def cmd_tag(args) -> int:
    model, manifest = checkpoint.load(args.checkpoint)
    items = _read_tag_input(args.input, args.format, checkpoint.load_tokenizer(manifest))
    predicted = model.predict([w for w, _ in items]) if items else []
    text = "".join(format_tagged(w, p, src) for (w, src), p in zip(items, predicted))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_evaluate(args) -> int:
    gold = load_bio_file(args.gold)
    pred = load_bio_file(args.predicted, strict=False)
    if len(gold) != len(pred):
        raise DataError(f"{args.predicted}: {len(pred)} sentences, gold has {len(gold)}")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g.words != p.words:
            raise DataError(f"{args.predicted}: sentence {i + 1} tokens differ from gold")
    report = score_tag_output([s.tags for s in gold], [s.tags for s in pred])
    table = report.format_table()
    print(table, end="")
    if args.out_dir:
        out = _out_dir(args.out_dir)
        (out / "eval.txt").write_text(table, encoding="utf-8")
        (out / "eval.json").write_text(report.to_json(), encoding="utf-8")
    return 0


def cmd_grid(args) -> int:
    from .grid import GridSpec, grid_search

    cfg = _load_config(args)
    if cfg.grid.axes:
        spec = GridSpec.from_config(cfg.grid.axes, cfg.embeddings.files)
    else:
        spec = GridSpec.full_table()
    budget = args.budget if args.budget is not None else cfg.grid.budget
    ranked = grid_search(cfg, spec, budget, args.out_dir, jobs=args.jobs, resume=args.resume)
    for rank, r in enumerate(ranked, start=1):
        print(f"{rank}\ttrial-{r.index:06d}\t{r.validation_f1}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="deepvar", description="Residual BiLSTM-CRF tagger for genomic variant mentions.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("prepare", help="offset annotations to BIO")
    sp.add_argument("text", help="doc_id<TAB>sentence file")
    sp.add_argument("annotations", help="doc_id<TAB>start<TAB>end<TAB>type[<TAB>surface] file")
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_prepare)

    sp = sub.add_parser("train", help="train from a config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("tag", help="tag sentences with a checkpoint")
    sp.add_argument("checkpoint")
    sp.add_argument("input")
    sp.add_argument("--format", choices=("text", "bio"), default="text")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_tag)

    sp = sub.add_parser("evaluate", help="exact-match scores of predicted against gold BIO")
    sp.add_argument("gold")
    sp.add_argument("predicted")
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("grid", help="hyperparameter search")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--budget", type=int)
    sp.add_argument("--resume", action="store_true")
    sp.set_defaults(func=cmd_grid)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except DeepVarError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return DataError.exit_code
    except FloatingPointError as e:
        print(f"error: {e}", file=sys.stderr)
        return NumericError.exit_code


if __name__ == "__main__":
    sys.exit(main())
