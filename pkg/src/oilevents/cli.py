"""``oilevents`` command line.

Exit codes: 0 ok, 1 usage or config error, 2 data error, 3 training failure,
4 model/manifest mismatch.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import errors
from .annotate import FallbackAnnotator, PretokenizedAnnotator

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRAIN, EXIT_MODEL = 0, 1, 2, 3, 4

ANNOTATORS = {"fallback": FallbackAnnotator, "pretokenized": PretokenizedAnnotator}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_USAGE)


def _emit(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


# ----------------------------------------------------------------- commands

def cmd_ingest(args) -> int:
    from .corpus import ingest_directory, save_corpus

    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise CliError(f"not a directory: {in_dir}", EXIT_DATA)
    if not any(in_dir.rglob("*.ann")):
        raise CliError(f"no .ann files under {in_dir}", EXIT_DATA)
    docs, failures = ingest_directory(in_dir, ANNOTATORS[args.annotator]())
    if failures:
        lines = [f"  {name}: {msg}" for name, msg in sorted(failures.items())]
        raise CliError("failed to parse:\n" + "\n".join(lines), EXIT_DATA)
    save_corpus(docs, args.out_file)
    n_sent = sum(len(d.sentences) for d in docs)
    n_ev = sum(d.n_events() for d in docs)
    n_arg = sum(d.n_arguments() for d in docs)
    print(f"documents: {len(docs)}  sentences: {n_sent}  events: {n_ev}  arguments: {n_arg}")
    return EXIT_OK


def cmd_train(args) -> int:
    from .experiment import ExperimentConfig, run_experiment

    cfg = ExperimentConfig.load(args.config)
    if not Path(cfg.corpus).exists():
        raise CliError(f"corpus not found: {cfg.corpus}", EXIT_USAGE)
    run_dir, aggregate = run_experiment(cfg, jobs=args.jobs, run_name=args.run_name,
                                        output_dir=args.output_dir)
    print((run_dir / "summary.txt").read_text("utf-8"), end="")
    print(f"run directory: {run_dir}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .evaluation import summary_table
    from .experiment import load_sentences
    from .pipeline import EventPipeline
    from .tasks.properties import event_instances
    from .transfer import evaluate_extraction, property_report

    pipe = EventPipeline.load(args.model_dir)
    sentences = load_sentences(args.corpus)
    reports = evaluate_extraction(pipe.extraction, sentences, pipe.space)
    for prop, model in pipe.properties.items():
        inst = event_instances(sentences, prop)
        if inst:
            reports[prop] = property_report(model, pipe.space, inst)
    print(summary_table({pipe.manifest()["setup"]: reports}))
    if args.out:
        _emit({t: r.to_dict() for t, r in reports.items()}, args.out)
    return EXIT_OK


def _read_corpus_text(path: Path) -> str:
    """Plain text of a corpus: a canonical JSON corpus, a text file, or a
    directory of .txt files."""
    from .corpus import load_corpus

    if path.is_dir():
        files = sorted(path.rglob("*.txt"))
        if not files:
            raise CliError(f"no .txt files under {path}", EXIT_DATA)
        return "\n".join(f.read_text("utf-8") for f in files)
    if path.suffix == ".json":
        try:
            docs = load_corpus(path)
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError(f"unreadable corpus {path}: {exc}", EXIT_DATA) from exc
        return "\n".join(" ".join(s.words) for d in docs for s in d.sentences)
    return path.read_text("utf-8")


def cmd_similarity(args) -> int:
    from .domainsim import ProfileCache, load_stopwords, profile_text, rank_sources

    stop = load_stopwords(args.stopwords)
    cache = ProfileCache(args.cache) if args.cache else None
    try:
        target = profile_text(_read_corpus_text(Path(args.target)), args.n, stop, args.target, cache)
        sources = {p: profile_text(_read_corpus_text(Path(p)), args.n, stop, p, cache) for p in args.sources}
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"unreadable corpus: {exc}", EXIT_DATA) from exc
    ranking = rank_sources(sources, target)
    print(ranking.table())
    _emit(ranking.to_dict(), args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    from .features import load_encoder
    from .pipeline import EventPipeline

    encoder = load_encoder(args.encoder) if args.encoder else None
    pipe = EventPipeline.load(args.model_dir, encoder=encoder)
    if args.text is not None:
        text = args.text
    elif args.input in (None, "-"):
        text = sys.stdin.read()
    else:
        try:
            text = Path(args.input).read_text("utf-8")
        except OSError as exc:
            raise CliError(f"cannot read {args.input}: {exc}", EXIT_DATA) from exc
    result = pipe.predict_text(text, ANNOTATORS[args.annotator]()) if text.strip() else []
    _emit(result, args.out)
    return EXIT_OK


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="oilevents", description="Event extraction for commodity news.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="convert a brat standoff directory to a canonical corpus")
    s.add_argument("in_dir")
    s.add_argument("out_file")
    s.add_argument("--annotator", choices=sorted(ANNOTATORS), default="fallback")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("train", help="run a k-fold experiment from a JSON config")
    s.add_argument("config")
    s.add_argument("--jobs", type=int, default=1, help="folds run in parallel processes")
    s.add_argument("--run-name", help="run directory name (default: timestamp)")
    s.add_argument("--output-dir", help="override the config's output_dir")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", help="score a saved model on an annotated corpus")
    s.add_argument("model_dir")
    s.add_argument("corpus", help="canonical corpus JSON or brat directory")
    s.add_argument("--out", help="write the reports as JSON here")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("similarity", help="rank source corpora by vocabulary overlap with a target")
    s.add_argument("--target", required=True)
    s.add_argument("sources", nargs="+")
    s.add_argument("-n", type=int, default=10_000, help="vocabulary size per corpus")
    s.add_argument("--stopwords", help="stopword file, one word per line")
    s.add_argument("--cache", help="directory for cached profiles")
    s.add_argument("--out", help="write the ranking JSON here instead of stdout")
    s.set_defaults(func=cmd_similarity)

    s = sub.add_parser("predict", help="extract events from raw text with a saved model")
    s.add_argument("model_dir")
    s.add_argument("input", nargs="?", help="text file, or '-' for stdin")
    s.add_argument("--text", help="text given inline")
    s.add_argument("--encoder", help="encoder spec to use instead of the manifest's")
    s.add_argument("--annotator", choices=sorted(ANNOTATORS), default="fallback")
    s.add_argument("--out", help="write JSON here instead of stdout")
    s.set_defaults(func=cmd_predict)
    return p


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (errors.ManifestMismatch,)):
        return EXIT_MODEL
    if isinstance(exc, (errors.StageFailure, errors.DivergedLoss, errors.NonFiniteLoss,
                        errors.EmptyTrainingSet, errors.SingleClassTrainingSet)):
        return EXIT_TRAIN
    if isinstance(exc, errors.ConfigError):
        return EXIT_USAGE
    return EXIT_DATA


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except errors.OilEventsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
