"""Command-line entry point: one subcommand per pipeline stage.

Exit codes: 0 ok, 2 usage/config, 3 data error, 4 missing artifact.  Errors
are printed as a single ``error: <Name>: <detail>`` line on stderr.

Every output file gets a ``<name>.meta.json`` sidecar holding the config
fingerprint, seed and SHA-256 of each input, so reruns can be audited.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import IO, Callable, Sequence

import numpy as np

from . import __version__
from .aggregation import (
    ClassifiedTweet, WordFreqReport, country_counts, country_scores, hourly_counts, read_classified, resolve_country,
    series_from_counts, write_country_csv, write_series_csv, write_words_csv,
)
from .annotation import (
    BALLOT_HEADER, Ballot, amalgamate_all, ballot_row, build_agreement_report, build_dissident_report,
    group_ballots, parse_typeface, read_ballots, read_gold, write_ballots, write_gold,
)
from .cascade import LANGS, TASKS, ModelBundle, classify_many
from .config import PATH_DEFAULTS, Config, config_from_dict, load_config
from .errors import MissingArtifact, PipelineError
from .evaluation import format_reports, reports_json
from .ingest import Language, ingest_stream, read_corpus, write_corpus
from .labels import FinalLabel
from .pipeline import Resources, evaluate_bundle, train_bundle
from .synth import synth_archive, synth_ballots
from .text import tokenize

log = logging.getLogger("tweetcascade")

SUBCOMMANDS = ("ingest", "label", "vote", "train", "classify", "evaluate", "aggregate", "report")


# --- helpers -----------------------------------------------------------------

def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_fingerprint(cfg: Config) -> str:
    """Hash of the config with data-file paths replaced by their content hashes."""
    d = cfg.to_dict()
    for key in PATH_DEFAULTS:
        d[key] = sha256_file(d[key])
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def _require(path: str | Path, what: str = "input") -> Path:
    p = Path(path)
    if not p.is_file():
        raise MissingArtifact(f"{what} not found: {p}")
    return p


class Run:
    """Per-invocation context: config, seed and sidecar writer."""

    def __init__(self, args: argparse.Namespace):
        if args.config:
            cfg = load_config(_require(args.config, "config"))
        else:
            cfg = config_from_dict({"seed": 0})
        if getattr(args, "seed", None) is not None:
            raw = cfg.to_dict()
            raw["seed"] = args.seed
            cfg = config_from_dict(raw, cfg.base_dir)
        self.cfg = cfg
        self.command = args.command
        self.inputs: dict[str, str] = {}
        self._res: Resources | None = None

    @property
    def res(self) -> Resources:
        if self._res is None:
            self._res = Resources.from_config(self.cfg)
        return self._res

    def input(self, path: str | Path, what: str = "input") -> Path:
        p = _require(path, what)
        self.inputs[p.name] = sha256_file(p)
        return p

    def write(self, path: str | Path, writer: Callable[[IO[str]], None], extra: dict | None = None) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", encoding="utf-8", newline="") as fh:
            writer(fh)
        meta = {
            "tool": "tweetcascade",
            "version": __version__,
            "subcommand": self.command,
            "seed": self.cfg.seed,
            "config_fingerprint": config_fingerprint(self.cfg),
            "inputs": dict(sorted(self.inputs.items())),
            **(extra or {}),
        }
        Path(str(p) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return p


def _gold_and_corpus(run: Run, args) -> tuple[list, dict]:
    corpus = read_corpus(run.input(args.corpus, "corpus"))
    gold = read_gold(run.input(args.gold, "gold labels"))
    return corpus, gold


def _parse_stage_filter(args) -> list[tuple[str, Language]] | None:
    if not args.task and not args.lang:
        return None
    tasks = [args.task] if args.task else list(TASKS)
    langs = [Language(args.lang)] if args.lang else list(LANGS)
    return [(t, lg) for lg in langs for t in tasks]


# --- subcommands -------------------------------------------------------------

def cmd_ingest(run: Run, args) -> int:
    res = run.res
    paths = [run.input(p) for p in args.input]

    def lines():
        for p in paths:
            with open(p, encoding="utf-8") as fh:
                yield from fh

    corpus, stats = ingest_stream(lines(), res.hashtags, res.rules)
    run.write(args.out, lambda fh: write_corpus(corpus, fh), {"stats": stats.to_dict()})
    if args.stats:
        run.write(args.stats, lambda fh: fh.write(json.dumps(stats.to_dict(), indent=2) + "\n"))
    log.info("admitted %d of %d lines", stats.admitted, stats.total_lines)
    return 0


def label_loop(
    tweets: Sequence,
    labeler_id: int,
    out_path: Path,
    read: Callable[[str], str] = input,
    write: Callable[[str], None] = print,
) -> int:
    """Prompt for each tweet not yet judged by ``labeler_id``; append each ballot as it is made."""
    done: set[int] = set()
    if out_path.exists() and out_path.stat().st_size:
        done = {b.tweet_id for b in read_ballots(out_path) if b.labeler_id == labeler_id}
    else:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(",".join(BALLOT_HEADER) + "\n", encoding="utf-8")

    def ask(prompt: str, valid: Callable[[str], object]):
        while True:
            answer = read(prompt).strip()
            if answer.lower() == "q":
                raise KeyboardInterrupt
            try:
                value = valid(answer)
            except (ValueError, PipelineError):
                value = None
            if value is not None:
                return value
            write("  invalid answer")

    def yes_no(a: str):
        a = a.lower()
        return {"y": True, "yes": True, "n": False, "no": False}.get(a)

    def score(a: str):
        v = int(a)
        return v if -2 <= v <= 2 else None

    pending = [t for t in tweets if t.id not in done]
    written = 0
    try:
        for k, t in enumerate(pending, 1):
            write(f"[{k}/{len(pending)}] tweet {t.id} ({t.language.value})")
            write(t.text)
            relevant = ask("relevant to the event? [y/n, q=quit] ", yes_no)
            s = ask("sentiment -2..+2: ", score) if relevant else None
            face = None
            if t.language is Language.CHINESE:
                face = ask("typeface [s/t]: ", parse_typeface)
            ballot = Ballot(t.id, labeler_id, relevant, s, face)
            with open(out_path, "a", encoding="utf-8", newline="") as fh:
                fh.write(",".join(ballot_row(ballot)) + "\n")
            written += 1
    except (KeyboardInterrupt, EOFError):
        write(f"stopped; {written} ballot(s) saved, {len(pending) - written} left")
    return written


def cmd_label(run: Run, args) -> int:
    corpus = read_corpus(run.input(args.corpus, "corpus"))
    if args.lang:
        corpus = [t for t in corpus if t.language is Language(args.lang)]
    corpus = [t for t in corpus if t.language in LANGS]
    if args.sample is not None and args.sample < len(corpus):
        rng = np.random.default_rng(run.cfg.seed)
        keep = sorted(rng.permutation(len(corpus))[:args.sample])
        corpus = [corpus[i] for i in keep]
    label_loop(corpus, args.labeler, Path(args.ballots))
    return 0


def cmd_vote(run: Run, args) -> int:
    ballots = read_ballots(run.input(args.ballots, "ballots"))
    gold = amalgamate_all(group_ballots(ballots), run.cfg.seed)
    ties = sum(g.tie_broken for g in gold)
    run.write(args.out, lambda fh: write_gold(gold, fh), {"tweets": len(gold), "ties_broken": ties})
    return 0


def cmd_train(run: Run, args) -> int:
    corpus, gold = _gold_and_corpus(run, args)
    base = None
    if args.base:
        base = ModelBundle.load(run.input(args.base, "base bundle"), run.res.stage_lexicons())
    bundle = train_bundle(corpus, gold, run.res, run.cfg, _parse_stage_filter(args), base)
    run.write(args.out, lambda fh: fh.write(bundle.to_json()), {"stages": sorted(bundle.stages)})
    return 0


def _load_bundle(run: Run, path: str) -> ModelBundle:
    p = Path(path)
    bundle = ModelBundle.load(p, run.res.stage_lexicons())  # raises MissingModel when absent
    run.inputs[p.name] = sha256_file(p)
    return bundle


def cmd_classify(run: Run, args) -> int:
    bundle = _load_bundle(run, args.bundle)
    corpus = [t for t in read_corpus(run.input(args.corpus, "corpus")) if t.language in LANGS]
    outcomes = classify_many(corpus, bundle, run.res.typeface)
    rows = [ClassifiedTweet.from_outcome(t, o) for t, o in zip(corpus, outcomes)]
    counts = Counter(r.final.value for r in rows)

    def writer(fh):
        for r in rows:
            fh.write(r.to_json() + "\n")

    run.write(args.out, writer, {"final_counts": dict(sorted(counts.items()))})
    return 0


def cmd_evaluate(run: Run, args) -> int:
    bundle = _load_bundle(run, args.bundle)
    corpus, gold = _gold_and_corpus(run, args)
    reports = evaluate_bundle(corpus, gold, bundle, run.res, run.cfg)
    run.write(args.out, lambda fh: fh.write(format_reports(reports)))
    if args.json:
        run.write(args.json, lambda fh: fh.write(reports_json(reports)))
    if not args.quiet:
        sys.stdout.write(format_reports(reports))
    return 0


def cmd_aggregate(run: Run, args) -> int:
    rows = read_classified(run.input(args.classified, "classified corpus"))
    res = run.res
    out = Path(args.out_dir)
    offset = run.cfg["utc_offset_hours"]
    k = run.cfg["words.top_k"]
    langs = [Language(args.lang)] if args.lang else list(LANGS)
    for lang in langs:
        part = [r for r in rows if r.language is lang]
        if not part:
            continue
        sfx = lang.value
        series = series_from_counts(hourly_counts(part, offset), offset)
        run.write(out / f"series_{sfx}.csv", lambda fh: write_series_csv(series, fh),
                  {"pct_denominator": "positive+negative+neutral", "utc_offset_hours": offset})

        resolved = [(r.final, resolve_country(r.user_location, res.gazetteer)) for r in part]
        unknown = country_counts(resolved).get(None, Counter())
        scores = country_scores(resolved)
        run.write(out / f"countries_{sfx}.csv", lambda fh: write_country_csv(scores, fh),
                  {"unknown_country": {"positive": unknown["positive"], "negative": unknown["negative"]},
                   "neutral_excluded": True})

        docs = [(r.final, tokenize(r.text, lang, r.id)) for r in part
                if r.final in (FinalLabel.POSITIVE, FinalLabel.NEGATIVE)]
        report = WordFreqReport.build(docs, res.stoplists[lang])
        run.write(out / f"words_{sfx}.csv", lambda fh: write_words_csv(report.ranked, fh, k), {"top_k": k})
        run.write(out / f"words_distinctive_{sfx}.csv",
                  lambda fh: write_words_csv(report.distinctive, fh, args.distinctive_k),
                  {"top_k": args.distinctive_k})
    return 0


def cmd_report(run: Run, args) -> int:
    ballots = read_ballots(run.input(args.ballots, "ballots"))
    groups = group_ballots(ballots)
    seed = run.cfg.seed
    languages = None
    if args.corpus:
        lang_of = {t.id: t.language.value for t in read_corpus(run.input(args.corpus, "corpus"))}
        languages = {tid: lang_of.get(tid, "unknown") for tid in groups}
    out = Path(args.out_dir)

    parts: dict[str, dict] = {}
    names = sorted(set(languages.values())) if languages else ["all"]
    for name in names:
        sub = {tid: bs for tid, bs in groups.items() if languages is None or languages[tid] == name}
        parts[name] = build_agreement_report(sub, seed).to_dict()
        text = build_agreement_report(sub, seed).format_table()
        run.write(out / f"agreement_{name}.txt", lambda fh, text=text: fh.write(text + "\n"))
    run.write(out / "agreement.json", lambda fh: fh.write(json.dumps(parts, indent=2, sort_keys=True) + "\n"))

    if args.labeler is not None:
        d = build_dissident_report(args.labeler, groups, seed, languages)
        run.write(out / f"dissident_{args.labeler}.txt", lambda fh: fh.write(d.format_table() + "\n"))
        run.write(out / f"dissident_{args.labeler}.json",
                  lambda fh: fh.write(json.dumps(d.to_dict(), indent=2, sort_keys=True) + "\n"))
    return 0


def cmd_synth(run: Run, args) -> int:
    """Write a synthetic archive and (optionally) a four-labeler ballot file for it."""
    lines, truth = synth_archive(args.n, run.cfg.seed, p_chinese=args.p_chinese)
    run.write(args.out, lambda fh: fh.writelines(line + "\n" for line in lines))
    if args.ballots:
        ids = [tid for tid, t in truth.items() if t.language in LANGS]
        rng = np.random.default_rng(run.cfg.seed + 1)
        if args.label_count < len(ids):
            ids = sorted(ids[i] for i in rng.permutation(len(ids))[:args.label_count])
        ballots = synth_ballots(truth, ids, run.cfg.seed + 2)
        run.write(args.ballots, lambda fh: write_ballots(ballots, fh))
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON config file (default: built-in defaults, seed 0)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr")

    p = argparse.ArgumentParser(prog="tweetcascade", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("ingest", parents=[common], help="filter, dedup and partition JSONL archives")
    s.add_argument("--input", required=True, action="append", help="archive JSONL (repeatable)")
    s.add_argument("--out", required=True, help="canonical corpus JSONL")
    s.add_argument("--stats", help="also write ingest statistics JSON here")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("label", parents=[common], help="interactive labeling prompt (resumable)")
    s.add_argument("--corpus", required=True)
    s.add_argument("--ballots", required=True, help="ballot CSV to create or extend")
    s.add_argument("--labeler", required=True, type=int)
    s.add_argument("--lang", choices=["en", "zh"])
    s.add_argument("--sample", type=int, help="label a seeded random sample of this size")
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("vote", parents=[common], help="amalgamate ballots into gold labels")
    s.add_argument("--ballots", required=True)
    s.add_argument("--out", required=True, help="gold label CSV")
    s.set_defaults(func=cmd_vote)

    s = sub.add_parser("train", parents=[common], help="train hybrid classifier stages")
    s.add_argument("--corpus", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--out", required=True, help="model bundle to write")
    s.add_argument("--task", choices=list(TASKS))
    s.add_argument("--lang", choices=["en", "zh"])
    s.add_argument("--base", help="existing bundle whose other stages are carried over")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("classify", parents=[common], help="run the cascade over a corpus")
    s.add_argument("--corpus", required=True)
    s.add_argument("--bundle", required=True)
    s.add_argument("--out", required=True, help="classified JSONL")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("evaluate", parents=[common], help="held-out precision/recall/F1/accuracy")
    s.add_argument("--corpus", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--bundle", required=True)
    s.add_argument("--out", required=True, help="text report")
    s.add_argument("--json", help="also write the report as JSON")
    s.add_argument("--quiet", action="store_true", help="do not echo the report")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("aggregate", parents=[common], help="hourly, per-country and word reports")
    s.add_argument("--classified", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--lang", choices=["en", "zh"])
    s.add_argument("--distinctive-k", type=int, default=50, help="rows per class in the distinctive list")
    s.set_defaults(func=cmd_aggregate)

    s = sub.add_parser("report", parents=[common], help="voting-ratio and dissident reports")
    s.add_argument("--ballots", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--corpus", help="split the reports by tweet language")
    s.add_argument("--labeler", type=int, help="also build this labeler's dissident report")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic archive and ballots")
    s.add_argument("--n", type=int, default=4000)
    s.add_argument("--out", required=True)
    s.add_argument("--ballots")
    s.add_argument("--label-count", type=int, default=1000)
    s.add_argument("--p-chinese", type=float, default=0.3)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run = Run(args)
        return args.func(run, args)
    except PipelineError as exc:
        detail = " ".join(str(exc).split())
        print(f"error: {exc.name}: {detail}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: IOError: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
