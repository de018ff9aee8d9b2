"""Command-line driver: ``align``, ``report``, ``validate`` and ``graphml``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .aligner import (
    DEFAULT_MAX_COMPONENTS,
    MODIFICATIONS,
    RULE_FILES,
    AlignmentResult,
    RuleSet,
    align_sentence,
    default_rule_dir,
)
from .corpus import DcsSentence, MalformedRecord, iter_corpus_lines, read_corpus, validate_corpus
from .phonology import normalize
from .report import emit_gold, sidecar_records, summarize
from .seg_graph import (
    CandidateSegment,
    DuplicateNodeId,
    SpanOutOfRange,
    build_graph,
    merge_homonyms,
    read_analyses,
    write_graphml,
)

log = logging.getLogger("sandhi_align")

RULES_ENV = "SANDHI_ALIGN_RULES"


class InputError(Exception):
    """Fatal problem with an input file; the message names the path or sentence."""


@dataclass(frozen=True)
class RunConfig:
    corpus: Path
    analyses: Path
    rules: Path
    out: Path
    normalize: bool = True
    max_components: int = DEFAULT_MAX_COMPONENTS
    order: tuple[str, ...] = MODIFICATIONS
    jobs: int = 1

    def problems(self) -> list[str]:
        errs = []
        for name in ("corpus", "analyses"):
            p = getattr(self, name)
            if not Path(p).is_file():
                errs.append(f"{name} file not found: {p}")
        if not Path(self.rules).is_dir():
            errs.append(f"rule directory not found: {self.rules}")
        else:
            errs += [f"rule file not found: {Path(self.rules) / f}" for f in RULE_FILES
                     if not (Path(self.rules) / f).is_file()]
        if self.max_components < 1:
            errs.append("--max-components must be at least 1")
        if self.jobs < 1:
            errs.append("--jobs must be at least 1")
        bad = [m for m in self.order if m not in MODIFICATIONS]
        if bad or len(set(self.order)) != len(self.order):
            errs.append(f"modification order must be a permutation of {','.join(MODIFICATIONS)}")
        return errs


def resolve_rule_dir(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    if os.environ.get(RULES_ENV):
        return Path(os.environ[RULES_ENV])
    return default_rule_dir()


# ---------------------------------------------------------------- per-sentence work

_worker_rules: RuleSet | None = None


def _init_worker(rule_dir: str) -> None:
    global _worker_rules
    _worker_rules = RuleSet.load(Path(rule_dir))


def prepare_graph(rec: DcsSentence, segments: list[CandidateSegment], rules: RuleSet, normalized: bool):
    """Normalize (optionally), build and homonym-merge one sentence's graph."""
    text = rec.text
    if normalized:
        text = normalize(text, rules.gemination)
        segments = [s.normalized(rules.gemination) for s in segments]
    try:
        return merge_homonyms(build_graph(segments, sentence_length=len(text)))
    except (DuplicateNodeId, SpanOutOfRange) as exc:
        raise InputError(f"sentence {rec.sent_id}: {exc}") from exc


def _align_bundle(bundle) -> AlignmentResult:
    rec, segments, normalized, max_components, order = bundle
    rules = _worker_rules
    g = prepare_graph(rec, segments, rules, normalized)
    return align_sentence(rec, g, rules, normalize=normalized, max_components=max_components, order=order)


def align_all(records: Sequence[DcsSentence], analyses: dict, config: RunConfig) -> list[AlignmentResult]:
    bundles = []
    for rec in sorted(records, key=lambda r: r.sent_id):
        segs = analyses.get(rec.sent_id)
        if segs is None:
            log.warning("sentence %s has no analyses; aligning against an empty graph", rec.sent_id)
            segs = []
        bundles.append((rec, segs, config.normalize, config.max_components, tuple(config.order)))
    extra = sorted(set(analyses) - {r.sent_id for r in records})
    if extra:
        log.warning("ignoring analyses for %d sentence(s) absent from the corpus: %s",
                    len(extra), ", ".join(map(str, extra[:10])))

    if config.jobs == 1:
        _init_worker(str(config.rules))
        results = [_align_bundle(b) for b in bundles]
    else:
        chunksize = max(1, len(bundles) // (config.jobs * 4))
        with ProcessPoolExecutor(config.jobs, initializer=_init_worker, initargs=(str(config.rules),)) as pool:
            results = list(pool.map(_align_bundle, bundles, chunksize=chunksize))
    return sorted(results, key=lambda r: r.sent_id)


def _write_jsonl(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def run_align(config: RunConfig) -> int:
    problems = config.problems()
    if problems:
        for p in problems:
            log.error(p)
        return 1
    try:
        records = read_corpus(config.corpus)
    except MalformedRecord as exc:
        log.error("%s: %s", config.corpus, exc)
        return 1
    try:
        analyses = read_analyses(config.analyses)
    except ValueError as exc:
        log.error("%s", exc)
        return 1
    try:
        results = align_all(records, analyses, config)
    except InputError as exc:
        log.error("%s: %s", config.analyses, exc)
        return 1

    out = Path(config.out)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    corpus = {r.sent_id: r for r in records}
    _write_jsonl(out / "alignment.jsonl", (r.to_json() for r in results))
    _write_jsonl(out / "gold.jsonl", emit_gold(results, corpus))
    _write_jsonl(out / "ambiguous.jsonl", sidecar_records(results, (2,)))
    _write_jsonl(out / "unmatched.jsonl", sidecar_records(results, (3, 4)))
    report = summarize(results)
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(report.to_json(), f, ensure_ascii=False, indent=2)
        f.write("\n")
    for r in results:
        with open(out / "graphs" / f"{r.sent_id}.graphml", "w", encoding="utf-8", newline="\n") as f:
            f.write(write_graphml(r.graph, graph_id=f"sent-{r.sent_id}"))
    log.info("aligned %d sentences: %s", report.total, report.to_json()["categories"])
    return 0


# ---------------------------------------------------------------- other commands

def run_report(path: Path) -> int:
    try:
        with open(path, encoding="utf-8") as f:
            results = [AlignmentResult.from_json(json.loads(line)) for line in f if line.strip()]
    except FileNotFoundError:
        log.error("alignment file not found: %s", path)
        return 1
    except (ValueError, KeyError) as exc:
        log.error("%s: bad alignment record: %s", path, exc)
        return 1
    print(json.dumps(summarize(results).to_json(), ensure_ascii=False, indent=2))
    return 0


def run_validate(path: Path) -> int:
    if not Path(path).is_file():
        log.error("corpus file not found: %s", path)
        return 1
    issues = validate_corpus(line for _, line in iter_corpus_lines(path))
    for issue in issues:
        print(f"{issue.sent_id}\t{issue.kind.value}\t{issue.detail}")
    return 1 if issues else 0


def run_graphml(analyses_path: Path, sent_id: int, out: Path, corpus_path: Path | None,
                rule_dir: Path, normalized: bool) -> int:
    for p in (analyses_path, corpus_path):
        if p is not None and not Path(p).is_file():
            log.error("file not found: %s", p)
            return 1
    try:
        rules = RuleSet.load(rule_dir)
        analyses = read_analyses(analyses_path)
        records = read_corpus(corpus_path) if corpus_path else []
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    if sent_id not in analyses:
        log.error("%s: no analyses for sentence %s", analyses_path, sent_id)
        return 1
    rec = next((r for r in records if r.sent_id == sent_id), None)
    try:
        if rec is None:
            segs = analyses[sent_id]
            if normalized:
                segs = [s.normalized(rules.gemination) for s in segs]
            g = merge_homonyms(build_graph(segs))
        else:
            g = prepare_graph(rec, analyses[sent_id], rules, normalized)
            g = align_sentence(rec, g, rules, normalize=normalized).graph
    except (InputError, DuplicateNodeId) as exc:
        log.error("%s", exc)
        return 1
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(write_graphml(g, graph_id=f"sent-{sent_id}"), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sandhi-align", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("align", help="align a corpus with segmenter analyses")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--analyses", required=True, type=Path)
    p.add_argument("--rules", help=f"rule directory (default: ${RULES_ENV}, then the bundled rules)")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--no-normalize", action="store_true", help="skip anusvāra and dvitva normalization")
    p.add_argument("--max-components", type=int, default=DEFAULT_MAX_COMPONENTS)
    p.add_argument("--order", default=",".join(MODIFICATIONS),
                   help="comma-separated modification order (default: %(default)s)")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("report", help="summarize an alignment.jsonl file")
    p.add_argument("--in", dest="input", required=True, type=Path)

    p = sub.add_parser("validate", help="check a corpus file and list its issues")
    p.add_argument("--corpus", required=True, type=Path)

    p = sub.add_parser("graphml", help="write one sentence's graph as GraphML")
    p.add_argument("--analyses", required=True, type=Path)
    p.add_argument("--sent-id", required=True, type=int)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--corpus", type=Path, help="also apply the alignment modifications")
    p.add_argument("--rules")
    p.add_argument("--no-normalize", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "align":
        config = RunConfig(
            corpus=args.corpus, analyses=args.analyses, rules=resolve_rule_dir(args.rules), out=args.out,
            normalize=not args.no_normalize, max_components=args.max_components,
            order=tuple(x.strip() for x in args.order.split(",") if x.strip()), jobs=args.jobs,
        )
        return run_align(config)
    if args.command == "report":
        return run_report(args.input)
    if args.command == "validate":
        return run_validate(args.corpus)
    return run_graphml(args.analyses, args.sent_id, args.out, args.corpus,
                       resolve_rule_dir(args.rules), not args.no_normalize)


if __name__ == "__main__":
    sys.exit(main())
