"""Command line entry point: ``linksig <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 corpus or provider error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .corpus import (
    DEFAULT_D_TOTAL,
    CachedDf,
    CorpusError,
    DfCache,
    HttpJsonDf,
    LiveFetcher,
    ProviderUnavailable,
    RetryPolicy,
    load_corpus,
    save_corpus,
)
from .filters import FILTER_ORDER, FilterChain
from .lexsig import SWEEP_SIZES, EmptyPoolError, SignatureConfig, load_stopwords
from .neighborhood import RANK_LIMITS, HttpJsonBacklinks
from .render import RADII, NoLinkFoundError, marker_for, mark_links, render
from .search import HttpJsonSearch, Pipeline, rediscover
from .sweep import SweepSpec, emit_report, report_from_log, run_sweep
from .uri import MalformedURIError, canonicalize

log = logging.getLogger("linksig")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _csv_strs(text: str) -> list[str]:
    return [x for x in text.split(",") if x]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--corpus", type=Path, help="offline corpus directory")
    mode.add_argument("--live", action="store_true", help="use live HTTP providers")
    p.add_argument("--backlink-endpoint", help="live backlink JSON endpoint, '{uri}' is substituted")
    p.add_argument("--search-endpoint", help="live search JSON endpoint, '{query}' is substituted")
    p.add_argument("--df-endpoint", help="live DF JSON endpoint, '{term}' is substituted")
    p.add_argument("--df-cache", type=Path, help="DF cache file (term<TAB>df<TAB>timestamp)")
    p.add_argument("--d-total", type=float, help="corpus size |D| (offline default: manifest value)")
    p.add_argument("--stopwords", type=Path, help="stop word list, one per line")
    p.add_argument("--parallelism", type=int, default=4)
    p.add_argument("--skip-filter", action="append", default=[], choices=FILTER_ORDER)
    p.add_argument("--output", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=Path, help="write output here instead of stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _config_flags(p: argparse.ArgumentParser, size_default: Optional[int] = 4) -> None:
    p.add_argument("--target", required=True)
    p.add_argument("--depth", type=int, choices=(1, 2), default=1)
    p.add_argument("--rank-limit", type=int, choices=RANK_LIMITS, default=10)
    p.add_argument("--radius", default="anchor", help=f"one of {', '.join(RADII)} or anchorN")
    p.add_argument("--size", type=int, default=size_default)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="linksig", description="Lexical signatures from backlink neighborhoods.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fetch-neighborhood", parents=[common], help="build and print a backlink graph")
    p.add_argument("--target", required=True)
    p.add_argument("--depth", type=int, choices=(1, 2), default=1)
    p.add_argument("--rank-limit", type=int, choices=RANK_LIMITS, default=10)

    p = sub.add_parser("render", parents=[common], help="render an HTML file and mark links to a target")
    p.add_argument("html", type=Path)
    p.add_argument("--target", required=True)
    p.add_argument("--base", help="URI of the page itself, for relative links")

    p = sub.add_parser("sign", parents=[common], help="print a lexical signature")
    _config_flags(p, size_default=None)

    p = sub.add_parser("rediscover", parents=[common], help="sign, search and score one target")
    _config_flags(p)

    p = sub.add_parser("sweep", parents=[common], help="run the parameter sweep")
    p.add_argument("--targets", action="append", default=[], help="target URI (repeatable)")
    p.add_argument("--targets-file", type=Path)
    p.add_argument("--depths", type=_csv_ints, default=[1, 2])
    p.add_argument("--rank-limits", type=_csv_ints, default=list(RANK_LIMITS))
    p.add_argument("--radii", type=_csv_strs, default=list(RADII))
    p.add_argument("--sizes", type=_csv_ints, default=list(SWEEP_SIZES))
    p.add_argument("--run-log", type=Path, help="NDJSON run log, appended to and resumed from")
    p.add_argument("--timestamp", help="fixed metadata timestamp, for reproducible reports")

    p = sub.add_parser("report", parents=[common], help="aggregate a run log into a report")
    p.add_argument("--run-log", type=Path, required=True)
    p.add_argument("--timestamp")

    p = sub.add_parser("synth-corpus", parents=[common], help="write the bundled synthetic corpus")
    p.add_argument("directory", type=Path)
    p.add_argument("--noise", action="store_true")
    p.add_argument("--seed", type=int, default=2010)
    return parser


# --------------------------------------------------------------------------


def _pipeline(args) -> Pipeline:
    stopwords = load_stopwords(args.stopwords) if args.stopwords else None
    cache = DfCache(args.df_cache) if args.df_cache else None
    if args.live:
        missing = [f for f in ("backlink_endpoint", "search_endpoint", "df_endpoint") if not getattr(args, f)]
        if missing:
            raise UsageError("--live needs " + ", ".join("--" + m.replace("_", "-") for m in missing))
        fetcher = LiveFetcher(RetryPolicy())
        return Pipeline(
            backlinks=HttpJsonBacklinks(args.backlink_endpoint),
            fetcher=fetcher,
            search=HttpJsonSearch(args.search_endpoint),
            df=CachedDf(HttpJsonDf(args.df_endpoint), cache),
            d_total=args.d_total or DEFAULT_D_TOTAL,
            stopwords=stopwords,
            filter_fn=FilterChain(fetcher=fetcher, skip=args.skip_filter),
            parallelism=args.parallelism,
        )
    if args.corpus is None:
        raise UsageError("either --corpus or --live is required")
    corpus = load_corpus(args.corpus)
    pipe = Pipeline.offline(corpus, cache, stopwords=stopwords, parallelism=args.parallelism)
    pipe.filter_fn = FilterChain(fetcher=pipe.fetcher, skip=args.skip_filter)
    if args.d_total:
        pipe.d_total = args.d_total
    return pipe


def _write(args, data: bytes) -> None:
    if args.out:
        args.out.write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _config(args, size: Optional[int] = None) -> SignatureConfig:
    return SignatureConfig(args.depth, args.rank_limit, args.radius, size or args.size or 10)


def cmd_fetch_neighborhood(args) -> int:
    pipe = _pipeline(args)
    hood = pipe.neighborhood(args.target, args.depth, args.rank_limit)
    out = {
        "target": hood.target.serialize(),
        "edges": [[e.source.serialize(), e.target.serialize()] for e in hood.edges],
        "verdicts": {
            u.serialize(): v.rejected_by or "passed" for u, v in sorted(hood.verdicts.items())
        },
    }
    _write(args, (json.dumps(out, indent=1) + "\n").encode("utf-8"))
    return 0


def cmd_render(args) -> int:
    html = args.html.read_bytes()
    marker = marker_for(args.target)
    try:
        doc = render(mark_links(html, args.target, args.base), marker)
    except NoLinkFoundError:
        print(f"warning: no link to {canonicalize(args.target)} found", file=sys.stderr)
        doc = render(html)
    inside = set()
    for start, end in doc.anchor_spans:
        inside.update(range(start, end))
    lines = [f"# marker {marker}"]
    lines += [f"# span {s} {e}" for s, e in doc.anchor_spans]
    lines += [f"{i}\t{tok}\t{'anchor' if i in inside else '-'}" for i, tok in enumerate(doc.tokens)]
    _write(args, ("\n".join(lines) + "\n").encode("utf-8"))
    return 0


def cmd_sign(args) -> int:
    pipe = _pipeline(args)
    sig = pipe.signature(args.target, _config(args, 10))
    terms = sig.terms[: args.size] if args.size else sig.terms
    _write(args, "".join(f"{t}\t{v:.9f}\n" for t, v in terms).encode("utf-8"))
    return 0


def cmd_rediscover(args) -> int:
    pipe = _pipeline(args)
    result = rediscover(args.target, _config(args), pipe)
    lines = [
        f"found_rank\t{result.found_rank if result.found_rank is not None else '-'}",
        f"ndcg\t{result.ndcg:.9f}",
        f"bucket\t{result.bucket}",
        f"signature\t{' '.join(result.signature)}",
    ]
    if result.diagnostic:
        lines.append(f"diagnostic\t{result.diagnostic}")
    _write(args, ("\n".join(lines) + "\n").encode("utf-8"))
    return 0


def cmd_sweep(args) -> int:
    pipe = _pipeline(args)
    targets = list(args.targets)
    if args.targets_file:
        targets += [l.strip() for l in args.targets_file.read_text().splitlines() if l.strip()]
    if not targets and args.corpus is not None:
        targets = [t.serialize() for t in load_corpus(args.corpus).targets]
    spec = SweepSpec(targets, args.depths, args.rank_limits, args.radii, args.sizes)
    meta = {"corpus": str(args.corpus) if args.corpus else "live"}
    if args.timestamp:
        meta["timestamp"] = args.timestamp
    report = run_sweep(spec, pipe, args.run_log, args.parallelism, meta)
    _write(args, emit_report(report, args.output))
    return 0


def cmd_report(args) -> int:
    meta = {"run_log": str(args.run_log)}
    if args.timestamp:
        meta["timestamp"] = args.timestamp
    _write(args, emit_report(report_from_log(args.run_log, meta), args.output))
    return 0


def cmd_synth_corpus(args) -> int:
    from .synth import synthetic_corpus

    save_corpus(synthetic_corpus(noise=args.noise, seed=args.seed), args.directory)
    print(args.directory)
    return 0


COMMANDS = {
    "fetch-neighborhood": cmd_fetch_neighborhood,
    "render": cmd_render,
    "sign": cmd_sign,
    "rediscover": cmd_rediscover,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "synth-corpus": cmd_synth_corpus,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CorpusError, ProviderUnavailable, EmptyPoolError, OSError) as exc:
        print(f"linksig: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (UsageError, MalformedURIError, ValueError) as exc:
        print(f"linksig: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
