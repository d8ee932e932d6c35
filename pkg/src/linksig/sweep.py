"""Parameter sweeps over depth, rank limit, radius and signature size.

Each (target, configuration) outcome is appended to a newline-delimited
JSON run log as soon as its target finishes, so an interrupted sweep
resumes where it stopped. Reports are a deterministic fold over the log.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .lexsig import SWEEP_SIZES, EmptyPoolError, SignatureConfig, compute_signature, default_stopwords
from .neighborhood import RANK_LIMITS
from .corpus import ProviderUnavailable
from .render import RADII, window_size
from .search import BUCKETS, Pipeline, RediscoveryResult, failed_result, score_signature
from .uri import CanonicalUri, UriLike, canonicalize

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "depth", "rank_limit", "radius", "size",
    "pct_rank1", "pct_2_10", "pct_11_100", "pct_101_1000", "pct_gt1000", "mean_ndcg",
)
_PCT_COLUMNS = dict(zip(BUCKETS, CSV_COLUMNS[4:9]))


@dataclass
class SweepSpec:
    targets: list[CanonicalUri]
    depths: Sequence[int] = (1, 2)
    rank_limits: Sequence[int] = RANK_LIMITS
    radii: Sequence[str] = RADII
    sizes: Sequence[int] = SWEEP_SIZES

    def __post_init__(self):
        self.targets = [canonicalize(t) for t in self.targets]
        if not self.targets:
            raise ValueError("a sweep needs at least one target")
        for name in ("depths", "rank_limits", "radii", "sizes"):
            if not getattr(self, name):
                raise ValueError(f"sweep axis {name} is empty")
        for r in self.radii:
            window_size(r)

    def configs(self) -> list[SignatureConfig]:
        return [
            SignatureConfig(d, k, r, s)
            for d, k, r, s in product(self.depths, self.rank_limits, self.radii, self.sizes)
        ]


@dataclass
class ReportRow:
    config: SignatureConfig
    percentages: dict[str, float]
    mean_ndcg: float
    n: int


@dataclass
class SweepReport:
    rows: list[ReportRow]
    metadata: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# run log


def _record(result: RediscoveryResult) -> dict:
    c = result.config
    return {
        "target": result.target.serialize(),
        "depth": c.depth,
        "rank_limit": c.rank_limit,
        "radius": c.radius,
        "size": c.size,
        "found_rank": result.found_rank,
        "ndcg": result.ndcg,
        "bucket": result.bucket,
        "signature": result.signature,
        "diagnostic": result.diagnostic,
    }


def _from_record(rec: dict) -> RediscoveryResult:
    config = SignatureConfig(rec["depth"], rec["rank_limit"], rec["radius"], rec["size"])
    return RediscoveryResult(
        canonicalize(rec["target"]), config, rec["found_rank"], rec["ndcg"], rec["bucket"],
        rec.get("signature", []), rec.get("diagnostic", ""),
    )


def read_run_log(path: Union[str, Path]) -> list[RediscoveryResult]:
    results = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                results.append(_from_record(json.loads(line)))
            except (ValueError, KeyError) as exc:
                log.warning("skipping unreadable run log line: %s", exc)
    return results


# --------------------------------------------------------------------------
# running


def _sweep_target(target: CanonicalUri, spec: SweepSpec, pipeline: Pipeline,
                  wanted: set[SignatureConfig]) -> list[RediscoveryResult]:
    out: list[RediscoveryResult] = []
    max_depth = max(spec.depths)
    for limit in spec.rank_limits:
        todo = [c for c in spec.configs() if c.rank_limit == limit and c in wanted]
        if not todo:
            continue
        try:
            # a depth-2 neighborhood contains the depth-1 one
            hood = pipeline.neighborhood(target, max_depth, limit)
        except (ProviderUnavailable, ValueError) as exc:
            out += [failed_result(target, c, f"{type(exc).__name__}: {exc}") for c in todo]
            continue
        stored = {}
        for config in todo:
            key = (config.depth, config.radius)
            if key not in stored:
                try:
                    full = SignatureConfig(config.depth, limit, config.radius, 10)
                    stored[key] = compute_signature(target, hood, full, pipeline.df,
                                                    pipeline.d_total, pipeline.stopwords)
                except (EmptyPoolError, ProviderUnavailable, ValueError) as exc:
                    stored[key] = f"{type(exc).__name__}: {exc}"
            sig = stored[key]
            if isinstance(sig, str):
                out.append(failed_result(target, config, sig))
                continue
            try:
                out.append(score_signature(target, sig, config, pipeline.search))
            except (ProviderUnavailable, ValueError) as exc:
                out.append(failed_result(target, config, f"{type(exc).__name__}: {exc}"))
    return out


def run_sweep(
    spec: SweepSpec,
    pipeline: Pipeline,
    run_log: Optional[Union[str, Path]] = None,
    parallelism: int = 1,
    metadata: Optional[dict] = None,
) -> SweepReport:
    """Rediscover every target under every configuration of *spec*.

    Signatures are computed once per (target, depth, rank limit, radius)
    and truncated per size. With *run_log*, finished records are skipped
    on rerun and new ones appended.
    """
    configs = spec.configs()
    done: dict[tuple[CanonicalUri, SignatureConfig], RediscoveryResult] = {}
    if run_log is not None and Path(run_log).exists():
        for r in read_run_log(run_log):
            done[(r.target, r.config)] = r

    pending = []
    for target in spec.targets:
        wanted = {c for c in configs if (target, c) not in done}
        if wanted:
            pending.append((target, wanted))

    def work(item):
        target, wanted = item
        return _sweep_target(target, spec, pipeline, wanted)

    log_fh = open(run_log, "a", encoding="utf-8") if run_log is not None else None
    try:
        if parallelism > 1 and len(pending) > 1:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                batches = pool.map(work, pending)
                for batch in batches:
                    _absorb(batch, done, log_fh)
        else:
            for item in pending:
                _absorb(work(item), done, log_fh)
    finally:
        if log_fh is not None:
            log_fh.close()

    results = [done[(t, c)] for t in spec.targets for c in configs]
    meta = {
        "d_total": pipeline.d_total,
        "stopwords_sha1": stopword_digest(pipeline.stopwords),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    meta.update(metadata or {})
    return aggregate(results, configs, meta)


def _absorb(batch, done, log_fh) -> None:
    for r in batch:
        done[(r.target, r.config)] = r
        if log_fh is not None:
            log_fh.write(json.dumps(_record(r), sort_keys=True) + "\n")
    if log_fh is not None:
        log_fh.flush()


def stopword_digest(stopwords: Optional[Iterable[str]]) -> str:
    words = default_stopwords() if stopwords is None else stopwords
    return hashlib.sha1("\n".join(sorted(words)).encode("utf-8")).hexdigest()


def _config_order(c: SignatureConfig):
    r = RADII.index(c.radius) if c.radius in RADII else len(RADII)
    return (c.depth, c.rank_limit, r, window_size(c.radius) or 0, c.radius, c.size)


def aggregate(results: Iterable[RediscoveryResult], configs: Optional[Sequence[SignatureConfig]] = None,
              metadata: Optional[dict] = None) -> SweepReport:
    """Per-configuration bucket percentages and mean nDCG.

    Failures count as not found (nDCG 0) in every mean.
    """
    by_config: dict[SignatureConfig, list[RediscoveryResult]] = {}
    for r in results:
        by_config.setdefault(r.config, []).append(r)
    if configs is None:
        configs = sorted(by_config, key=_config_order)
    rows = []
    for config in configs:
        group = by_config.get(config, [])
        n = len(group)
        pct = {b: (100.0 * sum(1 for r in group if r.bucket == b) / n if n else 0.0) for b in BUCKETS}
        mean = sum(r.ndcg for r in group) / n if n else 0.0
        rows.append(ReportRow(config, pct, mean, n))
    return SweepReport(rows, dict(metadata or {}))


def report_from_log(path: Union[str, Path], metadata: Optional[dict] = None) -> SweepReport:
    return aggregate(read_run_log(path), None, metadata)


# --------------------------------------------------------------------------
# output


def _row_fields(row: ReportRow) -> dict:
    c = row.config
    out = {"depth": c.depth, "rank_limit": c.rank_limit, "radius": c.radius, "size": c.size}
    for b, col in _PCT_COLUMNS.items():
        out[col] = f"{row.percentages[b]:.2f}"
    out["mean_ndcg"] = f"{row.mean_ndcg:.2f}"
    return out


def emit_report(report: SweepReport, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in report.rows:
            writer.writerow(_row_fields(row))
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        rows = []
        for row in report.rows:
            fields = _row_fields(row)
            for col in CSV_COLUMNS[4:]:
                fields[col] = float(fields[col])
            rows.append(fields)
        return (json.dumps({"metadata": report.metadata, "rows": rows}, indent=2, sort_keys=True) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")
