import csv
import io
import json

import pytest

from linksig.lexsig import SignatureConfig
from linksig.search import Pipeline, RediscoveryResult
from linksig.sweep import (
    CSV_COLUMNS,
    SweepSpec,
    aggregate,
    emit_report,
    read_run_log,
    report_from_log,
    run_sweep,
)
from linksig.synth import synthetic_corpus
from linksig.uri import canonicalize

from oracles import pass_all


@pytest.fixture(scope="module")
def small():
    corpus = synthetic_corpus(n_targets=4, n_distractors=3)
    return corpus, list(corpus.targets[:2])


def test_small_sweep_shape(small):
    corpus, targets = small
    spec = SweepSpec(targets, depths=[1], rank_limits=[10], radii=["anchor"], sizes=[3, 4])
    calls = []
    pipe = Pipeline.offline(corpus, filter_fn=pass_all)
    inner = pipe.search

    class Spy:
        name = "spy"

        def search(self, q):
            calls.append(q)
            return inner.search(q)

    pipe.search = Spy()
    report = run_sweep(spec, pipe)
    assert len(calls) == 4
    assert len(report.rows) == 2
    assert [r.config.size for r in report.rows] == [3, 4]
    assert all(r.n == 2 and r.percentages["1"] == 100.0 and r.mean_ndcg == 1.0 for r in report.rows)


def test_empty_targets():
    with pytest.raises(ValueError):
        SweepSpec([])
    with pytest.raises(ValueError):
        SweepSpec(["http://a.org/"], sizes=[])


def test_default_config_count():
    assert len(SweepSpec(["http://a.org/"]).configs()) == 192


def _result(target, config, rank):
    from linksig.search import bucket, dcg_star
    return RediscoveryResult(canonicalize(target), config, rank, dcg_star(rank), bucket(rank))


def test_row_formatting():
    good, bad = SignatureConfig(size=4), SignatureConfig(size=5)
    results = [_result("http://a.org/", good, 1), _result("http://b.org/", good, 1),
               _result("http://a.org/", bad, None), _result("http://b.org/", bad, None)]
    rows = list(csv.DictReader(io.StringIO(emit_report(aggregate(results)).decode())))
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert rows[0]["pct_rank1"] == "100.00" and rows[0]["mean_ndcg"] == "1.00"
    assert rows[1]["pct_gt1000"] == "100.00" and rows[1]["mean_ndcg"] == "0.00"


def test_mixed_row_sums_to_100():
    c = SignatureConfig()
    results = [_result(f"http://t{i}.org/", c, r) for i, r in enumerate([1, 3, 3, 50, 500, None, 2000])]
    (row,) = aggregate(results).rows
    assert sum(row.percentages.values()) == pytest.approx(100.0, abs=0.01)
    assert row.percentages["2-10"] == pytest.approx(200 / 7)
    assert 0 <= row.mean_ndcg <= 1


def test_json_report(small):
    corpus, targets = small
    spec = SweepSpec(targets, depths=[1], rank_limits=[10], radii=["anchor", "page"], sizes=[1])
    report = run_sweep(spec, Pipeline.offline(corpus), metadata={"timestamp": "fixed"})
    data = json.loads(emit_report(report, "json"))
    assert data["metadata"]["timestamp"] == "fixed"
    assert len(data["rows"]) == 2 and data["rows"][0]["pct_rank1"] == 100.0
    with pytest.raises(ValueError):
        emit_report(report, "xml")


def test_signature_reuse(tmp_path, small):
    corpus, targets = small
    spec = SweepSpec(targets[:1], depths=[1], rank_limits=[10], radii=["anchor10"], sizes=[1, 2, 3, 4, 5, 6, 7, 10])
    pipe = Pipeline.offline(corpus, filter_fn=pass_all)
    report = run_sweep(spec, pipe, tmp_path / "log.ndjson")
    assert len(report.rows) == 8
    assert pipe.backlinks.calls == 1
    sigs = sorted((r.signature for r in read_run_log(tmp_path / "log.ndjson")), key=len)
    longest = sigs[-1]
    assert all(s == longest[: len(s)] for s in sigs)


def test_resume(tmp_path, small):
    corpus, targets = small
    log = tmp_path / "run.ndjson"
    spec = SweepSpec(targets, depths=[1], rank_limits=[10], radii=["anchor"], sizes=[3, 4])
    first = run_sweep(SweepSpec(targets[:1], [1], [10], ["anchor"], [3, 4]), Pipeline.offline(corpus), log)
    assert len(read_run_log(log)) == 2
    pipe = Pipeline.offline(corpus)
    full = run_sweep(spec, pipe, log)
    records = read_run_log(log)
    assert len(records) == 4
    assert {r.target for r in records} == set(targets)
    # the resumed target was not recomputed
    assert pipe.backlinks.calls == 1
    assert emit_report(report_from_log(log)) == emit_report(full)
    # a truncated final line is skipped
    with open(log, "a") as fh:
        fh.write('{"target": "http://x.org/", "dep')
    assert len(read_run_log(log)) == 4
    assert first.rows[0].n == 1


def test_parallel_matches_serial(small):
    corpus, targets = small
    spec = SweepSpec(targets, depths=[1, 2], rank_limits=[10], radii=["anchor", "page"], sizes=[2, 4])
    a = emit_report(run_sweep(spec, Pipeline.offline(corpus), parallelism=1))
    b = emit_report(run_sweep(spec, Pipeline.offline(corpus), parallelism=4))
    assert a == b
