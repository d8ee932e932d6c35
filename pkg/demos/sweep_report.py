"""
A small parameter sweep
=======================

Sweep signature size and radius for a handful of targets and print the
rank-bucket table. The run log lets an interrupted sweep pick up where it
stopped.
"""
import sys
import tempfile
from pathlib import Path

from linksig import Pipeline, SweepSpec, emit_report, run_sweep, synthetic_corpus

corpus = synthetic_corpus(noise=True)
spec = SweepSpec(
    targets=list(corpus.targets[:6]),
    depths=[1, 2],
    rank_limits=[10],
    radii=["anchor", "anchor10", "page"],
    sizes=[1, 3, 5],
)
print(len(spec.configs()), "configurations per target", file=sys.stderr)

with tempfile.TemporaryDirectory() as tmp:
    log = Path(tmp) / "run.ndjson"
    report = run_sweep(spec, Pipeline.offline(corpus), run_log=log)
    # a second call finds everything in the log and recomputes nothing
    again = run_sweep(spec, Pipeline.offline(corpus), run_log=log)
    assert emit_report(again) == emit_report(report)

sys.stdout.write(emit_report(report).decode())
