"""
Which backlinks survive the filters
===================================

Run the synthetic neighborhoods through the filter chain and count pages
by the first filter that rejected them.
"""
from collections import Counter

from linksig import Pipeline, synthetic_corpus

corpus = synthetic_corpus()
pipe = Pipeline.offline(corpus)

tally = Counter()
seen = set()
for target in corpus.targets:
    hood = pipe.neighborhood(target, depth=2, rank_limit=10)
    for uri, verdict in hood.verdicts.items():
        if uri not in seen:
            seen.add(uri)
            tally[verdict.rejected_by or "passed"] += 1

total = sum(tally.values())
for name, n in tally.most_common():
    print(f"{name:9s} {n:4d}  {100 * n / total:5.1f}%")

# a rejected page keeps its rank slot, it just contributes no terms
hood = pipe.neighborhood(corpus.targets[0], depth=1, rank_limit=10)
for edge in hood.edges:
    v = hood.verdicts[edge.source]
    print(edge.rank, edge.source, v.rejected_by or "ok", v.detail)
