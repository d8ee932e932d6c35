"""
Rediscovering pages from their backlinks
========================================

Build the bundled synthetic web, sign each target with the anchor text of
its backlinks and check where the target lands when the signature is used
as a query.
"""
from linksig import Pipeline, SignatureConfig, rediscover, synthetic_corpus

corpus = synthetic_corpus()
print(len(corpus.pages), "pages,", len(corpus.targets), "targets")

# four anchor-text terms from the top ten level-1 backlinks
pipe = Pipeline.offline(corpus)
config = SignatureConfig(depth=1, rank_limit=10, radius="anchor", size=4)

for target in corpus.targets[:5]:
    r = rediscover(target, config, pipe)
    print(f"{r.found_rank!s:>4}  {r.ndcg:.2f}  {' '.join(r.signature):40s} {target}")

# whole-page text drags in words that have nothing to do with the target
noisy = synthetic_corpus(noise=True)
pipe = Pipeline.offline(noisy)
for radius in ("anchor", "anchor5", "anchor10", "page"):
    cfg = SignatureConfig(radius=radius, size=4)
    mean = sum(rediscover(t, cfg, pipe).ndcg for t in noisy.targets) / len(noisy.targets)
    print(f"{radius:9s} mean nDCG {mean:.2f}")
