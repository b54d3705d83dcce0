"""Comparing two runs: cosine distance, elementwise KS statistic, total variation.

A fixed seed fixes the sampled circuits, so runs that share a seed differ only
by shot noise and readout errors.  A different seed draws different circuits,
which is a much larger change.
"""

from importlib.resources import files

from subq.mitigation import mitigate
from subq.pipeline import emulate, load_problem
from subq.stats import as_probabilities, cosine_similarity, ks_statistic, total_variation

cim = load_problem(files("subq") / "data" / "h4_chain_sto3g.fcidump")
ref = emulate(cim, seed=1, shots=2000)
noisy = emulate(cim, seed=1, shots=2000, readout_flip_prob=0.05, mitigation=False)
post, _ = mitigate(noisy.counts, noisy.encoding, recovery=False)

runs = {
    "same seed, p=0.05, raw": (noisy.valid, noisy.counts.shots_total),
    "same seed, p=0.05, post-selected": (post, noisy.counts.shots_total),
    "other seed, noiseless": (emulate(cim, seed=2, shots=2000).valid, ref.counts.shots_total),
}
p = as_probabilities(ref.valid, cim.n)
for name, (counts, shots) in runs.items():
    q = as_probabilities(counts, cim.n)
    d, pval = ks_statistic(p, q, ref.counts.shots_total, shots)
    print(
        f"{name:>32}: cosine {cosine_similarity(p, q):.2e}  D {d:.4f}  p-value {pval:.3f}  "
        f"TV {total_variation(p, q):.4f}"
    )
