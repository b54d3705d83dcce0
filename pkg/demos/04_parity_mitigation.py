"""Readout bit-flips and the single-parity-bit code.

Index i is stored as (i << 1) | parity(i), so every valid string has even
weight.  A single flip makes the weight odd and the shot is flagged.  Flagged
shots can be dropped or reassigned to the most populated valid neighbour.
"""

from importlib.resources import files

from subq.mitigation import EncodingMap, mitigate
from subq.pipeline import decode_unmitigated, emulate, load_problem
from subq.stats import as_probabilities, cosine_similarity

enc = EncodingMap(q=2, n=3)
for i in range(3):
    print(f"index {i} -> {enc.bits(i)}")
for bits in ("011", "010", "110"):
    print(f"{bits}: {enc.decode(bits).kind.value}")

cim = load_problem(files("subq") / "data" / "h4_chain_sto3g.fcidump")
clean = emulate(cim, seed=3, shots=2000)
noisy = emulate(cim, seed=3, shots=2000, readout_flip_prob=0.05)
print("\nnoiseless:", clean.mitigation.to_text().strip())
print("p=0.05:   ", noisy.mitigation.to_text().strip())

ref = as_probabilities(clean.valid, cim.n)
plain, _ = decode_unmitigated(noisy.counts, noisy.encoding)
post, _ = mitigate(noisy.counts, noisy.encoding, recovery=False)
rec, _ = mitigate(noisy.counts, noisy.encoding, recovery=True)
for name, counts in (("no mitigation", plain), ("post-selection", post), ("with recovery", rec)):
    print(f"{name:>15}: cosine distance {cosine_similarity(as_probabilities(counts, cim.n), ref):.2e}")
