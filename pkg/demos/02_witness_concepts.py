"""Distinguishing concepts that attain the distance exactly.

For every pair of states the synthesizer builds a concept of rank <= n whose
values at the two states differ by exactly d_n.  It also rebuilds any
non-expansive target function as a concept.
"""

from fractions import Fraction

from pfml import fixtures
from pfml.semantics import eval_concept
from pfml.synthesis import Synthesizer
from pfml.syntax import rank, to_text

m2 = fixtures.m2()
synth = Synthesizer(m2)

for n in range(4):
    for a, b in synth.distances(n).pairs():
        cert = synth.certificate(n, a, b)
        status = "VALID" if cert.valid else "INVALID"
        print(f"n={n} ({a},{b}) d={cert.claimed}  achieved={cert.achieved}  {status}  {to_text(cert.concept)}")

# Any function that is non-expansive for d_2 is the valuation of some rank-2
# concept.  Here the target halves the distance from p.
d2 = synth.distances(2)
target = {s: d2[("p", s)] / 2 for s in m2.states}
concept = synth.reconstruct_function(2, target)
values = eval_concept(m2, concept)
print("target:", {s: str(v) for s, v in target.items()})
print("values:", {s: str(v) for s, v in values.items()})
print("exact:", values == target, " rank:", rank(concept))

# Targets that move faster than the distance allows are rejected.
try:
    synth.reconstruct_function(1, {"p": Fraction(0), "q": Fraction(1)})
except Exception as exc:
    print("rejected:", exc)
