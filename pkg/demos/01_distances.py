"""Depth-n distances on the three-state model m1, computed three ways.

m1 has states a, b, c with one fuzzy atom A = (3/10, 1, 0).  State a moves
to b or c with probability 1/2 each, b has no successors (it is blocking)
and c loops on itself.
"""

from pfml import fixtures
from pfml.game import game_chain
from pfml.metrics import describe_witness, kantorovich_chain, stabilized, wasserstein_chain

m1 = fixtures.m1()

# Each engine builds the chain d_0 <= d_1 <= ... independently: transport
# couplings, dual potentials, and the game recursion over polytope vertices.
depth = 4
chains = {
    "wasserstein": wasserstein_chain(m1, depth),
    "kantorovich": kantorovich_chain(m1, depth),
    "game": game_chain(m1, depth),
}

for n in range(depth + 1):
    row = chains["wasserstein"][n]
    cells = "  ".join(f"d({a},{b})={row[a, b]}" for a, b in row.pairs())
    agree = all(chains[k][n].values == row.values for k in chains)
    print(f"n={n}  {cells}  engines agree: {agree}")

# At depth 1 only atoms and blocking are visible: d_1(a,c) = |3/10 - 0|.
# One step later the successors show through: half of a's mass lands on the
# blocking state b, which is at distance 1 from c, so d_2(a,c) = 1/2.
print("optimal coupling for (a,c) at depth 2:", describe_witness(chains["wasserstein"][2].witnesses["a", "c"]))
print("optimal potential for (a,c) at depth 2:", describe_witness(chains["kantorovich"][2].witnesses["a", "c"]))

# Nothing changes after depth 2.  That is only evidence about the unbounded
# distance, not a proof.
print("stabilized at depth", depth, ":", stabilized(chains["wasserstein"]))
