"""Neighbourhoods, unravellings and what modal concepts can see.

A concept of rank k only looks k steps ahead, so cutting the model down to
the radius-k ball around a state, or unravelling it into a depth-k tree,
leaves the depth-k distance at 0.  One step further the cut can show.
"""

from pfml import fixtures
from pfml.metrics import cross_distance, locality_check
from pfml.model import restrict, unravel
from pfml.syntax import parse_concept, parse_formula, standard_translation

m1 = fixtures.m1()

ball = restrict(m1, "a", 1)
print("restrict(m1, a, 1) states:", ball.states, " blocking:", [s for s in ball.states if ball.is_blocking(s)])
for n in range(4):
    print(f"  d_{n}(a, a in the ball) =", cross_distance(m1, "a", ball, "a", n))

tree, root = unravel(m1, "a", 2)
print("unravel(m1, a, 2) states:", tree.states)
for n in range(4):
    print(f"  d_{n}(a, root) =", cross_distance(m1, "a", tree, root, n))

# First-order translations of modal concepts are local ...
phi = standard_translation(parse_concept("<r> A"))
res = locality_check(m1, "a", phi, 2)
print(f"ST(<r> A) at a: full {res.full}, radius 2 {res.restricted}, equal {res.equal}")

# ... but an unrestricted existential is not: from c the radius-1 ball
# misses b, which carries A = 1.
res = locality_check(m1, "c", parse_formula("E y. A(y)"), 1)
print(f"E y. A(y) at c: full {res.full}, radius 1 {res.restricted}, equal {res.equal}")
