"""Playing the bounded bisimulation game on m1 from (a, c).

Duplicator wins the two-round game at deviation eps exactly when
eps >= d_2(a, c) = 1/2.  Below that, Spoiler has a winning reply to every
coupling Duplicator announces.
"""

from fractions import Fraction

from pfml import fixtures
from pfml.game import extract_strategy, game_value, verify_strategy

m1 = fixtures.m1()
value = game_value(m1, 2, "a", "c")
print("game value G_2(a, c) =", value)

dup = extract_strategy(m1, 2, "a", "c", value)
coupling, split = dup.moves["a", "c", 2]
for pair, mass in coupling.items():
    print(f"Duplicator puts mass {mass} on {pair} and allots deviation {split[pair]}")
print("Duplicator strategy verifies at eps = 1/2:", bool(verify_strategy(m1, dup)))

# The same moves fail with a smaller budget; the trace shows where.
verdict = verify_strategy(m1, dup, eps=Fraction(1, 4))
print("...and at eps = 1/4:", bool(verdict))
for line in verdict.trace:
    print("   ", line)

spoiler = extract_strategy(m1, 2, "a", "c", Fraction(1, 4))
print("Spoiler strategy verifies at eps = 1/4:", bool(verify_strategy(m1, spoiler)))
