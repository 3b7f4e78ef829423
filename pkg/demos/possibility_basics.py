"""
Possibility distributions in five minutes
=========================================

A possibility distribution grades each state from 0 (impossible) to 1
(fully plausible). Events get two scores: how possible they are, and how
certain.
"""

from pnet import (
    Event,
    MassFunction,
    PossibilityDistribution,
    Semantics,
    StateDomain,
    alpha_cut,
    condition,
    is_consistent,
    mass_to_possibility,
    necessity_measure,
    possibility_measure,
)

weather = StateDomain("weather", ("sun", "cloud", "rain"))
pi = PossibilityDistribution(weather, (1.0, 0.7, 0.2))

dry = Event.from_labels(weather, ["sun", "cloud"])
print("Pi(dry) =", possibility_measure(pi, dry))
print("N(dry)  =", necessity_measure(pi, dry))  # 1 - Pi(rain)

# %%
# Alpha-cuts shrink as the threshold rises.
for alpha in (0.1, 0.5, 0.9):
    print(f"cut at {alpha}:", alpha_cut(pi, alpha).labels)

# %%
# Conditioning on "not sunny" under both semantics. The product rule
# rescales, the min rule lifts the best surviving state to 1.
not_sunny = dry.complement() | Event.from_labels(weather, ["cloud"])
for sem in Semantics:
    print(sem.value, condition(pi, not_sunny, sem).degrees)

# %%
# A random set (masses on subsets) induces a possibility distribution
# through its counter function. Nested focal sets give a normalized one.
m = MassFunction.from_sets(weather, {("sun",): 0.5, ("sun", "cloud"): 0.3, ("sun", "cloud", "rain"): 0.2})
print("counter function:", mass_to_possibility(m).degrees, "consistent:", is_consistent(m))
