"""
Sample, learn, compare
======================

A full experiment: draw records from a gold network, hold some back,
learn from the rest, and measure how far the learned tables are from
the gold ones.
"""

from pnet import ExperimentConfig, NetworkStructure, PossibilisticNetwork, StateDomain, run_experiment

A = StateDomain("A", ("a1", "a2"))
B = StateDomain("B", ("b1", "b2"))
C = StateDomain("C", ("c1", "c2"))
gold = PossibilisticNetwork.from_arrays(
    NetworkStructure((A, B, C), [("A", "B"), ("B", "C")]),
    {"A": [[1.0, 0.6]], "B": [[1.0, 0.3], [0.6, 1.0]], "C": [[0.3, 1.0], [1.0, 0.6]]},
)

report = run_experiment(ExperimentConfig(gold, record_count=2000, theta_imp=1.0, seed=5, holdout=0.2))
print(report.to_text())

# %%
# Precision matters. Below theta = 1 non-modal states are under-reported,
# so the learned tables drift towards sharper distributions however much
# data is used.
for theta in (1.0, 0.6, 0.3):
    for n in (100, 10_000):
        dists = [run_experiment(ExperimentConfig(gold, n, theta, seed)).mean_cpt_distance for seed in range(5)]
        print(f"theta={theta} N={n:>6}: mean cpt distance {sum(dists) / len(dists):.3f}")
