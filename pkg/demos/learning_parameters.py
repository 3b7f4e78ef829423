"""
Learning conditional tables from imprecise records
==================================================

Three estimators share the same counts: the possibilistic maximum
likelihood estimate, a membership histogram, and the random-set MLE.
"""

import numpy as np

from pnet import (
    ImprecisionBudget,
    NetworkStructure,
    PossibilisticNetwork,
    SamplerConfig,
    StateDomain,
    count_possibilistic,
    learn_parameters,
    mass_to_possibility,
    possibilistic_loglik,
    possibilistic_mle_raw,
    sample_dataset,
)

X = StateDomain("X", ("x1", "x2", "x3"))
Y = StateDomain("Y", ("y1", "y2"))
structure = NetworkStructure((X, Y), [("X", "Y")])
gold = PossibilisticNetwork.from_arrays(
    structure, {"X": [[1.0, 0.6, 0.3]], "Y": [[1.0, 0.3], [0.6, 1.0], [1.0, 1.0]]}
)
data = sample_dataset(gold, SamplerConfig(1.0, "imprecise", 2024, 5000))

# %%
# Raw estimates sum to the imprecision budget S. Max-normalizing removes S.
counts = count_possibilistic(data, structure)
for S in (1.0, 2.5):
    raw = possibilistic_mle_raw(counts, ImprecisionBudget.uniform(S))["X"][0]
    print(f"S={S}: raw", raw.round(3), "normalized", (raw / raw.max()).round(3))

# %%
learned = learn_parameters(data, structure, estimator="pml")
for table in learned.tables:
    print(table.child.name, np.round(table.array, 3).tolist())
print("log-likelihood of the data:", possibilistic_loglik(learned, structure, data))

# %%
# The random-set estimator returns masses over observed cells. Their
# counter function matches the histogram estimate.
masses = learn_parameters(data, structure, estimator="rset")
print("X from masses:", mass_to_possibility(masses["X"][0]).degrees)
print("X histogram:  ", learn_parameters(data, structure, estimator="histogram").table("X").rows[0].degrees)
