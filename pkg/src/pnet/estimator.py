"""Parameter learning from imprecise data.

Two counting schemes feed the estimators.  Possibilistic counts ``N[j, k]``
tally the records of parent configuration ``j`` whose cell contains state
``k``.  Random-set counts tally the records of configuration ``j`` whose
cell is exactly a given subset.  A record matches configuration ``j`` when
each parent's state in ``j`` belongs to that record's parent cell, so a
record with imprecise parents contributes to several configurations.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence, Union

import numpy as np

from .core import (
    MassFunction,
    NetworkStructure,
    PossibilisticNetwork,
    PossibilityDistribution,
    Semantics,
    mass_to_possibility,
)
from .errors import SchemaMismatchError
from .sampler import ImpreciseDataset


class CountMode(str, Enum):
    POSSIBILISTIC = "possibilistic"
    RANDOM_SET = "random_set"


class Estimator(str, Enum):
    POSSIBILISTIC_MLE = "pml"
    HISTOGRAM = "histogram"
    RANDOM_SET_MLE = "rset"


@dataclass(frozen=True, eq=False)
class CountTensor:
    """Occurrence counts per variable.

    In possibilistic mode ``counts[name]`` is an int array of shape
    ``(q, r)``.  In random-set mode it is a tuple of ``q`` dicts mapping an
    observed cell mask to its count.  ``totals[name][j]`` is the number of
    records matching parent configuration ``j``.
    """

    mode: CountMode
    structure: NetworkStructure
    counts: dict
    totals: dict

    def __add__(self, other: "CountTensor") -> "CountTensor":
        if self.mode != other.mode or self.structure != other.structure:
            raise ValueError("can only merge counts of the same mode and structure")
        if self.mode is CountMode.POSSIBILISTIC:
            counts = {n: self.counts[n] + other.counts[n] for n in self.counts}
        else:
            counts = {
                n: tuple(dict(Counter(a) + Counter(b)) for a, b in zip(self.counts[n], other.counts[n]))
                for n in self.counts
            }
        totals = {n: self.totals[n] + other.totals[n] for n in self.totals}
        return CountTensor(self.mode, self.structure, counts, totals)


@dataclass(frozen=True)
class ImprecisionBudget:
    """Prescribed row sum ``S_i > 0`` of each variable's raw estimate."""

    values: Mapping[str, float] = field(default_factory=dict)
    default: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))
        for name, s in [*self.values.items(), ("<default>", self.default)]:
            if not (s > 0 and math.isfinite(s)):
                raise ValueError(f"imprecision budget for {name} must be positive, got {s}")

    def __getitem__(self, name: str) -> float:
        return float(self.values.get(name, self.default))

    @classmethod
    def uniform(cls, s: float = 1.0) -> "ImprecisionBudget":
        return cls({}, s)

    @classmethod
    def mean_cardinality(cls, data: ImpreciseDataset) -> "ImprecisionBudget":
        """Budget of each variable set to its mean observed cell size (1 on empty data)."""
        if len(data) == 0:
            return cls.uniform()
        card = data.cardinalities().mean(axis=0)
        return cls({v.name: float(c) for v, c in zip(data.variables, card)})


# ---------------------------------------------------------------------------
# counting


def _check_schema(data: ImpreciseDataset, structure: NetworkStructure):
    if tuple(data.variables) != tuple(structure.variables):
        raise SchemaMismatchError(
            f"dataset columns {list(data.names)} do not match the structure's variables "
            f"{list(structure.names)} (names, states and order must agree)"
        )


def _membership(col: np.ndarray, r: int) -> np.ndarray:
    """Bool array ``(N, r)``: state ``k`` belongs to the cell of record ``l``."""
    shifts = np.arange(r, dtype=np.uint64)
    return ((col[:, None] >> shifts[None, :]) & np.uint64(1)).astype(bool)


def _config_match(data: ImpreciseDataset, structure: NetworkStructure, name: str) -> np.ndarray:
    """Bool array ``(N, q)``: record ``l`` is compatible with parent configuration ``j``."""
    n = len(data)
    match = np.ones((n, 1), dtype=bool)
    for p in structure.parents(name):
        dom = structure.domain(p)
        mem = _membership(data.cells[:, structure.index(p)], len(dom))
        match = (match[:, :, None] & mem[:, None, :]).reshape(n, match.shape[1] * len(dom))
    return match


def count_possibilistic(data: ImpreciseDataset, structure: NetworkStructure) -> CountTensor:
    structure = getattr(structure, "structure", structure)
    _check_schema(data, structure)
    counts, totals = {}, {}
    for i, v in enumerate(structure.variables):
        match = _config_match(data, structure, v.name).astype(np.int64)
        child = _membership(data.cells[:, i], len(v)).astype(np.int64)
        counts[v.name] = match.T @ child
        totals[v.name] = match.sum(axis=0)
    return CountTensor(CountMode.POSSIBILISTIC, structure, counts, totals)


def count_random_set(data: ImpreciseDataset, structure: NetworkStructure) -> CountTensor:
    structure = getattr(structure, "structure", structure)
    _check_schema(data, structure)
    counts, totals = {}, {}
    for i, v in enumerate(structure.variables):
        match = _config_match(data, structure, v.name)
        q = match.shape[1]
        cells: list[dict[int, int]] = [dict() for _ in range(q)]
        rows, js = np.nonzero(match)
        if len(rows):
            pairs = np.stack([js.astype(np.uint64), data.cells[rows, i]], axis=1)
            uniq, n = np.unique(pairs, axis=0, return_counts=True)
            for (j, mask), c in zip(uniq.tolist(), n.tolist()):
                cells[int(j)][int(mask)] = int(c)
        counts[v.name] = tuple(cells)
        totals[v.name] = match.sum(axis=0).astype(np.int64)
    return CountTensor(CountMode.RANDOM_SET, structure, counts, totals)


def _require(counts: CountTensor, mode: CountMode):
    if counts.mode is not mode:
        raise ValueError(f"expected {mode.value} counts, got {counts.mode.value}")


# ---------------------------------------------------------------------------
# estimators


def histogram_estimate(counts: CountTensor) -> dict[str, list[PossibilityDistribution | None]]:
    """Sub-normalized estimate ``N[j, k] / N_j``; ``None`` marks unseen configurations."""
    _require(counts, CountMode.POSSIBILISTIC)
    out = {}
    for v in counts.structure.variables:
        rows = []
        for j, total in enumerate(counts.totals[v.name]):
            if total == 0:
                rows.append(None)
            else:
                rows.append(PossibilityDistribution(v, tuple(counts.counts[v.name][j] / total)))
        out[v.name] = rows
    return out


def random_set_mle(counts: CountTensor) -> dict[str, list[MassFunction | None]]:
    """Relative frequency of each observed cell; ``None`` marks unseen configurations."""
    _require(counts, CountMode.RANDOM_SET)
    out = {}
    for v in counts.structure.variables:
        rows = []
        for cell in counts.counts[v.name]:
            total = sum(cell.values())
            if total == 0:
                rows.append(None)
            else:
                rows.append(MassFunction(v, tuple((mask, c / total) for mask, c in cell.items())))
        out[v.name] = rows
    return out


def possibilistic_mle_raw(counts: CountTensor, budget: ImprecisionBudget | None = None) -> dict[str, np.ndarray]:
    """Closed-form maximizer of the possibilistic likelihood under ``sum_k pi[j, k] = S``.

    Rows whose counts are all zero are smoothed to all-ones counts first.
    Returned arrays have shape ``(q, r)`` and rows summing to the budget.
    """
    _require(counts, CountMode.POSSIBILISTIC)
    budget = budget or ImprecisionBudget()
    out = {}
    for v in counts.structure.variables:
        n = counts.counts[v.name].astype(float)
        empty = n.sum(axis=1) == 0
        n[empty] = 1.0
        out[v.name] = n / n.sum(axis=1, keepdims=True) * budget[v.name]
    return out


def possibilistic_mle(
    counts: CountTensor, budget: ImprecisionBudget | None = None
) -> dict[str, list[PossibilityDistribution]]:
    """Max-normalized possibilistic MLE; the budget cancels out."""
    out = {}
    for name, raw in possibilistic_mle_raw(counts, budget).items():
        dom = counts.structure.domain(name)
        norm = raw / raw.max(axis=1, keepdims=True)
        out[name] = [PossibilityDistribution(dom, tuple(row)) for row in norm]
    return out


# ---------------------------------------------------------------------------
# likelihoods


def _xlogy_sum(n: np.ndarray, p: np.ndarray) -> float:
    n = np.asarray(n, dtype=float)
    p = np.asarray(p, dtype=float)
    hit = n > 0
    if np.any(p[hit] <= 0):
        return -math.inf
    return math.fsum((n[hit] * np.log(p[hit])).tolist())


def _param_rows(params, name: str, q: int, r: int) -> np.ndarray:
    if isinstance(params, PossibilisticNetwork):
        return params.table(name).array
    rows = params[name]
    arr = np.zeros((q, r))
    for j, row in enumerate(rows):
        if row is None:
            continue
        arr[j] = row.degrees if isinstance(row, PossibilityDistribution) else np.asarray(row, dtype=float)
    return arr


def possibilistic_loglik(
    params: Union[PossibilisticNetwork, Mapping[str, Sequence]],
    structure: NetworkStructure,
    data: ImpreciseDataset,
) -> float:
    """Sum over variables, configurations and states of ``N[j, k] * log pi[j, k]``.

    ``params`` is a network or a mapping from variable name to rows (arrays or
    distributions); rows need not be normalized.  States that are never
    counted contribute nothing; a counted state of degree 0 gives ``-inf``.
    """
    counts = count_possibilistic(data, structure)
    total = 0.0
    for v in counts.structure.variables:
        n = counts.counts[v.name]
        total += _xlogy_sum(n, _param_rows(params, v.name, *n.shape))
    return total


def random_set_loglik(
    masses: Mapping[str, Sequence[MassFunction | None]],
    structure: NetworkStructure,
    data: ImpreciseDataset,
) -> float:
    """Sum over observed cells of ``count * log m(cell)``; ``-inf`` if an observed cell has no mass."""
    counts = count_random_set(data, structure)
    terms = []
    for v in counts.structure.variables:
        for j, cell in enumerate(counts.counts[v.name]):
            if not cell:
                continue
            m = masses[v.name][j]
            for mask, c in cell.items():
                mass = 0.0 if m is None else m[mask]
                if mass <= 0.0:
                    return -math.inf
                terms.append(c * math.log(mass))
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# learning


def learn_parameters(
    data: ImpreciseDataset,
    structure: Union[NetworkStructure, PossibilisticNetwork],
    budget: ImprecisionBudget | None = None,
    estimator: Estimator = Estimator.POSSIBILISTIC_MLE,
    semantics: Semantics = Semantics.PRODUCT,
):
    """Fill every table of ``structure`` from ``data``.

    Returns a normalized :class:`PossibilisticNetwork` for the possibilistic
    and histogram estimators.  Unseen parent configurations get total
    ignorance.  ``RANDOM_SET_MLE`` returns the per-configuration mass
    functions instead (``None`` for unseen configurations).
    """
    structure = getattr(structure, "structure", structure)
    estimator = Estimator(estimator)
    if estimator is Estimator.RANDOM_SET_MLE:
        return random_set_mle(count_random_set(data, structure))
    counts = count_possibilistic(data, structure)
    if estimator is Estimator.POSSIBILISTIC_MLE:
        rows = {n: [r.degrees for r in rs] for n, rs in possibilistic_mle(counts, budget).items()}
    else:
        hist = histogram_estimate(counts)
        rows = {
            v.name: [(1.0,) * len(v) if r is None else tuple(np.array(r.degrees) / r.max) for r in hist[v.name]]
            for v in structure.variables
        }
    return PossibilisticNetwork.from_arrays(structure, rows, Semantics(semantics))


def network_from_masses(
    structure: NetworkStructure,
    masses: Mapping[str, Sequence[MassFunction | None]],
    semantics: Semantics = Semantics.PRODUCT,
) -> PossibilisticNetwork:
    """Network whose rows are the max-normalized counter functions of ``masses``."""
    structure = getattr(structure, "structure", structure)
    rows = {}
    for v in structure.variables:
        out = []
        for m in masses[v.name]:
            if m is None:
                out.append((1.0,) * len(v))
            else:
                pi = mass_to_possibility(m)
                out.append(tuple(d / pi.max for d in pi.degrees))
        rows[v.name] = out
    return PossibilisticNetwork.from_arrays(structure, rows, Semantics(semantics))
