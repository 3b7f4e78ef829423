"""Forward sampling of imprecise datasets from a possibilistic network.

Variables are processed in topological order.  Each one gets an envelope
(its marginal row, or for a child the max over the observed parent
configurations of the table row weighted by the configuration's degree),
an alpha-cut of that envelope at a uniform alpha, and then either the
imprecision blur or a single uniformly chosen member of the cut.

Record ``l`` draws all of its randomness from its own generator, seeded by
``SeedSequence(seed, spawn_key=(l,))``, so a record's content depends only on
the seed and its index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .core import (
    Event,
    PossibilisticNetwork,
    PossibilityDistribution,
    Semantics,
    StateDomain,
    alpha_cut,
)
from .errors import DegenerateDistributionError, SamplingOrderError, SchemaMismatchError


class SamplingMode(str, Enum):
    IMPRECISE_CUT = "imprecise"
    PRECISE_UNIFORM = "precise"


@dataclass(frozen=True)
class SamplerConfig:
    theta_imp: float = 1.0
    mode: SamplingMode = SamplingMode.IMPRECISE_CUT
    seed: int = 0
    record_count: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "mode", SamplingMode(self.mode))
        if not 0.0 <= self.theta_imp <= 1.0:
            raise ValueError(f"theta_imp must lie in [0, 1], got {self.theta_imp}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        if self.record_count < 0:
            raise ValueError("record_count must be non-negative")


@dataclass(frozen=True, eq=False)
class ImpreciseDataset:
    """Set-valued records over a fixed schema.

    ``cells[l, i]`` is the bitmask of the states of variable ``i`` observed in
    record ``l``.
    """

    variables: tuple[StateDomain, ...]
    cells: np.ndarray
    seed: int | None = None
    theta_imp: float | None = None
    mode: SamplingMode | None = None

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        cells = np.array(self.cells, dtype=np.uint64).reshape(-1, len(self.variables))
        for i, v in enumerate(self.variables):
            col = cells[:, i]
            if np.any(col == 0):
                raise SchemaMismatchError(f"empty cell for variable {v.name!r}")
            if np.any(col & ~np.uint64(v.full_mask)):
                raise SchemaMismatchError(f"cell outside the domain of {v.name!r}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        if self.mode is not None:
            object.__setattr__(self, "mode", SamplingMode(self.mode))

    @classmethod
    def from_records(
        cls, variables: Sequence[StateDomain], records: Iterable[Sequence], **metadata
    ) -> "ImpreciseDataset":
        """Build from records whose entries are Events, label iterables or single labels."""
        variables = tuple(variables)
        rows = []
        for rec in records:
            if len(rec) != len(variables):
                raise SchemaMismatchError(f"record has {len(rec)} cells for {len(variables)} variables")
            row = []
            for v, cell in zip(variables, rec):
                if isinstance(cell, Event):
                    if cell.domain != v:
                        raise SchemaMismatchError(f"cell over {cell.domain.name!r} in column {v.name!r}")
                    row.append(cell.mask)
                elif isinstance(cell, str):
                    row.append(1 << v.index(cell))
                else:
                    row.append(Event.from_labels(v, cell).mask)
            rows.append(row)
        cells = np.array(rows, dtype=np.uint64).reshape(len(rows), len(variables))
        return cls(variables, cells, **metadata)

    @property
    def record_count(self) -> int:
        return self.cells.shape[0]

    def __len__(self) -> int:
        return self.cells.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def record(self, l: int) -> tuple[Event, ...]:
        return tuple(Event(v, int(m)) for v, m in zip(self.variables, self.cells[l]))

    @property
    def records(self) -> list[tuple[Event, ...]]:
        return [self.record(l) for l in range(len(self))]

    def __iter__(self) -> Iterator[tuple[Event, ...]]:
        for l in range(len(self)):
            yield self.record(l)

    def take(self, rows: slice | Sequence[int]) -> "ImpreciseDataset":
        return ImpreciseDataset(self.variables, self.cells[rows], self.seed, self.theta_imp, self.mode)

    def cardinalities(self) -> np.ndarray:
        """Number of states in each cell, shape ``(N, n)``."""
        out = np.zeros(self.cells.shape, dtype=np.int64)
        cells = self.cells.copy()
        while np.any(cells):
            out += (cells & np.uint64(1)).astype(np.int64)
            cells >>= np.uint64(1)
        return out

    def is_precise(self) -> bool:
        return bool(np.all(self.cardinalities() == 1))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImpreciseDataset):
            return NotImplemented
        return self.variables == other.variables and np.array_equal(self.cells, other.cells)

    __hash__ = None


# ---------------------------------------------------------------------------
# one variable


def most_possible(envelope: PossibilityDistribution, cut: Event) -> int:
    """Member of ``cut`` with the highest degree; lowest index wins ties."""
    best, top = -1, -1.0
    for k in cut.indices:
        if envelope.degrees[k] > top:
            best, top = k, envelope.degrees[k]
    if best < 0:
        raise ValueError("empty cut has no most possible value")
    return best


def blur_probability(subset_size: int, cut_size: int, theta):
    """Probability that the blur keeps a given best-containing subset of this size."""
    return theta ** (subset_size - 1) * (1 - theta) ** (cut_size - subset_size)


def blur_distribution(cut: Event, best: int, theta) -> dict[int, object]:
    """Exact distribution of :func:`imprecision_blur` outcomes, keyed by mask.

    Works with any numeric type for ``theta``, e.g. ``fractions.Fraction``.
    """
    if best not in cut:
        raise ValueError("best value must belong to the cut")
    others = [k for k in cut.indices if k != best]
    out = {}
    for r in range(len(others) + 1):
        for kept in itertools.combinations(others, r):
            mask = 1 << best
            for k in kept:
                mask |= 1 << k
            out[mask] = blur_probability(r + 1, len(cut), theta)
    return out


def imprecision_blur(cut: Event, best: int, theta: float, rng: np.random.Generator) -> Event:
    """Keep ``best`` and every other member of ``cut`` independently with probability ``theta``."""
    if best not in cut:
        raise ValueError("best value must belong to the cut")
    mask = 1 << best
    others = [k for k in cut.indices if k != best]
    if others:
        u = rng.random(len(others))
        for k, draw in zip(others, u):
            if draw < theta:
                mask |= 1 << k
    return Event(cut.domain, mask)


def draw_alpha(rng: np.random.Generator) -> float:
    # (0, 1]: an alpha of exactly 0 would admit impossible states into the cut
    return 1.0 - rng.random()


def instantiate_variable(
    envelope: PossibilityDistribution,
    config: SamplerConfig,
    rng: np.random.Generator,
    alpha: float | None = None,
) -> Event:
    if alpha is None:
        alpha = draw_alpha(rng)
    cut = alpha_cut(envelope, alpha)
    if not cut:
        raise DegenerateDistributionError(f"empty alpha-cut at alpha={alpha}; envelope not normalized")
    if config.mode is SamplingMode.PRECISE_UNIFORM:
        members = cut.indices
        k = members[int(rng.integers(len(members)))]
        return Event(cut.domain, 1 << k)
    return imprecision_blur(cut, most_possible(envelope, cut), config.theta_imp, rng)


def conditional_envelope(
    net: PossibilisticNetwork,
    child: str,
    observed_parents: Mapping[str, Event],
    parent_envelopes: Mapping[str, PossibilityDistribution],
) -> PossibilityDistribution:
    """Possibility of each child state given set-valued parent observations.

    For every configuration ``a`` in the product of the observed parent sets,
    the configuration degree combines (min or product, per the network) the
    parents' envelope degrees at ``a``; the child degree is the max over ``a``
    of ``table_row(a) * degree(a)``.  The result is max-normalized.
    """
    table = net.table(child)
    if not table.parents:
        return table.rows[0]
    for p in table.parent_names:
        if p not in observed_parents or p not in parent_envelopes:
            raise SamplingOrderError(f"parent {p!r} of {child!r} has not been instantiated")
    sets = [observed_parents[p].indices for p in table.parent_names]
    envs = [parent_envelopes[p].degrees for p in table.parent_names]
    if any(not s for s in sets):
        raise SamplingOrderError(f"empty observation for a parent of {child!r}")
    rows = [r.degrees for r in table.rows]
    radices = [len(p) for p in table.parents]
    degrees = _envelope(rows, radices, sets, envs, net.semantics is Semantics.MIN)
    return PossibilityDistribution(table.child, tuple(degrees))


def _envelope(rows, radices, sets, envs, use_min: bool) -> list[float]:
    best = [0.0] * len(rows[0])
    for config in itertools.product(*sets):
        j = 0
        w = 1.0
        for k, r, env in zip(config, radices, envs):
            j = j * r + k
            w = min(w, env[k]) if use_min else w * env[k]
        if w <= 0.0:
            continue
        row = rows[j]
        for x, d in enumerate(row):
            v = d * w
            if v > best[x]:
                best[x] = v
    top = max(best)
    if top <= 0.0:
        raise DegenerateDistributionError("every compatible parent configuration gives the child degree 0")
    return [b / top for b in best]


# ---------------------------------------------------------------------------
# whole network


def record_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


class _Plan:
    """Per-network lookup tables for the sampling hot loop."""

    def __init__(self, net: PossibilisticNetwork):
        structure = net.structure
        self.n = len(net.variables)
        self.use_min = net.semantics is Semantics.MIN
        self.steps = []
        for name in structure.topological_order():
            i = structure.index(name)
            table = net.table(name)
            rows = [r.degrees for r in table.rows]
            parents = [structure.index(p) for p in table.parent_names]
            radices = [len(p) for p in table.parents]
            root = None
            if not parents:
                top = max(rows[0])
                if top <= 0.0:
                    raise DegenerateDistributionError(f"marginal of {name!r} is all zeros")
                root = [d / top for d in rows[0]]
            self.steps.append((i, rows, parents, radices, root))


def _sample_one(plan: _Plan, config: SamplerConfig, rng: np.random.Generator) -> list[int]:
    masks = [0] * plan.n
    envs: list = [None] * plan.n
    precise = config.mode is SamplingMode.PRECISE_UNIFORM
    theta = config.theta_imp
    for i, rows, parents, radices, root in plan.steps:
        if root is not None:
            env = root
        else:
            sets = [_bits(masks[p]) for p in parents]
            env = _envelope(rows, radices, sets, [envs[p] for p in parents], plan.use_min)
        envs[i] = env
        alpha = 1.0 - rng.random()
        cut = [k for k, d in enumerate(env) if d >= alpha]
        if precise:
            masks[i] = 1 << cut[int(rng.integers(len(cut)))]
            continue
        best = max(cut, key=lambda k: (env[k], -k))
        mask = 1 << best
        others = [k for k in cut if k != best]
        if others:
            for k, draw in zip(others, rng.random(len(others))):
                if draw < theta:
                    mask |= 1 << k
        masks[i] = mask
    return masks


def _bits(mask: int) -> list[int]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


def sample_record(net: PossibilisticNetwork, config: SamplerConfig, index: int) -> tuple[Event, ...]:
    """Record ``index`` of the dataset ``sample_dataset(net, config)`` would produce."""
    masks = _sample_one(_Plan(net), config, record_rng(config.seed, index))
    return tuple(Event(v, m) for v, m in zip(net.variables, masks))


def sample_dataset(
    net: PossibilisticNetwork, config: SamplerConfig, start: int = 0, stop: int | None = None
) -> ImpreciseDataset:
    """Sample records ``start..stop`` (default: all ``config.record_count``)."""
    stop = config.record_count if stop is None else stop
    plan = _Plan(net)
    cells = np.zeros((max(0, stop - start), plan.n), dtype=np.uint64)
    for row, l in enumerate(range(start, stop)):
        cells[row] = _sample_one(plan, config, record_rng(config.seed, l))
    return ImpreciseDataset(net.variables, cells, config.seed, config.theta_imp, config.mode)
