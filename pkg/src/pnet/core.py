"""Possibility distributions, mass functions and possibilistic networks.

Events and focal sets are integer bitmasks over a domain's state order: bit
``k`` set means state ``k`` is a member.  All objects are immutable.
"""

from __future__ import annotations

import heapq
import itertools
import math
import os
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, reduce
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import (
    CycleError,
    DegenerateDistributionError,
    DomainMismatchError,
    ImpossibleEvidenceError,
    OmegaCapExceeded,
    StructureError,
)

TOL = 1e-9
DEFAULT_OMEGA_CAP = 2**20
MAX_STATES = 64


def omega_cap() -> int:
    """Joint-enumeration cap, overridable through ``PNET_OMEGA_CAP``."""
    raw = os.environ.get("PNET_OMEGA_CAP")
    if raw is None or raw.strip() == "":
        return DEFAULT_OMEGA_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError(f"PNET_OMEGA_CAP must be a positive integer, got {raw!r}")
    return cap


class Semantics(str, Enum):
    MIN = "min"
    PRODUCT = "product"

    def combine(self, values: Iterable[float]) -> float:
        if self is Semantics.MIN:
            return min(values, default=1.0)
        return math.prod(values)

    @property
    def ufunc(self) -> np.ufunc:
        return np.minimum if self is Semantics.MIN else np.multiply


# ---------------------------------------------------------------------------
# domains, events, distributions


@dataclass(frozen=True)
class StateDomain:
    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise ValueError(f"variable {self.name!r} needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"variable {self.name!r} has duplicate state labels")
        if len(self.states) > MAX_STATES:
            raise ValueError(f"variable {self.name!r} has more than {MAX_STATES} states")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.states)) - 1

    def index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise KeyError(f"{label!r} is not a state of {self.name!r}") from None


@dataclass(frozen=True)
class Event:
    """A subset of a domain, stored as a bitmask over state indices."""

    domain: StateDomain
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask > self.domain.full_mask:
            raise ValueError(f"mask {self.mask:#x} out of range for {self.domain.name!r}")

    @classmethod
    def from_indices(cls, domain: StateDomain, indices: Iterable[int]) -> "Event":
        mask = 0
        for k in indices:
            if not 0 <= k < len(domain):
                raise IndexError(f"state index {k} out of range for {domain.name!r}")
            mask |= 1 << k
        return cls(domain, mask)

    @classmethod
    def from_labels(cls, domain: StateDomain, labels: Iterable[str]) -> "Event":
        return cls.from_indices(domain, (domain.index(s) for s in labels))

    @classmethod
    def full(cls, domain: StateDomain) -> "Event":
        return cls(domain, domain.full_mask)

    @classmethod
    def empty(cls, domain: StateDomain) -> "Event":
        return cls(domain, 0)

    @property
    def indices(self) -> tuple[int, ...]:
        return mask_indices(self.mask)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.domain.states[k] for k in self.indices)

    def __contains__(self, k: int) -> bool:
        return bool(self.mask >> k & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def complement(self) -> "Event":
        return Event(self.domain, self.domain.full_mask & ~self.mask)

    def _check(self, other: "Event"):
        if other.domain != self.domain:
            raise DomainMismatchError(f"events over {self.domain.name!r} and {other.domain.name!r}")

    def __or__(self, other: "Event") -> "Event":
        self._check(other)
        return Event(self.domain, self.mask | other.mask)

    def __and__(self, other: "Event") -> "Event":
        self._check(other)
        return Event(self.domain, self.mask & other.mask)

    def issubset(self, other: "Event") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0


def mask_indices(mask: int) -> tuple[int, ...]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


@dataclass(frozen=True)
class PossibilityDistribution:
    domain: StateDomain
    degrees: tuple[float, ...]

    def __post_init__(self):
        degrees = tuple(float(d) for d in self.degrees)
        if len(degrees) != len(self.domain):
            raise ValueError(
                f"{len(degrees)} degrees given for {len(self.domain)} states of {self.domain.name!r}"
            )
        for d in degrees:
            if not (-TOL <= d <= 1 + TOL) or math.isnan(d):
                raise ValueError(f"degree {d} outside [0, 1]")
        object.__setattr__(self, "degrees", tuple(min(1.0, max(0.0, d)) for d in degrees))

    @classmethod
    def from_mapping(cls, domain: StateDomain, degrees: Mapping[str, float]) -> "PossibilityDistribution":
        return cls(domain, tuple(float(degrees.get(s, 0.0)) for s in domain.states))

    def __getitem__(self, k: int) -> float:
        return self.degrees[k]

    def __len__(self) -> int:
        return len(self.degrees)

    @property
    def max(self) -> float:
        return max(self.degrees)

    @property
    def is_normalized(self) -> bool:
        return abs(self.max - 1.0) <= TOL

    def as_array(self) -> np.ndarray:
        return np.array(self.degrees)

    def allclose(self, other: "PossibilityDistribution", atol: float = TOL) -> bool:
        return self.domain == other.domain and all(
            abs(a - b) <= atol for a, b in zip(self.degrees, other.degrees)
        )


def _same_domain(dist: PossibilityDistribution, a: Event):
    if dist.domain != a.domain:
        raise DomainMismatchError(
            f"event over {a.domain.name!r} used with a distribution over {dist.domain.name!r}"
        )


def possibility_measure(dist: PossibilityDistribution, a: Event) -> float:
    """Max degree over the members of ``a``; 0 for the empty event."""
    _same_domain(dist, a)
    return max((dist.degrees[k] for k in a.indices), default=0.0)


def necessity_measure(dist: PossibilityDistribution, a: Event) -> float:
    _same_domain(dist, a)
    return 1.0 - possibility_measure(dist, a.complement())


def condition(
    dist: PossibilityDistribution, a: Event, semantics: Semantics = Semantics.PRODUCT
) -> PossibilityDistribution:
    """Revise ``dist`` by the certain evidence ``a``.

    Product conditioning rescales the degrees inside ``a`` by its possibility;
    min conditioning lifts the most possible members of ``a`` to 1 and keeps
    the rest.  Both zero out states outside ``a``.
    """
    poss = possibility_measure(dist, a)
    if poss <= 0.0:
        raise ImpossibleEvidenceError("conditioning on impossible evidence")
    semantics = Semantics(semantics)
    out = [0.0] * len(dist)
    for k in a.indices:
        d = dist.degrees[k]
        if semantics is Semantics.PRODUCT:
            out[k] = d / poss
        else:
            out[k] = 1.0 if abs(d - poss) <= TOL else d
    return PossibilityDistribution(dist.domain, tuple(out))


def alpha_cut(dist: PossibilityDistribution, alpha: float) -> Event:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    mask = 0
    for k, d in enumerate(dist.degrees):
        if d >= alpha:
            mask |= 1 << k
    return Event(dist.domain, mask)


def normalize(dist: PossibilityDistribution) -> PossibilityDistribution:
    top = dist.max
    if top <= 0.0:
        raise DegenerateDistributionError(
            f"degenerate distribution over {dist.domain.name!r}: all degrees are zero"
        )
    return PossibilityDistribution(dist.domain, tuple(d / top for d in dist.degrees))


# ---------------------------------------------------------------------------
# random sets


@dataclass(frozen=True)
class MassFunction:
    """Probability masses on nonempty focal sets (bitmasks) of a domain."""

    domain: StateDomain
    focal: tuple[tuple[int, float], ...]

    def __post_init__(self):
        merged: dict[int, float] = {}
        for mask, mass in self.focal:
            mask = int(mask)
            mass = float(mass)
            if mask == 0:
                raise ValueError("the empty set cannot carry mass")
            if mask & ~self.domain.full_mask:
                raise ValueError(f"focal set {mask:#x} outside the domain of {self.domain.name!r}")
            if not 0.0 < mass <= 1.0 + TOL:
                raise ValueError(f"mass {mass} outside (0, 1]")
            merged[mask] = merged.get(mask, 0.0) + mass
        total = math.fsum(merged.values())
        if abs(total - 1.0) > TOL:
            raise ValueError(f"masses sum to {total}, not 1")
        object.__setattr__(self, "focal", tuple(sorted(merged.items())))

    @classmethod
    def from_sets(cls, domain: StateDomain, masses: Mapping[Iterable[str], float]) -> "MassFunction":
        focal = [(Event.from_labels(domain, labels).mask, m) for labels, m in masses.items()]
        return cls(domain, tuple(focal))

    def __getitem__(self, key: Union[int, Event]) -> float:
        mask = key.mask if isinstance(key, Event) else key
        return dict(self.focal).get(mask, 0.0)

    def items(self) -> Iterator[tuple[Event, float]]:
        for mask, m in self.focal:
            yield Event(self.domain, mask), m


def mass_to_possibility(m: MassFunction) -> PossibilityDistribution:
    """Counter function: the possibility of a state is the total mass of the focal sets containing it."""
    degrees = []
    for k in range(len(m.domain)):
        degrees.append(math.fsum(mass for mask, mass in m.focal if mask >> k & 1))
    return PossibilityDistribution(m.domain, tuple(degrees))


def is_consistent(m: MassFunction) -> bool:
    common = reduce(lambda acc, f: acc & f[0], m.focal, m.domain.full_mask)
    return common != 0


# ---------------------------------------------------------------------------
# networks


@dataclass(frozen=True)
class ConditionalPossibilityTable:
    """Rows are indexed row-major over parent state indices, first parent most significant."""

    child: StateDomain
    parents: tuple[StateDomain, ...]
    rows: tuple[PossibilityDistribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "rows", tuple(self.rows))
        expected = math.prod(len(p) for p in self.parents)
        if len(self.rows) != expected:
            raise StructureError(
                f"table of {self.child.name!r} has {len(self.rows)} rows, expected {expected}"
            )
        for row in self.rows:
            if row.domain != self.child:
                raise DomainMismatchError(f"row over {row.domain.name!r} in table of {self.child.name!r}")

    @classmethod
    def from_array(
        cls, child: StateDomain, parents: Sequence[StateDomain], rows: Sequence[Sequence[float]]
    ) -> "ConditionalPossibilityTable":
        return cls(child, tuple(parents), tuple(PossibilityDistribution(child, tuple(r)) for r in rows))

    @property
    def parent_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parents)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def row_index(self, config: Sequence[int]) -> int:
        if len(config) != len(self.parents):
            raise StructureError(
                f"{len(config)} parent states given for {len(self.parents)} parents of {self.child.name!r}"
            )
        j = 0
        for k, p in zip(config, self.parents):
            if not 0 <= k < len(p):
                raise StructureError(f"state index {k} out of range for parent {p.name!r}")
            j = j * len(p) + k
        return j

    def row(self, config: Sequence[int] = ()) -> PossibilityDistribution:
        return self.rows[self.row_index(config)]

    def configurations(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(len(p)) for p in self.parents))

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array([r.degrees for r in self.rows], dtype=float)
        arr.setflags(write=False)
        return arr

    @property
    def is_normalized(self) -> bool:
        return all(r.is_normalized for r in self.rows)


@dataclass(frozen=True)
class NetworkStructure:
    """A DAG over named discrete variables.

    The parent order of a variable is the order in which its incoming edges
    appear in ``edges``.
    """

    variables: tuple[StateDomain, ...]
    edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "edges", tuple((str(p), str(c)) for p, c in self.edges))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise StructureError("duplicate variable names")
        known = set(names)
        seen = set()
        for p, c in self.edges:
            for end in (p, c):
                if end not in known:
                    raise StructureError(f"edge {p} -> {c} refers to unknown variable {end!r}")
            if p == c:
                raise CycleError((p, c))
            if (p, c) in seen:
                raise StructureError(f"duplicate edge {p} -> {c}")
            seen.add((p, c))
        self.topological_order()

    @cached_property
    def _index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def domain(self, name: str) -> StateDomain:
        return self.variables[self.index(name)]

    def parents(self, name: str) -> tuple[str, ...]:
        self.index(name)
        return tuple(p for p, c in self.edges if c == name)

    def parent_domains(self, name: str) -> tuple[StateDomain, ...]:
        return tuple(self.domain(p) for p in self.parents(name))

    def n_configurations(self, name: str) -> int:
        return math.prod(len(d) for d in self.parent_domains(name))

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; ties go to the variable declared first."""
        n = len(self.variables)
        pos = {v.name: i for i, v in enumerate(self.variables)}
        indeg = [0] * n
        children: list[list[int]] = [[] for _ in range(n)]
        for p, c in self.edges:
            indeg[pos[c]] += 1
            children[pos[p]].append(pos[c])
        heap = [i for i in range(n) if indeg[i] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            i = heapq.heappop(heap)
            order.append(i)
            for c in children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, c)
        if len(order) < n:
            raise CycleError(self._edge_on_cycle(set(range(n)) - set(order)))
        return [self.variables[i].name for i in order]

    def _edge_on_cycle(self, remaining: set[int]) -> tuple[str, str]:
        # every remaining node keeps a remaining parent; walking parents must revisit a node
        name = {i: v.name for i, v in enumerate(self.variables)}
        pos = {v: i for i, v in name.items()}
        parent_of = {}
        for p, c in self.edges:
            if pos[p] in remaining and pos[c] in remaining:
                parent_of.setdefault(pos[c], pos[p])
        node = min(remaining)
        visited = set()
        while node not in visited:
            visited.add(node)
            node = parent_of[node]
        return name[parent_of[node]], name[node]


@dataclass(frozen=True)
class PossibilisticNetwork:
    """DAG plus one conditional possibility table per variable (declaration order)."""

    variables: tuple[StateDomain, ...]
    edges: tuple[tuple[str, str], ...]
    tables: tuple[ConditionalPossibilityTable, ...]
    semantics: Semantics = Semantics.PRODUCT

    def __post_init__(self):
        object.__setattr__(self, "semantics", Semantics(self.semantics))
        structure = NetworkStructure(self.variables, self.edges)
        object.__setattr__(self, "variables", structure.variables)
        object.__setattr__(self, "edges", structure.edges)
        tables = self.tables
        if isinstance(tables, Mapping):
            missing = [v.name for v in structure.variables if v.name not in tables]
            if missing:
                raise StructureError(f"no table for {', '.join(missing)}")
            tables = tuple(tables[v.name] for v in structure.variables)
        tables = tuple(tables)
        if len(tables) != len(structure.variables):
            raise StructureError(f"{len(tables)} tables for {len(structure.variables)} variables")
        for var, table in zip(structure.variables, tables):
            if table.child != var:
                raise StructureError(f"table for {table.child.name!r} placed at variable {var.name!r}")
            if table.parents != structure.parent_domains(var.name):
                raise StructureError(
                    f"table of {var.name!r} has parents {list(table.parent_names)}, "
                    f"edges give {list(structure.parents(var.name))}"
                )
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "_structure", structure)

    @classmethod
    def from_arrays(
        cls,
        structure: NetworkStructure,
        rows: Mapping[str, Sequence[Sequence[float]]],
        semantics: Semantics = Semantics.PRODUCT,
    ) -> "PossibilisticNetwork":
        tables = tuple(
            ConditionalPossibilityTable.from_array(v, structure.parent_domains(v.name), rows[v.name])
            for v in structure.variables
        )
        return cls(structure.variables, structure.edges, tables, semantics)

    @property
    def structure(self) -> NetworkStructure:
        return self._structure

    @property
    def names(self) -> tuple[str, ...]:
        return self._structure.names

    def table(self, name: str) -> ConditionalPossibilityTable:
        return self.tables[self._structure.index(name)]

    def parents(self, name: str) -> tuple[str, ...]:
        return self._structure.parents(name)

    def with_semantics(self, semantics: Semantics) -> "PossibilisticNetwork":
        return PossibilisticNetwork(self.variables, self.edges, self.tables, Semantics(semantics))

    @property
    def is_normalized(self) -> bool:
        return all(t.is_normalized for t in self.tables)

    @property
    def omega_size(self) -> int:
        return math.prod(len(v) for v in self.variables)


def topological_order(net: Union[PossibilisticNetwork, NetworkStructure]) -> list[str]:
    structure = net.structure if isinstance(net, PossibilisticNetwork) else net
    return structure.topological_order()


def _assignment_indices(net: PossibilisticNetwork, assignment) -> list[int]:
    if isinstance(assignment, Mapping):
        missing = [n for n in net.names if n not in assignment]
        if missing:
            raise StructureError(f"assignment misses {', '.join(missing)}")
        out = []
        for v in net.variables:
            s = assignment[v.name]
            out.append(v.index(s) if isinstance(s, str) else int(s))
        return out
    out = [int(k) for k in assignment]
    if len(out) != len(net.variables):
        raise StructureError(f"assignment has {len(out)} entries for {len(net.variables)} variables")
    return out


def joint_possibility(net: PossibilisticNetwork, assignment) -> float:
    """Chain-rule degree of one complete assignment.

    ``assignment`` is a sequence of state indices in declaration order, or a
    mapping from variable name to state index or label.
    """
    ks = _assignment_indices(net, assignment)
    structure = net.structure
    factors = []
    for i, table in enumerate(net.tables):
        config = [ks[structure.index(p)] for p in table.parent_names]
        try:
            row = table.row(config)
            factors.append(row.degrees[ks[i]])
        except IndexError:
            raise StructureError(f"state index {ks[i]} out of range for {table.child.name!r}") from None
    return net.semantics.combine(factors)


def joint_table(net: PossibilisticNetwork, cap: int | None = None) -> np.ndarray:
    """Full joint distribution as an array with one axis per variable (declaration order)."""
    cap = omega_cap() if cap is None else cap
    size = net.omega_size
    if size > cap:
        raise OmegaCapExceeded(size, cap)
    shape = tuple(len(v) for v in net.variables)
    structure = net.structure
    joint = np.ones(shape)
    op = net.semantics.ufunc
    for i, table in enumerate(net.tables):
        axes = [structure.index(p) for p in table.parent_names] + [i]
        factor = table.array.reshape([shape[a] for a in axes])
        order = np.argsort(axes)
        factor = factor.transpose(order)
        expand = [1] * len(shape)
        for a in axes:
            expand[a] = shape[a]
        joint = op(joint, factor.reshape(expand))
    return joint
