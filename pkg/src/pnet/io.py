"""Network JSON, dataset CSV and their sidecar files.

Network files look like::

    {"semantics": "product",
     "variables": [{"name": "X", "states": ["x1", "x2"]}, ...],
     "edges": [["X", "Y"]],
     "cpts": {"X": [[1.0, 0.4]], "Y": [[1.0, 0.2], [0.7, 1.0]]}}

A variable's parents are ordered as its incoming edges appear in ``edges``;
CPT rows run row-major over the parents' state indices.  Dataset CSV cells
hold one label, or several joined by ``|``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Sequence, Union

from .core import (
    TOL,
    ConditionalPossibilityTable,
    NetworkStructure,
    PossibilisticNetwork,
    PossibilityDistribution,
    Semantics,
    StateDomain,
)
from .errors import CycleError, DatasetFormatError, InputError, NetworkFormatError, SchemaMismatchError, StructureError
from .sampler import ImpreciseDataset, SamplingMode

SEPARATOR = "|"
SIG_DIGITS = 12

PathLike = Union[str, Path]


def canonical_float(x: float) -> float:
    """Round to 12 significant digits; ``json`` then prints the shortest round-trip form."""
    return float(format(float(x), f".{SIG_DIGITS}g"))


# ---------------------------------------------------------------------------
# networks


def _load_json(path: PathLike):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError("$", f"malformed JSON ({exc.msg} at line {exc.lineno})") from None


def _variables_from(doc) -> list[StateDomain]:
    if not isinstance(doc, dict):
        raise NetworkFormatError("$", "top level must be an object")
    raw = doc.get("variables")
    if not isinstance(raw, list) or not raw:
        raise NetworkFormatError("$.variables", "must be a nonempty list")
    out = []
    for i, var in enumerate(raw):
        where = f"$.variables[{i}]"
        if not isinstance(var, dict):
            raise NetworkFormatError(where, "must be an object with 'name' and 'states'")
        name, states = var.get("name"), var.get("states")
        if not isinstance(name, str) or not name:
            raise NetworkFormatError(f"{where}.name", "must be a nonempty string")
        if not isinstance(states, list) or not states:
            raise NetworkFormatError(f"{where}.states", "must be a nonempty list of labels")
        for k, s in enumerate(states):
            if not isinstance(s, str) or not s:
                raise NetworkFormatError(f"{where}.states[{k}]", "state label must be a nonempty string")
            if SEPARATOR in s:
                raise NetworkFormatError(f"{where}.states[{k}]", f"state label may not contain {SEPARATOR!r}")
        try:
            out.append(StateDomain(name, tuple(states)))
        except ValueError as exc:
            raise NetworkFormatError(where, str(exc)) from None
    return out


def _structure_from(doc) -> NetworkStructure:
    variables = _variables_from(doc)
    raw = doc.get("edges", [])
    if not isinstance(raw, list):
        raise NetworkFormatError("$.edges", "must be a list of [parent, child] pairs")
    edges = []
    for i, e in enumerate(raw):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise NetworkFormatError(f"$.edges[{i}]", "must be a [parent, child] pair of names")
        edges.append((e[0], e[1]))
    try:
        return NetworkStructure(tuple(variables), tuple(edges))
    except CycleError as exc:
        raise NetworkFormatError("$.edges", str(exc)) from None
    except StructureError as exc:
        raise NetworkFormatError("$.edges", str(exc)) from None


def _semantics_from(doc, default: Semantics | None = None) -> Semantics:
    raw = doc.get("semantics")
    if raw is None and default is not None:
        return default
    try:
        return Semantics(raw)
    except ValueError:
        raise NetworkFormatError("$.semantics", "must be \"min\" or \"product\"") from None


def network_from_dict(doc) -> PossibilisticNetwork:
    structure = _structure_from(doc)
    semantics = _semantics_from(doc)
    cpts = doc.get("cpts")
    if not isinstance(cpts, dict):
        raise NetworkFormatError("$.cpts", "must be an object keyed by variable name")
    for name in cpts:
        if name not in structure.names:
            raise NetworkFormatError(f"$.cpts.{name}", "unknown variable")
    tables = []
    for v in structure.variables:
        where = f"$.cpts.{v.name}"
        if v.name not in cpts:
            raise NetworkFormatError(where, "missing table")
        rows = cpts[v.name]
        parents = structure.parent_domains(v.name)
        expected = math.prod(len(p) for p in parents)
        if not isinstance(rows, list) or len(rows) != expected:
            got = len(rows) if isinstance(rows, list) else "no"
            raise NetworkFormatError(where, f"expected {expected} rows, got {got}")
        dists = []
        for j, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != len(v):
                raise NetworkFormatError(f"{where}[{j}]", f"expected {len(v)} degrees")
            for k, d in enumerate(row):
                if isinstance(d, bool) or not isinstance(d, (int, float)):
                    raise NetworkFormatError(f"{where}[{j}][{k}]", "degree must be a number")
                if not 0.0 <= d <= 1.0:
                    raise NetworkFormatError(f"{where}[{j}][{k}]", f"degree out of range ({d})")
            dists.append(PossibilityDistribution(v, tuple(row)))
        tables.append(ConditionalPossibilityTable(v, parents, tuple(dists)))
    return PossibilisticNetwork(structure.variables, structure.edges, tuple(tables), semantics)


def network_to_dict(net: PossibilisticNetwork) -> dict:
    return {
        "semantics": net.semantics.value,
        "variables": [{"name": v.name, "states": list(v.states)} for v in net.variables],
        "edges": [list(e) for e in net.edges],
        "cpts": {
            t.child.name: [[canonical_float(d) for d in row.degrees] for row in t.rows] for t in net.tables
        },
    }


def dumps_network(net: PossibilisticNetwork) -> str:
    return json.dumps(network_to_dict(net), sort_keys=True, indent=2) + "\n"


def parse_network(path: PathLike) -> PossibilisticNetwork:
    return network_from_dict(_load_json(path))


def parse_structure(path: PathLike) -> NetworkStructure:
    """Variables and edges of a network file; ``cpts`` and ``semantics`` may be absent."""
    return _structure_from(_load_json(path))


def write_network(net: PossibilisticNetwork, path: PathLike):
    Path(path).write_text(dumps_network(net), encoding="utf-8")


# ---------------------------------------------------------------------------
# datasets


def manifest_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def _encode_cell(domain: StateDomain, mask: int) -> str:
    return SEPARATOR.join(s for k, s in enumerate(domain.states) if mask >> k & 1)


def dumps_dataset(data: ImpreciseDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(data.names)
    for row in data.cells.tolist():
        writer.writerow([_encode_cell(v, int(m)) for v, m in zip(data.variables, row)])
    return buf.getvalue()


def dataset_manifest(data: ImpreciseDataset) -> dict:
    return {
        "record_count": len(data),
        "seed": data.seed,
        "theta_imp": data.theta_imp,
        "mode": None if data.mode is None else data.mode.value,
        "tolerance": TOL,
        "variables": list(data.names),
    }


def write_dataset(data: ImpreciseDataset, path: PathLike, manifest: bool = True):
    path = Path(path)
    path.write_text(dumps_dataset(data), encoding="utf-8")
    if manifest:
        manifest_path(path).write_text(
            json.dumps(dataset_manifest(data), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )


def _schema_domains(schema) -> tuple[StateDomain, ...]:
    if isinstance(schema, (PossibilisticNetwork, NetworkStructure)):
        return tuple(schema.variables)
    return tuple(schema)


def loads_dataset(text: str, schema, **metadata) -> ImpreciseDataset:
    domains = _schema_domains(schema)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaMismatchError("dataset is empty: no header row") from None
    names = [v.name for v in domains]
    if header != names:
        raise SchemaMismatchError(f"header {header} does not match the variables {names}")
    lookup = [{s: k for k, s in enumerate(v.states)} for v in domains]
    rows = []
    for r, row in enumerate(reader, start=1):
        if len(row) != len(domains):
            raise DatasetFormatError(r, "*", f"expected {len(domains)} cells, got {len(row)}")
        masks = []
        for v, table, cell in zip(domains, lookup, row):
            if cell == "":
                raise DatasetFormatError(r, v.name, "empty cell")
            mask = 0
            for label in cell.split(SEPARATOR):
                if label not in table:
                    raise DatasetFormatError(r, v.name, f"unknown label {label!r}")
                bit = 1 << table[label]
                if mask & bit:
                    raise DatasetFormatError(r, v.name, f"duplicate label {label!r}")
                mask |= bit
            masks.append(mask)
        rows.append(masks)
    return ImpreciseDataset(domains, rows, **metadata)


def read_manifest(path: PathLike) -> dict | None:
    mp = manifest_path(path)
    if not mp.exists():
        return None
    try:
        return json.loads(mp.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{mp}: malformed manifest ({exc.msg})") from None


def parse_dataset(path: PathLike, schema) -> ImpreciseDataset:
    """Read a dataset CSV; metadata comes from the sidecar manifest when present."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    meta = read_manifest(path) or {}
    mode = meta.get("mode")
    data = loads_dataset(
        text,
        schema,
        seed=meta.get("seed"),
        theta_imp=meta.get("theta_imp"),
        mode=None if mode is None else SamplingMode(mode),
    )
    if "record_count" in meta and meta["record_count"] != len(data):
        raise InputError(f"{path}: manifest lists {meta['record_count']} records, file has {len(data)}")
    return data


# ---------------------------------------------------------------------------
# budgets and mass functions


def parse_budget(path: PathLike, names: Sequence[str]) -> dict[str, float]:
    """A JSON object mapping variable names to positive budgets."""
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise InputError(f"{path}: budget file must be a JSON object")
    out = {}
    for name, s in doc.items():
        if name not in names:
            raise InputError(f"{path}: unknown variable {name!r}")
        if isinstance(s, bool) or not isinstance(s, (int, float)) or not s > 0:
            raise InputError(f"{path}: budget of {name!r} must be a positive number")
        out[name] = float(s)
    return out


def masses_to_dict(structure: NetworkStructure, masses) -> dict:
    """JSON form of per-configuration mass functions; unseen configurations are ``null``."""
    out = {}
    for v in structure.variables:
        rows = []
        for m in masses[v.name]:
            if m is None:
                rows.append(None)
            else:
                rows.append(
                    [{"set": list(e.labels), "mass": canonical_float(x)} for e, x in m.items()]
                )
        out[v.name] = rows
    return out
