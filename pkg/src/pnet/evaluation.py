"""Gold-network experiments: sample, learn on the known structure, compare."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Union

import numpy as np

from .core import PossibilisticNetwork, joint_table, mass_to_possibility, omega_cap
from .errors import OmegaCapExceeded, StructureError
from .estimator import (
    Estimator,
    ImprecisionBudget,
    count_possibilistic,
    count_random_set,
    learn_parameters,
    network_from_masses,
    possibilistic_loglik,
    possibilistic_mle_raw,
    random_set_mle,
)
from .sampler import SamplerConfig, SamplingMode, sample_dataset


def _label_rows(net: PossibilisticNetwork, name: str) -> dict[tuple, dict[str, float]]:
    """Max-normalized table of ``name`` keyed by parent labels, then child label."""
    table = net.table(name)
    out = {}
    for config in table.configurations():
        row = table.row(config).degrees
        top = max(row)
        if top > 0:
            row = tuple(d / top for d in row)
        key = tuple(sorted((p.name, p.states[k]) for p, k in zip(table.parents, config)))
        out[key] = dict(zip(table.child.states, row))
    return out


def _check_alignment(gold: PossibilisticNetwork, learned: PossibilisticNetwork):
    if set(gold.names) != set(learned.names):
        raise StructureError("networks have different variables")
    for v in gold.variables:
        other = learned.structure.domain(v.name)
        if set(v.states) != set(other.states):
            raise StructureError(f"variable {v.name!r} has different states in the two networks")
        if set(gold.parents(v.name)) != set(learned.parents(v.name)):
            raise StructureError(f"variable {v.name!r} has different parents in the two networks")


def cpt_distance(gold: PossibilisticNetwork, learned: PossibilisticNetwork) -> dict[str, float]:
    """Mean absolute degree difference per variable, aligned by labels, after max-normalizing rows."""
    _check_alignment(gold, learned)
    out = {}
    for name in gold.names:
        a = _label_rows(gold, name)
        b = _label_rows(learned, name)
        diffs = [abs(row[s] - b[key][s]) for key, row in a.items() for s in row]
        out[name] = math.fsum(diffs) / len(diffs)
    return out


def joint_distance(gold: PossibilisticNetwork, learned: PossibilisticNetwork, cap: int | None = None) -> float:
    """Mean absolute difference of chain-rule joint degrees over the whole joint space."""
    _check_alignment(gold, learned)
    if gold.semantics != learned.semantics:
        raise StructureError(
            f"cannot compare a {gold.semantics.value}-based network with a {learned.semantics.value}-based one"
        )
    cap = omega_cap() if cap is None else cap
    if gold.omega_size > cap:
        raise OmegaCapExceeded(gold.omega_size, cap)
    a = joint_table(gold, cap)
    b = joint_table(learned, cap).transpose([learned.structure.index(n) for n in gold.names])
    for axis, v in enumerate(gold.variables):
        other = learned.structure.domain(v.name)
        b = np.take(b, [other.index(s) for s in v.states], axis=axis)
    return float(np.abs(a - b).mean())


@dataclass(frozen=True)
class ExperimentConfig:
    gold: Union[str, Path, PossibilisticNetwork]
    record_count: int
    theta_imp: float
    seed: int
    mode: SamplingMode = SamplingMode.IMPRECISE_CUT
    estimator: Estimator = Estimator.POSSIBILISTIC_MLE
    budget: ImprecisionBudget | str = "default"
    holdout: float = 0.0
    omega_cap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", SamplingMode(self.mode))
        object.__setattr__(self, "estimator", Estimator(self.estimator))
        if self.record_count < 1:
            raise ValueError("record_count must be at least 1")
        if not 0.0 <= self.holdout < 1.0:
            raise ValueError(f"holdout fraction must lie in [0, 1), got {self.holdout}")
        if isinstance(self.budget, str) and self.budget not in ("default", "mean-card"):
            raise ValueError(f"unknown budget rule {self.budget!r}")

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(self.theta_imp, self.mode, self.seed, self.record_count)

    @property
    def holdout_count(self) -> int:
        return min(self.record_count, int(math.floor(self.holdout * self.record_count + 0.5)))


@dataclass
class EvaluationReport:
    cpt_distance: dict[str, float]
    mean_cpt_distance: float
    joint_distance: float | None
    joint_skipped: str | None
    holdout_loglik_gold: float
    holdout_loglik_learned: float
    holdout_loglik_learned_raw: float
    train_records: int
    holdout_records: int
    metadata: dict = field(default_factory=dict)
    learned: PossibilisticNetwork | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "learned"}
        out["cpt_distance"] = dict(self.cpt_distance)
        out["metadata"] = dict(self.metadata)
        return out

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        """Flat ``key = value`` lines, nested keys joined with dots."""
        lines = []
        for key, value in sorted(_flatten(self.to_dict()).items()):
            lines.append(f"{key} = {_fmt(value)}")
        return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return "-inf" if obj < 0 else ("inf" if obj > 0 else "nan")
    return obj


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_experiment(config: ExperimentConfig) -> EvaluationReport:
    from .io import parse_network

    gold = config.gold if isinstance(config.gold, PossibilisticNetwork) else parse_network(config.gold)
    data = sample_dataset(gold, config.sampler_config())
    n_hold = config.holdout_count
    n_train = config.record_count - n_hold
    train, holdout = data.take(slice(0, n_train)), data.take(slice(n_train, None))

    if isinstance(config.budget, ImprecisionBudget):
        budget = config.budget
    elif config.budget == "mean-card":
        budget = ImprecisionBudget.mean_cardinality(train)
    else:
        budget = ImprecisionBudget.uniform()

    structure = gold.structure
    if config.estimator is Estimator.RANDOM_SET_MLE:
        masses = random_set_mle(count_random_set(train, structure))
        learned = network_from_masses(structure, masses, gold.semantics)
        raw = {
            v.name: [np.ones(len(v)) if m is None else mass_to_possibility(m).degrees for m in masses[v.name]]
            for v in structure.variables
        }
    else:
        learned = learn_parameters(train, structure, budget, config.estimator, gold.semantics)
        counts = count_possibilistic(train, structure)
        if config.estimator is Estimator.POSSIBILISTIC_MLE:
            raw = possibilistic_mle_raw(counts, budget)
        else:
            raw = {
                v.name: np.where(
                    counts.totals[v.name][:, None] > 0,
                    counts.counts[v.name] / np.maximum(counts.totals[v.name], 1)[:, None],
                    1.0,
                )
                for v in structure.variables
            }

    distances = cpt_distance(gold, learned)
    cap = omega_cap() if config.omega_cap is None else config.omega_cap
    joint, skipped = None, None
    try:
        joint = joint_distance(gold, learned, cap)
    except OmegaCapExceeded as exc:
        skipped = str(exc)

    return EvaluationReport(
        cpt_distance=distances,
        mean_cpt_distance=math.fsum(distances.values()) / len(distances),
        joint_distance=joint,
        joint_skipped=skipped,
        holdout_loglik_gold=possibilistic_loglik(gold, structure, holdout),
        holdout_loglik_learned=possibilistic_loglik(learned, structure, holdout),
        holdout_loglik_learned_raw=possibilistic_loglik(raw, structure, holdout),
        train_records=n_train,
        holdout_records=n_hold,
        metadata={
            "gold": str(config.gold) if not isinstance(config.gold, PossibilisticNetwork) else "<in-memory>",
            "record_count": config.record_count,
            "theta_imp": config.theta_imp,
            "seed": config.seed,
            "mode": config.mode.value,
            "estimator": config.estimator.value,
            "budget": config.budget if isinstance(config.budget, str) else "custom",
            "holdout": config.holdout,
            "semantics": gold.semantics.value,
        },
        learned=learned,
    )
