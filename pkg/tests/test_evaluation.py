import json
import math

import numpy as np
import pytest

from pnet import (
    ExperimentConfig,
    NetworkStructure,
    PossibilisticNetwork,
    StateDomain,
    cpt_distance,
    joint_distance,
    run_experiment,
)
from pnet.errors import OmegaCapExceeded, StructureError

from conftest import chain_network


def one_var(degrees, states=("a", "b"), semantics="product"):
    d = StateDomain("V", states)
    return PossibilisticNetwork.from_arrays(NetworkStructure((d,)), {"V": [degrees]}, semantics)


class TestDistances:
    def test_reflexive(self, chain_net):
        assert cpt_distance(chain_net, chain_net) == {"X": 0.0, "Y": 0.0, "Z": 0.0}
        assert joint_distance(chain_net, chain_net) == 0.0

    def test_single_row(self):
        assert cpt_distance(one_var([1.0, 0.4]), one_var([1.0, 0.2]))["V"] == pytest.approx(0.1)

    def test_label_alignment(self):
        assert cpt_distance(one_var([1.0, 0.4]), one_var([0.4, 1.0], ("b", "a")))["V"] == 0.0
        assert joint_distance(one_var([1.0, 0.4]), one_var([0.4, 1.0], ("b", "a"))) == 0.0

    def test_alignment_with_reordered_variables(self, chain_net):
        X, Y, Z = chain_net.variables
        Yr = StateDomain("Y", ("y2", "y1"))
        s = NetworkStructure((Z, Yr, X), (("Y", "Z"), ("X", "Y")))
        # same numbers as chain_net, with Y's states listed in reverse
        other = PossibilisticNetwork.from_arrays(
            s, {"X": [[1.0, 0.6]], "Y": [[0.3, 1.0], [1.0, 0.6]], "Z": [[1.0, 0.6], [0.3, 1.0]]}
        )
        assert cpt_distance(chain_net, other) == {"X": 0.0, "Y": 0.0, "Z": 0.0}
        assert joint_distance(chain_net, other) == pytest.approx(0.0, abs=1e-15)

    def test_joint_two_point_mean(self):
        assert joint_distance(one_var([1.0, 0.4]), one_var([1.0, 0.8])) == pytest.approx(0.2)

    def test_semantics_must_match(self):
        with pytest.raises(StructureError):
            joint_distance(one_var([1.0, 0.4]), one_var([1.0, 0.4], semantics="min"))

    def test_cap(self, chain_net):
        with pytest.raises(OmegaCapExceeded, match="cap"):
            joint_distance(chain_net, chain_net, cap=7)

    def test_structure_mismatch(self, chain_net):
        with pytest.raises(StructureError):
            cpt_distance(chain_net, one_var([1.0, 0.4]))

    def test_symmetry(self, chain_net):
        rng = np.random.default_rng(0)
        rows = {t.child.name: rng.uniform(0.1, 1, size=t.array.shape).tolist() for t in chain_net.tables}
        other = PossibilisticNetwork.from_arrays(chain_net.structure, rows)
        a, b = cpt_distance(chain_net, other), cpt_distance(other, chain_net)
        assert a == pytest.approx(b)
        assert joint_distance(chain_net, other) == pytest.approx(joint_distance(other, chain_net))

    def test_distance_uses_normalized_rows(self):
        assert cpt_distance(one_var([0.5, 0.2]), one_var([1.0, 0.4]))["V"] == 0.0


class TestExperiment:
    def test_modal_state_preserved_on_precise_data(self):
        gold = one_var([0.3, 1.0, 0.6], ("a", "b", "c"))
        report = run_experiment(ExperimentConfig(gold, 5000, 0.0, seed=3))
        assert int(np.argmax(report.learned.tables[0].rows[0].degrees)) == 1

    def test_zero_training_records(self, chain_net):
        report = run_experiment(ExperimentConfig(chain_net, 1, 0.5, seed=1, holdout=0.9))
        assert report.train_records == 0 and report.holdout_records == 1
        assert all(math.isfinite(d) for d in report.cpt_distance.values())
        assert math.isfinite(report.joint_distance)
        # every learned row is total ignorance, so the learned holdout score is 0
        assert report.holdout_loglik_learned == 0.0

    def test_deterministic(self, chain_net):
        cfg = ExperimentConfig(chain_net, 400, 0.5, seed=12, holdout=0.25)
        a, b = run_experiment(cfg), run_experiment(cfg)
        assert a.to_json() == b.to_json()
        assert a.train_records == 300

    def test_report_fields(self, chain_net):
        report = run_experiment(ExperimentConfig(chain_net, 200, 0.3, seed=5, holdout=0.2))
        doc = json.loads(report.to_json())
        for key in (
            "cpt_distance",
            "mean_cpt_distance",
            "joint_distance",
            "holdout_loglik_gold",
            "holdout_loglik_learned",
            "holdout_loglik_learned_raw",
            "metadata",
        ):
            assert doc[key] is not None
        text = report.to_text()
        assert "cpt_distance.X = " in text and "metadata.seed = 5" in text

    def test_joint_skipped_over_cap(self, chain_net):
        report = run_experiment(ExperimentConfig(chain_net, 50, 0.3, seed=5, omega_cap=4))
        assert report.joint_distance is None and "cap" in report.joint_skipped

    @pytest.mark.parametrize("estimator", ["pml", "histogram", "rset"])
    def test_estimators(self, chain_net, estimator):
        report = run_experiment(ExperimentConfig(chain_net, 300, 0.4, seed=2, estimator=estimator, holdout=0.3))
        assert report.mean_cpt_distance >= 0
        assert math.isfinite(report.holdout_loglik_learned_raw)

    def test_gold_score_finite_on_own_samples(self, chain_net):
        report = run_experiment(ExperimentConfig(chain_net, 500, 0.7, seed=9, holdout=0.5))
        assert math.isfinite(report.holdout_loglik_gold)

    def test_histogram_converges_on_root(self):
        gold = one_var([1.0, 0.4, 0.2], ("a", "b", "c"))
        wins = 0
        for seed in range(20):
            small = run_experiment(ExperimentConfig(gold, 100, 1.0, seed, estimator="histogram"))
            large = run_experiment(ExperimentConfig(gold, 10000, 1.0, seed + 1000, estimator="histogram"))
            wins += large.mean_cpt_distance < small.mean_cpt_distance
        assert wins > 10

    def test_config_validation(self, chain_net):
        with pytest.raises(ValueError):
            ExperimentConfig(chain_net, 0, 0.5, 1)
        with pytest.raises(ValueError):
            ExperimentConfig(chain_net, 10, 0.5, 1, holdout=1.0)
        with pytest.raises(ValueError):
            ExperimentConfig(chain_net, 10, 0.5, 1, budget="bogus")

    def test_gold_from_path(self, tmp_path, chain_net):
        from pnet.io import write_network

        path = tmp_path / "gold.json"
        write_network(chain_net, path)
        a = run_experiment(ExperimentConfig(path, 100, 0.5, 4))
        b = run_experiment(ExperimentConfig(chain_net, 100, 0.5, 4))
        assert a.cpt_distance == b.cpt_distance
