import itertools
import math
from collections import Counter, defaultdict

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pnet import (
    Estimator,
    ImprecisionBudget,
    MassFunction,
    NetworkStructure,
    PossibilisticNetwork,
    SamplerConfig,
    StateDomain,
    count_possibilistic,
    count_random_set,
    histogram_estimate,
    learn_parameters,
    mass_to_possibility,
    possibilistic_loglik,
    possibilistic_mle,
    possibilistic_mle_raw,
    random_set_loglik,
    random_set_mle,
    sample_dataset,
)
from pnet.errors import SchemaMismatchError
from pnet.sampler import ImpreciseDataset


@pytest.fixture
def ab():
    return StateDomain("X", ("a", "b"))


@pytest.fixture
def single(ab):
    structure = NetworkStructure((ab,))
    data = ImpreciseDataset.from_records((ab,), [("a",), ("a",), (["a", "b"],), ("b",)])
    return structure, data


def counts_tensor(structure, rows):
    """Possibilistic CountTensor for a parentless variable from raw counts."""
    from pnet.estimator import CountMode, CountTensor

    name = structure.variables[0].name
    arr = np.array([rows], dtype=np.int64)
    return CountTensor(CountMode.POSSIBILISTIC, structure, {name: arr}, {name: np.array([max(rows)])})


class TestCounting:
    def test_possibilistic(self, single):
        structure, data = single
        c = count_possibilistic(data, structure)
        assert c.counts["X"].tolist() == [[3, 2]]
        assert c.totals["X"].tolist() == [4]

    def test_random_set(self, single):
        structure, data = single
        c = count_random_set(data, structure)
        assert c.counts["X"] == ({0b01: 2, 0b11: 1, 0b10: 1},)

    def test_empty(self, single):
        structure, data = single
        empty = data.take(slice(0, 0))
        assert count_possibilistic(empty, structure).counts["X"].tolist() == [[0, 0]]
        assert count_random_set(empty, structure).counts["X"] == ({},)

    def test_imprecise_parent_matches_several_configurations(self, xy_structure):
        data = ImpreciseDataset.from_records(
            xy_structure.variables, [(["x1", "x2"], "y1"), ("x1", ["y1", "y2"]), ("x2", "y2")]
        )
        c = count_possibilistic(data, xy_structure)
        assert c.totals["Y"].tolist() == [2, 2]
        assert c.counts["Y"].tolist() == [[2, 1], [1, 1]]
        r = count_random_set(data, xy_structure)
        assert r.counts["Y"] == ({0b01: 1, 0b11: 1}, {0b01: 1, 0b10: 1})

    def test_precise_counts_are_frequencies(self, chain_net):
        data = sample_dataset(chain_net, SamplerConfig(0.0, "imprecise", 5, 400))
        pc = count_possibilistic(data, chain_net.structure)
        rc = count_random_set(data, chain_net.structure)
        for name in chain_net.names:
            for j, cell in enumerate(rc.counts[name]):
                dense = [cell.get(1 << k, 0) for k in range(2)]
                assert dense == pc.counts[name][j].tolist()

    def test_schema_mismatch(self, single, xy_structure):
        _, data = single
        with pytest.raises(SchemaMismatchError):
            count_possibilistic(data, xy_structure)

    def test_merge(self, chain_net):
        data = sample_dataset(chain_net, SamplerConfig(0.5, "imprecise", 6, 300))
        s = chain_net.structure
        for count in (count_possibilistic, count_random_set):
            whole = count(data, s)
            merged = count(data.take(slice(0, 100)), s) + count(data.take(slice(100, None)), s)
            for name in s.names:
                if whole.mode.value == "possibilistic":
                    assert np.array_equal(whole.counts[name], merged.counts[name])
                else:
                    assert whole.counts[name] == merged.counts[name]
                assert np.array_equal(whole.totals[name], merged.totals[name])


class TestEstimates:
    def test_histogram(self, single):
        structure, data = single
        (row,) = histogram_estimate(count_possibilistic(data, structure))["X"]
        assert row.degrees == (0.75, 0.5)

    def test_histogram_precise_and_ignorance(self, ab):
        s = NetworkStructure((ab,))
        precise = ImpreciseDataset.from_records((ab,), [("a",)] * 3 + [("b",)])
        (row,) = histogram_estimate(count_possibilistic(precise, s))["X"]
        assert row.degrees == (0.75, 0.25)
        ignorant = ImpreciseDataset.from_records((ab,), [(["a", "b"],)] * 4)
        (row,) = histogram_estimate(count_possibilistic(ignorant, s))["X"]
        assert row.degrees == (1.0, 1.0)

    def test_histogram_unseen(self, xy_structure):
        data = ImpreciseDataset.from_records(xy_structure.variables, [("x1", "y1")])
        est = histogram_estimate(count_possibilistic(data, xy_structure))
        assert est["Y"][1] is None

    def test_random_set_mle(self, single):
        structure, data = single
        (m,) = random_set_mle(count_random_set(data, structure))["X"]
        assert dict(m.focal) == {0b01: 0.5, 0b11: 0.25, 0b10: 0.25}
        assert mass_to_possibility(m).degrees == (0.75, 0.5)

    def test_random_set_single_focal(self, ab):
        s = NetworkStructure((ab,))
        data = ImpreciseDataset.from_records((ab,), [(["a", "b"],)] * 3)
        (m,) = random_set_mle(count_random_set(data, s))["X"]
        assert m.focal == ((0b11, 1.0),)

    def test_pml_examples(self, ab):
        s = NetworkStructure((ab,))
        (row,) = possibilistic_mle(counts_tensor(s, [3, 1]), ImprecisionBudget.uniform(1.0))["X"]
        assert row.degrees == pytest.approx((1.0, 1 / 3))
        assert possibilistic_mle_raw(counts_tensor(s, [3, 1]))["X"].tolist() == [[0.75, 0.25]]
        (row2,) = possibilistic_mle(counts_tensor(s, [3, 1]), ImprecisionBudget.uniform(2.0))["X"]
        assert row2.degrees == pytest.approx(row.degrees, abs=1e-12)

    def test_pml_smoothing(self):
        d = StateDomain("T", ("p", "q", "r"))
        s = NetworkStructure((d,))
        (row,) = possibilistic_mle(counts_tensor(s, [0, 0, 0]))["T"]
        assert row.degrees == (1.0, 1.0, 1.0)

    def test_pml_zero_state_stays_zero(self):
        d = StateDomain("T", ("p", "q", "r"))
        s = NetworkStructure((d,))
        (row,) = possibilistic_mle(counts_tensor(s, [4, 0, 2]))["T"]
        assert row.degrees == (1.0, 0.0, 0.5)

    def test_pml_grid_oracle(self):
        # independent check: brute-force the simplex sum(pi) = 1 on a 0.01 grid
        counts = np.array([3, 1])
        grid = [(i / 100, 1 - i / 100) for i in range(1, 100)]
        best = max(grid, key=lambda p: sum(n * math.log(x) for n, x in zip(counts, p)))
        assert best == pytest.approx((0.75, 0.25))

    def test_budget_validation(self, single):
        with pytest.raises(ValueError):
            ImprecisionBudget({"X": 0.0})
        with pytest.raises(ValueError):
            ImprecisionBudget.uniform(-1)
        _, data = single
        assert ImprecisionBudget.mean_cardinality(data)["X"] == pytest.approx(1.25)


class TestLikelihoods:
    def test_random_set_loglik(self, single):
        structure, data = single
        m = random_set_mle(count_random_set(data, structure))
        expected = 2 * math.log(0.5) + math.log(0.25) + math.log(0.25)  # = -6 log 2
        assert random_set_loglik(m, structure, data) == pytest.approx(expected, abs=1e-12)

    def test_random_set_loglik_zero_mass(self, single, ab):
        structure, data = single
        m = {"X": [MassFunction.from_sets(ab, {"a": 0.5, "b": 0.5})]}
        assert random_set_loglik(m, structure, data) == -math.inf

    def test_possibilistic_loglik(self, ab):
        s = NetworkStructure((ab,))
        data = ImpreciseDataset.from_records((ab,), [("a",)] * 3 + [("b",)])
        assert possibilistic_loglik({"X": [[1.0, 1 / 3]]}, s, data) == pytest.approx(-math.log(3))
        assert possibilistic_loglik({"X": [[1.0, 1.0]]}, s, data) == 0.0
        assert possibilistic_loglik({"X": [[1.0, 0.0]]}, s, data) == -math.inf

    def test_possibilistic_loglik_accepts_network(self, xy_net):
        data = sample_dataset(xy_net, SamplerConfig(0.5, "imprecise", 1, 200))
        rows = {t.child.name: t.array for t in xy_net.tables}
        assert possibilistic_loglik(xy_net, xy_net.structure, data) == possibilistic_loglik(
            rows, xy_net.structure, data
        )

    def test_precise_data_recovers_multinomial(self, chain_net):
        data = sample_dataset(chain_net, SamplerConfig(0.0, "imprecise", 21, 500))
        s = chain_net.structure
        m = random_set_mle(count_random_set(data, s))
        # oracle: plain multinomial log-likelihood from a dict-of-counters tally
        tallies = defaultdict(Counter)
        for rec in data:
            states = [cell.indices[0] for cell in rec]
            for i, name in enumerate(s.names):
                parents = tuple(states[s.index(p)] for p in s.parents(name))
                tallies[(name, parents)][states[i]] += 1
        expected = 0.0
        for tally in tallies.values():
            total = sum(tally.values())
            expected += sum(n * math.log(n / total) for n in tally.values())
        assert random_set_loglik(m, s, data) == pytest.approx(expected, abs=1e-9)


class TestLearn:
    def test_precise_equals_normalized_frequencies(self, chain_net):
        data = sample_dataset(chain_net, SamplerConfig(0.0, "imprecise", 8, 2000))
        s = chain_net.structure
        learned = learn_parameters(data, s, estimator=Estimator.POSSIBILISTIC_MLE)
        tallies = defaultdict(Counter)
        for rec in data:
            states = [cell.indices[0] for cell in rec]
            for i, name in enumerate(s.names):
                parents = tuple(states[s.index(p)] for p in s.parents(name))
                tallies[(name, parents)][states[i]] += 1
        for name in s.names:
            table = learned.table(name)
            for config in table.configurations():
                tally = tallies.get((name, config))
                if not tally:
                    assert table.row(config).degrees == (1.0, 1.0)
                    continue
                top = max(tally.values())
                expected = [tally[k] / top for k in range(2)]
                assert list(table.row(config).degrees) == pytest.approx(expected, abs=1e-12)

    def test_edgeless_structure_learns_marginals(self, chain_net):
        data = sample_dataset(chain_net, SamplerConfig(0.5, "imprecise", 8, 500))
        s = NetworkStructure(chain_net.variables)
        learned = learn_parameters(data, s)
        counts = count_possibilistic(data, s)
        for name in s.names:
            n = counts.counts[name][0]
            assert learned.table(name).rows[0].degrees == pytest.approx(tuple(n / n.max()))

    def test_unseen_configuration_is_ignorance(self, xy_structure):
        data = ImpreciseDataset.from_records(xy_structure.variables, [("x1", "y1"), ("x1", "y2")])
        for est in (Estimator.POSSIBILISTIC_MLE, Estimator.HISTOGRAM):
            net = learn_parameters(data, xy_structure, estimator=est)
            assert net.table("Y").rows[1].degrees == (1.0, 1.0)
            assert net.semantics.value == "product"
            assert net.is_normalized

    def test_histogram_and_pml_agree_after_normalization_on_precise_data(self, chain_net):
        data = sample_dataset(chain_net, SamplerConfig(0.0, "imprecise", 9, 500))
        a = learn_parameters(data, chain_net, estimator="pml")
        b = learn_parameters(data, chain_net, estimator="histogram")
        for ta, tb in zip(a.tables, b.tables):
            np.testing.assert_allclose(ta.array, tb.array, atol=1e-12)

    def test_random_set_estimator_returns_masses(self, chain_net):
        data = sample_dataset(chain_net, SamplerConfig(0.5, "imprecise", 9, 100))
        out = learn_parameters(data, chain_net, estimator="rset")
        assert set(out) == set(chain_net.names)
        assert all(isinstance(m, MassFunction) or m is None for rows in out.values() for m in rows)

    def test_min_tag(self, chain_net):
        data = sample_dataset(chain_net, SamplerConfig(0.5, "imprecise", 9, 100))
        assert learn_parameters(data, chain_net, semantics="min").semantics.value == "min"


# ---------------------------------------------------------------------------
# properties


@st.composite
def small_datasets(draw):
    r = draw(st.integers(2, 4))
    dom = StateDomain("X", tuple("abcd"[:r]))
    masks = draw(st.lists(st.integers(1, dom.full_mask), min_size=1, max_size=50))
    return dom, ImpreciseDataset((dom,), np.array(masks, dtype=np.uint64).reshape(-1, 1))


@given(small_datasets())
def test_bridge_identity(case):
    dom, data = case
    s = NetworkStructure((dom,))
    (m,) = random_set_mle(count_random_set(data, s))["X"]
    (h,) = histogram_estimate(count_possibilistic(data, s))["X"]
    assert mass_to_possibility(m).degrees == pytest.approx(h.degrees, abs=1e-9)


@given(st.lists(st.integers(0, 30), min_size=1, max_size=4), st.floats(0.01, 100))
def test_budget_invariance(counts, s):
    d = StateDomain("T", tuple("pqrs"[: len(counts)]))
    structure = NetworkStructure((d,))
    ct = counts_tensor(structure, counts)
    (a,) = possibilistic_mle(ct, ImprecisionBudget.uniform(1.0))["T"]
    (b,) = possibilistic_mle(ct, ImprecisionBudget.uniform(s))["T"]
    assert a.degrees == pytest.approx(b.degrees, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.integers(1, 60))
def test_adding_records_never_decreases_counts(seed, theta, n):
    from conftest import chain_network

    net = chain_network()
    data = sample_dataset(net, SamplerConfig(theta, "imprecise", seed, n))
    before = count_possibilistic(data.take(slice(0, n - 1)), net.structure)
    after = count_possibilistic(data, net.structure)
    for name in net.names:
        assert np.all(after.counts[name] >= before.counts[name])
        assert np.all(after.totals[name] >= before.totals[name])
