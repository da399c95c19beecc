from fractions import Fraction

import numpy as np
import pytest

from flowclust.fracprog import (
    RatioObjective,
    SeedRejectedError,
    bisection,
    dinkelbach,
    exact_eps,
)
from flowclust.improve import MQISolver, mqi, theta_of

from builders import dumbbell, graph_from_edges


@pytest.fixture
def bell():
    graph, left, seed = dumbbell()
    return graph, graph.node_set(left), graph.node_set(seed)


class TestObjective:
    def test_volume_denominator(self, bell):
        graph, left, seed = bell
        obj = RatioObjective("volume", seed)
        assert obj.denominator(graph, left.members) == 13

    def test_relative_volume_denominator(self, bell):
        graph, left, seed = bell
        theta = theta_of(graph, seed)
        obj = RatioObjective("relative-volume", seed, kappa=theta)
        full = np.arange(graph.node_count)
        assert obj.denominator(graph, full) == 0  # balanced at theta
        assert obj.denominator(graph, seed.members) == seed.volume

    def test_unknown_kind_rejected(self, bell):
        _, _, seed = bell
        with pytest.raises(ValueError):
            RatioObjective("nonsense", seed)
        with pytest.raises(ValueError):
            RatioObjective("relative-volume", seed)


class TestDinkelbach:
    def test_dumbbell_converges_to_exact_optimum(self, bell):
        graph, left, seed = bell
        result = dinkelbach(graph, RatioObjective("volume", seed), MQISolver(graph, seed))
        assert list(result.set) == [0, 1, 2, 3]
        assert result.objective_exact == Fraction(1, 13)
        assert result.trace[0].delta == pytest.approx(5 / 19)

    def test_trace_strictly_decreasing(self, bell):
        graph, left, seed = bell
        result = dinkelbach(graph, RatioObjective("volume", seed), MQISolver(graph, seed))
        deltas = [s.delta for s in result.trace]
        cuts = [s.cut for s in result.trace]
        denoms = [s.denominator for s in result.trace]
        assert all(a > b for a, b in zip(deltas, deltas[1:]))
        assert all(a > b for a, b in zip(cuts, cuts[1:]))
        assert all(a > b for a, b in zip(denoms, denoms[1:]))

    def test_optimal_seed_fixed_point(self, bell):
        graph, left, _ = bell
        result = dinkelbach(graph, RatioObjective("volume", left), MQISolver(graph, left))
        assert result.set == left
        assert result.iterations == 1  # single rejected solve

    def test_zero_cut_seed_short_circuits(self):
        graph = graph_from_edges([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
        component = graph.node_set([0, 1, 2])
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = mqi(graph, component)
        assert result.objective == 0.0
        assert result.set == component

    def test_empty_seed_rejected(self, bell):
        graph, _, seed = bell
        empty = graph.node_set([])
        with pytest.raises(SeedRejectedError):
            dinkelbach(graph, RatioObjective("volume", empty), MQISolver(graph, seed))


class TestBisection:
    def test_matches_dinkelbach_with_exact_eps(self, bell):
        graph, _, seed = bell
        obj = RatioObjective("volume", seed)
        eps = exact_eps(obj, graph)
        greedy = dinkelbach(graph, obj, MQISolver(graph, seed))
        searched = bisection(graph, obj, MQISolver(graph, seed), eps)
        assert searched.objective_exact == greedy.objective_exact == Fraction(1, 13)

    def test_infeasible_branch_raises_lower_bound(self, bell):
        graph, _, seed = bell
        obj = RatioObjective("volume", seed)
        result = bisection(graph, obj, MQISolver(graph, seed), eps=exact_eps(obj, graph))
        infeasible_steps = [s for s in result.trace if s.denominator <= 0]
        assert infeasible_steps, "expected at least one midpoint below the optimum"

    def test_eps_range_validated(self, bell):
        graph, _, seed = bell
        obj = RatioObjective("volume", seed)
        with pytest.raises(ValueError):
            bisection(graph, obj, MQISolver(graph, seed), eps=0.0)
        with pytest.raises(ValueError):
            bisection(graph, obj, MQISolver(graph, seed), eps=2.0)


class TestExactEps:
    def test_volume_kind_threshold(self, bell):
        graph, _, seed = bell
        assert seed.volume == 19
        assert exact_eps(RatioObjective("volume", seed), graph) == Fraction(1, 2 * 19 * 19)

    def test_relative_kind_threshold(self, bell):
        graph, _, seed = bell
        theta = theta_of(graph, seed)
        obj = RatioObjective("relative-volume", seed, kappa=theta)
        assert exact_eps(obj, graph) == Fraction(1, 2 * 19 * 19 * 25)

    def test_degenerate_single_edge_reference(self):
        graph = graph_from_edges([(0, 1), (1, 2)])
        seed = graph.node_set([0])
        assert seed.volume == 1
        assert exact_eps(RatioObjective("volume", seed), graph) == Fraction(1, 2)

    def test_non_integer_graph_rejected(self):
        graph = graph_from_edges([(0, 1), (1, 2)], weights=[0.5, 1.0])
        seed = graph.node_set([0])
        with pytest.raises(ValueError, match="exactness not guaranteed"):
            exact_eps(RatioObjective("volume", seed), graph)

    def test_incompatible_kappa_rejected(self, bell):
        graph, _, seed = bell
        obj = RatioObjective("relative-volume", seed, kappa=theta_of(graph, seed) + Fraction(1, 7))
        with pytest.raises(ValueError, match="exactness not guaranteed"):
            exact_eps(obj, graph)


class TestComponentReduction:
    def test_disconnected_optimum_reduced_to_one_component(self):
        import itertools
        import warnings

        base = list(itertools.combinations(range(4), 2))
        base += list(itertools.combinations(range(4, 10), 2))
        base.append((3, 4))
        edges = base + [(u + 10, v + 10) for u, v in base]
        graph = graph_from_edges(edges)
        seed = graph.node_set([0, 1, 2, 3, 4, 10, 11, 12, 13, 14])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = mqi(graph, seed)
        assert len(result.set) == 4
        assert result.objective_exact == Fraction(1, 13)
