import numpy as np
import pytest

from powercycle.graph_core import Graph, TupleView, complete_graph, complete_multipartite, empty_graph
from powercycle.models import (
    ModelParams,
    adversary_triangle_killer,
    extremal_blocker,
    gen_gnp,
    partite_blocker_sizes,
)
from powercycle.regularity import RegularityParams, build_nice_partition, chunk_partition
from powercycle.embedder import (
    ClusterCycle,
    EmbedFailure,
    EmbedParams,
    PowerCycle,
    ReducedGraph,
    build_reduced,
    embed_power_cycle,
    exact_longest_power_cycle,
    find_cluster_power_cycle,
    verify_power_cycle,
)

from oracles import naive_canonical_cliques


def circulant(N, k):
    adj = np.zeros((N, N), dtype=bool)
    for i in range(N):
        for off in range(1, k + 1):
            adj[i, (i + off) % N] = adj[(i + off) % N, i] = True
    return Graph(adj)


def nice_partition(graph, p, d, m, seed, trials=100):
    params = RegularityParams(epsilon=0.25, p=p, d=d, mu=2 / 3, trials=trials)
    return build_nice_partition(graph, params, m=m, seed=seed)


class TestReducedGraph:
    def test_all_dense_pairs_complete(self):
        part = nice_partition(complete_graph(60), 1.0, 0.9, 4, seed=1)
        red = build_reduced(part)
        assert len(red.edges) == 6
        assert red.degrees() == [3, 3, 3, 3]

    def test_empty_graph_edgeless(self):
        part = nice_partition(empty_graph(40), 0.5, 0.5, 4, seed=1)
        red = build_reduced(part)
        assert len(red.edges) == 0

    def test_density_threshold_filters(self):
        part = nice_partition(gen_gnp(ModelParams(N=120, p=0.5, seed=2)), 0.5, 0.5, 4, seed=2)
        assert len(build_reduced(part).edges) == 6
        assert len(build_reduced(part, d=1.5).edges) == 0


class TestClusterCycleSearch:
    def test_complete_reduced_natural_order(self):
        red = ReducedGraph(t0=6, edges=frozenset((i, j) for i in range(6) for j in range(i + 1, 6)), density={})
        cyc = find_cluster_power_cycle(red, 2)
        assert cyc.ordering == (0, 1, 2, 3, 4, 5)
        assert cyc.validate(red)

    def test_plain_hamilton_cycle_for_k1(self):
        edges = frozenset({(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)})
        cyc = find_cluster_power_cycle(ReducedGraph(t0=6, edges=edges, density={}), 1)
        assert cyc is not None and cyc.ordering[0] == 0

    def test_exhaustive_not_found(self):
        # A path of clusters has no Hamilton cycle at all.
        edges = frozenset({(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)})
        assert find_cluster_power_cycle(ReducedGraph(t0=6, edges=edges, density={}), 1) is None

    def test_square_cycle_on_tripartite_reduced(self):
        # Complete 3-partite reduced graph with parts {0,1},{2,3},{4,5}: a
        # square Hamilton ordering exists (every 3 consecutive clusters
        # rainbow) and the backtracker finds one.
        edges = set()
        parts = [(0, 1), (2, 3), (4, 5)]
        for a in range(6):
            for b in range(a + 1, 6):
                if not any(a in p and b in p for p in parts):
                    edges.add((a, b))
        cyc = find_cluster_power_cycle(ReducedGraph(t0=6, edges=frozenset(edges), density={}), 2)
        assert cyc is not None and cyc.validate(ReducedGraph(6, frozenset(edges), {}))

    def test_cap_refusal(self):
        red = ReducedGraph(t0=20, edges=frozenset(), density={})
        with pytest.raises(ValueError, match="cap"):
            find_cluster_power_cycle(red, 2)


class TestVerify:
    def test_circulant_natural_order(self):
        g = circulant(14, 3)
        ok, violation = verify_power_cycle(g, PowerCycle(tuple(range(14)), 3))
        assert ok and violation is None

    def test_missing_chord_detected(self):
        g = circulant(14, 2)
        adj = g.adj.copy()
        adj[3, 5] = adj[5, 3] = False
        ok, violation = verify_power_cycle(Graph(adj), PowerCycle(tuple(range(14)), 2))
        assert not ok and violation == (3, 5)

    def test_k1_hamilton_semantics(self):
        g = circulant(8, 1)
        ok, _ = verify_power_cycle(g, PowerCycle(tuple(range(8)), 1))
        assert ok
        ok, violation = verify_power_cycle(g, PowerCycle((0, 2, 4, 6, 1, 3, 5, 7), 1))
        assert not ok

    def test_duplicates_rejected(self):
        g = complete_graph(8)
        ok, violation = verify_power_cycle(g, PowerCycle((0, 1, 2, 3, 2, 5), 2))
        assert not ok and violation == (2, 2)

    def test_too_short_is_not_a_cycle(self):
        g = complete_graph(5)
        ok, _ = verify_power_cycle(g, PowerCycle((0, 1, 2), 2))
        assert not ok


class TestExactOracle:
    def test_complete_graph_spans(self):
        assert len(exact_longest_power_cycle(complete_graph(6), 2)) == 6

    def test_balanced_tripartite_spans(self):
        g, _ = complete_multipartite([2, 2, 2])
        result = exact_longest_power_cycle(g, 2)
        assert len(result) == 6
        ok, _ = verify_power_cycle(g, result)
        assert ok

    def test_triangle_killer_leaves_star_no_square_cycle(self):
        # Deleting every edge inside N(v) in K_6 leaves a star: no triangles
        # anywhere, so no square cycle of any admissible length.
        thinned, _ = adversary_triangle_killer(complete_graph(6), [0])
        assert len(exact_longest_power_cycle(thinned, 2)) == 0

    def test_blockers_never_span(self):
        for N in range(7, 13):
            g, _ = extremal_blocker(N, 2)
            assert len(exact_longest_power_cycle(g, 2)) < N

    def test_result_verifies_when_nonempty(self):
        g = gen_gnp(ModelParams(N=10, p=0.7, seed=3))
        result = exact_longest_power_cycle(g, 2)
        if len(result):
            ok, _ = verify_power_cycle(g, result)
            assert ok

    def test_cap_refusal(self):
        with pytest.raises(ValueError, match="cap"):
            exact_longest_power_cycle(complete_graph(13), 2)

    def test_k1_longest_cycle(self):
        g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5)])
        assert len(exact_longest_power_cycle(g, 1)) == 3


class TestEmbed:
    def _embed_complete(self, N=60, seed=5, xi=0.2, eps=0.4):
        g = complete_graph(N)
        part = nice_partition(g, 1.0, 2 / 3, 6, seed=seed)
        red = build_reduced(part)
        cyc = find_cluster_power_cycle(red, 2)
        params = EmbedParams(k=2, d=2 / 3, p=1.0, xi=xi, delta=0.02, eps=eps, seed=seed)
        return g, embed_power_cycle(g, part, cyc, params)

    def test_complete_host_succeeds_verified(self):
        g, result = self._embed_complete()
        assert isinstance(result, PowerCycle)
        ok, _ = verify_power_cycle(g, result)
        assert ok
        assert len(result) >= (1 - 0.4) * 60

    def test_same_seed_same_cycle(self):
        _, a = self._embed_complete(seed=9)
        _, b = self._embed_complete(seed=9)
        assert a.vertices == b.vertices

    def test_output_never_beats_exact_oracle(self):
        # The exact oracle on the complete host would report N itself, so the
        # embedded cycle can never exceed it: it must be a simple cycle on at
        # most N distinct vertices.
        g, result = self._embed_complete(N=60, seed=2)
        assert isinstance(result, PowerCycle)
        assert len(set(result.vertices)) == len(result)
        assert len(result) <= g.n

    def test_chunked_layout_r2(self):
        g = complete_graph(120)
        part = nice_partition(g, 1.0, 2 / 3, 6, seed=3)
        red = build_reduced(part)
        cyc = find_cluster_power_cycle(red, 2)
        chunked = chunk_partition(part, part.class_size // 2, seed=3)
        params = EmbedParams(k=2, d=2 / 3, p=1.0, xi=0.2, delta=0.02, eps=0.5, seed=3)
        result = embed_power_cycle(g, chunked, cyc, params)
        assert isinstance(result, PowerCycle)
        ok, _ = verify_power_cycle(g, result)
        assert ok

    def test_blocked_host_returns_failure_report(self):
        # Beyond the resilience threshold the pipeline must fail with a
        # report, and the exact oracle confirms on a tiny analogue that no
        # near-spanning square cycle exists at all.
        g, view = extremal_blocker(12, 2)
        classes = [part[:3] for part in view.parts]
        leftovers = np.concatenate([part[3:] for part in view.parts])
        from powercycle.regularity import RegularPartition

        part = RegularPartition(
            exceptional=leftovers,
            classes=classes,
            epsilon=0.3,
            p=1.0,
            d=0.5,
            pair_density={},
            regular_pairs=frozenset(),
            useful_pairs=frozenset(),
        )
        cyc = ClusterCycle((0, 1, 2), 2)
        params = EmbedParams(k=2, d=0.5, p=1.0, xi=0.34, delta=0.02, eps=0.15, seed=1)
        result = embed_power_cycle(g, part, cyc, params)
        assert isinstance(result, EmbedFailure)
        assert result.stage in ("layout", "anchor", "extend", "closing", "length")
        assert len(exact_longest_power_cycle(g, 2)) < (1 - 0.15) * 12

    def test_failure_report_serializes(self):
        import json

        failure = EmbedFailure(stage="anchor", detail="x", sizes={"t": 6})
        blob = json.loads(json.dumps(failure.to_dict()))
        assert blob["stage"] == "anchor"


class TestBlockerGeometry:
    def test_window_coloring_obstruction(self):
        # Any square Hamilton cycle in a 3-partite graph forces a proper
        # 3-coloring of the squared cycle, so the vertex count must be
        # divisible by 3 and the parts balanced; the blocker sizes never are.
        for N in range(7, 13):
            sizes = partite_blocker_sizes(N, 2)
            assert N % 3 != 0 or max(sizes) > N // 3
