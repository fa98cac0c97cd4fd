"""Extremal blockers and the resilience picture at desk scale.

The complete 3-partite blocker achieves minimum degree about 2(N-1)/3 while
admitting no spanning square cycle, exactly as the exact oracle confirms on
N = 7..12. The triangle-killer makes one vertex triangle-free without
touching its own edges. A small resilience sweep then shows the success
fraction of the full embedding pipeline collapsing as the random adversary's
deletion fraction crosses the useful-density threshold.

The sweep runs the N = 1200 pipeline at three deletion fractions over a few
seeds; expect roughly a minute.
"""

from powercycle import (
    ExperimentConfig,
    adversary_triangle_killer,
    complete_graph,
    exact_longest_power_cycle,
    extremal_blocker,
    min_degree,
    partite_blocker_sizes,
    resilience_sweep,
)


def triangles_through(graph, v):
    nbrs = [u for u in range(graph.n) if graph.adj[v, u]]
    return sum(
        1
        for i in range(len(nbrs))
        for j in range(i + 1, len(nbrs))
        if graph.adj[nbrs[i], nbrs[j]]
    )


print("complete 3-partite blockers (no spanning square cycle despite high minimum degree):")
for N in range(7, 13):
    g, _ = extremal_blocker(N, 2)
    longest = len(exact_longest_power_cycle(g, 2))
    print(f"  N={N:2d} parts {partite_blocker_sizes(N, 2)}: min degree {min_degree(g)}, "
          f"longest square cycle {longest}")

print()
g = complete_graph(9)
thinned, report = adversary_triangle_killer(g, [0])
print(f"triangle-killer on K_9, victim 0: deleted {report.deleted_edges} edges, "
      f"victim degree {thinned.degree(0)} (unchanged), "
      f"triangles through victim: {triangles_through(thinned, 0)}")

print()
print("resilience sweep at N=1200 (success fraction of the embedding pipeline):")
cfg = ExperimentConfig(
    kind="resilience-sweep",
    params={
        "N": 1200, "p": 0.5, "k": 2, "d": 2 / 3, "eps": 0.15, "clusters": 6,
        "xi": 0.045, "delta": 0.0225, "r_grid": [0.05, 0.25, 0.45],
    },
    seeds=list(range(5)),
)
curve = resilience_sweep(cfg)["curve"]
for r, frac in curve.items():
    bar = "#" * int(20 * frac)
    print(f"  r={r:.2f}: {frac:4.2f} {bar}")
print("the asymptotic resilience constant is 1/(k+1) = 1/3; at this small N the")
print("pipeline loses its footing somewhat earlier, at N=3000 the knee sits")
print("between 0.25 and 0.45 (see the acceptance suite)")
