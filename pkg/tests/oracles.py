"""Independent brute-force oracles used by the tests.

These deliberately avoid the library's bitset paths: enumeration is nested
loops over part products, expansion is projection of naively enumerated
(k+1)-cliques, regularity is literal subset-pair enumeration. Keep them dumb.
"""

import itertools
from fractions import Fraction


def naive_canonical_cliques(view, window_start, order):
    parts = [view.parts[window_start + d].tolist() for d in range(order)]
    adj = view.graph.adj
    out = []
    for combo in itertools.product(*parts):
        if all(adj[combo[a], combo[b]] for a in range(order) for b in range(a + 1, order)):
            out.append(tuple(combo))
    return out


def naive_expand_step(view, start):
    k = start.order
    bigger = naive_canonical_cliques(view, start.window_start, k + 1)
    return frozenset(c[1:] for c in bigger if c[:-1] in start.members)


def naive_density(graph, V1, V2):
    e = sum(1 for u in V1 for v in V2 if graph.adj[u, v])
    return Fraction(e, len(V1) * len(V2))


def naive_max_deviation(graph, V1, V2, eps):
    """Largest |d(V1', V2') - d(V1, V2)| over all qualifying subset pairs,
    by literal enumeration. Only viable for |Vi| up to about 10."""
    import math

    V1, V2 = list(V1), list(V2)
    d = naive_density(graph, V1, V2)
    m1 = max(1, math.ceil(eps * len(V1)))
    m2 = max(1, math.ceil(eps * len(V2)))
    worst = Fraction(0)
    for q1 in range(m1, len(V1) + 1):
        for sub1 in itertools.combinations(V1, q1):
            for q2 in range(m2, len(V2) + 1):
                for sub2 in itertools.combinations(V2, q2):
                    dev = abs(naive_density(graph, sub1, sub2) - d)
                    if dev > worst:
                        worst = dev
    return worst


def triangles_at(graph, v):
    """All triangles through v, by exhaustive scan."""
    nbrs = [u for u in range(graph.n) if graph.adj[v, u]]
    out = []
    for i in range(len(nbrs)):
        for j in range(i + 1, len(nbrs)):
            if graph.adj[nbrs[i], nbrs[j]]:
                out.append((v, nbrs[i], nbrs[j]))
    return out
