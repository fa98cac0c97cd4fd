"""Window-by-window embedding of the k-th power of an almost-spanning cycle,
plus the exact small-instance oracles that keep it honest.

The pipeline: build a reduced graph on partition classes (edges for unrefuted
pairs of density at least d*p), find a power-cycle ordering of the classes by
exact backtracking, lay the chunked classes out as t cyclic windows, then grow
a k-path one window-round at a time. Each round draws fresh target sets, asks
the expansion engine for one clique of the current frontier that expands well
into them, and realizes one new vertex per window from the stored predecessor
layer. A reserve tuple drawn at the start is spent at the end to close the
path into a cycle through an anchor clique that was chosen, back at step one,
to expand well both forward and backward.

Failures (an expander coming up empty after redraws, pools running dry) are
reported as data, not exceptions: an EmbedFailure names the first failing
stage and carries the live set sizes and reach fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .graph_core import (
    CliqueSet,
    Graph,
    TupleView,
    bit_indices,
    enumerate_canonical_cliques,
)
from .models import stream
from .regularity import RegularPartition
from .expansion import (
    ExpansionParams,
    expand_through,
    find_expander,
    reconstruct_path,
    reference_count,
)

__all__ = [
    "ReducedGraph",
    "ClusterCycle",
    "EmbedParams",
    "EmbeddingState",
    "PowerCycle",
    "EmbedFailure",
    "build_reduced",
    "find_cluster_power_cycle",
    "embed_power_cycle",
    "verify_power_cycle",
    "exact_longest_power_cycle",
]


@dataclass(frozen=True)
class PowerCycle:
    """A cyclic vertex sequence claimed to span the k-th power of a cycle.
    The empty sequence stands for "no such cycle" (cycles shorter than k+2
    vertices are cliques, not cycles, and are never reported)."""

    vertices: tuple
    k: int

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass
class ReducedGraph:
    """Cluster graph of a partition: one node per non-exceptional class, an
    edge for every unrefuted pair of density at least d*p."""

    t0: int
    edges: frozenset
    density: dict

    def adjacent(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def degrees(self) -> list:
        deg = [0] * self.t0
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


@dataclass(frozen=True)
class ClusterCycle:
    """Cyclic ordering of all clusters in which every k+1 consecutive ones are
    pairwise adjacent in the reduced graph."""

    ordering: tuple
    k: int

    def validate(self, reduced: ReducedGraph) -> bool:
        t0 = len(self.ordering)
        if sorted(self.ordering) != list(range(reduced.t0)):
            return False
        for i in range(t0):
            for off in range(1, self.k + 1):
                if not reduced.adjacent(self.ordering[i], self.ordering[(i + off) % t0]):
                    return False
        return True


@dataclass(frozen=True)
class EmbedParams:
    """k: power order; d, p: density threshold scale of the reduced graph;
    xi: target-set fraction of the window size; delta: expansion slack;
    eps: admissible leftover fraction; retries: redraws allowed per stage."""

    k: int
    d: float
    p: float
    xi: float
    delta: float
    eps: float
    retries: int = 5
    seed: int = 0

    def expansion(self) -> ExpansionParams:
        return ExpansionParams(k=self.k, delta=self.delta, alpha=self.d, p=self.p)


@dataclass
class EmbeddingState:
    """Live induction state: per-window reserve sets, used path vertices,
    active targets, the anchor clique with its backward reach, and the step."""

    step: int
    reserve: list
    targets: list
    used: list
    anchor: Optional[tuple] = None
    anchor_back_reach: int = 0
    frontier_size: int = 0

    def sizes(self) -> dict:
        return {
            "step": self.step,
            "reserve": [len(s) for s in self.reserve],
            "targets": [len(t) for t in self.targets],
            "used": [len(u) for u in self.used],
            "frontier": self.frontier_size,
        }


@dataclass
class EmbedFailure:
    stage: str
    step: Optional[int] = None
    window: Optional[int] = None
    detail: str = ""
    sizes: dict = field(default_factory=dict)
    fraction: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "schema": "powercycle/embed-failure-v1",
            "stage": self.stage,
            "step": self.step,
            "window": self.window,
            "detail": self.detail,
            "sizes": self.sizes,
            "fraction": self.fraction,
        }


def build_reduced(
    partition: RegularPartition,
    d: Optional[float] = None,
    p: Optional[float] = None,
    tol: float = 1e-9,
) -> ReducedGraph:
    """Reduced graph on the partition classes."""
    if partition.k < 3:
        raise ValueError(f"need at least 3 classes, got {partition.k}")
    d = partition.d if d is None else d
    p = partition.p if p is None else p
    edges = set()
    density = {}
    for (i, j), dens in partition.pair_density.items():
        if (i, j) in partition.regular_pairs and float(dens) >= d * p - tol:
            edges.add((i, j))
            density[(i, j)] = float(dens)
    return ReducedGraph(t0=partition.k, edges=frozenset(edges), density=density)


def find_cluster_power_cycle(
    reduced: ReducedGraph, k: int, cap: int = 16
) -> Optional[ClusterCycle]:
    """Exact backtracking search for a cyclic ordering of all clusters whose
    k-th power is contained in the reduced graph. Exhaustive: a None return
    means no such ordering exists."""
    t0 = reduced.t0
    if t0 > cap:
        raise ValueError(f"{t0} clusters exceed the exact-search cap {cap}")
    if t0 < k + 2:
        raise ValueError(f"a k-power cycle ordering needs at least k+2={k + 2} clusters")
    rows = [0] * t0
    for i, j in reduced.edges:
        rows[i] |= 1 << j
        rows[j] |= 1 << i

    seq = [0]
    used = 1

    def closable() -> bool:
        for x in range(1, k + 1):
            for y in range(0, k - x + 1):
                u, v = seq[-x], seq[y]
                if not (rows[u] >> v) & 1:
                    return False
        return True

    def dfs() -> Optional[list]:
        if len(seq) == t0:
            if seq[1] < seq[-1] and closable():
                return list(seq)
            return None
        nonlocal used
        cand = ((1 << t0) - 1) & ~used
        for v in seq[-min(k, len(seq)) :]:
            cand &= rows[v]
        for w in bit_indices(cand):
            seq.append(w)
            used |= 1 << w
            hit = dfs()
            if hit is not None:
                return hit
            seq.pop()
            used &= ~(1 << w)
        return None

    found = dfs()
    if found is None:
        return None
    cycle = ClusterCycle(tuple(found), k)
    assert cycle.validate(reduced)
    return cycle


def verify_power_cycle(graph: Graph, candidate: PowerCycle) -> tuple:
    """(True, None) iff the vertices are distinct, the sequence is long enough
    to be a cycle rather than a clique, and every pair at cyclic distance at
    most k is adjacent; otherwise (False, first_violating_pair)."""
    verts = candidate.vertices
    n_c = len(verts)
    k = candidate.k
    if n_c < k + 2:
        return False, None
    seen = set()
    for v in verts:
        if v in seen:
            return False, (v, v)
        seen.add(v)
    for i in range(n_c):
        for off in range(1, min(k, n_c - 1) + 1):
            u, v = verts[i], verts[(i + off) % n_c]
            if not graph.has_edge(u, v):
                return False, (u, v)
    return True, None


def exact_longest_power_cycle(graph: Graph, k: int, cap: int = 12) -> PowerCycle:
    """Brute-force maximum-length k-th power of a cycle, by branch and bound
    over vertex sequences with the running k-window clique constraint.
    Sequences shorter than k+2 vertices do not count; with none above that
    length the result has length 0."""
    n = graph.n
    if n > cap:
        raise ValueError(f"exact search capped at {cap} vertices, graph has {n}")
    rows = graph.rows
    best: list = []

    def closable(seq: list) -> bool:
        for x in range(1, k + 1):
            for y in range(0, k - x + 1):
                if x + y >= len(seq):
                    continue
                if not (rows[seq[-x]] >> seq[y]) & 1:
                    return False
        return True

    for anchor in range(n):
        if n - anchor <= len(best):
            break
        allowed = 0
        for v in range(anchor + 1, n):
            allowed |= 1 << v

        seq = [anchor]
        used = 1 << anchor

        def dfs():
            nonlocal used, best
            if len(seq) >= k + 2 and len(seq) > len(best):
                if (len(seq) < 3 or seq[1] < seq[-1]) and closable(seq):
                    best = list(seq)
            free = allowed & ~used
            if len(seq) + free.bit_count() <= len(best):
                return
            cand = free
            for v in seq[-min(k, len(seq)) :]:
                cand &= rows[v]
            for w in bit_indices(cand):
                seq.append(w)
                used |= 1 << w
                dfs()
                seq.pop()
                used &= ~(1 << w)

        dfs()
    return PowerCycle(tuple(best), k)


def _draw(rng, pool: np.ndarray, exclude: list, count: int) -> Optional[np.ndarray]:
    """Seeded draw of ``count`` vertices from pool minus the excluded sets."""
    banned = [np.asarray(sorted(e), dtype=np.int64) for e in exclude if len(e)]
    if banned:
        cand = pool[~np.isin(pool, np.concatenate(banned))]
    else:
        cand = pool
    if len(cand) < count:
        return None
    return np.sort(cand[rng.permutation(len(cand))[:count]])


def _layout_windows(partition: RegularPartition, cycle: ClusterCycle) -> list:
    """Window pools along the cluster cycle: one pool per chunk, round-major
    (round j visits chunk j of every cluster in cycle order)."""
    if partition.parent is None:
        groups = {i: [cls] for i, cls in enumerate(partition.classes)}
    else:
        groups = {}
        for idx, par in enumerate(partition.parent):
            groups.setdefault(par, []).append(partition.classes[idx])
    t0 = len(cycle.ordering)
    if sorted(groups) != list(range(t0)):
        raise ValueError("cluster cycle does not match the partition's classes")
    rounds = {len(g) for g in groups.values()}
    if len(rounds) != 1:
        raise ValueError("all clusters must carry the same number of chunks")
    r = rounds.pop()
    pools = []
    for j in range(r):
        for pos in range(t0):
            pools.append(groups[cycle.ordering[pos]][j])
    sizes = {len(p) for p in pools}
    if len(sizes) != 1:
        raise ValueError("window pools must have a common size")
    return pools


def embed_power_cycle(
    graph: Graph,
    partition: RegularPartition,
    cycle: ClusterCycle,
    params: EmbedParams,
) -> Union[PowerCycle, EmbedFailure]:
    """Run the full induction and return a verified PowerCycle on at least
    (1 - eps) N vertices, or an EmbedFailure naming the first failing stage.
    """
    k = params.k
    pools = _layout_windows(partition, cycle)
    t = len(pools)
    n_prime = len(pools[0])
    n_tilde = max(k, int(params.xi * n_prime))
    exp_params = params.expansion()
    rng = stream(params.seed, 41)

    # The induction runs while every window pool can still supply a reserve
    # set, the used path prefix, the live targets, and a fresh draw.
    s_final = min(int((1 - 2 * params.xi) * n_prime), n_prime - 3 * n_tilde)
    if s_final < 1:
        return EmbedFailure(
            stage="layout",
            detail=f"window size {n_prime} cannot host targets of size {n_tilde}",
            sizes={"t": t, "n_prime": n_prime, "n_tilde": n_tilde},
        )

    state = EmbeddingState(
        step=0,
        reserve=[np.empty(0, dtype=np.int64)] * t,
        targets=[np.empty(0, dtype=np.int64)] * t,
        used=[set() for _ in range(t)],
    )
    state.reserve = [_draw(rng, pools[m], [], n_tilde) for m in range(t)]
    state.targets = [_draw(rng, pools[m], [state.reserve[m]], n_tilde) for m in range(t)]
    threshold = exp_params.success_fraction

    # Anchor: one clique expanding forward to the last target block and
    # backward through the reserve tuple.
    fwd_view = TupleView(graph, state.targets)
    bwd_parts = [state.targets[k - 1 - j] for j in range(k)] + [
        state.reserve[t - 1 - j] for j in range(t)
    ]
    bwd_view = TupleView(graph, bwd_parts)
    anchor = None
    for cand in enumerate_canonical_cliques(fwd_view, 0, k).sorted():
        fwd = expand_through(
            CliqueSet(0, k, frozenset([cand])), fwd_view, t - k, exp_params, keep_bp=True
        )
        x_fwd, _ = reference_count(fwd_view, t - k, k, params.d, params.p)
        if fwd.counts[-1] < threshold * x_fwd:
            continue
        rev = tuple(reversed(cand))
        bwd = expand_through(
            CliqueSet(0, k, frozenset([rev])), bwd_view, t, exp_params, keep_bp=True
        )
        x_bwd, _ = reference_count(bwd_view, t, k, params.d, params.p)
        if bwd.counts[-1] >= threshold * x_bwd:
            anchor = cand
            break
    if anchor is None:
        return EmbedFailure(stage="anchor", detail="no clique expands both ways", sizes=state.sizes())

    state.anchor = anchor
    state.anchor_back_reach = bwd.counts[-1]
    # Backward reach, reoriented as canonical copies of the first k reserves.
    kstar_back = {tuple(reversed(c)) for c in bwd.final.members}
    bwd_bp = bwd.back_pointers
    frontier = fwd.final.members
    bp_prev = fwd.back_pointers
    path: list = []
    state.step = 1
    state.frontier_size = len(frontier)

    def append_round(chosen: tuple, skip: int) -> None:
        """Realize the round ending at ``chosen`` from the stored predecessor
        layer; the first ``skip`` reconstructed vertices are already on the
        path."""
        verts = reconstruct_path(0, bp_prev, chosen)
        new = verts[skip:]
        if len(new) != t:
            raise RuntimeError(f"round realized {len(new)} vertices, expected {t}")
        for m, v in enumerate(new):
            if v in state.used[m]:
                raise RuntimeError(f"vertex {v} reused in window {m}")
            state.used[m].add(v)
        path.extend(new)

    def audit() -> None:
        for m in range(t):
            res, tgt, usd = set(state.reserve[m]), set(state.targets[m]), state.used[m]
            if res & tgt or res & usd or tgt & usd:
                raise RuntimeError(f"window {m}: reserve/targets/path overlap at step {state.step}")
            if len(usd) != state.step - 1:
                raise RuntimeError(
                    f"window {m}: {len(usd)} path vertices at step {state.step}"
                )

    for s in range(1, s_final):
        audit()
        result = None
        for attempt in range(params.retries + 1):
            fresh = [
                _draw(
                    stream(params.seed, 43, s, attempt, m),
                    pools[m],
                    [state.reserve[m], state.used[m], state.targets[m]],
                    n_tilde,
                )
                for m in range(t)
            ]
            if any(f is None for f in fresh):
                return EmbedFailure(
                    stage="extend",
                    step=s,
                    detail="window pool exhausted",
                    sizes=state.sizes(),
                )
            windows = [state.targets[t - k + j] for j in range(k)] + fresh
            view = TupleView(graph, windows)
            try:
                res = find_expander(
                    CliqueSet(0, k, frozenset(frontier)), view, k + t, exp_params, keep_bp=True
                )
            except ValueError as err:
                return EmbedFailure(
                    stage="extend", step=s, detail=str(err), sizes=state.sizes()
                )
            if res.found:
                result = (res, fresh)
                break
        if result is None:
            return EmbedFailure(
                stage="extend",
                step=s,
                detail=f"no expander after {params.retries + 1} target draws",
                sizes=state.sizes(),
                fraction=res.best_fraction,
            )
        res, fresh = result
        append_round(res.clique, 0 if s == 1 else k)
        state.targets = fresh
        frontier = res.reach.members
        bp_prev = res.back_pointers
        state.step = s + 1
        state.frontier_size = len(frontier)

    # Closing: connect the frontier through a fresh tuple into the reserves
    # and splice with the anchor's backward reach.
    audit()
    closing = None
    for attempt in range(params.retries + 1):
        fresh = [
            _draw(
                stream(params.seed, 47, attempt, m),
                pools[m],
                [state.reserve[m], state.used[m], state.targets[m]],
                n_tilde,
            )
            for m in range(t)
        ]
        if any(f is None for f in fresh):
            return EmbedFailure(
                stage="closing", step=s_final, detail="window pool exhausted", sizes=state.sizes()
            )
        windows = (
            [state.targets[t - k + j] for j in range(k)]
            + fresh
            + [state.reserve[j] for j in range(k)]
        )
        view = TupleView(graph, windows)
        x_close, _ = reference_count(view, t + k, k, params.d, params.p)
        for cand in sorted(frontier):
            trace = expand_through(
                CliqueSet(0, k, frozenset([cand])), view, t + k, exp_params, keep_bp=True
            )
            if trace.counts[-1] < threshold * x_close:
                continue
            meet = sorted(trace.final.members & kstar_back)
            if meet:
                closing = (cand, meet[0], trace)
                break
        if closing is not None:
            break
    if closing is None:
        return EmbedFailure(
            stage="closing",
            step=s_final,
            detail="no frontier clique reaches the anchor's backward set",
            sizes=state.sizes(),
        )

    chosen, q, trace = closing
    append_round(chosen, 0 if s_final == 1 else k)
    close_verts = reconstruct_path(0, trace.back_pointers, q)
    path.extend(close_verts[k:])  # one vertex per fresh window, then q itself
    back_verts = reconstruct_path(0, bwd_bp, tuple(reversed(q)))
    tail = back_verts[k : k + (t - k)]
    path.extend(reversed(tail))

    cycle_out = PowerCycle(tuple(int(v) for v in path), k)
    ok, violation = verify_power_cycle(graph, cycle_out)
    if not ok:
        return EmbedFailure(
            stage="verify",
            step=s_final,
            detail=f"violating pair {violation}",
            sizes=state.sizes(),
        )
    if len(cycle_out) < (1 - params.eps) * graph.n:
        return EmbedFailure(
            stage="length",
            step=s_final,
            detail=f"cycle on {len(cycle_out)} of {graph.n} vertices misses (1-eps)N",
            sizes=state.sizes(),
        )
    return cycle_out
