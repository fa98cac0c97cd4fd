"""Certifiers for typical vertices, typical clique copies, and super-typical
tuples, plus count audits against product expectations.

Expected counts and neighbourhood windows are centred on the measured pair
densities of the view rather than nominal model densities: that removes
generator variance from verdicts, and the multiplicative tolerance windows
absorb exactly the remaining per-vertex fluctuation. Regularity sub-checks use
the sampled refuter with a fixed trial budget; "regular" here always means
"not refuted within budget".

All counts come from graph_core enumeration; nothing in this module counts
cliques on its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph_core import (
    TupleView,
    bit_indices,
    count_canonical_cliques,
    enumerate_canonical_cliques,
)
from .regularity import check_regular_sampled

__all__ = [
    "TypicalityParams",
    "TypicalityReport",
    "typical_vertices",
    "is_typical_clique",
    "check_super_typical",
    "clique_count_upper_check",
]


@dataclass(frozen=True)
class TypicalityParams:
    """epsilon drives the per-vertex windows and tuple-level regularity,
    delta the count windows and per-copy typicality; trials is the budget for
    each sampled regularity sub-check."""

    epsilon: float
    delta: float
    p: float
    trials: int = 200
    subset_fraction: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")


@dataclass
class TypicalityReport:
    typical_vertices: list
    typical_fraction: list
    clique_counts: dict
    expected_counts: dict
    typical_clique_count: int
    typical_clique_expected: float
    verdicts: dict
    trials: int

    @property
    def super_typical(self) -> bool:
        return self.verdicts["super_typical"]

    def failing_conditions(self) -> list:
        return sorted(k for k, ok in self.verdicts.items() if k != "super_typical" and not ok)

    def to_dict(self) -> dict:
        return {
            "schema": "powercycle/typicality-v1",
            "typical_fraction": [float(f) for f in self.typical_fraction],
            "clique_counts": {k: int(v) for k, v in self.clique_counts.items()},
            "expected_counts": {k: float(v) for k, v in self.expected_counts.items()},
            "typical_clique_count": int(self.typical_clique_count),
            "typical_clique_expected": float(self.typical_clique_expected),
            "verdicts": dict(self.verdicts),
            "trials": self.trials,
        }


def _within(value: float, center: float, rel: float, tol: float = 1e-9) -> bool:
    return (1 - rel) * center - tol <= value <= (1 + rel) * center + tol


def _fold(vertices: tuple) -> int:
    """Deterministic integer label for a vertex tuple, used to split seeds."""
    h = 0
    for v in vertices:
        h = (h * 1_000_003 + int(v) + 1) % (1 << 31)
    return h


def _pair_ok(
    graph, ids_a, ids_b, eps: float, params: TypicalityParams, center: float, seed: int
) -> bool:
    """Sampled check that a neighbourhood pair is unrefuted at (eps, p) and has
    density within (1 +/- eps) of the given centre."""
    if len(ids_a) == 0 or len(ids_b) == 0:
        # Degenerate pair: density 0; acceptable only when nothing is expected.
        return _within(0.0, center, eps)
    d = float(graph.adj[np.ix_(ids_a, ids_b)].sum()) / (len(ids_a) * len(ids_b))
    if not _within(d, center, eps):
        return False
    verdict = check_regular_sampled(
        graph,
        ids_a,
        ids_b,
        eps,
        params.p,
        trials=params.trials,
        subset_fraction=params.subset_fraction,
        seed=seed,
    )
    return not verdict.refuted


def typical_vertices(
    view: TupleView, params: TypicalityParams, seed: int = 0
) -> list:
    """Per-part arrays of vertices that are typical at epsilon: every
    neighbourhood in another part has size within (1 +/- eps) of its measured
    mean, and every pair of those neighbourhoods is an unrefuted pair of
    density within the (1 +/- eps) window."""
    if view.t < 3:
        raise ValueError(f"typical vertices need at least 3 parts, got {view.t}")
    graph = view.graph
    eps = params.epsilon
    t = view.t
    # counts[i][j] = |N(v, V_j)| for each v in part i, vectorized per pair.
    counts = {}
    for i in range(t):
        for j in range(t):
            if i != j:
                counts[(i, j)] = graph.adj[np.ix_(view.parts[i], view.parts[j])].sum(axis=1)
    out = []
    for i in range(t):
        others = [j for j in range(t) if j != i]
        size_ok = np.ones(view.sizes[i], dtype=bool)
        for j in others:
            center = float(view.density(i, j)) * view.sizes[j]
            col = counts[(i, j)]
            size_ok &= (col >= (1 - eps) * center - 1e-9) & (col <= (1 + eps) * center + 1e-9)
        good = []
        for local in np.nonzero(size_ok)[0]:
            v = int(view.parts[i][local])
            row = graph.rows[v]
            ok = True
            for a_pos in range(len(others)):
                for b_pos in range(a_pos + 1, len(others)):
                    j, l = others[a_pos], others[b_pos]
                    nj = np.fromiter(bit_indices(row & view.part_mask(j)), dtype=np.int64)
                    nl = np.fromiter(bit_indices(row & view.part_mask(l)), dtype=np.int64)
                    center = float(view.density(j, l))
                    if not _pair_ok(
                        graph, nj, nl, eps, params, center,
                        seed + 1_000_003 * v + 97 * j + l,
                    ):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                good.append(v)
        out.append(np.asarray(good, dtype=np.int64))
    return out


def _typical_copy(
    view: TupleView,
    copy: tuple,
    copy_idx: Sequence[int],
    target_idx: tuple,
    rel: float,
    params: TypicalityParams,
    seed: int,
) -> bool:
    """Shared typicality test for a canonical clique sitting on parts
    ``copy_idx``, judged against the two target parts: both common
    neighbourhoods must hit their measured size windows and span an unrefuted
    pair of density within the window."""
    graph = view.graph
    nbr_masks = []
    for a in target_idx:
        m = view.part_mask(a)
        for v in copy:
            m &= graph.rows[v]
        expected = view.sizes[a]
        for j in copy_idx:
            expected *= float(view.density(j, a))
        if not _within(m.bit_count(), expected, rel):
            return False
        nbr_masks.append(m)
    ids_a = np.fromiter(bit_indices(nbr_masks[0]), dtype=np.int64)
    ids_b = np.fromiter(bit_indices(nbr_masks[1]), dtype=np.int64)
    center = float(view.density(target_idx[0], target_idx[1]))
    return _pair_ok(graph, ids_a, ids_b, rel, params, center, seed)


def is_typical_clique(
    copy: tuple, view: TupleView, params: TypicalityParams, seed: int = 0
) -> bool:
    """Is a canonical copy of K_{t-2} living on the first t-2 parts typical at
    delta with respect to the last two parts?"""
    t = view.t
    if t < 3:
        raise ValueError(f"typical cliques need at least 3 parts, got {t}")
    if len(copy) != t - 2:
        raise ValueError(f"copy must have order t-2={t - 2}, got {len(copy)}")
    return _typical_copy(
        view, copy, list(range(t - 2)), (t - 2, t - 1), params.delta, params, seed
    )


def _expected_count(view: TupleView, indices: Sequence[int]) -> float:
    expected = 1.0
    for i in indices:
        expected *= view.sizes[i]
    for a in range(len(indices)):
        for b in range(a + 1, len(indices)):
            expected *= float(view.density(indices[a], indices[b]))
    return expected


def check_super_typical(
    view: TupleView, params: TypicalityParams, seed: int = 0
) -> TypicalityReport:
    """Evaluate the full super-typicality ledger of a t-tuple: the middle
    K_{t-2} count and both K_{t-1} counts within (1 +/- delta) of their
    measured expectations, at least a (1 - delta) fraction of the middle
    copies delta-typical toward the outer parts, and the tuple itself typical
    at epsilon. For t = 3 the middle window has order 1 and its copies are
    the vertices of the middle part."""
    t = view.t
    if t < 3:
        raise ValueError(f"super-typicality needs at least 3 parts, got {t}")
    delta = params.delta
    middle = list(range(1, t - 1))
    left = list(range(0, t - 1))
    right = list(range(1, t))

    clique_counts = {
        "middle": count_canonical_cliques(view.subview(middle), 0, t - 2),
        "left": count_canonical_cliques(view.subview(left), 0, t - 1),
        "right": count_canonical_cliques(view.subview(right), 0, t - 1),
    }
    expected_counts = {
        "middle": _expected_count(view, middle),
        "left": _expected_count(view, left),
        "right": _expected_count(view, right),
    }
    verdicts = {
        name: _within(clique_counts[name], expected_counts[name], delta)
        for name in ("middle", "left", "right")
    }

    middle_copies = enumerate_canonical_cliques(view.subview(middle), 0, t - 2)
    n_typ = 0
    for copy in middle_copies.sorted():
        if _typical_copy(
            view, copy, middle, (0, t - 1), delta, params, seed + _fold(copy)
        ):
            n_typ += 1
    typ_expected = expected_counts["middle"]
    verdicts["typical_cliques"] = n_typ >= (1 - delta) * typ_expected - 1e-9

    typ_vertices = typical_vertices(view, params, seed)
    fractions = [len(typ_vertices[i]) / view.sizes[i] for i in range(t)]
    tuple_ok = all(f >= 1 - params.epsilon - 1e-9 for f in fractions)
    if tuple_ok:
        for i in range(t):
            for j in range(i + 1, t):
                verdict = check_regular_sampled(
                    view.graph,
                    view.parts[i],
                    view.parts[j],
                    params.epsilon,
                    params.p,
                    trials=params.trials,
                    subset_fraction=params.subset_fraction,
                    seed=seed + 7919 * (i * t + j),
                )
                if verdict.refuted:
                    tuple_ok = False
                    break
            if not tuple_ok:
                break
    verdicts["tuple_typical"] = tuple_ok
    verdicts["super_typical"] = all(verdicts.values())

    return TypicalityReport(
        typical_vertices=typ_vertices,
        typical_fraction=fractions,
        clique_counts=clique_counts,
        expected_counts=expected_counts,
        typical_clique_count=n_typ,
        typical_clique_expected=typ_expected,
        verdicts=verdicts,
        trials=params.trials,
    )


def clique_count_upper_check(
    view: TupleView, t: int, eps: float, p: float, tol: float = 1e-9
) -> bool:
    """Audit that the exact canonical K_t count does not exceed
    (1 + eps) * (prod |S_i|) * p^{C(t,2)} at the nominal density p."""
    if t != view.t:
        raise ValueError(f"view has {view.t} parts, expected t={t}")
    count = count_canonical_cliques(view, 0, t)
    bound = 1.0
    for s in view.sizes:
        bound *= s
    bound *= p ** (t * (t - 1) // 2)
    return count <= (1 + eps) * bound + tol
