"""The clique-expansion dynamic: one-step window expansion of clique sets,
multi-window reachability, and the bisection search for a single
well-expanding clique.

A frontier of canonical K_k copies anchored at window i expands to window
i+1: the copy (v_{i+1}, ..., v_{i+k}) is reached when some v_i in the frontier
extends it to a canonical K_{k+1} on the (k+1)-window. Frontiers are stored as
maps from (k-1)-suffixes to head bitmasks, so one step is a batch of bitset
intersections; only the current frontier is kept, with an optional
one-predecessor-per-copy layer for reconstructing a single connecting k-path
on demand.

Reach fractions are reported against two normalizations of the reference
count for a window block: the measured one (product of window sizes and
measured pair densities) and, when the nominal density scale is supplied, the
nominal (alpha p)^{e(K_k)} one. Thresholds use the measured normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .graph_core import (
    CliqueSet,
    TupleView,
    bit_indices,
    count_canonical_cliques,
    enumerate_canonical_cliques,
)
from .models import stream
from .typicality import TypicalityParams, check_super_typical

__all__ = [
    "ExpansionParams",
    "ExpansionTrace",
    "ExpanderResult",
    "PreconditionError",
    "expand_step",
    "expand_through",
    "find_expander",
    "one_step_expansion_audit",
    "halving_audit",
    "reference_count",
    "reconstruct_path",
    "encode_frontier",
    "decode_frontier",
]


class PreconditionError(ValueError):
    """Raised when an audit's certified hypothesis does not hold; carries the
    failing conditions."""

    def __init__(self, message: str, failing: list):
        super().__init__(message)
        self.failing = failing


@dataclass(frozen=True)
class ExpansionParams:
    """k is the clique order of the dynamic; delta the slack driving the
    thresholds; alpha and p, when given, define the nominal reference count
    normalization. The one-step and multi-window audits accept any delta in
    (0,1); the expander search additionally requires delta < 1/(20k), below
    which its success and halving thresholds are meaningful, and enforces
    that itself."""

    k: int
    delta: float
    kappa: float = 0.5
    alpha: Optional[float] = None
    p: Optional[float] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")

    def require_search_regime(self) -> None:
        if not self.delta < 1.0 / (20 * self.k):
            raise ValueError(
                f"expander search needs delta < 1/(20k) = {1.0 / (20 * self.k):.4g}, "
                f"got {self.delta}"
            )

    @property
    def success_fraction(self) -> float:
        return 1.0 - 20 * self.k * self.delta

    @property
    def half_fraction(self) -> float:
        return 0.5 - 5 * self.k * self.delta


def reference_count(
    view: TupleView, window_start: int, k: int, alpha: Optional[float] = None, p: Optional[float] = None
) -> tuple:
    """(measured, nominal) reference counts for the K_k block at a window.
    Measured multiplies window sizes by measured pair densities; nominal uses
    (alpha p)^{e(K_k)} and is None unless both alpha and p are given."""
    measured = 1.0
    for d in range(k):
        measured *= view.sizes[window_start + d]
    nominal = measured if (alpha is not None and p is not None) else None
    for a in range(k):
        for b in range(a + 1, k):
            measured *= float(view.density(window_start + a, window_start + b))
    if nominal is not None:
        nominal *= (alpha * p) ** (k * (k - 1) // 2)
    return measured, nominal


def _frontier_of(members, k: int) -> dict:
    """Frontier form of a clique collection: (k-1)-suffix -> bitmask of heads."""
    frontier: dict = {}
    for c in members:
        frontier[c[1:]] = frontier.get(c[1:], 0) | (1 << c[0])
    return frontier


def _frontier_size(frontier: dict) -> int:
    return sum(h.bit_count() for h in frontier.values())


def _frontier_members(frontier: dict):
    for suffix, heads in frontier.items():
        for h in bit_indices(heads):
            yield (h,) + suffix


def _expand_once(rows, frontier: dict, next_mask: int, bp: Optional[dict] = None) -> dict:
    """One window step on a frontier. When ``bp`` is a dict it receives one
    predecessor clique per reached clique (lowest valid head)."""
    new: dict = {}
    for suffix, heads in frontier.items():
        cand = next_mask
        for v in suffix:
            cand &= rows[v]
        for w in bit_indices(cand):
            valid = heads & rows[w]
            if valid:
                grown = suffix + (w,)
                new[grown[1:]] = new.get(grown[1:], 0) | (1 << grown[0])
                if bp is not None and grown not in bp:
                    bp[grown] = ((valid & -valid).bit_length() - 1,) + suffix
    return new


def expand_step(start: CliqueSet, view: TupleView) -> CliqueSet:
    """Exact one-window expansion of a clique set."""
    k = start.order
    i = start.window_start
    if i + k >= view.t or i < 0:
        raise IndexError(
            f"expansion from window {i} needs parts up to {i + k}, view has {view.t}"
        )
    frontier = _frontier_of(start.members, k)
    new = _expand_once(view.graph.rows, frontier, view.part_mask(i + k))
    return CliqueSet(i + 1, k, frozenset(_frontier_members(new)))


@dataclass
class ExpansionTrace:
    """Reach counts window by window. ``counts[m]`` is the frontier size at
    window start_window + m; fractions normalize by the reference count of
    that window block (measured, and nominal when available)."""

    start_window: int
    to_window: int
    order: int
    start_size: int
    counts: list
    fractions: list
    fractions_nominal: Optional[list]
    final: CliqueSet
    warn_short_ell: bool = False
    back_pointers: Optional[list] = None

    @property
    def final_fraction(self) -> float:
        return self.fractions[-1]

    def to_dict(self) -> dict:
        return {
            "schema": "powercycle/expansion-trace-v1",
            "start_window": self.start_window,
            "to_window": self.to_window,
            "order": self.order,
            "start_size": self.start_size,
            "counts": [int(c) for c in self.counts],
            "fractions": [float(f) for f in self.fractions],
            "fractions_nominal": None
            if self.fractions_nominal is None
            else [float(f) for f in self.fractions_nominal],
            "warn_short_ell": self.warn_short_ell,
        }


def _short_ell(view: TupleView, k: int, ell: int) -> bool:
    n_host = view.graph.n
    return ell < 3 * k * k * math.log(max(n_host, 2))


def expand_through(
    start: CliqueSet,
    view: TupleView,
    to_window: int,
    params: Optional[ExpansionParams] = None,
    keep_bp: bool = False,
) -> ExpansionTrace:
    """Iterate expand_step until the frontier is anchored at ``to_window``,
    recording per-window counts and reach fractions."""
    k = start.order
    i = start.window_start
    if to_window < i:
        raise IndexError(f"target window {to_window} precedes start window {i}")
    if to_window + k > view.t:
        raise IndexError(f"target window {to_window} overflows view of {view.t} parts")
    alpha = params.alpha if params is not None else None
    p = params.p if params is not None else None
    frontier = _frontier_of(start.members, k)
    counts = [_frontier_size(frontier)]
    measured, nominal = reference_count(view, i, k, alpha, p)
    fractions = [counts[0] / measured if measured > 0 else 0.0]
    fractions_nom = None if nominal is None else [counts[0] / nominal if nominal else 0.0]
    bps: Optional[list] = [] if keep_bp else None
    rows = view.graph.rows
    for w in range(i, to_window):
        bp: Optional[dict] = {} if keep_bp else None
        frontier = _expand_once(rows, frontier, view.part_mask(w + k), bp)
        if keep_bp:
            bps.append(bp)
        counts.append(_frontier_size(frontier))
        measured, nominal = reference_count(view, w + 1, k, alpha, p)
        fractions.append(counts[-1] / measured if measured > 0 else 0.0)
        if fractions_nom is not None:
            fractions_nom.append(counts[-1] / nominal if nominal else 0.0)
    final = CliqueSet(to_window, k, frozenset(_frontier_members(frontier)))
    return ExpansionTrace(
        start_window=i,
        to_window=to_window,
        order=k,
        start_size=len(start),
        counts=counts,
        fractions=fractions,
        fractions_nominal=fractions_nom,
        final=final,
        warn_short_ell=_short_ell(view, k, to_window - i + k),
        back_pointers=bps,
    )


def reconstruct_path(
    start_window: int, back_pointers: list, final_clique: tuple
) -> list:
    """Vertex sequence of one canonical k-path ending in ``final_clique``,
    walked back through the predecessor layers to the start window."""
    cliques = [tuple(final_clique)]
    for bp in reversed(back_pointers):
        cliques.append(bp[cliques[-1]])
    cliques.reverse()
    path = list(cliques[0])
    for c in cliques[1:]:
        path.append(c[-1])
    return path


@dataclass
class ExpanderResult:
    found: bool
    clique: Optional[tuple]
    reach: Optional[CliqueSet]
    fraction: float
    best_clique: Optional[tuple]
    best_fraction: float
    bisection_rounds: int
    scanned: int
    warn_short_ell: bool
    back_pointers: Optional[list] = None


def find_expander(
    start: CliqueSet,
    view: TupleView,
    ell: int,
    params: ExpansionParams,
    keep_bp: bool = False,
    scan_cap: Optional[int] = None,
) -> ExpanderResult:
    """Search ``start`` for a single clique that expands to at least
    (1 - 20 k delta) of the reference count at the final block of an
    ell-window stretch.

    Strategy: repeated halving - keep the half whose reach one block ahead is
    at least (1/2 - 5 k delta), preferring the lexicographically first half
    when both qualify - until the candidate set is a singleton or no window
    room remains, then scan candidates by exhaustive per-clique reach,
    starting with the survivors. Not-found results carry the best clique seen
    and its reach fraction.
    """
    k = params.k
    params.require_search_regime()
    if start.order != k:
        raise ValueError(f"start has order {start.order}, params expect {k}")
    if ell < 2 * k:
        raise ValueError(f"need at least 2k={2 * k} windows, got {ell}")
    ws = start.window_start
    if ws + ell > view.t:
        raise IndexError(f"{ell} windows from {ws} overflow view of {view.t} parts")
    x_start, _ = reference_count(view, ws, k, params.alpha, params.p)
    if len(start) < params.delta * x_start:
        raise ValueError(
            f"start set of {len(start)} copies is below delta * x = {params.delta * x_start:.1f}"
        )
    final_window = ws + ell - k
    x_final, _ = reference_count(view, final_window, k, params.alpha, params.p)
    warn = _short_ell(view, k, ell)

    def reach_count_at(members, to_window) -> int:
        frontier = _frontier_of(members, k)
        rows = view.graph.rows
        for w in range(ws, to_window):
            frontier = _expand_once(rows, frontier, view.part_mask(w + k))
        return _frontier_size(frontier)

    candidates = start.sorted()
    rounds = 0
    max_block = ell // k - 2
    block = 1
    while len(candidates) > 1 and block <= max_block:
        half = (len(candidates) + 1) // 2
        first, second = candidates[:half], candidates[half:]
        x_block, _ = reference_count(view, ws + block * k, k, params.alpha, params.p)
        need = params.half_fraction * x_block
        if reach_count_at(first, ws + block * k) >= need:
            candidates = first
        elif reach_count_at(second, ws + block * k) >= need:
            candidates = second
        else:
            break
        rounds += 1
        block += 1

    ordered = candidates + [c for c in start.sorted() if c not in set(candidates)]
    if scan_cap is not None:
        ordered = ordered[:scan_cap]
    best_clique, best_fraction = None, -1.0
    scanned = 0
    for cand in ordered:
        scanned += 1
        trace = expand_through(
            CliqueSet(ws, k, frozenset([cand])), view, final_window, params, keep_bp=keep_bp
        )
        fraction = trace.counts[-1] / x_final if x_final > 0 else 0.0
        if fraction > best_fraction:
            best_clique, best_fraction = cand, fraction
        if fraction >= params.success_fraction:
            return ExpanderResult(
                found=True,
                clique=cand,
                reach=trace.final,
                fraction=fraction,
                best_clique=cand,
                best_fraction=fraction,
                bisection_rounds=rounds,
                scanned=scanned,
                warn_short_ell=warn,
                back_pointers=trace.back_pointers,
            )
    return ExpanderResult(
        found=False,
        clique=None,
        reach=None,
        fraction=0.0,
        best_clique=best_clique,
        best_fraction=best_fraction,
        bisection_rounds=rounds,
        scanned=scanned,
        warn_short_ell=warn,
    )


def one_step_expansion_audit(
    view: TupleView,
    start_fraction: float,
    params: ExpansionParams,
    typ_params: TypicalityParams,
    seed: int,
) -> float:
    """Measure one-step expansion from a random start set on a certified
    (k+1)-tuple: sample ceil(kappa * count) copies in the first k windows and
    return the fraction of the next window block they reach. Refuses when the
    tuple is not super-typical at the given certification parameters."""
    k = params.k
    if view.t != k + 1:
        raise ValueError(f"audit needs a (k+1)-tuple, got {view.t} parts for k={k}")
    report = check_super_typical(view, typ_params, seed=seed)
    if not report.super_typical:
        raise PreconditionError(
            f"tuple is not super-typical; failing conditions: {report.failing_conditions()}",
            report.failing_conditions(),
        )
    if not (0.0 <= start_fraction <= 1.0):
        raise ValueError(f"start fraction must lie in [0,1], got {start_fraction}")
    all_start = enumerate_canonical_cliques(view, 0, k).sorted()
    target_count = count_canonical_cliques(view.subview(range(1, 1 + k)), 0, k)
    m = math.ceil(start_fraction * len(all_start))
    if m == 0:
        return 0.0
    rng = stream(seed, 23)
    picks = rng.choice(len(all_start), size=m, replace=False)
    members = frozenset(all_start[int(i)] for i in picks)
    reached = expand_step(CliqueSet(0, k, members), view)
    return len(reached) / target_count if target_count else 0.0


def halving_audit(
    start: CliqueSet,
    view: TupleView,
    params: ExpansionParams,
    n_splits: int,
    seed: int,
) -> dict:
    """Check the halving step on a concrete instance: given that ``start``
    reaches at least (1 - 10 k delta) of the block k windows ahead, every
    tested equipartition must have a half reaching (1/2 - 5 k delta). Returns
    the observed fractions per split."""
    k = params.k
    params.require_search_regime()
    ws = start.window_start
    target = ws + k
    x_target, _ = reference_count(view, target, k, params.alpha, params.p)
    full = expand_through(start, view, target, params)
    qualifies = full.counts[-1] >= (1 - 10 * k * params.delta) * x_target
    rng = stream(seed, 29)
    members = start.sorted()
    splits = []
    for s in range(n_splits):
        perm = rng.permutation(len(members))
        half = (len(members) + 1) // 2
        first = frozenset(members[int(i)] for i in perm[:half])
        second = frozenset(members[int(i)] for i in perm[half:])
        fr1 = expand_through(CliqueSet(ws, k, first), view, target, params).counts[-1] / x_target
        fr2 = expand_through(CliqueSet(ws, k, second), view, target, params).counts[-1] / x_target
        splits.append(
            {
                "best_half_fraction": max(fr1, fr2),
                "ok": max(fr1, fr2) >= params.half_fraction - 1e-12,
            }
        )
    return {
        "start_qualifies": bool(qualifies),
        "start_fraction": full.counts[-1] / x_target if x_target else 0.0,
        "splits": splits,
        "all_ok": all(s["ok"] for s in splits),
    }


def encode_frontier(cliques: CliqueSet, n: int) -> bytes:
    """Compact run-length dump of a clique set for debugging: cliques are
    ranked lexicographically in the full n-ary tuple space and the sorted
    rank gaps are varint-encoded."""
    ranks = []
    for c in cliques.sorted():
        r = 0
        for v in c:
            r = r * n + v
        ranks.append(r)
    out = bytearray()
    out += len(cliques).to_bytes(4, "big")
    out += cliques.order.to_bytes(2, "big")
    out += cliques.window_start.to_bytes(2, "big")
    out += n.to_bytes(4, "big")
    prev = 0
    for r in ranks:
        gap = r - prev
        prev = r
        while True:
            byte = gap & 0x7F
            gap >>= 7
            if gap:
                out.append(byte | 0x80)
            else:
                out.append(byte)
                break
    return bytes(out)


def decode_frontier(blob: bytes) -> CliqueSet:
    count = int.from_bytes(blob[0:4], "big")
    order = int.from_bytes(blob[4:6], "big")
    window_start = int.from_bytes(blob[6:8], "big")
    n = int.from_bytes(blob[8:12], "big")
    pos = 12
    ranks = []
    prev = 0
    for _ in range(count):
        gap = 0
        shift = 0
        while True:
            byte = blob[pos]
            pos += 1
            gap |= (byte & 0x7F) << shift
            shift += 7
            if not byte & 0x80:
                break
        prev += gap
        ranks.append(prev)
    members = []
    for r in ranks:
        c = []
        for _ in range(order):
            c.append(r % n)
            r //= n
        members.append(tuple(reversed(c)))
    return CliqueSet(window_start, order, frozenset(members))
