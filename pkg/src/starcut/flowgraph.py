"""Directed capacitated flow graph with an exact max-flow / min s-t cut solver.

The solver is Dinic's algorithm (BFS level graph + blocking flow with the
current-arc optimization), preceded by a vectorized pass that pushes the flow
every source->node->sink two-edge path can carry.  On the shallow radial
template graphs the engine builds, the pre-pass absorbs nearly all of the
flow and the remaining phases are cheap; on arbitrary graphs it is simply a
valid first set of augmentations.

Infinite capacities are accepted as ``math.inf`` and realized internally as a
finite sentinel (sum of all finite capacities + 1), which no optimal solution
can ever cut.  A minimum cut that still reaches the sentinel means no finite
cut separates the terminals and is reported as :class:`InfeasibleCutError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


class InfeasibleCutError(RuntimeError):
    """No finite-capacity cut separates the source from the sink."""


@dataclass(frozen=True)
class CutResult:
    """Maximum flow value and the source-reachable minimum-cut partition.

    ``source_side[i]`` is True when node ``i`` is reachable from the source in
    the final residual graph.  Among all minimum cuts this is the one with the
    smallest source side, which makes results deterministic and canonical.
    """

    flow_value: float
    source_side: np.ndarray  # bool, shape (node_count,)


class FlowGraph:
    """Directed graph with non-negative (possibly infinite) edge capacities.

    Parallel edges are allowed and act additively.  Edges may be appended one
    at a time or in bulk numpy arrays; insertion order is preserved, and the
    solver is deterministic for a fixed order.
    """

    def __init__(self, node_count: int, source: int, sink: int):
        if node_count < 2:
            raise ValueError("need at least source and sink")
        if not (0 <= source < node_count and 0 <= sink < node_count):
            raise ValueError("terminal ids must be < node_count")
        if source == sink:
            raise ValueError("source and sink must differ")
        self.node_count = int(node_count)
        self.source = int(source)
        self.sink = int(sink)
        self._chunks: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        self._edge_count = 0

    def add_edge(self, u: int, v: int, capacity: float) -> None:
        self.add_edges(
            np.asarray([u], dtype=np.int64),
            np.asarray([v], dtype=np.int64),
            np.asarray([capacity], dtype=np.float64),
        )

    def add_edges(self, from_nodes, to_nodes, capacities) -> None:
        u = np.ascontiguousarray(from_nodes, dtype=np.int64)
        v = np.ascontiguousarray(to_nodes, dtype=np.int64)
        c = np.ascontiguousarray(capacities, dtype=np.float64)
        if not (u.shape == v.shape == c.shape) or u.ndim != 1:
            raise ValueError("edge arrays must be 1-D and equally long")
        if u.size == 0:
            return
        if u.min() < 0 or v.min() < 0 or u.max() >= self.node_count or v.max() >= self.node_count:
            raise ValueError("edge endpoint out of range")
        if np.any(np.isnan(c)) or np.any(c < 0):
            raise ValueError("capacities must be non-negative")
        self._chunks.append((u, v, c))
        self._edge_count += u.size

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self._chunks:
            z = np.zeros(0, dtype=np.int64)
            return z, z.copy(), np.zeros(0, dtype=np.float64)
        u = np.concatenate([chunk[0] for chunk in self._chunks])
        v = np.concatenate([chunk[1] for chunk in self._chunks])
        c = np.concatenate([chunk[2] for chunk in self._chunks])
        return u, v, c

    def edges(self) -> list[tuple[int, int, float]]:
        u, v, c = self.edge_arrays()
        return list(zip(u.tolist(), v.tolist(), c.tolist()))

    # -- debug dump -------------------------------------------------------

    def dump(self) -> str:
        """Text form: ``n``/``s``/``t`` header lines plus one ``e`` line per edge."""
        lines = [f"n {self.node_count}", f"s {self.source}", f"t {self.sink}"]
        for u, v, c in self.edges():
            cap = "INF" if math.isinf(c) else repr(c)
            lines.append(f"e {u} {v} {cap}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dump(cls, text: str) -> "FlowGraph":
        n = s = t = None
        edges: list[tuple[int, int, float]] = []
        for line in text.splitlines():
            parts = line.split()
            if not parts or parts[0] == "#":
                continue
            tag = parts[0]
            if tag == "n":
                n = int(parts[1])
            elif tag == "s":
                s = int(parts[1])
            elif tag == "t":
                t = int(parts[1])
            elif tag == "e":
                cap = INF if parts[3] == "INF" else float(parts[3])
                edges.append((int(parts[1]), int(parts[2]), cap))
            else:
                raise ValueError(f"bad dump line: {line!r}")
        if n is None or s is None or t is None:
            raise ValueError("dump missing n/s/t header")
        graph = cls(n, s, t)
        if edges:
            arr = np.asarray(edges, dtype=np.float64)
            graph.add_edges(arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2])
        return graph


def min_st_cut(graph: FlowGraph) -> CutResult:
    """Exact maximum flow / minimum s-t cut.

    Raises :class:`InfeasibleCutError` when every s-t cut crosses an infinite
    edge.  For integer capacities the result is exact; float capacities are
    exact up to ordinary summation rounding.
    """
    u, v, cap = graph.edge_arrays()
    finite = np.isfinite(cap)
    sentinel = float(cap[finite].sum()) + 1.0
    caps = np.where(finite, cap, sentinel)

    # zero-capacity edges can never carry flow or influence reachability
    keep = caps > 0.0
    u, v, caps = u[keep], v[keep], caps[keep]

    flow, source_side = _dinic(graph.node_count, graph.source, graph.sink, u, v, caps)
    if flow >= sentinel:
        raise InfeasibleCutError("infeasible cut: no finite cut separates source from sink")
    return CutResult(float(flow), source_side)


def _dinic(n, s, t, u, v, caps):
    m = u.size
    res_fwd = caps.copy()
    res_bwd = np.zeros(m, dtype=np.float64)
    flow = 0.0

    if m:
        flow += _prepush_two_edge_paths(n, s, t, u, v, res_fwd, res_bwd)

    # arc soup: forward arcs [0, m), backward arcs [m, 2m)
    tails = np.concatenate([u, v])
    heads = np.concatenate([v, u])
    res = np.concatenate([res_fwd, res_bwd])
    pair = np.concatenate([np.arange(m, 2 * m), np.arange(0, m)])

    order = np.argsort(tails, kind="stable")
    position = np.empty(2 * m, dtype=np.int64)
    position[order] = np.arange(2 * m)
    heads = heads[order]
    res = res[order]
    pair = position[pair[order]]
    indptr = np.zeros(n + 1, dtype=np.int64)
    if m:
        np.add.at(indptr, tails + 1, 1)
        np.cumsum(indptr, out=indptr)

    while True:
        level = _bfs_levels(n, s, t, indptr, heads, res)
        if level[t] < 0:
            break
        flow += _blocking_flow(s, t, indptr, heads, res, pair, level)

    reach = _residual_reachable(n, s, indptr, heads, res)
    return flow, reach


def _prepush_two_edge_paths(n, s, t, u, v, res_fwd, res_bwd):
    """Augment along s->x->t paths for nodes with exactly one edge on each side.

    Also saturates direct s->t edges.  Pure array work; exact for integers.
    """
    pushed = 0.0

    direct = (u == s) & (v == t)
    if np.any(direct):
        pushed += float(res_fwd[direct].sum())
        res_bwd[direct] += res_fwd[direct]
        res_fwd[direct] = 0.0

    from_s = np.nonzero((u == s) & (v != t))[0]
    into_t = np.nonzero((v == t) & (u != s))[0]
    if from_s.size == 0 or into_t.size == 0:
        return pushed

    s_count = np.bincount(v[from_s], minlength=n)
    t_count = np.bincount(u[into_t], minlength=n)
    eligible = (s_count == 1) & (t_count == 1)
    if not np.any(eligible):
        return pushed

    s_edge = np.full(n, -1, dtype=np.int64)
    s_edge[v[from_s]] = from_s
    t_edge = np.full(n, -1, dtype=np.int64)
    t_edge[u[into_t]] = into_t

    nodes = np.nonzero(eligible)[0]
    se = s_edge[nodes]
    te = t_edge[nodes]
    f = np.minimum(res_fwd[se], res_fwd[te])
    res_fwd[se] -= f
    res_bwd[se] += f
    res_fwd[te] -= f
    res_bwd[te] += f
    return pushed + float(f.sum())


def _multi_arange(starts, counts):
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.cumsum(counts) - counts
    return np.arange(total, dtype=np.int64) - np.repeat(offsets, counts) + np.repeat(starts, counts)


def _bfs_levels(n, s, t, indptr, heads, res):
    level = np.full(n, -1, dtype=np.int64)
    level[s] = 0
    frontier = np.asarray([s], dtype=np.int64)
    depth = 0
    while frontier.size:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        arcs = _multi_arange(starts, counts)
        if arcs.size == 0:
            break
        hs = heads[arcs]
        ok = (res[arcs] > 0.0) & (level[hs] < 0)
        nxt = np.unique(hs[ok])
        if nxt.size == 0:
            break
        depth += 1
        level[nxt] = depth
        if level[t] >= 0:
            break
        frontier = nxt
    return level


def _blocking_flow(s, t, indptr, heads, res, pair, level):
    """Saturate the level graph; mutates ``res`` in place."""
    heads_l = heads.tolist()
    res_l = res.tolist()
    pair_l = pair.tolist()
    level_l = level.tolist()
    ip = indptr.tolist()
    ptr = ip[:-1].copy()  # current-arc pointer per node

    total = 0.0
    path_arcs: list[int] = []
    path_nodes: list[int] = [s]
    node = s
    while True:
        if node == t:
            bottleneck = min(res_l[a] for a in path_arcs)
            retreat_to = -1
            for i, a in enumerate(path_arcs):
                res_l[a] -= bottleneck
                res_l[pair_l[a]] += bottleneck
                if res_l[a] <= 0.0 and retreat_to < 0:
                    retreat_to = i
            total += bottleneck
            del path_arcs[retreat_to:]
            del path_nodes[retreat_to + 1 :]
            node = path_nodes[-1]
            continue
        advanced = False
        i = ptr[node]
        end = ip[node + 1]
        want = level_l[node] + 1
        while i < end:
            if res_l[i] > 0.0 and level_l[heads_l[i]] == want:
                advanced = True
                break
            i += 1
        ptr[node] = i
        if advanced:
            path_arcs.append(i)
            node = heads_l[i]
            path_nodes.append(node)
        else:
            level_l[node] = -1  # dead end for this phase
            if node == s:
                break
            path_arcs.pop()
            path_nodes.pop()
            node = path_nodes[-1]

    res[:] = res_l
    return total


def _residual_reachable(n, s, indptr, heads, res):
    seen = np.zeros(n, dtype=bool)
    seen[s] = True
    frontier = np.asarray([s], dtype=np.int64)
    while frontier.size:
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        arcs = _multi_arange(starts, counts)
        if arcs.size == 0:
            break
        hs = heads[arcs]
        ok = (res[arcs] > 0.0) & ~seen[hs]
        nxt = np.unique(hs[ok])
        if nxt.size == 0:
            break
        seen[nxt] = True
        frontier = nxt
    return seen
