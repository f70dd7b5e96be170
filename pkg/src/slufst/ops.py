"""Algorithms over :class:`~slufst.wfst.Wfst`: composition, trimming, epsilon
removal, rational operations and tie-broken shortest path.

All functions are pure; they never modify their arguments.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError, InputError
from .wfst import EPSILON, INF, Arc, SymbolTable, Wfst

# absolute/relative slack used when deciding that two path costs tie
TIE_TOL = 1e-9


def _empty_like(isyms: SymbolTable, osyms: SymbolTable) -> Wfst:
    out = Wfst(isyms, osyms)
    out.set_start(out.add_state())
    return out


def compose(a: Wfst, b: Wfst, trim: bool = True) -> Wfst:
    """Relational composition ``a ∘ b`` (a's output tape joined to b's input).

    Epsilons are sequenced with the three-state filter: filter state 0 allows
    everything, state 1 (after a moved alone on an output-epsilon) forbids b
    from moving alone, state 2 (after b moved alone on an input-epsilon)
    forbids a from moving alone.  A simultaneous epsilon move is only taken
    from state 0.  Each interleaving of epsilons is thus represented once.
    """
    if a.osyms != b.isyms:
        raise ConfigError("compose: output symbols of the left FST differ from input symbols of the right FST")
    if a.start is None or b.start is None:
        return _empty_like(a.isyms, b.osyms)

    # per-state split of arcs: a by output epsilon, b indexed by input label
    a_eps: list[list[Arc] | None] = [None] * a.num_states
    a_lab: list[list[Arc] | None] = [None] * a.num_states
    b_eps: list[list[Arc] | None] = [None] * b.num_states
    b_idx: list[dict[int, list[Arc]] | None] = [None] * b.num_states

    def split_a(q):
        eps, lab = [], []
        for arc in a.arcs(q):
            (eps if arc.olabel == EPSILON else lab).append(arc)
        a_eps[q], a_lab[q] = eps, lab

    def index_b(q):
        eps, idx = [], {}
        for arc in b.arcs(q):
            if arc.ilabel == EPSILON:
                eps.append(arc)
            else:
                idx.setdefault(arc.ilabel, []).append(arc)
        b_eps[q], b_idx[q] = eps, idx

    out = Wfst(a.isyms, b.osyms)
    out_arcs = out._arcs
    finals = out.finals
    a_finals, b_finals = a.finals, b.finals
    ids: dict[tuple[int, int, int], int] = {}
    queue: deque[tuple[int, int, int]] = deque()

    def state_id(key):
        s = ids.get(key)
        if s is None:
            s = len(out_arcs)
            ids[key] = s
            out_arcs.append([])
            queue.append(key)
        return s

    out.start = state_id((a.start, b.start, 0))
    while queue:
        key = queue.popleft()
        qa, qb, filt = key
        s = ids[key]
        if a_eps[qa] is None:
            split_a(qa)
        if b_idx[qb] is None:
            index_b(qb)
        arcs_out = out_arcs[s]
        fa = a_finals.get(qa)
        if fa is not None:
            fb = b_finals.get(qb)
            if fb is not None:
                finals[s] = fa + fb
        idx = b_idx[qb]
        for ea in a_lab[qa]:
            matches = idx.get(ea.olabel)
            if matches:
                for eb in matches:
                    n = state_id((ea.nextstate, eb.nextstate, 0))
                    arcs_out.append(Arc(ea.ilabel, eb.olabel, ea.weight + eb.weight, n))
        if filt != 2:
            for ea in a_eps[qa]:
                n = state_id((ea.nextstate, qb, 1))
                arcs_out.append(Arc(ea.ilabel, EPSILON, ea.weight, n))
        if filt != 1:
            for eb in b_eps[qb]:
                n = state_id((qa, eb.nextstate, 2))
                arcs_out.append(Arc(EPSILON, eb.olabel, eb.weight, n))
        if filt == 0:
            for ea in a_eps[qa]:
                for eb in b_eps[qb]:
                    n = state_id((ea.nextstate, eb.nextstate, 0))
                    arcs_out.append(Arc(ea.ilabel, eb.olabel, ea.weight + eb.weight, n))
    return connect(out) if trim else out


def _reachable(f: Wfst) -> list[bool]:
    seen = [False] * f.num_states
    if f.start is None:
        return seen
    seen[f.start] = True
    stack = [f.start]
    while stack:
        q = stack.pop()
        for arc in f.arcs(q):
            if not seen[arc.nextstate]:
                seen[arc.nextstate] = True
                stack.append(arc.nextstate)
    return seen


def _coreachable(f: Wfst) -> list[bool]:
    rev: list[list[int]] = [[] for _ in f.states()]
    for q in f.states():
        for arc in f.arcs(q):
            rev[arc.nextstate].append(q)
    seen = [False] * f.num_states
    stack = list(f.finals)
    for q in stack:
        seen[q] = True
    while stack:
        q = stack.pop()
        for p in rev[q]:
            if not seen[p]:
                seen[p] = True
                stack.append(p)
    return seen


def connect(f: Wfst) -> Wfst:
    """Drop states that are not on some start-to-final path.

    Surviving states keep their relative order.  If nothing survives the
    result is a single non-final start state (the empty relation).
    """
    acc = _reachable(f)
    coacc = _coreachable(f)
    keep = [x and y for x, y in zip(acc, coacc)]
    if f.start is None or not keep[f.start]:
        return _empty_like(f.isyms, f.osyms)
    remap = {}
    for q in f.states():
        if keep[q]:
            remap[q] = len(remap)
    out = Wfst(f.isyms, f.osyms)
    out.add_states(len(remap))
    for q, nq in remap.items():
        out._arcs[nq] = [Arc(a.ilabel, a.olabel, a.weight, remap[a.nextstate])
                         for a in f.arcs(q) if keep[a.nextstate]]
        if q in f.finals:
            out.finals[nq] = f.finals[q]
    out.start = remap[f.start]
    return out


def arc_sort(f: Wfst, key: str = "ilabel") -> Wfst:
    if key == "ilabel":
        sort_key = lambda a: (a.ilabel, a.olabel, a.nextstate, a.weight)
    elif key == "olabel":
        sort_key = lambda a: (a.olabel, a.ilabel, a.nextstate, a.weight)
    else:
        raise ConfigError(f"unknown arc sort key {key!r}")
    out = f.copy()
    out._arcs = [sorted(arcs, key=sort_key) for arcs in out._arcs]
    return out


def _eps_closure(f: Wfst, q: int) -> dict[int, float]:
    # min-cost distances over arcs that are epsilon on both tapes
    dist = {q: 0.0}
    heap = [(0.0, q)]
    done = set()
    while heap:
        d, p = heapq.heappop(heap)
        if p in done:
            continue
        done.add(p)
        for a in f.arcs(p):
            if a.ilabel == EPSILON and a.olabel == EPSILON:
                nd = d + a.weight
                if nd < dist.get(a.nextstate, INF):
                    dist[a.nextstate] = nd
                    heapq.heappush(heap, (nd, a.nextstate))
    return dist


def rm_epsilon(f: Wfst) -> Wfst:
    """Remove arcs that are epsilon on both tapes.

    Arcs with only one epsilon side (e.g. ``<eps>:#intent:x``) are kept.
    """
    out = Wfst(f.isyms, f.osyms)
    out.add_states(f.num_states)
    out.start = f.start
    for q in f.states():
        closure = _eps_closure(f, q)
        best: dict[tuple[int, int, int], float] = {}
        order: list[tuple[int, int, int]] = []
        final = INF
        for p in sorted(closure):
            d = closure[p]
            final = min(final, d + f.final(p))
            for a in f.arcs(p):
                if a.ilabel == EPSILON and a.olabel == EPSILON:
                    continue
                k = (a.ilabel, a.olabel, a.nextstate)
                w = d + a.weight
                if k not in best:
                    order.append(k)
                    best[k] = w
                elif w < best[k]:
                    best[k] = w
        out._arcs[q] = [Arc(i, o, best[(i, o, n)], n) for i, o, n in order]
        if final < INF:
            out.finals[q] = final
    return connect(out)


def union(a: Wfst, b: Wfst) -> Wfst:
    if a.isyms != b.isyms or a.osyms != b.osyms:
        raise ConfigError("union: symbol tables differ")
    out = Wfst(a.isyms, a.osyms)
    start = out.add_state()
    out.set_start(start)
    for f in (a, b):
        if f.start is None:
            continue
        off = out.add_states(f.num_states)
        for q in f.states():
            out._arcs[off + q] = [Arc(x.ilabel, x.olabel, x.weight, x.nextstate + off) for x in f.arcs(q)]
        for q, w in f.finals.items():
            out.finals[off + q] = w
        out.add_arc(start, EPSILON, EPSILON, 0.0, off + f.start)
    return out


def concat(a: Wfst, b: Wfst) -> Wfst:
    if a.osyms != b.osyms or a.isyms != b.isyms:
        raise ConfigError("concat: symbol tables differ")
    if a.start is None or b.start is None:
        return _empty_like(a.isyms, a.osyms)
    out = a.copy()
    out.finals = {}
    off = out.add_states(b.num_states)
    for q in b.states():
        out._arcs[off + q] = [Arc(x.ilabel, x.olabel, x.weight, x.nextstate + off) for x in b.arcs(q)]
    for q, w in b.finals.items():
        out.finals[off + q] = w
    for q, w in a.finals.items():
        out.add_arc(q, EPSILON, EPSILON, w, off + b.start)
    return out


@dataclass(frozen=True)
class Path:
    """A single start-to-final path: labels of both tapes and total cost."""

    cost: float
    ilabels: tuple[int, ...]
    olabels: tuple[int, ...]


def _distance_to_final(f: Wfst) -> list[float]:
    n = f.num_states
    rev: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for q in range(n):
        for a in f.arcs(q):
            rev[a.nextstate].append((q, a.weight))
    dist = [INF] * n
    heap = []
    for q, w in f.finals.items():
        dist[q] = w
        heap.append((w, q))
    heapq.heapify(heap)
    while heap:
        d, q = heapq.heappop(heap)
        if d > dist[q]:
            continue
        for p, w in rev[q]:
            nd = d + w
            if nd < dist[p]:
                dist[p] = nd
                heapq.heappush(heap, (nd, p))
    return dist


def _tight(d_here: float, d_via: float) -> bool:
    return abs(d_via - d_here) <= TIE_TOL * max(1.0, abs(d_here))


def best_path(f: Wfst) -> Path | None:
    """Minimum-cost start-to-final path, or ``None`` when there is none.

    Among paths whose cost ties with the minimum (within ``TIE_TOL``) the one
    with the lexicographically smallest output label sequence is returned,
    then the one with fewest arcs.
    """
    if f.start is None:
        return None
    dist = _distance_to_final(f)
    if dist[f.start] == INF:
        return None

    # restrict to the subgraph of optimal ("tight") arcs reachable from start
    tight: dict[int, list[Arc]] = {}
    stack = [f.start]
    while stack:
        q = stack.pop()
        if q in tight:
            continue
        arcs = [a for a in f.arcs(q) if dist[a.nextstate] < INF and _tight(dist[q], a.weight + dist[a.nextstate])]
        tight[q] = arcs
        stack.extend(a.nextstate for a in arcs if a.nextstate not in tight)

    # best[q] = (output continuation, arc count, chosen arc or None for "stop")
    best: dict[int, tuple[tuple[int, ...], int, Arc | None]] = {}
    for q in tight:
        if q in f.finals and _tight(dist[q], f.finals[q]):
            best[q] = ((), 0, None)
    order = _topo_order(tight, f.start)
    if order is not None:
        for q in order:
            for a in tight[q]:
                cand = _extend(a, best.get(a.nextstate))
                if cand is not None and (q not in best or cand[:2] < best[q][:2]):
                    best[q] = cand
    else:
        # zero-cost cycles in the optimal subgraph: relax until stable
        changed = True
        rounds = 0
        while changed and rounds <= len(tight):
            changed = False
            rounds += 1
            for q, arcs in tight.items():
                for a in arcs:
                    cand = _extend(a, best.get(a.nextstate))
                    if cand is not None and (q not in best or cand[:2] < best[q][:2]):
                        best[q] = cand
                        changed = True

    ilabels, olabels = [], []
    q = f.start
    while True:
        arc = best[q][2]
        if arc is None:
            break
        ilabels.append(arc.ilabel)
        if arc.olabel != EPSILON:
            olabels.append(arc.olabel)
        q = arc.nextstate
    return Path(dist[f.start], tuple(i for i in ilabels if i != EPSILON), tuple(olabels))


def _extend(arc: Arc, tail):
    if tail is None:
        return None
    out, n, _ = tail
    if arc.olabel != EPSILON:
        out = (arc.olabel,) + out
    return (out, n + 1, arc)


def _topo_order(graph: dict[int, list[Arc]], start: int) -> list[int] | None:
    """Reverse topological order (successors first), or None on a cycle."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = dict.fromkeys(graph, WHITE)
    order = []
    stack = [(start, iter(graph[start]))]
    color[start] = GREY
    while stack:
        q, it = stack[-1]
        for a in it:
            n = a.nextstate
            c = color[n]
            if c == GREY:
                return None
            if c == WHITE:
                color[n] = GREY
                stack.append((n, iter(graph[n])))
                break
        else:
            stack.pop()
            color[q] = BLACK
            order.append(q)
    return order


def shortest_path(f: Wfst) -> Wfst:
    """Linear-chain FST holding the best path of ``f`` (see :func:`best_path`).

    With no start-to-final path the result is a single non-final state.
    Labels on the chain keep epsilons only where one tape is non-empty.
    """
    if f.start is None:
        return _empty_like(f.isyms, f.osyms)
    dist = _distance_to_final(f)
    path = best_path(f)
    out = Wfst(f.isyms, f.osyms)
    q = out.add_state()
    out.set_start(q)
    if path is None:
        return out
    # re-walk the tight arcs matching the chosen label sequences to keep weights
    arcs = _walk(f, dist, path)
    for a in arcs:
        n = out.add_state()
        out.add_arc(q, a.ilabel, a.olabel, a.weight, n)
        q = n
    out.set_final(q, path.cost - sum(a.weight for a in arcs))
    return out


def _walk(f: Wfst, dist: list[float], path: Path) -> list[Arc]:
    # depth-first search for a tight path realising exactly path's labels
    target_i, target_o = path.ilabels, path.olabels
    seen = set()
    stack = [(f.start, 0, 0, [])]
    while stack:
        q, i, o, acc = stack.pop()
        if (q, i, o) in seen:
            continue
        seen.add((q, i, o))
        if i == len(target_i) and o == len(target_o) and q in f.finals and _tight(dist[q], f.finals[q]):
            return acc
        for a in reversed(f.arcs(q)):
            if dist[a.nextstate] == INF or not _tight(dist[q], a.weight + dist[a.nextstate]):
                continue
            ni, no = i, o
            if a.ilabel != EPSILON:
                if i >= len(target_i) or target_i[i] != a.ilabel:
                    continue
                ni += 1
            if a.olabel != EPSILON:
                if o >= len(target_o) or target_o[o] != a.olabel:
                    continue
                no += 1
            stack.append((a.nextstate, ni, no, acc + [a]))
    raise AssertionError("best path could not be re-walked")


def linear_path(f: Wfst) -> Path | None:
    """Read back a chain produced by :func:`shortest_path`, state by state."""
    if f.start is None:
        return None
    q, cost = f.start, 0.0
    ilabels, olabels = [], []
    seen = set()
    while not f.is_final(q) or f.arcs(q):
        if not f.arcs(q):
            return None
        if q in seen or len(f.arcs(q)) != 1:
            raise InputError("FST is not a linear chain")
        seen.add(q)
        (a,) = f.arcs(q)
        cost += a.weight
        if a.ilabel != EPSILON:
            ilabels.append(a.ilabel)
        if a.olabel != EPSILON:
            olabels.append(a.olabel)
        q = a.nextstate
    if not f.is_final(q):
        return None
    return Path(cost + f.final(q), tuple(ilabels), tuple(olabels))


def linear_fst(labels: Sequence[int], isyms: SymbolTable, osyms: SymbolTable | None = None,
               weights: Sequence[float] | None = None) -> Wfst:
    """Chain acceptor (or identity transducer) over ``labels``."""
    out = Wfst(isyms, osyms)
    q = out.add_state()
    out.set_start(q)
    for k, lab in enumerate(labels):
        if not 0 < lab < len(isyms):
            raise InputError(f"label id {lab} not in symbol table")
        n = out.add_state()
        out.add_arc(q, lab, lab, 0.0 if weights is None else weights[k], n)
        q = n
    out.set_final(q)
    return out


def accepts(f: Wfst, labels: Sequence[int]) -> tuple[float, tuple[int, ...]] | None:
    """Min-cost output for exactly the input ``labels``, or ``None``."""
    chain = linear_fst(labels, f.isyms)
    path = best_path(compose(chain, f))
    if path is None:
        return None
    return path.cost, path.olabels
