"""Signature-matched concatenation and bounded chain enumeration."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, TextIO

from ..monitor.fragments import Fragment, FragmentSet

DEFAULT_MAX_CHAIN = 8
DEFAULT_MAX_OUTPUTS = 10_000


def can_concat(a: Fragment, b: Fragment) -> bool:
    """Exact signature equality; U matches only U."""
    return a.end == b.start


def concatenate(a: Fragment, b: Fragment) -> Optional[Fragment]:
    """``a`` followed by ``b``, or None when the junction signatures differ."""
    if not can_concat(a, b):
        return None
    return Fragment(a.start, a.events + b.events, b.end, None)


@dataclass(frozen=True)
class ReconstructedTrace:
    chain: tuple[int, ...]
    events: tuple[str, ...]
    start: str
    end: str
    junctions: tuple[str, ...]
    feasible: Optional[bool] = None

    @property
    def length(self) -> int:
        return len(self.chain)

    def to_record(self, cshash: str) -> dict:
        return {
            "v": 1,
            "cshash": cshash,
            "chain": list(self.chain),
            "start": self.start,
            "events": list(self.events),
            "end": self.end,
            "junctions": list(self.junctions),
            "feasible": self.feasible,
        }


def build_trace(fragments: Sequence[Fragment], chain: Sequence[int]) -> ReconstructedTrace:
    frags = [fragments[i] for i in chain]
    junctions = []
    events: list[str] = []
    for k, f in enumerate(frags):
        if k:
            if not can_concat(frags[k - 1], f):
                raise ValueError(f"fragments {chain[k - 1]} and {chain[k]} do not match")
            junctions.append(f.start)
        events.extend(f.events)
    return ReconstructedTrace(tuple(chain), tuple(events), frags[0].start, frags[-1].end,
                              tuple(junctions))


class _Digraph:
    """Fragment digraph: arc a -> b iff a.end == b.start.

    Successor lists are shared per signature, so dense graphs stay linear in size.
    """

    def __init__(self, fragments: Sequence[Fragment], max_len: int):
        self.n = len(fragments)
        by_start: dict[str, list[int]] = {}
        ends: set[str] = set()
        for i, f in enumerate(fragments):
            by_start.setdefault(f.start, []).append(i)
            ends.add(f.end)
        self.succ = [by_start.get(f.end, ()) for f in fragments]
        self.has_pred = [f.start in ends for f in fragments]
        # ext[k][v]: some walk of exactly k nodes starts at v
        ext = [None, [True] * self.n]
        for k in range(2, max_len + 1):
            prev = ext[k - 1]
            by_sig: dict[str, bool] = {}
            row = []
            for f in fragments:
                hit = by_sig.get(f.end)
                if hit is None:
                    hit = any(prev[u] for u in by_start.get(f.end, ()))
                    by_sig[f.end] = hit
                row.append(hit)
            ext.append(row)
        self.ext = ext

    def walks(self, start: int, length: int) -> Iterator[tuple[int, ...]]:
        """Walks of exactly ``length`` nodes from ``start``, in lexicographic order."""
        if not self.ext[length][start]:
            return
        path = [start]

        def rec(v: int, remaining: int):
            if remaining == 0:
                yield tuple(path)
                return
            for u in self.succ[v]:
                if self.ext[remaining][u]:
                    path.append(u)
                    yield from rec(u, remaining - 1)
                    path.pop()

        yield from rec(start, length - 1)

    def maximal_walks(self, start: int, max_len: int) -> Iterator[tuple[int, ...]]:
        """Walks that cannot be extended at either end within ``max_len``, lexicographic."""
        if self.has_pred[start]:
            yield from self.walks(start, max_len)
            return
        path = [start]

        def rec(v: int):
            if len(path) == max_len or not self.succ[v]:
                yield tuple(path)
                return
            for u in self.succ[v]:
                path.append(u)
                yield from rec(u)
                path.pop()

        yield from rec(start)

    def is_maximal(self, chain: tuple[int, ...], max_len: int) -> bool:
        return len(chain) == max_len or (not self.has_pred[chain[0]] and not self.succ[chain[-1]])


def enumerate_chains(fragments: Sequence[Fragment], max_chain_length: int = DEFAULT_MAX_CHAIN,
                     max_outputs: int = DEFAULT_MAX_OUTPUTS) -> list[tuple[int, ...]]:
    """Chains of fragment ids: maximal ones first (lexicographic), then the rest
    by decreasing length and lexicographically. At most ``max_outputs``."""
    if max_chain_length < 1:
        raise ValueError("max_chain_length must be >= 1")
    if max_outputs < 0:
        raise ValueError("max_outputs must be >= 0")
    if not fragments or max_outputs == 0:
        return []
    g = _Digraph(fragments, max_chain_length)
    out: list[tuple[int, ...]] = []
    for s in range(g.n):
        for w in g.maximal_walks(s, max_chain_length):
            out.append(w)
            if len(out) >= max_outputs:
                return out
    for length in range(max_chain_length - 1, 0, -1):
        for s in range(g.n):
            for w in g.walks(s, length):
                if g.is_maximal(w, max_chain_length):
                    continue
                out.append(w)
                if len(out) >= max_outputs:
                    return out
    return out


def reconstruct(fs: FragmentSet, max_chain_length: int = DEFAULT_MAX_CHAIN,
                max_outputs: int = DEFAULT_MAX_OUTPUTS, automaton=None) -> list[ReconstructedTrace]:
    """Likely traces from a fragment set. Fragment ids are positions in ``fs``.

    Only signatures and events are consulted; fragment metadata is ignored.
    With an ``automaton`` each trace is annotated with its feasibility.
    """
    if isinstance(fs, (list, tuple)):
        fs = FragmentSet.merge(fs)  # refuses mixed condition-set hashes
    frags = list(fs.fragments)
    lengths = {len(f.start) for f in frags}
    if len(lengths) > 1:
        raise ValueError("fragments carry signatures of different lengths")
    traces = []
    for chain in enumerate_chains(frags, max_chain_length, max_outputs):
        t = build_trace(frags, chain)
        if automaton is not None:
            t = ReconstructedTrace(t.chain, t.events, t.start, t.end, t.junctions,
                                   automaton.feasible(t.events))
        traces.append(t)
    return traces


def write_traces(traces: Sequence[ReconstructedTrace], cshash: str, sink: TextIO) -> int:
    for t in traces:
        sink.write(json.dumps(t.to_record(cshash), separators=(",", ":")))
        sink.write("\n")
    return len(traces)


def read_traces(source) -> list[ReconstructedTrace]:
    out = []
    for line in source:
        line = line.strip()
        if not line:
            continue
        r = json.loads(line)
        chain = tuple(r["chain"])
        out.append(ReconstructedTrace(chain, tuple(r["events"]), r["start"], r["end"],
                                      tuple(r.get("junctions", ())),
                                      r.get("feasible")))
    return out
