"""Weighted finite-state transducers over the tropical semiring.

Weights are non-negative float costs: ``plus`` is ``min`` and ``times`` is
``+``.  ``INF`` is the semiring zero (no path / non-final state) and ``0.0``
the semiring one.

A :class:`Wfst` is built with ``add_state``/``add_arc``/``set_final`` and then
treated as a value: every operation in :mod:`slufst.ops` returns a new FST and
leaves its arguments untouched.
"""

from __future__ import annotations

import io
import math
import struct
from typing import BinaryIO, Iterable, Iterator, NamedTuple, Sequence

from .errors import InputError

INF = math.inf
EPSILON = 0
EPS_SYMBOL = "<eps>"
MAGIC = b"FWF1"


def plus(a: float, b: float) -> float:
    return a if a <= b else b


def times(a: float, b: float) -> float:
    return a + b


class SymbolTable:
    """Bijective map between label strings and integer ids. Id 0 is epsilon."""

    __slots__ = ("_symbols", "_ids")

    def __init__(self, symbols: Iterable[str] = ()):
        self._symbols: list[str] = [EPS_SYMBOL]
        self._ids: dict[str, int] = {EPS_SYMBOL: EPSILON}
        for s in symbols:
            self.add(s)

    def add(self, symbol: str) -> int:
        if symbol in self._ids:
            return self._ids[symbol]
        self._ids[symbol] = len(self._symbols)
        self._symbols.append(symbol)
        return self._ids[symbol]

    def id(self, symbol: str) -> int:
        try:
            return self._ids[symbol]
        except KeyError:
            raise InputError(f"unknown symbol {symbol!r}") from None

    def get(self, symbol: str, default=None):
        return self._ids.get(symbol, default)

    def symbol(self, label: int) -> str:
        if not 0 <= label < len(self._symbols):
            raise InputError(f"unknown label id {label}")
        return self._symbols[label]

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._ids

    def __len__(self) -> int:
        return len(self._symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self._symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, SymbolTable) and self._symbols == other._symbols

    def __hash__(self) -> int:
        return hash(tuple(self._symbols))

    def __repr__(self) -> str:
        return f"SymbolTable({len(self)} symbols)"

    @property
    def symbols(self) -> list[str]:
        return list(self._symbols)

    @classmethod
    def from_list(cls, symbols: Sequence[str]) -> "SymbolTable":
        if not symbols or symbols[0] != EPS_SYMBOL:
            raise InputError("symbol list must start with the epsilon symbol")
        table = cls()
        for s in symbols[1:]:
            if s in table:
                raise InputError(f"duplicate symbol {s!r}")
            table.add(s)
        return table


class Arc(NamedTuple):
    ilabel: int
    olabel: int
    weight: float
    nextstate: int


class Wfst:
    """Mutable-during-construction transducer with arc adjacency lists."""

    def __init__(self, isyms: SymbolTable, osyms: SymbolTable | None = None):
        self.isyms = isyms
        self.osyms = isyms if osyms is None else osyms
        self._arcs: list[list[Arc]] = []
        self.finals: dict[int, float] = {}
        self.start: int | None = None

    def add_state(self) -> int:
        self._arcs.append([])
        return len(self._arcs) - 1

    def add_states(self, n: int) -> int:
        first = len(self._arcs)
        self._arcs.extend([] for _ in range(n))
        return first

    def set_start(self, state: int) -> None:
        self._check_state(state)
        self.start = state

    def set_final(self, state: int, weight: float = 0.0) -> None:
        self._check_state(state)
        if weight == INF:
            self.finals.pop(state, None)
        else:
            self.finals[state] = float(weight)

    def add_arc(self, state: int, ilabel: int, olabel: int, weight: float, nextstate: int) -> None:
        self._arcs[state].append(Arc(ilabel, olabel, float(weight), nextstate))

    def _check_state(self, state: int) -> None:
        if not 0 <= state < len(self._arcs):
            raise IndexError(f"state {state} out of range")

    @property
    def num_states(self) -> int:
        return len(self._arcs)

    def states(self) -> range:
        return range(len(self._arcs))

    def arcs(self, state: int) -> list[Arc]:
        return self._arcs[state]

    def final(self, state: int) -> float:
        return self.finals.get(state, INF)

    def is_final(self, state: int) -> bool:
        return state in self.finals

    def num_arcs(self, state: int | None = None) -> int:
        if state is not None:
            return len(self._arcs[state])
        return sum(len(a) for a in self._arcs)

    def copy(self) -> "Wfst":
        out = Wfst(self.isyms, self.osyms)
        out._arcs = [list(a) for a in self._arcs]
        out.finals = dict(self.finals)
        out.start = self.start
        return out

    def __repr__(self) -> str:
        return f"Wfst(states={self.num_states}, arcs={self.num_arcs()}, start={self.start}, finals={len(self.finals)})"

    # -- serialization -------------------------------------------------

    def write(self, fh: BinaryIO) -> None:
        """Binary layout, all little-endian:

        ``FWF1``, u32 num_states, u32 start (0xFFFFFFFF if unset), the input
        and output symbol tables (u32 count, then u32 length + UTF-8 bytes per
        symbol), u32 num_finals followed by (u32 state, f64 cost) pairs, then
        per state u32 num_arcs and (u32 ilabel, u32 olabel, f64 cost, u32 next).
        """
        fh.write(MAGIC)
        start = 0xFFFFFFFF if self.start is None else self.start
        fh.write(struct.pack("<II", self.num_states, start))
        _write_symbols(fh, self.isyms)
        _write_symbols(fh, self.osyms)
        fh.write(struct.pack("<I", len(self.finals)))
        for s in sorted(self.finals):
            fh.write(struct.pack("<Id", s, self.finals[s]))
        arc = struct.Struct("<IIdI")
        for arcs in self._arcs:
            fh.write(struct.pack("<I", len(arcs)))
            for a in arcs:
                fh.write(arc.pack(a.ilabel, a.olabel, a.weight, a.nextstate))

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        self.write(buf)
        return buf.getvalue()

    @classmethod
    def read(cls, fh: BinaryIO) -> "Wfst":
        if fh.read(4) != MAGIC:
            raise InputError("not an FWF1 file")
        try:
            num_states, start = struct.unpack("<II", fh.read(8))
            isyms = _read_symbols(fh)
            osyms = _read_symbols(fh)
            # identical tables share one object, as when they were built
            if osyms == isyms:
                osyms = isyms
            f = cls(isyms, osyms)
            f.add_states(num_states)
            (nfinal,) = struct.unpack("<I", fh.read(4))
            for _ in range(nfinal):
                s, w = struct.unpack("<Id", fh.read(12))
                f.finals[s] = w
            arc = struct.Struct("<IIdI")
            for s in range(num_states):
                (n,) = struct.unpack("<I", fh.read(4))
                f._arcs[s] = [Arc(*arc.unpack(fh.read(arc.size))) for _ in range(n)]
        except struct.error as exc:
            raise InputError(f"truncated FWF1 data: {exc}") from None
        if start != 0xFFFFFFFF:
            f.start = start
        return f

    @classmethod
    def from_bytes(cls, data: bytes) -> "Wfst":
        return cls.read(io.BytesIO(data))

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            self.write(fh)

    @classmethod
    def load(cls, path) -> "Wfst":
        with open(path, "rb") as fh:
            return cls.read(fh)


def _write_symbols(fh: BinaryIO, table: SymbolTable) -> None:
    fh.write(struct.pack("<I", len(table)))
    for s in table:
        b = s.encode("utf-8")
        fh.write(struct.pack("<I", len(b)))
        fh.write(b)


def _read_symbols(fh: BinaryIO) -> SymbolTable:
    (n,) = struct.unpack("<I", fh.read(4))
    symbols = []
    for _ in range(n):
        (length,) = struct.unpack("<I", fh.read(4))
        symbols.append(fh.read(length).decode("utf-8"))
    return SymbolTable.from_list(symbols)


def _dot_label(symbol: str) -> str:
    if symbol == EPS_SYMBOL:
        return "ε"
    if symbol == " ":
        return "␣"
    return symbol.replace("\\", "\\\\").replace('"', '\\"')


def _fmt_weight(w: float) -> str:
    return f"{w:.4g}"


def to_dot(f: Wfst, title: str = "FST") -> str:
    """Graphviz rendering with ``ilabel:olabel/weight`` arc captions."""
    lines = [f'digraph "{title}" {{', "  rankdir = LR;", "  node [shape = circle];"]
    for s in f.states():
        label = str(s)
        shape = "circle"
        if f.is_final(s):
            label += "/" + _fmt_weight(f.final(s))
            shape = "doublecircle"
        style = ", style = bold" if s == f.start else ""
        lines.append(f'  {s} [label = "{label}", shape = {shape}{style}];')
    for s in f.states():
        for a in f.arcs(s):
            cap = f"{_dot_label(f.isyms.symbol(a.ilabel))}:{_dot_label(f.osyms.symbol(a.olabel))}/{_fmt_weight(a.weight)}"
            lines.append(f'  {s} -> {a.nextstate} [label = "{cap}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
