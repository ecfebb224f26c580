"""Plain-text instance and graph files (whitespace-separated integers, 1-based).

* NOE instance: ``n p`` on the first line, then the ``n`` values.
* List / function file: ``n`` on the first line, then ``n`` values.
* Graph: ``n m`` on the first line, then one ``v y`` edge per line.
"""

from __future__ import annotations

from pathlib import Path

from .expander import BipartiteGraph
from .noe import NoeInstance


def _ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split()]


def parse_noe_instance(text: str) -> NoeInstance:
    lines = text.strip().splitlines()
    if not lines:
        raise ValueError("empty instance file")
    head = _ints(lines[0])
    if len(head) != 2:
        raise ValueError("first line must be 'n p'")
    n, p = head
    return NoeInstance.of(n, p, _ints("\n".join(lines[1:])))


def format_noe_instance(inst: NoeInstance) -> str:
    return f"{inst.n} {inst.p}\n{' '.join(map(str, inst.X))}\n"


def parse_list(text: str) -> list[int]:
    lines = text.strip().splitlines()
    if not lines:
        raise ValueError("empty list file")
    head = _ints(lines[0])
    if len(head) != 1:
        raise ValueError("first line must hold the list length")
    values = _ints("\n".join(lines[1:]))
    if len(values) != head[0]:
        raise ValueError(f"header says {head[0]} values, found {len(values)}")
    return values


def format_list(values: list[int]) -> str:
    return f"{len(values)}\n{' '.join(map(str, values))}\n"


def parse_graph(text: str) -> BipartiteGraph:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty graph file")
    head = _ints(lines[0])
    if len(head) != 2:
        raise ValueError("first line must be 'n m'")
    edges = []
    for ln in lines[1:]:
        pair = _ints(ln)
        if len(pair) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        edges.append((pair[0], pair[1]))
    return BipartiteGraph.from_edges(head[0], head[1], edges)


def format_graph(G: BipartiteGraph) -> str:
    body = "".join(f"{v} {y}\n" for v, y in G.edges())
    return f"{G.n_left} {G.m_right}\n{body}"


def read_text(path: str | Path) -> str:
    return Path(path).read_text()
