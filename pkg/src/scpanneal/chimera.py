"""Chimera hardware graphs and structured minor embeddings.

``F(p, q, c)`` is a ``p x q`` grid of ``K_{c,c}`` cells.  Vertex ``(a, b, k)``
sits in row ``a`` and column ``b`` (both 1-based); ``k in 1..c`` is the left
shore, coupled to the same ``k`` in the cells above and below, and
``k in c+1..2c`` is the right shore, coupled to the same ``k`` in the cells
to the left and right.

Three constructions are provided:

* :func:`embed_complete_bipartite` - ``K_{p,q}`` into
  ``F(ceil(q/c), ceil(p/c), c)`` with straight row/column chains.
* :func:`embed_chain_or` - the OR-chain graph ``L_n`` into
  ``F(ceil(2n/4), 2, 4)``.
* :func:`embed_instance` - the whole interaction graph of a reduced pair
  cover instance, one band of rows per ground element.

Node-index arithmetic uses the wrapped 1-based modulus ``((x - 1) % c) + 1``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx

from ._validation import check_count
from .exceptions import InfeasibleInstanceError, UnsupportedParameterError
from .instance import pair_cover_map
from .ising import reduce


def _wrap(x, c):
    return (x - 1) % c + 1


def _ceil_div(a, b):
    return -(-a // b)


class ChimeraGraph:
    def __init__(self, p, q, c=4):
        for name, value in (("p", p), ("q", q), ("c", c)):
            check_count(value, name, minimum=1)
        self.p, self.q, self.c = p, q, c
        g = nx.Graph()
        cells = list(itertools.product(range(1, p + 1), range(1, q + 1)))
        g.add_nodes_from((a, b, k) for a, b in cells for k in range(1, 2 * c + 1))
        for a, b in cells:
            for k in range(1, c + 1):
                for kk in range(c + 1, 2 * c + 1):
                    g.add_edge((a, b, k), (a, b, kk))
                if a < p:
                    g.add_edge((a, b, k), (a + 1, b, k))
            for kk in range(c + 1, 2 * c + 1):
                if b < q:
                    g.add_edge((a, b, kk), (a, b + 1, kk))
        self.graph = g

    @property
    def shape(self):
        return (self.p, self.q, self.c)

    def __contains__(self, node):
        return node in self.graph

    def has_edge(self, u, v):
        return self.graph.has_edge(u, v)

    def number_of_nodes(self):
        return self.graph.number_of_nodes()

    def number_of_edges(self):
        return self.graph.number_of_edges()

    def __repr__(self):
        return f"ChimeraGraph(p={self.p}, q={self.q}, c={self.c})"


def chimera(p, q, c=4):
    return ChimeraGraph(p, q, c)


@dataclass
class Embedding:
    """Chains of hardware vertices for each logical vertex.

    ``edges`` maps a logical edge ``(u, v)`` to the hardware edge realising
    it, with the first endpoint in ``chains[u]``.
    """

    chains: dict
    edges: dict = field(default_factory=dict)
    shape: tuple = None

    @property
    def qubits(self):
        return sum(len(ch) for ch in self.chains.values())

    def to_dict(self):
        out = {
            "chains": {str(u): [list(v) for v in sorted(ch)] for u, ch in self.chains.items()},
            "edges": {f"{u}--{v}": [list(a), list(b)] for (u, v), (a, b) in self.edges.items()},
        }
        if self.shape is not None:
            out["chimera"] = list(self.shape)
        return out

    @classmethod
    def from_dict(cls, data):
        chains = {u: frozenset(tuple(v) for v in vs) for u, vs in data["chains"].items()}
        edges = {}
        for key, (a, b) in data.get("edges", {}).items():
            u, v = key.split("--")
            edges[(u, v)] = (tuple(a), tuple(b))
        shape = tuple(data["chimera"]) if "chimera" in data else None
        return cls(chains, edges, shape)


def dump_embedding(emb, path):
    Path(path).write_text(json.dumps(emb.to_dict()) + "\n")


def load_embedding(path):
    return Embedding.from_dict(json.loads(Path(path).read_text()))


def _realize_edges(logical, chains, hw):
    """Pick, per logical edge, the lexicographically smallest coupler between the two chains."""
    edges = {}
    for u, v in logical.edges():
        best = None
        for a in sorted(chains[u]):
            for b in sorted(chains[v]):
                if hw.has_edge(a, b):
                    best = (a, b)
                    break
            if best:
                break
        if best is not None:
            edges[(u, v)] = best
    return edges


def complete_bipartite_graph(p, q):
    """``K_{p,q}`` with left vertices ``u1..up`` and right vertices ``v1..vq``."""
    g = nx.Graph()
    left = [f"u{i}" for i in range(1, p + 1)]
    right = [f"v{j}" for j in range(1, q + 1)]
    g.add_nodes_from(left + right)
    g.add_edges_from(itertools.product(left, right))
    return g


def embed_complete_bipartite(p_left, q_right, c=4):
    """Minor-embed ``K_{p,q}`` into ``F(ceil(q/c), ceil(p/c), c)``.

    Left vertex ``i`` becomes the column-``ceil(i/c)`` chain through every row
    on left-shore node ``wrap(i)``; right vertex ``j`` becomes the
    row-``ceil(j/c)`` chain through every column on right-shore node
    ``c + wrap(j)``.  Each edge lands in the cell where the chains cross.
    """
    p_left = check_count(p_left, "p_left", minimum=1)
    q_right = check_count(q_right, "q_right", minimum=1)
    rows, cols = _ceil_div(q_right, c), _ceil_div(p_left, c)
    chains = {}
    for i in range(1, p_left + 1):
        chains[f"u{i}"] = frozenset((t, _ceil_div(i, c), _wrap(i, c)) for t in range(1, rows + 1))
    for j in range(1, q_right + 1):
        chains[f"v{j}"] = frozenset((_ceil_div(j, c), t, c + _wrap(j, c)) for t in range(1, cols + 1))
    hw = chimera(rows, cols, c)
    logical = complete_bipartite_graph(p_left, q_right)
    return Embedding(chains, _realize_edges(logical, chains, hw), hw.shape)


def chain_or_graph(n):
    """``L_n``: OR-chain graph on ``t1..tn`` and ``x1..x(n-1)``."""
    g = nx.Graph()
    g.add_nodes_from(f"t{i}" for i in range(1, n + 1))
    g.add_nodes_from(f"x{i}" for i in range(1, n))
    if n >= 2:
        g.add_edges_from([("t1", "t2"), ("t1", "x1"), ("t2", "x1")])
    for i in range(2, n):
        g.add_edges_from([(f"x{i - 1}", f"x{i}"), (f"x{i - 1}", f"t{i + 1}"), (f"x{i}", f"t{i + 1}")])
    return g


def _x_reaches_next_row(i, n, c, rule):
    if rule == "literal":
        return 2 * i + 4 < 2 * n - 1
    # highest L_n neighbour of x_i: t_{i+2} if it exists, else t_{i+1}
    last = 2 * i + 3 if i + 2 <= n else 2 * i + 1
    return _ceil_div(last, c) > _ceil_div(2 * i, c)


def _or_chain_chains(n, row0=0, col0=0, c=4, rule="neighbors"):
    """Chains of ``L_n`` with its top-left cell at ``(row0 + 1, col0 + 1)``."""

    def v(a, b, k):
        return (row0 + a, col0 + b, k)

    chains = {}
    for i in range(1, n + 1):
        idx = 2 * i - 1
        a = _ceil_div(idx, c)
        nodes = {v(a, 1, _wrap(idx, c)), v(a, 1, c + _wrap(idx, c))}
        if i >= 3:
            nodes.add(v(a, 2, c + _wrap(idx, c)))
        chains[f"t{i}"] = nodes
    for i in range(1, n):
        idx = 2 * i
        a = _ceil_div(idx, c)
        nodes = {v(a, 1, _wrap(idx, c)), v(a, 1, c + _wrap(idx, c)), v(a, 2, c + _wrap(idx, c))}
        if _x_reaches_next_row(i, n, c, rule):
            k = _wrap(idx, c) if _ceil_div(i, 2) % 2 == 1 else _wrap(_wrap(idx, c) - 1, c)
            nodes.update({v(a, 2, k), v(a + 1, 2, k)})
        chains[f"x{i}"] = nodes
    return {u: frozenset(ch) for u, ch in chains.items()}


def embed_chain_or(n_t, c=4, rule="neighbors"):
    """Minor-embed ``L_n`` into ``F(ceil(2n/4), 2, 4)``.

    ``t_i`` and ``x_i`` occupy consecutive node slots ``2i-1`` and ``2i`` of
    the first column; the second column carries the links between
    consecutive cell rows.  An ``x_i`` chain is extended down the second
    column whenever one of its neighbours sits in the next cell row
    (``rule="neighbors"``).  ``rule="literal"`` instead extends only when
    ``2i + 4 < 2n - 1``; that rule leaves some edges unrealisable and is
    kept for comparison.
    """
    n_t = check_count(n_t, "n_t", minimum=2)
    if c != 4:
        raise UnsupportedParameterError("the OR-chain embedding is only defined for c = 4")
    if rule not in ("neighbors", "literal"):
        raise ValueError(f"unknown rule {rule!r}")
    chains = _or_chain_chains(n_t, c=c, rule=rule)
    hw = chimera(_ceil_div(2 * n_t, c), 2, c)
    return Embedding(chains, _realize_edges(chain_or_graph(n_t), chains, hw), hw.shape)


def interaction_graph(model, names=None):
    """Graph with a vertex per spin and an edge per nonzero coupling.

    ``names`` optionally maps spin index to a vertex label.
    """
    label = (lambda i: i) if names is None else names
    g = nx.Graph()
    g.add_nodes_from(label(i) for i in range(model.M))
    g.add_edges_from((label(i), label(j)) for (i, j), c in model.J.items() if c != 0)
    return g


@dataclass(frozen=True)
class InstanceEmbedding:
    embedding: Embedding
    logical: nx.Graph
    hardware: ChimeraGraph
    f1: int
    f2: int


def embed_instance(inst, c=4, cfg=None):
    """Embed the interaction graph of ``reduce(inst)`` into ``F(f1, f2, c)``.

    Ground element ``k`` gets a band of ``ceil(2 r_k / c)`` cell rows.  In the
    first ``ceil(2m/c)`` columns the cover spins ``s_i`` run vertically
    through every band and each pair spin ``t`` runs horizontally through its
    band, as in the complete bipartite construction with doubled spacing.
    The last two columns hold the OR-chain embedding of the band, which the
    horizontal ``t`` chains run straight into.
    """
    if c != 4:
        raise UnsupportedParameterError("the instance embedding is only defined for c = 4")
    pcm = pair_cover_map(inst)
    r = {k: pcm.r(k) for k in range(1, inst.n + 1)}
    if any(v == 0 for v in r.values()):
        raise InfeasibleInstanceError("some ground element has no covering pair")
    model, layout = reduce(inst, cfg)
    names = layout.name
    s_cols = _ceil_div(2 * inst.m, c)
    f2 = s_cols + 2
    bands, d = {}, 0
    for k in range(1, inst.n + 1):
        bands[k] = d
        d += _ceil_div(2 * r[k], c)
    f1 = max(d, 1)

    chains = {}
    for i in range(1, inst.m + 1):
        col, node = _ceil_div(2 * i - 1, c), _wrap(2 * i - 1, c)
        chains[names(i - 1)] = frozenset((a, col, node) for a in range(1, f1 + 1))
    for k in range(1, inst.n + 1):
        block = _or_chain_chains(r[k], row0=bands[k], col0=s_cols, c=c)
        for j, spin in enumerate(layout.t_spins[k], start=1):
            row = bands[k] + _ceil_div(2 * j - 1, c)
            horizontal = {(row, b, c + _wrap(2 * j - 1, c)) for b in range(1, s_cols + 1)}
            chains[names(spin)] = frozenset(horizontal | block[f"t{j}"])
        for j, spin in enumerate(layout.x_spins[k], start=1):
            chains[names(spin)] = block[f"x{j}"]

    hw = chimera(f1, f2, c)
    logical = interaction_graph(model, names)
    emb = Embedding(chains, _realize_edges(logical, chains, hw), hw.shape)
    return InstanceEmbedding(emb, logical, hw, f1, f2)


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    reason: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def verify_minor_embedding(logical, hw, emb):
    """Check chains are present, inside ``hw``, disjoint and connected, and
    that every logical edge has a coupler between its two chains.

    Returns a :class:`VerificationResult` naming the first failed condition:
    ``missing-chain``, ``unknown-vertex``, ``chain-overlap``,
    ``chain-connectivity``, ``bad-edge`` or ``missing-edge``.
    """
    chains = emb.chains
    for u in logical.nodes():
        if not chains.get(u):
            return VerificationResult(False, "missing-chain", f"{u} has no chain")
    owner = {}
    for u, chain in chains.items():
        for node in chain:
            if node not in hw:
                return VerificationResult(False, "unknown-vertex", f"{node} of {u} is not in {hw}")
            if node in owner:
                return VerificationResult(False, "chain-overlap", f"{node} shared by {owner[node]} and {u}")
            owner[node] = u
    for u in logical.nodes():
        if not nx.is_connected(hw.graph.subgraph(chains[u])):
            return VerificationResult(False, "chain-connectivity", f"chain of {u} is disconnected")
    for u, v in logical.edges():
        realized = emb.edges.get((u, v)) or emb.edges.get((v, u))
        if realized is not None:
            a, b = realized
            cu, cv = chains[u], chains[v]
            if not ((a in cu and b in cv) or (a in cv and b in cu)) or not hw.has_edge(a, b):
                return VerificationResult(False, "bad-edge", f"recorded coupler {realized} does not join {u} and {v}")
            continue
        if not any(hw.has_edge(a, b) for a in chains[u] for b in chains[v]):
            return VerificationResult(False, "missing-edge", f"no coupler between chains of {u} and {v}")
    return VerificationResult(True)


_PALETTE = (
    "red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan4",
    "gold3", "navy", "olivedrab", "deeppink", "slateblue", "chocolate", "teal", "gray40",
)


def to_dot(hw, emb=None):
    """Graphviz DOT text for ``hw`` with embedded chains coloured."""
    colour = {}
    if emb is not None:
        for n, (u, chain) in enumerate(emb.chains.items()):
            for node in chain:
                colour[node] = (_PALETTE[n % len(_PALETTE)], u)
    lines = ["graph chimera {", "  node [shape=circle, fontsize=8];"]
    for a, b, k in sorted(hw.graph.nodes()):
        name = f"{a},{b},{k}"
        attrs = f'label="{k}", pos="{(b - 1) * 3 + (0 if k <= hw.c else 1.2)},{-(a - 1) * 3 - (k - 1) % hw.c * 0.5}!"'
        if (a, b, k) in colour:
            col, u = colour[(a, b, k)]
            attrs += f', style=filled, fillcolor="{col}", tooltip="{u}"'
        lines.append(f'  "{name}" [{attrs}];')
    for (a1, b1, k1), (a2, b2, k2) in sorted(tuple(sorted(e)) for e in hw.graph.edges()):
        lines.append(f'  "{a1},{b1},{k1}" -- "{a2},{b2},{k2}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
