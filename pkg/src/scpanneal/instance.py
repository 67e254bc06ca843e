"""Set Cover with Pairs instances: representation, exact solving, generation.

Indices are 1-based throughout to match the usual ``f_i`` / ``c_k`` naming:
cover objects are ``1..m`` and ground elements ``1..n``.  An edge ``(i, k)``
means cover object ``f_i`` is adjacent to ground element ``c_k``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from ._validation import check_count, check_rng
from .exceptions import CapacityError, InfeasibleInstanceError

MAX_EXACT_COVER_SIZE = 24


@dataclass(frozen=True)
class ScpInstance:
    """Bipartite graph between ground set ``U`` (size n) and cover set ``S`` (size m)."""

    n: int
    m: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        check_count(self.n, "n")
        check_count(self.m, "m")
        edges = frozenset((int(i), int(k)) for i, k in self.edges)
        for i, k in edges:
            if not (1 <= i <= self.m and 1 <= k <= self.n):
                raise ValueError(f"edge ({i}, {k}) out of range for n={self.n}, m={self.m}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n, m, edges):
        edges = list(edges)
        if len(set(map(tuple, edges))) != len(edges):
            raise ValueError("duplicate edges")
        return cls(n, m, frozenset(map(tuple, edges)))

    def sorted_edges(self):
        return sorted(self.edges)

    def cover_neighbors(self, i):
        """Ground indices adjacent to cover object ``f_i``."""
        return frozenset(k for j, k in self.edges if j == i)

    def ground_neighbors(self, k):
        """Cover indices adjacent to ground element ``c_k``."""
        return frozenset(i for i, kk in self.edges if kk == k)

    @property
    def dummy_free(self):
        return all(self.cover_neighbors(i) for i in range(1, self.m + 1))

    @property
    def feasible(self):
        return all(len(self.ground_neighbors(k)) >= 2 for k in range(1, self.n + 1))

    def to_dict(self):
        return {"n": self.n, "m": self.m, "edges": [list(e) for e in self.sorted_edges()]}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls.from_edges(int(data["n"]), int(data["m"]), data["edges"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed instance document: {exc}") from exc


def dump_instance(inst, path):
    Path(path).write_text(json.dumps(inst.to_dict()) + "\n")


def load_instance(path):
    return ScpInstance.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class CoverSolution:
    chosen: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "chosen", tuple(sorted(set(int(i) for i in self.chosen))))

    @property
    def size(self):
        return len(self.chosen)


@dataclass(frozen=True)
class PairCoverMap:
    """Which pairs of cover objects cover which ground elements.

    ``pairs`` lists every ``(i, j)`` with ``i < j`` in lexicographic order and
    ``q[(i, j)]`` is the set of ground elements adjacent to both.
    ``covering[k]`` lists the pairs covering ``c_k`` in the same order.
    """

    pairs: tuple
    q: dict
    covering: dict

    def r(self, k):
        return len(self.covering[k])


def pair_cover_map(inst):
    nbrs = {i: inst.cover_neighbors(i) for i in range(1, inst.m + 1)}
    pairs = tuple(combinations(range(1, inst.m + 1), 2))
    q = {(i, j): frozenset(nbrs[i] & nbrs[j]) for i, j in pairs}
    covering = {k: tuple(p for p in pairs if k in q[p]) for k in range(1, inst.n + 1)}
    return PairCoverMap(pairs=pairs, q=q, covering=covering)


def _ground_masks(inst):
    masks = [0] * inst.n
    for i, k in inst.edges:
        masks[k - 1] |= 1 << (i - 1)
    return masks


def _covers(mask, ground_masks):
    return all((mask & g).bit_count() >= 2 for g in ground_masks)


def verify_cover(inst, solution):
    """True iff every ground element has two chosen neighbours."""
    chosen = solution.chosen if isinstance(solution, CoverSolution) else tuple(solution)
    mask = 0
    for i in chosen:
        if not 1 <= i <= inst.m:
            raise ValueError(f"cover index {i} out of range 1..{inst.m}")
        mask |= 1 << (i - 1)
    return _covers(mask, _ground_masks(inst))


def _check_solvable(inst):
    if inst.m > MAX_EXACT_COVER_SIZE:
        raise CapacityError(f"exhaustive solve supports m <= {MAX_EXACT_COVER_SIZE}, got {inst.m}")
    bad = [k for k in range(1, inst.n + 1) if len(inst.ground_neighbors(k)) < 2]
    if bad:
        raise InfeasibleInstanceError(f"ground elements {bad} are covered by no pair")


def minimum_covers(inst):
    """All minimum-size pair covers, each as a sorted tuple, in lexicographic order."""
    _check_solvable(inst)
    ground = _ground_masks(inst)
    for size in range(inst.m + 1):
        found = []
        for combo in combinations(range(1, inst.m + 1), size):
            mask = sum(1 << (i - 1) for i in combo)
            if _covers(mask, ground):
                found.append(combo)
        if found:
            return found
    raise AssertionError("unreachable: a feasible instance is covered by all of S")


def solve_exact(inst):
    """Lexicographically smallest minimum pair cover, by enumeration."""
    _check_solvable(inst)
    ground = _ground_masks(inst)
    for size in range(inst.m + 1):
        for combo in combinations(range(1, inst.m + 1), size):
            if _covers(sum(1 << (i - 1) for i in combo), ground):
                return CoverSolution(combo)
    raise AssertionError("unreachable: a feasible instance is covered by all of S")


def gen_random_dummy_free(n, m, seed=None):
    """Draw a dummy-free instance uniformly among all ``(2**n - 1)**m`` of them.

    Each cover object flips one fair coin per ground element; if it ends up
    with no neighbour, only its own row is redrawn.
    """
    n = check_count(n, "n")
    m = check_count(m, "m", minimum=1)
    if n == 0:
        raise ValueError("n=0 makes every cover object a dummy")
    rng = check_rng(seed)
    edges = []
    for i in range(1, m + 1):
        while True:
            row = rng.integers(0, 2, size=n)
            if row.any():
                break
        edges.extend((i, k + 1) for k in range(n) if row[k])
    return ScpInstance(n, m, frozenset(edges))
