"""Ising Hamiltonians for Set Cover with Pairs via penalty gadgets.

Spin convention: a bit ``s`` in {0, 1} has Pauli-Z eigenvalue ``p = 1 - 2s``,
so ``|0>`` has ``p = +1``.  A model stores local fields ``h`` and couplings
``J[i, j]`` (``i < j``) with energy

    E(s) = offset + sum_i h_i p_i + sum_{i<j} J_ij p_i p_j.

All coefficients are :class:`fractions.Fraction`.  A dense symmetric matrix
built from this model holds ``J_ij / 2`` off the diagonal, so that
``E = h.p + p^T Jmat p + offset``.

Basis index ``b`` of a ``2**M`` vector stores spin ``i`` in bit ``i``
(little endian).
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._validation import check_assignment
from .exceptions import CapacityError, InfeasibleInstanceError
from .instance import CoverSolution, pair_cover_map

MAX_EXHAUSTIVE_SPINS = 24
_CHUNK_BITS = 18


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def _fmt(x):
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class GadgetTerms:
    """Diagonal operator as ``constant + sum linear*p + sum quadratic*p*p``."""

    linear: dict = field(default_factory=dict)
    quadratic: dict = field(default_factory=dict)
    constant: Fraction = Fraction(0)

    @property
    def spins(self):
        out = set(self.linear)
        for i, j in self.quadratic:
            out.update((i, j))
        return sorted(out)

    def energy(self, bits):
        """Energy for ``bits``, a mapping from spin index to 0/1."""
        p = {i: 1 - 2 * int(bits[i]) for i in self.spins}
        e = self.constant
        e += sum(c * p[i] for i, c in self.linear.items())
        e += sum(c * p[i] * p[j] for (i, j), c in self.quadratic.items())
        return e


def _distinct(*spins):
    if len(set(spins)) != len(spins):
        raise ValueError(f"gadget spins must be distinct, got {spins}")


def _pair(a, b):
    return (a, b) if a < b else (b, a)


def gadget_or(a, b, out):
    """Zero energy exactly when ``a OR b == out``."""
    _distinct(a, b, out)
    q = Fraction(1, 4)
    return GadgetTerms(
        linear={a: -q, b: -q, out: 2 * q},
        quadratic={_pair(a, b): q, _pair(a, out): -2 * q, _pair(b, out): -2 * q},
        constant=3 * q,
    )


def gadget_and(a, b, out):
    """Zero energy exactly when ``a AND b == out``."""
    _distinct(a, b, out)
    q = Fraction(1, 4)
    return GadgetTerms(
        linear={a: q, b: q, out: -2 * q},
        quadratic={_pair(a, b): 2 * q, _pair(a, out): -3 * q, _pair(b, out): -3 * q},
        constant=4 * q,
    )


def gadget_leq(a, b):
    """Energy 1 on ``(a, b) = (1, 0)`` and 0 otherwise."""
    _distinct(a, b)
    q = Fraction(1, 4)
    return GadgetTerms(linear={a: -q, b: q}, quadratic={_pair(a, b): -q}, constant=q)


def projector_one(a):
    """``|1><1|`` on spin ``a``."""
    return GadgetTerms(linear={a: Fraction(-1, 2)}, constant=Fraction(1, 2))


def projector_zero(a):
    """``|0><0|`` on spin ``a``."""
    return GadgetTerms(linear={a: Fraction(1, 2)}, constant=Fraction(1, 2))


@dataclass(frozen=True)
class IsingModel:
    M: int
    h: tuple
    J: dict
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        h = tuple(_frac(x) for x in self.h)
        if len(h) != self.M:
            raise ValueError(f"h has {len(h)} entries for M={self.M}")
        J = {}
        for (i, j), c in self.J.items():
            i, j = int(i), int(j)
            if i == j:
                raise ValueError("diagonal couplings are not allowed")
            if not (0 <= i < self.M and 0 <= j < self.M):
                raise ValueError(f"coupling ({i}, {j}) out of range")
            key = _pair(i, j)
            if key in J:
                raise ValueError(f"coupling {key} given twice")
            c = _frac(c)
            if c != 0:
                J[key] = c
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", dict(sorted(J.items())))
        object.__setattr__(self, "offset", _frac(self.offset))

    @classmethod
    def from_terms(cls, M, terms):
        h = [Fraction(0)] * M
        J = defaultdict(Fraction)
        offset = Fraction(0)
        for t in terms:
            offset += t.constant
            for i, c in t.linear.items():
                h[i] += c
            for key, c in t.quadratic.items():
                J[key] += c
        return cls(M, tuple(h), dict(J), offset)

    def energy(self, s):
        """Exact energy of a bit assignment ``s``."""
        s = check_assignment(s, self.M)
        p = [1 - 2 * int(b) for b in s]
        e = self.offset + sum(hi * pi for hi, pi in zip(self.h, p))
        e += sum(c * p[i] * p[j] for (i, j), c in self.J.items())
        return e

    def scaled(self, factor):
        factor = _frac(factor)
        return IsingModel(
            self.M,
            tuple(factor * x for x in self.h),
            {k: factor * v for k, v in self.J.items()},
            factor * self.offset,
        )

    def coupling_matrix(self):
        """Dense symmetric float matrix with ``J_ij / 2`` off the diagonal."""
        mat = np.zeros((self.M, self.M))
        for (i, j), c in self.J.items():
            mat[i, j] = mat[j, i] = float(c) / 2
        return mat

    def integer_form(self):
        """Return ``(L, h, J, offset)`` scaled by the common denominator ``L`` to integers."""
        coeffs = list(self.h) + list(self.J.values()) + [self.offset]
        L = 1
        for c in coeffs:
            L = L * c.denominator // math.gcd(L, c.denominator)
        h = [int(x * L) for x in self.h]
        J = {k: int(v * L) for k, v in self.J.items()}
        return L, h, J, int(self.offset * L)

    def _integer_energies(self, indices):
        L, h, J, off = self.integer_form()
        bound = abs(off) + sum(map(abs, h)) + sum(map(abs, J.values()))
        if bound >= 2**52:
            raise CapacityError("coefficients too large for exact vectorised evaluation")
        shifts = np.arange(self.M, dtype=np.int64)
        p = 1.0 - 2.0 * ((indices[:, None] >> shifts) & 1)
        upper = np.zeros((self.M, self.M))
        for (i, j), c in J.items():
            upper[i, j] = c
        e = off + p @ np.asarray(h, dtype=float)
        if J:
            e += np.einsum("bi,bi->b", p @ upper, p)
        return e, L

    def energy_table(self):
        """Float energies of all ``2**M`` basis states, indexed little endian."""
        if self.M > MAX_EXHAUSTIVE_SPINS:
            raise CapacityError(f"energy table supports M <= {MAX_EXHAUSTIVE_SPINS}")
        out = np.empty(2**self.M)
        step = 1 << _CHUNK_BITS
        for start in range(0, 2**self.M, step):
            idx = np.arange(start, min(start + step, 2**self.M), dtype=np.int64)
            e, L = self._integer_energies(idx)
            out[start : start + idx.size] = e / L
        return out

    def to_dict(self):
        return {
            "M": self.M,
            "h": [_fmt(x) for x in self.h],
            "J": [[i, j, _fmt(c)] for (i, j), c in self.J.items()],
            "offset": _fmt(self.offset),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                int(data["M"]),
                tuple(Fraction(x) for x in data["h"]),
                {(int(i), int(j)): Fraction(c) for i, j, c in data["J"]},
                Fraction(data.get("offset", "0/1")),
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed Ising document: {exc}") from exc


def dump_model(model, path):
    Path(path).write_text(json.dumps(model.to_dict()) + "\n")


def load_model(path):
    return IsingModel.from_dict(json.loads(Path(path).read_text()))


def energy(model, s):
    return model.energy(s)


@dataclass(frozen=True)
class ReductionConfig:
    alpha: Fraction = Fraction(1, 4)
    enforce_top: bool = True

    def __post_init__(self):
        alpha = _frac(self.alpha)
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class VariableLayout:
    """Bijection between spin indices and the logical variables of the reduction.

    Labels are tuples: ``("s", i)``, ``("t", k, i, j)`` for pair ``{f_i, f_j}``
    covering ``c_k``, and ``("x", k, j)`` for the ``j``-th OR-chain auxiliary.
    """

    m: int
    labels: tuple
    t_spins: dict
    x_spins: dict

    @property
    def M(self):
        return len(self.labels)

    @property
    def s_spins(self):
        return list(range(self.m))

    def index(self, label):
        return self.labels.index(tuple(label))

    def name(self, spin):
        lab = self.labels[spin]
        if lab[0] == "s":
            return f"s{lab[1]}"
        if lab[0] == "t":
            return f"t{lab[2]},{lab[3]}^{lab[1]}"
        return f"x{lab[2]}^{lab[1]}"


def build_layout(inst, pcm=None):
    pcm = pcm or pair_cover_map(inst)
    labels = [("s", i) for i in range(1, inst.m + 1)]
    t_spins, x_spins = {}, {}
    for k in range(1, inst.n + 1):
        t_spins[k] = []
        for i, j in pcm.covering[k]:
            t_spins[k].append(len(labels))
            labels.append(("t", k, i, j))
    for k in range(1, inst.n + 1):
        x_spins[k] = []
        for j in range(1, len(pcm.covering[k])):
            x_spins[k].append(len(labels))
            labels.append(("x", k, j))
    return VariableLayout(
        inst.m,
        tuple(labels),
        {k: tuple(v) for k, v in t_spins.items()},
        {k: tuple(v) for k, v in x_spins.items()},
    )


def reduction_terms(inst, cfg=None):
    """Gadget decomposition of the pair-cover Hamiltonian, plus its layout."""
    cfg = cfg or ReductionConfig()
    pcm = pair_cover_map(inst)
    empty = [k for k in range(1, inst.n + 1) if pcm.r(k) == 0]
    if empty:
        raise InfeasibleInstanceError(f"ground elements {empty} are covered by no pair")
    layout = build_layout(inst, pcm)
    terms = []
    for i in range(inst.m):
        p1 = projector_one(i)
        terms.append(GadgetTerms({i: cfg.alpha * p1.linear[i]}, {}, cfg.alpha * p1.constant))
    for k in range(1, inst.n + 1):
        ts, xs = layout.t_spins[k], layout.x_spins[k]
        if len(ts) >= 2:
            terms.append(gadget_or(ts[0], ts[1], xs[0]))
            for j in range(1, len(xs)):
                terms.append(gadget_or(xs[j - 1], ts[j + 1], xs[j]))
        if cfg.enforce_top:
            terms.append(projector_zero(xs[-1] if xs else ts[0]))
    for k in range(1, inst.n + 1):
        for spin, (i, j) in zip(layout.t_spins[k], pcm.covering[k]):
            terms.append(gadget_leq(spin, i - 1))
            terms.append(gadget_leq(spin, j - 1))
    return terms, layout


def reduce(inst, cfg=None):
    """Build ``alpha * H_target + H_constraints`` for ``inst``.

    Returns ``(model, layout)``.  Raises :class:`InfeasibleInstanceError` when
    some ground element has no covering pair.
    """
    terms, layout = reduction_terms(inst, cfg)
    return IsingModel.from_terms(layout.M, terms), layout


def decode(layout, s):
    s = check_assignment(s, layout.M)
    return CoverSolution(tuple(i + 1 for i in range(layout.m) if s[i]))


def index_to_bits(index, M):
    return np.array([(index >> i) & 1 for i in range(M)], dtype=np.uint8)


def ground_states_exhaustive(model):
    """Exact minimum energy and every minimising assignment.

    Energies are evaluated on the integer-scaled model in float64 (exact for
    the coefficient sizes accepted), so ties are detected exactly.
    """
    if model.M > MAX_EXHAUSTIVE_SPINS:
        raise CapacityError(f"exhaustive search supports M <= {MAX_EXHAUSTIVE_SPINS}, got {model.M}")
    best, winners = None, []
    step = 1 << _CHUNK_BITS
    L = 1
    for start in range(0, 2**model.M, step):
        idx = np.arange(start, min(start + step, 2**model.M), dtype=np.int64)
        e, L = model._integer_energies(idx)
        low = e.min()
        if best is None or low < best:
            best, winners = low, []
        if low == best:
            winners.extend(idx[e == low].tolist())
    min_energy = Fraction(int(best), L)
    return min_energy, [index_to_bits(b, model.M) for b in winners]
