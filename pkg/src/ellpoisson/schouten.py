"""Jacobiators, compatibility checks and the compatible-space solver."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .brackets import BracketTable, monomials
from .exactpoly import ZERO, MPoly, VarId, _decode
from .linalg import SparseEchelon, integer_row


class Trivector:
    """Totally antisymmetric map (i, j, k) -> MPoly, stored for i < j < k."""

    def __init__(self, entries: dict | None = None):
        self.entries = {k: v for k, v in (entries or {}).items() if v}

    def is_zero(self) -> bool:
        return not self.entries

    def get(self, i: int, j: int, k: int) -> MPoly:
        key = (i, j, k)
        if len(set(key)) < 3:
            return ZERO
        order = sorted(key)
        sign = _sign_of(key)
        return self.entries.get(tuple(order), ZERO) * sign

    def first_witness(self):
        """Smallest triple with a nonzero entry, or None."""
        if not self.entries:
            return None
        k = min(self.entries)
        return k, self.entries[k]

    def __eq__(self, other):
        return isinstance(other, Trivector) and self.entries == other.entries

    def to_json(self) -> list:
        return [{"i": i, "j": j, "k": k, "poly": p.to_json()} for (i, j, k), p in sorted(self.entries.items())]


def _sign_of(seq) -> int:
    s = 1
    seq = list(seq)
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                s = -s
    return s


class _Derivs:
    """Cache of d/dx_l of every entry of a table."""

    def __init__(self, table: BracketTable):
        self.table = table
        self.cache: dict = {}

    def get(self, j, k, l) -> MPoly:
        key = (j, k, l)
        d = self.cache.get(key)
        if d is None:
            d = self.table.get(j, k).partial(VarId(self.table.cls, l))
            self.cache[key] = d
        return d


def _mixed_entry(B1, B2, d1, d2, i, j, k) -> MPoly:
    acc = ZERO
    for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
        for l in B1.indices:
            x = B1.get(a, l)
            if x:
                y = d2.get(b, c, l)
                if y:
                    acc = acc + x * y
            x = B2.get(a, l)
            if x:
                y = d1.get(b, c, l)
                if y:
                    acc = acc + x * y
    return acc


_JOB = {}


def _job_init(B1, B2):
    _JOB["B1"], _JOB["B2"] = B1, B2
    _JOB["d1"], _JOB["d2"] = _Derivs(B1), _Derivs(B2)


def _job_entry(triple):
    return _mixed_entry(_JOB["B1"], _JOB["B2"], _JOB["d1"], _JOB["d2"], *triple)


def mixed_jacobiator(B1: BracketTable, B2: BracketTable, jobs: int = 1, stop_early: bool = False) -> Trivector:
    """Sum over l and cyclic (i,j,k) of B1(i,l) d_l B2(j,k) + B2(i,l) d_l B1(j,k).

    With B1 = B2 this is twice the Jacobiator of B1.  ``stop_early`` returns
    as soon as one nonzero entry is found.
    """
    if B1.indices != B2.indices or B1.cls != B2.cls:
        raise ValueError("tables over different variables")
    triples = list(itertools.combinations(B1.indices, 3))
    if jobs > 1 and not stop_early:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_job_init, initargs=(B1, B2)) as ex:
            values = list(ex.map(_job_entry, triples, chunksize=8))
        return Trivector(dict(zip(triples, values)))
    d1 = _Derivs(B1)
    d2 = d1 if B2 is B1 else _Derivs(B2)
    out = {}
    for t in triples:
        v = _mixed_entry(B1, B2, d1, d2, *t)
        if v:
            out[t] = v
            if stop_early:
                break
    return Trivector(out)


def jacobiator(B: BracketTable, jobs: int = 1) -> Trivector:
    return mixed_jacobiator(B, B, jobs=jobs)


def is_poisson(B: BracketTable, jobs: int = 1) -> bool:
    return mixed_jacobiator(B, B, jobs=jobs, stop_early=jobs <= 1).is_zero()


def are_compatible(B1: BracketTable, B2: BracketTable, jobs: int = 1) -> bool:
    return mixed_jacobiator(B1, B2, jobs=jobs, stop_early=jobs <= 1).is_zero()


# ---------------------------------------------------------------------------
# compatible-space solver


@dataclass
class CompatReport:
    n: int
    degree: int
    unknowns: int
    constraint_rank: int
    solution_dim: int
    solution_basis: list = field(default_factory=list)
    conclusive: bool = True
    rows_processed: int = 0
    self_poisson: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "degree": self.degree,
            "unknowns": self.unknowns,
            "rank": self.constraint_rank,
            "solution_dim": self.solution_dim,
            "conclusive": self.conclusive,
            "rows_processed": self.rows_processed,
            "basis": [t.to_json() for t in self.solution_basis],
            "basis_self_poisson": self.self_poisson,
        }


def unknown_table(indices, degree: int, cls: str = "X") -> tuple:
    """Generic antisymmetric table whose coefficients are unknowns k_0, k_1, ...

    Returns ``(table, columns)`` where ``columns[t] = ((i, j), monomial)``.
    """
    xs = [VarId(cls, i) for i in indices]
    monos = monomials(xs, degree)
    entries = {}
    columns = []
    t = 0
    for i, j in itertools.combinations(indices, 2):
        acc = ZERO
        for m in monos:
            acc = acc + m * MPoly.var(VarId("K", t))
            columns.append(((i, j), m))
            t += 1
        entries[(i, j)] = acc
    return BracketTable(indices, entries, n=len(indices), cls=cls), columns


def _rows_of(tri_entry: MPoly, ncols: int):
    """Yield one linear constraint per x-monomial of a trivector entry."""
    groups = tri_entry.split(lambda v: v.cls != "K")
    for sub in sorted(groups, key=lambda m: _decode(m)):
        lin = groups[sub]
        row = {}
        for dec, c in lin.items():
            if len(dec) != 1 or dec[0][1] != 1:
                raise AssertionError("constraint is not linear in the unknowns")
            row[dec[0][0].index] = c
        cols = sorted(row)
        ints = integer_row([row[c] for c in cols])
        yield dict(zip(cols, ints))


def compatible_space_dim(basis: list, degree: int, max_rows: int | None = None,
                         check_self: bool = True) -> CompatReport:
    """Dimension of the space of degree-d brackets C with [B_k, C] = 0 for all k.

    Only the linear compatibility constraints are imposed.  ``max_rows``
    bounds the number of constraint rows fed to the eliminator; hitting it
    yields a report marked inconclusive (the rank is then a lower bound).
    """
    if not 0 <= degree <= 4:
        raise ValueError("degree must be in 0..4")
    if not basis:
        raise ValueError("need at least one table to fix the variable universe")
    indices = basis[0].indices
    cls = basis[0].cls
    C, columns = unknown_table(indices, degree, cls)
    ncols = len(columns)
    ech = SparseEchelon(ncols)
    processed = 0
    conclusive = True
    for B in basis:
        if B.indices != indices:
            raise ValueError("basis tables must share one variable universe")
        tri = mixed_jacobiator(B, C)
        for key in sorted(tri.entries):
            for row in _rows_of(tri.entries[key], ncols):
                if max_rows is not None and processed >= max_rows:
                    conclusive = False
                    break
                processed += 1
                ech.add(row)
                if ech.rank == ncols:
                    break
            if not conclusive:
                break
        if not conclusive:
            break
    rank = ech.rank
    if not conclusive:
        return CompatReport(len(indices), degree, ncols, rank, ncols - rank, [], False, processed)
    null = ech.nullspace()
    sols = []
    for vec in null:
        entries: dict = {}
        for t, v in enumerate(vec):
            if v:
                (i, j), m = columns[t]
                entries[(i, j)] = entries.get((i, j), ZERO) + m * v
        sols.append(BracketTable(indices, entries, n=len(indices), cls=cls))
    for s in sols:
        for B in basis:
            if not mixed_jacobiator(B, s).is_zero():
                raise AssertionError("solution basis vector violates a constraint")
    selfp = [is_poisson(s) for s in sols] if check_self else []
    return CompatReport(len(indices), degree, ncols, rank, ncols - rank, sols, True, processed, selfp)


def stacked_rank(tables: list) -> int:
    """Rank of the coefficient vectors of a list of parameter-free tables."""
    from .linalg import rank

    keys: dict = {}
    vecs = []
    for t in tables:
        v = {}
        for (i, j), p in t.entries.items():
            for m, c in p.terms.items():
                col = keys.setdefault((i, j, _decode(m)), len(keys))
                v[col] = c
        vecs.append(v)
    matrix = [integer_row([v.get(c, 0) for c in range(len(keys))]) for v in vecs]
    return rank(matrix)


def n_unknowns(n_vars: int, degree: int) -> int:
    return math.comb(n_vars, 2) * math.comb(n_vars + degree - 1, degree)
