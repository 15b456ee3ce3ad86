"""Fraction-free exact linear algebra over the integers.

Two engines:

* :func:`bareiss` -- classic one-step fraction-free Gaussian elimination on
  a dense integer matrix (every division is exact).
* :class:`SparseEchelon` -- streaming row-by-row echelon form with sparse
  integer rows; each new row is cross-multiplied against existing pivots
  (never divided) and then made primitive.  Suited to tall constraint
  systems with block structure.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm


def integer_row(coeffs) -> list:
    """Clear denominators of a rational vector, returning a primitive int vector."""
    den = 1
    for c in coeffs:
        den = lcm(den, int(Fraction(c).denominator) if not isinstance(c, int) else 1)
    row = [int(Fraction(c) * den) for c in coeffs]
    g = 0
    for v in row:
        g = gcd(g, v)
    if g > 1:
        row = [v // g for v in row]
    return row


def bareiss(matrix) -> tuple:
    """Row-echelon form of an integer matrix by Bareiss elimination.

    Returns ``(echelon rows, pivot columns)``; the rank is ``len(pivots)``.
    The input is not modified.
    """
    m = [list(r) for r in matrix]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    prev = 1
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((k for k in range(r, rows) if m[k][c] != 0), None)
        if p is None:
            continue
        if p != r:
            m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for k in range(r + 1, rows):
            mk = m[k]
            a = mk[c]
            row_r = m[r]
            for cc in range(c + 1, cols):
                mk[cc] = (piv * mk[cc] - a * row_r[cc]) // prev
            mk[c] = 0
        # rows above r are untouched; zero pattern below the pivot is exact
        prev = piv
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(matrix) -> int:
    if not matrix:
        return 0
    return len(bareiss(matrix)[1])


def _primitive(row: dict) -> dict:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    lead = row[min(row)]
    if lead < 0:
        g = -g
    if g not in (0, 1):
        row = {k: v // g for k, v in row.items()}
    return row


class SparseEchelon:
    """Incremental echelon form over Z with sparse ``{column: int}`` rows."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict = {}  # leading column -> primitive row

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: dict) -> dict:
        row = {k: v for k, v in row.items() if v}
        while row:
            c = min(row)
            prow = self.pivots.get(c)
            if prow is None:
                return row
            a, p = row[c], prow[c]
            g = gcd(a, p)
            a, p = a // g, p // g
            out = {k: v * p for k, v in row.items()}
            for k, v in prow.items():
                s = out.get(k, 0) - a * v
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
            row = _primitive(out) if out else out
        return row

    def add(self, row: dict) -> bool:
        """Insert a row; return True if it raised the rank."""
        red = self.reduce(row)
        if not red:
            return False
        red = _primitive(red)
        self.pivots[min(red)] = red
        return True

    def nullspace(self) -> list:
        """Integer basis of the right kernel, one vector per free column.

        Back-substitution runs on a fraction-free reduced echelon form: every
        pivot row is cleared above by cross-multiplication.
        """
        order = sorted(self.pivots)
        rows = {c: dict(self.pivots[c]) for c in order}
        for c in reversed(order):
            pr = rows[c]
            for c2 in order:
                if c2 >= c:
                    break
                r2 = rows[c2]
                a = r2.get(c)
                if not a:
                    continue
                p = pr[c]
                g = gcd(a, p)
                a, p = a // g, p // g
                out = {k: v * p for k, v in r2.items()}
                for k, v in pr.items():
                    s = out.get(k, 0) - a * v
                    if s:
                        out[k] = s
                    else:
                        out.pop(k, None)
                rows[c2] = _primitive(out)
        free = [c for c in range(self.ncols) if c not in rows]
        basis = []
        for fc in free:
            vec = {fc: Fraction(1)}
            for c in order:
                r = rows[c]
                v = r.get(fc)
                if v:
                    vec[c] = Fraction(-v, r[c])
            den = 1
            for q in vec.values():
                den = lcm(den, q.denominator)
            ints = [0] * self.ncols
            for k, q in vec.items():
                ints[k] = int(q * den)
            basis.append(integer_row(ints))
        return basis
