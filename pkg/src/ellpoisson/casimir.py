"""Casimir elements, centrality, and the symplectic-leaf maps phi_p.

Casimirs are built from determinants of matrices ``v^t w`` whose entries are
products of Laurent generators computed in the fraction field of the curve
algebra, then expanded as polynomials in commuting abstract generators.
"""
from __future__ import annotations

import itertools
from math import comb, factorial

from .brackets import BracketTable, build_table, table_indices
from .curvealg import (E, FElem, G, Parity, U, F, Curve, derivation_D, parity_of,
                       reduce_slots, slot_vars, x_index, x_realization, admissible)
from .exactpoly import ONE, ZERO, MPoly, VarId, _decode, param, rational, var


class CancellationFailure(ValueError):
    def __init__(self, index: int):
        super().__init__(f"out-of-range generator survived: index {index}")
        self.index = index


class NotLinearInYm2(ValueError):
    pass


class DenominatorResidue(ValueError):
    def __init__(self, r: int, s: int, residue: MPoly):
        super().__init__(f"cleared numerator does not vanish for pair ({r}, {s})")
        self.pair = (r, s)
        self.residue = residue


# ---------------------------------------------------------------------------
# Laurent generators and determinants


class LaurentX:
    """Generator x_k (even) or y_k (odd), k in Z, with its realization in Frac(F)."""

    def __init__(self, curve: Curve, index: int):
        self.curve = curve
        self.index = index
        i, b = x_realization(index)
        # base is f for even and u = f + c for odd, so both read x_{2i} = base^i
        self.realization = FElem(curve, {(i, b): ONE}, laurent=True)

    @property
    def symbol(self) -> VarId:
        return VarId("Y" if self.curve.odd else "X", self.index)


def _readback(elem: FElem) -> MPoly:
    """Write a Laurent element as a linear form in the abstract generators."""
    cls = "Y" if elem.curve.odd else "X"
    acc = ZERO
    for (i, b), c in elem.terms.items():
        if b > 1:
            raise AssertionError("Laurent normal form has g-degree at most 1")
        acc = acc + c * var(VarId(cls, x_index(i, b)))
    return acc


def _component(curve: Curve, entry) -> FElem:
    """A vector component: an index k, or a list of (coefficient, index) pairs."""
    if isinstance(entry, int):
        entry = [(ONE, entry)]
    acc = FElem(curve, {}, laurent=True)
    for coef, k in entry:
        acc = acc + LaurentX(curve, k).realization.scale(coef)
    return acc


def product_matrix(curve: Curve, v: list, w: list) -> list:
    """Matrix of Frac-products v_i * w_j read back as linear forms."""
    vs = [_component(curve, s) for s in v]
    ws = [_component(curve, s) for s in w]
    return [[_readback(a * b) for b in ws] for a in vs]


def symdet(matrix: list) -> MPoly:
    """Determinant over commuting polynomial entries by memoized cofactor expansion."""
    size = len(matrix)
    if any(len(r) != size for r in matrix):
        raise ValueError("matrix is not square")
    memo: dict = {}

    def minor(row: int, cols: tuple) -> MPoly:
        if row == size:
            return ONE
        hit = memo.get(cols)
        if hit is not None:
            return hit
        acc = ZERO
        for pos, col in enumerate(cols):
            a = matrix[row][col]
            if not a:
                continue
            rest = minor(row + 1, cols[:pos] + cols[pos + 1:])
            term = a * rest
            acc = acc - term if pos % 2 else acc + term
        memo[cols] = acc
        return acc

    return minor(0, tuple(range(size)))


def seq(explicit: list, end: int) -> list:
    """Expand the ellipsis in a list such as x_0, x_2, x_4, .., x_end."""
    head = [k for k in explicit if k <= end]
    return head + list(range(explicit[-1] + 1, end + 1))


def _det_sum(curve: Curve, terms) -> MPoly:
    acc = ZERO
    for sign, v, w in terms:
        if len(v) != len(w):
            raise AssertionError("vector lengths differ")
        d = symdet(product_matrix(curve, v, w))
        acc = acc + d if sign > 0 else acc - d
    return acc


def _check_range(poly: MPoly, n: int, extra=()) -> None:
    for v in poly.variables():
        if v.cls in ("X", "Y") and not (admissible(v.index, n) or v.index in extra):
            raise CancellationFailure(v.index)


def _p(curve: Curve, name: str) -> MPoly:
    if name == "c":
        return curve.c
    k = int(name[1:])
    return (curve.P if name[0] == "a" else curve.Q)[k]


# ---------------------------------------------------------------------------
# even n


def even_terms(n: int, curve: Curve):
    """The signed determinant lists defining the two even-n Casimirs."""
    m = n // 2
    a0, a4, b0, b2 = (_p(curve, s) for s in ("a0", "a4", "b0", "b2"))
    L_low = [(a0, -2), (b0, 1)]
    if n == 4:
        C0 = [(1, [0, 2], [0, 2])]
        C1 = [
            (1, [0, 1], [2, 3]),
            (-1, [0, 2], [2, [(a4, 4), (b2, 3)]]),
            (-1, [L_low, 0], [0, 2]),
        ]
        return C0, C1
    L_high = [(a4, m + 2), (b2, m + 1)]
    if m % 2 == 0:
        C0 = [(1, seq([0, 2], m), seq([0, 2], m))]
        C1 = [
            (1, seq([0, 1, 2], m - 1), seq([2], m + 1)),
            (-1, seq([0, 1, 2], m - 2) + [m], seq([2], m) + [L_high]),
            (-1, [L_low] + seq([0, 2], m - 1), seq([0, 2, 4], m + 1)),
            (1, [L_low] + seq([0, 2], m - 2) + [m], seq([0, 2, 4], m) + [L_high]),
        ]
    else:
        C0 = [
            (1, seq([0, 2], m), seq([0, 2], m)),
            (-1, seq([0, 2], m - 1) + [m + 1], seq([0, 2], m - 1) + [[(b2, m), (a4, m + 1)]]),
        ]
        C1 = [
            (1, seq([2], m + 1), seq([0, 1, 2], m - 1)),
            (-1, [-2] + seq([0, 2], m - 1), [[(a0, 0), (b0, 3)]] + seq([2, 4], m + 1)),
        ]
    return C0, C1


def casimir_even(n: int, curve: Curve | None = None) -> tuple:
    """The two Casimirs of degree n/2 for even n >= 4."""
    if n < 4 or n % 2:
        raise ValueError("casimir_even needs even n >= 4")
    curve = curve or Curve(Parity.EVEN)
    out = []
    for terms in even_terms(n, curve):
        C = _det_sum(curve, terms)
        _check_range(C, n)
        if not C.is_homogeneous(n // 2, lambda v: v.cls == "X"):
            raise AssertionError("Casimir is not homogeneous")
        out.append(C)
    return tuple(out)


# ---------------------------------------------------------------------------
# odd n


def odd_terms(n: int, curve: Curve):
    """The signed determinant lists defining the two auxiliary odd-n polynomials."""
    a3, b2 = _p(curve, "a3"), _p(curve, "b2")
    Qc = curve.Q_minus_c()
    Qy0 = [(Qc, 0)]
    if n == 3:
        C0 = [(1, [0, 2], [-2, 0])]
        C1 = [
            (1, [0, 3], [0, 3]),
            (-1, [0, 2], [0, [(a3, 2), (b2, 3)]]),
            (1, [Qy0, 3], [-2, 0]),
        ]
        return C0, C1
    mp = (n + 1) // 2
    h = (n - 1) // 2
    k = (n + 3) // 2
    if mp % 2 == 0:
        Ly = [(a3, mp), (b2, k)]
        C0 = [(1, seq([0, 2, 4], k), [-2] + seq([0, 2], h))]
        C1 = [
            (1, seq([0, 2], h) + [k], seq([0, 2], h) + [k]),
            (-1, seq([0, 2], mp), seq([0, 2], h) + [Ly]),
            (-1, [Qy0] + seq([2], h) + [k], [-2] + seq([0, 2, 4], h) + [k]),
            (1, [Qy0] + seq([2], mp), [-2] + seq([0, 2, 4], h) + [Ly]),
        ]
    else:
        C0 = [
            (1, seq([0, 2, 4], mp) + [(n + 5) // 2], [-2] + seq([0, 2], (n - 3) // 2) + [mp]),
            (-1, seq([0, 2, 4], k), [-2] + seq([0, 2], (n - 3) // 2) + [[(b2, mp), (a3, h)]]),
        ]
        C1 = [
            (1, seq([0, 2], mp), seq([0, 2], mp)),
            (-1, [-2] + seq([0, 2, 4], mp), [Qy0] + seq([2], mp)),
        ]
    return C0, C1


def split_ym2(C: MPoly) -> tuple:
    """Write C = A + B*y_{-2}; raise NotLinearInYm2 otherwise."""
    ym2 = VarId("Y", -2)
    if C.degree_in(ym2) > 1:
        raise NotLinearInYm2("auxiliary Casimir has y_-2 degree above 1")
    B = C.partial(ym2)
    A = C.substitute({ym2: ZERO})
    return A, B


def y_to_x(poly: MPoly, curve: Curve) -> MPoly:
    """Rewrite y_{2i} = (f+c)^i and y_{2i+3} = (f+c)^i g in terms of x-generators."""
    bindings = {}
    for v in poly.variables():
        if v.cls != "Y":
            continue
        i, b = x_realization(v.index)
        if i < 0:
            raise CancellationFailure(v.index)
        acc = ZERO
        for t in range(i + 1):
            acc = acc + curve.c ** (i - t) * comb(i, t) * var(VarId("X", x_index(t, b)))
        bindings[v] = acc
    return poly.substitute(bindings)


def casimir_odd_parts(n: int, curve: Curve | None = None) -> tuple:
    """The two auxiliary polynomials in y-generators, with range checks."""
    if n < 3 or n % 2 == 0:
        raise ValueError("casimir_odd needs odd n >= 3")
    curve = curve or Curve(Parity.ODD)
    out = []
    for terms in odd_terms(n, curve):
        C = _det_sum(curve, terms)
        _check_range(C, n, extra=(-2,))
        if not C.is_homogeneous((n + 1) // 2, lambda v: v.cls == "Y"):
            raise AssertionError("auxiliary Casimir is not homogeneous")
        out.append(C)
    return tuple(out)


def casimir_odd(n: int, curve: Curve | None = None) -> MPoly:
    """The Casimir of degree n for odd n >= 3, in x-generators."""
    curve = curve or Curve(Parity.ODD)
    C0, C1 = casimir_odd_parts(n, curve)
    A0, B0 = split_ym2(C0)
    A1, B1 = split_ym2(C1)
    C = y_to_x(A0 * B1 - A1 * B0, curve)
    _check_range(C, n)
    return C


def casimirs(n: int) -> list:
    if n % 2 == 0:
        return list(casimir_even(n))
    return [casimir_odd(n)]


# ---------------------------------------------------------------------------
# centrality


def poisson_extend(table: BracketTable, Fp: MPoly, Gp: MPoly) -> MPoly:
    """{F, G} = sum over i, j of dF/dx_i dG/dx_j {x_i, x_j}."""
    dF = {i: Fp.partial(VarId(table.cls, i)) for i in table.indices}
    dG = {j: Gp.partial(VarId(table.cls, j)) for j in table.indices}
    acc = ZERO
    for i, j in table.pairs():
        e = table.get(i, j)
        if not e:
            continue
        s = dF[i] * dG[j] - dF[j] * dG[i]
        if s:
            acc = acc + s * e
    return acc


def central_witness(table: BracketTable, C: MPoly):
    """First generator x_i with {C, x_i} != 0, as (i, value), or None."""
    for i in table.indices:
        v = poisson_extend(table, C, var(VarId(table.cls, i)))
        if v:
            return i, v
    return None


def verify_central(table: BracketTable, C: MPoly) -> bool:
    return central_witness(table, C) is None


# ---------------------------------------------------------------------------
# symplectic-leaf maps


def leaf_size(n: int) -> int:
    """The leaf parameter p whose kernel holds the Casimirs."""
    return n // 2 - 1 if n % 2 == 0 else (n - 1) // 2


class LeafMap:
    """phi_p : polynomials in x-generators -> functions of (f_i, g_i, e_i)."""

    def __init__(self, p: int, n: int, curve: Curve | None = None):
        if p < 1:
            raise ValueError("leaf parameter must be positive")
        self.p, self.n = p, n
        self.curve = curve or Curve(parity_of(n))
        self.slots = tuple(range(1, p + 1))
        self._gen: dict = {}
        self._pow: dict = {}

    def f(self, i: int) -> MPoly:
        if self.curve.odd:
            return var(U(i)) - self.curve.c
        return var(F(i))

    def slot_elem(self, elem: FElem, i: int) -> MPoly:
        bv, gv = slot_vars(self.curve, i)
        return elem.to_mpoly(bv, gv)

    def realization(self, k: int) -> FElem:
        """x_k as an element of the curve algebra (f^a g^b, no Laurent powers)."""
        a, b = x_realization(k)
        return FElem.f(self.curve) ** a * FElem.g(self.curve) ** b

    def generator(self, k: int) -> MPoly:
        hit = self._gen.get(k)
        if hit is None:
            r = self.realization(k)
            hit = ZERO
            for i in self.slots:
                hit = hit + self.slot_elem(r, i) * var(E(i))
            self._gen[k] = hit
        return hit

    def reduce(self, poly: MPoly) -> MPoly:
        return reduce_slots(poly, self.curve, self.slots)

    def slot_power(self, A: int, B: int, i: int) -> MPoly:
        """Normal form of f_i^A g_i^B."""
        key = (A, B, i)
        hit = self._pow.get(key)
        if hit is None:
            hit = self.slot_elem(FElem.f(self.curve) ** A * FElem.g(self.curve) ** B, i)
            self._pow[key] = hit
        return hit

    def _spread(self, a: int, b: int, m: int) -> dict:
        """(f^a g^b e)^m summed over slots: {per-slot (A, B, count): multiplicity}."""
        out = {}
        for parts in itertools.product(range(m + 1), repeat=self.p):
            if sum(parts) != m:
                continue
            mult = factorial(m)
            for c in parts:
                mult //= factorial(c)
            out[tuple((c * a, c * b, c) for c in parts)] = mult
        return out

    def _monomial_keys(self, factors: tuple) -> dict:
        """Unreduced image of a generator product as {slot keys: integer multiplicity}."""
        acc = {tuple((0, 0, 0) for _ in self.slots): 1}
        for k, m in factors:
            a, b = x_realization(k)
            nxt: dict = {}
            for key, c in acc.items():
                for add, d in self._spread(a, b, m).items():
                    new = tuple((A + A2, B + B2, e + e2) for (A, B, e), (A2, B2, e2) in zip(key, add))
                    nxt[new] = nxt.get(new, 0) + c * d
            acc = nxt
        return acc

    def image(self, Fp: MPoly) -> MPoly:
        """phi_p(Fp) in normal form.

        Every generator goes to a monomial f_i^a g_i^b e_i in each slot, so the
        unreduced image is tracked with integer slot keys and each slot is
        reduced once, innermost slot first.
        """
        groups: dict = {}
        for xm, coef in Fp.split(lambda v: v.cls == "X").items():
            factors = tuple(sorted((v.index, e) for v, e in _decode(xm)))
            for key, mult in self._monomial_keys(factors).items():
                groups[key] = groups.get(key, ZERO) + coef * mult
        for pos, i in enumerate(self.slots):
            folded: dict = {}
            for key, coef in groups.items():
                if not coef:
                    continue
                A, B, cnt = key[0]
                term = coef * self.slot_power(A, B, i) * var(E(i)) ** cnt
                rest = key[1:]
                folded[rest] = folded.get(rest, ZERO) + term
            groups = folded
        return groups.get((), ZERO)

    # bracket on the leaf algebra, with denominators cleared ---------------
    def delta(self) -> MPoly:
        acc = ONE
        for i, j in itertools.combinations(self.slots, 2):
            acc = acc * (self.f(i) - self.f(j))
        return acc

    def _lambda_numerator(self, i: int, j: int) -> MPoly:
        """(f_i - f_j) * lambda_ij from its first defining formula."""
        cv = self.curve
        fi, fj = self.f(i), self.f(j)
        gi, gj = var(G(i)), var(G(j))
        half = rational("1/2")
        if cv.odd:
            lin = var(U(i)) * gi + var(U(j)) * gj
        else:
            lin = gi + gj
        return lin - (cv.Q_at(fi) + cv.Q_at(fj)) * half

    def e_bracket_cleared(self, i: int, j: int) -> MPoly:
        """Delta * {e_i, e_j} / (e_i e_j) for i != j."""
        cv = self.curve
        rest = self.delta().exact_div(self.f(i) - self.f(j)) if self.p > 1 else ONE
        out = self._lambda_numerator(i, j) * rest * self.n
        if cv.odd:
            extra = (self.f(i) - self.f(j)) * (cv.Q[2] * rational("1/2")) + var(G(j)) - var(G(i))
            out = out + extra * self.delta()
        return out

    def D(self, elem: FElem, i: int) -> MPoly:
        return self.slot_elem(derivation_D(elem), i)

    def bracket_cleared(self, r: int, s: int) -> MPoly:
        """Delta * {phi(x_r), phi(x_s)} computed with the leaf bracket rules."""
        R, S = self.realization(r), self.realization(s)
        delta = self.delta()
        half_n = rational(self.n - 2) * rational("1/2")
        acc = ZERO
        for i in self.slots:
            Ri, DRi = self.slot_elem(R, i), self.D(R, i)
            for j in self.slots:
                Sj, DSj = self.slot_elem(S, j), self.D(S, j)
                ee = var(E(i)) * var(E(j))
                if i == j:
                    term = (Sj * DRi - Ri * DSj) * half_n * delta
                else:
                    term = Ri * Sj * self.e_bracket_cleared(i, j) + (Ri * DSj - Sj * DRi) * delta
                acc = acc + term * ee
        return self.reduce(acc)

    def homomorphism_residue(self, table: BracketTable, r: int, s: int) -> MPoly:
        lhs = self.reduce(self.image(table.get(r, s)) * self.delta())
        return lhs - self.bracket_cleared(r, s)


def phi_image(p: int, Fp: MPoly, n: int) -> MPoly:
    return LeafMap(p, n).image(Fp)


def verify_kernel(n: int, p: int | None = None, cas: list | None = None) -> bool:
    """Every Casimir maps to zero under phi_p."""
    p = leaf_size(n) if p is None else p
    leaf = LeafMap(p, n)
    cas = casimirs(n) if cas is None else cas
    return all(not leaf.image(C) for C in cas)


def verify_leaf_homomorphism(n: int, p: int, table: BracketTable | None = None) -> bool:
    """phi_p({x_r, x_s}) equals the leaf bracket of the images, for all pairs.

    Raises DenominatorResidue with the first failing pair.
    """
    table = table or build_table(n)
    leaf = LeafMap(p, n)
    for r, s in table.pairs():
        res = leaf.homomorphism_residue(table, r, s)
        if res:
            raise DenominatorResidue(r, s, res)
    return True
