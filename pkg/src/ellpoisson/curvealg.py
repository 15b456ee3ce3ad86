"""Normal-form arithmetic in the two curve algebras.

Even parity: generators f, g with g^2 = P(f) + Q(f) g, deg P <= 4.
Odd parity:  generators f, g with (f + c) g^2 = P(f) + Q(f) g, deg P <= 3.

Odd elements are kept in the shifted base u = f + c, where the relation
reads u g^2 = P(u - c) + Q(u - c) g.  A one-variable element is an
``FElem``: a map ``(base exponent, g exponent) -> parameter polynomial``.

Normal monomials:

* even: f^i, f^i g (i >= 0, or any i in Laurent mode);
* odd:  u^i, u^i g (i >= 0) and the pure powers g^b (b >= 2); in Laurent
  mode (inside the fraction field) every g^2 is rewritten through u^-1,
  leaving only u^i, u^i g with i in Z.
"""
from __future__ import annotations

import enum
from functools import lru_cache
from math import comb

from .exactpoly import ONE, ZERO, MPoly, VarId, _decode, param, rational, var


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


def parity_of(n: int) -> Parity:
    return Parity.EVEN if n % 2 == 0 else Parity.ODD


class AsymmetricInput(ValueError):
    pass


class IndexOutOfRange(ValueError):
    def __init__(self, index: int):
        super().__init__(f"x-index {index} outside the admissible range")
        self.index = index


# slot variables for tensor powers of the curve algebra
def F(i: int) -> VarId:
    return VarId("F", i)


def G(i: int) -> VarId:
    return VarId("G", i)


def U(i: int) -> VarId:
    return VarId("U", i)


def E(i: int) -> VarId:
    return VarId("E", i)


# --------------------------------------------------------------------------
# univariate polynomials with parameter coefficients: lists of MPoly


def upoly_eval(coeffs, x: MPoly) -> MPoly:
    acc = ZERO
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def upoly_deriv(coeffs) -> list:
    return [c.scale(k) for k, c in enumerate(coeffs)][1:] or [ZERO]


def upoly_shift(coeffs, s: MPoly) -> list:
    """Coefficients of H(t + s)."""
    out = [ZERO] * len(coeffs)
    for k, c in enumerate(coeffs):
        if not c:
            continue
        spow = ONE
        for t in range(k, -1, -1):
            out[t] = out[t] + c * spow.scale(comb(k, t))
            spow = spow * s
    return out


def diff_quotient(coeffs, z1: MPoly, z2: MPoly) -> MPoly:
    """(H(z1) - H(z2)) / (z1 - z2) via the closed form sum z1^a z2^b, a+b=m-1."""
    acc = ZERO
    for m, h in enumerate(coeffs):
        if m == 0 or not h:
            continue
        s = ZERO
        for a in range(m):
            s = s + z1 ** a * z2 ** (m - 1 - a)
        acc = acc + h * s
    return acc


class Curve:
    """Parameter data and reduction rules for one parity.

    With ``values=None`` the coefficients a_k, b_k, c are symbolic
    parameters; otherwise they are the given rationals (missing ones are 0).
    """

    def __init__(self, parity: Parity, values: dict | None = None):
        self.parity = parity
        names = ["a0", "a1", "a2", "a3", "a4"] if parity is Parity.EVEN else ["a0", "a1", "a2", "a3"]
        names += ["b0", "b1", "b2"]
        if parity is Parity.ODD:
            names.append("c")
        self.param_names = tuple(names)

        def p(name):
            if values is None:
                return var(param(name))
            return MPoly.constant(values.get(name, 0))

        na = 5 if parity is Parity.EVEN else 4
        self.P = [p(f"a{k}") for k in range(na)]
        self.Q = [p(f"b{k}") for k in range(3)]
        self.c = p("c") if parity is Parity.ODD else ZERO
        self.dP = upoly_deriv(self.P)
        self.dQ = upoly_deriv(self.Q)
        if parity is Parity.EVEN:
            # g^2 -> P(f) + Q(f) g
            self._rel = self._as_terms(self.P, self.Q)
        else:
            # u g^2 -> P(u-c) + Q(u-c) g
            self._Pu = upoly_shift(self.P, -self.c)
            self._Qu = upoly_shift(self.Q, -self.c)
            self._rel = self._as_terms(self._Pu, self._Qu)
        self._nf_cache: dict = {}

    @staticmethod
    def _as_terms(pc, qc) -> list:
        rel = [((k, 0), c) for k, c in enumerate(pc) if c]
        rel += [((k, 1), c) for k, c in enumerate(qc) if c]
        return rel

    @property
    def odd(self) -> bool:
        return self.parity is Parity.ODD

    def Q_at(self, x: MPoly) -> MPoly:
        return upoly_eval(self.Q, x)

    def P_at(self, x: MPoly) -> MPoly:
        return upoly_eval(self.P, x)

    def Q_minus_c(self) -> MPoly:
        """Q(-c) as a parameter polynomial."""
        return upoly_eval(self.Q, -self.c)

    def is_normal(self, i: int, b: int, laurent: bool) -> bool:
        if b <= 1:
            return True
        return self.odd and not laurent and i == 0

    def nf(self, i: int, b: int, laurent: bool = False) -> dict:
        """Normal form of base^i g^b as ``{(i, b): MPoly}``."""
        key = (i, b, laurent)
        hit = self._nf_cache.get(key)
        if hit is not None:
            return hit
        if i < 0 and not laurent:
            raise ValueError("negative base power outside Laurent mode")
        if self.is_normal(i, b, laurent):
            out = {(i, b): ONE}
        else:
            out = {}
            shift = 0 if not self.odd else -1
            for (k, bb), coef in self._rel:
                for mono, c2 in self.nf(i + shift + k, b - 2 + bb, laurent).items():
                    s = out.get(mono, ZERO) + coef * c2
                    if s:
                        out[mono] = s
                    else:
                        out.pop(mono, None)
        self._nf_cache[key] = out
        return out


class FElem:
    """Element of the curve algebra (or of its fraction field, ``laurent=True``)."""

    __slots__ = ("curve", "laurent", "terms")

    def __init__(self, curve: Curve, terms: dict | None = None, laurent: bool = False):
        self.curve = curve
        self.laurent = laurent
        self.terms = {}
        for (i, b), c in (terms or {}).items():
            if not isinstance(c, MPoly):
                c = MPoly.constant(c)
            if not c:
                continue
            for mono, c2 in curve.nf(i, b, laurent).items():
                s = self.terms.get(mono, ZERO) + c * c2
                if s:
                    self.terms[mono] = s
                else:
                    self.terms.pop(mono, None)

    @classmethod
    def _raw(cls, curve, terms, laurent):
        obj = cls.__new__(cls)
        obj.curve = curve
        obj.laurent = laurent
        obj.terms = terms
        return obj

    # generators ------------------------------------------------------------
    @classmethod
    def const(cls, curve, c, laurent=False) -> "FElem":
        return cls(curve, {(0, 0): c}, laurent)

    @classmethod
    def base(cls, curve, power: int = 1, laurent=False) -> "FElem":
        """f^power (even) or u^power (odd)."""
        return cls(curve, {(power, 0): ONE}, laurent)

    @classmethod
    def f(cls, curve, laurent=False) -> "FElem":
        if curve.odd:
            return cls(curve, {(1, 0): ONE, (0, 0): -curve.c}, laurent)
        return cls(curve, {(1, 0): ONE}, laurent)

    @classmethod
    def g(cls, curve, laurent=False) -> "FElem":
        return cls(curve, {(0, 1): ONE}, laurent)

    # arithmetic ------------------------------------------------------------
    def _check(self, other):
        if other.curve is not self.curve:
            raise ValueError("elements of different curve algebras")

    def __add__(self, other):
        if not isinstance(other, FElem):
            other = FElem.const(self.curve, other, self.laurent)
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, ZERO) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return FElem._raw(self.curve, out, self.laurent or other.laurent)

    __radd__ = __add__

    def __neg__(self):
        return FElem._raw(self.curve, {k: -c for k, c in self.terms.items()}, self.laurent)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "FElem":
        if not isinstance(c, MPoly):
            c = MPoly.constant(c)
        if not c:
            return FElem._raw(self.curve, {}, self.laurent)
        return FElem._raw(self.curve, {k: v * c for k, v in self.terms.items()}, self.laurent)

    def __mul__(self, other):
        if not isinstance(other, FElem):
            return self.scale(other)
        self._check(other)
        laurent = self.laurent or other.laurent
        acc: dict = {}
        for (i1, b1), c1 in self.terms.items():
            for (i2, b2), c2 in other.terms.items():
                c = c1 * c2
                for mono, c3 in self.curve.nf(i1 + i2, b1 + b2, laurent).items():
                    s = acc.get(mono, ZERO) + c * c3
                    if s:
                        acc[mono] = s
                    else:
                        acc.pop(mono, None)
        return FElem._raw(self.curve, acc, laurent)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = FElem.const(self.curve, 1, self.laurent)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, FElem):
            return NotImplemented
        return self.curve is other.curve and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        b = "u" if self.curve.odd else "f"
        parts = [f"({c})*{b}^{i}*g^{bb}" for (i, bb), c in sorted(self.terms.items())]
        return "FElem(" + (" + ".join(parts) or "0") + ")"

    def to_mpoly(self, base_var: VarId, g_var: VarId) -> MPoly:
        """Embed as a polynomial in the given slot variables (no negative powers)."""
        acc = ZERO
        bv, gv = var(base_var), var(g_var)
        for (i, b), c in self.terms.items():
            if i < 0:
                raise ValueError("negative base power has no polynomial embedding")
            acc = acc + c * bv ** i * gv ** b
        return acc


def felem_mul(a: FElem, b: FElem) -> FElem:
    return a * b


def _D_generators(curve: Curve, laurent: bool):
    key = ("D", laurent)
    hit = curve._nf_cache.get(key)
    if hit is not None:
        return hit
    g = FElem.g(curve, laurent)
    if curve.odd:
        u = FElem.base(curve, 1, laurent)
        Qu = FElem(curve, {(k, 0): c for k, c in enumerate(curve._Qu)}, laurent)
        Dbase = u * g * 2 - Qu
        dPu = upoly_shift(curve.dP, -curve.c)
        dQu = upoly_shift(curve.dQ, -curve.c)
        Dg = FElem(curve, {(k, 0): c for k, c in enumerate(dPu)}, laurent) + FElem(
            curve, {(k, 1): c for k, c in enumerate(dQu)}, laurent) - g * g
    else:
        Qf = FElem(curve, {(k, 0): c for k, c in enumerate(curve.Q)}, laurent)
        Dbase = g * 2 - Qf
        Dg = FElem(curve, {(k, 0): c for k, c in enumerate(curve.dP)}, laurent) + FElem(
            curve, {(k, 1): c for k, c in enumerate(curve.dQ)}, laurent)
    curve._nf_cache[key] = (Dbase, Dg)
    return Dbase, Dg


def derivation_D(a: FElem) -> FElem:
    """The derivation D, extended from the generators by the Leibniz rule."""
    curve, laurent = a.curve, a.laurent
    Dbase, Dg = _D_generators(curve, laurent)
    acc = FElem(curve, {}, laurent)
    for (i, b), c in a.terms.items():
        if i:
            acc = acc + FElem(curve, {(i - 1, b): c.scale(i)}, laurent) * Dbase
        if b:
            acc = acc + FElem(curve, {(i, b - 1): c.scale(b)}, laurent) * Dg
    return acc


# --------------------------------------------------------------------------
# several tensor slots inside one MPoly


def slot_vars(curve: Curve, s: int) -> tuple:
    return (U(s) if curve.odd else F(s)), G(s)


def reduce_slots(poly: MPoly, curve: Curve, slots) -> MPoly:
    """Reduce every slot ``s`` (base variable U_s/F_s, G_s) to normal form."""
    pairs = [slot_vars(curve, s) for s in slots]
    lookup = {}
    for k, (bv, gv) in enumerate(pairs):
        lookup[bv] = (k, 0)
        lookup[gv] = (k, 1)
    cache: dict = {}
    out = ZERO
    pending: dict = {}
    for m, c in poly.terms.items():
        dec = _decode(m)
        exps = [[0, 0] for _ in pairs]
        rest = {}
        for v, e in dec:
            pos = lookup.get(v)
            if pos is None:
                rest[v] = e
            else:
                exps[pos[0]][pos[1]] = e
        if all(curve.is_normal(i, b, False) for i, b in exps):
            pending[m] = pending.get(m, 0) + c
            continue
        factor = MPoly.monomial(rest, c)
        for k, (i, b) in enumerate(exps):
            key = (k, i, b)
            red = cache.get(key)
            if red is None:
                bv, gv = pairs[k]
                red = FElem._raw(curve, curve.nf(i, b), False).to_mpoly(bv, gv)
                cache[key] = red
            factor = factor * red
        out = out + factor
    return out + MPoly({m: c for m, c in pending.items() if c})


def f_in_slot(curve: Curve, s: int) -> MPoly:
    """The generator f of slot ``s`` expressed in that slot's base variable."""
    if curve.odd:
        return var(U(s)) - curve.c
    return var(F(s))


def u_to_f(poly: MPoly, curve: Curve, slots) -> MPoly:
    """Rewrite U_s -> F_s + c (odd parity only)."""
    if not curve.odd:
        return poly
    return poly.substitute({U(s): var(F(s)) + curve.c for s in slots})


def f_to_u(poly: MPoly, curve: Curve, slots) -> MPoly:
    if not curve.odd:
        return poly
    return poly.substitute({F(s): var(U(s)) - curve.c for s in slots})


# --------------------------------------------------------------------------
# symmetric elements of F (x) F and the identification with quadratic forms

def swap_slots(poly: MPoly) -> MPoly:
    return poly.substitute({
        F(1): var(F(2)), F(2): var(F(1)),
        G(1): var(G(2)), G(2): var(G(1)),
        U(1): var(U(2)), U(2): var(U(1)),
    })


class BiElem:
    """Symmetric element A + B g1 + C g2 + D g1 g2 of F (x) F.

    Stored as a polynomial in slot variables F1, F2 (or U1, U2 when
    ``basis == "u"``), G1, G2 with parameter coefficients.
    """

    __slots__ = ("poly", "curve", "basis")

    def __init__(self, poly: MPoly, curve: Curve, basis: str = "f", check: bool = True):
        if basis not in ("f", "u"):
            raise ValueError("basis must be 'f' or 'u'")
        if basis == "u" and not curve.odd:
            raise ValueError("the u basis only exists for odd parity")
        if check and swap_slots(poly) != poly:
            raise AsymmetricInput("element is not symmetric under slot exchange")
        self.poly = poly
        self.curve = curve
        self.basis = basis

    def in_f_basis(self) -> MPoly:
        if self.basis == "u":
            return u_to_f(self.poly, self.curve, (1, 2))
        return self.poly

    def __add__(self, other: "BiElem") -> "BiElem":
        return BiElem(self.in_f_basis() + other.in_f_basis(), self.curve, "f", check=False)

    def scale(self, c) -> "BiElem":
        return BiElem(self.poly * c, self.curve, self.basis, check=False)


def x_index(i: int, b: int) -> int:
    """Index k with x_k = f^i g^b (b in {0, 1})."""
    return 2 * i if b == 0 else 2 * i + 3


def x_realization(k: int) -> tuple:
    """Inverse of :func:`x_index`: (f-power, g-power) of x_k, k in Z."""
    if k % 2 == 0:
        return k // 2, 0
    return (k - 3) // 2, 1


def admissible(k: int, n: int) -> bool:
    return k == 0 or 2 <= k <= n


def identify(b: BiElem, n: int | None, cls: str = "X") -> MPoly:
    """Map a symmetric bilinear element to a quadratic form in x-variables.

    Each monomial f1^i1 g1^b1 f2^i2 g2^b2 contributes half its coefficient to
    x_{k(i1,b1)} x_{k(i2,b2)}; symmetric partners supply the other half.
    ``n=None`` skips the range check.
    """
    poly = b.in_f_basis()
    slots = {F(1): (0, 0), G(1): (0, 1), F(2): (1, 0), G(2): (1, 1)}
    half = rational("1/2")
    out: dict = {}
    for m, c in poly.terms.items():
        e = [[0, 0], [0, 0]]
        rest = {}
        for v, k in _decode(m):
            pos = slots.get(v)
            if pos is None:
                if v.cls != "PARAM":
                    raise ValueError(f"unexpected variable {v} in bilinear element")
                rest[v] = k
            else:
                e[pos[0]][pos[1]] = k
        if e[0][1] > 1 or e[1][1] > 1:
            raise ValueError("bilinear element is not linear in g1, g2")
        ka = x_index(*e[0])
        kb = x_index(*e[1])
        for k in (ka, kb):
            if n is not None and not admissible(k, n):
                raise IndexOutOfRange(k)
        xa, xb = VarId(cls, ka), VarId(cls, kb)
        exps = dict(rest)
        exps[xa] = exps.get(xa, 0) + 1
        exps[xb] = exps.get(xb, 0) + 1
        out.setdefault(_key(exps), [exps, 0])[1] += c * half
    return MPoly.from_terms((exps, c) for exps, c in out.values())


def _key(exps: dict):
    return tuple(sorted(exps.items()))


def unidentify(q: MPoly, curve: Curve) -> BiElem:
    """Formal inverse of :func:`identify` on quadratic forms in x-variables."""
    acc = ZERO
    f1, f2, g1, g2 = var(F(1)), var(F(2)), var(G(1)), var(G(2))
    for dec, c in q.items():
        xs = []
        rest = {}
        for v, e in dec:
            if v.cls == "X":
                xs.extend([v.index] * e)
            else:
                rest[v] = e
        if len(xs) != 2:
            raise ValueError("not a quadratic form in x-variables")
        (ia, ba), (ib, bb) = x_realization(xs[0]), x_realization(xs[1])
        t1 = f1 ** ia * g1 ** ba * f2 ** ib * g2 ** bb
        t2 = f1 ** ib * g1 ** bb * f2 ** ia * g2 ** ba
        acc = acc + MPoly.monomial(rest, c) * (t1 + t2)
    return BiElem(acc, curve, "f")
