"""Bracket tables {x_i, x_j} on C[x_0, x_2, ..., x_n] and the nine-way split.

Each pair is evaluated with the closed-form expressions for the three index
classes (both indices even-type x_{2i} = f^i, mixed, both g-type
x_{2i+3} = f^i g), written over F (x) F as polynomials in f1, f2, g1, g2 that
are linear in g1 and g2, and then pushed through :func:`identify`.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .curvealg import (
    BiElem,
    Curve,
    F,
    G,
    IndexOutOfRange,
    Parity,
    diff_quotient,
    identify,
    parity_of,
    upoly_eval,
    x_realization,
)
from .exactpoly import (
    ONE,
    ZERO,
    MPoly,
    Rational,
    VarId,
    param,
    rational,
    rational_to_json,
    var,
)

SCHEMA_VERSION = 1


class ClosureViolation(ValueError):
    def __init__(self, i: int, j: int, index: int):
        super().__init__(f"{{x{i}, x{j}}} produces x{index}, outside x0, x2..xn")
        self.i, self.j, self.index = i, j, index


def table_indices(n: int) -> tuple:
    return (0,) + tuple(range(2, n + 1))


def param_names(parity: Parity) -> tuple:
    return Curve(parity).param_names


class BracketTable:
    """Antisymmetric table of generator brackets; only i < j is stored."""

    def __init__(self, indices, entries: dict, n=None, parity: Parity | None = None,
                 alpha=None, params: dict | None = None, cls: str = "X"):
        self.indices = tuple(indices)
        self.cls = cls
        self.entries = {}
        for (i, j), p in entries.items():
            if i == j:
                continue
            if i > j:
                i, j, p = j, i, -p
            if p:
                self.entries[(i, j)] = p
        self.n = n if n is not None else len(self.indices)
        self.parity = parity
        self.alpha = rational(alpha) if alpha is not None else None
        self.params = params

    @property
    def variables(self) -> list:
        return [VarId(self.cls, i) for i in self.indices]

    @property
    def symbolic(self) -> bool:
        return self.params is None

    def get(self, i: int, j: int) -> MPoly:
        if i == j:
            return ZERO
        if i < j:
            return self.entries.get((i, j), ZERO)
        return -self.entries.get((j, i), ZERO)

    def pairs(self):
        return itertools.combinations(self.indices, 2)

    def is_zero(self) -> bool:
        return not self.entries

    def _like(self, entries, **kw) -> "BracketTable":
        meta = dict(n=self.n, parity=self.parity, alpha=self.alpha, params=self.params, cls=self.cls)
        meta.update(kw)
        return BracketTable(self.indices, entries, **meta)

    def map(self, fn, **kw) -> "BracketTable":
        return self._like({k: fn(p) for k, p in self.entries.items()}, **kw)

    def __add__(self, other: "BracketTable") -> "BracketTable":
        if self.indices != other.indices:
            raise ValueError("tables over different variables")
        out = dict(self.entries)
        for k, p in other.entries.items():
            out[k] = out.get(k, ZERO) + p
        return self._like(out)

    def __sub__(self, other: "BracketTable") -> "BracketTable":
        return self + other.scale(-1)

    def scale(self, c) -> "BracketTable":
        return self.map(lambda p: p * c)

    def substitute(self, bindings: dict, **kw) -> "BracketTable":
        return self.map(lambda p: p.substitute(bindings), **kw)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BracketTable):
            return NotImplemented
        return self.indices == other.indices and self.entries == other.entries

    def __repr__(self) -> str:
        return f"BracketTable(n={self.n}, parity={self.parity}, {len(self.entries)} nonzero entries)"

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "parity": self.parity.value if self.parity else None,
            "alpha": rational_to_json(self.alpha) if self.alpha is not None else None,
            "variables": [v.name for v in self.variables],
            "entries": [
                {"i": i, "j": j, "poly": self.get(i, j).to_json()}
                for i, j in self.pairs()
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "BracketTable":
        from .exactpoly import var_from_name

        vs = [var_from_name(v) for v in data["variables"]]
        entries = {(e["i"], e["j"]): MPoly.from_json(e["poly"]) for e in data["entries"]}
        return BracketTable(
            [v.index for v in vs],
            entries,
            n=data["n"],
            parity=Parity(data["parity"]) if data.get("parity") else None,
            alpha=rational(data["alpha"]) if data.get("alpha") else None,
            cls=vs[0].cls if vs else "X",
        )

    def to_text(self) -> str:
        lines = []
        for i, j in self.pairs():
            lines.append(f"{{x{i}, x{j}}} = {self.get(i, j).to_text()}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# the three case formulas


class _Ctx:
    """Common pieces of the case formulas for R = f^i, T = f^j."""

    def __init__(self, curve: Curve, i: int, j: int):
        self.curve = curve
        f1, f2 = var(F(1)), var(F(2))
        self.f1, self.f2 = f1, f2
        self.g1, self.g2 = var(G(1)), var(G(2))
        self.R1, self.R2 = f1 ** i, f2 ** i
        self.T1, self.T2 = f1 ** j, f2 ** j
        self.dR1 = f1 ** (i - 1) * i if i else ZERO
        self.dR2 = f2 ** (i - 1) * i if i else ZERO
        self.dT1 = f1 ** (j - 1) * j if j else ZERO
        self.dT2 = f2 ** (j - 1) * j if j else ZERO
        self.P1, self.P2 = curve.P_at(f1), curve.P_at(f2)
        self.Q1, self.Q2 = curve.Q_at(f1), curve.Q_at(f2)
        self.dP1, self.dP2 = upoly_eval(curve.dP, f1), upoly_eval(curve.dP, f2)
        self.dQ1, self.dQ2 = upoly_eval(curve.dQ, f1), upoly_eval(curve.dQ, f2)
        delta = f1 - f2
        self.delta = delta
        self.anti = self.R1 * self.T2 - self.R2 * self.T1
        self.W = self.anti.exact_div(delta) if self.anti else ZERO
        self.DQ = diff_quotient(curve.Q, f1, f2)
        # D(f) = 2 k g - Q(f) with k = 1 (even) or f + c (odd)
        if curve.odd:
            self.k1, self.k2 = f1 + curve.c, f2 + curve.c
        else:
            self.k1, self.k2 = ONE, ONE


HALF = rational("1/2")


def _case1(x: _Ctx, alpha: Rational) -> MPoly:
    cu = x.curve
    cross1 = x.R2 * x.dT1 - x.T2 * x.dR1
    cross2 = x.R1 * x.dT2 - x.T1 * x.dR2
    halfQ = (x.Q1 + x.Q2) * HALF
    if not cu.odd:
        return (x.W * (x.g1 + x.g2 - halfQ) * alpha
                + cross1 * (x.g1 * 2 - x.Q1)
                + cross2 * (x.g2 * 2 - x.Q2))
    b2 = cu.Q[2]
    return (x.W * (x.k1 * x.g1 + x.k2 * x.g2 - halfQ) * alpha
            + (x.g2 - x.g1 + b2 * x.delta * HALF) * x.anti
            + cross1 * (x.k1 * x.g1 * 2 - x.Q1)
            + cross2 * (x.k2 * x.g2 * 2 - x.Q2))


def _case2(x: _Ctx, alpha: Rational) -> MPoly:
    """phi = f^i, psi = f^j g."""
    cu = x.curve
    sym_g = x.R1 * x.T2 * x.g2 + x.R2 * x.T1 * x.g1
    rtp = (x.R1 * x.T2 * x.P2 - x.R2 * x.T1 * x.P1).exact_div(x.delta)
    common = (x.R1 * x.T2 * (x.dP2 + x.dQ2 * x.g2)
              + x.R2 * x.T1 * (x.dP1 + x.dQ1 * x.g1)
              + x.dR1 * x.T2 * (x.Q1 - x.k1 * x.g1 * 2) * x.g2
              + x.dR2 * x.T1 * (x.Q2 - x.k2 * x.g2 * 2) * x.g1
              + x.R1 * x.dT2 * (x.P2 * 2 + x.Q2 * x.g2)
              + x.R2 * x.dT1 * (x.P1 * 2 + x.Q1 * x.g1)
              - x.DQ * sym_g * (alpha * HALF)
              + rtp * alpha)
    if not cu.odd:
        return common + x.W * x.g1 * x.g2 * alpha
    b2 = cu.Q[2]
    return (common
            + x.W * (x.f1 + x.f2 + cu.c * 2) * x.g1 * x.g2 * (alpha * HALF)
            + (x.R1 * x.T2 + x.R2 * x.T1) * x.g1 * x.g2 * ((alpha - 2) * HALF)
            + b2 * x.delta * (x.R1 * x.T2 * x.g2 - x.R2 * x.T1 * x.g1) * HALF)


def _case3(x: _Ctx, alpha: Rational) -> MPoly:
    """phi = f^i g, psi = f^j g."""
    cu = x.curve
    g12 = x.g1 * x.g2
    cross1 = x.R2 * x.dT1 - x.T2 * x.dR1
    cross2 = x.R1 * x.dT2 - x.T1 * x.dR2
    out = (x.W * (x.P1 * x.g2 + x.g1 * x.P2 + (x.Q1 + x.Q2) * g12 * HALF) * alpha
           + cross1 * (x.P1 * 2 + x.Q1 * x.g1) * x.g2
           + cross2 * (x.P2 * 2 + x.Q2 * x.g2) * x.g1
           + x.anti * (x.dP2 * x.g1 + x.dQ2 * g12 - x.dP1 * x.g2 - x.dQ1 * g12))
    if cu.odd:
        out = out + cu.Q[2] * x.anti * x.delta * g12 * HALF
    return out


def case_element(curve: Curve, a: int, b: int, alpha) -> BiElem:
    """The symmetric element of F (x) F representing {x_a, x_b}."""
    alpha = rational(alpha)
    (i, ta), (j, tb) = x_realization(a), x_realization(b)
    if (ta, tb) == (1, 0):
        el = case_element(curve, b, a, alpha)
        return BiElem(-el.poly, curve, "f", check=False)
    x = _Ctx(curve, i, j)
    if (ta, tb) == (0, 0):
        poly = _case1(x, alpha)
    elif (ta, tb) == (0, 1):
        poly = _case2(x, alpha)
    else:
        poly = _case3(x, alpha)
    return BiElem(poly, curve, "f")


_CURVES: dict = {}


def _curve(parity: Parity) -> Curve:
    cu = _CURVES.get(parity)
    if cu is None:
        cu = _CURVES[parity] = Curve(parity)
    return cu


def pair_bracket(n: int, i: int, j: int, alpha=None, curve: Curve | None = None) -> MPoly:
    """{x_i, x_j} as a quadratic form in x_0, x_2, ..., x_n (symbolic parameters)."""
    for k in (i, j):
        if not (k == 0 or 2 <= k <= n):
            raise ValueError(f"x{k} is not a generator for n={n}")
    if i == j:
        return ZERO
    curve = curve or _curve(parity_of(n))
    alpha = n if alpha is None else alpha
    return identify(case_element(curve, i, j, alpha), n)


def _pair_job(args):
    n, i, j, alpha = args
    try:
        return pair_bracket(n, i, j, alpha), None
    except IndexOutOfRange as exc:
        return None, exc.index


def param_degree(p: MPoly) -> int:
    return p.total_degree(lambda v: v.cls == "PARAM")


def build_table(n: int, alpha=None, params: dict | None = None, jobs: int = 1) -> BracketTable:
    """Full symbolic table for dimension n (optionally instantiated).

    With ``alpha != n`` the brackets leave the span of x_0, x_2..x_n and
    :class:`ClosureViolation` is raised for the first offending pair.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    alpha = rational(n if alpha is None else alpha)
    parity = parity_of(n)
    idx = table_indices(n)
    pairs = list(itertools.combinations(idx, 2))
    jobs_args = [(n, i, j, alpha) for i, j in pairs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_pair_job, jobs_args, chunksize=4))
    else:
        results = [_pair_job(a) for a in jobs_args]
    entries = {}
    for (i, j), (poly, bad) in zip(pairs, results):
        if bad is not None:
            raise ClosureViolation(i, j, bad)
        if param_degree(poly) > 1:
            raise AssertionError(f"{{x{i}, x{j}}} is not linear in the parameters")
        entries[(i, j)] = poly
    table = BracketTable(idx, entries, n=n, parity=parity, alpha=alpha)
    if params:
        table = instantiate(table, params)
    return table


def instantiate(table: BracketTable, params: dict) -> BracketTable:
    legal = set(param_names(table.parity))
    unknown = set(params) - legal
    if unknown:
        raise ValueError(f"parameters {sorted(unknown)} do not exist for {table.parity.value} n")
    values = {name: rational(params.get(name, 0)) for name in legal}
    return table.substitute({param(k): v for k, v in values.items()}, params=values)


# ---------------------------------------------------------------------------
# the nine compatible brackets


@dataclass
class NineSplit:
    base: BracketTable
    directions: dict = field(default_factory=dict)

    def tables(self) -> list:
        return [self.base] + list(self.directions.values())

    def labels(self) -> list:
        return ["base"] + list(self.directions)

    def reconstruct(self) -> BracketTable:
        out = self.base
        for name, t in self.directions.items():
            out = out + t.map(lambda p, v=var(param(name)): p * v)
        return out


def split_nine(t: BracketTable) -> NineSplit:
    if not t.symbolic:
        raise ValueError("split_nine needs a symbolic table")
    names = param_names(t.parity)
    zero = {param(k): 0 for k in names}
    base = t.substitute(zero, params=dict.fromkeys(names, rational(0)))
    dirs = {}
    for k in names:
        pv = param(k)
        dirs[k] = t.map(lambda p, pv=pv: p.partial(pv), params={"direction": k})
    split = NineSplit(base, dirs)
    if split.reconstruct().entries != t.entries:
        raise AssertionError("reconstruction of the symbolic table failed")
    return split


# ---------------------------------------------------------------------------
# the n = 3 and n = 4 constructions with their own x_1..x_n indexing


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign


def nambu3(P: MPoly) -> BracketTable:
    """{x_a, x_b} = dP/dx_c over even permutations (a, b, c) of (1, 2, 3)."""
    entries = {}
    for a, b in itertools.combinations((1, 2, 3), 2):
        (c,) = {1, 2, 3} - {a, b}
        s = _perm_sign((a, b, c))
        entries[(a, b)] = P.partial(VarId("X", c)) * s
    return BracketTable((1, 2, 3), entries, n=3)


def jacobian4(P: MPoly, R: MPoly) -> BracketTable:
    """{x_a, x_b} = det [[P_c, P_d], [R_c, R_d]] over even permutations (a, b, c, d)."""
    entries = {}
    for a, b in itertools.combinations((1, 2, 3, 4), 2):
        c, d = sorted({1, 2, 3, 4} - {a, b})
        if _perm_sign((a, b, c, d)) < 0:
            c, d = d, c
        xc, xd = VarId("X", c), VarId("X", d)
        entries[(a, b)] = P.partial(xc) * R.partial(xd) - P.partial(xd) * R.partial(xc)
    return BracketTable((1, 2, 3, 4), entries, n=4)


def monomials(variables, degree: int) -> list:
    """All monomials of the given degree, in a fixed order."""
    out = []
    for combo in itertools.combinations_with_replacement(variables, degree):
        exps: dict = {}
        for v in combo:
            exps[v] = exps.get(v, 0) + 1
        out.append(MPoly.monomial(exps))
    return out
