"""Exact rationals and sparse multivariate polynomials.

Monomials are packed into a single Python int: every variable owns a fixed
16-bit exponent field, so multiplying monomials is one integer addition.
Field positions depend on registration order inside a process, so anything
that leaves the process (text, JSON, pickles) goes through ``VarId`` form.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Union

import gmpy2
from gmpy2 import mpq

Rational = type(mpq(0))

_BITS = 16
_MASK = (1 << _BITS) - 1

PARAM_NAMES = ("a0", "a1", "a2", "a3", "a4", "b0", "b1", "b2", "c")
_PARAM_INDEX = {name: i for i, name in enumerate(PARAM_NAMES)}

# print/sort order of variable classes; parameters come first so that they
# read like coefficients ("1/2*b1*x0*x2")
CLASS_ORDER = ("PARAM", "X", "Y", "F", "U", "G", "E", "K")
_CLASS_RANK = {c: i for i, c in enumerate(CLASS_ORDER)}
_PREFIX = {"X": "x", "Y": "y", "F": "f", "U": "u", "G": "g", "E": "e", "K": "k"}
_CLASS_OF_PREFIX = {v: k for k, v in _PREFIX.items()}


class NotDivisible(ArithmeticError):
    """Raised by :meth:`MPoly.exact_div` when the divisor does not divide."""


def rational(value) -> Rational:
    """Coerce int / Fraction / mpq / ``"num/den"`` string to an exact rational."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, (int, gmpy2.mpz().__class__)):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        num, _, den = value.strip().partition("/")
        return mpq(int(num), int(den) if den else 1)
    if isinstance(value, dict):
        return mpq(int(value["num"]), int(value.get("den", 1)))
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def rational_to_json(q) -> dict:
    q = rational(q)
    return {"num": int(q.numerator), "den": int(q.denominator)}


def rational_to_text(q) -> str:
    q = rational(q)
    if q.denominator == 1:
        return str(int(q.numerator))
    return f"{int(q.numerator)}/{int(q.denominator)}"


class VarId(NamedTuple):
    cls: str
    index: int

    @property
    def name(self) -> str:
        if self.cls == "PARAM":
            return PARAM_NAMES[self.index]
        prefix = _PREFIX[self.cls]
        if self.index < 0:
            return f"{prefix}m{-self.index}"
        return f"{prefix}{self.index}"

    def sort_key(self):
        return (_CLASS_RANK[self.cls], self.index)

    def __str__(self) -> str:
        return self.name


_NAME_RE = re.compile(r"^([a-z])(m?)(\d+)$")


def var_from_name(name: str) -> VarId:
    if name in _PARAM_INDEX:
        return VarId("PARAM", _PARAM_INDEX[name])
    m = _NAME_RE.match(name)
    if not m or m.group(1) not in _CLASS_OF_PREFIX:
        raise ValueError(f"unknown variable name {name!r}")
    idx = int(m.group(3))
    if m.group(2):
        idx = -idx
    return VarId(_CLASS_OF_PREFIX[m.group(1)], idx)


def X(i: int) -> VarId:
    return VarId("X", i)


def param(name: str) -> VarId:
    return VarId("PARAM", _PARAM_INDEX[name])


# ---------------------------------------------------------------------------
# variable registry for packed monomials

_slot_of: dict = {}
_var_at: list = []


def _slot(v: VarId) -> int:
    s = _slot_of.get(v)
    if s is None:
        if v.cls not in _CLASS_RANK:
            raise ValueError(f"unknown variable class {v.cls!r}")
        if v.cls == "PARAM" and not 0 <= v.index < len(PARAM_NAMES):
            raise ValueError(f"no parameter with index {v.index}")
        if v.cls == "E" and v.index < 1:
            raise ValueError("E indices start at 1")
        s = len(_var_at)
        _slot_of[v] = s
        _var_at.append(v)
    return s


def _unit(v: VarId) -> int:
    return 1 << (_BITS * _slot(v))


def _encode(exps: Mapping[VarId, int]) -> int:
    m = 0
    for v, e in exps.items():
        if e < 0:
            raise ValueError("negative exponents are not stored in MPoly")
        if e >= _MASK:
            raise OverflowError("exponent too large")
        if e:
            m += e << (_BITS * _slot(v))
    return m


@lru_cache(maxsize=1 << 18)
def _decode(m: int) -> tuple:
    out = []
    while m:
        low = (m & -m).bit_length() - 1
        s = low // _BITS
        e = (m >> (s * _BITS)) & _MASK
        out.append((_var_at[s], e))
        m -= e << (s * _BITS)
    out.sort(key=lambda ve: ve[0].sort_key())
    return tuple(out)


def _mask_for(pred) -> int:
    mask = 0
    for s, v in enumerate(_var_at):
        if pred(v):
            mask |= _MASK << (s * _BITS)
    return mask


def _divides(small: int, big: int) -> bool:
    for v, e in _decode(small):
        if (big >> (_BITS * _slot_of[v])) & _MASK < e:
            return False
    return True


def _mono_key(m: int):
    dec = _decode(m)
    flat = []
    for v, e in dec:
        flat.extend([v.sort_key()] * e)
    return (len(flat), tuple(flat))


Scalar = Union[int, Fraction, Rational]


class MPoly:
    """Sparse polynomial: ``terms`` maps packed monomial -> nonzero mpq.

    Instances are treated as immutable.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = terms if terms is not None else {}

    # construction ---------------------------------------------------------
    @staticmethod
    def constant(c) -> "MPoly":
        c = rational(c)
        return MPoly({0: c}) if c else MPoly()

    @staticmethod
    def var(v: VarId | str) -> "MPoly":
        if isinstance(v, str):
            v = var_from_name(v)
        return MPoly({_unit(v): mpq(1)})

    @staticmethod
    def from_terms(items: Iterable) -> "MPoly":
        """Build from ``(mapping VarId -> exponent, coefficient)`` pairs."""
        out: dict = {}
        for exps, c in items:
            c = rational(c)
            m = _encode(exps)
            out[m] = out.get(m, 0) + c
        return MPoly({m: c for m, c in out.items() if c})

    @staticmethod
    def monomial(exps: Mapping[VarId, int], c=1) -> "MPoly":
        return MPoly.from_terms([(exps, c)])

    # basic protocol -------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MPoly):
            try:
                other = MPoly.constant(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"MPoly({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    def __reduce__(self):
        return (_mpoly_from_items, (self.items(),))

    # arithmetic -----------------------------------------------------------
    def __neg__(self) -> "MPoly":
        return MPoly({m: -c for m, c in self.terms.items()})

    def __add__(self, other) -> "MPoly":
        if not isinstance(other, MPoly):
            other = MPoly.constant(other)
        if len(self.terms) < len(other.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = dict(a)
        for m, c in b.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                del out[m]
        return MPoly(out)

    __radd__ = __add__

    def __sub__(self, other) -> "MPoly":
        if not isinstance(other, MPoly):
            other = MPoly.constant(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) - c
            if s:
                out[m] = s
            else:
                del out[m]
        return MPoly(out)

    def __rsub__(self, other) -> "MPoly":
        return MPoly.constant(other) - self

    def scale(self, c) -> "MPoly":
        c = rational(c)
        if not c:
            return MPoly()
        return MPoly({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> "MPoly":
        if not isinstance(other, MPoly):
            return self.scale(other)
        a, b = self.terms, other.terms
        if not a or not b:
            return MPoly()
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        get = out.get
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                m = m1 + m2
                out[m] = get(m, 0) + c1 * c2
        return MPoly({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MPoly":
        if k < 0:
            raise ValueError("negative power")
        result = MPoly.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def exact_div(self, d: "MPoly") -> "MPoly":
        """Return ``q`` with ``q * d == self``; raise NotDivisible otherwise."""
        if not d.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        lm = max(d.terms)
        lc = d.terms[lm]
        rest = [(m, c) for m, c in d.terms.items() if m != lm]
        p = dict(self.terms)
        q: dict = {}
        while p:
            m = max(p)
            if not _divides(lm, m):
                raise NotDivisible(f"{d.to_text()} does not divide {self.to_text()}")
            qm = m - lm
            qc = p.pop(m) / lc
            q[qm] = qc
            for m2, c2 in rest:
                t = qm + m2
                s = p.get(t, 0) - qc * c2
                if s:
                    p[t] = s
                else:
                    p.pop(t, None)
        return MPoly(q)

    def partial(self, v: VarId | str) -> "MPoly":
        if isinstance(v, str):
            v = var_from_name(v)
        s = _slot(v)
        shift = _BITS * s
        unit = 1 << shift
        out = {}
        for m, c in self.terms.items():
            e = (m >> shift) & _MASK
            if e:
                out[m - unit] = c * e
        return MPoly(out)

    def substitute(self, bindings: Mapping) -> "MPoly":
        """Simultaneous substitution ``{VarId: MPoly | scalar}``."""
        if not bindings:
            return self
        binds = {}
        for v, val in bindings.items():
            if isinstance(v, str):
                v = var_from_name(v)
            binds[v] = val if isinstance(val, MPoly) else MPoly.constant(val)
        for v in binds:
            _slot(v)
        mask = _mask_for(lambda v: v in binds)
        cache: dict = {}
        powers: dict = {}
        out: dict = {}
        get = out.get
        for m, c in self.terms.items():
            sub = m & mask
            rest = m - sub
            val = cache.get(sub)
            if val is None:
                val = MPoly.constant(1)
                for v, e in _decode(sub):
                    key = (v, e)
                    pw = powers.get(key)
                    if pw is None:
                        pw = powers[key] = binds[v] ** e
                    val = val * pw
                cache[sub] = val
            for m2, c2 in val.terms.items():
                t = m2 + rest
                out[t] = get(t, 0) + c * c2
        return MPoly({m: c for m, c in out.items() if c})

    # inspection -----------------------------------------------------------
    def items(self) -> list:
        """Canonically ordered ``[(((VarId, exp), ...), coeff), ...]``."""
        return [(_decode(m), self.terms[m]) for m in sorted(self.terms, key=_mono_key)]

    def variables(self) -> set:
        vs = set()
        for m in self.terms:
            vs.update(v for v, _ in _decode(m))
        return vs

    def degree_in(self, v: VarId) -> int:
        if v not in _slot_of:
            return 0
        shift = _BITS * _slot_of[v]
        return max(((m >> shift) & _MASK for m in self.terms), default=0)

    def degrees(self, pred=None) -> set:
        """Set of total degrees of the terms, counting variables matching ``pred``."""
        out = set()
        for m in self.terms:
            out.add(sum(e for v, e in _decode(m) if pred is None or pred(v)))
        return out

    def total_degree(self, pred=None) -> int:
        return max(self.degrees(pred), default=0)

    def is_homogeneous(self, degree: int, pred=None) -> bool:
        return self.degrees(pred) <= {degree}

    def split(self, pred) -> dict:
        """Group terms by their sub-monomial in variables matching ``pred``.

        Returns ``{packed sub-monomial: MPoly of the remaining factors}``.
        """
        mask = _mask_for(pred)
        groups: dict = {}
        for m, c in self.terms.items():
            sub = m & mask
            groups.setdefault(sub, {})[m - sub] = c
        return {k: MPoly(v) for k, v in groups.items()}

    def coefficient(self, exps: Mapping[VarId, int]) -> Rational:
        return self.terms.get(_encode(exps), mpq(0))

    def constant_term(self) -> Rational:
        return self.terms.get(0, mpq(0))

    def denominator_lcm(self) -> int:
        d = gmpy2.mpz(1)
        for c in self.terms.values():
            d = gmpy2.lcm(d, c.denominator)
        return int(d)

    # serialization --------------------------------------------------------
    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for dec, c in self.items():
            factors = [v.name if e == 1 else f"{v.name}^{e}" for v, e in dec]
            ctext = rational_to_text(c)
            if c < 0:
                ctext = f"({ctext})"
            if not factors:
                parts.append(ctext)
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([ctext] + factors))
        return " + ".join(parts)

    def to_json(self) -> list:
        return [
            {"coeff": rational_to_json(c), "monomial": {v.name: e for v, e in dec}}
            for dec, c in self.items()
        ]

    @staticmethod
    def from_json(data: list) -> "MPoly":
        return MPoly.from_terms(
            ({var_from_name(k): int(e) for k, e in t["monomial"].items()}, rational(t["coeff"]))
            for t in data
        )


_TERM_RE = re.compile(r"^\((-?\d+(?:/\d+)?)\)$|^(\d+(?:/\d+)?)$")


def parse(text: str) -> MPoly:
    """Inverse of :meth:`MPoly.to_text`."""
    text = text.strip()
    if text == "0":
        return MPoly()
    items = []
    for term in text.split(" + "):
        coeff = mpq(1)
        exps: dict = {}
        for k, factor in enumerate(term.split("*")):
            m = _TERM_RE.match(factor)
            if m and k == 0:
                coeff = rational(m.group(1) or m.group(2))
                continue
            name, _, e = factor.partition("^")
            v = var_from_name(name)
            exps[v] = exps.get(v, 0) + (int(e) if e else 1)
        items.append((exps, coeff))
    return MPoly.from_terms(items)


def _mpoly_from_items(items) -> MPoly:
    return MPoly.from_terms((dict(dec), c) for dec, c in items)


def var(v) -> MPoly:
    return MPoly.var(v)


def const(c) -> MPoly:
    return MPoly.constant(c)


ZERO = MPoly()
ONE = MPoly.constant(1)
