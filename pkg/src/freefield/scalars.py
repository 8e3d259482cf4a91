"""Exact arithmetic in the field Q(k, ...) of multivariate rational functions.

Every coefficient in the engine is a Scalar: a quotient of polynomials with
rational coefficients in a declared set of indeterminates (the level k plus
whatever formal parameters the computation needs).  Arithmetic is exact;
equality is decidable by cross-multiplication.

Two internal representations are used:

* constants are held as plain Fractions (the bulk of all coefficient traffic,
  so this path must be cheap);
* genuinely symbolic values are pairs of sympy sparse polynomials
  (numerator, denominator), NOT kept gcd-reduced: products and sums just
  multiply/cross-multiply.  Zero-ness is numerator zero-ness, so residual
  checks never need a reduction.  Reduction happens lazily where canonical
  data is required: hashing, serialization, evaluation, constant extraction.

Indeterminates are declared per context.  Mixing scalars from different
contexts raises, which catches symbol leaks between computations.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from sympy import QQ
from sympy.polys.rings import ring as _sympy_ring

_QQ_ZERO = QQ(0)
_QQ_ONE = QQ(1)
MPQ = type(_QQ_ONE)


class ScalarError(Exception):
    pass


def to_scalar(ctx, v):
    """Wrap a raw rational coefficient into a Scalar (Scalars pass through).

    Internal column computations may carry raw gmpy rationals for speed;
    they are wrapped at State boundaries.
    """
    if isinstance(v, Scalar):
        return v
    return Scalar(ctx, const=v)


@lru_cache(maxsize=None)
def _make_ring(names: tuple):
    if len(names) != len(set(names)):
        raise ScalarError("duplicate indeterminate names: %r" % (names,))
    rng, *gens = _sympy_ring(" ".join(names) if names else "_dummy_", QQ)
    return rng, tuple(gens)


def _to_qq(value):
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, int):
        return QQ(value)
    raise ScalarError("cannot coerce %r to an exact rational" % (value,))


class ScalarContext:
    """A declared set of indeterminates and the rational-function field on
    them.  Contexts are interned by their name tuple, so two requests for the
    same names return the same context and their scalars interoperate."""

    _cache: dict = {}

    def __new__(cls, names=("k",)):
        names = tuple(names)
        if names in cls._cache:
            return cls._cache[names]
        self = object.__new__(cls)
        self.names = names
        self._ring, self._gens = _make_ring(names)
        self._one_poly = self._ring.one
        self._zero_poly = self._ring.zero
        self._by_name = dict(zip(names, self._gens))
        self.zero = Scalar(self, const=_QQ_ZERO)
        self.one = Scalar(self, const=_QQ_ONE)
        cls._cache[names] = self
        return self

    def var(self, name):
        try:
            return Scalar(self, num=self._by_name[name], den=self._one_poly)
        except KeyError:
            raise ScalarError(
                "indeterminate %r not declared in context %r" % (name, self.names)
            ) from None

    def rational(self, p, q=1):
        if q == 0:
            raise ZeroDivisionError("rational with zero denominator")
        return Scalar(self, const=QQ(p, q))

    def from_fraction(self, frac):
        return Scalar(self, const=QQ(frac.numerator, frac.denominator))

    def coerce(self, value):
        """Accept a Scalar of this context, an int, or a Fraction."""
        if isinstance(value, Scalar):
            if value.ctx is not self:
                raise ScalarError(
                    "scalar from context %r used in context %r"
                    % (value.ctx.names, self.names))
            return value
        if isinstance(value, int):
            return Scalar(self, const=QQ(value))
        if isinstance(value, Fraction):
            return Scalar(self, const=QQ(value.numerator, value.denominator))
        raise ScalarError("cannot coerce %r to a scalar" % (value,))

    def _ground(self, const):
        return self._ring.ground_new(const)

    def __repr__(self):
        return "ScalarContext%r" % (self.names,)


class Scalar:
    """An element of the rational-function field of a ScalarContext.

    Either a constant (``_c`` a Fraction) or a pair of sympy polynomials
    (``_n``, ``_d`` with ``_d != 0``), not necessarily coprime.  Immutable
    and hashable; hashing reduces once and caches.
    """

    __slots__ = ("ctx", "_c", "_n", "_d", "_hash", "_red")

    def __init__(self, ctx, const=None, num=None, den=None):
        self.ctx = ctx
        self._c = const
        self._n = num
        self._d = den
        self._hash = None
        self._red = None

    # -- helpers ------------------------------------------------------------

    def _pair(self):
        """(num, den) polynomial pair (materializing constants)."""
        if self._c is not None:
            c = self._c
            return (self.ctx._ground(c) if c else self.ctx._zero_poly,
                    self.ctx._one_poly)
        return self._n, self._d

    def _reduced_pair(self):
        if self._red is None:
            if self._c is not None:
                self._red = self._pair()
            elif not self._n:
                self._red = (self.ctx._zero_poly, self.ctx._one_poly)
            else:
                self._red = self._n.cancel(self._d)
        return self._red

    def _check(self, other):
        if other.ctx is not self.ctx:
            raise ScalarError(
                "scalar from context %r used in context %r"
                % (other.ctx.names, self.ctx.names))

    def _wrap(self, value):
        if isinstance(value, Scalar):
            self._check(value)
            return value
        if isinstance(value, int):
            return Scalar(self.ctx, const=QQ(value))
        if type(value) is MPQ:
            return Scalar(self.ctx, const=value)
        if isinstance(value, Fraction):
            return Scalar(self.ctx, const=QQ(value.numerator, value.denominator))
        return None

    def raw(self):
        """The raw rational value when constant, else self."""
        return self._c if self._c is not None else self

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        a, b = self._c, o._c
        if a is not None and b is not None:
            return Scalar(self.ctx, const=a + b)
        if a is not None and not a:
            return o
        if b is not None and not b:
            return self
        n1, d1 = self._pair()
        n2, d2 = o._pair()
        if d1 is d2 or d1 == d2:
            return Scalar(self.ctx, num=n1 + n2, den=d1)
        return Scalar(self.ctx, num=n1 * d2 + n2 * d1, den=d1 * d2)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        a, b = self._c, o._c
        if a is not None and b is not None:
            return Scalar(self.ctx, const=a - b)
        if b is not None and not b:
            return self
        n1, d1 = self._pair()
        n2, d2 = o._pair()
        if d1 is d2 or d1 == d2:
            return Scalar(self.ctx, num=n1 - n2, den=d1)
        return Scalar(self.ctx, num=n1 * d2 - n2 * d1, den=d1 * d2)

    def __rsub__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        a, b = self._c, o._c
        if a is not None:
            if b is not None:
                return Scalar(self.ctx, const=a * b)
            if not a:
                return self.ctx.zero
            if a == 1:
                return o
            return Scalar(self.ctx, num=o._n * self.ctx._ground(a), den=o._d)
        if b is not None:
            if not b:
                return self.ctx.zero
            if b == 1:
                return self
            return Scalar(self.ctx, num=self._n * self.ctx._ground(b), den=self._d)
        return Scalar(self.ctx, num=self._n * o._n, den=self._d * o._d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by the zero rational function")
        a, b = self._c, o._c
        if a is not None and b is not None:
            return Scalar(self.ctx, const=a / b)
        n1, d1 = self._pair()
        n2, d2 = o._pair()
        return Scalar(self.ctx, num=n1 * d2, den=d1 * n2)

    def __rtruediv__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n == 0:
            return self.ctx.one
        if self._c is not None:
            if n < 0 and not self._c:
                raise ZeroDivisionError("division by the zero rational function")
            return Scalar(self.ctx, const=self._c ** n)
        if n < 0:
            if not self._n:
                raise ZeroDivisionError("division by the zero rational function")
            return Scalar(self.ctx, num=self._d ** (-n), den=self._n ** (-n))
        return Scalar(self.ctx, num=self._n ** n, den=self._d ** n)

    def __neg__(self):
        if self._c is not None:
            return Scalar(self.ctx, const=-self._c)
        return Scalar(self.ctx, num=-self._n, den=self._d)

    def __eq__(self, other):
        o = self._wrap(other)
        if o is None:
            return NotImplemented
        a, b = self._c, o._c
        if a is not None and b is not None:
            return a == b
        n1, d1 = self._pair()
        n2, d2 = o._pair()
        if d1 is d2 or d1 == d2:
            return n1 == n2
        return n1 * d2 == n2 * d1

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._reduced_pair())
        return self._hash

    def __bool__(self):
        if self._c is not None:
            return bool(self._c)
        return bool(self._n)

    @property
    def is_zero(self):
        return not self

    @property
    def is_one(self):
        if self._c is not None:
            return self._c == 1
        return self._n == self._d

    # -- queries ------------------------------------------------------------

    @staticmethod
    def _ground_fraction(poly):
        terms = list(poly.terms())
        if not terms:
            return Fraction(0)
        coeff = terms[0][1]
        return Fraction(int(coeff.numerator), int(coeff.denominator))

    def as_fraction(self):
        """Return the value as a Fraction if constant, else None."""
        if self._c is not None:
            return Fraction(int(self._c.numerator), int(self._c.denominator))
        num, den = self._n, self._d
        if not (num.is_ground and den.is_ground):
            num, den = self._reduced_pair()
            if not (num.is_ground and den.is_ground):
                return None
        return self._ground_fraction(num) / self._ground_fraction(den)

    def as_int(self):
        """Return the value as an int if it is a constant integer, else None."""
        frac = self.as_fraction()
        if frac is not None and frac.denominator == 1:
            return int(frac)
        return None

    def evaluate(self, assignment):
        """Exact evaluation at a rational point; raises on poles and on
        missing indeterminates that actually occur (after reduction)."""
        ctx = self.ctx
        if self._c is not None:
            for name in assignment:
                if name not in ctx._by_name:
                    raise ScalarError(
                        "assignment names %r which is not declared in %r"
                        % (name, ctx.names))
            return Fraction(int(self._c.numerator), int(self._c.denominator))
        vals = {}
        for name, v in assignment.items():
            if name not in ctx._by_name:
                raise ScalarError(
                    "assignment names %r which is not declared in %r"
                    % (name, ctx.names))
            vals[name] = _to_qq(Fraction(v))
        num, den = self._reduced_pair()
        needed = set()
        for poly in (num, den):
            for monom, _coeff in poly.terms():
                for name, exp in zip(ctx.names, monom):
                    if exp:
                        needed.add(name)
        missing = needed - set(vals)
        if missing:
            raise ScalarError("missing indeterminates in assignment: %s" % sorted(missing))

        def ev(poly):
            total = QQ(0)
            for monom, coeff in poly.terms():
                term = coeff
                for name, exp in zip(ctx.names, monom):
                    if exp:
                        term *= vals[name] ** exp
                total += term
            return total

        dv = ev(den)
        if not dv:
            raise ZeroDivisionError("pole at the given assignment")
        nv = ev(num)
        r = nv / dv
        return Fraction(int(r.numerator), int(r.denominator))

    def specialize(self, assignment):
        """Substitute rational values for some indeterminates, staying in the
        same context (the substituted symbols simply no longer occur)."""
        ctx = self.ctx
        for name in assignment:
            if name not in ctx._by_name:
                raise ScalarError(
                    "assignment names %r which is not declared in %r"
                    % (name, ctx.names))
        if self._c is not None:
            return self
        vals = {ctx.names.index(name): ctx._ground(_to_qq(Fraction(v)))
                for name, v in assignment.items()}

        def sub(poly):
            total = ctx._zero_poly
            for monom, coeff in poly.terms():
                term = ctx._ring.ground_new(coeff)
                for i, exp in enumerate(monom):
                    if not exp:
                        continue
                    base = vals.get(i)
                    if base is None:
                        base = ctx._gens[i]
                    term = term * base ** exp
                total = total + term
            return total

        num, den = self._reduced_pair()
        dv = sub(den)
        if not dv:
            raise ZeroDivisionError("pole at the given assignment")
        return Scalar(ctx, num=sub(num), den=dv)

    # -- printing -----------------------------------------------------------

    def _poly_str(self, poly):
        if not poly:
            return "0"
        parts = []
        for monom, coeff in sorted(poly.terms(), reverse=True):
            factors = []
            for name, exp in zip(self.ctx.names, monom):
                if exp == 1:
                    factors.append(name)
                elif exp > 1:
                    factors.append("%s^%d" % (name, exp))
            c = Fraction(int(coeff.numerator), int(coeff.denominator))
            if factors:
                mono = "*".join(factors)
                if c == 1:
                    parts.append(mono)
                elif c == -1:
                    parts.append("-" + mono)
                else:
                    parts.append("%s*%s" % (c, mono))
            else:
                parts.append(str(c))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def serialize(self):
        """Canonical text form ``poly / poly`` with monomials in a fixed order."""
        const = self.as_fraction()
        if const is not None:
            return str(const)
        num, den = self._reduced_pair()
        num_s = self._poly_str(num)
        den_s = self._poly_str(den)
        if den_s == "1":
            return num_s
        return "(%s)/(%s)" % (num_s, den_s)

    def __str__(self):
        return self.serialize()

    def __repr__(self):
        return "Scalar(%s)" % self.serialize()


# -- module-level operation surface ----------------------------------------


def scalar_arith(op, a, b):
    """Exact field arithmetic: op in {'add', 'sub', 'mul', 'div'}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ScalarError("unknown op %r" % (op,))


def scalar_eval(a, assignment):
    return a.evaluate(assignment)


def scalar_eq(a, b):
    """True iff a - b is the zero rational function."""
    return (a - b).is_zero
