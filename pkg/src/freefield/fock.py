"""Free-field state spaces with exact mode actions.

A space is described by an AlgebraSpec: a set of Heisenberg generators with a
symmetric Gram matrix of Scalars, a set of beta-gamma pairs, and a lattice of
generators whose exponentials act as vertex operators.  States live in Fock
modules over sectors e^mu; a basis vector is a sector together with a
partition of creation modes for each generator.

Mode conventions (used throughout the package):

* every field is expanded as A(z) = sum_n A_(n) z^(-n-1) ("math" modes);
* Heisenberg modes obey [g(m), h(n)] = m delta_{m+n,0} <g,h>;
* beta-gamma pairs obey beta(z)gamma(w) ~ BG_SIGN/(z-w), i.e.
  [beta_(m), gamma_(n)] = BG_SIGN * delta_{m+n+1,0};
* vertex operators follow
  e^mu(z) = s_mu z^{mu(0)} exp(sum_{n>0} mu(-n) z^n / n) exp(-sum_{n>0} mu(n) z^{-n} / n),
  with the shift s_mu carrying an optional lattice 2-cocycle sign.

States are graded by the total mode level (the sum of all partition parts);
sector-dependent conformal-weight offsets are kept out of the grading and only
enter when a particular Virasoro operator is applied.

Every single mode application is exact and finite; the Window argument of
vertex_mode only projects the (already exact) result onto levels up to
max_level, so results for nested windows agree on their overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy import QQ

from .scalars import MPQ, Scalar, ScalarContext, ScalarError, to_scalar

#: beta(z)gamma(w) ~ BG_SIGN / (z-w).  Pinned empirically: with +1 the
#: Wakimoto currents satisfy the affine sl3 relations (see tests); the
#: opposite sign breaks them.
BG_SIGN = 1


class FockError(Exception):
    pass


@dataclass(frozen=True)
class Window:
    """Truncation level above the sector floor; results are exact up to it."""

    max_level: int

    def __post_init__(self):
        if self.max_level < 0:
            raise FockError("window must be nonnegative")


class Exponent:
    """A formal Scalar-linear combination of Heisenberg generators.

    Labels Fock sectors e^mu and vertex-operator exponents.  Instances are
    interned, so equal exponents are identical objects.
    """

    __slots__ = ("items", "_hash")
    _pool: dict = {}
    _add_cache: dict = {}

    def __new__(cls, items):
        # items: iterable of (name, Scalar); zeros dropped, sorted by name
        clean = tuple(sorted(((n, c) for n, c in items if c), key=lambda t: t[0]))
        key = clean
        hit = cls._pool.get(key)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        object.__setattr__(self, "items", clean)
        object.__setattr__(self, "_hash", hash(clean))
        cls._pool[key] = self
        return self

    def __setattr__(self, *a):
        raise AttributeError("Exponent is immutable")

    @staticmethod
    def make(ctx, coeffs):
        """coeffs: mapping name -> Scalar | int | Fraction."""
        return Exponent((n, ctx.coerce(c)) for n, c in coeffs.items())

    @staticmethod
    def zero():
        return _ZERO_EXPONENT

    def get(self, name, ctx):
        for n, c in self.items:
            if n == name:
                return c
        return ctx.zero

    def __add__(self, other):
        key = (self, other)
        hit = Exponent._add_cache.get(key)
        if hit is not None:
            return hit
        d = dict(self.items)
        for n, c in other.items:
            d[n] = d[n] + c if n in d else c
        out = Exponent(d.items())
        Exponent._add_cache[key] = out
        return out

    def __neg__(self):
        return Exponent((n, -c) for n, c in self.items)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return Exponent((n, c * s) for n, c in self.items)

    def is_zero(self):
        return not self.items

    def __eq__(self, other):
        # interned: equal iff identical
        return self is other

    def __hash__(self):
        return self._hash

    def __str__(self):
        if not self.items:
            return "0"
        parts = []
        for n, c in self.items:
            cf = c.as_fraction()
            if cf == 1:
                parts.append(n)
            elif cf == -1:
                parts.append("-" + n)
            else:
                parts.append("%s %s" % (c.serialize(), n))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return "Exponent(%s)" % self


_ZERO_EXPONENT = Exponent(())


class AlgebraSpec:
    """Heisenberg generators + Gram matrix, beta-gamma pairs, and the lattice
    of exponents allowed in vertex operators.

    ``cocycle`` is an optional bilinear form B (dict (g,h) -> int) on lattice
    coordinates; the shift s_mu acting on sector nu picks up (-1)^B(mu,nu).
    The trivial choice works for all even pairings in play; a nontrivial B is
    only needed where an odd-norm screening exponent is involved.
    """

    def __init__(self, ctx, heis, gram, bg_pairs=(), lattice=(), sector_lattice="",
                 cocycle=None, name=""):
        self.ctx = ctx
        self.heis = tuple(heis)
        self.bg_pairs = tuple(tuple(p) for p in bg_pairs)
        self.lattice = tuple(lattice)
        self.sector_lattice = sector_lattice
        self.name = name
        self._gram = {}
        for (a, b), v in gram.items():
            v = ctx.coerce(v)
            self._gram[(a, b)] = v
            self._gram[(b, a)] = v
        for g in self.heis:
            self._gram.setdefault((g, g), ctx.zero)
        self._bg_by_field = {}
        for beta, gamma in self.bg_pairs:
            self._bg_by_field[beta] = (beta, gamma, "beta")
            self._bg_by_field[gamma] = (beta, gamma, "gamma")
        self.cocycle = cocycle
        self._vacuum = BasisVector(_ZERO_EXPONENT, (), ())
        self._gen_pair_cache = {}
        self._sector_pair_cache = {}
        self._gram_rows = {}
        for g in self.heis:
            self._gram_rows[g] = frozenset(
                h for h in self.heis if self._gram.get((g, h), ctx.zero))
        self._exp_rows = {}
        self._combo_memo = {}
        self._schur_ann = {}
        self._schur_cre = {}

    def gram_row(self, g):
        """Generators with nonzero pairing against g."""
        return self._gram_rows[g]

    def exp_row(self, mu):
        """Generators with nonzero pairing against some part of mu."""
        hit = self._exp_rows.get(mu)
        if hit is None:
            row = set()
            for g, _ in mu.items:
                row.update(self._gram_rows[g])
            hit = frozenset(row)
            self._exp_rows[mu] = hit
        return hit

    def paired_level(self, row, bv):
        """Total partition weight of bv in the given generators."""
        lvl = 0
        for h, parts in bv.heis:
            if h in row:
                lvl += sum(parts)
        return lvl

    def paired_maxpart(self, row, bv):
        """Largest partition part of bv among the given generators."""
        mx = 0
        for h, parts in bv.heis:
            if h in row and parts and parts[0] > mx:
                mx = parts[0]
        return mx

    def gram(self, a, b):
        try:
            return self._gram[(a, b)]
        except KeyError:
            if a in self.heis and b in self.heis:
                return self.ctx.zero
            raise FockError("unknown generator pair (%s, %s)" % (a, b)) from None

    def is_heis(self, name):
        return name in self.heis

    def is_bg(self, name):
        return name in self._bg_by_field

    def exponent(self, coeffs):
        exp = Exponent.make(self.ctx, coeffs)
        for n, _ in exp.items:
            if n not in self.heis:
                raise FockError("exponent uses unknown generator %r" % n)
        return exp

    def pairing(self, a, b):
        """Bilinear extension of the Gram matrix to exponents."""
        key = (a, b)
        hit = self._sector_pair_cache.get(key)
        if hit is not None:
            return hit
        total = self.ctx.zero
        for n1, c1 in a.items:
            if n1 not in self.heis:
                raise FockError("unknown generator %r in exponent" % n1)
            for n2, c2 in b.items:
                if n2 not in self.heis:
                    raise FockError("unknown generator %r in exponent" % n2)
                g = self.gram(n1, n2)
                if g:
                    total = total + c1 * c2 * g
        self._sector_pair_cache[key] = total
        return total

    def pair_gen(self, combo, h):
        """pairing(combo, h) for a single generator h, cached."""
        key = (combo, h)
        hit = self._gen_pair_cache.get(key)
        if hit is None:
            total = self.ctx.zero
            for n1, c1 in combo.items:
                g = self.gram(n1, h)
                if g:
                    total = total + c1 * g
            self._gen_pair_cache[key] = total
            return total
        return hit

    def cocycle_sign(self, mu, nu):
        if self.cocycle is None:
            return 1
        total = 0
        for g1, c1 in mu.items:
            for g2, c2 in nu.items:
                b = self.cocycle.get((g1, g2), 0)
                if b:
                    i1, i2 = c1.as_int(), c2.as_int()
                    if i1 is None or i2 is None:
                        raise FockError(
                            "cocycle form needs integer coordinates at (%s,%s)" % (g1, g2))
                    total += b * i1 * i2
        return -1 if total % 2 else 1

    def vacuum_vector(self):
        return self._vacuum


class BasisVector:
    """sector + per-generator partitions of creation-mode indices.

    Instances are interned, so equal basis vectors are identical objects.
    """

    __slots__ = ("sector", "heis", "bg", "level", "_hash")
    _pool: dict = {}

    def __new__(cls, sector, heis, bg):
        # heis: tuple of (name, parts) with parts a descending tuple of ints >= 1
        # bg: tuple of (beta_name, beta_parts, gamma_parts)
        key = (sector, heis, bg)
        hit = cls._pool.get(key)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        object.__setattr__(self, "sector", sector)
        object.__setattr__(self, "heis", heis)
        object.__setattr__(self, "bg", bg)
        lvl = 0
        for _, parts in heis:
            lvl += sum(parts)
        for _, bp, gp in bg:
            lvl += sum(bp) + sum(gp)
        object.__setattr__(self, "level", lvl)
        object.__setattr__(self, "_hash", hash(key))
        cls._pool[key] = self
        return self

    def __setattr__(self, *a):
        raise AttributeError("BasisVector is immutable")

    def __eq__(self, other):
        # interned: equal iff identical
        return self is other

    def __hash__(self):
        return self._hash

    def heis_parts(self, name):
        for n, parts in self.heis:
            if n == name:
                return parts
        return ()

    def bg_parts(self, beta_name):
        for n, bp, gp in self.bg:
            if n == beta_name:
                return bp, gp
        return (), ()

    def with_heis(self, name, parts):
        rest = tuple((n, p) for n, p in self.heis if n != name)
        if parts:
            rest = tuple(sorted(rest + ((name, tuple(sorted(parts, reverse=True))),)))
        return BasisVector(self.sector, rest, self.bg)

    def with_bg(self, beta_name, bparts, gparts):
        rest = tuple(t for t in self.bg if t[0] != beta_name)
        if bparts or gparts:
            entry = (beta_name, tuple(sorted(bparts, reverse=True)),
                     tuple(sorted(gparts, reverse=True)))
            rest = tuple(sorted(rest + (entry,)))
        return BasisVector(self.sector, self.heis, rest)

    def with_sector(self, sector):
        return BasisVector(sector, self.heis, self.bg)

    def __str__(self):
        bits = ["e^{%s}" % self.sector]
        for n, parts in self.heis:
            bits.append("%s:%s" % (n, list(parts)))
        for n, bp, gp in self.bg:
            if bp:
                bits.append("%s:%s" % (n, list(bp)))
            if gp:
                bits.append("%s*:%s" % (n, list(gp)))
        return " ; ".join(bits)

    def __repr__(self):
        return "BasisVector(%s)" % self


# A state key is (abstract_word, basis_vector); the abstract word is a tuple
# of (name, math_mode) letters for spaces with an abstract tensor factor and
# () otherwise.
EMPTY_WORD = ()


class State:
    """Finite Scalar-linear combination of basis vectors (optionally tensored
    with abstract-module words).  Mutable accumulator with value semantics at
    the API level: arithmetic returns new states."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec, terms=None):
        self.spec = spec
        self.terms = terms or {}

    @staticmethod
    def zero(spec):
        return State(spec)

    @staticmethod
    def of_basis(spec, bv, coeff=None, word=EMPTY_WORD):
        s = State(spec)
        c = spec.ctx.one if coeff is None else spec.ctx.coerce(coeff)
        if not c.is_zero:
            s.terms[(word, bv)] = c
        return s

    @staticmethod
    def vacuum(spec):
        return State.of_basis(spec, spec.vacuum_vector())

    @staticmethod
    def sector(spec, exponent):
        return State.of_basis(spec, BasisVector(exponent, (), ()))

    def add_term(self, key, coeff):
        if coeff.is_zero:
            return
        cur = self.terms.get(key)
        if cur is None:
            self.terms[key] = coeff
        else:
            new = cur + coeff
            if new.is_zero:
                del self.terms[key]
            else:
                self.terms[key] = new

    def add_state(self, other, factor=None):
        if factor is not None and factor.is_zero:
            return
        for key, c in other.terms.items():
            self.add_term(key, c if factor is None else c * factor)

    def __add__(self, other):
        out = State(self.spec, dict(self.terms))
        out.add_state(other)
        return out

    def __sub__(self, other):
        out = State(self.spec, dict(self.terms))
        out.add_state(other, factor=self.spec.ctx.coerce(-1))
        return out

    def scaled(self, factor):
        factor = self.spec.ctx.coerce(factor)
        out = State(self.spec)
        if factor.is_zero:
            return out
        for key, c in self.terms.items():
            out.terms[key] = c * factor
        return out

    @property
    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, State) and self.spec is other.spec and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def fock_level(self):
        return max((bv.level for (_, bv) in self.terms), default=0)

    def truncated(self, window, level_of=None):
        """Project onto keys of level <= window.max_level.  level_of lets the
        caller grade tensor keys; the default uses the Fock level."""
        lv = level_of or (lambda key: key[1].level)
        out = State(self.spec)
        for key, c in self.terms.items():
            if lv(key) <= window.max_level:
                out.terms[key] = c
        return out

    def coefficient(self, bv, word=EMPTY_WORD):
        return self.terms.get((word, bv), self.spec.ctx.zero)

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for (word, bv), c in self.items_sorted():
            wtxt = "".join("%s(%d)." % (n, m) for n, m in word)
            bits.append("(%s) %s%s" % (c.serialize(), wtxt, bv))
        return "  +  ".join(bits)

    def __repr__(self):
        return "State<%s>" % self


# ---------------------------------------------------------------------------
# atomic mode actions on a single basis vector (abstract word untouched)
# ---------------------------------------------------------------------------


def _heis_combo_mode(spec, combo, n, bv):
    """Mode n of the Heisenberg field sum_g combo_g * g on one basis vector.

    Returns dict bv -> Scalar.  combo is an Exponent.
    """
    out = {}
    if n == 0:
        c = spec.pairing(combo, bv.sector)
        if c:
            out[bv] = c.raw()
        return out
    if n < 0:
        for g, cg in combo.items:
            parts = bv.heis_parts(g)
            nb = bv.with_heis(g, parts + (-n,))
            raw = cg.raw()
            if nb in out:
                out[nb] = out[nb] + raw
                if not out[nb]:
                    del out[nb]
            else:
                out[nb] = raw
        return out
    # annihilation: strip one part equal to n from any generator pairing with combo
    for h, parts in bv.heis:
        if n not in parts:
            continue
        g = spec.pair_gen(combo, h)
        if not g:
            continue
        mult = parts.count(n)
        lst = list(parts)
        lst.remove(n)
        nb = bv.with_heis(h, tuple(lst))
        coeff = g.raw() * (mult * n)
        if nb in out:
            out[nb] = out[nb] + coeff
            if not out[nb]:
                del out[nb]
        else:
            out[nb] = coeff
    return out


def _bg_mode(spec, name, n, bv):
    """Mode n of a beta or gamma field on one basis vector."""
    beta, gamma, kind = spec._bg_by_field[name]
    bparts, gparts = bv.bg_parts(beta)
    out = {}
    if n < 0:
        if kind == "beta":
            nb = bv.with_bg(beta, bparts + (-n,), gparts)
        else:
            nb = bv.with_bg(beta, bparts, gparts + (-n,))
        out[nb] = QQ(1)
        return out
    # annihilators: beta_(n) strips gamma-mode n+1 with +BG_SIGN, gamma_(n)
    # strips beta-mode n+1 with -BG_SIGN
    target = n + 1
    if kind == "beta":
        if target in gparts:
            mult = gparts.count(target)
            lst = list(gparts)
            lst.remove(target)
            out[bv.with_bg(beta, bparts, tuple(lst))] = QQ(BG_SIGN * mult)
    else:
        if target in bparts:
            mult = bparts.count(target)
            lst = list(bparts)
            lst.remove(target)
            out[bv.with_bg(beta, tuple(lst), gparts)] = QQ(-BG_SIGN * mult)
    return out


@lru_cache(maxsize=None)
def _partitions(n):
    """All partitions of n as descending tuples."""
    if n == 0:
        return ((),)
    out = []

    def rec(rest, maxpart, acc):
        if rest == 0:
            out.append(tuple(acc))
            return
        for p in range(min(rest, maxpart), 0, -1):
            acc.append(p)
            rec(rest - p, p, acc)
            acc.pop()

    rec(n, n, [])
    return tuple(out)


def _combo_mode_memo(spec, combo, m, bv):
    key = (combo, m, bv)
    hit = spec._combo_memo.get(key)
    if hit is None:
        hit = _heis_combo_mode(spec, combo, m, bv)
        spec._combo_memo[key] = hit
    return hit


def _acc_merge(acc, items, factor=None):
    for nb, c in items.items():
        val = c if factor is None else c * factor
        cur = acc.get(nb)
        if cur is None:
            acc[nb] = val
        else:
            s = cur + val
            if not s:
                del acc[nb]
            else:
                acc[nb] = s


def _ann_schur(spec, mu, b, bv):
    """Q_b applied to one basis vector, where exp(-sum_{s>0} mu(s) t^s/s)
    = sum_b Q_b t^b; computed by the Newton recurrence
    Q_b = -(1/b) sum_{s=1..b} mu(s) Q_{b-s} and memoized per (mu, b, bv)."""
    if b == 0:
        return {bv: QQ(1)}
    key = (mu, b, bv)
    hit = spec._schur_ann.get(key)
    if hit is not None:
        return hit
    acc = {}
    for s in range(1, b + 1):
        prev = _ann_schur(spec, mu, b - s, bv)
        for nb, c in prev.items():
            _acc_merge(acc, _combo_mode_memo(spec, mu, s, nb), c)
    factor = QQ(-1, b)
    out = {nb: c * factor for nb, c in acc.items()}
    spec._schur_ann[key] = out
    return out


def _cre_schur(spec, mu, a, bv):
    """P_a applied to one basis vector, where exp(sum_{s>0} mu(-s) t^s/s)
    = sum_a P_a t^a; Newton recurrence P_a = (1/a) sum_s mu(-s) P_{a-s},
    memoized per (mu, a, bv)."""
    if a == 0:
        return {bv: QQ(1)}
    key = (mu, a, bv)
    hit = spec._schur_cre.get(key)
    if hit is not None:
        return hit
    acc = {}
    for s in range(1, a + 1):
        prev = _cre_schur(spec, mu, a - s, bv)
        for nb, c in prev.items():
            _acc_merge(acc, _combo_mode_memo(spec, mu, -s, nb), c)
    factor = QQ(1, a)
    out = {nb: c * factor for nb, c in acc.items()}
    spec._schur_cre[key] = out
    return out


def _vertex_mode_basis(spec, mu, n, bv):
    """Exact mode n of the vertex operator e^mu on one basis vector."""
    for g, _ in mu.items:
        if g not in spec.lattice:
            raise FockError("exponent generator %r is not in the vertex lattice" % g)
    pair = spec.pairing(mu, bv.sector)
    N = pair.as_int()
    if N is None:
        raise FockError(
            "non-integral pairing <%s, %s> = %s" % (mu, bv.sector, pair.serialize()))
    sign = spec.cocycle_sign(mu, bv.sector)
    shifted_sector = bv.sector + mu
    out = {}
    for b in range(0, bv.level + 1):
        a = b - N - n - 1
        if a < 0:
            continue
        qb = _ann_schur(spec, mu, b, bv)
        if not qb:
            continue
        for nb, c in qb.items():
            if sign != 1:
                c = -c
            shifted = nb.with_sector(shifted_sector)
            _acc_merge(out, _cre_schur(spec, mu, a, shifted), c)
    return out


# ---------------------------------------------------------------------------
# public operations (linear extensions over states)
# ---------------------------------------------------------------------------


def _lift(spec, state, basis_fn):
    out = State(spec)
    ctx = spec.ctx
    for (word, bv), c in state.terms.items():
        for nb, c2 in basis_fn(bv).items():
            out.add_term((word, nb), to_scalar(ctx, c * c2))
    return out


def pairing(spec, a, b):
    return spec.pairing(a, b)


def gen_mode(spec, name, n, state):
    """Exact mode action of a Heisenberg generator or beta-gamma field."""
    if isinstance(state, BasisVector):
        state = State.of_basis(spec, state)
    if spec.is_heis(name):
        combo = Exponent(((name, spec.ctx.one),))
        return _lift(spec, state, lambda bv: _heis_combo_mode(spec, combo, n, bv))
    if spec.is_bg(name):
        return _lift(spec, state, lambda bv: _bg_mode(spec, name, n, bv))
    raise FockError("unknown generator %r" % name)


def vertex_mode(spec, mu, n, state, window):
    """Exact projection to levels <= window.max_level of the mode action of
    the vertex operator e^mu."""
    if window is None:
        raise FockError("vertex_mode requires a Window")
    if isinstance(state, BasisVector):
        state = State.of_basis(spec, state)
    out = _lift(spec, state, lambda bv: _vertex_mode_basis(spec, mu, n, bv))
    return out.truncated(window)


def enumerate_basis(spec, sector, max_level):
    """All basis vectors of level <= max_level over the given sector, in a
    deterministic order."""
    if max_level < 0:
        raise FockError("max_level must be nonnegative")
    slots = [("heis", g) for g in spec.heis]
    for beta, gamma in spec.bg_pairs:
        slots.append(("bg_b", beta))
        slots.append(("bg_g", beta))

    vectors = []

    def rec(i, remaining, heis_acc, bg_acc):
        if i == len(slots):
            bg_merged = {}
            for kind, name, parts in bg_acc:
                b, g = bg_merged.get(name, ((), ()))
                if kind == "bg_b":
                    bg_merged[name] = (parts, g)
                else:
                    bg_merged[name] = (b, parts)
            bg_tuple = tuple(sorted((n, b, g) for n, (b, g) in bg_merged.items() if b or g))
            vectors.append(BasisVector(sector, tuple(sorted(heis_acc)), bg_tuple))
            return
        kind, name = slots[i]
        for w in range(0, remaining + 1):
            for parts in _partitions(w):
                if kind == "heis":
                    acc = heis_acc + ((name, parts),) if parts else heis_acc
                    rec(i + 1, remaining - w, acc, bg_acc)
                else:
                    acc = bg_acc + ((kind, name, parts),) if parts else bg_acc
                    rec(i + 1, remaining - w, heis_acc, acc)

    rec(0, max_level, (), ())
    vectors.sort(key=lambda bv: (bv.level, str(bv)))
    return vectors
