"""Field expressions, exact windowed mode application, OPE-derived mode
brackets, and a highest-weight rewriting evaluator for nonlinear mode algebras.

A FieldExpr is a tree over current atoms, beta-gamma atoms, vertex operators
e^mu, derivatives, binary normal-ordered products, scalar multiples and sums.
Multi-factor normal products :ABC...: parse right-nested, matching the
state-field dictionary A_(-1)(B_(-1)C...).

Mode application uses, in math modes A(z) = sum A_(n) z^(-n-1):

    (dA)_(n)      = -n A_(n-1)
    (A_(-1)B)_(n) = sum_{j<=-1} A_(j) B_(n-1-j) + sum_{j>=0} B_(n-1-j) A_(j)
    [A_(m),B_(n)] = sum_{j>=0} binom(m,j) (A_(j)B)_(m+n-j)

with generalized binomials for negative m.  Every sum above is finite on any
fixed state; the Window argument of the public entry points only projects the
exact result.

A Space may carry an abstract tensor factor: a module over a nonlinear mode
algebra given by an OPETable and highest-weight data.  Atoms whose names
belong to the abstract factor act by PBW straightening: annihilation modes
are commuted rightward using the table brackets until they reach the highest
weight vector and reduce by the HWData.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fock import (
    AlgebraSpec, BasisVector, EMPTY_WORD, Exponent, FockError, State, Window,
    _bg_mode, _heis_combo_mode, _vertex_mode_basis,
)
from sympy import QQ

from .scalars import MPQ, Scalar, ScalarError, to_scalar

_RAW_ONE = QQ(1)


class FieldsError(Exception):
    pass


# ---------------------------------------------------------------------------
# expression AST (hash-consed, normalized)
# ---------------------------------------------------------------------------

_POOL: dict = {}


class FieldExpr:
    __slots__ = ("key", "_hash")

    def _init(self, key):
        object.__setattr__(self, "key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, *a):
        raise AttributeError("FieldExpr is immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __add__(self, other):
        return Sum(self, other)

    def __sub__(self, other):
        return Sum(self, Scale(-1, other))

    def __neg__(self):
        return Scale(-1, self)

    def __repr__(self):
        return serialize_expr(self)


class _Current(FieldExpr):
    __slots__ = ("name",)


class _BGField(FieldExpr):
    __slots__ = ("name",)


class _Vertex(FieldExpr):
    __slots__ = ("exponent",)


class _Ident(FieldExpr):
    __slots__ = ()


class _Deriv(FieldExpr):
    __slots__ = ("arg",)


class _NormOrd(FieldExpr):
    __slots__ = ("left", "right")


class _Scale(FieldExpr):
    __slots__ = ("coeff", "arg")


class _Sum(FieldExpr):
    __slots__ = ("parts",)


class _ZeroBracket(FieldExpr):
    """The field Y(A_(0)B, z); its modes are the commutators [A_(0), B_(n)]."""
    __slots__ = ("left", "right")


def _intern(key, cls, **attrs):
    obj = _POOL.get(key)
    if obj is None:
        obj = object.__new__(cls)
        for k, v in attrs.items():
            object.__setattr__(obj, k, v)
        obj._init(key)
        _POOL[key] = obj
    return obj


def Current(name):
    return _intern(("cur", name), _Current, name=name)


def BGField(name):
    return _intern(("bg", name), _BGField, name=name)


def Vertex(exponent):
    return _intern(("vx", exponent), _Vertex, exponent=exponent)


def Ident():
    return _intern(("one",), _Ident)


ZERO = _intern(("sum", ()), _Sum, parts=())


def Sum(*parts):
    flat = []
    for p in parts:
        if isinstance(p, _Sum):
            flat.extend(p.parts)
        elif p is not None:
            flat.append(p)
    flat = [p for p in flat if p is not ZERO]
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return _intern(("sum", tuple(flat)), _Sum, parts=tuple(flat))


def Scale(coeff, arg):
    # coeff may be an int/Fraction at build time; spaces coerce on use.
    if arg is ZERO:
        return ZERO
    if isinstance(coeff, Scalar) and coeff.is_zero:
        return ZERO
    if coeff == 0:
        return ZERO
    if coeff == 1:
        return arg
    if isinstance(arg, _Sum):
        return Sum(*[Scale(coeff, p) for p in arg.parts])
    if isinstance(arg, _Scale):
        return Scale(coeff * arg.coeff, arg.arg)
    return _intern(("sc", coeff, arg), _Scale, coeff=coeff, arg=arg)


def Deriv(arg):
    if arg is ZERO:
        return ZERO
    if isinstance(arg, _Sum):
        return Sum(*[Deriv(p) for p in arg.parts])
    if isinstance(arg, _Scale):
        return Scale(arg.coeff, Deriv(arg.arg))
    if isinstance(arg, _Ident):
        return ZERO
    return _intern(("d", arg), _Deriv, arg=arg)


def NormOrd(left, right):
    if left is ZERO or right is ZERO:
        return ZERO
    if isinstance(left, _Sum):
        return Sum(*[NormOrd(p, right) for p in left.parts])
    if isinstance(right, _Sum):
        return Sum(*[NormOrd(left, p) for p in right.parts])
    if isinstance(left, _Scale):
        return Scale(left.coeff, NormOrd(left.arg, right))
    if isinstance(right, _Scale):
        return Scale(right.coeff, NormOrd(left, right.arg))
    if isinstance(left, _Ident):
        return right
    if isinstance(right, _Ident):
        return left
    return _intern(("no", left, right), _NormOrd, left=left, right=right)


def ZeroBracket(left, right):
    if left is ZERO or right is ZERO:
        return ZERO
    return _intern(("zb", left, right), _ZeroBracket, left=left, right=right)


def normord_chain(*factors):
    """Right-nested multi-factor normal product :A B C ...:."""
    if not factors:
        return Ident()
    expr = factors[-1]
    for f in reversed(factors[:-1]):
        expr = NormOrd(f, expr)
    return expr


def serialize_expr(expr):
    if isinstance(expr, _Current) or isinstance(expr, _BGField):
        return expr.name
    if isinstance(expr, _Vertex):
        return "V[%s]" % expr.exponent
    if isinstance(expr, _Ident):
        return "1"
    if isinstance(expr, _Deriv):
        return "d(%s)" % serialize_expr(expr.arg)
    if isinstance(expr, _NormOrd):
        return ":%s %s:" % (serialize_expr(expr.left), serialize_expr(expr.right))
    if isinstance(expr, _Scale):
        c = expr.coeff.serialize() if isinstance(expr.coeff, Scalar) else str(expr.coeff)
        return "(%s)*%s" % (c, serialize_expr(expr.arg))
    if isinstance(expr, _Sum):
        if not expr.parts:
            return "0"
        return "+".join(serialize_expr(p) for p in expr.parts)
    if isinstance(expr, _ZeroBracket):
        return "[%s_0, %s]" % (serialize_expr(expr.left), serialize_expr(expr.right))
    raise FieldsError("unknown expr %r" % (expr,))


# ---------------------------------------------------------------------------
# OPE tables and highest-weight data
# ---------------------------------------------------------------------------


class OPETable:
    """Pairwise singular-part data: entries[(A, B)] = (c_1, ..., c_p) with c_j
    the coefficient of (z-w)^{-j} in A(z)B(w); equivalently A_(j-1)B = c_j.

    weights[name] is the conformal weight used for the physics <-> math mode
    translation A_phys(n) = A_(n + weight - 1).
    """

    def __init__(self, ctx, weights, entries):
        self.ctx = ctx
        self.weights = dict(weights)
        self.entries = {pair: tuple(coeffs) for pair, coeffs in entries.items()}

    def names(self):
        return set(self.weights)

    def singular(self, a, b):
        try:
            return self.entries[(a, b)]
        except KeyError:
            raise FieldsError("OPE pair (%s, %s) missing from table" % (a, b)) from None

    def coeff(self, a, b, j):
        """A_(j) B as a FieldExpr (zero beyond the pole order)."""
        sing = self.singular(a, b)
        if j < 0 or j >= len(sing):
            return ZERO
        return sing[j]

    def with_transposes(self):
        """Fill every missing reversed pair by skew-symmetry:
        B_(j)A = sum_{i>=0} (-1)^(j+i+1) d^i(A_(j+i)B) / i!."""
        out = dict(self.entries)
        for (a, b), coeffs in self.entries.items():
            if (b, a) in out:
                continue
            p = len(coeffs)
            rev = []
            for j in range(p):
                terms = []
                fact = 1
                for i in range(0, p - j):
                    if i > 1:
                        fact *= i
                    c = coeffs[j + i]  # c_{j+i+1} = A_(j+i)B
                    if c is ZERO:
                        continue
                    e = c
                    for _ in range(i):
                        e = Deriv(e)
                    terms.append(Scale(self.ctx.rational((-1) ** (j + i + 1), fact), e))
                rev.append(Sum(*terms))
            while rev and rev[-1] is ZERO:
                rev.pop()
            out[(b, a)] = tuple(rev)
        return OPETable(self.ctx, self.weights, out)


def bracket_modes(table, a, b, m, n):
    """[A_(m), B_(n)] as a finite combination [(Scalar, expr, mode), ...]."""
    ctx = table.ctx
    sing = table.singular(a, b)
    out = []
    binom = ctx.one
    for j in range(len(sing)):
        if j > 0:
            binom = binom * ctx.rational(m - (j - 1), j)
        if sing[j] is ZERO or binom.is_zero:
            continue
        coeff, expr = binom, sing[j]
        if isinstance(expr, _Scale):
            coeff, expr = coeff * ctx.coerce(expr.coeff), expr.arg
        out.append((coeff, expr, m + n - j))
    return out


class HWData:
    """Zero-mode eigenvalues and the annihilation law of a highest-weight
    vector, in physics mode indexing.

    kill_from[name] = least physics mode that annihilates; eigen[(name, n)]
    gives the scalar by which a non-killed mode acts.  Modes below both are
    creation letters of the PBW basis.
    """

    def __init__(self, eigen, kill_from):
        self.eigen = dict(eigen)
        self.kill_from = dict(kill_from)
        self.reduce_from = {}
        for name, kf in self.kill_from.items():
            lo = kf
            for (n2, p) in self.eigen:
                if n2 == name:
                    lo = min(lo, p)
            self.reduce_from[name] = lo
        for (name, p) in self.eigen:
            if p >= self.kill_from[name]:
                raise FieldsError("eigen mode (%s, %d) lies in the killed range" % (name, p))

    def annihilates(self, name, phys):
        return phys >= self.kill_from[name]


class AbstractModule:
    """A highest-weight module over the mode algebra of an OPETable."""

    def __init__(self, table, hw):
        self.table = table
        self.hw = hw
        self.rank = {name: i for i, name in enumerate(sorted(table.weights))}

    def weight(self, name):
        return self.table.weights[name]

    def letter_level(self, name, math_mode):
        return (self.weight(name) - 1) - math_mode

    def kept(self, name, math_mode):
        phys = math_mode - (self.weight(name) - 1)
        return phys < self.hw.reduce_from[name]

    def letter_key(self, name, math_mode):
        return (math_mode, self.rank[name])


def vacuum_hw(names):
    """Vacuum-type highest weight data: every nonnegative physics mode kills."""
    return HWData({}, {n: 0 for n in names})


class Space:
    """A working space: a Fock AlgebraSpec, optionally tensored with an
    abstract highest-weight factor whose currents are named atoms."""

    def __init__(self, fock_spec, abstract=None):
        self.fock = fock_spec
        self.abstract = abstract
        self.ctx = fock_spec.ctx
        self._memo = {}
        self._letter_memo = {}
        self._delta_cache = {}
        self._depth_guard = 0

    def is_abstract_name(self, name):
        return self.abstract is not None and name in self.abstract.table.weights

    def total_level(self, key):
        word, bv = key
        lvl = bv.level
        if word:
            for name, m in word:
                lvl += self.abstract.letter_level(name, m)
        return lvl

    def vacuum(self):
        return State.vacuum(self.fock)

    def sector_state(self, exponent, word=EMPTY_WORD):
        return State.of_basis(self.fock, BasisVector(exponent, (), ()), word=word)

    def clear_caches(self):
        self._memo.clear()
        self._letter_memo.clear()
        self._delta_cache.clear()


def pure_space(spec):
    return Space(spec)


# ---------------------------------------------------------------------------
# the exact mode engine
# ---------------------------------------------------------------------------

_MAX_DEPTH = 3000


def _merge(out, items, factor):
    if not factor:
        return
    trivial = factor == 1
    for key, c in items.items():
        val = c if trivial else c * factor
        cur = out.get(key)
        if cur is None:
            out[key] = val
        else:
            s = cur + val
            if not s:
                del out[key]
            else:
                out[key] = s


def expr_shift(expr):
    """Total sector shift of an expression (must be unambiguous)."""
    if isinstance(expr, (_Current, _BGField, _Ident)):
        return Exponent.zero()
    if isinstance(expr, _Vertex):
        return expr.exponent
    if isinstance(expr, _Deriv):
        return expr_shift(expr.arg)
    if isinstance(expr, _Scale):
        return expr_shift(expr.arg)
    if isinstance(expr, _NormOrd):
        return expr_shift(expr.left) + expr_shift(expr.right)
    if isinstance(expr, _Sum):
        shifts = {expr_shift(p) for p in expr.parts}
        if len(shifts) == 1:
            return shifts.pop()
        raise FieldsError("mixed sector shifts in summands")
    if isinstance(expr, _ZeroBracket):
        return expr_shift(expr.left) + expr_shift(expr.right)
    raise FieldsError("unknown expr %r" % (expr,))


def _delta_lo(space, expr, sector):
    """Integer floor datum: X_(j) kills every state of level l in the given
    sector whenever l - j - delta < 0."""
    cache = space._delta_cache
    hit = cache.get((expr, sector))
    if hit is not None:
        return hit
    val = _delta_lo_raw(space, expr, sector)
    cache[(expr, sector)] = val
    return val


def _delta_lo_raw(space, expr, sector):
    if isinstance(expr, _Current):
        if space.is_abstract_name(expr.name):
            return 1 - space.abstract.weight(expr.name)
        return 0
    if isinstance(expr, _BGField):
        # level change of a beta/gamma mode m is -m (creation) or -m-1
        # (annihilation); 0 is the floor that stays safe under composition
        return 0
    if isinstance(expr, _Ident):
        return 1
    if isinstance(expr, _Vertex):
        p = space.fock.pairing(expr.exponent, sector)
        n = p.as_int()
        if n is None:
            raise FockError("non-integral pairing <%s, %s>" % (expr.exponent, sector))
        return 1 + n
    if isinstance(expr, _Deriv):
        return _delta_lo(space, expr.arg, sector) - 1
    if isinstance(expr, _Scale):
        return _delta_lo(space, expr.arg, sector)
    if isinstance(expr, _NormOrd):
        return (_delta_lo(space, expr.left, sector + expr_shift(expr.right))
                + _delta_lo(space, expr.right, sector) - 1)
    if isinstance(expr, _ZeroBracket):
        return (_delta_lo(space, expr.left, sector + expr_shift(expr.right))
                + _delta_lo(space, expr.right, sector))
    if isinstance(expr, _Sum):
        return min(_delta_lo(space, p, sector) for p in expr.parts)
    raise FieldsError("unknown expr %r" % (expr,))


def _ann_bound(space, expr, key):
    """Largest mode j for which expr_(j) might act nonzero on the key, as far
    as annihilation reach is concerned (creation modes are never cut).  Exact
    for atoms; composites fall back to the total-level floor."""
    word, bv = key
    if isinstance(expr, _Current):
        name = expr.name
        if space.is_abstract_name(name):
            lvl = 0
            for lname, m in word:
                lvl += space.abstract.letter_level(lname, m)
            return lvl + space.abstract.weight(name) - 1
        row = space.fock.gram_row(name)
        return max(0, space.fock.paired_maxpart(row, bv))
    if isinstance(expr, _BGField):
        beta, gamma, kind = space.fock._bg_by_field[expr.name]
        bp, gp = bv.bg_parts(beta)
        parts = gp if kind == "beta" else bp
        return (parts[0] - 1) if parts else -1
    if isinstance(expr, _Vertex):
        mu = expr.exponent
        lp = space.fock.paired_level(space.fock.exp_row(mu), bv)
        p = space.fock.pairing(mu, bv.sector)
        npair = p.as_int()
        if npair is None:
            raise FockError("non-integral pairing <%s, %s>" % (mu, bv.sector))
        return lp - npair - 1
    if isinstance(expr, _Ident):
        return -1
    if isinstance(expr, _Deriv):
        return _ann_bound(space, expr.arg, key) + 1
    if isinstance(expr, _Scale):
        return _ann_bound(space, expr.arg, key)
    if isinstance(expr, _Sum):
        if not expr.parts:
            return -1
        return max(_ann_bound(space, p, key) for p in expr.parts)
    return space.total_level(key) - _delta_lo(space, expr, bv.sector)


def _core_apply(space, expr, n, key):
    """Exact mode action of a normalized expression on one (word, basis)
    key; returns dict key -> Scalar."""
    memo_key = (expr, n, key)
    hit = space._memo.get(memo_key)
    if hit is not None:
        return hit
    space._depth_guard += 1
    if space._depth_guard > _MAX_DEPTH:
        raise FieldsError("mode recursion exceeded the grading-guard depth")
    try:
        word, bv = key
        ctx = space.ctx
        if isinstance(expr, _Sum):
            out = {}
            for p in expr.parts:
                _merge(out, _core_apply(space, p, n, key), _RAW_ONE)
        elif isinstance(expr, _Scale):
            coeff = ctx.coerce(expr.coeff).raw()
            out = {}
            _merge(out, _core_apply(space, expr.arg, n, key), coeff)
        elif isinstance(expr, _Current):
            if space.is_abstract_name(expr.name):
                out = _letter_apply(space, expr.name, n, key)
            else:
                combo = Exponent(((expr.name, ctx.one),))
                out = {(word, nb): c
                       for nb, c in _heis_combo_mode(space.fock, combo, n, bv).items()}
        elif isinstance(expr, _BGField):
            out = {(word, nb): c for nb, c in _bg_mode(space.fock, expr.name, n, bv).items()}
        elif isinstance(expr, _Vertex):
            out = {(word, nb): c
                   for nb, c in _vertex_mode_basis(space.fock, expr.exponent, n, bv).items()}
        elif isinstance(expr, _Ident):
            out = {key: _RAW_ONE} if n == -1 else {}
        elif isinstance(expr, _Deriv):
            out = {}
            if n != 0:
                _merge(out, _core_apply(space, expr.arg, n - 1, key), ctx.coerce(-n))
        elif isinstance(expr, _NormOrd):
            out = _normord_apply(space, expr, n, key)
        elif isinstance(expr, _ZeroBracket):
            out = {}
            for key2, c2 in _core_apply(space, expr.right, n, key).items():
                _merge(out, _core_apply(space, expr.left, 0, key2), c2)
            for key2, c2 in _core_apply(space, expr.left, 0, key).items():
                _merge(out, _core_apply(space, expr.right, n, key2), -c2)
        else:
            raise FieldsError("unknown expr %r" % (expr,))
    finally:
        space._depth_guard -= 1
    space._memo[memo_key] = out
    return out


def _apply_to_dict(space, expr, n, items):
    out = {}
    for key, c in items.items():
        _merge(out, _core_apply(space, expr, n, key), c)
    return out


def _normord_apply(space, expr, n, key):
    A, B = expr.left, expr.right
    out = {}
    one = _RAW_ONE
    # sum over j >= 0: B_(n-1-j) A_(j)
    jmax = _ann_bound(space, A, key)
    for j in range(0, jmax + 1):
        mid = _core_apply(space, A, j, key)
        if not mid:
            continue
        _merge(out, _apply_to_dict(space, B, n - 1 - j, mid), one)
    # sum over j <= -1: A_(j) B_(n-1-j); B_(n-1-j) dies beyond B's reach
    jmin = n - 1 - _ann_bound(space, B, key)
    for j in range(-1, jmin - 1, -1):
        mid = _core_apply(space, B, n - 1 - j, key)
        if not mid:
            continue
        _merge(out, _apply_to_dict(space, A, j, mid), one)
    return out


# -- abstract-factor letter straightening -----------------------------------


def _letter_apply(space, name, m, key):
    """Apply the abstract mode (name, m) to one key and return the normalized
    result as dict key -> Scalar."""
    memo_key = (name, m, key)
    hit = space._letter_memo.get(memo_key)
    if hit is not None:
        return hit
    mod = space.abstract
    hw = mod.hw
    ctx = space.ctx
    word, bv = key
    out = {}
    if space.total_level(key) + mod.letter_level(name, m) < 0:
        space._letter_memo[memo_key] = out
        return out
    if not word:
        phys = m - (mod.weight(name) - 1)
        if hw.annihilates(name, phys):
            pass
        elif (name, phys) in hw.eigen:
            out = {key: hw.eigen[(name, phys)].raw()}
        else:
            out = {(((name, m),), bv): _RAW_ONE}
    else:
        head = word[0]
        tail = word[1:]
        if mod.kept(name, m) and mod.letter_key(name, m) <= mod.letter_key(*head):
            out = {(((name, m),) + word, bv): _RAW_ONE}
        else:
            # X H = H X + [X, H]
            inner = _letter_apply(space, name, m, (tail, bv))
            for (w2, bv2), c in inner.items():
                _merge(out, _letter_apply(space, head[0], head[1], (w2, bv2)), c)
            for coeff, cexpr, mode in bracket_modes(mod.table, name, head[0], m, head[1]):
                res = _core_apply(space, cexpr, mode, (tail, bv))
                _merge(out, res, coeff)
    space._letter_memo[memo_key] = out
    return out


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def mode_apply(space, expr, n, state, window):
    """Exact projection onto levels <= window.max_level of the mode action."""
    if window is None:
        raise FieldsError("mode_apply requires a Window")
    out = mode_apply_exact(space, expr, n, state)
    return out.truncated(window, level_of=space.total_level)


def mode_apply_exact(space, expr, n, state):
    if isinstance(state, BasisVector):
        state = State.of_basis(space.fock, state)
    acc = {}
    for key, c in state.terms.items():
        _merge(acc, _core_apply(space, expr, n, key), c.raw())
    ctx = space.ctx
    return State(space.fock, {k: to_scalar(ctx, v) for k, v in acc.items()})


def apply_mode_combination(space, combo, state):
    """Apply a finite combination [(Scalar, expr, mode), ...] to a state."""
    out = State(space.fock)
    for coeff, expr, mode in combo:
        out.add_state(mode_apply_exact(space, expr, mode, state), factor=coeff)
    return out


@dataclass
class CheckItem:
    label: str
    modes: tuple
    probe: str
    residual: str
    ok: bool


@dataclass
class CheckReport:
    name: str
    items: list = field(default_factory=list)
    conventions: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(it.ok for it in self.items)

    def add(self, label, modes, probe, residual_state):
        self.items.append(CheckItem(label, modes, probe, str(residual_state),
                                    residual_state.is_zero))

    def summary(self):
        bad = [it for it in self.items if not it.ok]
        return "%s: %d checks, %d failed" % (self.name, len(self.items), len(bad))


def check_commutator(space, X, Y, expected, mode_pairs, probes, window=None,
                     label="", report=None):
    """Residuals of [X_m, Y_n] - expected on each probe; pass iff all vanish.

    expected: callable (m, n) -> combination [(Scalar, expr, mode), ...] or
    None for zero.
    """
    rep = report if report is not None else CheckReport(name=label or "commutator")
    ctx = space.ctx
    for probe in probes:
        ptxt = str(probe)
        for (m, n) in mode_pairs:
            acc = {}
            for key, c in probe.terms.items():
                craw = c.raw()
                for key2, c2 in _core_apply(space, Y, n, key).items():
                    _merge(acc, _core_apply(space, X, m, key2), craw * c2)
                for key2, c2 in _core_apply(space, X, m, key).items():
                    _merge(acc, _core_apply(space, Y, n, key2), -(craw * c2))
            exp = expected(m, n) if expected is not None else None
            if exp:
                for coeff, expr, mode in exp:
                    for key, c in probe.terms.items():
                        _merge(acc, _core_apply(space, expr, mode, key),
                               -(c.raw() * coeff.raw()))
            r = State(space.fock, {k: to_scalar(ctx, v) for k, v in acc.items()})
            if window is not None:
                r = r.truncated(window, level_of=space.total_level)
            rep.add(label, (m, n), ptxt, r)
    return rep


def hw_evaluate(space, word, depth=None):
    """Apply a word of (name, physics-mode) pairs to the highest weight
    vector of the space's abstract factor, in PBW normal form.

    Entries act in the written order: the first entry is the outermost
    operator.  Returns the resulting State; depth (a Window) truncates the
    reported level.
    """
    if space.abstract is None:
        raise FieldsError("hw_evaluate needs a space with an abstract factor")
    state = space.vacuum()
    for name, phys in reversed(list(word)):
        math_mode = phys + (space.abstract.weight(name) - 1)
        state = mode_apply_exact(space, Current(name), math_mode, state)
    if depth is not None:
        state = state.truncated(depth, level_of=space.total_level)
    return state


def state_to_expr(spec, bv):
    """The field whose state (its (-1)-mode on the vacuum) is the given basis
    vector: nested normal products of derivative currents over e^{sector}."""
    factors = []
    for gname, parts in bv.heis:
        for p in parts:
            factors.append(_deriv_factor(spec, Current(gname), p))
    for bname, bparts, gparts in bv.bg:
        beta, gamma = next(pr for pr in spec.bg_pairs if pr[0] == bname)
        for p in bparts:
            factors.append(_deriv_factor(spec, BGField(beta), p))
        for p in gparts:
            factors.append(_deriv_factor(spec, BGField(gamma), p))
    if not bv.sector.is_zero():
        factors.append(Vertex(bv.sector))
    return normord_chain(*factors)


def _deriv_factor(spec, atom, part):
    expr = atom
    fact = 1
    for i in range(1, part):
        expr = Deriv(expr)
        fact *= i
    return Scale(spec.ctx.rational(1, fact), expr)


def state_of_field(space, expr):
    """The state corresponding to a field: expr_(-1) applied to the vacuum."""
    return mode_apply_exact(space, expr, -1, space.vacuum())
