"""Explicit sl3 actions on top components of relaxed modules, representation
checks, and irreducibility certificates.

Two families of top components are implemented:

* the infinite case: basis v[n, m, p] over integers, built from a
  weight-(w, Delta) vector of the weight-2/weight-3 W-algebra tensored with
  the half-lattice tops;
* the finite case: basis w[i, m, p] with 0 <= i <= N-1, built from a
  highest-weight vector of weight (x, y) whose top is N-dimensional
  (h_N(x, y) = 0).

Index shifts n, m, p are carried relative to a symbolic anchor, so a single
symbolic check of a commutation relation covers every interior lattice
point.  f3 acts by the commutator [f2, f1] in the finite case, exactly as
the action table prescribes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exact_linalg import rank, rref
from .realize import SL3, SL3_GENERATORS
from .scalars import Scalar, ScalarContext, ScalarError


class RelaxedError(Exception):
    pass


def p_poly(ctx, w, delta, xbar):
    """The cubic controlling the zero-mode action on the infinite top:
    w - (k+2)(k+3) Delta + [(k+3) Delta - 2(k+2)^2] x + 3(k+2) x^2 - x^3."""
    k = ctx.var("k")
    w = ctx.coerce(w)
    delta = ctx.coerce(delta)
    x = ctx.coerce(xbar)
    return w - (k + 2) * (k + 3) * delta + ((k + 3) * delta - 2 * (k + 2) ** 2) * x \
        + 3 * (k + 2) * x * x - x ** 3


def h_poly(ctx, i, x, y):
    """Zhu-algebra polynomial h_i(x, y) with
    G-(0) G+(0)^i v = h_i(x, y) G+(0)^{i-1} v."""
    k = ctx.var("k")
    i = ctx.coerce(i)
    x = ctx.coerce(x)
    y = ctx.coerce(y)
    return -i * i + k * i - 3 * x * i + 3 * i - 3 * x * x - k + 2 * k * x \
        + 6 * x + k * y + 3 * y - 2


@dataclass
class InfiniteTopParams:
    """Symbolic or rational data of the infinite-top module: the anchor bars
    nbar = n + lam, mbar = m + lam1, pbar = p + lam2 and the weight (w, Delta).
    k_value pins the level to an exact rational for the number-theoretic
    hypothesis clauses; None leaves it symbolic."""

    ctx: ScalarContext
    w: object
    delta: object
    nbar: object
    mbar: object
    pbar: object
    k_value: object = None

    def __post_init__(self):
        self.w = self.ctx.coerce(self.w)
        self.delta = self.ctx.coerce(self.delta)
        self.nbar = self.ctx.coerce(self.nbar)
        self.mbar = self.ctx.coerce(self.mbar)
        self.pbar = self.ctx.coerce(self.pbar)
        if self.k_value is not None:
            self.k_value = Fraction(self.k_value)


@dataclass
class FiniteTopParams:
    """Data of the finite-top module: x with h_N(x, y) = 0 defining y, and
    the anchor bars mbar, pbar."""

    ctx: ScalarContext
    x: object
    N: int
    mbar: object
    pbar: object
    y: object = None
    k_value: object = None

    def __post_init__(self):
        if self.k_value is not None:
            self.k_value = Fraction(self.k_value)
        ctx = self.ctx
        self.x = ctx.coerce(self.x)
        self.mbar = ctx.coerce(self.mbar)
        self.pbar = ctx.coerce(self.pbar)
        if self.N < 1:
            raise RelaxedError("N must be a positive integer")
        if self.y is None:
            # solve h_N(x, y) = 0 for y: the coefficient of y is k+3
            k = ctx.var("k")
            i = ctx.coerce(self.N)
            x = self.x
            num = i * i - k * i + 3 * x * i - 3 * i + 3 * x * x + k - 2 * k * x - 6 * x + 2
            self.y = num / (k + 3)
        else:
            self.y = ctx.coerce(self.y)
            if not h_poly(ctx, self.N, self.x, self.y).is_zero:
                raise RelaxedError("h_N(x, y) != 0: inconsistent finite-top data")


class TopState:
    """Finite combination of top basis vectors indexed by integer offsets
    from the anchor: keys (dn, dm, dp) for the infinite family, (i, dm, dp)
    with absolute first index for the finite family."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx, terms=None):
        self.ctx = ctx
        self.terms = terms or {}

    @staticmethod
    def basis(ctx, key):
        s = TopState(ctx)
        s.terms[key] = ctx.one
        return s

    def add(self, key, coeff):
        if coeff.is_zero:
            return
        cur = self.terms.get(key)
        if cur is None:
            self.terms[key] = coeff
        else:
            s = cur + coeff
            if s.is_zero:
                del self.terms[key]
            else:
                self.terms[key] = s

    def __sub__(self, other):
        out = TopState(self.ctx, dict(self.terms))
        for key, c in other.terms.items():
            out.add(key, -c)
        return out

    @property
    def is_zero(self):
        return not self.terms

    def __str__(self):
        if not self.terms:
            return "0"
        return "  +  ".join("(%s) v[%s]" % (c.serialize(), ",".join(map(str, k)))
                            for k, c in sorted(self.terms.items()))


def act_infinite(ctx, g, state, params):
    """One sl3 generator acting on an infinite-top combination."""
    if isinstance(state, tuple):
        state = TopState.basis(ctx, state)
    k = ctx.var("k")
    half = ctx.rational(1, 2)
    c56 = 5 * (2 * k + 3) / 6
    c89 = (8 * k + 9) / 6
    c23 = 2 * (2 * k + 3) / 3
    out = TopState(ctx)
    for (dn, dm, dp), coeff in state.terms.items():
        nb = params.nbar + dn
        mb = params.mbar + dm
        pb = params.pbar + dp
        if g == "e1":
            out.add((dn, dm - 1, dp + 1), coeff * (mb - half))
        elif g == "e2":
            out.add((dn, dm + 1, dp), coeff)
        elif g == "e3":
            out.add((dn, dm, dp + 1), coeff)
        elif g == "h1":
            out.add((dn, dm, dp), coeff * (-2 * nb - (mb - half) + pb + c56))
        elif g == "h2":
            out.add((dn, dm, dp), coeff * (nb + 2 * mb + pb - c89))
        elif g == "f1":
            out.add((dn + 1, dm, dp), coeff)
            out.add((dn, dm + 1, dp - 1), coeff * (-(2 * nb - pb - c56)))
        elif g == "f2":
            out.add((dn - 1, dm, dp - 1), coeff * p_poly(ctx, params.w, params.delta, nb))
            out.add((dn, dm - 1, dp), coeff * (mb - half) * (c23 - nb - mb - pb))
        elif g == "f3":
            pnb = p_poly(ctx, params.w, params.delta, nb)
            pnb1 = p_poly(ctx, params.w, params.delta, nb + 1)
            A = pnb1 - pnb - (2 * nb - pb - c56) * (c23 - nb - mb - pb)
            out.add((dn, dm, dp - 1), coeff * A)
            out.add((dn + 1, dm - 1, dp), coeff * (-(mb - half)))
            out.add((dn - 1, dm + 1, dp - 2), coeff * (-pnb))
        else:
            raise RelaxedError("unknown generator %r" % g)
    return out


def act_finite(ctx, g, state, params):
    """One sl3 generator acting on a finite-top combination; the first index
    is absolute in [0, N-1] and the boundary rows of f1 and f2 drop their
    out-of-range term.  f3 acts as the commutator [f2, f1]."""
    if isinstance(state, tuple):
        state = TopState.basis(ctx, state)
    if g == "f3":
        a = act_finite(ctx, "f2", act_finite(ctx, "f1", state, params), params)
        b = act_finite(ctx, "f1", act_finite(ctx, "f2", state, params), params)
        return a - b
    k = ctx.var("k")
    half = ctx.rational(1, 2)
    c56 = 5 * (2 * k + 3) / 6
    c89 = (8 * k + 9) / 6
    c23 = 2 * (2 * k + 3) / 3
    N = params.N
    x = params.x
    out = TopState(ctx)
    for (i, dm, dp), coeff in state.terms.items():
        if i < 0 or i >= N:
            raise RelaxedError("index %d outside the top row range" % i)
        mb = params.mbar + dm
        pb = params.pbar + dp
        xi = x + i
        if g == "e1":
            out.add((i, dm - 1, dp + 1), coeff * (mb - half))
        elif g == "e2":
            out.add((i, dm + 1, dp), coeff)
        elif g == "e3":
            out.add((i, dm, dp + 1), coeff)
        elif g == "h1":
            out.add((i, dm, dp), coeff * (-2 * xi - (mb - half) + pb + c56))
        elif g == "h2":
            out.add((i, dm, dp), coeff * (xi + 2 * mb + pb - c89))
        elif g == "f1":
            if i <= N - 2:
                out.add((i + 1, dm, dp), coeff)
            out.add((i, dm + 1, dp - 1), coeff * (-(2 * xi - pb - c56)))
        elif g == "f2":
            if i >= 1:
                out.add((i - 1, dm, dp - 1),
                        coeff * h_poly(ctx, ctx.coerce(i), x, params.y))
            out.add((i, dm - 1, dp), coeff * (mb - half) * (c23 - xi - mb - pb))
        else:
            raise RelaxedError("unknown generator %r" % g)
    return out


# ---------------------------------------------------------------------------
# representation check
# ---------------------------------------------------------------------------


@dataclass
class RepReport:
    name: str
    items: list = field(default_factory=list)

    @property
    def passed(self):
        return all(ok for _label, ok, _txt in self.items)

    def add(self, label, ok, txt=""):
        self.items.append((label, ok, txt))


def check_representation(params, which="infinite", report=None, pairs=None):
    """Every commutator [g, g'] acts as the bracket: checked symbolically in
    the anchor bars (and in all module parameters), which covers the interior
    of any index box at once.  For the finite family the row index is swept
    explicitly through [0, N-1], covering the boundary rules."""
    ctx = params.ctx
    rep = report or RepReport(name="relaxed representation (%s)" % which)
    act = act_infinite if which == "infinite" else act_finite
    gen_pairs = pairs or [(a, SL3_GENERATORS[j])
                          for ia, a in enumerate(SL3_GENERATORS)
                          for j in range(ia, len(SL3_GENERATORS))]
    if which == "infinite":
        bases = [(0, 0, 0)]
    else:
        bases = [(i, 0, 0) for i in range(params.N)]
    for a, b in gen_pairs:
        bracket = SL3.bracket(a, b)
        for base in bases:
            lhs = act(ctx, a, act(ctx, b, base, params), params) \
                - act(ctx, b, act(ctx, a, base, params), params)
            for g, c in bracket.items():
                gs = act(ctx, g, base, params)
                for key, coeff in gs.terms.items():
                    lhs.add(key, -(coeff * c))
            rep.add("[%s, %s] at %s" % (a, b, base), lhs.is_zero, str(lhs))
    return rep


def check_representation_box(params, which, box=4, pairs=None, report=None):
    """Concrete-index variant: commutators checked on every interior point
    of the cube [-box, box]^3 (interior = two-step orbits stay inside);
    boundary points are flagged as skipped, not failed."""
    ctx = params.ctx
    rep = report or RepReport(name="relaxed representation box (%s)" % which)
    act = act_infinite if which == "infinite" else act_finite
    gen_pairs = pairs or [("e1", "f1"), ("e2", "f2"), ("e3", "f3"), ("f1", "f2")]
    margin = 4  # f3 moves up to two steps; two-step orbits need 4
    pts = range(-box, box + 1)
    skipped = 0
    for a, b in gen_pairs:
        bracket = SL3.bracket(a, b)
        for dn in pts:
            for dm in pts:
                for dp in pts:
                    if max(abs(dn), abs(dm), abs(dp)) > box - margin:
                        skipped += 1
                        continue
                    base = (dn, dm, dp)
                    lhs = act(ctx, a, act(ctx, b, base, params), params) \
                        - act(ctx, b, act(ctx, a, base, params), params)
                    for g, c in bracket.items():
                        for key, coeff in act(ctx, g, base, params).terms.items():
                            lhs.add(key, -(coeff * c))
                    rep.add("[%s,%s]@%s" % (a, b, base), lhs.is_zero, str(lhs))
    rep.add("boundary points flagged (skipped, not failed): %d" % skipped, True)
    return rep


# ---------------------------------------------------------------------------
# centralizer matrices and the irreducibility certificate
# ---------------------------------------------------------------------------


def centralizer_matrices(params, anchor=(0, 0)):
    """Matrices of u1 = e1 f1 and u2 = e2 f2 on the weight line
    Z_i = w[i, m-i, p+i], i = 0..N-1, through the action tables."""
    ctx = params.ctx
    N = params.N
    m0, p0 = anchor
    u1 = [[ctx.zero] * N for _ in range(N)]
    u2 = [[ctx.zero] * N for _ in range(N)]
    for i in range(N):
        z = (i, m0 - i, p0 + i)
        for mat, first, second in ((u1, "f1", "e1"), (u2, "f2", "e2")):
            out = act_finite(ctx, second, act_finite(ctx, first, z, params), params)
            for (j, dm, dp), c in out.terms.items():
                if (dm, dp) != (m0 - j, p0 + j):
                    raise RelaxedError("centralizer left the weight line")
                mat[j][i] = c
    return u1, u2


@dataclass
class Certificate:
    status: str  # "true" | "false" | "indeterminate"
    witness: str = ""

    def __bool__(self):
        return self.status == "true"


def _mat_mul(A, B, zero):
    n = len(A)
    return [[sum((A[i][l] * B[l][j] for l in range(n)),
                 start=zero) for j in range(n)] for i in range(n)]


def irreducibility_certificate(params, anchor=(0, 0), check_hypotheses=True):
    """True iff the unital algebra generated by the centralizer matrices acts
    irreducibly: every basis vector is cyclic and the generated algebra has
    full dimension N^2.  Returns indeterminate when a hypothesis of the
    finite-top lemma fails (as the certificate then proves nothing)."""
    ctx = params.ctx
    N = params.N
    if check_hypotheses:
        hyp = hypothesis_check_finite(params)
        if hyp.ok is None:
            return Certificate("indeterminate", hyp.failing or "symbolic parameters")
        if not hyp.ok:
            return Certificate("indeterminate", "hypothesis violated: %s" % hyp.failing)
    u1, u2 = centralizer_matrices(params, anchor)
    if params.k_value is not None:
        kv = params.k_value
        u1 = [[Fraction(c.evaluate({"k": kv})) for c in row] for row in u1]
        u2 = [[Fraction(c.evaluate({"k": kv})) for c in row] for row in u2]
        zero, one = Fraction(0), Fraction(1)
    else:
        zero, one = ctx.zero, ctx.one
    ident = [[one if i == j else zero for j in range(N)] for i in range(N)]

    # algebra closure: span of words in u1, u2
    def flat(M):
        return [M[i][j] for i in range(N) for j in range(N)]

    basis_rows = []
    basis_mats = []

    def insert(M):
        row = flat(M)
        cand = basis_rows + [row]
        if rank(cand) > len(basis_rows):
            basis_rows.append(row)
            basis_mats.append(M)
            return True
        return False

    for M in (ident, u1, u2):
        insert(M)
    frontier = list(basis_mats)
    while frontier and len(basis_rows) < N * N:
        nxt = []
        for M in frontier:
            for G in (u1, u2):
                P = _mat_mul(M, G, zero)
                if insert(P):
                    nxt.append(P)
        frontier = nxt
    algebra_dim = len(basis_rows)
    if algebra_dim < N * N:
        return Certificate("false", "algebra dimension %d < %d" % (algebra_dim, N * N))

    # cyclicity of each coordinate vector
    for i in range(N):
        vecs = [[one if j == i else zero for j in range(N)]]
        grown = True
        while grown and rank(vecs) < N:
            grown = False
            for v in list(vecs):
                for G in (u1, u2):
                    w = [sum((G[r][c] * v[c] for c in range(N)), start=zero)
                         for r in range(N)]
                    if rank(vecs + [w]) > rank(vecs):
                        vecs.append(w)
                        grown = True
        if rank(vecs) < N:
            return Certificate("false", "basis vector %d is not cyclic" % i)
    return Certificate("true", "algebra dimension %d, all %d basis vectors cyclic"
                       % (algebra_dim, N))


# ---------------------------------------------------------------------------
# hypothesis checks
# ---------------------------------------------------------------------------


@dataclass
class HypothesisResult:
    ok: object  # True | False | None (indeterminate)
    failing: str = None


def _as_rational(scalar):
    if isinstance(scalar, Scalar):
        return scalar.as_fraction()
    return Fraction(scalar)


def _not_integer(value, clause):
    """Clause 'value not in Z'; value a Fraction."""
    if value.denominator == 1:
        return HypothesisResult(False, "%s (hits zero at integer shift %s)" % (clause, value))
    return None


def _integer_roots(coeffs):
    """Integer roots of a polynomial given by Fraction coefficients
    [a_0, a_1, ...]; uses the rational root theorem on the cleared form."""
    from math import gcd

    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    while ints and ints[-1] == 0:
        ints.pop()
    if not ints:
        return ["all integers"]
    roots = []
    # strip n^v factor
    v = 0
    while ints[v] == 0:
        v += 1
    if v > 0:
        roots.append(0)
    a0 = abs(ints[v])
    divisors = set()
    d = 1
    while d * d <= a0:
        if a0 % d == 0:
            divisors.update((d, a0 // d))
        d += 1
    for cand in sorted(divisors):
        for r in (cand, -cand):
            val = 0
            for c in reversed(ints):
                val = val * r + c
            if val == 0:
                roots.append(r)
    return sorted(set(roots))


def hypothesis_check(params, which):
    """Decide the 'for all integers' nonvanishing clauses of the named
    statement at exact rational parameter values; symbolic parameters give
    an indeterminate result."""
    if which == "conj-1":
        return hypothesis_check_infinite(params)
    if which in ("thm-N1", "lemma-cent"):
        return hypothesis_check_finite(params, n1_only=(which == "thm-N1"))
    raise RelaxedError("unknown hypothesis set %r" % which)


def hypothesis_check_infinite(params):
    """Clauses of the infinite-top irreducibility conjecture:
    p(nbar) != 0, mbar - 1/2 != 0, 2 nbar - pbar - 5(2k+3)/6 != 0 and
    2(2k+3)/3 - nbar - mbar - pbar != 0 for all integer shifts."""
    kv = params.k_value
    if kv is None:
        return HypothesisResult(None, "level k left symbolic")
    lam = _eval_at_k(params.nbar, kv)
    lam1 = _eval_at_k(params.mbar, kv)
    lam2 = _eval_at_k(params.pbar, kv)
    wv = _eval_at_k(params.w, kv)
    dv = _eval_at_k(params.delta, kv)
    if None in (lam, lam1, lam2, wv, dv):
        return HypothesisResult(None, "symbolic parameters left unevaluated")
    bad = _not_integer(lam1 - Fraction(1, 2), "mbar - 1/2 != 0")
    if bad:
        return bad
    bad = _not_integer(2 * lam - lam2 - Fraction(5, 6) * (2 * kv + 3),
                       "2 nbar - pbar - 5(2k+3)/6 != 0")
    if bad:
        return bad
    bad = _not_integer(Fraction(2, 3) * (2 * kv + 3) - lam - lam1 - lam2,
                       "2(2k+3)/3 - nbar - mbar - pbar != 0")
    if bad:
        return bad
    # integer-root search for p(n + lam)
    coeffs = _poly_in_n(params, kv, lam, wv, dv)
    roots = _integer_roots(coeffs)
    if roots:
        return HypothesisResult(False, "p(nbar) != 0 fails at n = %s" % roots[0])
    return HypothesisResult(True)


def _eval_at_k(scalar, kv):
    """Exact value of a parameter scalar at a rational level; None when
    other symbols remain."""
    try:
        return scalar.specialize({"k": kv}).as_fraction()
    except (ScalarError, ZeroDivisionError):
        return None


def _poly_in_n(params, kv, lam, wv, dv):
    """Coefficients of p(n + lam) as a polynomial in the integer n."""
    kq = Fraction(kv)
    # p(x) = w - (k+2)(k+3)D + [(k+3)D - 2(k+2)^2] x + 3(k+2) x^2 - x^3
    c0 = wv - (kq + 2) * (kq + 3) * dv
    c1 = (kq + 3) * dv - 2 * (kq + 2) ** 2
    c2 = 3 * (kq + 2)
    c3 = Fraction(-1)
    # substitute x = n + lam
    a0 = c0 + c1 * lam + c2 * lam ** 2 + c3 * lam ** 3
    a1 = c1 + 2 * c2 * lam + 3 * c3 * lam ** 2
    a2 = c2 + 3 * c3 * lam
    a3 = c3
    return [a0, a1, a2, a3]


def hypothesis_check_finite(params, n1_only=False):
    """Hypotheses of the finite-top irreducibility statements: h_N(x,y) = 0
    (structural), h_j(x,y) != 0 for 0 < j < N, and the three integer-shift
    clauses in (mbar, pbar, x)."""
    ctx = params.ctx
    kv = params.k_value
    if kv is None:
        return HypothesisResult(None, "level k left symbolic")
    xv = _eval_at_k(params.x, kv)
    lam1 = _eval_at_k(params.mbar, kv)
    lam2 = _eval_at_k(params.pbar, kv)
    if xv is None or lam1 is None or lam2 is None:
        return HypothesisResult(None, "symbolic parameters left unevaluated")
    if not n1_only:
        for j in range(1, params.N):
            hj = h_poly(ctx, ctx.coerce(j), params.x, params.y)
            if hj.evaluate({"k": kv}) == 0:
                return HypothesisResult(False, "h_%d(x, y) != 0" % j)
    bad = _not_integer(lam1 - Fraction(1, 2), "mbar - 1/2 != 0")
    if bad:
        return bad
    bad = _not_integer(2 * xv - lam2 - Fraction(5, 6) * (2 * kv + 3),
                       "2x - pbar - 5(2k+3)/6 != 0")
    if bad:
        return bad
    bad = _not_integer(Fraction(2, 3) * (2 * kv + 3) - xv - lam1 - lam2,
                       "2(2k+3)/3 - x - mbar - pbar != 0")
    if bad:
        return bad
    return HypothesisResult(True)


def random_admissible_finite(N, rng, kv=None):
    """A random rational parameter draw satisfying the finite-top lemma
    hypotheses; the level is also drawn rationally unless given."""
    ctx = ScalarContext(("k",))
    for _attempt in range(400):
        kq = kv if kv is not None else \
            Fraction(rng.randint(-20, 20), rng.choice([2, 5, 7])) + Fraction(1, 3)
        if kq == -3:
            continue
        xq = Fraction(rng.randint(-9, 9), rng.choice([2, 3, 5])) + Fraction(1, 7)
        lam1 = Fraction(rng.randint(-6, 6), 1) + Fraction(rng.choice([1, 2, 3]), 7)
        lam2 = Fraction(rng.randint(-6, 6), 1) + Fraction(rng.choice([1, 2, 4]), 9)
        try:
            params = FiniteTopParams(ctx, xq, N, lam1, lam2, k_value=kq)
        except (ZeroDivisionError, RelaxedError):
            continue
        hyp = hypothesis_check_finite(params)
        if hyp.ok:
            return params
    raise RelaxedError("no admissible draw found")
