"""Weight modules of the double half-lattice space, the constructive
reduction of weight vectors to the top, singular-vector machinery, and the
vacuum-module simplicity probe.

The reduction follows the kill-order of the defining technical lemma: modes
of e2 = e^{c1} eliminate d1-partitions, e3 = e^{c2} eliminates d2-partitions,
positive modes of hbar = h1 + 2 h2 eliminate c2-partitions (in the basis
where c1 is traded for cbar = -c1 + c2), and modes of
e1 = (c1+d1)e^{-c1+c2}/2 eliminate cbar-partitions, shifting the sector into
pure powers of e^{c2}.  Each applied mode strictly decreases the staged
measure, the word is recorded, and replaying it through the mode engine
reproduces the output exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exact_linalg import nullspace
from .fock import BasisVector, Exponent, State
from .fields import (
    BGField, Current, NormOrd, Scale, Sum, Vertex, mode_apply_exact,
    state_of_field,
)
from .realize import (
    bp_highest_weight, level_probes, phi1_abstract, phi1_abstract_space,
    phi1_freefield, phi1_freefield_space, pi2_space, s_pi_space,
    SL3_GENERATORS,
)


class SectorsError(Exception):
    pass


@dataclass(frozen=True)
class PiModuleDesc:
    """The weight module over sectors r1 d1/2 + r2 d2/2 + lam1 c1 + lam2 c2.

    lam1/lam2 are Scalars (possibly symbolic); third_lattice admits lam2
    shifts by thirds for the simple-current extension of the second factor.
    """

    r1: int
    r2: int
    lam1: object
    lam2: object
    third_lattice: bool = False

    def sector(self, spec, l1=0, l2=0):
        half = Fraction(1, 2)
        return spec.exponent({"d1": self.r1 * half, "d2": self.r2 * half,
                              "c1": self.lam1 + l1, "c2": self.lam2 + l2})


@dataclass
class BHatBasis:
    """The four generators of the solvable current algebra acting on the
    half-lattice modules, as field expressions of a concrete space."""

    e1: object
    e2: object
    e3: object
    hbar: object

    def expr(self, name):
        return {"e1": self.e1, "e2": self.e2, "e3": self.e3, "hbar": self.hbar}[name]


def bhat_pi2(space):
    ctx = space.ctx
    k = ctx.var("k")
    spec = space.fock
    c1, d1, d2 = Current("c1"), Current("d1"), Current("d2")
    cbar = spec.exponent({"c1": -1, "c2": 1})
    return BHatBasis(
        e1=Scale(Fraction(1, 2), NormOrd(Sum(c1, d1), Vertex(cbar))),
        e2=Vertex(spec.exponent({"c1": 1})),
        e3=Vertex(spec.exponent({"c2": 1})),
        hbar=Sum(Scale((2 * k + 3) / 2, Current("c2")),
                 Scale(Fraction(3, 2), Sum(Scale(-1, c1), d1, d2))),
    )


def bhat_s_pi(space):
    ctx = space.ctx
    k = ctx.var("k")
    spec = space.fock
    beta, gamma = BGField("beta"), BGField("gamma")
    return BHatBasis(
        e1=Scale(-1, NormOrd(gamma, Vertex(spec.exponent({"c2": 1})))),
        e2=beta,
        e3=Vertex(spec.exponent({"c2": 1})),
        hbar=Sum(Scale(-3, NormOrd(gamma, beta)),
                 Scale((2 * k + 3) / 2, Current("c2")),
                 Scale(Fraction(3, 2), Current("d2"))),
    )


# ---------------------------------------------------------------------------
# reduction to the top
# ---------------------------------------------------------------------------


def _cbar_view(state):
    """Partition data of each term in the (cbar = -c1+c2, c2) coordinates:
    returns list of (coeff-is-nonzero marker, cbar_parts, c2_parts) maxima.

    Only the maxima matter for stage selection, but cancellations between
    expanded terms must be respected, so the full expansion is built."""
    view = {}
    for (word, bv), c in state.terms.items():
        base_cbar = ()
        c1parts = bv.heis_parts("c1")
        c2parts = bv.heis_parts("c2")
        # c1(-n) = c2(-n) - cbar(-n); expand multiplicatively
        expansions = [((), (), 1)]
        for n in c1parts:
            nxt = []
            for cb, c2x, sgn in expansions:
                nxt.append((cb, c2x + (n,), sgn))
                nxt.append((cb + (n,), c2x, -sgn))
            expansions = nxt
        for cb, c2x, sgn in expansions:
            key = (word, bv.sector, bv.heis_parts("d1"), bv.heis_parts("d2"),
                   tuple(sorted(base_cbar + cb, reverse=True)),
                   tuple(sorted(c2parts + c2x, reverse=True)), bv.bg)
            cur = view.get(key)
            val = c * sgn
            if cur is None:
                view[key] = val
            else:
                s = cur + val
                if s.is_zero:
                    del view[key]
                else:
                    view[key] = s
    return view


def _max_part(state, getter):
    mx = 0
    for (word, bv), _c in state.terms.items():
        parts = getter(bv)
        if parts and parts[0] > mx:
            mx = parts[0]
    return mx


def _max_bg_part(state, beta_name, which):
    mx = 0
    for (word, bv), _c in state.terms.items():
        bp, gp = bv.bg_parts(beta_name)
        parts = bp if which == "beta" else gp
        if parts and parts[0] > mx:
            mx = parts[0]
    return mx


def _is_top(state, native_bg=None):
    for (word, bv), _c in state.terms.items():
        if bv.heis:
            return False
        if bv.bg:
            return False
    return True


def reduce_to_top(space, bhat, state, desc, max_steps=400):
    """Drive a weight vector down to the top by b-hat modes.

    Returns (word, top_state): the word is a list of (generator-name,
    math-mode) pairs, leftmost applied first; replaying it with mode_apply
    on the input reproduces top_state exactly.
    """
    if state.is_zero:
        raise SectorsError("reduction of the zero vector")
    native = bool(space.fock.bg_pairs)
    word = []
    cur = state

    def apply_letter(name, mode):
        nonlocal cur
        word.append((name, mode))
        cur = mode_apply_exact(space, bhat.expr(name), mode, cur)
        if cur.is_zero:
            raise SectorsError("reduction stalled: %s(%d) killed the state" % (name, mode))

    for _step in range(max_steps):
        if native:
            m = _max_bg_part(cur, "beta", "gamma")
            if m > 0:
                apply_letter("e2", m - 1)
                continue
            s = _max_part(cur, lambda bv: bv.heis_parts("d2"))
            if s > 0:
                apply_letter("e3", s - 1 - desc.r2)
                continue
            s = _max_part(cur, lambda bv: bv.heis_parts("c2"))
            if s > 0:
                apply_letter("hbar", s)
                continue
            t = _max_bg_part(cur, "beta", "beta")
            if t > 1:
                apply_letter("hbar", t - 1)
                continue
            if t == 1:
                apply_letter("e1", -desc.r2)
                continue
            return word, cur
        # double half-lattice case
        s = _max_part(cur, lambda bv: bv.heis_parts("d1"))
        if s > 0:
            apply_letter("e2", s - 1 - desc.r1)
            continue
        s = _max_part(cur, lambda bv: bv.heis_parts("d2"))
        if s > 0:
            apply_letter("e3", s - 1 - desc.r2)
            continue
        view = _cbar_view(cur)
        max_c2 = max((v[5][0] for v in view if v[5]), default=0)
        if max_c2 > 0:
            apply_letter("hbar", max_c2)
            continue
        max_cbar = max((v[4][0] for v in view if v[4]), default=0)
        if max_cbar > 0:
            apply_letter("e1", max_cbar - (desc.r2 - desc.r1))
            continue
        return word, cur
    raise SectorsError("reduction did not terminate within %d steps" % max_steps)


def replay_word(space, bhat, word, state):
    """Apply a recorded reduction word through the mode engine."""
    cur = state
    for name, mode in word:
        cur = mode_apply_exact(space, bhat.expr(name), mode, cur)
    return cur


# ---------------------------------------------------------------------------
# singular vectors
# ---------------------------------------------------------------------------


@dataclass
class KLWeights:
    a: int
    b: int
    x: object
    y: object
    m1: object
    m2: object


def singular_weights(ctx, a, b):
    """Highest-weight data (x, y) of the reduced module attached to the
    dominant weight a w1 + b w2, and the two singular sector exponents."""
    k = ctx.var("k")
    third = ctx.rational(1, 3)
    x = (b - a) * third
    y = ((b - a) ** 2 - 3 * (a + b) * (2 * (k + 1) - a - b)) / (12 * (k + 3)) \
        - (b - a) * ctx.rational(1, 6)
    m1 = (a + 2 * b) * third
    m2 = (3 - 2 * a - b) * third + k
    return KLWeights(a, b, x, y, m1, m2)


def singular_residual(ctx, x, y, mbar):
    """The scalar by which f3(1) maps the candidate singular vector down one
    sector; the vector is singular iff this vanishes."""
    k = ctx.var("k")
    x = ctx.coerce(x)
    y = ctx.coerce(y)
    mbar = ctx.coerce(mbar)
    return (k + 3) * (y + x / 2) - (k + 1) / 2 * (x - 2 * mbar) \
        - x * (x - mbar) - mbar * mbar


@dataclass
class SingularReport:
    items: list = field(default_factory=list)

    @property
    def passed(self):
        return all(ok for _label, ok, _txt in self.items)

    def add(self, label, ok, txt=""):
        self.items.append((label, ok, txt))


def verify_singular(ctx, x, y, mbar, window=None):
    """Evaluate the raising modes on w = v (x) e^{mbar c2}, with v an
    abstract highest-weight vector of weight (x, y): f1(1) and f2(1) kill w
    unconditionally, f3(1) produces exactly singular_residual times
    v (x) e^{(mbar-1) c2}, and the solvable-part modes kill w."""
    x = ctx.coerce(x)
    y = ctx.coerce(y)
    mbar = ctx.coerce(mbar)
    space = phi1_abstract_space(ctx, hw=bp_highest_weight(ctx, x, y))
    dct = phi1_abstract(space)
    spec = space.fock
    w = State.sector(spec, spec.exponent({"c2": mbar}))
    target = State.sector(spec, spec.exponent({"c2": mbar - 1}))
    rep = SingularReport()

    r1 = mode_apply_exact(space, dct["f1"], 1, w)
    rep.add("f1(1) w = 0", r1.is_zero, str(r1))
    r2 = mode_apply_exact(space, dct["f2"], 1, w)
    rep.add("f2(1) w = 0", r2.is_zero, str(r2))
    r3 = mode_apply_exact(space, dct["f3"], 1, w)
    resid = singular_residual(ctx, x, y, mbar)
    diff = r3 - target.scaled(resid)
    rep.add("f3(1) w = residual * (v x e^{(mbar-1)c2})", diff.is_zero, str(diff))
    for i in ("e1", "e2", "e3"):
        r = mode_apply_exact(space, dct[i], 0, w)
        rep.add("%s(0) w = 0" % i, r.is_zero, str(r))
    hbar = Sum(dct["h1"], Scale(2, dct["h2"]))
    for n in (1, 2):
        r = mode_apply_exact(space, hbar, n, w)
        rep.add("hbar(%d) w = 0" % n, r.is_zero, str(r))
    # sl3 weight read off the Cartan zero modes
    h1w = mode_apply_exact(space, dct["h1"], 0, w)
    h2w = mode_apply_exact(space, dct["h2"], 0, w)
    rep.h1_eigen = h1w.coefficient(BasisVector(spec.exponent({"c2": mbar}), (), ()))
    rep.h2_eigen = h2w.coefficient(BasisVector(spec.exponent({"c2": mbar}), (), ()))
    rep.add("h1(0) eigenvector", (h1w - w.scaled(rep.h1_eigen)).is_zero)
    rep.add("h2(0) eigenvector", (h2w - w.scaled(rep.h2_eigen)).is_zero)
    return rep


def kl_top_dim(ctx, a, b):
    """Least i with h_i identically zero at the reduced weight of
    a w1 + b w2 equals a+1; the mirrored weight gives b+1."""
    from .relaxed import h_poly

    ctx_i = _with_var(ctx, "i")
    k = ctx_i.var("k")
    i = ctx_i.var("i")
    kl = singular_weights(ctx_i, a, b)
    hi = h_poly(ctx_i, i, kl.x, kl.y)
    want = (1 + a - i) * (b + i - k - 2)
    if not (hi - want).is_zero:
        raise SectorsError("h_i specialization mismatch at (a,b)=(%d,%d)" % (a, b))
    # dual side through x -> -x, y -> y + x
    hj = h_poly(ctx_i, i, -kl.x, kl.y + kl.x)
    want_dual = (1 + b - i) * (a + i - k - 2)
    if not (hj - want_dual).is_zero:
        raise SectorsError("dual h_i specialization mismatch")
    for j in range(1, a + 1):
        if h_poly(ctx_i, ctx_i.coerce(j), kl.x, kl.y).is_zero:
            raise SectorsError("h_%d vanished before a+1" % j)
    if not h_poly(ctx_i, ctx_i.coerce(a + 1), kl.x, kl.y).is_zero:
        raise SectorsError("h_{a+1} did not vanish")
    return a + 1


def _with_var(ctx, name):
    from .scalars import ScalarContext

    if name in ctx.names:
        return ctx
    return ScalarContext(ctx.names + (name,))


# ---------------------------------------------------------------------------
# vacuum-module simplicity probe
# ---------------------------------------------------------------------------


@dataclass
class SingularCandidate:
    level: int
    state_str: str
    pattern: str  # "vacuum" | "e3_power" | "other"


def _image_words(max_level):
    """Canonically ordered creation words in the eight currents with total
    level <= max_level (level-0 word excluded)."""
    gens = list(SL3_GENERATORS)
    words = []

    def rec(start, remaining, acc):
        if acc:
            words.append(tuple(acc))
        for gi in range(start, len(gens)):
            for n in range(1, remaining + 1):
                acc.append((gens[gi], -n))
                rec(gi, remaining - n, acc)
                acc.pop()

    rec(0, max_level, [])
    return [w for w in words if sum(-m for _g, m in w) <= max_level]


def vacuum_singular_probe(ctx, k_value, max_level=2):
    """Exhaustive search for singular vectors in the graded components of the
    realized vacuum module up to max_level, at an exact rational level k.

    Returns the list of candidate singular lines found; for k outside the
    nonnegative integers only the vacuum line survives, while at k in Z>=0
    the image of the e3-power vector shows up at level k+1.
    """
    k_value = Fraction(k_value)
    space = phi1_freefield_space(ctx)
    dct = phi1_freefield(space)
    vac = space.vacuum()

    words = [w for w in _image_words(max_level)]
    by_level = {}
    for wd in words:
        lvl = sum(-m for _g, m in wd)
        by_level.setdefault(lvl, []).append(wd)

    raising = [(g, n) for g in SL3_GENERATORS for n in (1, 2)] + \
        [("e1", 0), ("e2", 0), ("e3", 0)]

    found = [SingularCandidate(0, "vacuum line", "vacuum")]
    for lvl in range(1, max_level + 1):
        images = []
        for wd in by_level.get(lvl, ()):
            st = vac
            for g, m in reversed(wd):
                st = mode_apply_exact(space, dct[g], m, st)
            images.append(st)
        # raising-operator stack applied to each image, evaluated at k_value
        columns = {}
        rows = []
        for st in images:
            row = {}
            for ri, (g, n) in enumerate(raising):
                out = mode_apply_exact(space, dct[g], n, st)
                for key, c in out.terms.items():
                    cv = c.evaluate({"k": k_value})
                    if cv:
                        col = columns.setdefault((ri, key), len(columns))
                        row[col] = row.get(col, Fraction(0)) + cv
            rows.append(row)
        matrix = [[row.get(j, Fraction(0)) for j in range(len(columns))]
                  for row in rows]
        for coeffs in nullspace(matrix):
            vec = State(space.fock)
            for ci, c in enumerate(coeffs):
                if c:
                    vec.add_state(images[ci], factor=ctx.coerce(c))
            # evaluate the combination itself at k
            ev = State(space.fock)
            for key, c in vec.terms.items():
                cv = c.evaluate({"k": k_value})
                if cv:
                    ev.add_term(key, ctx.coerce(cv))
            if ev.is_zero:
                continue
            pattern = "other"
            if len(ev) == 1:
                ((word, bv), _c) = next(iter(ev.terms.items()))
                if not bv.heis and not bv.bg and not word:
                    l2 = bv.sector.get("c2", ctx)
                    if bv.sector == space.fock.exponent({"c2": l2.as_int() or 0}):
                        pattern = "e3_power"
            found.append(SingularCandidate(lvl, str(ev), pattern))
    return found
