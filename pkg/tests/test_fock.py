import random
from fractions import Fraction

import pytest

from freefield.scalars import ScalarContext
from freefield.fock import (
    AlgebraSpec, BasisVector, Exponent, FockError, State, Window,
    enumerate_basis, gen_mode, pairing, vertex_mode,
)


@pytest.fixture(scope="module")
def ctx():
    return ScalarContext(("k", "lam1", "lam2"))


@pytest.fixture(scope="module")
def pi2(ctx):
    # two coupled (c, d) pairs: <c_i, d_j> = 2 delta_ij, all else zero
    gram = {("c1", "d1"): 2, ("c2", "d2"): 2}
    return AlgebraSpec(ctx, ("c1", "d1", "c2", "d2"), gram,
                       lattice=("c1", "c2"), name="pi2")


@pytest.fixture(scope="module")
def bp_space(ctx):
    k = ctx.var("k")
    gram = {("at1", "at1"): 2 * (k + 3), ("at1", "at2"): -(k + 3),
            ("at2", "at2"): 2 * (k + 3)}
    return AlgebraSpec(ctx, ("at1", "at2"), gram, bg_pairs=(("bt", "gt"),),
                       name="bp")


@pytest.fixture(scope="module")
def xy_space(ctx):
    gram = {("x", "x"): 1, ("y", "y"): -1}
    return AlgebraSpec(ctx, ("x", "y"), gram, lattice=("x", "y"), name="xy")


def weight_sector(spec, r1, r2, l1, l2):
    ctx = spec.ctx
    half = ctx.rational(1, 2)
    return spec.exponent({"d1": r1 * half, "d2": r2 * half, "c1": l1, "c2": l2})


def test_pairing_examples(pi2, ctx):
    lam1 = ctx.var("lam1")
    c1 = pi2.exponent({"c1": 1})
    mu = pi2.exponent({"d1": ctx.rational(-1, 2), "c1": lam1})
    assert pairing(pi2, c1, mu) == -1


def test_pairing_xy(xy_space):
    xpy = xy_space.exponent({"x": 1, "y": 1})
    assert pairing(xy_space, xpy, xpy).is_zero


def test_pairing_tilde_alpha2(ctx):
    # oracle: expand <a2 - (k+3)(x+y), same> with the combined Gram
    k = ctx.var("k")
    gram = {("a1", "a1"): 2 * (k + 3), ("a1", "a2"): -(k + 3), ("a2", "a2"): 2 * (k + 3),
            ("x", "x"): 1, ("y", "y"): -1}
    spec = AlgebraSpec(ctx, ("a1", "a2", "x", "y"), gram, lattice=("x", "y"))
    at2 = spec.exponent({"a2": 1, "x": -(k + 3), "y": -(k + 3)})
    assert pairing(spec, at2, at2) == 2 * (k + 3)


def test_zero_mode_on_sector(pi2, ctx):
    lam1, lam2 = ctx.var("lam1"), ctx.var("lam2")
    sec = weight_sector(pi2, -1, -1, lam1, lam2)
    s = State.sector(pi2, sec)
    out = gen_mode(pi2, "c1", 0, s)
    assert out == s.scaled(-1)


def test_commutator_c1_d1(pi2):
    vac = State.vacuum(pi2)
    s = gen_mode(pi2, "c1", 1, gen_mode(pi2, "d1", -1, vac))
    assert s == vac.scaled(2)


def test_positive_modes_kill_vacuum(pi2):
    vac = State.vacuum(pi2)
    for g in ("c1", "d2"):
        for n in (0, 1, 2):
            assert gen_mode(pi2, g, n, vac).is_zero


def test_heisenberg_commutator_law(pi2):
    # [g(m), h(n)] = m delta_{m+n,0} <g,h> on sampled states
    rng = random.Random(5)
    basis = enumerate_basis(pi2, Exponent.zero(), 2)
    for _ in range(30):
        g, h = rng.choice(pi2.heis), rng.choice(pi2.heis)
        m, n = rng.randint(-2, 2), rng.randint(-2, 2)
        bv = rng.choice(basis)
        s = State.of_basis(pi2, bv)
        lhs = gen_mode(pi2, g, m, gen_mode(pi2, h, n, s)) - \
            gen_mode(pi2, h, n, gen_mode(pi2, g, m, s))
        expected = State.zero(pi2)
        if m + n == 0 and m != 0:
            central = pi2.gram(g, h) * m
            expected = s.scaled(central)
        assert (lhs - expected).is_zero


def test_bg_commutator_law(bp_space):
    # [beta(m), gamma(n)] = delta_{m+n+1,0} with the adopted sign
    rng = random.Random(6)
    basis = enumerate_basis(bp_space, Exponent.zero(), 2)
    for _ in range(30):
        m, n = rng.randint(-2, 2), rng.randint(-2, 2)
        bv = rng.choice(basis)
        s = State.of_basis(bp_space, bv)
        lhs = gen_mode(bp_space, "bt", m, gen_mode(bp_space, "gt", n, s)) - \
            gen_mode(bp_space, "gt", n, gen_mode(bp_space, "bt", m, s))
        expected = s if m + n + 1 == 0 else State.zero(bp_space)
        assert (lhs - expected).is_zero


def test_level_bookkeeping(pi2):
    basis = enumerate_basis(pi2, Exponent.zero(), 3)
    for bv in basis:
        for g in pi2.heis:
            for n in (-2, -1, 1, 2):
                out = gen_mode(pi2, g, n, State.of_basis(pi2, bv))
                for (_, nb) in out.terms:
                    assert nb.level == bv.level - n


def test_vertex_creation_axiom(pi2):
    vac = State.vacuum(pi2)
    c2 = pi2.exponent({"c2": 1})
    w = Window(4)
    out = vertex_mode(pi2, c2, -1, vac, w)
    assert out == State.sector(pi2, c2)
    for n in (0, 1, 2):
        assert vertex_mode(pi2, c2, n, vac, w).is_zero


def test_vertex_on_shifted_sector(pi2, ctx):
    # (e^{c2})_(-1-r) e^{r d2/2} = e^{r d2/2 + c2} exactly at the leading level
    c2 = pi2.exponent({"c2": 1})
    for r in (1, 2, 3):
        sec = weight_sector(pi2, 0, r, 0, 0)
        out = vertex_mode(pi2, c2, -1 - r, State.sector(pi2, sec), Window(5))
        assert out == State.sector(pi2, sec + c2)


def test_vertex_window_consistency(pi2, ctx):
    # results for nested windows agree on the smaller window
    c2 = pi2.exponent({"c2": 1})
    sec = weight_sector(pi2, -1, -1, 0, 0)
    st = gen_mode(pi2, "d2", -2, gen_mode(pi2, "c2", -1, State.sector(pi2, sec)))
    small = vertex_mode(pi2, c2, 0, st, Window(1))
    large = vertex_mode(pi2, c2, 0, st, Window(4))
    assert large.truncated(Window(1)) == small


def test_vertex_sector_additivity(pi2):
    vac = State.vacuum(pi2)
    c1 = pi2.exponent({"c1": 1})
    c2 = pi2.exponent({"c2": 1})
    out = vertex_mode(pi2, c1, -1, vertex_mode(pi2, c2, -1, vac, Window(6)), Window(6))
    for (_, bv) in out.terms:
        assert bv.sector == c1 + c2


def test_vertex_requires_window(pi2):
    with pytest.raises(FockError):
        vertex_mode(pi2, pi2.exponent({"c2": 1}), -1, State.vacuum(pi2), None)


def test_vertex_nonintegral_pairing_raises(pi2, ctx):
    lam2 = ctx.var("lam2")
    # pairing <c2, lam2*d2> = 2*lam2 is not an integer
    sec = pi2.exponent({"d2": lam2})
    with pytest.raises(FockError):
        vertex_mode(pi2, pi2.exponent({"c2": 1}), -1, State.sector(pi2, sec), Window(2))


def test_enumerate_basis_counts(pi2, ctx):
    lam1, lam2 = ctx.var("lam1"), ctx.var("lam2")
    sec = weight_sector(pi2, 0, 0, lam1, lam2)
    assert len(enumerate_basis(pi2, sec, 0)) == 1
    lvl1 = [bv for bv in enumerate_basis(pi2, sec, 1) if bv.level == 1]
    assert len(lvl1) == 4
    one = AlgebraSpec(ctx, ("h",), {("h", "h"): 2})
    lvl3 = [bv for bv in enumerate_basis(one, Exponent.zero(), 3) if bv.level == 3]
    assert len(lvl3) == 3  # partitions of 3


def test_enumerate_deterministic(pi2):
    a = enumerate_basis(pi2, Exponent.zero(), 2)
    b = enumerate_basis(pi2, Exponent.zero(), 2)
    assert [str(x) for x in a] == [str(x) for x in b]


def test_cocycle_sign():
    ctx = ScalarContext(("k",))
    gram = {("x", "x"): 1, ("y", "y"): -1}
    # B(mu, nu) = (mu_x + mu_y) * nu_x
    coc = {("x", "x"): 1, ("y", "x"): 1}
    spec = AlgebraSpec(ctx, ("x", "y"), gram, lattice=("x", "y"), cocycle=coc)
    x = spec.exponent({"x": 1})
    xpy = spec.exponent({"x": 1, "y": 1})
    # trivial on the (x+y) sublattice
    assert spec.cocycle_sign(xpy, xpy) == 1
    assert spec.cocycle_sign(xpy, xpy.scale(spec.ctx.coerce(3))) == 1
    # odd between the screening exponent and odd multiples of x+y
    assert spec.cocycle_sign(x, xpy) == -1
    assert spec.cocycle_sign(x, xpy + xpy) == 1


def test_basisvector_serialization(pi2):
    bv = BasisVector(pi2.exponent({"c1": 1}), (("d1", (2, 1)),), ())
    assert str(bv) == "e^{c1} ; d1:[2, 1]"
