import pytest

from freefield.scalars import ScalarContext
from freefield.fock import Exponent, State, Window
from freefield.fields import Current, Vertex, mode_apply_exact, state_of_field
from freefield.realize import (
    SL3, SL3_GENERATORS, bosonization_into_wakimoto, bp_freefield_space,
    bp_ope_table, bp_rho1, level_probes, phi0_dict, phi0_space,
    phi1_abstract, phi1_abstract_space, phi1_freefield, phi1_freefield_space,
    realization, substitute, verify_affine, verify_bp_ope, verify_factorization,
    verify_screening, verify_sugawara, wakimoto_rho0, wakimoto_space,
    zk_screening_eigen,
)


@pytest.fixture(scope="module")
def ctx():
    return ScalarContext(("k",))


def test_sl3_structure():
    assert SL3.bracket("e1", "f1") == {"h1": 1}
    assert SL3.bracket("e3", "f3") == {"h1": 1, "h2": 1}
    assert SL3.bracket("e1", "e2") == {"e3": 1}
    assert SL3.bracket("h1", "e2") == {"e2": -1}
    assert SL3.kappa("h1", "h1") == 2
    assert SL3.kappa("h1", "h2") == -1
    assert SL3.kappa("e2", "f2") == 1
    # Jacobi on a sample of triples
    import itertools
    for a, b, c in itertools.islice(itertools.product(SL3_GENERATORS, repeat=3), 0, 200, 7):
        total = {}
        for (x, y, z) in ((a, b, c), (b, c, a), (c, a, b)):
            inner = SL3.bracket(y, z)
            for g, coeff in inner.items():
                for g2, coeff2 in SL3.bracket(x, g).items():
                    total[g2] = total.get(g2, 0) + coeff * coeff2
        assert all(v == 0 for v in total.values())


def test_realization_factory_examples(ctx):
    phi1 = realization("phi1", ctx)
    spec = phi1.space.fock
    assert phi1["e2"] is Vertex(spec.exponent({"c1": 1}))
    with pytest.raises(Exception):
        realization("nope", ctx)


def test_wakimoto_affine_vacuum(ctx):
    space = wakimoto_space(ctx)
    dct = wakimoto_rho0(space)
    probes = [level_probes(space, Exponent.zero(), 0)[0]]
    rep = verify_affine(dct, probes, mode_range=(-1, 1))
    assert rep.passed, rep.summary()


def test_wakimoto_affine_level1_spot(ctx):
    space = wakimoto_space(ctx)
    dct = wakimoto_rho0(space)
    probes = level_probes(space, Exponent.zero(), 1)
    rep = verify_affine(dct, probes, mode_range=(-1, 1),
                        pairs=[("e1", "f1"), ("h1", "h2"), ("e3", "f3"), ("f1", "f2")])
    assert rep.passed, rep.summary()


def test_wakimoto_f3_parse_left_fails(ctx):
    # the alternative bracketing of the ambiguous f3 monomial breaks the
    # relations; only the right-nested parse can pass
    space = wakimoto_space(ctx)
    dct = wakimoto_rho0(space, f3_parse="left")
    probes = [level_probes(space, Exponent.zero(), 0)[0]]
    rep = verify_affine(dct, probes, mode_range=(-1, 1), pairs=[("e1", "f3")])
    assert not rep.passed


def test_bg_sign_convention_is_forced(ctx):
    # flipping beta(z)gamma(w) ~ 1/(z-w) breaks the Wakimoto relations
    import freefield.fock as fockmod
    old = fockmod.BG_SIGN
    fockmod.BG_SIGN = -1
    try:
        space = wakimoto_space(ScalarContext(("k", "_flip")))
        dct = wakimoto_rho0(space)
        probes = [level_probes(space, Exponent.zero(), 0)[0]]
        rep = verify_affine(dct, probes, mode_range=(-1, 1), pairs=[("h1", "e2")])
        assert not rep.passed
    finally:
        fockmod.BG_SIGN = old


def test_phi1_affine_vacuum():
    ctx = ScalarContext(("k", "lam1", "lam2"))
    space = phi1_freefield_space(ctx)
    dct = phi1_freefield(space)
    probes = [level_probes(space, Exponent.zero(), 0)[0]]
    rep = verify_affine(dct, probes, mode_range=(-1, 1))
    assert rep.passed, rep.summary()


def test_phi1_affine_weight_sector_spot():
    # the sector e^{-d1/2-d2/2+lam1 c1+lam2 c2} with symbolic lam1, lam2
    ctx = ScalarContext(("k", "lam1", "lam2"))
    space = phi1_freefield_space(ctx)
    dct = phi1_freefield(space)
    from fractions import Fraction
    sec = space.fock.exponent({"d1": Fraction(-1, 2), "d2": Fraction(-1, 2),
                               "c1": ctx.var("lam1"), "c2": ctx.var("lam2")})
    probes = [State.sector(space.fock, sec)]
    rep = verify_affine(dct, probes, mode_range=(-1, 1),
                        pairs=[("e1", "f1"), ("e2", "f2"), ("e3", "f3"), ("h1", "f3")])
    assert rep.passed, rep.summary()


def test_phi1_f3_matches_bracket(ctx):
    # with the derivative correction, f3 equals the 0-th product f2_(0) f1
    space = phi1_freefield_space(ctx)
    dct = phi1_freefield(space)
    f1_state = state_of_field(space, dct["f1"])
    want = mode_apply_exact(space, dct["f2"], 0, f1_state)
    assert (state_of_field(space, dct["f3"]) - want).is_zero


def test_phi1_abstract_matches_freefield_on_pi_part(ctx):
    # h-lines and e-lines agree between the abstract and realized variants
    a = phi1_abstract(phi1_abstract_space(ctx))
    f = phi1_freefield(phi1_freefield_space(ctx))
    assert a["e2"] is f["e2"] and a["e3"] is f["e3"] and a["e1"] is f["e1"]


def test_bp_ope_suite(ctx):
    rep = verify_bp_ope(ctx, mode_range=(-1, 1), probe_level=1)
    assert rep.passed, rep.summary()


def test_bp_central_values(ctx):
    k = ctx.var("k")
    table = bp_ope_table(ctx)
    from freefield.fields import _Scale
    jj = table.singular("J", "J")[1]
    assert isinstance(jj, _Scale) and jj.coeff == (2 * k + 3) / 3
    gg = table.singular("Gp", "Gm")
    assert gg[2].coeff == (k + 1) * (2 * k + 3)
    ll = table.singular("L", "L")
    assert ll[3].coeff == -(2 * k + 3) * (3 * k + 1) / (2 * (k + 3))


def test_sugawara_phi1(ctx):
    rep = verify_sugawara(ctx, which="phi1", mode_range=(-1, 1), probe_level=0)
    assert rep.passed, rep.summary()


def test_pi2_virasoro_central(ctx):
    rep = verify_sugawara(ctx, which="pi2", mode_range=(-1, 1), probe_level=1)
    assert rep.passed, rep.summary()


def test_screening(ctx):
    rep = verify_screening(ctx, mode_range=(-2, 2), probe_level=1)
    assert rep.passed, rep.summary()


def test_zk_screening_eigen(ctx):
    k = ctx.var("k")
    t0, w0 = zk_screening_eigen(ctx)
    assert t0 == (4 * k + 9) / 3
    assert w0 == -(k + 3) * (4 * k + 9) * (5 * k + 12) / 27
    from fractions import Fraction
    assert t0.evaluate({"k": 0}) == 3


def test_factorization(ctx):
    rep = verify_factorization(ctx, mode_range=(-1, 1), probe_level=0, window=None)
    assert rep.passed, rep.summary()


def test_phi0_affine_abstract_spot(ctx):
    space = phi0_space(ctx)
    dct = phi0_dict(space)
    probes = [level_probes(space, Exponent.zero(), 0)[0]]
    rep = verify_affine(dct, probes, mode_range=(-1, 1),
                        pairs=[("e2", "f2"), ("f1", "f2"), ("f3", "f3")])
    assert rep.passed, rep.summary()
