import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bostconnes import bcdata, qsmrep
from bostconnes.bcdata import Datum, Embedding, QmodZ, WeilCycElem, PairElem, GermElem
from bostconnes.errors import LatticeMismatch, LevelTooSmall
from bostconnes.qsmrep import (BasisIdx, Mu, MuStar, S, TruncSpec, W, Representation, Relation, word)

F = Fraction
BC = Datum("qmodz")
W4 = Datum("weil", 4)
ALG = Datum("alg_num_model", generators=(2, 3))
LEVEL = 720


def qz(x):
    return QmodZ(F(x))


def small(d, n_max=24, depth=8, R=None):
    return TruncSpec.for_datum(d, n_max, depth, R)


# -- operators

def test_mu_shifts_label():
    rep = Representation(BC, trunc=small(BC))
    assert qsmrep.op_mu(rep, 2).image(BasisIdx(3)) == {BasisIdx(6): 1}


def test_mu_star_weil():
    rep = Representation(W4, trunc=small(W4, 8, 8))
    # q^-1 = sqrt(q)^-2, and alpha(2) = 2 doubles the exponent on the way down
    got = qsmrep.op_mu_star(rep, 2).image(BasisIdx(2, (-2,)))
    assert got == {BasisIdx(1, (-4,)): 1}


def test_mu_star_kills_non_multiples():
    rep = Representation(BC, trunc=small(BC))
    assert qsmrep.op_mu_star(rep, 2).image(BasisIdx(3)) == {}


def test_weight_operator():
    rep = Representation(W4, trunc=small(W4, 8, 8))
    assert qsmrep.op_weight(rep, 1.5).entry(BasisIdx(3, (-1,)), BasisIdx(3, (-1,))) == pytest.approx(1.5 ** 3)
    # W(sqrt q) = W(2) through the lattice exponent vector
    assert qsmrep.op_weight(rep, (1,)).entry(BasisIdx(3, (-1,)), BasisIdx(3, (-1,))) == pytest.approx(8.0)


def test_s_phase_bc():
    rep = Representation(BC, Embedding(12), small(BC))
    v = qsmrep.op_s(rep, qz("1/3")).entry(BasisIdx(2), BasisIdx(2))
    assert v == pytest.approx(cmath.exp(2j * math.pi * 2 / 3))


def test_s_of_weight_shifts_lattice():
    rep = Representation(W4, Embedding(24), small(W4, 8, 8))
    img = qsmrep.op_s(rep, WeilCycElem(qz(0), -1, 4)).image(BasisIdx(2, (0,)))
    assert img == {BasisIdx(2, (-1,)): pytest.approx(2.0 ** (-2))}


def test_weight_needs_lattice():
    rep = Representation(BC, trunc=small(BC))
    with pytest.raises(LatticeMismatch):
        rep.apply(word(W((1,))))


def test_level_too_small():
    rep = Representation(BC, Embedding(4), small(BC))
    with pytest.raises(LevelTooSmall):
        rep.apply(word(S(qz("1/3"))))


# -- Hamiltonian

def test_hamiltonian_bc():
    rep = Representation(BC, trunc=small(BC))
    assert qsmrep.hamiltonian(rep).entry(BasisIdx(5), BasisIdx(5)) == pytest.approx(math.log(5))


def test_hamiltonian_weil():
    rep = Representation(W4, trunc=small(W4, 8, 8))
    H = qsmrep.hamiltonian(rep)
    assert H.entry(BasisIdx(2, (-2,)), BasisIdx(2, (-2,))).real == pytest.approx(2 * math.log(4) + math.log(2))
    assert H.entry(BasisIdx(1, (0,)), BasisIdx(1, (0,))) == 0


@pytest.mark.parametrize("d", [BC, W4, ALG, Datum("weil_hat", 4)], ids=str)
def test_hamiltonian_kernel_is_vacuum(d):
    rep = Representation(d, trunc=small(d, 12, 4))
    ker = qsmrep.hamiltonian_kernel(rep)
    assert ker == [BasisIdx(1, (0,) * rep.trunc.R)]


def test_hamiltonian_with_g():
    g = qsmrep.GHom({2: 3.0})
    rep = Representation(BC, trunc=small(BC), g=g)
    assert qsmrep.hamiltonian(rep).entry(BasisIdx(12), BasisIdx(12)).real == pytest.approx(math.log(27))


# -- relations

def test_mu_s_mustar_dense():
    """mu_2 s mu_2* = (1/2)([1/6] + [2/3]) as dense matrices, away from the edge."""
    rep = Representation(BC, Embedding(12), TruncSpec(40))
    M = (qsmrep.op_mu(rep, 2).to_dense() @ qsmrep.op_s(rep, qz("1/3")).to_dense()
         @ qsmrep.op_mu_star(rep, 2).to_dense())
    rhs = 0.5 * (qsmrep.op_s(rep, qz("1/6")).to_dense() + qsmrep.op_s(rep, qz("2/3")).to_dense())
    inner = slice(0, 20)
    assert np.allclose(M[inner, inner], rhs[inner, inner], atol=1e-14)


def test_weight_mu_relation_dense():
    rep = Representation(W4, Embedding(24), TruncSpec.for_datum(W4, 12, 12))
    Wd = qsmrep.op_weight(rep, (1,)).to_dense()
    W2 = qsmrep.op_weight(rep, (2,)).to_dense()
    M2 = qsmrep.op_mu(rep, 2).to_dense()
    lhs, rhs = Wd @ M2, M2 @ W2
    for j in range(rep.B):
        b = rep.basis_idx(j)
        if b.n <= 6 and b.k[0] % 2 == 0:
            assert np.allclose(lhs[:, j], rhs[:, j])


@pytest.mark.parametrize("d,R", [(BC, None), (Datum("weil_zero", 4), None), (W4, None),
                                 (Datum("weil_hat", 4), None), (ALG, 2), (Datum("pair_switch"), None)],
                         ids=str)
def test_all_relations_hold(d, R):
    reps = qsmrep.check_relations(d, Embedding(LEVEL), small(d, 24, 6, R))
    bad = [r.to_json() for r in reps if not r.ok]
    assert not bad
    assert sum(r.interior_count for r in reps) > 0
    names = {r.relation for r in reps}
    assert {"mu_mult", "mu_s_mustar", "mu_mustar_commute", "group_law", "mu_adjoint"} <= names
    if d.rank and not d.diagonal_rank_two:
        assert {"weight_mu", "mustar_weight", "weight_s_commute"} <= names


def test_corrupted_relation_is_caught():
    samples = qsmrep.relation_samples(BC)
    rels = qsmrep.relation_instances(BC, samples)
    one = F(1)
    flipped = [Relation(r.name, r.lhs, tuple((-c, w) for c, w in r.rhs)) if r.name == "mu_s_mustar" else r
               for r in rels]
    reps = qsmrep.check_relations(BC, Embedding(LEVEL), TruncSpec(32), rels=flipped)
    bad = [r for r in reps if not r.ok]
    assert [r.relation for r in bad] == ["mu_s_mustar"]
    assert bad[0].witnesses and "basis" in bad[0].witnesses[0]
    assert bad[0].max_deviation > 0
    wrong = Relation("bogus", ((one, word(Mu(2))),), ((one, word(Mu(3))),))
    assert not qsmrep.check_relations(BC, Embedding(LEVEL), TruncSpec(32), rels=[wrong])[0].ok


def test_relation_verdict_stable_under_growth():
    a = qsmrep.check_relations(W4, Embedding(LEVEL), small(W4, 16, 6))
    b = qsmrep.check_relations(W4, Embedding(LEVEL), small(W4, 32, 12))
    assert all(r.ok for r in a + b)
    ia = {r.relation: r.interior_count for r in a}
    ib = {r.relation: r.interior_count for r in b}
    assert all(ib[k] >= ia[k] for k in ia)


# -- projections

def test_projections_m1_identity():
    for p in qsmrep.check_projections(W4, small(W4, 12, 6), 1, Embedding(24)):
        assert p.ok and p.support_size == p.interior_count


def test_weil_source_projection_even_support():
    rep = Representation(W4, Embedding(24), small(W4, 12, 6))
    img = rep.apply(word(MuStar(2), Mu(2)))
    keep = img.alive & ~img.bnd
    assert np.array_equal(keep & (rep.n * 2 <= 12), (rep.K[:, 0] % 2 == 0) & (rep.n * 2 <= 12))
    src, rng_ = qsmrep.check_projections(W4, small(W4, 12, 6), 2, Embedding(24))
    assert src.ok and rng_.ok


def test_alg_num_isometry_on_interior():
    src, _ = qsmrep.check_projections(ALG, small(ALG, 12, 6, 2), 2, Embedding(24))
    assert src.ok and src.support_size == src.interior_count


@pytest.mark.parametrize("d,R", [(BC, None), (Datum("weil_hat", 4), None), (ALG, 2)], ids=str)
@pytest.mark.parametrize("m", [2, 3, 4])
def test_projections(d, R, m):
    assert all(p.ok for p in qsmrep.check_projections(d, small(d, 24, 6, R), m, Embedding(24)))


# -- time evolution

def _vals(rep, w):
    img = rep.apply(w, want_float=True)
    return img, rep.values(img)


def test_time_zero_is_identity():
    rep = Representation(W4, Embedding(24), small(W4))
    w = word(S(WeilCycElem(qz("1/3"), 1, 4)), Mu(2), MuStar(3))
    assert qsmrep.time_evolve(rep, w, 0.0) == w


def test_time_evolve_mu_product():
    rep = Representation(BC, Embedding(24), small(BC))
    t = 0.7
    a = qsmrep.time_evolve(rep, word(Mu(2), Mu(3)), t)
    assert a.scalar == pytest.approx(cmath.exp(1j * t * math.log(6)))
    ia, va = _vals(rep, a)
    ib, vb = _vals(rep, word(Mu(6), scalar=6 ** (1j * t)))
    ok = ~(ia.bnd | ib.bnd)
    assert ok.sum() == 4
    assert np.array_equal(ia.n[ok], ib.n[ok]) and np.allclose(va[ok], vb[ok])


@pytest.mark.parametrize("d,R", [(W4, None), (ALG, 2)], ids=str)
def test_time_evolution_group_law(d, R):
    rep = Representation(d, Embedding(LEVEL), small(d, 16, 6, R))
    pool = qsmrep.generator_pool(rep, qsmrep.relation_samples(d, R=rep.trunc.R))

    @given(st.sampled_from(pool), st.sampled_from(pool), st.floats(-3, 3), st.floats(-3, 3))
    def prop(a, b, t, u):
        w = a * b
        lhs = qsmrep.normalize_word(qsmrep.time_evolve(rep, qsmrep.time_evolve(rep, w, u), t))
        rhs = qsmrep.normalize_word(qsmrep.time_evolve(rep, w, t + u))
        il, vl = _vals(rep, lhs)
        ir, vr = _vals(rep, rhs)
        ok = ~(il.bnd | ir.bnd)
        assert np.allclose(vl[ok], vr[ok], rtol=1e-10, atol=1e-12)
    prop()


def test_covariance_examples():
    rep = Representation(BC, Embedding(24), TruncSpec(64))
    assert qsmrep.check_covariance(rep, 0.0, word(Mu(2))) == 0.0
    assert qsmrep.check_covariance(rep, 1.0, word(Mu(2))) <= 1e-9
    rep = Representation(W4, Embedding(24), small(W4, 32, 12))
    assert qsmrep.check_covariance(rep, 1.0, word(S(WeilCycElem(qz("1/4"), 1, 4)))) <= 1e-9


@pytest.mark.parametrize("d,R", [(W4, None), (ALG, 2), (Datum("weil_hat", 4), None)], ids=str)
def test_covariance_random_words(d, R):
    rep = Representation(d, Embedding(LEVEL), small(d, 24, 6, R))
    pool = qsmrep.generator_pool(rep, qsmrep.relation_samples(d, R=rep.trunc.R))
    rng = random.Random(3)
    for _ in range(20):
        w = rng.choice(pool) * rng.choice(pool)
        for t in (0.0, 1.0, math.pi):
            assert qsmrep.check_covariance(rep, t, w) <= 1e-9


def test_covariance_detects_wrong_evolution(monkeypatch):
    rep = Representation(BC, Embedding(24), TruncSpec(64))
    real = qsmrep.time_evolve
    monkeypatch.setattr(qsmrep, "time_evolve", lambda r, w, t: real(r, w, 2 * t))
    assert qsmrep.check_covariance(rep, 1.0, word(Mu(2))) > 1e-3


# -- Gibbs trace

def test_gibbs_trace_normalized():
    rep = Representation(W4, Embedding(24), small(W4, 32, 32))
    assert qsmrep.gibbs_trace(rep, word(), 2.0) == 1.0


def test_gibbs_trace_off_diagonal_vanishes():
    rep = Representation(BC, Embedding(24), TruncSpec(200))
    assert qsmrep.gibbs_trace(rep, word(S(qz("1/3")), Mu(2), MuStar(3)), 2.0) == 0


# -- symmetries

@pytest.mark.parametrize("d", [BC, W4, Datum("weil", 2), Datum("weil_hat", 4), Datum("pair_switch")], ids=str)
def test_symmetry_conjugate(d):
    for g in bcdata.admissible_symmetries(d)[:6]:
        gl = bcdata.GaloisElem(24, g.unit, g.sqrtq_sign)
        assert qsmrep.symmetry_conjugate(d, gl, Embedding(24), small(d, 16, 4))


def test_symmetry_conjugate_catches_wrong_twist(monkeypatch):
    real = bcdata.compose_embedding
    monkeypatch.setattr(bcdata, "compose_embedding",
                        lambda d, i, g: real(d, i, bcdata.GaloisElem(g.level, 1, 1)))
    assert not qsmrep.symmetry_conjugate(BC, bcdata.GaloisElem(24, 5), Embedding(24), TruncSpec(16))


# -- alpha = 1 and rank two

def test_alpha_one():
    rep = qsmrep.alpha_one_rep(F(1, 7))
    assert rep.ok and rep.checks > 0 and rep.boundary > 0


def test_alpha_one_conjugation_example():
    rep = qsmrep.AlphaOneRep(F(1, 7))
    a = GermElem(F(2, 3))
    got = rep.apply((Mu(2), S(a), MuStar(2)), F(2))
    assert got == ((F(1, 7) * F(2, 3)) % 1, F(2))
    assert rep.apply((Mu(1),), F(3, 4)) == (F(0), F(3, 4))


def test_rank_two_examples():
    r = qsmrep.Rank2Rep(Embedding(12))
    assert r.apply((("mu", 2, 3),), 1, 1) == (F(0), (2, 3))
    assert r.apply((("mu", 2, 2),), 3, 3) == (F(0), (6, 6))


def test_rank_two_no_leakage():
    rep = qsmrep.rank2_rep(Embedding(12, 5, 1, 7))
    assert rep.ok and rep.leakage == 0 and rep.checks > 0


def test_rank_two_leak_would_be_seen():
    r = qsmrep.Rank2Rep(Embedding(12))
    _, tgt = r.apply((("mu", 2, 3),), 2, 2)
    assert tgt[0] != tgt[1]


@pytest.mark.parametrize("d", [Datum("pair_switch"), Datum("weil_hat", 4)], ids=str)
def test_diagonal_engine_stays_diagonal(d):
    """The generic engine models span{eps_kk} directly; its relations hold there."""
    rep = Representation(d, Embedding(LEVEL), TruncSpec(32))
    assert rep.diagonal
    assert all(r.ok for r in qsmrep.check_relations(d, Embedding(LEVEL), TruncSpec(32)))
    s = PairElem(qz("1/3"), qz("1/4")) if d.kind == "pair_switch" else \
        bcdata.WeilHatElem(qz("1/3"), bcdata.HalfIntQmod2Z(F(1, 2)), 4)
    v = qsmrep.op_s(rep, s).entry(BasisIdx(3), BasisIdx(3))
    ph = bcdata.iota_phase(d, Embedding(LEVEL), s) * 3
    assert v == pytest.approx(cmath.exp(2j * math.pi * float(ph)))
