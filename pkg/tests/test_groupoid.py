from dataclasses import replace
from fractions import Fraction

import pytest

from diraclab import scenarios as sc
from diraclab.coisotropic import identity_datum
from diraclab.courant import (
    ThreeFormFiber,
    TwoFormFiber,
    cotangent_dirac,
    gauge,
    graph_two_form,
    tangent_dirac,
)
from diraclab.groupoid import (
    compatibility_check,
    gauge_qs,
    induced_dirac,
    nat_trans_form_identity,
    qs_check,
    star_composite_form_identity,
)
from diraclab.linalg import LinMap, kernel

F = Fraction


def failing_ids(report):
    return {r.check_id for r in report.failures()}


def test_pair_groupoid_qs_passes(pair_bundle):
    rep = qs_check(pair_bundle)
    assert rep.passed
    ids = {r.check_id for r in rep.records}
    assert {"qs.lemma.item1", "qs.lemma.item2", "qs.lemma.item3",
            "qs.lemma.item4", "qs.dim", "qs.units", "qs.nondeg.units",
            "qs.multiplicative", "qs.pair.translation"} <= ids


def test_circle_base_qs_passes(circle1):
    assert qs_check(circle1.ham.datum.g_bundle).passed


def test_torus_base_qs_passes(torus1):
    assert qs_check(torus1.ham.datum.g_bundle).passed


def test_trivial_point_groupoid_qs():
    assert qs_check(sc.point_bundle()).passed


def test_corrupted_sigma_fails_item1_with_witness(pair_bundle):
    rep = qs_check(sc.corrupt_sigma(pair_bundle))
    assert not rep.passed
    assert "qs.lemma.item1" in failing_ids(rep)
    bad = [r for r in rep.failures() if r.check_id == "qs.lemma.item1"]
    assert bad[0].witness is not None


def test_corrupted_circle_sigma_fails(circle1):
    rep = qs_check(sc.corrupt_sigma(circle1.ham.datum.g_bundle))
    assert not rep.passed


def test_induced_dirac_pair_is_base_graph(pair_bundle):
    assert induced_dirac(pair_bundle.objects[0]) == \
        graph_two_form(sc.std_symplectic(2))


def test_induced_dirac_circle_is_cotangent(circle1):
    ob = circle1.ham.datum.g_bundle.objects[0]
    assert induced_dirac(ob) == cotangent_dirac(1)


def test_induced_dirac_rejects_trivial_groupoid():
    # A = 0 on a positive-dimensional base cannot be quasi-symplectic
    ob = sc.unit_groupoid(2).objects[0]
    with pytest.raises(ValueError):
        induced_dirac(ob)


def test_compatibility_identity_morphism(pair_bundle):
    idd = identity_datum(pair_bundle)
    c = idd.morphism
    for k, ar in enumerate(pair_bundle.arrows):
        rep = compatibility_check(ar, idd.dirac[ar.src], idd.dirac[ar.tgt],
                                  c.pullback_two_form(k))
        assert rep.passed


def test_compatibility_trivial_forms():
    bundle = sc.unit_groupoid(2)
    l = tangent_dirac(2)
    ar = bundle.arrows[0]
    rep = compatibility_check(ar, l, l, TwoFormFiber.zero(2))
    assert rep.passed


def test_compatibility_detects_corrupted_target(pair_bundle):
    idd = identity_datum(pair_bundle)
    c = idd.morphism
    ar = pair_bundle.arrows[1]
    bad = gauge(idd.dirac[ar.tgt], sc.std_symplectic(2))
    rep = compatibility_check(ar, idd.dirac[ar.src], bad, c.pullback_two_form(1))
    assert not rep.passed
    assert rep.failures()[0].witness is not None


def test_gauge_qs_roundtrip(pair_bundle):
    gam = [sc.std_symplectic(2) for _ in pair_bundle.objects]
    dg = [ThreeFormFiber.zero(2) for _ in pair_bundle.objects]
    once, rep1 = gauge_qs(pair_bundle, gam, dg)
    assert rep1.passed
    back, rep2 = gauge_qs(once, [g.neg() for g in gam], dg)
    assert rep2.passed
    assert back.objects[0].sigma == pair_bundle.objects[0].sigma
    assert back.arrows[0].omega.matrix == pair_bundle.arrows[0].omega.matrix


def test_gauge_qs_keeps_multiplicativity(pair_bundle):
    # gauging by the full base form collapses omega yet stays quasi-symplectic
    gam = [sc.std_symplectic(2) for _ in pair_bundle.objects]
    dg = [ThreeFormFiber.zero(2) for _ in pair_bundle.objects]
    gauged, rep = gauge_qs(pair_bundle, gam, dg)
    assert rep.passed
    sub = qs_check(gauged)
    assert sub.passed
    assert induced_dirac(gauged.objects[0]) == tangent_dirac(2)


def test_gauge_qs_zero_is_identity(pair_bundle):
    gam = [TwoFormFiber.zero(2) for _ in pair_bundle.objects]
    dg = [ThreeFormFiber.zero(2) for _ in pair_bundle.objects]
    out, rep = gauge_qs(pair_bundle, gam, dg)
    assert rep.passed
    assert out.arrows[0].omega.matrix == pair_bundle.arrows[0].omega.matrix


def nat_fixture():
    return sc.pair_nat_trans_fixture(2)


def test_nat_trans_form_identity_pair():
    fx = nat_fixture()
    rep = nat_trans_form_identity(fx.f, fx.g, fx.theta)
    assert rep.passed and rep.records


def test_nat_trans_form_identity_through_units():
    # theta through units makes both sides vanish
    fx = nat_fixture()
    bundle = fx.f.cod
    from diraclab.morita import NatTransFiber
    unit = next(k for k, a in enumerate(bundle.arrows) if a.unit)
    theta = {0: NatTransFiber(0, unit, bundle.arrows[unit].u_star)}
    rep = nat_trans_form_identity(fx.f, fx.f, theta)
    assert rep.passed


def test_star_composite_form_identity():
    from diraclab.morita import NatTransFiber
    from diraclab.linalg import vstack
    fx = nat_fixture()
    bundle = fx.f.cod
    p = LinMap.from_rows([[1, 2], [0, 1]])
    q = LinMap.from_rows([[1, 0], [3, 1]])
    theta = {0: NatTransFiber(0, 0, vstack(p, LinMap.identity(2)))}
    eta = {0: NatTransFiber(0, 0, vstack(q @ p, p))}
    comp = {0: NatTransFiber(0, 0, vstack(q @ p, LinMap.identity(2)))}
    rep = star_composite_form_identity(bundle, theta, eta, comp)
    assert rep.passed and rep.records

    # composite of theta with its inverse pulls the form back to zero
    qinv = LinMap.from_rows([[1, 0], [-3, 1]])
    assert (q @ qinv) == LinMap.identity(2)
    eta_inv = {0: NatTransFiber(0, 0, vstack(LinMap.identity(2), q))}
    comp_id = {0: NatTransFiber(0, 0, vstack(LinMap.identity(2), LinMap.identity(2)))}
    theta_q = {0: NatTransFiber(0, 0, vstack(q, LinMap.identity(2)))}
    rep2 = star_composite_form_identity(bundle, theta_q, eta_inv, comp_id)
    assert rep2.passed
    om = bundle.arrows[0].omega
    assert om.pullback(comp_id[0].theta_star).matrix.is_zero()


def test_unit_checks_fail_when_u_star_broken(pair_bundle):
    ar = pair_bundle.arrows
    unit_idx = next(k for k, a in enumerate(ar) if a.unit)
    bad_u = replace(ar[unit_idx], u_star=LinMap.zero(4, 2))
    arrows = tuple(bad_u if k == unit_idx else a for k, a in enumerate(ar))
    import diraclab.groupoid as gp
    bad = gp.GroupoidFiberBundle(pair_bundle.objects, arrows, (), name="bad-units")
    rep = qs_check(bad)
    assert "qs.units" in failing_ids(rep)


def test_pair_tangent_is_fiber_product(pair_bundle):
    p = pair_bundle.pairs[0]
    g, h = pair_bundle.arrows[p.g], pair_bundle.arrows[p.h]
    for b in p.tangent.basis:
        assert g.s_star.apply(b[:g.dim]) == h.t_star.apply(b[g.dim:])


def test_translation_identity_checked_at_unit_pairs(pair_bundle):
    rep = qs_check(pair_bundle)
    assert any(r.check_id == "qs.pair.translation" for r in rep.records)
    assert all(r.status == "pass" for r in rep.records
               if r.check_id == "qs.pair.translation")
