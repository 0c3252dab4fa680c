from fractions import Fraction

import pytest

from diraclab import scenarios as sc
from diraclab.coisotropic import identity_datum, is_strong
from diraclab.courant import kernel_of, pullback, tangent_dirac
from diraclab.intersection import (
    homotopy_intersection,
    induced_poisson,
    strong_exact_sequence,
    strong_intersection,
)
from diraclab.linalg import LinMap, image, solve, vec_concat

F = Fraction


def test_pair_identity_self_intersection(pair_bundle):
    # both legs the identity datum: the composite has ker L = im rho = V
    idd = identity_datum(pair_bundle)
    obj_pairs = [(i, i) for i in range(len(pair_bundle.objects))]
    arrow_pairs = [(k, k) for k in range(len(pair_bundle.arrows))]
    si = strong_intersection(idd, idd, obj_pairs, arrow_pairs)
    assert si.report.passed, si.report.failures()
    for entry in si.ledger.entries:
        assert entry["kerL"] == 2
    for f, l in zip(si.fibers, si.dirac):
        assert image(f.tangent.matrix() @ f.rho).dim == 2
    seq = strong_exact_sequence(idd, idd, si)
    assert seq.passed


def test_one_factor_zero_dimensional(circle1):
    # intersect the orbit datum with itself over the base: both legs live on
    # a point, the product is a point, and L is the pullback of the other leg
    orbit = sc.circle_orbit_datum(circle1, F(1, 2))
    si = strong_intersection(orbit, orbit, [(0, 0)], [])
    assert si.report.passed
    assert si.dirac[0].n == 0


def test_circle_intersection_free_level(reduction1):
    red = reduction1
    si = strong_intersection(red.orbit, red.scn.ham.datum,
                             list(red.obj_pairs), list(red.arrow_pairs))
    assert si.report.passed
    # locally free action: R-ann = 0 everywhere
    assert all(e["R_ann"] == 0 for e in si.ledger.entries)
    assert all(e["kerL"] == e["L"] for e in si.ledger.entries)
    seq = strong_exact_sequence(red.orbit, red.scn.ham.datum, si)
    assert seq.passed
    assert any(r.check_id == "exact.free_implies_transverse" for r in seq.records)
    assert any(r.check_id == "exact.strong_output" for r in seq.records)
    assert is_strong(si.datum).passed


def test_circle_intersection_n2(strong2, reduction2):
    si = strong2
    assert si.report.passed
    assert all(e["L"] == 3 and e["kerL"] == 1 for e in si.ledger.entries)
    seq = strong_exact_sequence(reduction2.orbit, reduction2.scn.ham.datum, si)
    assert seq.passed
    dims = [r.ranks for r in seq.records if r.check_id == "exact.dimension"]
    assert dims and all(d == (0, 0, 0) for d in dims)


def test_level_zero_middle_dimension():
    # the fixed-point level: 1-dimensional kernel overlap, with the boundary
    # map carrying it isomorphically onto the annihilator of R
    scn = sc.circle_scenario(1, F(0), ts=(0, F(1, 2), F(-1, 2)))
    orbit = sc.circle_orbit_datum(scn, F(0))
    obj_pairs = [(0, oi) for p, oi in scn.obj_index.items()]
    si = strong_intersection(orbit, scn.ham.datum, obj_pairs, [])
    assert si.report.passed
    seq = strong_exact_sequence(orbit, scn.ham.datum, si)
    assert seq.passed
    dims = [r.ranks for r in seq.records if r.check_id == "exact.dimension"]
    assert dims and all(d == (1, 0, 1) for d in dims)


def test_transversality_hypothesis_violation(circle1, pair_bundle):
    # break algebroid transversality by shrinking both cA maps to zero
    from diraclab.coisotropic import CoisotropicDatum
    from diraclab.groupoid import GroupoidFiberBundle, MorphismFiber
    datum = sc.circle_orbit_datum(circle1, F(1, 2))
    c = datum.morphism
    # the crippled morphism drops all arrows so it stays structurally valid
    dom = GroupoidFiberBundle(c.dom.objects, (), (), name="no-arrows")
    crippled = MorphismFiber(dom, c.cod, c.obj_map, c.c0,
                             tuple(LinMap.zero(1, 1) for _ in c.cA), (), ())
    bad = CoisotropicDatum(crippled, datum.dirac, name="crippled")
    si = strong_intersection(bad, bad, [(0, 0)], [])
    assert not si.report.hypothesis_ok
    assert si.datum is None


def test_homotopy_matches_strong_at_units(reduction1):
    red = reduction1
    d1, d2 = red.orbit, red.scn.ham.datum
    g = d1.morphism.cod
    triples = []
    for ga, ar in enumerate(g.arrows):
        if ar.src == d1.morphism.obj_map[0] and ar.unit:
            for (o1, o2) in red.obj_pairs:
                if d2.morphism.obj_map[o2] == ar.tgt:
                    triples.append((0, ga, o2))
    hi = homotopy_intersection(d1, d2, triples[:4])
    assert hi.report.passed
    si = strong_intersection(d1, d2, list(red.obj_pairs), list(red.arrow_pairs))
    for k, f in enumerate(hi.fibers):
        i1, ga, i2 = f.base
        ar = g.arrows[ga]
        sk = next(j for j, sf in enumerate(si.fibers) if sf.base == (i1, i2))
        sf = si.fibers[sk]
        n1 = d1.morphism.dom.objects[i1].dim
        cols = []
        for b in sf.tangent.basis:
            u1 = b[:n1]
            w = vec_concat(vec_concat(
                u1, ar.u_star.apply(d1.morphism.c0[i1].apply(u1))), b[n1:])
            x = solve(f.tangent.matrix(), w)
            assert x is not None
            cols.append(x)
        inc = LinMap.from_cols(cols, rows_dim=f.tangent.dim)
        assert pullback(inc, hi.dirac[k]) == si.dirac[sk]


def test_homotopy_nontrivial_middle_arrow(reduction1):
    red = reduction1
    d1, d2 = red.orbit, red.scn.ham.datum
    g = d1.morphism.cod
    triples = []
    for ga, ar in enumerate(g.arrows):
        if ar.src == d1.morphism.obj_map[0] and not ar.unit:
            for (o1, o2) in red.obj_pairs:
                if d2.morphism.obj_map[o2] == ar.tgt:
                    triples.append((0, ga, o2))
                    break
    hi = homotopy_intersection(d1, d2, triples[:3])
    assert hi.report.passed, hi.report.failures()
    assert all(e["R_ann"] == 0 for e in hi.ledger.entries)


def test_homotopy_over_point_bundle():
    idd = identity_datum(sc.point_bundle())
    hi = homotopy_intersection(idd, idd, [(0, 0, 0)])
    assert hi.report.passed
    assert hi.dirac[0].n == 0


def test_induced_poisson_identity_datum(pair_bundle):
    rep = induced_poisson(identity_datum(pair_bundle))
    assert rep.passed
    assert all(r.status == "pass" for r in rep.records)


def test_induced_poisson_circle_datum(circle1):
    # the circle action on the punctured plane has trivial isotropy at the
    # sampled points, so L - c*L_G is a 0-shifted Poisson structure
    rep = induced_poisson(circle1.ham.datum)
    assert rep.passed, rep.failures()


def line_conormal_datum():
    """The trivial Dirac structure on a line inside the plane bivector
    x d/dx ^ d/dy; the induced fiber jumps at the origin."""
    from diraclab.coisotropic import CoisotropicDatum
    from diraclab.courant import ThreeFormFiber
    from diraclab.groupoid import GroupoidFiberBundle, MorphismFiber, ObjectFiber
    params = [F(1), F(2), F(0)]
    g_objects = []
    c_objects = []
    c0 = []
    cA = []
    for t in params:
        pi_t = LinMap.from_rows([[0, t], [-t, 0]])
        g_objects.append(ObjectFiber(2, 2, pi_t.transpose(), LinMap.identity(2),
                                     ThreeFormFiber.zero(2)))
        c_objects.append(ObjectFiber(1, 1, LinMap.from_rows([[-t]]),
                                     LinMap.zero(1, 1), ThreeFormFiber.zero(1)))
        c0.append(LinMap.from_rows([[1], [0]]))
        cA.append(LinMap.from_rows([[0], [1]]))
    gb = GroupoidFiberBundle(tuple(g_objects), (), (), name="plane-bivector")
    cb = GroupoidFiberBundle(tuple(c_objects), (), (), name="line")
    morph = MorphismFiber(cb, gb, tuple(range(len(params))), tuple(c0),
                          tuple(cA), (), ())
    return CoisotropicDatum(morph, tuple(tangent_dirac(1) for _ in params),
                            name="line-conormal")


def test_induced_poisson_detects_rank_jump():
    rep = induced_poisson(line_conormal_datum())
    assert not rep.passed
    clean = [r for r in rep.records if r.check_id == "induced.clean"]
    assert clean and clean[0].status == "fail"
    assert set(clean[0].ranks) == {0, 1}
