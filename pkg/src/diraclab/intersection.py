"""Strong and homotopy fiber-product intersections of coisotropic data over
a shared quasi-symplectic bundle, with rank ledgers and exact sequences.

Both intersections are taken in the orientation where the outer legs are
trivial: the first datum plays the reversed role (its Dirac fibers enter
negated), and the composite is a 0-shifted-Poisson candidate on the fiber
product.  "Smoothness" claims are operationalized as equal ranks of the
auxiliary spaces across all sampled product points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coisotropic import CoisotropicDatum, zero_shifted_poisson_check, is_coisotropic
from .courant import (
    DiracFiber,
    ThreeFormFiber,
    dirac_negate,
    dirac_sum,
    graph_two_form,
    kernel_of,
    pullback,
)
from .groupoid import (
    ArrowFiber,
    GroupoidFiberBundle,
    MorphismFiber,
    ObjectFiber,
)
from .linalg import (
    DimensionMismatch,
    LinMap,
    Subspace,
    annihilator,
    basis_vec,
    canonicalize,
    hstack,
    image,
    kernel,
    solve,
    vec_concat,
    vstack,
    zero_vec,
)
from .report import VerificationReport, witness_subspace
from .scenarios import point_bundle


@dataclass(frozen=True)
class StrongProductFiber:
    """Product object fiber: tangent and algebroid fiber products with the
    componentwise anchor and the two projections."""

    base: tuple[int, int]
    tangent: Subspace         # in T_{C1} + T_{C2}
    algebroid: Subspace       # in A_{C1} + A_{C2}
    rho: LinMap               # algebroid coords -> tangent coords
    p1: LinMap                # tangent coords -> T_{C1}
    p2: LinMap


@dataclass(frozen=True)
class HomotopyProductFiber:
    """Product object fiber over (x1, g, x2) with the translated anchor."""

    base: tuple[int, int, int]
    tangent: Subspace         # in T_{C1} + T_g + T_{C2}
    rho: LinMap               # A_{C1} + A_{C2} -> tangent coords
    p1: LinMap
    p0: LinMap
    p2: LinMap


@dataclass
class RankLedger:
    """Per-point dimensions of the auxiliary spaces; cleanness is constancy."""

    entries: list[dict] = field(default_factory=list)

    def add(self, **dims) -> None:
        self.entries.append(dims)

    def constant(self, key: str) -> bool:
        vals = [e[key] for e in self.entries]
        return len(set(vals)) <= 1

    def ranks(self, key: str) -> list[int]:
        return [e[key] for e in self.entries]


def _subspace_coords_map(space: Subspace, rows: int, proj: LinMap) -> LinMap:
    """The map (space basis coords) -> proj(inclusion), as a matrix."""
    cols = [proj.apply(b) for b in space.basis]
    return LinMap.from_cols(cols, rows_dim=rows)


def _fiber_product(m1: LinMap, m2: LinMap) -> Subspace:
    """{(x, y) : m1 x = m2 y} as a subspace of the direct sum."""
    return kernel(hstack(m1, m2.scale(-1)))


@dataclass
class StrongIntersection:
    fibers: list[StrongProductFiber]
    dirac: list[DiracFiber]
    ledger: RankLedger
    report: VerificationReport
    datum: CoisotropicDatum | None   # product datum toward the point


def strong_intersection(d1: CoisotropicDatum, d2: CoisotropicDatum,
                        obj_pairs: list[tuple[int, int]],
                        arrow_pairs: list[tuple[int, int]] | None = None,
                        ) -> StrongIntersection:
    """Strong fiber product of two coisotropics over their shared target.

    The first datum is the reversed leg: the composite Dirac fiber is
    p2*L2 - p1*L1.  Requires the algebroid maps into the shared bundle to
    be transverse; otherwise the status is hypothesis-violated and no
    coisotropic claim is made.
    """
    if d1.morphism.cod is not d2.morphism.cod:
        raise DimensionMismatch("intersection needs a shared target bundle")
    g = d1.morphism.cod
    rep = VerificationReport("strong_intersection")
    ledger = RankLedger()
    fibers: list[StrongProductFiber] = []
    dirac: list[DiracFiber] = []
    c1m, c2m = d1.morphism, d2.morphism

    transverse = True
    for (i1, i2) in obj_pairs:
        if c1m.obj_map[i1] != c2m.obj_map[i2]:
            raise DimensionMismatch("product point maps to different shared objects")
        gi = c1m.obj_map[i1]
        ob_g = g.objects[gi]
        ob1, ob2 = c1m.dom.objects[i1], c2m.dom.objects[i2]

        alg_sum = image(c1m.cA[i1]).sum(image(c2m.cA[i2]))
        if alg_sum.dim != ob_g.adim:
            transverse = False
            rep.add_hypothesis_violation(
                "strong.transversality",
                f"point {(i1, i2)}: algebroid maps into the shared bundle not transverse")
            continue

        tang = _fiber_product(c1m.c0[i1], c2m.c0[i2])
        alg = _fiber_product(c1m.cA[i1], c2m.cA[i2])
        p1 = _subspace_coords_map(tang, ob1.dim,
                                  hstack(LinMap.identity(ob1.dim),
                                         LinMap.zero(ob1.dim, ob2.dim)))
        p2 = _subspace_coords_map(tang, ob2.dim,
                                  hstack(LinMap.zero(ob2.dim, ob1.dim),
                                         LinMap.identity(ob2.dim)))
        # componentwise anchor, expressed on the fiber-product bases
        rho_cols = []
        for b in alg.basis:
            v1 = ob1.rho.apply(b[:ob1.adim])
            v2 = ob2.rho.apply(b[ob1.adim:])
            w = vec_concat(v1, v2)
            x = solve(tang.matrix(), w)
            if x is None:
                raise DimensionMismatch("anchor does not preserve the fiber product")
            rho_cols.append(x)
        rho = LinMap.from_cols(rho_cols, rows_dim=tang.dim)

        l_fiber = dirac_sum(pullback(p1, dirac_negate(d1.dirac[i1])),
                            pullback(p2, d2.dirac[i2]))
        fibers.append(StrongProductFiber((i1, i2), tang, alg, rho, p1, p2))
        dirac.append(l_fiber)

        r_space = _shared_tangent_sum(d1, i1, d2, i2)
        u_space = image(c1m.c0[i1]).sum(image(c2m.c0[i2]))
        ledger.add(point=(i1, i2), R=r_space.dim, U=u_space.dim,
                   R_ann=ob_g.dim - r_space.dim, L=l_fiber.space.dim,
                   kerL=kernel_of(l_fiber).dim)

    rep.add("strong.clean.R", ledger.constant("R"),
            detail="rank of R constant across sampled product points",
            ranks=ledger.ranks("R"))
    rep.add("strong.clean.L", ledger.constant("L") and ledger.constant("kerL"),
            detail="rank of L and ker L constant across sampled product points",
            ranks=ledger.ranks("kerL"))

    datum = None
    if transverse and fibers:
        datum = _product_datum(d1, d2, fibers, dirac, arrow_pairs or [])
        sub = is_coisotropic(datum)
        rep.add("strong.coisotropic", sub.passed,
                detail="product datum is coisotropic toward the trivial target")
        zsp = zero_shifted_poisson_check(datum.c_bundle, list(dirac))
        rep.add("strong.zero_shifted_poisson", zsp.passed,
                detail="product Dirac fibers satisfy the 0-shifted Poisson conditions")
        if not (sub.passed and zsp.passed):
            rep.merge(sub)
            rep.merge(zsp)
    return StrongIntersection(fibers, dirac, ledger, rep, datum)


def _shared_tangent_sum(d1: CoisotropicDatum, i1: int,
                        d2: CoisotropicDatum, i2: int) -> Subspace:
    """R = c1(p_T L1) + c2(p_T L2) inside the shared tangent space."""
    c1m, c2m = d1.morphism, d2.morphism
    n_g = d1.morphism.cod.objects[c1m.obj_map[i1]].dim
    gens = []
    for v in d1.dirac[i1].space.basis:
        gens.append(c1m.c0[i1].apply(v[:d1.dirac[i1].n]))
    for v in d2.dirac[i2].space.basis:
        gens.append(c2m.c0[i2].apply(v[:d2.dirac[i2].n]))
    return canonicalize(gens, n_g)


def _product_datum(d1: CoisotropicDatum, d2: CoisotropicDatum,
                   fibers: list[StrongProductFiber], dirac: list[DiracFiber],
                   arrow_pairs: list[tuple[int, int]]) -> CoisotropicDatum:
    """Assemble the strong-product bundle with its morphism to the point."""
    c1m, c2m = d1.morphism, d2.morphism
    objects = []
    for f, l in zip(fibers, dirac):
        # the product 3-forms cancel exactly (reversed leg); assert, not assume
        phi1 = c1m.dom.objects[f.base[0]].phi.pullback(f.p1)
        phi2 = c2m.dom.objects[f.base[1]].phi.pullback(f.p2)
        if not phi2.add(_neg3(phi1)).is_zero():
            raise ValueError("product 3-forms do not cancel")
        objects.append(ObjectFiber(f.tangent.dim, f.algebroid.dim, f.rho,
                                   LinMap.zero(f.tangent.dim, f.algebroid.dim),
                                   ThreeFormFiber.zero(f.tangent.dim)))
    obj_pos = {f.base: k for k, f in enumerate(fibers)}

    arrows = []
    for (a1, a2) in arrow_pairs:
        ar1, ar2 = c1m.dom.arrows[a1], c2m.dom.arrows[a2]
        if c1m.arrow_map[a1] != c2m.arrow_map[a2]:
            raise DimensionMismatch("product arrow maps to different shared arrows")
        src = obj_pos[(ar1.src, ar2.src)]
        tgt = obj_pos[(ar1.tgt, ar2.tgt)]
        tang = _fiber_product(c1m.c1[a1], c2m.c1[a2])
        n1, n2 = ar1.dim, ar2.dim
        inc1 = hstack(LinMap.identity(n1), LinMap.zero(n1, n2))
        inc2 = hstack(LinMap.zero(n2, n1), LinMap.identity(n2))
        s_star = _restrict_pairmap(tang, fibers[src].tangent,
                                   ar1.s_star @ inc1, ar2.s_star @ inc2)
        t_star = _restrict_pairmap(tang, fibers[tgt].tangent,
                                   ar1.t_star @ inc1, ar2.t_star @ inc2)
        r1s = c1m.dom.objects[ar1.src].adim
        r1t = c1m.dom.objects[ar1.tgt].adim
        left = _restrict_pairmap(
            fibers[src].algebroid, tang,
            ar1.left @ hstack(LinMap.identity(r1s),
                              LinMap.zero(r1s, fibers[src].algebroid.ambient_dim - r1s)),
            ar2.left @ hstack(LinMap.zero(fibers[src].algebroid.ambient_dim - r1s, r1s),
                              LinMap.identity(fibers[src].algebroid.ambient_dim - r1s)))
        right = _restrict_pairmap(
            fibers[tgt].algebroid, tang,
            ar1.right @ hstack(LinMap.identity(r1t),
                               LinMap.zero(r1t, fibers[tgt].algebroid.ambient_dim - r1t)),
            ar2.right @ hstack(LinMap.zero(fibers[tgt].algebroid.ambient_dim - r1t, r1t),
                               LinMap.identity(fibers[tgt].algebroid.ambient_dim - r1t)))
        unit = ar1.unit and ar2.unit
        u_star = None
        if unit:
            no1 = c1m.dom.objects[ar1.src].dim
            no2 = c2m.dom.objects[ar2.src].dim
            u_star = _restrict_pairmap(
                fibers[src].tangent, tang,
                ar1.u_star @ hstack(LinMap.identity(no1), LinMap.zero(no1, no2)),
                ar2.u_star @ hstack(LinMap.zero(no2, no1), LinMap.identity(no2)))
        arrows.append(ArrowFiber(src, tgt, tang.dim, s_star, t_star, None,
                                 left, right, unit=unit, u_star=u_star))

    bundle = GroupoidFiberBundle(tuple(objects), tuple(arrows), (),
                                 name="strong_product")
    pt = point_bundle()
    morph = MorphismFiber(
        bundle, pt,
        tuple(0 for _ in objects),
        tuple(LinMap.zero(0, o.dim) for o in objects),
        tuple(LinMap.zero(0, o.adim) for o in objects),
        tuple(0 for _ in arrows),
        tuple(LinMap.zero(0, a.dim) for a in arrows),
    )
    return CoisotropicDatum(morph, tuple(dirac), name="strong_product")


def _neg3(phi: ThreeFormFiber) -> ThreeFormFiber:
    return ThreeFormFiber(phi.dim, tuple((k, -c) for k, c in phi.coeffs))


def _restrict_pairmap(dom_space: Subspace, cod_space: Subspace,
                      top: LinMap, bottom: LinMap) -> LinMap:
    """Express a componentwise map between fiber-product subspaces in their
    echelon-basis coordinates: b -> (top(b), bottom(b))."""
    cols = []
    for b in dom_space.basis:
        w = vec_concat(top.apply(b), bottom.apply(b))
        x = solve(cod_space.matrix(), w)
        if x is None:
            raise DimensionMismatch("componentwise map leaves the fiber product")
        cols.append(x)
    return LinMap.from_cols(cols, rows_dim=cod_space.dim)


def strong_exact_sequence(d1: CoisotropicDatum, d2: CoisotropicDatum,
                          result: StrongIntersection) -> VerificationReport:
    """Exactness of 0 -> K1 + K2 -> ker rho_C cap ker c_* -> R-ann -> 0 and
    the dimension identity, per sampled product point."""
    rep = VerificationReport("strong_exact_sequence")
    c1m, c2m = d1.morphism, d2.morphism
    g = d1.morphism.cod
    for f in result.fibers:
        i1, i2 = f.base
        ob1, ob2 = c1m.dom.objects[i1], c2m.dom.objects[i2]
        ob_g = g.objects[c1m.obj_map[i1]]
        r1, r2 = ob1.adim, ob2.adim

        k1 = kernel(vstack(ob1.rho, c1m.cA[i1]))
        k2 = kernel(vstack(ob2.rho, c2m.cA[i2]))
        left = canonicalize(
            [vec_concat(v, zero_vec(r2)) for v in k1.basis]
            + [zero_vec(r1) + v for v in k2.basis], r1 + r2)

        # middle: ker rho_C inside the algebroid fiber product (outer legs
        # are trivial, so ker c_* is everything)
        mid_coords = kernel(f.rho)
        middle = canonicalize([f.algebroid.matrix().apply(x) for x in mid_coords.basis],
                              r1 + r2)

        r_space = _shared_tangent_sum(d1, i1, d2, i2)
        r_ann = annihilator(r_space)

        sigma1 = ob_g.sigma @ c1m.cA[i1]
        sigma2 = ob_g.sigma @ c2m.cA[i2]
        well_defined = all(
            sigma1.apply(b[:r1]) == sigma2.apply(b[r1:]) for b in middle.basis)
        rep.add("exact.well_defined", well_defined,
                detail=f"point {f.base}: sigma c1 b1 = sigma c2 b2 on the middle term")
        if not well_defined:
            continue
        to_rann = LinMap.from_cols([sigma1.apply(b[:r1]) for b in middle.basis],
                                   rows_dim=ob_g.dim)

        img = image(to_rann)
        rep.add("exact.into_rann", img.issubset(r_ann),
                detail=f"point {f.base}: the boundary map lands in the annihilator of R")
        rep.add("exact.left", left.issubset(middle),
                detail=f"point {f.base}: K1 + K2 includes into the middle term")
        ker_map = kernel(to_rann)
        ker_in_amb = canonicalize([middle.matrix().apply(x) for x in ker_map.basis],
                                  r1 + r2)
        rep.add("exact.middle", ker_in_amb == left,
                detail=f"point {f.base}: exactness at the middle term",
                witness=None if ker_in_amb == left else
                {"kernel": witness_subspace(ker_in_amb), "left": witness_subspace(left)})
        rep.add("exact.rann", img == r_ann,
                detail=f"point {f.base}: the boundary map is onto the annihilator of R")
        if img == r_ann and ker_in_amb == left:
            rep.add("exact.dimension", middle.dim == left.dim + r_ann.dim,
                    detail=f"point {f.base}: dim middle = dim left + dim R-ann",
                    ranks=(middle.dim, left.dim, r_ann.dim))
        if middle.dim == 0:
            rep.add("exact.free_implies_transverse", r_ann.dim == 0,
                    detail=f"point {f.base}: trivial middle kernel forces R-ann = 0")
        if r_ann.dim == 0 and k1.dim == 0 and k2.dim == 0:
            rep.add("exact.strong_output", middle.dim == 0,
                    detail=f"point {f.base}: transverse criterion with strong "
                           "inputs gives a strong output")
    return rep


@dataclass
class HomotopyIntersection:
    fibers: list[HomotopyProductFiber]
    dirac: list[DiracFiber]
    ledger: RankLedger
    report: VerificationReport


def homotopy_intersection(d1: CoisotropicDatum, d2: CoisotropicDatum,
                          triples: list[tuple[int, int, int]]) -> HomotopyIntersection:
    """Homotopy fiber product over product points (x1, g, x2).

    Computes L = -p1*L1 + p2*L2 - p0*graph(omega_g) per point, the rank
    ledger for the cleanness criterion, the translated anchor, the exact
    sequence (unconditional at the first two terms, conditional at the
    annihilator term under algebroid transversality), strongness transfer,
    and the object-level kernel condition of the output.
    """
    if d1.morphism.cod is not d2.morphism.cod:
        raise DimensionMismatch("intersection needs a shared target bundle")
    g = d1.morphism.cod
    c1m, c2m = d1.morphism, d2.morphism
    rep = VerificationReport("homotopy_intersection")
    ledger = RankLedger()
    fibers = []
    dirac = []
    for (i1, ga, i2) in triples:
        ar = g.arrows[ga]
        if c1m.obj_map[i1] != ar.src or c2m.obj_map[i2] != ar.tgt:
            raise DimensionMismatch("product triple does not match the middle arrow")
        ob1, ob2 = c1m.dom.objects[i1], c2m.dom.objects[i2]
        ob_g_s, ob_g_t = g.objects[ar.src], g.objects[ar.tgt]
        n1, n2, ng = ob1.dim, ob2.dim, ar.dim

        # T = {(u1, w, u2) : c12 u1 = s w, c22 u2 = t w}
        cond1 = hstack(hstack(c1m.c0[i1], ar.s_star.scale(-1)), LinMap.zero(ob_g_s.dim, n2))
        cond2 = hstack(hstack(LinMap.zero(ob_g_t.dim, n1), ar.t_star.scale(-1)), c2m.c0[i2])
        tang = kernel(vstack(cond1, cond2))

        p1 = _subspace_coords_map(tang, n1,
                                  hstack(LinMap.identity(n1), LinMap.zero(n1, ng + n2)))
        p0 = _subspace_coords_map(tang, ng,
                                  hstack(hstack(LinMap.zero(ng, n1), LinMap.identity(ng)),
                                         LinMap.zero(ng, n2)))
        p2 = _subspace_coords_map(tang, n2,
                                  hstack(LinMap.zero(n2, n1 + ng), LinMap.identity(n2)))

        l_fiber = dirac_sum(
            dirac_sum(pullback(p1, dirac_negate(d1.dirac[i1])),
                      pullback(p2, d2.dirac[i2])),
            pullback(p0, graph_two_form(ar.omega.neg())))
        dirac.append(l_fiber)

        # translated anchor on A_{C1} + A_{C2}
        rho_cols = []
        for j in range(ob1.adim + ob2.adim):
            b = basis_vec(ob1.adim + ob2.adim, j)
            b1, b2 = b[:ob1.adim], b[ob1.adim:]
            middle = tuple(x - y for x, y in
                           zip(ar.right.apply(c2m.cA[i2].apply(b2)),
                               ar.left.apply(c1m.cA[i1].apply(b1))))
            w = vec_concat(vec_concat(ob1.rho.apply(b1), middle), ob2.rho.apply(b2))
            x = solve(tang.matrix(), w)
            if x is None:
                raise DimensionMismatch("translated anchor leaves the product tangent")
            rho_cols.append(x)
        rho = LinMap.from_cols(rho_cols, rows_dim=tang.dim)
        fibers.append(HomotopyProductFiber((i1, ga, i2), tang, rho, p1, p0, p2))

        # R = im((c1 pT, c2 pT) on L1 x L2) + im(s, t) in T_G0 x T_G0
        two_ng = ob_g_s.dim + ob_g_t.dim
        gens = []
        for v in d1.dirac[i1].space.basis:
            gens.append(vec_concat(c1m.c0[i1].apply(v[:n1]), zero_vec(ob_g_t.dim)))
        for v in d2.dirac[i2].space.basis:
            gens.append(zero_vec(ob_g_s.dim) + tuple(c2m.c0[i2].apply(v[:n2])))
        st = vstack(ar.s_star, ar.t_star)
        for j in range(ng):
            gens.append(st.apply(basis_vec(ng, j)))
        r_space = canonicalize(gens, two_ng)
        u_gens = [vec_concat(c1m.c0[i1].apply(basis_vec(n1, j)), zero_vec(ob_g_t.dim))
                  for j in range(n1)]
        u_gens += [zero_vec(ob_g_s.dim) + tuple(c2m.c0[i2].apply(basis_vec(n2, j)))
                   for j in range(n2)]
        u_gens += [st.apply(basis_vec(ng, j)) for j in range(ng)]
        u_space = canonicalize(u_gens, two_ng)
        ledger.add(point=(i1, ga, i2), R=r_space.dim, U=u_space.dim,
                   R_ann=two_ng - r_space.dim, L=l_fiber.space.dim,
                   kerL=kernel_of(l_fiber).dim)

        _homotopy_sequence_checks(rep, d1, i1, d2, i2, ar, rho, r_space)

        im_rho = image(tang.matrix() @ rho)
        ker_l = _kernel_in_ambient(l_fiber, tang)
        rep.add("homotopy.kernel", im_rho == ker_l,
                detail=f"point {(i1, ga, i2)}: im rho_C = ker L (object level)")

    rep.add("homotopy.clean.R", ledger.constant("R"),
            detail="rank of R constant across sampled product points",
            ranks=ledger.ranks("R"))
    rep.add("homotopy.clean.L", ledger.constant("L") and ledger.constant("kerL"),
            detail="rank of L and ker L constant across sampled product points",
            ranks=ledger.ranks("kerL"))
    return HomotopyIntersection(fibers, dirac, ledger, rep)


def _kernel_in_ambient(l: DiracFiber, tang: Subspace) -> Subspace:
    ker = kernel_of(l)
    return canonicalize([tang.matrix().apply(v) for v in ker.basis],
                        tang.ambient_dim)


def _homotopy_sequence_checks(rep: VerificationReport, d1, i1, d2, i2,
                              ar: ArrowFiber, rho: LinMap, r_space: Subspace) -> None:
    c1m, c2m = d1.morphism, d2.morphism
    g = d1.morphism.cod
    ob1, ob2 = c1m.dom.objects[i1], c2m.dom.objects[i2]
    ob_g_s, ob_g_t = g.objects[ar.src], g.objects[ar.tgt]
    r1, r2 = ob1.adim, ob2.adim

    k1 = kernel(vstack(ob1.rho, c1m.cA[i1]))
    k2 = kernel(vstack(ob2.rho, c2m.cA[i2]))
    left = canonicalize([vec_concat(v, zero_vec(r2)) for v in k1.basis]
                        + [zero_vec(r1) + v for v in k2.basis], r1 + r2)
    middle = kernel(rho)
    r_ann = annihilator(r_space)

    sigma_s = ob_g_s.sigma @ c1m.cA[i1]
    sigma_t = ob_g_t.sigma @ c2m.cA[i2]
    to_rann = LinMap.from_cols(
        [vec_concat(sigma_s.apply(b[:r1]),
                    tuple(-x for x in sigma_t.apply(b[r1:])))
         for b in middle.basis], rows_dim=ob_g_s.dim + ob_g_t.dim)
    img = image(to_rann)
    rep.add("homotopy.exact.into_rann", img.issubset(r_ann),
            detail=f"point {(i1, i2)}: boundary map lands in the annihilator of R")
    rep.add("homotopy.exact.left", left.issubset(middle),
            detail=f"point {(i1, i2)}: K1 x K2 includes into the middle term")
    ker_map = kernel(to_rann)
    ker_in_amb = canonicalize([middle.matrix().apply(x) for x in ker_map.basis],
                              r1 + r2)
    rep.add("homotopy.exact.middle", ker_in_amb == left,
            detail=f"point {(i1, i2)}: exactness at the middle term (unconditional)")

    # the algebroid transversality lives over the two base objects of the
    # middle arrow; the sampled fibers are comparable only when those agree
    alg_transverse = (ar.src == ar.tgt and
                      image(c1m.cA[i1]).sum(image(c2m.cA[i2])).dim == ob_g_s.adim)
    if alg_transverse:
        rep.add("homotopy.exact.rann", img == r_ann,
                detail=f"point {(i1, i2)}: exactness at the annihilator term "
                       "(algebroid maps transverse)")
        if img == r_ann and ker_in_amb == left:
            rep.add("homotopy.exact.dimension",
                    middle.dim == left.dim + r_ann.dim,
                    detail=f"point {(i1, i2)}: dim middle = dim left + dim R-ann",
                    ranks=(middle.dim, left.dim, r_ann.dim))
    else:
        rep.add_hypothesis_violation(
            "homotopy.exact.rann",
            f"point {(i1, i2)}: algebroid maps not transverse; "
            "no claim at the annihilator term")

    # strongness transfer: transverse criterion + strong inputs => trivial middle
    if r_ann.dim == 0 and k1.dim == 0 and k2.dim == 0:
        rep.add("homotopy.strong", middle.dim == 0,
                detail=f"point {(i1, i2)}: transverse criterion with strong inputs "
                       "gives a strong output")


def induced_poisson(datum: CoisotropicDatum) -> VerificationReport:
    """L - c*L_G per object, cross-point rank comparison, and the 0-shifted
    Poisson conditions on the result."""
    from .groupoid import induced_dirac
    rep = VerificationReport("induced_poisson")
    c = datum.morphism
    out = []
    ledger = RankLedger()
    for i, ob_c in enumerate(c.dom.objects):
        lg = induced_dirac(c.cod.objects[c.obj_map[i]])
        pulled = pullback(c.c0[i], lg)
        l_new = dirac_sum(datum.dirac[i], dirac_negate(pulled))
        out.append(l_new)
        ledger.add(point=i, L=l_new.space.dim, kerL=kernel_of(l_new).dim,
                   cotrace=l_new.space.dim - kernel_of(l_new).dim)
    rep.add("induced.clean", ledger.constant("kerL"),
            detail="rank of ker(L - c*L_G) constant across sampled objects",
            ranks=ledger.ranks("kerL"))
    if ledger.constant("kerL"):
        zsp = zero_shifted_poisson_check(c.dom, out)
        rep.add("induced.zero_shifted_poisson", zsp.passed,
                detail="L - c*L_G satisfies the 0-shifted Poisson conditions")
        if not zsp.passed:
            rep.merge(zsp)
    return rep
