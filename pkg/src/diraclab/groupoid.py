"""Linear fiber model of Lie groupoids with multiplicative 2-forms.

A bundle is a finite sampled atlas: object fibers (tangent space, algebroid
fiber, anchor rho, infinitesimally multiplicative sigma, background 3-form),
arrow fibers (source/target differentials, the 2-form, left/right
translations, unit data), and composable-pair fibers (the multiplication
differential on the fiber product of tangents).  Every "for all points"
statement becomes "for all sampled fibers".

Translations are stored, not derived: deriving them would need global
multiplication, so scenario builders supply closed forms and qs_check
verifies the defining identities.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .courant import (
    DiracFiber,
    ThreeFormFiber,
    TwoFormFiber,
    dirac_sum,
    graph_two_form,
    pullback,
)
from .linalg import (
    DimensionMismatch,
    LinMap,
    Subspace,
    basis_vec,
    canonicalize,
    hstack,
    kernel,
    solve,
    vec_concat,
    vstack,
)
from .report import VerificationReport, witness_subspace, witness_vector


@dataclass(frozen=True)
class ObjectFiber:
    """Linear data of a groupoid at an object: T, A, rho, sigma, phi."""

    dim: int
    adim: int
    rho: LinMap            # A -> T
    sigma: LinMap          # A -> T*, column j = sigma(a_j)
    phi: ThreeFormFiber

    def __post_init__(self):
        if self.rho.rows != self.dim or self.rho.cols != self.adim:
            raise DimensionMismatch("rho shape")
        if self.sigma.rows != self.dim or self.sigma.cols != self.adim:
            raise DimensionMismatch("sigma shape")
        if self.phi.dim != self.dim:
            raise DimensionMismatch("phi dim")


@dataclass(frozen=True)
class ArrowFiber:
    """Linear data at an arrow g: differentials, 2-form, translations."""

    src: int
    tgt: int
    dim: int
    s_star: LinMap             # T_g -> T_src
    t_star: LinMap             # T_g -> T_tgt
    omega: TwoFormFiber | None
    left: LinMap               # A_src -> T_g, a -> a^L_g
    right: LinMap              # A_tgt -> T_g, a -> a^R_g
    unit: bool = False
    u_star: LinMap | None = None   # T_obj -> T_g at units


@dataclass(frozen=True)
class ComposablePairFiber:
    """A pair (g, h) with src(g) = tgt(h), product arrow gh, and m_star
    expressed on the echelon basis of the tangent fiber product."""

    g: int
    h: int
    gh: int
    tangent: Subspace          # {(v, w) : s_* v = t_* w} in T_g + T_h
    m_star: LinMap             # tangent-basis coordinates -> T_gh


@dataclass(frozen=True)
class GroupoidFiberBundle:
    objects: tuple[ObjectFiber, ...]
    arrows: tuple[ArrowFiber, ...]
    pairs: tuple[ComposablePairFiber, ...]
    name: str = ""

    def __post_init__(self):
        for a in self.arrows:
            if not (0 <= a.src < len(self.objects) and 0 <= a.tgt < len(self.objects)):
                raise DimensionMismatch("arrow src/tgt out of range")
            if a.s_star.cols != a.dim or a.t_star.cols != a.dim:
                raise DimensionMismatch("arrow differential shape")
            if a.s_star.rows != self.objects[a.src].dim:
                raise DimensionMismatch("s_star target dim")
            if a.t_star.rows != self.objects[a.tgt].dim:
                raise DimensionMismatch("t_star target dim")
            if a.left.cols != self.objects[a.src].adim or a.left.rows != a.dim:
                raise DimensionMismatch("left translation shape")
            if a.right.cols != self.objects[a.tgt].adim or a.right.rows != a.dim:
                raise DimensionMismatch("right translation shape")
        for p in self.pairs:
            g, h = self.arrows[p.g], self.arrows[p.h]
            if g.src != h.tgt:
                raise DimensionMismatch("pair not composable")
            if p.tangent != pair_tangent(g, h):
                raise DimensionMismatch("pair tangent is not the canonical fiber product")
            if p.m_star.cols != p.tangent.dim or p.m_star.rows != self.arrows[p.gh].dim:
                raise DimensionMismatch("m_star shape")

    def object_dim(self) -> int:
        dims = {o.dim for o in self.objects}
        if len(dims) != 1:
            raise DimensionMismatch("object fibers of mixed dimension")
        return dims.pop()


def pair_tangent(g: ArrowFiber, h: ArrowFiber) -> Subspace:
    """{(v, w) in T_g + T_h : s_* v = t_* w}, canonical echelon basis."""
    constraint = hstack(g.s_star, h.t_star.scale(-1))
    return kernel(constraint)


def make_pair(bundle_arrows, g_idx: int, h_idx: int, gh_idx: int,
              m_of) -> ComposablePairFiber:
    """Build a pair fiber from a closed-form multiplication differential.

    m_of maps (v, w) vectors (as one concatenated tuple) to T_gh vectors.
    """
    g, h = bundle_arrows[g_idx], bundle_arrows[h_idx]
    tang = pair_tangent(g, h)
    cols = [m_of(b) for b in tang.basis]
    m_star = LinMap.from_cols(cols, rows_dim=bundle_arrows[gh_idx].dim)
    return ComposablePairFiber(g_idx, h_idx, gh_idx, tang, m_star)


@dataclass(frozen=True)
class MorphismFiber:
    """Differentials of a groupoid morphism at sampled objects and arrows."""

    dom: GroupoidFiberBundle
    cod: GroupoidFiberBundle
    obj_map: tuple[int, ...]
    c0: tuple[LinMap, ...]         # T_dom_obj -> T_cod_obj
    cA: tuple[LinMap, ...]         # A_dom_obj -> A_cod_obj
    arrow_map: tuple[int, ...]
    c1: tuple[LinMap, ...]         # T_dom_arrow -> T_cod_arrow

    def __post_init__(self):
        if len(self.obj_map) != len(self.dom.objects) or len(self.c0) != len(self.dom.objects):
            raise DimensionMismatch("object maps must cover all sampled objects")
        if len(self.arrow_map) != len(self.dom.arrows) or len(self.c1) != len(self.dom.arrows):
            raise DimensionMismatch("arrow maps must cover all sampled arrows")
        for i, a in enumerate(self.dom.arrows):
            j = self.arrow_map[i]
            b = self.cod.arrows[j]
            if self.obj_map[a.src] != b.src or self.obj_map[a.tgt] != b.tgt:
                raise DimensionMismatch("morphism does not respect src/tgt")
            c1 = self.c1[i]
            # intertwining with source/target differentials
            if b.s_star @ c1 != self.c0[a.src] @ a.s_star:
                raise DimensionMismatch("morphism fails s-intertwining")
            if b.t_star @ c1 != self.c0[a.tgt] @ a.t_star:
                raise DimensionMismatch("morphism fails t-intertwining")
            # translations are functorial; this pins cA as the restriction
            # of c1 to algebroid fibers
            if c1 @ a.right != b.right @ self.cA[a.tgt]:
                raise DimensionMismatch("morphism fails right-translation equivariance")
            if c1 @ a.left != b.left @ self.cA[a.src]:
                raise DimensionMismatch("morphism fails left-translation equivariance")

    def pullback_two_form(self, arrow_idx: int) -> TwoFormFiber:
        """c*omega on the domain arrow tangent."""
        img = self.cod.arrows[self.arrow_map[arrow_idx]]
        if img.omega is None:
            raise ValueError("codomain arrow carries no 2-form")
        return img.omega.pullback(self.c1[arrow_idx])


def identity_morphism(bundle: GroupoidFiberBundle) -> MorphismFiber:
    nobj = len(bundle.objects)
    narr = len(bundle.arrows)
    return MorphismFiber(
        bundle, bundle,
        tuple(range(nobj)),
        tuple(LinMap.identity(o.dim) for o in bundle.objects),
        tuple(LinMap.identity(o.adim) for o in bundle.objects),
        tuple(range(narr)),
        tuple(LinMap.identity(a.dim) for a in bundle.arrows),
    )


def qs_check(bundle: GroupoidFiberBundle) -> VerificationReport:
    """All quasi-symplectic identity checks on every sampled fiber.

    Items 1-3 are object-level anchor/sigma identities; item 4 relates
    sigma to the 2-form through translations; the remaining records cover
    the dimension constraint, units, the kernel non-degeneracy condition
    (at units as the acceptance condition, at other arrows as a stronger
    diagnostic), translation consistency, and multiplicativity at pairs.
    """
    rep = VerificationReport(f"qs.{bundle.name or 'bundle'}")
    if not bundle.objects:
        rep.add_hypothesis_violation("qs.populated", "bundle has no object fibers")
        return rep
    n = bundle.object_dim()

    for i, ob in enumerate(bundle.objects):
        m1 = ob.rho.transpose() @ ob.sigma
        ok = m1.is_antisymmetric()
        wit = None
        if not ok:
            bad = next((a, b) for a in range(ob.adim) for b in range(ob.adim)
                       if m1.entries[a][b] != -m1.entries[b][a])
            wit = {"object": i, "algebroid_pair": list(bad)}
        rep.add("qs.lemma.item1", ok, detail=f"object {i}: rho^T sigma antisymmetric",
                witness=wit)

        stacked = vstack(ob.rho, ob.sigma)
        ker12 = kernel(stacked)
        rep.add("qs.lemma.item2", ker12.dim == 0,
                detail=f"object {i}: ker rho cap ker sigma = 0",
                witness=None if ker12.dim == 0 else
                {"object": i, **witness_subspace(ker12)})

        im = canonicalize([vec_concat(ob.rho.apply(basis_vec(ob.adim, j)),
                                      ob.sigma.apply(basis_vec(ob.adim, j)))
                           for j in range(ob.adim)], 2 * n)
        ker_dual = kernel(hstack(ob.sigma.transpose(), ob.rho.transpose()))
        rep.add("qs.lemma.item3", im == ker_dual,
                detail=f"object {i}: ker(rho* + sigma*) = im(rho, sigma)",
                witness=None if im == ker_dual else
                {"object": i, "image": witness_subspace(im),
                 "kernel": witness_subspace(ker_dual)})

    for k, ar in enumerate(bundle.arrows):
        src, tgt = bundle.objects[ar.src], bundle.objects[ar.tgt]
        rep.add("qs.dim", ar.dim == 2 * n,
                detail=f"arrow {k}: dim T_g = 2 dim T")

        trans_ok = (ar.s_star @ ar.left == src.rho.scale(-1)
                    and (ar.t_star @ ar.left).is_zero()
                    and (ar.s_star @ ar.right).is_zero()
                    and ar.t_star @ ar.right == tgt.rho)
        rep.add("qs.translations", trans_ok,
                detail=f"arrow {k}: s(aL) = -rho a, t(aR) = rho a")

        if ar.omega is None:
            rep.add_hypothesis_violation("qs.lemma.item4",
                                         f"arrow {k} carries no 2-form")
            continue
        om = ar.omega.matrix
        left_ok = ar.left.transpose() @ om == src.sigma.transpose() @ ar.s_star
        right_ok = ar.right.transpose() @ om == tgt.sigma.transpose() @ ar.t_star
        wit = None
        if not left_ok or not right_ok:
            wit = {"arrow": k, "side": "left" if not left_ok else "right"}
        rep.add("qs.lemma.item4", left_ok and right_ok,
                detail=f"arrow {k}: s*(sigma a) = i_aL omega, t*(sigma a) = i_aR omega",
                witness=wit)

        kw = kernel(om).intersect(kernel(ar.s_star)).intersect(kernel(ar.t_star))
        check_id = "qs.nondeg.units" if ar.unit else "qs.nondeg.arrows"
        rep.add(check_id, kw.dim == 0,
                detail=f"arrow {k}: ker omega cap ker s cap ker t = 0",
                witness=None if kw.dim == 0 else {"arrow": k, **witness_subspace(kw)})

        if ar.unit:
            if ar.u_star is None:
                rep.add("qs.units", False, detail=f"unit arrow {k} missing u_star")
            else:
                uid = (ar.s_star @ ar.u_star == LinMap.identity(n)
                       and ar.t_star @ ar.u_star == LinMap.identity(n))
                uom = ar.omega.pullback(ar.u_star).matrix.is_zero()
                rep.add("qs.units", uid and uom,
                        detail=f"arrow {k}: s u = t u = id and 1*omega = 0")

    for idx, p in enumerate(bundle.pairs):
        g, h, gh = bundle.arrows[p.g], bundle.arrows[p.h], bundle.arrows[p.gh]
        if g.omega is None or h.omega is None or gh.omega is None:
            rep.add_hypothesis_violation("qs.multiplicative", f"pair {idx} lacks 2-forms")
            continue
        dim_g = g.dim
        ok = True
        basis = p.tangent.basis
        for a_i, x in enumerate(basis):
            for y in basis[a_i:]:
                lhs = gh.omega(p.m_star.apply(coords(p.tangent, x)),
                               p.m_star.apply(coords(p.tangent, y)))
                rhs = g.omega(x[:dim_g], y[:dim_g]) + h.omega(x[dim_g:], y[dim_g:])
                if lhs != rhs:
                    ok = False
                    break
            if not ok:
                break
        rep.add("qs.multiplicative", ok,
                detail=f"pair {idx}: m*omega = pr1*omega + pr2*omega")

        if h.unit:
            ok = True
            wit = None
            for j in range(bundle.objects[g.src].adim):
                a = basis_vec(bundle.objects[g.src].adim, j)
                v = solve(g.s_star, bundle.objects[g.src].rho.apply(a))
                if v is None:
                    ok = False
                    wit = {"pair": idx, "reason": "source differential not surjective"}
                    break
                w = vec_concat(v, h.right.apply(a))
                if not p.tangent.contains(w):
                    ok = False
                    wit = {"pair": idx, **witness_vector(w)}
                    break
                got = p.m_star.apply(coords(p.tangent, w))
                want = tuple(x + y for x, y in zip(v, g.left.apply(a)))
                if got != want:
                    ok = False
                    wit = {"pair": idx, "algebroid_index": j,
                           "got": [str(x) for x in got],
                           "want": [str(x) for x in want]}
                    break
            rep.add("qs.pair.translation", ok,
                    detail=f"pair {idx}: m(v, a) = v + aL", witness=wit)
    return rep


def coords(space: Subspace, v) -> tuple:
    """Coordinates of v in the echelon basis of the subspace."""
    mat = space.matrix()
    x = solve(mat, tuple(v))
    if x is None:
        raise ValueError("vector not in subspace")
    return x


def induced_dirac(obj: ObjectFiber) -> DiracFiber:
    """im(rho, sigma) as a Dirac fiber; errors if it is not Lagrangian."""
    n = obj.dim
    gens = [vec_concat(obj.rho.apply(basis_vec(obj.adim, j)),
                       obj.sigma.apply(basis_vec(obj.adim, j)))
            for j in range(obj.adim)]
    space = canonicalize(gens, 2 * n)
    if space.dim != n:
        raise ValueError(
            f"im(rho, sigma) has dim {space.dim} != {n}: fiber is not quasi-symplectic")
    ker_dual = kernel(hstack(obj.sigma.transpose(), obj.rho.transpose()))
    if space != ker_dual:
        raise ValueError("im(rho, sigma) != ker(rho* + sigma*): invalid input fiber")
    return DiracFiber.from_subspace(space)


def compatibility_check(arrow: ArrowFiber, l_src: DiracFiber, l_tgt: DiracFiber,
                        pullback_form: TwoFormFiber,
                        check_id: str = "coiso.compat") -> VerificationReport:
    """t*L = s*L + graph(c*omega) at one sampled arrow, exactly."""
    rep = VerificationReport(check_id)
    lhs = pullback(arrow.t_star, l_tgt)
    rhs = dirac_sum(pullback(arrow.s_star, l_src), graph_two_form(pullback_form))
    ok = lhs == rhs
    wit = None
    if not ok:
        extra = [v for v in lhs.space.basis if not rhs.space.contains(v)]
        wit = witness_vector(extra[0]) if extra else \
            witness_vector(next(v for v in rhs.space.basis if not lhs.space.contains(v)))
    rep.add(check_id, ok, detail="t*L = s*L + graph(c*omega)", witness=wit)
    return rep


def gauge_qs(bundle: GroupoidFiberBundle,
             gamma: list[TwoFormFiber],
             dgamma: list[ThreeFormFiber]) -> tuple[GroupoidFiberBundle, VerificationReport]:
    """Gauge transform (omega, phi) -> (omega + s*gamma - t*gamma, phi + dgamma).

    dgamma is caller-supplied data: fibers cannot differentiate.  The
    transformed bundle is re-checked, not assumed quasi-symplectic.
    """
    if len(gamma) != len(bundle.objects) or len(dgamma) != len(bundle.objects):
        raise DimensionMismatch("need one gamma and dgamma fiber per object")
    new_objects = []
    for i, ob in enumerate(bundle.objects):
        new_objects.append(replace(ob, phi=ob.phi.add(dgamma[i]),
                                   sigma=gauged_sigma(ob, gamma[i])))
    new_arrows = []
    for ar in bundle.arrows:
        if ar.omega is None:
            new_arrows.append(ar)
            continue
        shift = gamma[ar.src].pullback(ar.s_star).matrix - \
            gamma[ar.tgt].pullback(ar.t_star).matrix
        new_arrows.append(replace(ar, omega=TwoFormFiber(ar.omega.matrix + shift)))
    out = GroupoidFiberBundle(tuple(new_objects), tuple(new_arrows), bundle.pairs,
                              name=f"{bundle.name}.gauged")
    before = qs_check(bundle)
    after = qs_check(out)
    rep = VerificationReport("gauge_qs")
    if before.passed:
        rep.add("gauge.preserves_qs", after.passed,
                detail="gauge transform of a quasi-symplectic bundle stays quasi-symplectic")
    else:
        rep.add_hypothesis_violation("gauge.preserves_qs", "input bundle fails qs_check")
    return out, rep


def gauged_sigma(ob: ObjectFiber, gamma: TwoFormFiber) -> LinMap:
    # sigma'(a) = sigma(a) - i_{rho a} gamma
    return ob.sigma - gamma.flat() @ ob.rho


def nat_trans_form_identity(f: MorphismFiber, g: MorphismFiber,
                            theta) -> VerificationReport:
    """g*omega - f*omega = t*(theta*omega) - s*(theta*omega) at sampled arrows.

    theta maps each domain object index to a fiber with attributes
    `arrow` (codomain arrow index) and `theta_star` (T_x dom -> T_theta(x)).
    """
    if f.dom is not g.dom or f.cod is not g.cod:
        raise DimensionMismatch("natural transformation needs a parallel pair")
    rep = VerificationReport("nat_trans.form")
    theta_form = {}
    for x, fib in theta.items():
        om = f.cod.arrows[fib.arrow].omega
        theta_form[x] = om.pullback(fib.theta_star).matrix
    for k, ar in enumerate(f.dom.arrows):
        if ar.src not in theta_form or ar.tgt not in theta_form:
            continue
        lhs = g.pullback_two_form(k).matrix - f.pullback_two_form(k).matrix
        rhs = (ar.t_star.transpose() @ theta_form[ar.tgt] @ ar.t_star
               - ar.s_star.transpose() @ theta_form[ar.src] @ ar.s_star)
        rep.add("nat_trans.form.arrow", lhs == rhs,
                detail=f"arrow {k}: g*omega - f*omega = t*theta*omega - s*theta*omega")
    return rep


def star_composite_form_identity(cod: GroupoidFiberBundle, theta, eta,
                                 composite) -> VerificationReport:
    """(eta * theta)*omega = eta*omega + theta*omega per sampled object."""
    rep = VerificationReport("nat_trans.star")
    for x in composite:
        if x not in theta or x not in eta:
            continue
        forms = {}
        for nameo, fib in (("theta", theta[x]), ("eta", eta[x]), ("comp", composite[x])):
            om = cod.arrows[fib.arrow].omega
            forms[nameo] = om.pullback(fib.theta_star).matrix
        rep.add("nat_trans.star.object", forms["comp"] == forms["eta"] + forms["theta"],
                detail=f"object {x}: (eta * theta)*omega = eta*omega + theta*omega")
    return rep
