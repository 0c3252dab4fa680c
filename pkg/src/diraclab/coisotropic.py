"""Coisotropic structure checks for groupoid morphisms into a
quasi-symplectic bundle: compatibility, non-degeneracy, the chain map with
its two-way cohomology characterization, orbit constructors, and the
0-shifted Poisson conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .courant import (
    DiracFiber,
    ThreeFormFiber,
    TwoFormFiber,
    graph_two_form,
    kernel_of,
    pullback,
)
from .groupoid import (
    GroupoidFiberBundle,
    MorphismFiber,
    compatibility_check,
    induced_dirac,
    qs_check,
)
from .linalg import (
    DimensionMismatch,
    LinMap,
    Subspace,
    basis_vec,
    canonicalize,
    full_subspace,
    hstack,
    image,
    kernel,
    preimage,
    solve,
    vec_concat,
    vstack,
    zero_vec,
)
from .report import VerificationReport, witness_subspace, witness_vector


@dataclass(frozen=True)
class CoisotropicDatum:
    """A morphism fiber bundle c : C -> G with a Dirac fiber per C-object.

    The background 3-forms on C-objects are the `phi` fields of the C
    bundle's ObjectFibers; the compatibility check matches them against the
    pullbacks of the G-side 3-forms.
    """

    morphism: MorphismFiber
    dirac: tuple[DiracFiber, ...]
    name: str = ""

    def __post_init__(self):
        c = self.morphism
        if len(self.dirac) != len(c.dom.objects):
            raise DimensionMismatch("need one Dirac fiber per C-object")
        for ob, l in zip(c.dom.objects, self.dirac):
            if l.n != ob.dim:
                raise DimensionMismatch("Dirac fiber dim mismatch")

    @property
    def c_bundle(self) -> GroupoidFiberBundle:
        return self.morphism.dom

    @property
    def g_bundle(self) -> GroupoidFiberBundle:
        return self.morphism.cod


class ImageEscapesL(ValueError):
    """im(rho_C, c*sigma c_*) is not contained in L: the compatibility
    precondition of the non-degeneracy map fails upstream."""


def nondeg_assembly(datum: CoisotropicDatum, obj_idx: int):
    """The map A_C -> L x_c A_G at one object, with its codomain.

    Returns (matrix, fiber_product) where the matrix sends A_C into
    Q^{2 n_C + r_G} coordinates (v, alpha, a) and the fiber product is the
    subspace of the same ambient cut by the two linear conditions and
    membership of (v, alpha) in L.
    """
    c = datum.morphism
    ob_c = c.dom.objects[obj_idx]
    ob_g = c.cod.objects[c.obj_map[obj_idx]]
    l = datum.dirac[obj_idx]
    n, r_g = ob_c.dim, ob_g.adim
    amb = 2 * n + r_g

    c0, cA = c.c0[obj_idx], c.cA[obj_idx]
    # map: b -> (rho_C b, c* sigma c_* b, cA b)
    sig_pull = c0.transpose() @ ob_g.sigma @ cA
    mat = vstack(vstack(ob_c.rho, sig_pull), cA)
    for j in range(ob_c.adim):
        col = mat.apply(basis_vec(ob_c.adim, j))
        if not l.space.contains(col[:2 * n]):
            raise ImageEscapesL(
                f"object {obj_idx}: image of (rho_C, c*sigma c_*) leaves L")

    # fiber product: (v, alpha) in L, c0 v = rho_G a, alpha = c0^T sigma a
    l_embedded = canonicalize([vec_concat(v, zero_vec(r_g)) for v in l.space.basis],
                              amb)
    a_part = canonicalize([zero_vec(2 * n) + basis_vec(r_g, j) for j in range(r_g)],
                          amb)
    carrier = l_embedded.sum(a_part)
    cond1 = hstack(hstack(c0, LinMap.zero(ob_g.dim, n)), ob_g.rho.scale(-1))
    cond2 = hstack(hstack(LinMap.zero(n, n), LinMap.identity(n)),
                   (c0.transpose() @ ob_g.sigma).scale(-1))
    fiber_product = carrier.intersect(kernel(vstack(cond1, cond2)))
    return mat, fiber_product


def nondeg_map(datum: CoisotropicDatum, obj_idx: int) -> LinMap:
    mat, _ = nondeg_assembly(datum, obj_idx)
    return mat


def is_coisotropic(datum: CoisotropicDatum) -> VerificationReport:
    """Compatibility at all sampled C-arrows plus surjectivity of the
    non-degeneracy map at all sampled C-objects; 3-form compatibility is a
    data equality."""
    rep = VerificationReport(f"coiso.{datum.name or 'datum'}")
    c = datum.morphism

    gq = qs_check(c.cod)
    if not gq.passed:
        rep.add_hypothesis_violation("coiso.qs_target",
                                     "codomain bundle fails qs_check")
        return rep

    for i, ob_c in enumerate(c.dom.objects):
        ob_g = c.cod.objects[c.obj_map[i]]
        pulled = ob_g.phi.pullback(c.c0[i])
        rep.add("coiso.phi", ob_c.phi == pulled,
                detail=f"object {i}: background form equals c*phi")

    for k, ar in enumerate(c.dom.arrows):
        sub = compatibility_check(ar, datum.dirac[ar.src], datum.dirac[ar.tgt],
                                  c.pullback_two_form(k))
        for r in sub.records:
            rep.records.append(replace(r, detail=f"arrow {k}: " + r.detail))

    for i in range(len(c.dom.objects)):
        try:
            mat, fp = nondeg_assembly(datum, i)
        except ImageEscapesL as e:
            rep.add("coiso.nondeg", False, detail=str(e))
            continue
        im = image(mat)
        ok = im.issubset(fp) and im.dim == fp.dim
        wit = None
        if not ok:
            missing = [v for v in fp.basis if not im.contains(v)]
            wit = witness_vector(missing[0]) if missing else witness_subspace(im)
        rep.add("coiso.nondeg", ok,
                detail=f"object {i}: (rho_C, c*sigma c_*, c_*) onto L x_c A_G",
                witness=wit)
    return rep


def is_strong(datum: CoisotropicDatum) -> VerificationReport:
    """is_coisotropic plus injectivity: ker rho_C cap ker c_* = 0."""
    rep = is_coisotropic(datum)
    c = datum.morphism
    for i, ob_c in enumerate(c.dom.objects):
        ker = kernel(vstack(ob_c.rho, c.cA[i]))
        rep.add("coiso.strong", ker.dim == 0,
                detail=f"object {i}: ker rho_C cap ker c_* = 0",
                witness=None if ker.dim == 0 else witness_subspace(ker))
    return rep


@dataclass(frozen=True)
class ChainComplex3:
    """Three spaces with two composable maps; composite must vanish."""

    d1: LinMap
    d2: LinMap

    def __post_init__(self):
        if self.d2.cols != self.d1.rows:
            raise DimensionMismatch("chain maps not composable")
        if not (self.d2 @ self.d1).is_zero():
            raise ValueError("d2 . d1 != 0")

    def cohomology(self) -> tuple[Subspace, tuple[Subspace, Subspace], tuple[Subspace, Subspace]]:
        """(H^{-1}, H^0 as (ker, im), H^1 as (full, im))."""
        h_minus = kernel(self.d1)
        h_zero = (kernel(self.d2), image(self.d1))
        h_plus = (full_subspace(self.d2.rows), image(self.d2))
        return h_minus, h_zero, h_plus


def _quotient_iso(f: LinMap, v1: Subspace, w1: Subspace,
                  v2: Subspace, w2: Subspace) -> tuple[bool, bool]:
    """Is the induced map V1/W1 -> V2/W2 injective / surjective?

    Requires f(V1) <= V2 and f(W1) <= W2 (checked).
    """
    if not image(f, v1).issubset(v2) or not image(f, w1).issubset(w2):
        raise ValueError("map does not descend to the quotients")
    surj = image(f, v1).sum(w2) == v2
    inj = preimage(f, w2).intersect(v1) == w1
    return inj, surj


def chain_map_check(datum: CoisotropicDatum, obj_idx: int) -> VerificationReport:
    """Verify the two-row chain diagram at one object and cross-validate its
    cohomology against the non-degeneracy map.

    Top row: A_C -> L + c*A_G -> c*T G0 (coordinates on L are its echelon
    basis).  Bottom row: 0 -> T*C0 -> A_C*.  The two characterizations are
    computed independently: quasi-isomorphism iff the non-degeneracy map is
    bijective, middle-cohomology isomorphism iff it is surjective.
    """
    rep = VerificationReport("chain_map")
    c = datum.morphism
    ob_c = c.dom.objects[obj_idx]
    ob_g = c.cod.objects[c.obj_map[obj_idx]]
    l = datum.dirac[obj_idx]
    n, r_g, r_c = ob_c.dim, ob_g.adim, ob_c.adim
    c0, cA = c.c0[obj_idx], c.cA[obj_idx]

    l_basis = l.space.matrix()          # 2n x n
    p_t = LinMap.from_rows(l_basis.entries[:n], cols=n)       # L-coords -> T
    p_tstar = LinMap.from_rows(l_basis.entries[n:], cols=n)   # L-coords -> T*

    # top row
    sig_pull = c0.transpose() @ ob_g.sigma @ cA
    first = vstack(ob_c.rho, sig_pull)
    l_coords_cols = []
    for j in range(r_c):
        col = first.apply(basis_vec(r_c, j))
        x = solve(l_basis, col)
        if x is None:
            rep.add("chain_map.image_in_L", False,
                    detail=f"object {obj_idx}: image of (rho_C, c*sigma c_*) leaves L",
                    witness=witness_vector(col))
            return rep
        l_coords_cols.append(x)
    rep.add("chain_map.image_in_L", True,
            detail=f"object {obj_idx}: image of (rho_C, c*sigma c_*) lies in L")
    d1 = vstack(LinMap.from_cols(l_coords_cols, rows_dim=n), cA)
    d2 = hstack(c0 @ p_t, ob_g.rho.scale(-1))
    top = ChainComplex3(d1, d2)

    # bottom row: 0 -> T*C0 -> A_C*
    b1 = LinMap.zero(n, 0)
    b2 = ob_c.rho.transpose()
    bottom = ChainComplex3(b1, b2)

    # vertical maps; the right one sends w to the functional b -> <sigma(cA b), w>
    v_minus = LinMap.zero(0, r_c)
    v_mid = hstack(p_tstar.scale(-1), c0.transpose() @ ob_g.sigma)
    v_plus = (ob_g.sigma @ cA).transpose()

    sq1 = v_mid @ d1 == b1 @ v_minus
    sq2 = b2 @ v_mid == v_plus @ d2
    rep.add("chain_map.squares", sq1 and sq2,
            detail=f"object {obj_idx}: both squares of the chain diagram commute")
    if not (sq1 and sq2):
        return rep

    # independent cohomology computation
    h_m_top = kernel(d1)
    h0_top = (kernel(d2), image(d1))
    h1_top = (full_subspace(ob_g.dim), image(d2))
    h_m_bot = kernel(b1)
    h0_bot = (kernel(b2), image(b1))
    h1_bot = (full_subspace(r_c), image(b2))

    iso_minus = h_m_top.dim == 0  # target H^{-1} is 0
    inj0, surj0 = _quotient_iso(v_mid, *h0_top, *h0_bot)
    inj1, surj1 = _quotient_iso(v_plus, *h1_top, *h1_bot)
    quasi_iso = iso_minus and inj0 and surj0 and inj1 and surj1
    middle_iso = inj0 and surj0

    # the other characterization, computed from the assembled map
    mat, fp = nondeg_assembly(datum, obj_idx)
    im = image(mat)
    surjective = im.issubset(fp) and im.dim == fp.dim
    bijective = surjective and kernel(mat).dim == 0

    rep.add("chain_map.quasi_iso_iff_bijective", quasi_iso == bijective,
            detail=f"object {obj_idx}: quasi-isomorphism <=> bijection "
                   f"(quasi_iso={quasi_iso}, bijective={bijective})")
    rep.add("chain_map.middle_iso_iff_surjective", middle_iso == surjective,
            detail=f"object {obj_idx}: middle cohomology iso <=> surjection "
                   f"(middle_iso={middle_iso}, surjective={surjective})")
    return rep


@dataclass(frozen=True)
class OrbitSample:
    """Restricted fibers over one groupoid orbit: the inclusion morphism of
    the restricted bundle together with chosen anchor preimages."""

    inclusion: MorphismFiber     # C = G|_O -> G


def orbit_lagrangian(orbit: OrbitSample) -> CoisotropicDatum:
    """The canonical presymplectic 2-form on an orbit, as a Lagrangian datum.

    gamma is defined on T O = im rho by gamma(rho a, rho b) = <sigma a, rho b>;
    well-definedness (the value depends only on rho a) is checked, not assumed.
    """
    c = orbit.inclusion
    dirac = []
    for i, ob_c in enumerate(c.dom.objects):
        ob_g = c.cod.objects[c.obj_map[i]]
        c0, cA = c.c0[i], c.cA[i]
        rho_g_on_c = ob_g.rho @ cA       # A_C -> T_G
        # image of rho must be c0(T_C) and well-definedness must hold
        if image(rho_g_on_c) != image(c0):
            raise ValueError("orbit sample: anchor image differs from orbit tangent")
        ker_rho = kernel(ob_c.rho)
        pairing = ob_g.sigma @ cA        # columns sigma(a_j) in T_G*
        for z in ker_rho.basis:
            val = pairing.apply(z)
            if any((ob_g.rho @ cA).transpose().apply(val)[j] != 0
                   for j in range(ob_c.adim)):
                raise ValueError("orbit sample: gamma is not well-defined on rho(A)")
        # gamma in the abstract orbit coordinates: for basis u_k = c0(e_k),
        # pick a_k with rho_C a_k = e_k and set gamma_kl = <sigma a_k, c0 e_l>
        n = ob_c.dim
        rows = []
        for k in range(n):
            a_k = solve(ob_c.rho, basis_vec(n, k))
            if a_k is None:
                raise ValueError("orbit sample: rho_C is not onto the orbit tangent")
            sig = pairing.apply(a_k)
            rows.append(tuple(c0.transpose().apply(sig)))
        gamma = TwoFormFiber(LinMap.from_rows(rows, cols=n))
        dirac.append(graph_two_form(gamma))
    return CoisotropicDatum(c, tuple(dirac), name="orbit")


def zero_shifted_poisson_check(bundle: GroupoidFiberBundle,
                               dirac: list[DiracFiber]) -> VerificationReport:
    """s*L = t*L at sampled arrows and im rho = ker L at sampled objects;
    requires untwisted data (phi = 0)."""
    rep = VerificationReport("zsp")
    for i, ob in enumerate(bundle.objects):
        if not ob.phi.is_zero():
            rep.add_hypothesis_violation("zsp.untwisted",
                                         f"object {i} carries a nonzero 3-form")
            return rep
    for k, ar in enumerate(bundle.arrows):
        lhs = pullback(ar.s_star, dirac[ar.src])
        rhs = pullback(ar.t_star, dirac[ar.tgt])
        rep.add("zsp.invariance", lhs == rhs,
                detail=f"arrow {k}: s*L = t*L")
    for i, ob in enumerate(bundle.objects):
        im_rho = image(ob.rho)
        ker_l = kernel_of(dirac[i])
        # the invariance condition already forces im rho <= ker L; report
        # that half separately so a failure names the side that broke
        rep.add("zsp.kernel.contains", im_rho.issubset(ker_l),
                detail=f"object {i}: im rho <= ker L")
        rep.add("zsp.kernel", im_rho == ker_l,
                detail=f"object {i}: im rho = ker L",
                witness=None if im_rho == ker_l else
                {"im_rho": witness_subspace(im_rho), "ker_L": witness_subspace(ker_l)})
    return rep


def infinitesimal_coisotropic_check(cmaps: list[LinMap],
                                    l_n: list[DiracFiber],
                                    l_m: list[DiracFiber],
                                    phi_n: list[ThreeFormFiber],
                                    phi_m: list[ThreeFormFiber]) -> VerificationReport:
    """Constant-rank check of L_N x_c L_M over the sampled points.

    The fiber product is {((v, a), (w, b)) : c_* v = w, a = c*b}; the check
    passes iff its dimension is the same at every sample, and the report
    carries the per-point ranks either way.
    """
    rep = VerificationReport("infinitesimal")
    ranks = []
    for c, ln, lm, pn, pm in zip(cmaps, l_n, l_m, phi_n, phi_m):
        if pm.pullback(c) != pn:
            rep.add_hypothesis_violation("infinitesimal.twist",
                                         "c*phi_M != phi_N at a sample")
            return rep
        n_n, n_m = ln.n, lm.n
        amb = 2 * n_n + 2 * n_m
        carrier = canonicalize(
            [vec_concat(v, zero_vec(2 * n_m)) for v in ln.space.basis]
            + [zero_vec(2 * n_n) + w for w in lm.space.basis], amb)
        cond_v = hstack(hstack(c, LinMap.zero(n_m, n_n)),
                        hstack(LinMap.identity(n_m).scale(-1), LinMap.zero(n_m, n_m)))
        cond_a = hstack(hstack(LinMap.zero(n_n, n_n), LinMap.identity(n_n)),
                        hstack(LinMap.zero(n_n, n_m), c.transpose().scale(-1)))
        fp = carrier.intersect(kernel(vstack(cond_v, cond_a)))
        ranks.append(fp.dim)
    rep.add("infinitesimal.constant_rank", len(set(ranks)) <= 1,
            detail=f"fiber product ranks across samples: {ranks}", ranks=ranks)
    return rep


def identity_datum(bundle: GroupoidFiberBundle, name: str = "") -> CoisotropicDatum:
    """The induced Dirac structure on the identity morphism."""
    from .groupoid import identity_morphism
    dirac = tuple(induced_dirac(ob) for ob in bundle.objects)
    return CoisotropicDatum(identity_morphism(bundle), dirac,
                            name=name or f"identity.{bundle.name}")
