"""Closed-form scenario builders.

Every builder emits exact rational fibers: rotations come from the rational
parametrization (1 - t^2, 2t)/(1 + t^2) of the circle, so differentials,
translations and chart maps all stay in Q.  Builders are deterministic
given (parameters, seed).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coisotropic import CoisotropicDatum, OrbitSample, orbit_lagrangian
from .courant import (
    DiracFiber,
    ThreeFormFiber,
    TwoFormFiber,
    graph_two_form,
)
from .dorfman import Poly, PolyDiracFrame, PolyForm, PolySection, contract, d, zero_poly
from .groupoid import (
    ArrowFiber,
    ComposablePairFiber,
    GroupoidFiberBundle,
    MorphismFiber,
    ObjectFiber,
    make_pair,
)
from .linalg import (
    LinMap,
    Vec,
    as_vec,
    basis_vec,
    frac,
    hstack,
    kernel,
    vec_concat,
    vstack,
    zero_vec,
)

F = Fraction


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    params: dict
    seed: int = 0
    samples: dict | None = None


def circle_point(t) -> tuple[Fraction, Fraction]:
    """Rational point on the unit circle from the tangent-half parameter."""
    t = frac(t)
    den = 1 + t * t
    return ((1 - t * t) / den, 2 * t / den)


def rotation_block(c, s, blocks: int) -> LinMap:
    """Block-diagonal rotation by (c, s) acting on Q^{2 blocks}."""
    rows = []
    for b in range(blocks):
        r1 = [F(0)] * (2 * blocks)
        r2 = [F(0)] * (2 * blocks)
        r1[2 * b], r1[2 * b + 1] = c, -s
        r2[2 * b], r2[2 * b + 1] = s, c
        rows.extend([r1, r2])
    return LinMap.from_rows(rows)


def rotation_field(p: Vec) -> Vec:
    """The generator of simultaneous rotation at p: (x, y) -> (-y, x)."""
    out = []
    for b in range(len(p) // 2):
        out.extend([-p[2 * b + 1], p[2 * b]])
    return tuple(out)


def std_symplectic(n2: int) -> TwoFormFiber:
    rows = [[F(0)] * n2 for _ in range(n2)]
    for i in range(0, n2, 2):
        rows[i][i + 1] = F(1)
        rows[i + 1][i] = F(-1)
    return TwoFormFiber(LinMap.from_rows(rows))


# ---------------------------------------------------------------------------
# point and unit groupoids

def point_bundle(name: str = "point") -> GroupoidFiberBundle:
    ob = ObjectFiber(0, 0, LinMap.zero(0, 0), LinMap.zero(0, 0), ThreeFormFiber.zero(0))
    unit = ArrowFiber(0, 0, 0, LinMap.zero(0, 0), LinMap.zero(0, 0),
                      TwoFormFiber.zero(0), LinMap.zero(0, 0), LinMap.zero(0, 0),
                      unit=True, u_star=LinMap.zero(0, 0))
    arrows = (unit,)
    pair = make_pair(arrows, 0, 0, 0, lambda v: ())
    return GroupoidFiberBundle((ob,), arrows, (pair,), name=name)


def unit_groupoid(n: int, num_objects: int = 2,
                  name: str = "unit") -> GroupoidFiberBundle:
    """The trivial groupoid M over M: only unit arrows, A = 0."""
    objects = tuple(ObjectFiber(n, 0, LinMap.zero(n, 0), LinMap.zero(n, 0),
                                ThreeFormFiber.zero(n))
                    for _ in range(num_objects))
    arrows = []
    for i in range(num_objects):
        arrows.append(ArrowFiber(i, i, n, LinMap.identity(n), LinMap.identity(n),
                                 TwoFormFiber.zero(n), LinMap.zero(n, 0),
                                 LinMap.zero(n, 0), unit=True,
                                 u_star=LinMap.identity(n)))
    arrows = tuple(arrows)
    pairs = tuple(make_pair(arrows, i, i, i, lambda v, n=n: v[:n])
                  for i in range(num_objects))
    return GroupoidFiberBundle(objects, arrows, pairs, name=name)


# ---------------------------------------------------------------------------
# pair groupoid of a constant symplectic vector space

def build_pair_groupoid(n: int, omega_base: TwoFormFiber | None = None,
                        num_objects: int = 3,
                        name: str = "pair") -> GroupoidFiberBundle:
    """Fibers of M x M over M for a constant symplectic form on Q^n."""
    if omega_base is None:
        omega_base = std_symplectic(n)
    if not omega_base.is_nondegenerate():
        raise ValueError("pair groupoid needs a nondegenerate base form")
    sigma = omega_base.flat()  # sigma(a) = i_a omega
    obj = ObjectFiber(n, n, LinMap.identity(n), sigma, ThreeFormFiber.zero(n))
    objects = tuple(obj for _ in range(num_objects))

    def arrow(i: int, j: int) -> ArrowFiber:
        s_star = hstack(LinMap.zero(n, n), LinMap.identity(n))
        t_star = hstack(LinMap.identity(n), LinMap.zero(n, n))
        om = TwoFormFiber(LinMap(2 * n, 2 * n,
                                 hstack(omega_base.matrix, LinMap.zero(n, n)).entries
                                 + hstack(LinMap.zero(n, n),
                                          omega_base.matrix.scale(-1)).entries))
        left = vstack(LinMap.zero(n, n), LinMap.identity(n).scale(-1))
        right = vstack(LinMap.identity(n), LinMap.zero(n, n))
        unit = i == j
        u_star = vstack(LinMap.identity(n), LinMap.identity(n)) if unit else None
        return ArrowFiber(j, i, 2 * n, s_star, t_star, om, left, right,
                          unit=unit, u_star=u_star)

    # arrow (i, j) goes from object j to object i
    index = {}
    arrows = []
    for i in range(num_objects):
        for j in range(num_objects):
            index[(i, j)] = len(arrows)
            arrows.append(arrow(i, j))
    arrows = tuple(arrows)

    def m_of(v, i=None):
        return v[:n] + v[3 * n:]

    pairs = []
    for i in range(num_objects):
        for j in range(num_objects):
            for k in range(num_objects):
                if (i + j + k) % 2 == 0 or num_objects <= 2:
                    pairs.append(make_pair(arrows, index[(i, j)], index[(j, k)],
                                           index[(i, k)], m_of))
    # pairs with a unit second factor exercise the translation identity
    for i in range(num_objects):
        for j in range(num_objects):
            if i != j:
                pairs.append(make_pair(arrows, index[(i, j)], index[(j, j)],
                                       index[(i, j)], m_of))
    return GroupoidFiberBundle(objects, arrows, tuple(pairs), name=name)


def corrupt_sigma(bundle: GroupoidFiberBundle,
                  obj_idx: int = 0) -> GroupoidFiberBundle:
    """One-bit corruption fixture: flip the sign of one sigma entry."""
    from dataclasses import replace
    ob = bundle.objects[obj_idx]
    rows = [list(r) for r in ob.sigma.entries]
    found = False
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if x != 0:
                rows[i][j] = -x
                found = True
                break
        if found:
            break
    if not found:
        rows[0][0] = F(1)
    bad = replace(ob, sigma=LinMap.from_rows(rows, cols=ob.sigma.cols))
    objects = tuple(bad if k == obj_idx else o for k, o in enumerate(bundle.objects))
    return GroupoidFiberBundle(objects, bundle.arrows, bundle.pairs,
                               name=f"{bundle.name}.corrupt-sigma")


# ---------------------------------------------------------------------------
# cotangent groupoids of the circle and the 2-torus

def build_cotangent_circle(levels, rotation_params,
                           name: str = "tcircle") -> GroupoidFiberBundle:
    """T*S1 over R: objects are levels xi, arrows carry (rotation, xi).

    rho = 0 and sigma(d/dtheta) = -dxi for the 2-form dxi ^ dtheta.
    """
    levels = [frac(x) for x in levels]
    objects = tuple(ObjectFiber(1, 1, LinMap.zero(1, 1),
                                LinMap.from_rows([[-1]]), ThreeFormFiber.zero(1))
                    for _ in levels)
    om = TwoFormFiber(LinMap.from_rows([[0, -1], [1, 0]]))
    proj = LinMap.from_rows([[0, 1]])
    trans = LinMap.from_rows([[1], [0]])
    arrows = []
    index = {}
    for li in range(len(levels)):
        for t in rotation_params:
            t = frac(t)
            unit = t == 0
            index[(li, t)] = len(arrows)
            arrows.append(ArrowFiber(li, li, 2, proj, proj, om, trans, trans,
                                     unit=unit,
                                     u_star=LinMap.from_rows([[0], [1]]) if unit else None))
    arrows = tuple(arrows)

    def m_of(v):
        # tangent fiber product basis vectors are (a1, b, a2, b)
        return (v[0] + v[2], v[1])

    pairs = []
    params = [frac(t) for t in rotation_params]
    for li in range(len(levels)):
        for t1 in params:
            for t2 in params:
                try:
                    t12 = compose_half_tangents(t1, t2)
                except ValueError:
                    continue
                if (li, t12) in index:
                    pairs.append(make_pair(arrows, index[(li, t1)],
                                           index[(li, t2)], index[(li, t12)], m_of))
    return GroupoidFiberBundle(objects, arrows, tuple(pairs), name=name)


def compose_half_tangents(t1, t2):
    """Half-tangent parameter of the composed rotation (undefined at angle pi)."""
    t1, t2 = frac(t1), frac(t2)
    if t1 * t2 == 1:
        raise ValueError("composition hits the angle-pi chart boundary")
    return (t1 + t2) / (1 - t1 * t2)


def build_cotangent_torus(points, rotation_params,
                          name: str = "ttorus") -> GroupoidFiberBundle:
    """T*T^2 over R^2, same shape as the circle case with two angles."""
    points = [as_vec(p) for p in points]
    objects = tuple(ObjectFiber(2, 2, LinMap.zero(2, 2),
                                LinMap.identity(2).scale(-1), ThreeFormFiber.zero(2))
                    for _ in points)
    # basis (dtheta1, dtheta2, dxi1, dxi2); omega = sum dxi_i ^ dtheta_i
    om = TwoFormFiber(LinMap.from_rows([
        [0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]]))
    proj = LinMap.from_rows([[0, 0, 1, 0], [0, 0, 0, 1]])
    trans = LinMap.from_rows([[1, 0], [0, 1], [0, 0], [0, 0]])
    arrows = []
    index = {}
    for li in range(len(points)):
        for ts in rotation_params:
            ts = (frac(ts[0]), frac(ts[1]))
            unit = ts == (0, 0)
            index[(li, ts)] = len(arrows)
            arrows.append(ArrowFiber(li, li, 4, proj, proj, om, trans, trans,
                                     unit=unit,
                                     u_star=vstack(LinMap.zero(2, 2),
                                                   LinMap.identity(2)) if unit else None))
    arrows = tuple(arrows)

    def m_of(v):
        return (v[0] + v[4], v[1] + v[5], v[2], v[3])

    pairs = []
    params = [(frac(a), frac(b)) for a, b in rotation_params]
    for li in range(len(points)):
        for ts1 in params:
            for ts2 in params:
                try:
                    ts12 = (compose_half_tangents(ts1[0], ts2[0]),
                            compose_half_tangents(ts1[1], ts2[1]))
                except ValueError:
                    continue
                if (li, ts12) in index:
                    pairs.append(make_pair(arrows, index[(li, ts1)],
                                           index[(li, ts2)], index[(li, ts12)], m_of))
    return GroupoidFiberBundle(objects, arrows, tuple(pairs), name=name)


# ---------------------------------------------------------------------------
# Hamiltonian circle / torus actions on C^n

@dataclass(frozen=True)
class HamiltonianActionDatum:
    """Action groupoid fibers of a quasi-symplectic groupoid acting on a
    Dirac manifold, with the moment differentials and Dirac fibers."""

    datum: CoisotropicDatum          # projection morphism with L fibers
    moment: tuple[LinMap, ...]       # mu_* per object sample (= c0)
    group_dim: int                   # number of circle factors

    @property
    def action_bundle(self) -> GroupoidFiberBundle:
        return self.datum.c_bundle


def moment_row(p: Vec, block: int) -> Vec:
    """d(|z_block|^2/2) at p."""
    out = [F(0)] * len(p)
    out[2 * block] = p[2 * block]
    out[2 * block + 1] = p[2 * block + 1]
    return tuple(out)


def rotation_field_block(p: Vec, block: int) -> Vec:
    out = [F(0)] * len(p)
    out[2 * block] = -p[2 * block + 1]
    out[2 * block + 1] = p[2 * block]
    return tuple(out)


def _action_object(p: Vec, circles: list[int], n2: int) -> ObjectFiber:
    rho = LinMap.from_cols([sum_blocks(p, blocks) for blocks in circles],
                           rows_dim=n2)
    return ObjectFiber(n2, len(circles), rho, LinMap.zero(n2, len(circles)),
                       ThreeFormFiber.zero(n2))


def sum_blocks(p: Vec, blocks) -> Vec:
    acc = [F(0)] * len(p)
    for b in blocks:
        v = rotation_field_block(p, b)
        acc = [x + y for x, y in zip(acc, v)]
    return tuple(acc)


def build_circle_hamiltonian(n: int, level, ts=(0, F(1, 2), F(-1, 2), 1),
                             extra_points=(), name: str = "circle") -> HamiltonianActionDatum:
    """The circle acting diagonally on C^n with moment sum|z_i|^2/2 and
    L the graph of the standard symplectic form.

    Points are sampled on the given level set (2*level must be a rational
    square) plus any extra off-level points supplied by the caller.
    """
    level = frac(level)
    pts = level_points(n, level) + [as_vec(p) for p in extra_points]
    scn = _build_rotation_hamiltonian(pts, [[b for b in range(n)]],
                                      [(frac(t),) for t in ts], name)
    return scn.ham


def circle_scenario(n: int, level, ts=(0, F(1, 2), F(-1, 2), 1),
                    extra_points=(), name: str = "circle") -> RotationScenario:
    level = frac(level)
    pts = level_points(n, level) + [as_vec(p) for p in extra_points]
    return _build_rotation_hamiltonian(pts, [[b for b in range(n)]],
                                       [(frac(t),) for t in ts], name)


def level_points(n: int, level, count: int | None = None) -> list[Vec]:
    """Rational points with sum |z_i|^2 = 2*level (needs a rational root)."""
    level = frac(level)
    r = rational_sqrt(2 * level)
    if r is None:
        raise ValueError(f"2*level = {2 * level} is not a rational square")
    base = [circle_point(t) for t in (0, 1, F(1, 2), F(-1, 3))]
    pts = []
    if n == 1:
        pts = [(r * c, r * s) for (c, s) in base]
    else:
        mixes = [circle_point(t) for t in (F(1, 2), F(1, 3), F(2, 5))]
        for lam, nu in mixes:
            for (c1, s1), (c2, s2) in zip(base, base[1:]):
                p = [r * lam * c1, r * lam * s1, r * nu * c2, r * nu * s2]
                p += [F(0)] * (2 * n - 4)
                pts.append(tuple(p))
    if count is not None:
        pts = pts[:count]
    return pts


def rational_sqrt(x) -> Fraction | None:
    x = frac(x)
    if x < 0:
        return None
    num, den = x.numerator, x.denominator
    rn, rd = _isqrt(num), _isqrt(den)
    if rn is None or rd is None:
        return None
    return F(rn, rd)


def _isqrt(k: int) -> int | None:
    r = int(k ** 0.5)
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand * cand == k:
            return cand
    return None


def build_torus_hamiltonian(points, ts_pairs=((0, 0), (1, 0), (0, 1), (1, F(1, 2))),
                            name: str = "torus") -> HamiltonianActionDatum:
    """T^2 acting on C^2, factor i rotating z_i, moment (|z1|^2, |z2|^2)/2."""
    return torus_scenario(points, ts_pairs, name).ham


def torus_scenario(points, ts_pairs=((0, 0), (1, 0), (0, 1), (1, F(1, 2))),
                   name: str = "torus") -> RotationScenario:
    pts = [as_vec(p) for p in points]
    return _build_rotation_hamiltonian(pts, [[0], [1]],
                                       [(frac(a), frac(b)) for a, b in ts_pairs], name)


def _moment_of(p: Vec, circles) -> tuple:
    return tuple(sum((p[2 * b] ** 2 + p[2 * b + 1] ** 2 for b in blocks), F(0)) / 2
                 for blocks in circles)


@dataclass(frozen=True)
class RotationScenario:
    """A rotation Hamiltonian scenario plus the index metadata needed to
    build orbit restrictions, product samples and quotient charts."""

    ham: HamiltonianActionDatum
    circles: tuple
    ts_tuples: tuple
    obj_index: dict            # point -> action-bundle object index
    arrow_at: dict             # (point, ts) -> action-bundle arrow index
    g_index: dict              # moment tuple -> base object index
    g_arrow_index: dict        # (base object index, ts) -> base arrow index


def _build_rotation_hamiltonian(points: list[Vec], circles: list[list[int]],
                                ts_tuples, name: str,
                                pulled_omega: bool = False) -> HamiltonianActionDatum:
    """Shared builder: a torus (one factor per entry of `circles`) acting by
    rotations on C^n, against its cotangent groupoid over the moments.

    Arrows are sampled at the given points and at their once-rotated images,
    so the bundle carries genuine composable pairs (the composite rotation
    parameter must again lie in the sampled parameter set).

    With pulled_omega the action groupoid is equipped with the pullback of
    the base 2-form (a multiplicative form) and the matching infinitesimal
    sigma, so connection identities can be exercised on it.
    """
    n2 = len(points[0])
    k = len(circles)
    ts_tuples = [tuple(frac(t) for t in ts) for ts in ts_tuples]
    if tuple([F(0)] * k) not in ts_tuples:
        ts_tuples = [tuple([F(0)] * k)] + ts_tuples

    g_points = sorted({_moment_of(p, circles) for p in points})
    g_index = {m: i for i, m in enumerate(g_points)}
    if k == 1:
        g_bundle = build_cotangent_circle([m[0] for m in g_points],
                                          [ts[0] for ts in ts_tuples],
                                          name=f"{name}.base")
    else:
        g_bundle = build_cotangent_torus(g_points, ts_tuples, name=f"{name}.base")
    g_arrow_index = {(li, ts): li * len(ts_tuples) + ti
                     for li in range(len(g_points))
                     for ti, ts in enumerate(ts_tuples)}

    def rot_for(ts) -> LinMap:
        m = LinMap.identity(n2)
        for ci, t in enumerate(ts):
            c, s = circle_point(t)
            m = rotation_for_circle(c, s, circles[ci], n2) @ m
        return m

    objects: list[ObjectFiber] = []
    obj_index: dict[Vec, int] = {}

    def add_object(p: Vec) -> int:
        if p not in obj_index:
            obj_index[p] = len(objects)
            objects.append(_action_object(p, circles, n2))
        return obj_index[p]

    # depth 0: sampled points; depth 1: their rotates (arrows live at both)
    arrow_base = []
    for p in points:
        p = as_vec(p)
        if p not in arrow_base:
            arrow_base.append(p)
    points = list(arrow_base)
    for p in list(arrow_base):
        for ts in ts_tuples:
            rp = rot_for(ts).apply(p)
            if rp not in arrow_base:
                arrow_base.append(rp)

    arrows = []
    arrow_at: dict[tuple, int] = {}
    arrow_map = []
    c1_list = []
    for p in arrow_base:
        add_object(p)
        for ts in ts_tuples:
            r = rot_for(ts)
            rp = r.apply(p)
            add_object(rp)
            dim = k + n2
            s_star = hstack(LinMap.zero(n2, k), LinMap.identity(n2))
            t_cols = [sum_blocks(rp, circles[ci]) for ci in range(k)]
            t_star = hstack(LinMap.from_cols(t_cols, rows_dim=n2), r)
            left = LinMap.from_cols(
                [vec_concat(basis_vec(k, ci),
                            tuple(-x for x in sum_blocks(p, circles[ci])))
                 for ci in range(k)], rows_dim=dim)
            right = LinMap.from_cols(
                [vec_concat(basis_vec(k, ci), zero_vec(n2)) for ci in range(k)],
                rows_dim=dim)
            unit = all(t == 0 for t in ts)
            u_star = vstack(LinMap.zero(k, n2), LinMap.identity(n2)) if unit else None
            arrow_at[(p, ts)] = len(arrows)
            mu_rows = [moment_row_sum(p, circles[ci]) for ci in range(k)]
            c1_mat = vstack(
                hstack(LinMap.identity(k), LinMap.zero(k, n2)),
                hstack(LinMap.zero(k, k), LinMap.from_rows(mu_rows, cols=n2)))
            om = None
            if pulled_omega:
                g_ar = g_bundle.arrows[g_arrow_index[(g_index[_moment_of(p, circles)], ts)]]
                om = g_ar.omega.pullback(c1_mat)
            arrows.append(ArrowFiber(obj_index[p], obj_index[rp], dim,
                                     s_star, t_star, om, left, right,
                                     unit=unit, u_star=u_star))
            c1_list.append(c1_mat)
            arrow_map.append(g_arrow_index[(g_index[_moment_of(p, circles)], ts)])
    arrows = tuple(arrows)
    objects = tuple(objects)

    def m_of(v):
        # v = (angles_g, w_g, angles_h, w_h); the product keeps w_h
        ag, ah, wh = v[:k], v[k + n2:2 * k + n2], v[2 * k + n2:]
        return vec_concat(tuple(x + y for x, y in zip(ag, ah)), wh)

    pairs = []
    for p in [as_vec(q) for q in points]:
        for ts1 in ts_tuples:
            for ts2 in ts_tuples:
                try:
                    ts12 = tuple(compose_half_tangents(a, b)
                                 for a, b in zip(ts1, ts2))
                except ValueError:
                    continue
                if ts12 not in ts_tuples:
                    continue
                rp = rot_for(ts2).apply(p)
                g_i = arrow_at.get((rp, ts1))
                h_i = arrow_at.get((p, ts2))
                gh_i = arrow_at.get((p, ts12))
                if None not in (g_i, h_i, gh_i):
                    pairs.append(make_pair(arrows, g_i, h_i, gh_i, m_of))
    c_bundle = GroupoidFiberBundle(objects, arrows, tuple(pairs), name=name)

    obj_map, c0, cA = [], [], []
    inv_index = {i: p for p, i in obj_index.items()}
    for i in range(len(objects)):
        p = inv_index[i]
        obj_map.append(g_index[_moment_of(p, circles)])
        c0.append(LinMap.from_rows([moment_row_sum(p, circles[ci]) for ci in range(k)],
                                   cols=n2))
        cA.append(LinMap.identity(k))
    if pulled_omega:
        from dataclasses import replace as _replace
        objects = tuple(
            _replace(ob, sigma=c0[i].transpose()
                     @ g_bundle.objects[obj_map[i]].sigma @ cA[i])
            for i, ob in enumerate(objects))
        c_bundle = GroupoidFiberBundle(objects, arrows, c_bundle.pairs, name=name)
    morph = MorphismFiber(c_bundle, g_bundle, tuple(obj_map), tuple(c0), tuple(cA),
                          tuple(arrow_map), tuple(c1_list))
    dirac = tuple(graph_two_form(std_symplectic(n2)) for _ in objects)
    datum = CoisotropicDatum(morph, dirac, name=name)
    ham = HamiltonianActionDatum(datum, tuple(c0), k)
    return RotationScenario(ham, tuple(tuple(b) for b in circles), tuple(ts_tuples),
                            obj_index, arrow_at, g_index, g_arrow_index)


def rotation_for_circle(c, s, blocks, n2: int) -> LinMap:
    rows = [[F(1) if i == j else F(0) for j in range(n2)] for i in range(n2)]
    for b in blocks:
        rows[2 * b][2 * b], rows[2 * b][2 * b + 1] = c, -s
        rows[2 * b + 1][2 * b], rows[2 * b + 1][2 * b + 1] = s, c
    return LinMap.from_rows(rows)


def moment_row_sum(p: Vec, blocks) -> list:
    out = [F(0)] * len(p)
    for b in blocks:
        out[2 * b] += p[2 * b]
        out[2 * b + 1] += p[2 * b + 1]
    return out


def hamiltonian_check(h: HamiltonianActionDatum):
    """Compatibility (action form identity) and ker mu cap ker L = 0,
    cross-validated per object against the non-degeneracy map."""
    from .coisotropic import nondeg_assembly, ImageEscapesL
    from .courant import kernel_of
    from .linalg import image
    from .report import VerificationReport, witness_subspace

    rep = VerificationReport(f"hamiltonian.{h.datum.name}")
    c = h.datum.morphism
    from .groupoid import compatibility_check
    for kk, ar in enumerate(c.dom.arrows):
        sub = compatibility_check(ar, h.datum.dirac[ar.src], h.datum.dirac[ar.tgt],
                                  c.pullback_two_form(kk), check_id="ham.compat")
        rep.merge(sub)
    for i, ob in enumerate(c.dom.objects):
        ker_mu = kernel(h.moment[i])
        ker_l = kernel_of(h.datum.dirac[i])
        nondeg = ker_mu.intersect(ker_l).dim == 0
        rep.add("ham.nondeg", nondeg,
                detail=f"object {i}: ker mu_* cap ker L = 0",
                witness=None if nondeg else witness_subspace(ker_mu.intersect(ker_l)))
        # the equivalence: surjectivity of the assembled map iff the kernel
        # condition, both computed independently
        try:
            mat, fp = nondeg_assembly(h.datum, i)
            surj = image(mat).issubset(fp) and image(mat).dim == fp.dim
        except ImageEscapesL:
            surj = False
        rep.add("ham.equivalence", surj == nondeg,
                detail=f"object {i}: coisotropic non-degeneracy <=> kernel condition")
    return rep


# ---------------------------------------------------------------------------
# orbit restriction of a rotation scenario

def circle_orbit_datum(scn: RotationScenario, level) -> CoisotropicDatum:
    """The restriction of the base groupoid to the orbit {level}.

    For the cotangent groupoid of a torus the orbits are points, so the
    restricted object fiber is zero-dimensional and the canonical orbit
    2-form vanishes; the datum is produced by the generic orbit constructor,
    which re-derives that instead of assuming it.
    """
    k = scn.ham.group_dim
    level = (frac(level),) if k == 1 else tuple(frac(x) for x in level)
    g_bundle = scn.ham.datum.g_bundle
    li = scn.g_index[level]
    ob_g = g_bundle.objects[li]

    obj = ObjectFiber(0, k, LinMap.zero(0, k), LinMap.zero(0, k),
                      ThreeFormFiber.zero(0))
    arrows = []
    arrow_map = []
    c1_list = []
    for ts in scn.ts_tuples:
        unit = all(t == 0 for t in ts)
        # restricted arrow tangent is the angle directions only
        arrows.append(ArrowFiber(0, 0, k, LinMap.zero(0, k), LinMap.zero(0, k),
                                 TwoFormFiber.zero(k), LinMap.identity(k),
                                 LinMap.identity(k), unit=unit,
                                 u_star=LinMap.zero(k, 0) if unit else None))
        arrow_map.append(scn.g_arrow_index[(li, ts)])
        c1_list.append(vstack(LinMap.identity(k), LinMap.zero(ob_g.dim, k)))
    arrows = tuple(arrows)

    def m_of(v):
        return tuple(x + y for x, y in zip(v[:k], v[k:]))

    pairs = []
    ts_list = list(scn.ts_tuples)
    for i1, ts1 in enumerate(ts_list):
        for i2, ts2 in enumerate(ts_list):
            try:
                ts12 = tuple(compose_half_tangents(a, b) for a, b in zip(ts1, ts2))
            except ValueError:
                continue
            if ts12 in ts_list:
                pairs.append(make_pair(arrows, i1, i2, ts_list.index(ts12), m_of))
    c_bundle = GroupoidFiberBundle((obj,), arrows, tuple(pairs),
                                   name=f"{scn.ham.datum.name}.orbit")
    morph = MorphismFiber(c_bundle, g_bundle, (li,), (LinMap.zero(ob_g.dim, 0),),
                          (LinMap.identity(k),), tuple(arrow_map), tuple(c1_list))
    return orbit_lagrangian(OrbitSample(morph))


def pair_orbit_datum(bundle: GroupoidFiberBundle) -> CoisotropicDatum:
    """The single dense orbit of a pair groupoid: the inclusion is the
    identity and the canonical 2-form is the base symplectic form."""
    from .groupoid import identity_morphism
    return orbit_lagrangian(OrbitSample(identity_morphism(bundle)))


# ---------------------------------------------------------------------------
# reduction pipeline and its independent oracle

@dataclass(frozen=True)
class ReductionScenario:
    scn: RotationScenario
    level: Fraction
    orbit: CoisotropicDatum
    obj_pairs: tuple           # strong product object samples
    arrow_pairs: tuple         # strong product arrow samples
    level_point_idx: tuple     # action-bundle object indices on the level


def circle_reduction(n: int, level, trim: bool = True) -> ReductionScenario:
    """S^1 acting on C^n, reduced at the given level.

    With trim the sample atlas is kept at desk scale (>= 8 product points
    for n = 2, several per chart fiber for the invariance checks).
    """
    level = frac(level)
    if level == 0 and n == 1:
        raise ReductionHypothesisViolated(
            "level 0 for n = 1 is a fixed point: the quotient is not a chart")
    if trim:
        ts = (0, F(1, 2), F(-1, 2))
        pts = level_points(n, level, count=4 if n > 1 else None)
        scn = _build_rotation_hamiltonian(pts, [[b for b in range(n)]],
                                          [(frac(t),) for t in ts], "circle")
    else:
        scn = circle_scenario(n, level)
    orbit = circle_orbit_datum(scn, level)
    ham = scn.ham

    obj_pairs = []
    level_idx = []
    for p, oi in scn.obj_index.items():
        if _moment_of(p, scn.circles) == (level,):
            obj_pairs.append((0, oi))
            level_idx.append(oi)
    arrow_pairs = []
    for (p, ts), ai in scn.arrow_at.items():
        if _moment_of(p, scn.circles) == (level,):
            arrow_pairs.append((list(scn.ts_tuples).index(ts), ai))
    return ReductionScenario(scn, level, orbit, tuple(obj_pairs),
                             tuple(arrow_pairs), tuple(level_idx))


class ReductionHypothesisViolated(ValueError):
    pass


def chart_map(p: Vec) -> Vec:
    """The affine chart z1/z2 of the projective line, in real coordinates."""
    x1, y1, x2, y2 = p
    r2 = x2 * x2 + y2 * y2
    if r2 == 0:
        raise ReductionHypothesisViolated("chart undefined where z2 = 0")
    return ((x1 * x2 + y1 * y2) / r2, (y1 * x2 - x1 * y2) / r2)


def chart_jacobian(p: Vec) -> LinMap:
    x1, y1, x2, y2 = p
    r2 = x2 * x2 + y2 * y2
    q1 = x1 * x2 + y1 * y2
    q2 = y1 * x2 - x1 * y2
    row1 = [x2 / r2, y2 / r2,
            (x1 * r2 - q1 * 2 * x2) / (r2 * r2),
            (y1 * r2 - q1 * 2 * y2) / (r2 * r2)]
    row2 = [-y2 / r2, x2 / r2,
            (y1 * r2 - q2 * 2 * x2) / (r2 * r2),
            (-x1 * r2 - q2 * 2 * y2) / (r2 * r2)]
    return LinMap.from_rows([row1, row2])


def reduced_form_oracle(p: Vec, level) -> TwoFormFiber:
    """Independent reduced symplectic form at chart(p), by direct linear
    algebra: restrict the standard form to ker(dmu), check the orbit
    direction is its radical against the chart, and push to chart basis
    vectors through arbitrary preimages."""
    n2 = len(p)
    mu_row = LinMap.from_rows([list(p)], cols=n2)     # dmu at p
    tz = kernel(mu_row)                                # T_p of the level
    omega = std_symplectic(n2)
    jac = chart_jacobian(p)
    jac_on_z = LinMap.from_cols([jac.apply(b) for b in tz.basis], rows_dim=2)
    orbit_dir = rotation_field(p)
    # well-definedness: the orbit direction spans ker(dpi|_Z) and is in the
    # radical of the restricted form
    from .linalg import canonicalize as _canon
    ker_pi = kernel(jac_on_z)
    orbit_coords = None
    from .linalg import solve as _solve
    orbit_coords = _solve(tz.matrix(), orbit_dir)
    if orbit_coords is None:
        raise ReductionHypothesisViolated("orbit direction leaves the level tangent")
    if _canon([orbit_coords], tz.dim) != ker_pi:
        raise ReductionHypothesisViolated("chart kernel is not the orbit direction")
    for b in tz.basis:
        if omega(tz.matrix().apply(orbit_coords), b) != 0:
            raise ReductionHypothesisViolated("orbit direction not in the radical")
    rows = []
    w = []
    for i in range(2):
        x = _solve(jac_on_z, basis_vec(2, i))
        if x is None:
            raise ReductionHypothesisViolated("chart differential not surjective")
        w.append(tz.matrix().apply(x))
    rows = [[omega(w[i], w[j]) for j in range(2)] for i in range(2)]
    return TwoFormFiber(LinMap.from_rows(rows))


# ---------------------------------------------------------------------------
# polynomial fixtures

def build_lie_poisson_so3() -> PolyDiracFrame:
    """Linear-Poisson frame on the dual of so(3): pi_ij = eps_ijk x_k."""
    n = 3
    x, y, z = (Poly.var(n, i) for i in range(n))
    zero = zero_poly(n)
    one = Poly.const(n, 1)

    def cv(*vals):
        return [Poly.const(n, v) for v in vals]

    s1 = PolySection((zero, z, y.scale(-1)), tuple(cv(1, 0, 0)))
    s2 = PolySection((z.scale(-1), zero, x), tuple(cv(0, 1, 0)))
    s3 = PolySection((y, x.scale(-1), zero), tuple(cv(0, 0, 1)))
    return PolyDiracFrame((s1, s2, s3), PolyForm.zero(n, 3))


def graph_frame_with_twist() -> PolyDiracFrame:
    """Frame of graph(omega) on Q^3 with its compatible twist -d(omega)."""
    n = 3
    x1 = Poly.var(n, 0)
    omega = PolyForm.from_dict(n, 2, {(1, 2): x1 * x1, (0, 1): x1})
    phi = d(omega).scale(-1)
    sections = []
    for i in range(n):
        e = [Poly.const(n, 1 if j == i else 0) for j in range(n)]
        alpha = contract(e, omega)
        sections.append(PolySection(tuple(e),
                                    tuple(alpha.comp((j,)) for j in range(n))))
    return PolyDiracFrame(tuple(sections), phi)


def mismatched_twist_frame() -> PolyDiracFrame:
    """The same graph frame with twist 0 instead of -d(omega): rejected."""
    good = graph_frame_with_twist()
    return PolyDiracFrame(good.sections, PolyForm.zero(3, 3))


def involutivity_points(seed: int = 11, count: int = 20) -> list:
    import random as _random
    rng = _random.Random(seed)
    pts = []
    while len(pts) < count:
        p = tuple(F(rng.randint(-2 ** 16, 2 ** 16), rng.randint(1, 9))
                  for _ in range(3))
        if any(x != 0 for x in p):
            pts.append(p)
    return pts


# ---------------------------------------------------------------------------
# the plane bivector restricted to a line (pullback / rank-jump fixture)

@dataclass(frozen=True)
class LineBivectorFixture:
    """c : Q -> Q^2, t -> (t, 0), against pi = x d/dx ^ d/dy."""

    params: tuple              # sampled t values
    cmaps: tuple               # inclusion differentials
    l_m: tuple                 # bivector graph fibers over the plane
    l_n: tuple                 # pointwise pullback fibers over the line


def line_bivector_fixture(params=(F(1), F(0), F(2), F(-1, 2))) -> LineBivectorFixture:
    from .courant import graph_bivector, pullback as _pullback
    cmaps = []
    l_m = []
    l_n = []
    for t in params:
        t = frac(t)
        c = LinMap.from_rows([[1], [0]])
        pi = LinMap.from_rows([[0, t], [-t, 0]])
        lm = graph_bivector(pi)
        cmaps.append(c)
        l_m.append(lm)
        l_n.append(_pullback(c, lm))
    return LineBivectorFixture(tuple(frac(t) for t in params), tuple(cmaps),
                               tuple(l_m), tuple(l_n))


# ---------------------------------------------------------------------------
# the full reduction pipeline

def build_quotient_morphism(red: ReductionScenario, si):
    """The weak Morita morphism from the strong-product groupoid onto the
    quotient chart (trivial groupoid); returns (morphism, chart label map,
    chart index per product fiber)."""
    n = 2 * len(red.scn.circles[0])
    inv_index = {i: p for p, i in red.scn.obj_index.items()}
    prod = si.datum.c_bundle

    if n == 2:
        chart_bundle = point_bundle(name="chart")
        chart_of = {k: 0 for k in range(len(si.fibers))}
        jacs = {k: LinMap.zero(0, 2) for k in range(len(si.fibers))}
        chart_labels = {0: "pt"}
    elif n == 4:
        labels = []
        jacs = {}
        chart_of = {}
        for k, f in enumerate(si.fibers):
            p = inv_index[f.base[1]]
            q = chart_map(p)
            if q not in labels:
                labels.append(q)
            chart_of[k] = labels.index(q)
            jacs[k] = chart_jacobian(p)
        chart_bundle = unit_groupoid(2, num_objects=len(labels), name="chart")
        chart_labels = {i: q for i, q in enumerate(labels)}
    else:
        raise ReductionHypothesisViolated("charts shipped for n = 1, 2 only")

    # the product tangent embeds in T_pt + T_M and the chart differential
    # factors through the M part
    obj_map, c0, cA = [], [], []
    for k, f in enumerate(si.fibers):
        obj_map.append(chart_of[k])
        cols = [jacs[k].apply(b[f.tangent.ambient_dim - n:]) for b in f.tangent.basis]
        c0.append(LinMap.from_cols(cols, rows_dim=chart_bundle.objects[0].dim))
        cA.append(LinMap.zero(0, f.algebroid.dim))
    unit_of_chart = {}
    for k, ar in enumerate(chart_bundle.arrows):
        unit_of_chart[ar.src] = k
    arrow_map, c1 = [], []
    for ar in prod.arrows:
        arrow_map.append(unit_of_chart[chart_of[ar.src]])
        # chart differential through either end; intertwining is validated
        c1.append(c0[ar.tgt] @ ar.t_star)
    quotient = MorphismFiber(prod, chart_bundle, tuple(obj_map), tuple(c0),
                             tuple(cA), tuple(arrow_map), tuple(c1))
    return quotient, chart_labels, chart_of


def run_reduction(red: ReductionScenario):
    """Intersect with the orbit coisotropic, transfer to the quotient chart,
    and compare against the independent reduced-form oracle.

    Returns (reduced fibers per chart label, report).
    """
    from .intersection import strong_intersection, strong_exact_sequence
    from .morita import MoritaEquivalenceDatum, NatTransFiber, transfer
    from .groupoid import identity_morphism
    from .report import VerificationReport

    rep = VerificationReport(f"reduction.{red.scn.ham.datum.name}")
    n = 2 * len(red.scn.circles[0])   # real dimension of the acted-on space

    si = strong_intersection(red.orbit, red.scn.ham.datum,
                             list(red.obj_pairs), list(red.arrow_pairs))
    rep.add("reduction.intersection", si.report.passed,
            detail="strong intersection with the orbit coisotropic")
    if not si.report.passed or si.datum is None:
        rep.merge(si.report)
        return {}, rep
    seq = strong_exact_sequence(red.orbit, red.scn.ham.datum, si)
    rep.add("reduction.exact_sequence", seq.passed,
            detail="the intersection exact sequence holds")

    quotient, chart_labels, chart_of = build_quotient_morphism(red, si)
    prod = si.datum.c_bundle
    chart_bundle = quotient.cod
    inv_index = {i: p for p, i in red.scn.obj_index.items()}

    # wrap as a weak Morita equivalence over the point and transfer
    pt = si.datum.g_bundle
    ident_k = identity_morphism(prod)
    to_point = si.datum.morphism
    chart_to_point = MorphismFiber(
        chart_bundle, pt,
        tuple(0 for _ in chart_bundle.objects),
        tuple(LinMap.zero(0, o.dim) for o in chart_bundle.objects),
        tuple(LinMap.zero(0, o.adim) for o in chart_bundle.objects),
        tuple(0 for _ in chart_bundle.arrows),
        tuple(LinMap.zero(0, a.dim) for a in chart_bundle.arrows))
    theta = {x: NatTransFiber(x, 0, LinMap.zero(0, prod.objects[x].dim))
             for x in range(len(prod.objects))}
    m = MoritaEquivalenceDatum(
        ident_k, quotient, to_point,
        identity_morphism(pt), identity_morphism(pt),
        to_point, chart_to_point, theta, theta,
        (TwoFormFiber.zero(0),), (ThreeFormFiber.zero(0),),
        tuple(TwoFormFiber.zero(o.dim) for o in prod.objects))
    res = transfer(m, list(si.dirac), check_strong=False)
    rep.add("reduction.transfer", res.report.passed,
            detail="transfer along the quotient weak Morita morphism")
    if not res.report.passed:
        rep.merge(res.report)
        return {}, rep

    # oracle comparison, per sampled product point
    reduced = {}
    for ci in sorted(set(chart_of.values())):
        reduced[chart_labels[ci]] = res.dirac[ci]
    if n == 4:
        for k, f in enumerate(si.fibers):
            p = inv_index[f.base[1]]
            oracle = graph_two_form(reduced_form_oracle(p, red.level))
            rep.add("reduction.oracle", res.dirac[chart_of[k]] == oracle,
                    detail=f"chart point {chart_labels[chart_of[k]]}: pipeline fiber "
                           "equals the reduced-form oracle")
    else:
        for ci in sorted(set(chart_of.values())):
            rep.add("reduction.oracle", res.dirac[ci].space.dim == 0,
                    detail="point chart: reduced fiber is the zero space")
    return reduced, rep


# ---------------------------------------------------------------------------
# natural-transformation fixtures for the homotopy identity suite

@dataclass(frozen=True)
class NatTransFixture:
    f: MorphismFiber
    g: MorphismFiber
    theta: dict
    eta: dict
    inverse_pairs: dict        # object -> pair index of (theta(x), eta(x))


def pair_nat_trans_fixture(n: int = 2, linear_part=None) -> NatTransFixture:
    """On the pair groupoid, any linear map P induces a morphism, and
    theta(x) = (P x, x) is a natural transformation from the identity to it."""
    from .groupoid import identity_morphism
    from .morita import NatTransFiber

    bundle = build_pair_groupoid(n, num_objects=1, name="pair.nat")
    if linear_part is None:
        linear_part = LinMap.from_rows(
            [[1 if i == j else 0 for j in range(n)] for i in range(n)])
        rows = [list(r) for r in linear_part.entries]
        rows[0][n - 1] = rows[0][n - 1] + 2   # a shear, to keep P nontrivial
        linear_part = LinMap.from_rows(rows)
    p_mat = linear_part
    f = identity_morphism(bundle)
    g = MorphismFiber(bundle, bundle, (0,), (p_mat,), (p_mat,), (0,),
                      (block2(p_mat, p_mat),))
    arrow = 0   # the sampled (0 -> 0) arrow fiber stands in for (P x, x)
    theta = {0: NatTransFiber(0, arrow, vstack(p_mat, LinMap.identity(n)))}
    eta = {0: NatTransFiber(0, arrow, vstack(LinMap.identity(n), p_mat))}
    pair_idx = next(i for i, p in enumerate(bundle.pairs)
                    if p.g == arrow and p.h == arrow and p.gh == arrow)
    return NatTransFixture(f, g, theta, eta, {0: pair_idx})


def block2(a: LinMap, b: LinMap) -> LinMap:
    top = hstack(a, LinMap.zero(a.rows, b.cols))
    bot = hstack(LinMap.zero(b.rows, a.cols), b)
    return vstack(top, bot)


def circle_nat_trans_fixture(level=F(1, 2)) -> NatTransFixture:
    """On the circle action groupoid over a 90-degree-closed orbit, the
    rotation by the group element t = 1 is homotopic to the identity."""
    from .groupoid import identity_morphism
    from .morita import NatTransFiber

    level = frac(level)
    r = rational_sqrt(2 * level)
    base = (r, F(0))
    orbit = [base, (F(0), r), (-r, F(0)), (F(0), -r)]
    scn = _build_rotation_hamiltonian([as_vec(p) for p in orbit], [[0]],
                                      [(F(0),), (F(1),), (F(-1),)],
                                      name="circle.nat", pulled_omega=True)
    c = scn.ham.datum.morphism
    bundle = c.dom
    rot = rotation_block(*circle_point(1), 1)

    obj_map = []
    c0 = []
    cA = []
    inv = {i: p for p, i in scn.obj_index.items()}
    for i in range(len(bundle.objects)):
        q = rot.apply(inv[i])
        obj_map.append(scn.obj_index[q])
        c0.append(rot)
        cA.append(LinMap.identity(1))
    arrow_map = []
    c1 = []
    arrow_inv = {ix: key for key, ix in scn.arrow_at.items()}
    for a in range(len(bundle.arrows)):
        p, ts = arrow_inv[a]
        arrow_map.append(scn.arrow_at[(rot.apply(p), ts)])
        c1.append(block2(LinMap.identity(1), rot))
    g = MorphismFiber(bundle, bundle, tuple(obj_map), tuple(c0), tuple(cA),
                      tuple(arrow_map), tuple(c1))
    f = identity_morphism(bundle)

    theta = {}
    eta = {}
    inverse_pairs = {}
    n2 = 2
    for i in range(len(bundle.objects)):
        p = inv[i]
        th_arrow = scn.arrow_at[(p, (F(1),))]
        theta[i] = NatTransFiber(i, th_arrow,
                                 vstack(LinMap.zero(1, n2), LinMap.identity(n2)))
        et_arrow = scn.arrow_at[(rot.apply(p), (F(-1),))]
        eta[i] = NatTransFiber(i, et_arrow,
                               vstack(LinMap.zero(1, n2), rot))
        for k, pr in enumerate(bundle.pairs):
            if pr.g == th_arrow and pr.h == et_arrow:
                inverse_pairs[i] = k
                break
        else:
            raise ValueError("inverse pair not sampled")
    return NatTransFixture(f, g, theta, eta, inverse_pairs)
