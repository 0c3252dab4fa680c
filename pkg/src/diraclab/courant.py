"""Pointwise Dirac calculus in V + V* over Q.

A DiracFiber is a Lagrangian subspace of Q^{2n} for the fixed symmetric
pairing <(v,a),(w,b)> = a(w) + b(v), with V in coordinates 0..n-1 and V*
in coordinates n..2n-1.  The four constructions (graph, sum, pullback,
pushforward) are total at the fiber level: each always returns a Lagrangian
subspace.  Smoothness questions ("if L1 + L2 is smooth") are handled at the
bundle level by cross-point rank comparison, not here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import (
    DimensionMismatch,
    LinMap,
    Subspace,
    Vec,
    ZERO,
    basis_vec,
    canonicalize,
    dot,
    frac,
    full_subspace,
    hstack,
    image,
    kernel,
    preimage,
    vec_concat,
    zero_vec,
)


class NotLagrangian(ValueError):
    pass


@dataclass(frozen=True)
class CourantFiber:
    """The split fiber Q^n + (Q^n)* with its fixed symmetric pairing."""

    base_dim: int

    def pairing(self, x: Vec, y: Vec):
        n = self.base_dim
        if len(x) != 2 * n or len(y) != 2 * n:
            raise DimensionMismatch("pairing: ambient mismatch")
        return dot(x[n:], y[:n]) + dot(y[n:], x[:n])

    def pairing_matrix(self) -> LinMap:
        n = self.base_dim
        z = LinMap.zero(n, n)
        i = LinMap.identity(n)
        top = hstack(z, i)
        bot = hstack(i, z)
        return LinMap(2 * n, 2 * n, top.entries + bot.entries)


@dataclass(frozen=True)
class TwoFormFiber:
    """An antisymmetric bilinear form on Q^n."""

    matrix: LinMap

    def __post_init__(self):
        if not self.matrix.is_antisymmetric():
            raise ValueError("two-form matrix must be antisymmetric")

    @property
    def dim(self) -> int:
        return self.matrix.rows

    @staticmethod
    def zero(n: int) -> "TwoFormFiber":
        return TwoFormFiber(LinMap.zero(n, n))

    def __call__(self, u: Vec, v: Vec):
        return dot(u, self.matrix.apply(v))

    def flat(self) -> LinMap:
        """v -> i_v w as a map Q^n -> (Q^n)*; the matrix is the transpose."""
        return self.matrix.transpose()

    def add(self, other: "TwoFormFiber") -> "TwoFormFiber":
        return TwoFormFiber(self.matrix + other.matrix)

    def neg(self) -> "TwoFormFiber":
        return TwoFormFiber(self.matrix.scale(-1))

    def pullback(self, f: LinMap) -> "TwoFormFiber":
        """f*w for f : Q^m -> Q^n."""
        return TwoFormFiber(f.transpose() @ self.matrix @ f)

    def is_nondegenerate(self) -> bool:
        return kernel(self.matrix).dim == 0


@dataclass(frozen=True)
class ThreeFormFiber:
    """An alternating 3-tensor on Q^n, stored on increasing index triples."""

    dim: int
    coeffs: tuple[tuple[tuple[int, int, int], "frac"], ...]

    @staticmethod
    def zero(n: int) -> "ThreeFormFiber":
        return ThreeFormFiber(n, ())

    @staticmethod
    def from_dict(n: int, data: dict) -> "ThreeFormFiber":
        items = []
        for (i, j, k), c in sorted(data.items()):
            if not (0 <= i < j < k < n):
                raise ValueError("three-form indices must be strictly increasing")
            c = frac(c)
            if c != 0:
                items.append(((i, j, k), c))
        return ThreeFormFiber(n, tuple(items))

    def coeff(self, i: int, j: int, k: int):
        # antisymmetry under all transpositions
        idx = sorted([(i, 0), (j, 1), (k, 2)])
        if idx[0][0] == idx[1][0] or idx[1][0] == idx[2][0]:
            return ZERO
        perm = tuple(p for _, p in idx)
        sign = 1 if perm in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1
        key = (idx[0][0], idx[1][0], idx[2][0])
        for kk, c in self.coeffs:
            if kk == key:
                return c if sign > 0 else -c
        return ZERO

    def __call__(self, u: Vec, v: Vec, w: Vec):
        total = ZERO
        for (i, j, k), c in self.coeffs:
            det = (u[i] * (v[j] * w[k] - v[k] * w[j])
                   - u[j] * (v[i] * w[k] - v[k] * w[i])
                   + u[k] * (v[i] * w[j] - v[j] * w[i]))
            total += c * det
        return total

    def pullback(self, f: LinMap) -> "ThreeFormFiber":
        m = f.cols
        cols = f.col_vectors()
        data = {}
        for i in range(m):
            for j in range(i + 1, m):
                for k in range(j + 1, m):
                    c = self(cols[i], cols[j], cols[k])
                    if c != 0:
                        data[(i, j, k)] = c
        return ThreeFormFiber.from_dict(m, data)

    def add(self, other: "ThreeFormFiber") -> "ThreeFormFiber":
        if self.dim != other.dim:
            raise DimensionMismatch("three-form add: dim mismatch")
        data = dict(self.coeffs)
        for key, c in other.coeffs:
            data[key] = data.get(key, ZERO) + c
        return ThreeFormFiber.from_dict(self.dim, data)

    def is_zero(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class DiracFiber:
    """A Lagrangian subspace of Q^n + (Q^n)*."""

    fiber: CourantFiber
    space: Subspace

    def __post_init__(self):
        n = self.fiber.base_dim
        if self.space.ambient_dim != 2 * n:
            raise DimensionMismatch("Dirac fiber must live in Q^{2n}")
        if self.space.dim != n:
            raise NotLagrangian(f"dim {self.space.dim} != {n}")
        for i, x in enumerate(self.space.basis):
            for y in self.space.basis[i:]:
                if self.fiber.pairing(x, y) != 0:
                    raise NotLagrangian("basis not isotropic")

    @property
    def n(self) -> int:
        return self.fiber.base_dim

    @staticmethod
    def from_subspace(space: Subspace) -> "DiracFiber":
        if space.ambient_dim % 2 != 0:
            raise DimensionMismatch("ambient must be even")
        return DiracFiber(CourantFiber(space.ambient_dim // 2), space)

    def basis(self) -> list[Vec]:
        return list(self.space.basis)


def _tangent_part(n: int) -> LinMap:
    return hstack(LinMap.identity(n), LinMap.zero(n, n))


def _cotangent_part(n: int) -> LinMap:
    return hstack(LinMap.zero(n, n), LinMap.identity(n))


def graph_two_form(omega: TwoFormFiber) -> DiracFiber:
    """Span of (e_i, i_{e_i} omega); non-degenerate by construction."""
    n = omega.dim
    flat = omega.flat()
    gens = [vec_concat(basis_vec(n, i), flat.apply(basis_vec(n, i))) for i in range(n)]
    return DiracFiber(CourantFiber(n), canonicalize(gens, 2 * n))


def graph_bivector(pi: LinMap) -> DiracFiber:
    """Span of (pi(e_i*, .), e_i*); its kernel meets V only at 0.

    The matrix entry pi[i][j] is the pairing of the bivector with
    (dx_i, dx_j), and contraction happens in the first slot.
    """
    if not pi.is_antisymmetric():
        raise ValueError("bivector matrix must be antisymmetric")
    n = pi.rows
    sharp = pi.transpose()
    gens = [vec_concat(sharp.apply(basis_vec(n, i)), basis_vec(n, i)) for i in range(n)]
    return DiracFiber(CourantFiber(n), canonicalize(gens, 2 * n))


def tangent_dirac(n: int) -> DiracFiber:
    return graph_two_form(TwoFormFiber.zero(n))


def cotangent_dirac(n: int) -> DiracFiber:
    return graph_bivector(LinMap.zero(n, n))


def dirac_sum(l1: DiracFiber, l2: DiracFiber) -> DiracFiber:
    """{(v, a1 + a2) : (v, ai) in Li}; Lagrangian for every input pair."""
    if l1.n != l2.n:
        raise DimensionMismatch("dirac_sum: base dim mismatch")
    n = l1.n
    # matched pairs (x1, x2) in L1 x L2 with equal tangent parts
    amb = 4 * n
    s1 = embed_space(l1.space, 0, amb)
    s2 = embed_space(l2.space, 2 * n, amb)
    w = s1.sum(s2)
    match_rows = [vec_concat(vec_concat(basis_vec(n, i), zero_vec(n)),
                             vec_concat(tuple(-x for x in basis_vec(n, i)), zero_vec(n)))
                  for i in range(n)]
    # w cap {v1 = v2}: intersect with the kernel of the matching constraints
    constraints = LinMap.from_rows(match_rows, cols=amb)
    matched = w.intersect(kernel(constraints))
    add = LinMap.from_rows(
        [vec_concat(basis_vec(n, i), zero_vec(n)) + zero_vec(2 * n) for i in range(n)]
        + [vec_concat(zero_vec(n), basis_vec(n, i))
           + vec_concat(zero_vec(n), basis_vec(n, i)) for i in range(n)],
        cols=amb)
    return DiracFiber(l1.fiber, image(add, matched))


def dirac_negate(l: DiracFiber) -> DiracFiber:
    """{(v, -a) : (v, a) in L}."""
    n = l.n
    m = LinMap(2 * n, 2 * n,
               _tangent_part(n).entries
               + tuple(tuple(-x for x in r) for r in _cotangent_part(n).entries))
    return DiracFiber(l.fiber, image(m, l.space))


def gauge(l: DiracFiber, b: TwoFormFiber) -> DiracFiber:
    if l.n != b.dim:
        raise DimensionMismatch("gauge: dim mismatch")
    return dirac_sum(l, graph_two_form(b))


def pullback(f: LinMap, l: DiracFiber) -> DiracFiber:
    """f*L = {(w, f^T a) : (f w, a) in L} for f : Q^m -> Q^n."""
    if f.rows != l.n:
        raise DimensionMismatch("pullback: map target must match fiber")
    m = f.cols
    n = l.n
    # relation subspace {(w, a) in Q^m + (Q^n)* : (f w, a) in L}
    rel_map = block_matrix(f, LinMap.identity(n))
    rel = preimage(rel_map, l.space)
    out = block_matrix(LinMap.identity(m), f.transpose())
    return DiracFiber(CourantFiber(m), image(out, rel))


def pushforward(f: LinMap, l: DiracFiber) -> DiracFiber:
    """f_* L = {(f v, a) : (v, f^T a) in L} for surjective f : Q^n -> Q^m."""
    if f.cols != l.n:
        raise DimensionMismatch("pushforward: map source must match fiber")
    if image(f).dim != f.rows:
        raise ValueError("pushforward requires a surjective map")
    n, m = l.n, f.rows
    rel_map = block_matrix(LinMap.identity(n), f.transpose())
    rel = preimage(rel_map, l.space)
    out = block_matrix(f, LinMap.identity(m))
    return DiracFiber(CourantFiber(m), image(out, rel))


def block_matrix(a: LinMap, d: LinMap) -> LinMap:
    """diag(a, d) as a map on concatenated coordinates."""
    top = hstack(a, LinMap.zero(a.rows, d.cols))
    bot = hstack(LinMap.zero(d.rows, a.cols), d)
    return LinMap(a.rows + d.rows, a.cols + d.cols, top.entries + bot.entries)


def embed_space(s: Subspace, offset: int, ambient: int) -> Subspace:
    gens = [zero_vec(offset) + v + zero_vec(ambient - offset - s.ambient_dim)
            for v in s.basis]
    return canonicalize(gens, ambient)


def kernel_of(l: DiracFiber) -> Subspace:
    """ker L = L cap V, returned as a subspace of Q^n."""
    n = l.n
    vpart = embed_space(full_subspace(n), 0, 2 * n)
    inter = l.space.intersect(vpart)
    return canonicalize([v[:n] for v in inter.basis], n)


def cotangent_trace(l: DiracFiber) -> Subspace:
    """L cap V*, as a subspace of (Q^n)*."""
    n = l.n
    cpart = embed_space(full_subspace(n), n, 2 * n)
    inter = l.space.intersect(cpart)
    return canonicalize([v[n:] for v in inter.basis], n)


def perp(s: Subspace) -> Subspace:
    """Orthogonal complement for the fixed symmetric pairing."""
    if s.ambient_dim % 2 != 0:
        raise DimensionMismatch("perp needs an even ambient")
    n = s.ambient_dim // 2
    pair = CourantFiber(n).pairing_matrix()
    if s.dim == 0:
        return full_subspace(2 * n)
    m = LinMap.from_rows([pair.apply(v) for v in s.basis], cols=2 * n)
    return kernel(m)


def is_lagrangian(s: Subspace) -> bool:
    return perp(s) == s


def is_nondegenerate(l: DiracFiber) -> bool:
    """True iff L cap V* = 0, i.e. L is the graph of a 2-form."""
    return cotangent_trace(l).dim == 0


def two_form_of(l: DiracFiber) -> TwoFormFiber:
    """Recover omega with L = graph(omega); requires non-degeneracy."""
    if not is_nondegenerate(l):
        raise ValueError("fiber is not the graph of a 2-form")
    n = l.n
    from .linalg import solve
    basis_mat = l.space.matrix()  # 2n x n
    cols = []
    for i in range(n):
        # unique x with tangent part of (basis_mat x) = e_i
        top = LinMap.from_rows([basis_mat.entries[j] for j in range(n)], cols=n)
        x = solve(top, basis_vec(n, i))
        if x is None:
            raise ValueError("fiber is not a graph over V")
        full = basis_mat.apply(x)
        cols.append(full[n:])
    flat = LinMap.from_cols(cols, rows_dim=n)  # flat matrix = omega^T
    return TwoFormFiber(flat.transpose())
