"""Flat manifolds given by crystallographic data over Z^n.

A group is described by finitely many holonomy representatives (F, t): the
full group is the set of maps x -> F x + t + z over integer z.  Validation
certifies closure and torsion-freeness; affine self-maps are admitted when
they normalize the group, and classification happens through torus covers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ConsistencyError,
    InvalidFixtureError,
    UnsupportedInputError,
)
from .exactmath import (
    coset_representatives,
    det,
    freeze_matrix,
    hnf_basis,
    invert_rational,
    is_integer_matrix,
    mat_equal,
    mat_identity,
    mat_mul,
    mat_shape,
    mat_vec,
    reduce_mod_lattice,
    row_span_contains,
    solve_integer,
)
from .orbits import Classification, iterate_orbit
from .torus import TorusEndo, classify, relative_order


@dataclass(frozen=True)
class HolonomyRep:
    """One coset representative (F, t): the map x -> F x + t."""

    F: tuple[tuple[int, ...], ...]
    t: tuple[Fraction, ...]

    def apply(self, x):
        return [m + v for m, v in zip(mat_vec(self.F, list(x)), self.t)]


@dataclass(frozen=True)
class BieberbachGroup:
    """Certified torsion-free crystallographic data; build via validate_bieberbach."""

    dim: int
    reps: tuple[HolonomyRep, ...]

    @property
    def holonomy_order(self) -> int:
        return len(self.reps)


def _rep_order(F, cap: int) -> int:
    n = len(F)
    ident = mat_identity(n)
    power = [list(r) for r in F]
    for k in range(1, cap + 1):
        if mat_equal(power, ident):
            return k
        power = mat_mul(power, F)
    raise InvalidFixtureError("holonomy matrix order exceeds the group size")


def validate_bieberbach(dim: int, reps) -> BieberbachGroup:
    """Validate crystallographic data and certify torsion-freeness.

    Requirements: the identity representative is present, every F lies in
    GL(n, Z), the representatives are closed under composition up to integer
    translations, and no non-identity element has finite order.  Torsion of
    (F, t + z) with F of order r reduces to integer solvability of
    P z = -P t for P = I + F + ... + F^{r-1}, decided exactly.
    """
    parsed = []
    for F, t in reps:
        n, n2 = mat_shape(F)
        if n != n2 or n != dim:
            raise InvalidFixtureError("holonomy matrix has wrong shape")
        if not is_integer_matrix(F):
            raise InvalidFixtureError("holonomy matrices must be integral")
        Fi = [[int(x) for x in row] for row in F]
        if abs(det(Fi)) != 1:
            raise InvalidFixtureError(
                "holonomy matrices must be unimodular (preserve Z^n)"
            )
        tv = tuple(Fraction(x) % 1 for x in t)
        parsed.append(HolonomyRep(freeze_matrix(Fi), tv))

    matrices = [list(map(list, rep.F)) for rep in parsed]
    if not any(mat_equal(F, mat_identity(dim)) and all(x == 0 for x in rep.t)
               for F, rep in zip(matrices, parsed)):
        raise InvalidFixtureError("identity representative (I, 0) is required")
    for i in range(len(parsed)):
        for j in range(i + 1, len(parsed)):
            if mat_equal(matrices[i], matrices[j]):
                raise InvalidFixtureError(
                    "holonomy matrices must be distinct per representative"
                )

    def find_rep(F):
        for k, Fk in enumerate(matrices):
            if mat_equal(F, Fk):
                return k
        return None

    for i, ri in enumerate(parsed):
        for j, rj in enumerate(parsed):
            F = mat_mul(matrices[i], matrices[j])
            k = find_rep(F)
            if k is None:
                raise InvalidFixtureError(
                    f"holonomy not closed: product of representatives {i} and {j}"
                )
            shift = [
                a + b - c
                for a, b, c in zip(mat_vec(matrices[i], list(rj.t)), ri.t, parsed[k].t)
            ]
            if any(Fraction(x).denominator != 1 for x in shift):
                raise InvalidFixtureError(
                    f"translation cocycle broken between representatives {i} and {j}"
                )

    order = len(parsed)
    for idx, rep in enumerate(parsed):
        if mat_equal(list(map(list, rep.F)), mat_identity(dim)):
            continue
        r = _rep_order(rep.F, order)
        P = mat_identity(dim)
        power = mat_identity(dim)
        for _ in range(r - 1):
            power = mat_mul(power, rep.F)
            P = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(P, power)]
        rhs = [-x for x in mat_vec(P, list(rep.t))]
        if solve_integer(P, rhs) is not None:
            raise InvalidFixtureError(
                f"torsion detected: representative {idx} has a finite-order element"
            )
    return BieberbachGroup(dim, tuple(parsed))


@dataclass(frozen=True)
class InfraEndo:
    """Affine map (A, b) normalizing the group, with the witnessing table
    from each representative to its image representative."""

    group: BieberbachGroup
    linear: tuple[tuple[int, ...], ...]
    translation: tuple[Fraction, ...]
    rep_images: tuple[int, ...]

    @property
    def determinant(self) -> int:
        return det(self.linear)


def validate_endo(group: BieberbachGroup, A, b) -> InfraEndo:
    """Admit an affine map: for each representative (F_i, t_i) there must be a
    representative (F_j, t_j) with A F_i = F_j A and b + A t_i = t_j + F_j b
    modulo Z^n."""
    n, n2 = mat_shape(A)
    if n != n2 or n != group.dim:
        raise InvalidFixtureError("linear part has wrong shape")
    if not is_integer_matrix(A):
        raise InvalidFixtureError("linear part must be integral")
    Ai = [[int(x) for x in row] for row in A]
    bv = tuple(Fraction(x) for x in b)
    table = []
    for i, rep in enumerate(group.reps):
        AF = mat_mul(Ai, list(map(list, rep.F)))
        image = None
        for j, cand in enumerate(group.reps):
            if not mat_equal(AF, mat_mul(list(map(list, cand.F)), Ai)):
                continue
            shift = [
                bb + at - tj - fb
                for bb, at, tj, fb in zip(
                    bv, mat_vec(Ai, list(rep.t)), cand.t, mat_vec(cand.F, list(bv))
                )
            ]
            if all(Fraction(x).denominator == 1 for x in shift):
                image = j
                break
        if image is None:
            raise InvalidFixtureError(
                f"affine map does not normalize the group: representative {i} has no image"
            )
        table.append(image)
    return InfraEndo(group, freeze_matrix(Ai), bv, tuple(table))


@dataclass(frozen=True)
class InfraPoint:
    """Canonical representative of a group orbit: the lexicographically least
    element of {F_i x + t_i mod Z^n}."""

    coords: tuple[Fraction, ...]


def canonical_point(group: BieberbachGroup, x) -> InfraPoint:
    candidates = []
    for rep in group.reps:
        moved = rep.apply(x)
        candidates.append(tuple(Fraction(v) % 1 for v in moved))
    return InfraPoint(min(candidates))


@dataclass(frozen=True)
class TorusCover:
    """A finite torus cover R^n/L -> flat manifold, L given by HNF rows."""

    group: BieberbachGroup
    lattice_rows: tuple[tuple[int, ...], ...]
    index: int


def fitting_lift(group: BieberbachGroup, endo: InfraEndo) -> TorusEndo:
    """The same affine map viewed on the translation-lattice torus Z^n/R^n.

    Needs an invertible linear part (then periodic fibers are periodic
    throughout); use holonomy_power_cover for the singular regime.
    """
    if endo.determinant == 0:
        raise UnsupportedInputError(
            "Fitting lift needs an invertible linear part; use holonomy_power_cover"
        )
    lift = TorusEndo(endo.linear, endo.translation)
    for x in _sample_points(group.dim, 3):
        classify_infra(group, endo, x, cover="fitting")
    return lift


def holonomy_power_cover(group: BieberbachGroup) -> TorusCover:
    """Sublattice generated by the |F|-th powers: every admitted affine map
    lifts to the corresponding torus cover.

    For flat groups each element is (F_i, t_i + z), so the |F|-th powers are
    precisely the translations P_i (t_i + z) with P_i = sum of powers of F_i:
    the lattice is generated by the vectors P_i t_i and the columns of P_i.
    Stability under conjugation by every representative is verified exactly.
    """
    n = group.dim
    order = group.holonomy_order
    vectors = []
    for rep in group.reps:
        P = mat_identity(n)
        power = mat_identity(n)
        for _ in range(order - 1):
            power = mat_mul(power, rep.F)
            P = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(P, power)]
        pt = mat_vec(P, list(rep.t))
        if any(Fraction(x).denominator != 1 for x in pt):
            raise ConsistencyError("power of a group element is not integral", payload=rep)
        vectors.append([int(x) for x in pt])
        vectors.extend([[P[r][c] for r in range(n)] for c in range(n)])
    rows = hnf_basis(vectors)
    if len(rows) < n:
        raise ConsistencyError("power lattice is rank deficient")
    index = 1
    for i in range(n):
        index *= rows[i][i]
    for rep in group.reps:
        for v in rows:
            if not row_span_contains(rows, mat_vec(rep.F, list(v))):
                raise ConsistencyError(
                    "power lattice not stable under holonomy conjugation", payload=rep
                )
    return TorusCover(group, freeze_matrix(rows), index)


def _sample_points(dim: int, max_den: int):
    for m in range(1, max_den + 1):
        for tup in itertools.product(range(m), repeat=dim):
            yield [Fraction(a, m) for a in tup]


def _conjugated_torus_endo(cover: TorusCover, endo: InfraEndo):
    """Upstairs dynamics on R^n/L in lattice coordinates, plus the coordinate
    change x = B u."""
    n = cover.group.dim
    H = [list(r) for r in cover.lattice_rows]
    B = [[Fraction(H[j][i]) for j in range(n)] for i in range(n)]
    Binv = invert_rational(B)
    A = [list(r) for r in endo.linear]
    A_up = mat_mul(mat_mul(Binv, A), B)
    if not is_integer_matrix(A_up):
        raise ConsistencyError(
            "affine map does not preserve the power lattice", payload=endo
        )
    b_up = mat_vec(Binv, list(endo.translation))
    return TorusEndo([[int(x) for x in row] for row in A_up], b_up), Binv


def _fitting_fiber(group: BieberbachGroup, x):
    """Fiber of the group orbit of x in the translation torus."""
    pts = {tuple(Fraction(v) % 1 for v in rep.apply(x)) for rep in group.reps}
    return sorted(pts)


def _power_cover_fiber(group: BieberbachGroup, cover: TorusCover, x):
    """Fiber of the group orbit of x in the power-lattice torus, in ambient
    coordinates reduced modulo the sublattice."""
    H = [list(r) for r in cover.lattice_rows]
    pts = set()
    for rep in group.reps:
        moved = rep.apply(x)
        for z in coset_representatives(H):
            shifted = [v + k for v, k in zip(moved, z)]
            pts.add(tuple(reduce_mod_lattice(H, shifted)))
    return sorted(pts)


def classify_infra(
    group: BieberbachGroup, endo: InfraEndo, x, cover: str = "auto"
) -> Classification:
    """Exact (preperiod, period) of a rational point on the flat manifold.

    The orbit is computed directly on canonical representatives; the verdict
    is cross-checked against the classification of the whole fiber in a torus
    cover: eventual periodicity must hold fiberwise, the point is periodic
    iff some fiber point is, and for the Fitting cover of an invertible map
    the fiber of a periodic point is entirely periodic.
    """
    xs = [Fraction(v) for v in x]
    if len(xs) != group.dim:
        raise ValueError("point dimension mismatch")

    A = [list(r) for r in endo.linear]

    def step_coords(coords):
        moved = [m + b for m, b in zip(mat_vec(A, list(coords)), endo.translation)]
        return canonical_point(group, moved).coords

    start = canonical_point(group, xs).coords
    mu, lam, path = iterate_orbit(step_coords, start)
    trace = tuple(relative_order(p) for p in path)
    base = Classification(mu, lam, trace)

    covers = []
    if cover in ("auto", "fitting") and endo.determinant != 0:
        covers.append("fitting")
    if cover in ("gamma_power",) or (cover == "auto" and endo.determinant == 0):
        covers.append("gamma_power")
    if cover == "fitting" and endo.determinant == 0:
        raise UnsupportedInputError("Fitting cover needs an invertible linear part")

    for which in covers:
        if which == "fitting":
            lift = TorusEndo(endo.linear, endo.translation)
            fiber = _fitting_fiber(group, xs)
            fiber_cls = [classify(lift, p)[0] for p in fiber]
            expected_size = group.holonomy_order
            strong = True  # invertible: periodic fibers are periodic throughout
        else:
            pc = holonomy_power_cover(group)
            lift, Binv = _conjugated_torus_endo(pc, endo)
            fiber = _power_cover_fiber(group, pc, xs)
            fiber_cls = [classify(lift, mat_vec(Binv, list(p)))[0] for p in fiber]
            expected_size = group.holonomy_order * pc.index
            strong = False
        if len(fiber) != expected_size:
            raise ConsistencyError(
                f"fiber size {len(fiber)} != covering degree {expected_size}"
            )
        if any(c.periodic for c in fiber_cls) != base.periodic:
            raise ConsistencyError(
                "periodicity does not project correctly along the cover",
                payload=(which, x, base, fiber_cls),
            )
        if strong and endo.determinant != 0:
            if all(c.periodic for c in fiber_cls) != base.periodic:
                raise ConsistencyError(
                    "invertible lift should have an all-or-none periodic fiber",
                    payload=(which, x, base, fiber_cls),
                )
    return base
