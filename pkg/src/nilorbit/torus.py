"""Affine endomorphisms of the n-torus: exact orbits and periodicity.

A map is x -> A x + b (mod Z^n) with an integer linear part A (this is what
makes the map well defined on the torus) and a rational or quadratic-field
translation b.  Orbits of rational points live in a finite grid whose
denominator never grows, so classification is exact cycle detection.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, prod

from .errors import (
    ConsistencyError,
    LatticeError,
    SearchBoundExceededError,
    UnsupportedInputError,
)
from .exactmath import (
    QuadExt,
    SubspaceQ,
    as_fraction,
    coset_representatives,
    denominator_lcm,
    det,
    eventually_fixed_subspace,
    freeze_matrix,
    geometric_sum,
    hnf_basis,
    invert_rational,
    is_integer_matrix,
    lcm,
    mat_identity,
    mat_mul,
    mat_pow,
    mat_shape,
    mat_sub,
    mat_vec,
    rational_kernel,
    root_of_unity_orders,
    reduce_mod_lattice,
    row_span_contains,
    scalar_is_rational,
    solve_mod_lattice,
    split_quad_vector,
    vec_is_zero,
)
from .orbits import Classification, OrbitResult, iterate_orbit, sweep_orbits


@dataclass(frozen=True)
class TorusPoint:
    """Canonical representative of a torus point: coordinates in [0, 1)."""

    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "coords", tuple(Fraction(c) % 1 for c in self.coords)
        )

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class TorusEndo:
    """Affine self-map of the n-torus with integer linear part."""

    linear: tuple[tuple[int, ...], ...]
    translation: tuple

    def __init__(self, linear, translation=None):
        n, n2 = mat_shape(linear)
        if n != n2:
            raise ValueError("linear part must be square")
        if not is_integer_matrix(linear):
            raise ValueError(
                "linear part must be an integer matrix; a rational matrix does "
                "not map Z^n into itself"
            )
        lin = freeze_matrix([[int(x) for x in row] for row in linear])
        if translation is None:
            translation = [Fraction(0)] * n
        if len(translation) != n:
            raise ValueError("translation length mismatch")
        tr = []
        for x in translation:
            if isinstance(x, QuadExt):
                tr.append(x.as_fraction() if x.is_rational else x)
            else:
                tr.append(Fraction(x))
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "translation", tuple(tr))

    @property
    def dim(self) -> int:
        return len(self.linear)

    @cached_property
    def determinant(self) -> int:
        return det(self.linear)

    @property
    def has_irrational_translation(self) -> bool:
        return any(isinstance(x, QuadExt) for x in self.translation)

    @property
    def is_linear(self) -> bool:
        return all(not isinstance(x, QuadExt) and x == 0 for x in self.translation)

    @property
    def is_pure_translation(self) -> bool:
        return self.linear == freeze_matrix(mat_identity(self.dim))

    def translation_fractions(self) -> tuple[Fraction, ...]:
        if self.has_irrational_translation:
            raise UnsupportedInputError(
                "operation needs a rational translation part"
            )
        return tuple(Fraction(x) for x in self.translation)

    def __str__(self):
        return f"x -> {list(map(list, self.linear))} x + ({', '.join(map(str, self.translation))})"


def relative_order(q) -> int:
    """Least s >= 1 with s*q integral: the lcm of coordinate denominators."""
    for x in q:
        if not scalar_is_rational(x):
            raise UnsupportedInputError("relative order is defined for rational points")
    return denominator_lcm(as_fraction(x) for x in q)


def _require_rational_point(q):
    coords = []
    for x in q:
        if not scalar_is_rational(x):
            raise UnsupportedInputError(
                "mixed irrational point: orbit tracking is exact over Q only"
            )
        coords.append(as_fraction(x))
    return coords


def step(f: TorusEndo, x: TorusPoint) -> TorusPoint:
    """One application: canonical representative of A x + b (mod Z^n)."""
    if f.has_irrational_translation:
        raise UnsupportedInputError(
            "cannot track a rational point under an irrational translation; "
            "use translation_periodicity for the structural verdict"
        )
    moved = mat_vec(f.linear, list(x.coords))
    return TorusPoint(tuple(m + b for m, b in zip(moved, f.translation)))


def _int_dynamics(f: TorusEndo, q) -> tuple[int, tuple[int, ...], list[list[int]], list[int]]:
    """Scale the affine map onto the integer grid (1/m)Z^n: returns
    (m, start state, A, c) with the dynamics x -> (A x + c) mod m."""
    b = f.translation_fractions()
    qs = [Fraction(x) % 1 for x in q]
    m = lcm(relative_order(qs), relative_order(b))
    start = tuple(int(x * m) % m for x in qs)
    c = [int(x * m) % m for x in b]
    return m, start, [list(r) for r in f.linear], c


def _grid_order(m: int, state: tuple[int, ...]) -> int:
    return m // gcd(m, *state) if state else 1


def classify(f: TorusEndo, q) -> tuple[Classification, OrbitResult]:
    """Exact (preperiod, period) of a rational point under the map.

    The orbit stays inside the finite grid of denominator lcm(ord(q), ord(b))
    because the linear part maps Z^n into itself, so hash-based cycle
    detection terminates and is exact.
    """
    if f.has_irrational_translation:
        raise UnsupportedInputError(
            "classification of rational points needs a rational translation; "
            "use translation_periodicity instead"
        )
    if len(q) != f.dim:
        raise ValueError(f"point has length {len(q)}, map has dimension {f.dim}")
    q = _require_rational_point(q)
    m, start, A, c = _int_dynamics(f, q)
    n = f.dim

    def step_int(state):
        return tuple(
            (sum(A[i][j] * state[j] for j in range(n)) + c[i]) % m for i in range(n)
        )

    mu, lam, path = iterate_orbit(step_int, start)
    points = [TorusPoint(tuple(Fraction(a, m) for a in s)) for s in path]
    trace = tuple(_grid_order(m, s) for s in path)
    cls = Classification(mu, lam, trace)
    orbit = OrbitResult(mu, lam, tuple(points[:mu]), tuple(points[mu:]))
    return cls, orbit


def sweep_denominator(f: TorusEndo, m: int):
    """(preperiod, period) for every grid point with coordinates in (1/m)Z^n.

    Returns (modulus M, dict state -> (preperiod, period)) where states are
    integer tuples over modulus M (M = m unless the translation needs a finer
    grid).  Work is shared across orbits, so the whole grid costs O(M^n).
    """
    b = f.translation_fractions()
    M = lcm(m, relative_order(b))
    scale = M // m
    n = f.dim
    A = [list(r) for r in f.linear]
    c = [int(x * M) % M for x in b]

    def step_int(state):
        return tuple(
            (sum(A[i][j] * state[j] for j in range(n)) + c[i]) % M for i in range(n)
        )

    states = [tuple(scale * x for x in t) for t in itertools.product(range(m), repeat=n)]
    memo = sweep_orbits(step_int, states)
    return M, step_int, memo


def fixed_point(f: TorusEndo):
    """A fixed point on the torus, or None: solves (A - I) x == -b (mod Z^n)."""
    b = f.translation_fractions()
    M = mat_sub(f.linear, mat_identity(f.dim))
    x = solve_mod_lattice(M, [-v for v in b])
    if x is None:
        return None
    return TorusPoint(tuple(x))


def periodic_point_of_period(f: TorusEndo, k: int):
    """A point of period dividing k, or None.

    Fixed points of the k-th iterate solve (A^k - I) x == -(A^{k-1}+...+I) b
    modulo Z^n.
    """
    if k < 1:
        raise ValueError("period must be positive")
    b = f.translation_fractions()
    Mk = mat_sub(mat_pow(f.linear, k), mat_identity(f.dim))
    c = mat_vec(geometric_sum(f.linear, k), list(b))
    x = solve_mod_lattice(Mk, [-v for v in c])
    if x is None:
        return None
    return TorusPoint(tuple(x))


def _iterate_solvable(f: TorusEndo, k: int) -> bool:
    """Solvability of the period-k equation, allowing quadratic translations."""
    Mk = mat_sub(mat_pow(f.linear, k), mat_identity(f.dim))
    c = mat_vec(geometric_sum(f.linear, k), list(f.translation))
    return solve_mod_lattice(Mk, [-v for v in c]) is not None


class TranslationVerdict(enum.Enum):
    ALL_POINTS_PERIODIC = "all_points_periodic"
    EMPTY = "empty"


def translation_periodicity(b) -> TranslationVerdict:
    """Periodic points of a pure translation x -> x + b: all of the torus when
    every coordinate of b is rational, none otherwise."""
    if all(scalar_is_rational(x) for x in b):
        return TranslationVerdict.ALL_POINTS_PERIODIC
    return TranslationVerdict.EMPTY


@dataclass(frozen=True)
class PeriodicPointSearch:
    """Outcome of has_periodic_point: `status` is "yes", "empty" or "unknown".

    "yes" carries the witness iterate k; "unknown" is an honest bounded-search
    answer carrying the bound."""

    status: str
    k: int | None = None
    bound: int | None = None

    def __str__(self):
        if self.status == "yes":
            return f"Yes(k={self.k})"
        if self.status == "empty":
            return "Empty"
        return f"UnknownUpTo({self.bound})"


def has_unity_eigenvalue(A) -> bool:
    """True iff some eigenvalue of A is a root of unity (decided rationally:
    the eventually fixed subspace is nonzero)."""
    return eventually_fixed_subspace(A).dim > 0


def has_periodic_point(f: TorusEndo, k_max: int = 64) -> PeriodicPointSearch:
    """Decide existence of a periodic point where the structure theory allows.

    Exact answers: pure translations (periodic points exist iff the
    translation is rational) and maps without root-of-unity eigenvalues
    (a fixed point always exists since A - I is invertible).  Otherwise a
    bounded search over iterates with an honest UnknownUpTo verdict.
    """
    if f.is_pure_translation:
        if translation_periodicity(f.translation) is TranslationVerdict.EMPTY:
            return PeriodicPointSearch("empty")
        k0 = relative_order(f.translation)
        return PeriodicPointSearch("yes", k=k0)
    if not has_unity_eigenvalue(f.linear):
        return PeriodicPointSearch("yes", k=1)
    for k in range(1, k_max + 1):
        if _iterate_solvable(f, k):
            return PeriodicPointSearch("yes", k=k)
    return PeriodicPointSearch("unknown", bound=k_max)


def conjugate_to_linear(f: TorusEndo):
    """Conjugate an affine map with a fixed point to its linear part.

    Returns (linear map, g0) where translation by -g0 maps orbits of f onto
    orbits of the linear map; None when no fixed point exists.
    """
    g0 = fixed_point(f)
    if g0 is None:
        return None
    return TorusEndo(f.linear), g0


def unity_subspace(A, include_kernel: bool = False) -> SubspaceQ:
    """Rational span of the directions some iterate of A fixes.

    With `include_kernel`, additionally the directions eventually killed by A
    (generalized kernel), which is the right notion for non-invertible maps.
    """
    return eventually_fixed_subspace(A, include_nilpotent=include_kernel)


@dataclass(frozen=True)
class EventuallyPeriodicSet:
    """Structural description g0 + Q^n + H of the eventually periodic set.

    Membership for a point with coordinates in Q(sqrt(d)): the vector of
    sqrt-coefficients must lie in H (the rational span absorbs everything
    rational, including the base point)."""

    base_point: TorusPoint
    subspace: SubspaceQ

    def contains(self, v) -> bool:
        if len(v) != self.subspace.ambient_dim:
            raise ValueError("dimension mismatch")
        _, irr = split_quad_vector(v)
        return self.subspace.contains(irr)


def eventually_periodic_set(f: TorusEndo, k_bound: int | None = None) -> EventuallyPeriodicSet:
    """Description of the eventually periodic set as p(Q^n + g0 + H).

    g0 is a periodic point (a fixed point of some iterate, found by bounded
    search); H is the unity subspace, including the kernel directions when
    the linear part is singular.
    """
    b = f.translation_fractions()
    if k_bound is None:
        k_bound = max(1, lcm(*root_of_unity_orders(f.dim)) * relative_order(b))
    g0 = None
    for k in range(1, k_bound + 1):
        g0 = periodic_point_of_period(f, k)
        if g0 is not None:
            break
    if g0 is None:
        raise SearchBoundExceededError(
            f"no periodic point found among iterates k <= {k_bound}", k_bound
        )
    H = unity_subspace(f.linear, include_kernel=f.determinant == 0)
    return EventuallyPeriodicSet(g0, H)


def order_coprime_to_det(f: TorusEndo, q) -> bool:
    """Sufficient condition: gcd(det, relative order) = 1 forces periodicity.

    Only the linear case is meaningful; conjugate an affine map first.
    """
    if not f.is_linear:
        raise UnsupportedInputError(
            "criterion applies to linear maps; conjugate away the translation first"
        )
    D = f.determinant
    if D == 0:
        raise UnsupportedInputError("criterion inapplicable to singular maps")
    return gcd(abs(D), relative_order(q)) == 1


def constant_order_on_cycle(result: OrbitResult) -> bool:
    """Relative order is constant along the cycle (necessary for periodicity)."""
    orders = {relative_order(p.coords) for p in result.cycle}
    return len(orders) <= 1


def equalizer_membership(phi, psi, v) -> bool:
    """Decide v in Q^n + H with H = ker(phi - psi), for v over Q(sqrt(d)).

    Decided by reducing v modulo a rational complement of H and testing
    rationality of the remainder; cross-checked against rationality of
    (phi - psi) v, which it provably equals.
    """
    n, n2 = mat_shape(phi)
    if (n, n2) != mat_shape(psi) or n != n2:
        raise ValueError("equalizer needs two square matrices of equal shape")
    diff = mat_sub(phi, psi)
    H = rational_kernel(diff)
    rat, irr = split_quad_vector(v)
    # remainder of v modulo H lives in the coordinate complement; it is
    # rational iff the sqrt-part of v reduces to zero against H
    remainder_irr = H.reduce(irr)
    member = vec_is_zero(remainder_irr)
    image = mat_vec(diff, list(v))
    image_rational = all(scalar_is_rational(x) for x in image)
    if member != image_rational:
        raise ConsistencyError(
            "equalizer membership disagrees with rationality of the difference image",
            payload={"phi": phi, "psi": psi, "v": v},
        )
    return member


@dataclass(frozen=True)
class CoverTransferReport:
    """Classification transfer along a finite torus self-cover."""

    index: int
    fiber: tuple[tuple[Fraction, ...], ...]  # upstairs representatives mod L
    fiber_classifications: tuple[Classification, ...]
    base_classification: Classification
    induced_map_injective: bool
    eper_matches: bool
    per_projection_matches: bool
    injective_fiber_periodic: bool | None


def cover_transfer(L_basis, f_up: TorusEndo, f_down: TorusEndo, q) -> CoverTransferReport:
    """Classify a point downstairs and its whole fiber upstairs, checking the
    covering statements: eventual periodicity pulls back to the full fiber,
    periodicity projects onto periodicity, and for an injective induced map
    on Z^n/L a periodic fiber is periodic throughout.
    """
    if f_up.linear != f_down.linear or f_up.translation != f_down.translation:
        raise LatticeError("lift mismatch: up- and downstairs maps must agree")
    n = f_down.dim
    H = hnf_basis(L_basis)
    if len(H) < n:
        raise LatticeError("sublattice has infinite index (rank deficient)")
    index = prod(H[i][i] for i in range(n))
    A = [list(r) for r in f_down.linear]
    for row in H:
        if not row_span_contains(H, mat_vec(A, row)):
            raise LatticeError(
                "lift mismatch: linear part does not preserve the sublattice"
            )
    # classify upstairs through the coordinate change x = B u, B = H^T
    B = [[Fraction(H[j][i]) for j in range(n)] for i in range(n)]
    Binv = invert_rational(B)
    A_up = mat_mul(mat_mul(Binv, A), B)
    if not is_integer_matrix(A_up):
        raise ConsistencyError("conjugated linear part is not integral", payload=A_up)
    b_up = mat_vec(Binv, list(f_down.translation_fractions()))
    f_conj = TorusEndo([[int(x) for x in row] for row in A_up], b_up)

    qs = [Fraction(x) % 1 for x in q]
    reps = []
    fiber_cls = []
    for z in coset_representatives(H):
        x = [a + b for a, b in zip(qs, z)]
        reps.append(tuple(reduce_mod_lattice(H, x)))
        u = mat_vec(Binv, x)
        fiber_cls.append(classify(f_conj, u)[0])
    if len(set(reps)) != index:
        raise ConsistencyError("fiber enumeration produced duplicate points")

    base_cls = classify(f_down, qs)[0]

    injective = True
    for z in coset_representatives(H):
        if all(v == 0 for v in z):
            continue
        image = reduce_mod_lattice(H, mat_vec(A, list(z)))
        if all(v == 0 for v in image):
            injective = False
            break

    eper_matches = all(c.eventually_periodic for c in fiber_cls) and base_cls.eventually_periodic
    per_projection = any(c.periodic for c in fiber_cls) == base_cls.periodic
    inj_fiber = None
    if injective:
        inj_fiber = all(c.periodic for c in fiber_cls) == base_cls.periodic
    report = CoverTransferReport(
        index=index,
        fiber=tuple(reps),
        fiber_classifications=tuple(fiber_cls),
        base_classification=base_cls,
        induced_map_injective=injective,
        eper_matches=eper_matches,
        per_projection_matches=per_projection,
        injective_fiber_periodic=inj_fiber,
    )
    if not (eper_matches and per_projection and (inj_fiber in (None, True))):
        raise ConsistencyError("covering transfer statement failed", payload=report)
    return report


def strictly_preperiodic_witness(f: TorusEndo):
    """A rational point that is eventually periodic but not periodic.

    Exists iff |det| != 1: some preimage of the lattice is not in the lattice
    and maps onto the fixed point 0.  Returns None for |det| = 1 (every
    rational point of an automorphism is periodic).  For det = 0, any nonzero
    kernel point works.
    """
    if not f.is_linear:
        raise UnsupportedInputError("witness construction applies to linear maps")
    D = f.determinant
    n = f.dim
    if abs(D) == 1:
        return None
    if D == 0:
        v = list(rational_kernel(f.linear).basis[0])
        j = next(i for i, x in enumerate(v) if x != 0)
        candidate = TorusPoint(tuple(x / (2 * v[j]) for x in v))
    else:
        candidate = None
        Ainv = invert_rational([list(r) for r in f.linear])
        for i in range(n):
            col = [Ainv[r][i] for r in range(n)]
            if any(x.denominator != 1 for x in col):
                candidate = TorusPoint(tuple(col))
                break
        if candidate is None:
            raise ConsistencyError("no non-integral preimage column despite |det| > 1")
    cls, _ = classify(f, candidate.coords)
    if cls.periodic or vec_is_zero(candidate.coords):
        raise ConsistencyError("witness failed verification", payload=candidate)
    return candidate
