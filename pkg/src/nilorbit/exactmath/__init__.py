"""Exact arithmetic and integer/rational linear algebra."""

from .cyclotomic import euler_totient, root_of_unity_orders
from .linalg import (
    charpoly,
    det,
    freeze_matrix,
    geometric_sum,
    invert_rational,
    is_integer_matrix,
    mat_add,
    mat_equal,
    mat_identity,
    mat_mul,
    mat_pow,
    mat_shape,
    mat_sub,
    mat_transpose,
    mat_vec,
    vec_add,
    vec_is_zero,
    vec_sub,
)
from .normalforms import (
    coset_representatives,
    hnf,
    hnf_basis,
    lattice_index,
    rational_row_hnf,
    reduce_mod_lattice,
    row_span_contains,
    snf,
    solve_integer,
    solve_mod_lattice,
    split_quad_vector,
)
from .scalars import (
    QuadExt,
    as_fraction,
    denominator_lcm,
    format_fraction,
    is_integral,
    lcm,
    parse_scalar,
    prime_support,
    quad_parts,
    scalar_is_rational,
)
from .subspace import (
    SubspaceQ,
    eventually_fixed_subspace,
    rational_image,
    rational_kernel,
    rref,
)

__all__ = [
    "QuadExt",
    "SubspaceQ",
    "as_fraction",
    "charpoly",
    "coset_representatives",
    "denominator_lcm",
    "det",
    "euler_totient",
    "eventually_fixed_subspace",
    "format_fraction",
    "freeze_matrix",
    "geometric_sum",
    "hnf",
    "hnf_basis",
    "invert_rational",
    "is_integer_matrix",
    "is_integral",
    "lattice_index",
    "lcm",
    "mat_add",
    "mat_equal",
    "mat_identity",
    "mat_mul",
    "mat_pow",
    "mat_shape",
    "mat_sub",
    "mat_transpose",
    "mat_vec",
    "parse_scalar",
    "prime_support",
    "quad_parts",
    "rational_image",
    "rational_kernel",
    "rational_row_hnf",
    "reduce_mod_lattice",
    "root_of_unity_orders",
    "row_span_contains",
    "rref",
    "scalar_is_rational",
    "snf",
    "solve_integer",
    "solve_mod_lattice",
    "split_quad_vector",
    "vec_add",
    "vec_is_zero",
    "vec_sub",
]
