"""Orders of roots of unity that can occur as eigenvalues in dimension n."""

from __future__ import annotations


def euler_totient(d: int) -> int:
    if d < 1:
        raise ValueError("totient needs a positive integer")
    out = d
    n = d
    p = 2
    while p * p <= n:
        if n % p == 0:
            out -= out // p
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out -= out // n
    return out


def root_of_unity_orders(n: int) -> tuple[int, ...]:
    """All d >= 1 with euler_totient(d) <= n, in increasing order.

    A primitive d-th root of unity has degree euler_totient(d) over Q, so an
    n x n rational matrix can only have root-of-unity eigenvalues of these
    orders.  totient(d) >= sqrt(d/2) bounds the enumeration by 2*n^2.
    """
    if n < 1:
        raise ValueError("dimension must be positive")
    return tuple(d for d in range(1, 2 * n * n + 1) if euler_totient(d) <= n)
