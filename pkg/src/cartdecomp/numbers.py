"""Exact integer factorisation utilities.

Prime sets of group orders are computed by trial division up to 10**6
followed by deterministic Miller-Rabin and Pollard's rho for anything
left, which comfortably covers 64-bit orders.
"""

from __future__ import annotations

from math import gcd

_SMALL_LIMIT = 10**6

# deterministic witness set for n < 3317044064679887385961981
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    for c in range(1, 101):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"rho failed to split {n}")  # pragma: no cover


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation as {prime: exponent}."""
    if n <= 0:
        raise ValueError("factorize needs a positive integer")
    out: dict[int, int] = {}
    for p in range(2, _SMALL_LIMIT):
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return out


def prime_set(n: int) -> frozenset[int]:
    return frozenset(factorize(n))


def integer_log(value: int, base: int) -> int | None:
    """Exact exponent e with base**e == value, or None."""
    if base < 2 or value < 1:
        return None
    e = 0
    v = value
    while v % base == 0:
        v //= base
        e += 1
    return e if v == 1 else None
