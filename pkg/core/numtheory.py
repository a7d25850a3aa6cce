"""Exact integer number theory for 64-bit moduli.

Primality is a strong-pseudoprime test with the fixed witness set
(2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37), which has no false positives
below 3.3 * 10^24 and is therefore exact for every input this module accepts.
Factorization is trial division up to 10^6 followed by Brent's variant of
Pollard rho with deterministic parameters (start 2, increment c = 1, 2, ...).
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import count

import numpy as np

from core.errors import DomainError

logger = logging.getLogger(__name__)

MAX_INPUT = 2**63
TRIAL_LIMIT = 10**6
MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class Factorization:
    """Prime factorization of n as (prime, exponent) pairs sorted by prime."""

    n: int
    factors: tuple[tuple[int, int], ...]

    def primes(self) -> list[int]:
        return [q for q, _ in self.factors]

    def value(self) -> int:
        return math.prod(q**e for q, e in self.factors)

    def divisor_count(self) -> int:
        """Number of positive divisors of n."""
        return math.prod(e + 1 for _, e in self.factors)

    def totient(self) -> int:
        return math.prod((q - 1) * q ** (e - 1) for q, e in self.factors)

    def divisors(self) -> list[int]:
        """All positive divisors of n in increasing order."""
        divs = [1]
        for q, e in self.factors:
            divs = [d * q**i for d in divs for i in range(e + 1)]
        return sorted(divs)


@dataclass(frozen=True)
class ExpMapParams:
    """A prime p and base g, with the order T of g and the bit length r of p."""

    p: int
    g: int
    T: int
    r: int
    is_primitive_root: bool

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "g": self.g,
            "T": self.T,
            "r": self.r,
            "is_primitive_root": self.is_primitive_root,
        }


########################################
###### Arithmetic #####################
########################################

def mod_pow(base: int, exp: int, modulus: int) -> int:
    """Compute base^exp mod modulus.

    Args:
        base: Any integer (negative values are reduced first)
        exp: Non-negative exponent
        modulus: Modulus, at least 2

    Returns:
        Integer in [0, modulus - 1]

    Raises:
        DomainError: If modulus < 2 or exp < 0
    """
    if modulus < 2:
        raise DomainError(f"modulus must be >= 2, got {modulus}")
    if exp < 0:
        raise DomainError(f"exponent must be non-negative, got {exp}")
    return pow(base % modulus, exp, modulus)


def is_prime(n: int) -> bool:
    """Deterministic primality test, exact for all n < 2^64."""
    if n < 2:
        return False
    for q in MR_WITNESSES:
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    """Return a non-trivial factor of the odd composite n."""
    root = math.isqrt(n)
    if root * root == n:
        return root

    block = 128
    for c in count(1):
        y, r, q = 2, 1, 1
        d = 1
        x = ys = y
        while d == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and d == 1:
                ys = y
                for _ in range(min(block, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                d = math.gcd(q, n)
                k += block
            r *= 2
        if d == n:
            # backtrack one step at a time from the last saved position
            d = 1
            while d == 1:
                ys = (ys * ys + c) % n
                d = math.gcd(abs(x - ys), n)
        if d != n:
            return d
        logger.debug(f"Pollard rho cycle without split for {n}, retrying with c={c + 1}")
    raise AssertionError("unreachable")


def _split(n: int, found: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        found[n] = found.get(n, 0) + 1
        return
    d = _pollard_brent(n)
    _split(d, found)
    _split(n // d, found)


@lru_cache(maxsize=4096)
def factorize(n: int) -> Factorization:
    """Complete prime factorization of n.

    Args:
        n: Integer in [1, 2^63]

    Returns:
        Factorization with primes sorted ascending

    Raises:
        DomainError: If n is outside [1, 2^63]
    """
    if n < 1 or n > MAX_INPUT:
        raise DomainError(f"factorize expects 1 <= n <= 2^63, got {n}")

    found: dict[int, int] = {}
    remaining = n
    d = 2
    while d <= TRIAL_LIMIT and d * d <= remaining:
        if remaining % d == 0:
            e = 0
            while remaining % d == 0:
                remaining //= d
                e += 1
            found[d] = e
        d += 1 if d == 2 else 2

    if remaining > 1:
        if d * d > remaining:
            found[remaining] = found.get(remaining, 0) + 1
        else:
            _split(remaining, found)

    return Factorization(n=n, factors=tuple(sorted(found.items())))


########################################
###### Orders and primitive roots #####
########################################

def _check_unit(g: int, p: int) -> None:
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if g % p == 0:
        raise DomainError(f"g = {g} is divisible by p = {p}")


def multiplicative_order(g: int, p: int) -> int:
    """Smallest T >= 1 with g^T = 1 (mod p).

    Starts from p - 1 and divides out each prime factor while the power stays 1.

    Raises:
        DomainError: If p is not prime or p divides g
    """
    _check_unit(g, p)
    T = p - 1
    for q in factorize(p - 1).primes():
        while T % q == 0 and pow(g, T // q, p) == 1:
            T //= q
    return T


def is_primitive_root(g: int, p: int) -> bool:
    """True iff g generates the multiplicative group mod p."""
    _check_unit(g, p)
    g %= p
    if p == 2:
        return g == 1
    return all(pow(g, (p - 1) // q, p) != 1 for q in factorize(p - 1).primes())


def count_primitive_roots(p: int) -> int:
    """Number of primitive roots mod p, i.e. phi(p - 1)."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    return factorize(p - 1).totient()


def find_primitive_root(p: int) -> int:
    """Smallest primitive root mod p."""
    for h in range(1, p):
        if is_primitive_root(h, p):
            return h
    raise DomainError(f"no primitive root found mod {p}")


def make_params(p: int, g: int) -> ExpMapParams:
    """Validate (p, g) and build the arena every computation lives in.

    Raises:
        DomainError: If p is not an odd prime below 2^63 or g is outside [1, p - 1]
    """
    if p > MAX_INPUT or p < 3 or not is_prime(p):
        raise DomainError(f"p must be an odd prime below 2^63, got {p}")
    if not 1 <= g <= p - 1:
        raise DomainError(f"g must lie in [1, p - 1] = [1, {p - 1}], got {g}")
    T = multiplicative_order(g, p)
    return ExpMapParams(p=p, g=g, T=T, r=p.bit_length(), is_primitive_root=(T == p - 1))


def primes_up_to(Q: int) -> list[int]:
    """All primes <= Q (sieve of Eratosthenes)."""
    if Q < 2:
        return []
    sieve = np.ones(Q + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(Q) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve).tolist()
