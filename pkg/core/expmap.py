"""The iterated map u -> g^u (mod p): trajectories, cycle decompositions, fixed points."""

import functools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from config import settings
from core.errors import BudgetExceededError, DomainError
from core.numtheory import ExpMapParams

logger = logging.getLogger(__name__)

# A walk of n steps goes through the power table once n * TABLE_WALK_RATIO >= p
TABLE_WALK_RATIO = 64

# Starting values composed per pass in fixed_point_count
FIXED_POINT_CHUNK = 2**16


@dataclass(frozen=True)
class Trajectory:
    """Tail length s, cycle length t and trajectory length ell = s + t of the orbit of u0."""

    u0: int
    s: int
    t: int
    ell: int
    cycle_entry: int

    def to_dict(self) -> dict:
        return {
            "u0": self.u0,
            "s": self.s,
            "t": self.t,
            "ell": self.ell,
            "cycle_entry": self.cycle_entry,
        }


@dataclass
class CycleDecomposition:
    """Cycle type of the permutation x -> g^x on {1, ..., p - 1}."""

    p: int
    g: int
    cycle_lengths: list[int] = field(default_factory=list)
    num_cycles: int = 0

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "g": self.g,
            "cycle_lengths": list(self.cycle_lengths),
            "num_cycles": self.num_cycles,
        }


class VisitedBitset:
    """One bit per integer in [0, size)."""

    __slots__ = ("bits", "size", "count")

    def __init__(self, size: int):
        self.size = size
        self.bits = bytearray((size >> 3) + 1)
        self.count = 0

    def __contains__(self, x: int) -> bool:
        return bool(self.bits[x >> 3] & (1 << (x & 7)))

    def test_and_set(self, x: int) -> bool:
        """Mark x, returning whether it was already marked."""
        byte, mask = x >> 3, 1 << (x & 7)
        if self.bits[byte] & mask:
            return True
        self.bits[byte] |= mask
        self.count += 1
        return False


def _check_value(params: ExpMapParams, u: int) -> None:
    if not 1 <= u <= params.p - 1:
        raise DomainError(f"value must lie in [1, {params.p - 1}], got {u}")


def step(params: ExpMapParams, u: int) -> int:
    """One application of the map: the representative of g^u in [1, p - 1]."""
    _check_value(params, u)
    return pow(params.g, u, params.p)


def iterate(params: ExpMapParams, u0: int, n: int) -> Iterator[int]:
    """Iterator over u_0, u_1, ..., u_{n-1}."""
    _check_value(params, u0)
    return _walk(functools.partial(pow, params.g, mod=params.p), u0, n)


def _walk(image: Callable[[int], int], u: int, n: int) -> Iterator[int]:
    for _ in range(n):
        yield u
        u = image(u)


def _image(params: ExpMapParams, steps: int, extra_bytes: int = 0, mem_budget: int | None = None) -> Callable[[int], int]:
    """x -> g^x for a walk of about `steps` values, through the power table when that is cheaper."""
    budget = settings.MEM_BUDGET if mem_budget is None else mem_budget
    p = params.p
    if (
        steps * TABLE_WALK_RATIO >= p
        and p < settings.TABLE_MODE_MAX_P
        and table_bytes(p) + extra_bytes <= budget
    ):
        return memoryview(power_table(params)).__getitem__
    return functools.partial(pow, params.g, mod=p)


def trajectory(params: ExpMapParams, u0: int) -> Trajectory:
    """Exact tail and cycle lengths of the orbit of u0.

    Brent's scheme finds the minimal cycle length t with constant memory,
    then two pointers t steps apart locate the minimal tail length s.

    Args:
        params: Map parameters
        u0: Starting value in [1, p - 1]

    Returns:
        Trajectory with s, t, ell = s + t and the first cycle value u_s

    Raises:
        DomainError: If u0 is outside [1, p - 1]
    """
    _check_value(params, u0)
    # orbits of a permutation are cycles of length comparable to p, others close after about sqrt(T) steps
    expected = params.p if params.is_primitive_root else math.isqrt(params.T)
    image = _image(params, expected)

    power = lam = 1
    tortoise = u0
    hare = image(u0)
    while tortoise != hare:
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare = image(hare)
        lam += 1

    tortoise = hare = u0
    for _ in range(lam):
        hare = image(hare)
    mu = 0
    while tortoise != hare:
        tortoise = image(tortoise)
        hare = image(hare)
        mu += 1

    return Trajectory(u0=u0, s=mu, t=lam, ell=mu + lam, cycle_entry=tortoise)


def values_fit(traj: Trajectory, mem_budget: int | None = None) -> bool:
    """Whether the values of traj, plus one derived array of the same size, fit the memory budget."""
    budget = settings.MEM_BUDGET if mem_budget is None else mem_budget
    return 16 * traj.ell <= budget


@functools.lru_cache(maxsize=1)
def trajectory_values(params: ExpMapParams, traj: Trajectory) -> np.ndarray:
    """u_0, ..., u_{ell-1} of traj as a read-only int64 array.

    The most recent trajectory is kept, so the per-k statistics of one
    trajectory walk the map only once.
    """
    n = traj.ell
    image = _image(params, n, extra_bytes=8 * n)
    values = np.fromiter(_walk(image, traj.u0, n), dtype=np.int64, count=n)
    values.flags.writeable = False
    return values


########################################
###### Power tables ###################
########################################

def table_bytes(p: int) -> int:
    """Memory needed by power_table for modulus p."""
    block = math.isqrt(p) + 1
    return 8 * block * (-(-p // block))


def table_fits(p: int, mem_budget: int | None = None) -> bool:
    budget = settings.MEM_BUDGET if mem_budget is None else mem_budget
    return p < settings.TABLE_MODE_MAX_P and table_bytes(p) + (p >> 3) + 1 <= budget


def fixed_point_bytes(p: int) -> int:
    """Peak memory of the table-mode fixed point count: the table plus one chunk of working arrays."""
    return table_bytes(p) + 32 * min(FIXED_POINT_CHUNK, p)


def fixed_point_fits(p: int, mem_budget: int | None = None) -> bool:
    budget = settings.MEM_BUDGET if mem_budget is None else mem_budget
    return p < settings.TABLE_MODE_MAX_P and fixed_point_bytes(p) <= budget


def power_table(params: ExpMapParams) -> np.ndarray:
    """int64 array of length p with table[x] = g^x mod p.

    Built as an outer product of baby steps g^i (i < B) and giant steps g^(jB),
    so only O(sqrt p) scalar multiplications happen in Python.
    """
    p, g = params.p, params.g
    if p >= settings.TABLE_MODE_MAX_P:
        raise DomainError(f"power table needs p < {settings.TABLE_MODE_MAX_P}, got {p}")
    block = math.isqrt(p) + 1
    rows = -(-p // block)

    baby = [1] * block
    for i in range(1, block):
        baby[i] = baby[i - 1] * g % p
    giant_step = pow(g, block, p)
    giants = [1] * rows
    for j in range(1, rows):
        giants[j] = giants[j - 1] * giant_step % p

    table = np.empty((rows, block), dtype=np.int64)
    np.multiply(np.array(giants, dtype=np.int64)[:, None], np.array(baby, dtype=np.int64)[None, :], out=table)
    np.remainder(table, p, out=table)
    return table.reshape(-1)[:p]


########################################
###### Permutation structure ##########
########################################

def decompose(params: ExpMapParams, mem_budget: int | None = None) -> CycleDecomposition:
    """Full cycle type of x -> g^x when g is a primitive root.

    Uses a precomputed power table when it fits the memory budget and
    per-element modular exponentiation otherwise. Either way a visited
    bitset of p bits tracks which elements were already placed on a cycle.

    Args:
        params: Map parameters, g must be a primitive root
        mem_budget: Bytes available for table and bitset (default settings.MEM_BUDGET)

    Returns:
        CycleDecomposition with cycle lengths sorted descending

    Raises:
        DomainError: If g is not a primitive root mod p
        BudgetExceededError: If even the visited bitset does not fit the budget
    """
    if not params.is_primitive_root:
        raise DomainError(f"g = {params.g} is not a primitive root mod {params.p}; the map is not a permutation")

    p, g = params.p, params.g
    budget = settings.MEM_BUDGET if mem_budget is None else mem_budget
    bitset_bytes = (p >> 3) + 1
    if bitset_bytes > budget:
        raise BudgetExceededError("visited bitset (bytes)", bitset_bytes, budget)

    started = time.perf_counter()
    if table_fits(p, budget):
        image = memoryview(power_table(params)).__getitem__
        mode = "table"
    else:
        def image(x: int) -> int:
            return pow(g, x, p)
        mode = "pow"

    visited = VisitedBitset(p)
    lengths = []
    for start in range(1, p):
        if start in visited:
            continue
        length = 0
        x = start
        while not visited.test_and_set(x):
            length += 1
            x = image(x)
        lengths.append(length)

    if visited.count != p - 1 or sum(lengths) != p - 1:
        raise RuntimeError(f"decomposition of ({p}, {g}) covered {visited.count} of {p - 1} elements")

    lengths.sort(reverse=True)
    logger.debug(
        f"Decomposed p={p} g={g} in {mode} mode: {len(lengths)} cycles "
        f"in {time.perf_counter() - started:.3f}s"
    )
    return CycleDecomposition(p=p, g=g, cycle_lengths=lengths, num_cycles=len(lengths))


########################################
###### Fixed points ###################
########################################

def fixed_point_count(
    params: ExpMapParams,
    k: int,
    allow_large_k: bool = False,
    mem_budget: int | None = None,
) -> int:
    """Number of u0 in [1, p - 1] with u_k = u0.

    Args:
        params: Map parameters
        k: Iteration count, 1..3 unless allow_large_k is set
        allow_large_k: Permit k > 3
        mem_budget: Bytes available for the power table

    Returns:
        N_{p,g}(k)

    Raises:
        DomainError: If k is out of range
        BudgetExceededError: If p * k exceeds the step budget
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if k > settings.FIXED_POINT_MAX_K:
        if not allow_large_k:
            raise DomainError(f"k must be in 1..{settings.FIXED_POINT_MAX_K}, got {k} (pass allow_large_k to override)")
        logger.warning(f"Counting N(k) for k={k} costs {k} full passes over {params.p - 1} values")

    p, g = params.p, params.g
    work = (p - 1) * k
    if work > settings.STEP_BUDGET:
        raise BudgetExceededError("fixed point scan (map evaluations)", work, settings.STEP_BUDGET)

    if fixed_point_fits(p, mem_budget):
        table = power_table(params)
        count = 0
        for low in range(1, p, FIXED_POINT_CHUNK):
            start = np.arange(low, min(low + FIXED_POINT_CHUNK, p), dtype=np.int64)
            x = start
            for _ in range(k):
                x = table[x]
            count += int(np.count_nonzero(x == start))
        return count

    count = 0
    for u0 in range(1, p):
        u = u0
        for _ in range(k):
            u = pow(g, u, p)
        count += u == u0
    return count


def fixed_point_bound(p: int) -> float:
    """Upper bound sqrt(2p) + 1/2 on the number of fixed points, valid for every g."""
    return math.sqrt(2 * p) + 0.5


def n3_bound(p: int, g: int) -> float | None:
    """Upper bound 3/4 p + (g^(2g+1) + g + 1)/4 on N_{p,g}(3); None for g > 20."""
    if g > 20:
        return None
    return 0.75 * p + (g ** (2 * g + 1) + g + 1) / 4
