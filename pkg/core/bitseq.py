"""Statistics of the k least significant bits xi_n = u_n mod 2^k of the sequence."""

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from config import settings
from core.errors import BudgetExceededError, DomainError
from core.expmap import Trajectory, VisitedBitset, trajectory_values, values_fit
from core.numtheory import ExpMapParams, factorize

logger = logging.getLogger(__name__)

MAX_BITS = 63
MAX_FREQ_BITS = 32
BITSET_MAX_SIZE = 2**32

# Prefixes up to this length are counted with Python sets, longer ones with np.unique
SMALL_SCAN = 2**16


@dataclass(frozen=True)
class BitStats:
    """Exact period of the k-bit output sequence on a trajectory."""

    k: int
    tau_k: int
    trajectory: Trajectory

    def to_dict(self) -> dict:
        return {"k": self.k, "tau_k": self.tau_k, **self.trajectory.to_dict()}


@dataclass(frozen=True)
class FreqTable:
    """Frequencies V_k(omega) of k-bit strings over the full trajectory."""

    k: int
    counts: dict[int, int]
    ell: int

    def max_count(self) -> int:
        return max(self.counts.values(), default=0)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "ell": self.ell,
            "counts": {str(w): c for w, c in sorted(self.counts.items())},
        }


def _check_k(k: int, limit: int = MAX_BITS) -> None:
    if not 1 <= k <= limit:
        raise DomainError(f"bit width k must be in 1..{limit}, got {k}")


def _check_budget(traj: Trajectory, what: str) -> None:
    if traj.ell > settings.STEP_BUDGET:
        raise BudgetExceededError(f"{what} (trajectory steps)", traj.ell, settings.STEP_BUDGET)


def _values(params: ExpMapParams, traj: Trajectory) -> np.ndarray | None:
    if not values_fit(traj):
        logger.debug(f"ell={traj.ell} values exceed the memory budget, walking with pow")
        return None
    return trajectory_values(params, traj)


def extract_bits(u: int, k: int) -> int:
    """The k least significant bits of u, i.e. u mod 2^k."""
    if u < 0:
        raise DomainError(f"u must be non-negative, got {u}")
    _check_k(k)
    return u & ((1 << k) - 1)


def tau(params: ExpMapParams, traj: Trajectory, k: int) -> int:
    """Exact period tau_k of the k-bit outputs on the cycle of traj.

    Tests the divisors d of t in increasing order; the first d for which the
    cycle's outputs agree with themselves shifted by d is the period.

    Args:
        params: Map parameters the trajectory was computed for
        traj: Trajectory of some u0
        k: Bit width

    Returns:
        tau_k, a divisor of t
    """
    _check_k(k)
    t = traj.t
    if (1 << k) >= params.p:
        return t

    mask = (1 << k) - 1
    divisors = factorize(t).divisors()
    values = _values(params, traj)
    if values is not None:
        raw = memoryview(np.bitwise_and(values[traj.s :], mask)).cast("B")
        width = raw.nbytes // t
        for d in divisors[:-1]:
            if raw[width * d :] == raw[: width * (t - d)]:
                return d
        return t

    g, p = params.g, params.p
    for d in divisors:
        if d == t:
            break
        lead = traj.cycle_entry
        for _ in range(d):
            lead = pow(g, lead, p)
        trail = traj.cycle_entry
        # d | t, so agreement on the first t - d positions gives the cyclic period
        for _ in range(t - d):
            if (trail ^ lead) & mask:
                break
            trail = pow(g, trail, p)
            lead = pow(g, lead, p)
        else:
            return d
    return t


def bit_stats(params: ExpMapParams, traj: Trajectory, k: int) -> BitStats:
    return BitStats(k=k, tau_k=tau(params, traj, k), trajectory=traj)


def tau_profile(params: ExpMapParams, traj: Trajectory) -> dict[int, int]:
    """tau_k for every bit width k = 1..r."""
    return {k: tau(params, traj, k) for k in range(1, params.r + 1)}


def nu(params: ExpMapParams, traj: Trajectory, k: int, N: int) -> int:
    """Number of distinct k-bit outputs among xi_0, ..., xi_{N-1}.

    Raises:
        DomainError: If N is outside [1, ell]
    """
    _check_k(k)
    if not 1 <= N <= traj.ell:
        raise DomainError(f"N must lie in [1, ell] = [1, {traj.ell}], got {N}")

    mask = (1 << k) - 1
    values = _values(params, traj)
    if values is not None:
        prefix = np.bitwise_and(values[:N], mask)
        if N <= SMALL_SCAN:
            return len(set(prefix.tolist()))
        return int(np.unique(prefix).size)

    g, p = params.g, params.p
    universe = min(1 << k, p)
    u = traj.u0
    # a bitset is used only when it is no larger than a set holding N values
    if universe <= BITSET_MAX_SIZE and universe <= 512 * N:
        seen = VisitedBitset(universe)
        for _ in range(N):
            seen.test_and_set(u & mask)
            u = pow(g, u, p)
        return seen.count

    distinct = set()
    for _ in range(N):
        distinct.add(u & mask)
        u = pow(g, u, p)
    return len(distinct)


def freq(params: ExpMapParams, traj: Trajectory, k: int) -> FreqTable:
    """Exact frequencies V_k(omega) over the ell = s + t terms of the trajectory.

    Raises:
        DomainError: If k > 32
        BudgetExceededError: If ell exceeds settings.STEP_BUDGET
    """
    _check_k(k, MAX_FREQ_BITS)
    _check_budget(traj, "frequency table")

    mask = (1 << k) - 1
    values = _values(params, traj)
    if values is not None:
        bits = np.bitwise_and(values, mask)
        if traj.ell <= SMALL_SCAN:
            return FreqTable(k=k, counts=dict(Counter(bits.tolist())), ell=traj.ell)
        words, hits = np.unique(bits, return_counts=True)
        return FreqTable(k=k, counts=dict(zip(words.tolist(), hits.tolist())), ell=traj.ell)

    g, p = params.g, params.p
    counts: Counter = Counter()
    u = traj.u0
    for _ in range(traj.ell):
        counts[u & mask] += 1
        u = pow(g, u, p)
    return FreqTable(k=k, counts=dict(counts), ell=traj.ell)


def omega(table: FreqTable, U: int) -> frozenset[int]:
    """k-bit strings whose frequency is at least U."""
    if U < 1:
        raise DomainError(f"threshold U must be >= 1, got {U}")
    return frozenset(w for w, c in table.counts.items() if c >= U)


def pair_frequency_max(params: ExpMapParams, traj: Trajectory, k: int) -> int:
    """Largest multiplicity of a consecutive pair (xi_n, xi_{n+1}), n = 0..ell-1."""
    _check_k(k, MAX_FREQ_BITS)
    _check_budget(traj, "pair frequency table")

    mask = (1 << k) - 1
    values = _values(params, traj)
    if values is not None:
        bits = np.bitwise_and(values, mask).astype(np.uint64)
        following = np.empty_like(bits)
        following[:-1] = bits[1:]
        following[-1] = traj.cycle_entry & mask
        codes = np.left_shift(bits, np.uint64(k)) | following
        return int(np.unique(codes, return_counts=True)[1].max())

    g, p = params.g, params.p
    pairs: Counter = Counter()
    u = traj.u0
    for _ in range(traj.ell):
        v = pow(g, u, p)
        pairs[((u & mask) << k) | (v & mask)] += 1
        u = v
    return max(pairs.values(), default=0)
