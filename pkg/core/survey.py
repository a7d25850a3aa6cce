"""Cycle statistics of x -> g^x over sampled (p, g) pairs, and fixed-point averages.

Sampling: for pair `index` a numpy Generator (PCG64) is seeded with the
SeedSequence entropy [seed, index]. Candidates p are drawn uniformly from
[2^(m-1), 2^m - 1] until one is prime, then g uniformly from [1, p - 1]
until it is a primitive root. PCG64 and SeedSequence are platform independent,
so a (seed, index) pair names the same (p, g) everywhere.

gamma uses the natural logarithm: gamma = (number of cycles) / ln(p - 1).
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from config import constants, settings
from core.errors import BudgetExceededError, DomainError, ExpCycleError
from core.expmap import decompose, power_table
from core.numtheory import factorize, find_primitive_root, is_prime, is_primitive_root, make_params, primes_up_to
from data.cache_manager import CacheManager, record_key

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["p", "g", "lambda1", "lambda2", "lambda3", "gamma", "num_cycles", "c1", "c2", "c3", "smallest_cycle"]
ARTIN_MODES = ("primitive_roots", "all_g")
ARTIN_CHUNK = 2**22


@dataclass(frozen=True)
class SurveyConfig:
    """Dyadic exponent m, number of sampled pairs, seed and worker count."""

    m: int
    pairs: int
    seed: int
    workers: int = settings.DEFAULT_WORKERS

    def __post_init__(self):
        if not 3 <= self.m <= 63:
            raise DomainError(f"m must be in 3..63, got {self.m}")
        if self.pairs < 1:
            raise DomainError(f"pairs must be >= 1, got {self.pairs}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SurveyRecord:
    """Normalized cycle statistics of one permutation. Missing ranks are None."""

    p: int
    g: int
    lambda1: float
    lambda2: float | None
    lambda3: float | None
    gamma: float
    num_cycles: int
    c1: int
    c2: int | None
    c3: int | None
    smallest_cycle: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SurveyRecord":
        return cls(**{name: data[name] for name in CSV_COLUMNS})


@dataclass(frozen=True)
class SurveyAggregate:
    """Rank-wise means over a set of records, next to the random-permutation limits."""

    config: dict | None
    count: int
    mean_lambda1: float
    mean_lambda2: float | None
    mean_lambda3: float | None
    mean_gamma: float
    rank_counts: dict[str, int]
    mean_smallest_cycle: float
    mean_expected_smallest_cycle: float
    reference: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


########################################
###### Sampling and analysis ##########
########################################

def sample_pair(config: SurveyConfig, index: int) -> tuple[int, int]:
    """Deterministic (p, g) for the given sample index.

    Raises:
        DomainError: If index is outside [0, pairs)
        ExpCycleError: If no prime or primitive root is found within the retry cap
    """
    if not 0 <= index < config.pairs:
        raise DomainError(f"index must lie in [0, {config.pairs}), got {index}")

    rng = np.random.default_rng([config.seed, index])
    low, high = 2 ** (config.m - 1), 2**config.m

    for _ in range(settings.SAMPLE_RETRY_CAP):
        p = int(rng.integers(low, high, dtype=np.uint64))
        if p > 2 and is_prime(p):
            break
    else:
        raise ExpCycleError(f"no prime in I_{config.m} after {settings.SAMPLE_RETRY_CAP} draws")

    for _ in range(settings.SAMPLE_RETRY_CAP):
        g = int(rng.integers(1, p, dtype=np.uint64))
        if is_primitive_root(g, p):
            return p, g
    raise ExpCycleError(f"no primitive root mod {p} after {settings.SAMPLE_RETRY_CAP} draws")


def analyze_pair(p: int, g: int, mem_budget: int | None = None) -> SurveyRecord:
    """Cycle statistics of x -> g^x mod p for a primitive root g."""
    params = make_params(p, g)
    lengths = decompose(params, mem_budget).cycle_lengths
    n = p - 1
    top = lengths[:3] + [None] * (3 - min(3, len(lengths)))
    return SurveyRecord(
        p=p,
        g=g,
        lambda1=top[0] / n,
        lambda2=None if top[1] is None else top[1] / n,
        lambda3=None if top[2] is None else top[2] / n,
        gamma=len(lengths) / math.log(n),
        num_cycles=len(lengths),
        c1=top[0],
        c2=top[1],
        c3=top[2],
        smallest_cycle=lengths[-1],
    )


def _analyze_job(job: tuple[int, int, int | None]) -> SurveyRecord:
    p, g, mem_budget = job
    return analyze_pair(p, g, mem_budget)


def records_frame(records: list[SurveyRecord]) -> pd.DataFrame:
    """Records as a DataFrame in canonical (p, g) order with nullable integer ranks."""
    frame = pd.DataFrame([rec.to_dict() for rec in records], columns=CSV_COLUMNS)
    frame = frame.sort_values(["p", "g"], kind="stable").reset_index(drop=True)
    for column in ("c2", "c3"):
        frame[column] = frame[column].astype("Int64")
    for column in ("lambda2", "lambda3"):
        frame[column] = frame[column].astype("float64")
    return frame


def aggregate(records: list[SurveyRecord], config: SurveyConfig | None = None) -> SurveyAggregate:
    """Means over records taken in (p, g) order; records lacking rank r are left out of that rank.

    Raises:
        DomainError: If records is empty
    """
    if not records:
        raise DomainError("cannot aggregate an empty list of records")

    frame = records_frame(records)
    counts = {name: int(frame[name].count()) for name in ("lambda1", "lambda2", "lambda3")}
    excluded = len(frame) - counts["lambda3"]
    if excluded:
        logger.info(f"{excluded} of {len(frame)} records have fewer than 3 cycles")

    def mean(column: str) -> float | None:
        values = frame[column].dropna()
        return math.fsum(values) / len(values) if len(values) else None

    reference = {
        "G1": constants.SHEPP_LLOYD[1],
        "G2": constants.SHEPP_LLOYD[2],
        "G3": constants.SHEPP_LLOYD[3],
        "gamma": constants.GAMMA_REFERENCE,
    }
    if config is not None and config.m in constants.PUBLISHED_AVERAGES:
        reference["published"] = constants.PUBLISHED_AVERAGES[config.m]

    expected_smallest = np.exp(-constants.EULER_GAMMA) * np.log(frame["p"].astype("float64"))
    return SurveyAggregate(
        config=None if config is None else config.to_dict(),
        count=len(frame),
        mean_lambda1=mean("lambda1"),
        mean_lambda2=mean("lambda2"),
        mean_lambda3=mean("lambda3"),
        mean_gamma=mean("gamma"),
        rank_counts=counts,
        mean_smallest_cycle=mean("smallest_cycle"),
        mean_expected_smallest_cycle=math.fsum(expected_smallest) / len(frame),
        reference=reference,
    )


class SurveyRunner:
    """
    Runs one survey configuration.

    Responsibilities:
    - Sample the (p, g) pairs of the configuration
    - Serve records from the cache when available
    - Decompose the remaining pairs on a worker pool
    - Track run statistics
    """

    def __init__(self, config: SurveyConfig, cache: CacheManager | None = None, mem_budget: int | None = None):
        self.config = config
        self.cache = cache or CacheManager(url="")
        self.mem_budget = mem_budget
        self.logger = logging.getLogger(__name__)
        self.stats = {
            'pairs': 0,
            'cache_hits': 0,
            'cache_misses': 0,
            'seconds': 0.0,
        }

    def run(self) -> list[SurveyRecord]:
        """Analyze every sampled pair; records come back in (p, g) order."""
        started = time.perf_counter()
        pairs = [sample_pair(self.config, i) for i in range(self.config.pairs)]
        self.logger.info(f"Sampled {len(pairs)} pairs from I_{self.config.m} (seed {self.config.seed})")

        use_cache = self.cache.enabled
        if use_cache and not self.cache.health_check():
            self.logger.warning("Record cache is configured but unreachable, computing every pair")
            use_cache = False

        records: dict[int, SurveyRecord] = {}
        missing = []
        for index, (p, g) in enumerate(pairs):
            cached = self.cache.get(record_key(p, g)) if use_cache else None
            if cached is not None:
                records[index] = SurveyRecord.from_dict(cached)
                self.stats['cache_hits'] += 1
            else:
                missing.append(index)
                self.stats['cache_misses'] += 1

        jobs = [(*pairs[i], self.mem_budget) for i in missing]
        if self.config.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
                computed = list(pool.map(_analyze_job, jobs))
        else:
            computed = [_analyze_job(job) for job in jobs]

        for index, record in zip(missing, computed):
            records[index] = record
            if use_cache:
                self.cache.set(record_key(record.p, record.g), record.to_dict(), ttl=settings.CACHE_TTL['record'])

        self.stats['pairs'] = len(pairs)
        self.stats['seconds'] = time.perf_counter() - started
        self.logger.info(
            f"Survey m={self.config.m} finished: {len(missing)} decomposed, "
            f"{self.stats['cache_hits']} from cache, {self.stats['seconds']:.1f}s"
        )
        ordered = [records[i] for i in range(len(pairs))]
        return sorted(ordered, key=lambda rec: (rec.p, rec.g))

    def get_statistics(self) -> dict:
        return {**self.stats, 'cache': self.cache.get_stats()}


########################################
###### Fixed-point averages ###########
########################################

def artin_sums(p: int) -> dict:
    """Fixed-point totals for one odd prime p, from a single discrete-log scan.

    Every g in [1, p - 1] is h^j for a primitive root h, so g^u = h^(j u mod (p - 1))
    and g is a primitive root iff gcd(j, p - 1) = 1.

    Returns:
        Dictionary with p, all (sum over g of N_{p,g}(1)), primitive (same over
        primitive roots g), coprime_pairs (primitive g and u with gcd(u, p - 1) = 1
        and g^u = u) and coprime_main_term phi(p - 1)^2 / (p - 1),
        and max_fixed, the largest N_{p,g}(1) over all g
    """
    n = p - 1
    h = find_primitive_root(p)
    table = power_table(make_params(p, h))
    u = np.arange(1, p, dtype=np.int64)
    coprime_u = np.gcd(u, n) == 1

    total = primitive = coprime_pairs = most = 0
    rows = max(1, ARTIN_CHUNK // n)
    for j0 in range(0, n, rows):
        j = np.arange(j0, min(j0 + rows, n), dtype=np.int64)
        hits = table[(j[:, None] * u[None, :]) % n] == u[None, :]
        per_g = hits.sum(axis=1)
        generator = np.gcd(j, n) == 1
        total += int(per_g.sum())
        most = max(most, int(per_g.max()))
        primitive += int(per_g[generator].sum())
        coprime_pairs += int(hits[generator][:, coprime_u].sum())

    phi = factorize(n).totient()
    return {
        "p": p,
        "all": total,
        "primitive": primitive,
        "coprime_pairs": coprime_pairs,
        "coprime_main_term": phi * phi / n,
        "max_fixed": most,
    }


def artin_scan(Q: int, workers: int = 1) -> dict:
    """Both normalized fixed-point averages over the odd primes p <= Q.

    Each prime contributes (1/(p - 1)) * sum over g of N_{p,g}(1); the sums are
    divided by the number of odd primes up to Q.

    Raises:
        DomainError: If Q < 3
        BudgetExceededError: If Q exceeds settings.ARTIN_MAX_Q
    """
    if Q < 3:
        raise DomainError(f"Q must be >= 3, got {Q}")
    if Q > settings.ARTIN_MAX_Q:
        raise BudgetExceededError("Artin scan (Q)", Q, settings.ARTIN_MAX_Q)

    primes = [p for p in primes_up_to(Q) if p > 2]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(artin_sums, primes, chunksize=8))
    else:
        rows = [artin_sums(p) for p in primes]

    count = len(rows)
    return {
        "Q": Q,
        "primes": count,
        "primitive_roots": math.fsum(row["primitive"] / (row["p"] - 1) for row in rows) / count,
        "all_g": math.fsum(row["all"] / (row["p"] - 1) for row in rows) / count,
        "coprime_pairs": sum(row["coprime_pairs"] for row in rows),
        "coprime_main_term": math.fsum(row["coprime_main_term"] for row in rows),
        "reference": {"primitive_roots": constants.ARTIN_CONSTANT, "all_g": 1.0},
    }


def artin_average(Q: int, mode: str, workers: int = 1) -> float:
    """Normalized fixed-point average over odd primes p <= Q for one mode.

    Raises:
        DomainError: If mode is unknown or Q < 3
    """
    if mode not in ARTIN_MODES:
        raise DomainError(f"mode must be one of {ARTIN_MODES}, got {mode!r}")
    return artin_scan(Q, workers)[mode]
