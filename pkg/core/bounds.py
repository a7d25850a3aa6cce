"""Executable versions of the period, value-set and frequency estimates.

Every piecewise estimate selects exactly one regime. Two bounds are rigorous
and asserted (the trivial period bound and the trivial value-set bound, both
when 2^k < p); a violation raises BoundViolationError. All other estimates
hold only up to an unspecified factor (p^o(1), N^o(1), c(eps)); they are
evaluated with that factor set to 1 and reported, never asserted.

Regime boundaries follow the printed inequalities. Where two neighbouring
cases are both non-strict at a boundary, the lower case owns it. Threshold
tests are exact: k/r is compared as a Fraction and x <= p^(a/b) as
x^b <= p^a on integers.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction as F

import numpy as np

from config import settings
from core import bitseq
from core.errors import BoundViolationError, BudgetExceededError, DomainError
from core.expmap import Trajectory, iterate
from core.numtheory import ExpMapParams, is_prime

logger = logging.getLogger(__name__)

UNSPECIFIED = "up to unspecified factor"
LN2 = math.log(2)

# Second boundary of the value-set corollary regime table is 13/16.
VALUE_COROLLARY_NOTE = 'printed regime "17/20 > k/r >= 13/6" is evaluated as "17/20 > k/r >= 13/16"'


@dataclass(frozen=True)
class IntervalSpec:
    """The integers start, start + 1, ..., start + length - 1 inside [0, p - 1]."""

    start: int
    length: int

    @property
    def end(self) -> int:
        return self.start + self.length

    def validate(self, p: int) -> None:
        if self.length < 1 or self.start < 0 or self.end > p:
            raise DomainError(
                f"interval [{self.start}, {self.end - 1}] must be non-empty and lie in [0, {p - 1}]"
            )

    def __contains__(self, x: int) -> bool:
        return self.start <= x < self.end


@dataclass(frozen=True)
class BoundValue:
    """A piecewise estimate evaluated at one point, with the case that fired."""

    value: float
    regime: str


@dataclass(frozen=True)
class BoundReport:
    """Observed quantity against one evaluated bound."""

    quantity: str
    observed: int
    bound: float
    regime: str
    direction: str   # "lower" or "upper"
    asserted: bool
    passed: bool

    @property
    def ratio(self) -> float:
        return self.observed / self.bound if self.bound > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "observed": self.observed,
            "bound": self.bound,
            "regime": self.regime,
            "ratio": self.ratio,
            "asserted": self.asserted,
            "passed": self.passed,
        }


########################################
###### Regime tables ##################
########################################

# k/r regimes: (lower threshold on k/r, label, exponent of 2^k, exponent of p)
PERIOD_THEOREM = [
    (F(17, 20), "k/r >= 17/20: (2^k/p)^(1/3)", F(1, 3), F(-1, 3)),
    (F(13, 16), "17/20 > k/r >= 13/16: 2^(7k/6) p^(-25/24)", F(7, 6), F(-25, 24)),
    (F(3, 5), "13/16 > k/r >= 3/5: (2^k/p)^(1/2)", F(1, 2), F(-1, 2)),
    (F(0), "3/5 > k/r: 2^(4k/3) p^(-1)", F(4, 3), F(-1)),
]

PERIOD_COROLLARY = PERIOD_THEOREM[:3] + [
    (F(3, 8), "3/5 > k/r >= 3/8: 2^(4k/3) p^(-1)", F(4, 3), F(-1)),
    (F(1, 4), "3/8 > k/r >= 1/4: p^(-1/2)", F(0), F(-1, 2)),
    (F(0), "1/4 > k/r: 2^(2k) p^(-1)", F(2), F(-1)),
]

VALUE_THEOREM = [
    (F(17, 20), "1 >= k/r >= 17/20: (2^k/p)^(1/6)", F(1, 6), F(-1, 6)),
    (F(13, 16), "17/20 > k/r >= 13/16: 2^(7k/12) p^(-25/48)", F(7, 12), F(-25, 48)),
    (F(3, 5), "13/16 > k/r >= 3/5: (2^k/p)^(1/4)", F(1, 4), F(-1, 4)),
    (F(0), "3/5 > k/r: 2^(2k/3) p^(-1/2)", F(2, 3), F(-1, 2)),
]

VALUE_COROLLARY = [
    (F(17, 20), "k/r >= 17/20: (2^k/p)^(1/6)", F(1, 6), F(-1, 6)),
    (F(13, 16), "17/20 > k/r >= 13/16: 2^(7k/12) p^(-25/48)", F(7, 12), F(-25, 48)),
    (F(3, 5), "13/16 > k/r >= 3/5: (2^k/p)^(1/4)", F(1, 4), F(-1, 4)),
    (F(3, 8), "3/5 > k/r >= 3/8: 2^(2k/3) p^(-1/2)", F(2, 3), F(-1, 2)),
    (F(1, 4), "3/8 > k/r >= 1/4: p^(-1/4)", F(0), F(-1, 4)),
    (F(0), "1/4 > k/r: 2^k p^(-1/2)", F(1), F(-1, 2)),
]

FREQ_THEOREM = [
    (F(17, 20), "k/r >= 17/20: 2^(2k/3) p^(1/3)", F(2, 3), F(1, 3)),
    (F(13, 16), "17/20 > k/r >= 13/16: 2^(k/6) p^(25/24)", F(1, 6), F(25, 24)),
    (F(3, 5), "13/16 > k/r >= 3/5: 2^(k/2) p^(1/2)", F(1, 2), F(1, 2)),
    (F(0), "3/5 > k/r: 2^(-k/3) p", F(-1, 3), F(1)),
]

# size regimes: ((a, b) meaning x <= p^(a/b), or None for the last case), label, exponents
RIJ_COROLLARY = [
    ((3, 20), "H <= p^(3/20): H^(1/3)", F(1, 3), F(0)),
    ((3, 16), "p^(3/20) < H <= p^(3/16): H^(7/6) p^(-1/8)", F(7, 6), F(-1, 8)),
    ((2, 5), "p^(3/16) < H <= p^(2/5): H^(1/2)", F(1, 2), F(0)),
    (None, "p^(2/5) < H: H^(4/3) p^(-1/3)", F(4, 3), F(-1, 3)),
]

SUMPROD_LEMMA = [
    ((1, 2), "#A <= p^(1/2): (#A)^(12/11)", F(12, 11), F(0)),
    ((35, 68), "p^(1/2) <= #A <= p^(35/68): (#A)^(7/6) p^(-1/24)", F(7, 6), F(-1, 24)),
    ((13, 24), "p^(35/68) <= #A <= p^(13/24): (#A)^(10/11) p^(1/11)", F(10, 11), F(1, 11)),
    ((2, 3), "p^(13/24) <= #A <= p^(2/3): (#A)^2 p^(-1/2)", F(2), F(-1, 2)),
    (None, "#A >= p^(2/3): (#A)^(1/2) p^(1/2)", F(1, 2), F(1, 2)),
]

# (size regime, label, exponent of N, exponent of 2^k, exponent of p)
VALUE_THEOREM_2 = [
    ((1, 2), "N <= p^(1/2): N^(6/11) (2^k/p)^(1/2)", F(6, 11), F(1, 2), F(-1, 2)),
    ((35, 68), "p^(1/2) < N <= p^(35/68): N^(7/12) 2^(k/2) p^(-13/24)", F(7, 12), F(1, 2), F(-13, 24)),
    ((13, 24), "p^(35/68) < N <= p^(13/24): N^(5/11) 2^(k/2) p^(-9/22)", F(5, 11), F(1, 2), F(-9, 22)),
    ((2, 3), "p^(13/24) < N <= p^(2/3): N 2^(k/2) p^(-1)", F(1), F(1, 2), F(-1)),
    (None, "N > p^(2/3): N^(1/4) 2^(k/2) p^(-1/4)", F(1, 4), F(1, 2), F(-1, 4)),
]


def _by_bit_ratio(k: int, r: int, table: list) -> tuple:
    ratio = F(k, r)
    for row in table:
        if ratio >= row[0]:
            return row
    return table[-1]


def _by_size(x: int, p: int, table: list) -> tuple:
    for row in table:
        cond = row[0]
        if cond is None or x ** cond[1] <= p ** cond[0]:
            return row
    return table[-1]


def _power(log_value: float) -> float:
    return math.exp(log_value)


def _marked(label: str) -> str:
    return f"{label} [{UNSPECIFIED}]"


def _report(quantity: str, observed: int, bound: float, regime: str, direction: str) -> BoundReport:
    passed = observed >= bound if direction == "lower" else observed <= bound
    return BoundReport(
        quantity=quantity,
        observed=observed,
        bound=bound,
        regime=regime,
        direction=direction,
        asserted=False,
        passed=bool(passed),
    )


def _trivial_report(quantity: str, observed: int, scale: int, k: int, p: int) -> BoundReport:
    """observed >= scale * 2^(k-1) / p, asserted exactly when 2^k < p."""
    bound = scale * 2 ** (k - 1) / p
    if (1 << k) >= p:
        return BoundReport(
            quantity=quantity,
            observed=observed,
            bound=bound,
            regime="vacuous: 2^k >= p",
            direction="lower",
            asserted=False,
            passed=observed * p >= scale * 2 ** (k - 1),
        )

    passed = observed * p >= scale * 2 ** (k - 1)
    if not passed:
        raise BoundViolationError(
            f"{quantity} = {observed} violates the trivial bound {bound:.6g} (k={k}, p={p})"
        )
    return BoundReport(
        quantity=quantity,
        observed=observed,
        bound=bound,
        regime="rigorous: 2^k < p",
        direction="lower",
        asserted=True,
        passed=True,
    )


def _check_k(params: ExpMapParams, k: int) -> None:
    if not 1 <= k <= params.r:
        raise DomainError(f"bit width k must be in 1..r = 1..{params.r}, got {k}")


########################################
###### Counting kernels ###############
########################################

def rcount(p: int, g: int, a: int, b: int, I: IntervalSpec, J: IntervalSpec) -> int:
    """Number of u in [1, p - 1] with (a u mod p) in I and (b g^u mod p) in J.

    Raises:
        DomainError: If p is not prime, p divides a, b or g, or an interval leaves [0, p - 1]
        BudgetExceededError: If p exceeds settings.RCOUNT_MAX_P
    """
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    for name, value in (("a", a), ("b", b), ("g", g)):
        if value % p == 0:
            raise DomainError(f"p = {p} divides {name} = {value}")
    I.validate(p)
    J.validate(p)
    if p > settings.RCOUNT_MAX_P:
        raise BudgetExceededError("rcount scan (values of u)", p - 1, settings.RCOUNT_MAX_P)

    a %= p
    g %= p
    x = 0
    y = b % p
    count = 0
    for _ in range(p - 1):
        x += a
        if x >= p:
            x -= p
        y = y * g % p
        if x in I and y in J:
            count += 1
    return count


def sumprod_cards(p: int, A) -> tuple[int, int]:
    """Cardinalities of the sumset 2A and the product set A^2 in F_p.

    Raises:
        DomainError: If A is empty or has an element outside [0, p - 1]
        BudgetExceededError: If |A|^2 exceeds settings.PAIR_BUDGET
    """
    elements = sorted(set(A))
    if not elements:
        raise DomainError("A must be non-empty")
    if elements[0] < 0 or elements[-1] > p - 1:
        raise DomainError(f"elements of A must lie in [0, {p - 1}]")
    pairs = len(elements) ** 2
    if pairs > settings.PAIR_BUDGET:
        raise BudgetExceededError("sum-product table (pairs)", pairs, settings.PAIR_BUDGET)

    if p < settings.TABLE_MODE_MAX_P:
        arr = np.array(elements, dtype=np.int64)
        sums = np.unique((arr[:, None] + arr[None, :]) % p).size
        products = np.unique((arr[:, None] * arr[None, :]) % p).size
        return int(sums), int(products)

    sums = {(x + y) % p for x in elements for y in elements}
    products = {x * y % p for x in elements for y in elements}
    return len(sums), len(products)


########################################
###### Piecewise evaluators ###########
########################################

def rij_bound(p: int, T: int, H: int) -> BoundValue:
    """Upper estimate for R(I, J) when both intervals hold H consecutive integers.

    Raises:
        DomainError: If H < 1 or H > T
    """
    if H < 1:
        raise DomainError(f"H must be >= 1, got {H}")
    if H > T:
        raise DomainError(f"H = {H} exceeds the multiplicative order T = {T}")
    _, label, eh, ep = _by_size(H, p, RIJ_COROLLARY)
    value = _power(float(eh) * math.log(H) + float(ep) * math.log(p))
    return BoundValue(value=value, regime=_marked(label))


def rij_lemma_bound(p: int, T: int, K: int, L: int) -> BoundValue:
    """Smaller of the two upper estimates for intervals of lengths K and L (L <= T)."""
    if K < 1 or L < 1:
        raise DomainError(f"interval lengths must be >= 1, got K={K}, L={L}")
    if L > T:
        raise DomainError(f"L = {L} exceeds the multiplicative order T = {T}")
    first = (K / (p ** (1 / 3) * L ** (1 / 6)) + 1) * L ** (1 / 2)
    second = (K / (p ** (1 / 8) * L ** (1 / 6)) + 1) * L ** (1 / 3)
    if first <= second:
        return BoundValue(value=first, regime=_marked("(K p^(-1/3) L^(-1/6) + 1) L^(1/2)"))
    return BoundValue(value=second, regime=_marked("(K p^(-1/8) L^(-1/6) + 1) L^(1/3)"))


def sumprod_bound(p: int, n: int) -> BoundValue:
    """Lower estimate for max(#2A, #A^2) over sets A of size n."""
    if n < 1:
        raise DomainError(f"set size must be >= 1, got {n}")
    _, label, en, ep = _by_size(n, p, SUMPROD_LEMMA)
    value = _power(float(en) * math.log(n) + float(ep) * math.log(p))
    return BoundValue(value=value, regime=_marked(label))


def period_bounds(params: ExpMapParams, t: int, k: int, tau_k: int) -> list[BoundReport]:
    """All lower bounds on tau_k in terms of t, evaluated for (p, k).

    Args:
        params: Map parameters
        t: Cycle length
        k: Bit width, 1..r
        tau_k: Observed period of the k-bit outputs

    Returns:
        Reports for the trivial bound (asserted when 2^k < p), the exponential-sum
        bound, the period theorem and its corollary
    """
    _check_k(params, k)
    p, r = params.p, params.r
    ln_t, ln_p = math.log(t), math.log(p)
    reports = [_trivial_report("tau_k", tau_k, t, k, p)]

    if 4 * k < r:
        fs = _power(ln_t + 2 * k * LN2 - ln_p)
        reports.append(_report(
            "tau_k", tau_k, fs, _marked("k/r < 1/4: c(eps) t 2^(2k) p^(-1), c(eps) := 1"), "lower"
        ))
    else:
        fs = _power(ln_t - ln_p / 2)
        reports.append(_report("tau_k", tau_k, fs, _marked("k/r >= 1/4: t p^(-1/2)"), "lower"))

    for table in (PERIOD_THEOREM, PERIOD_COROLLARY):
        _, label, e2, ep = _by_bit_ratio(k, r, table)
        value = _power(ln_t + float(e2) * k * LN2 + float(ep) * ln_p)
        reports.append(_report("tau_k", tau_k, value, _marked(f"t * {label}"), "lower"))
    return reports


def value_bounds(
    params: ExpMapParams,
    traj: Trajectory,
    N: int,
    k: int,
    nu_k: int,
    pair_max: int | None = None,
) -> list[BoundReport]:
    """All lower bounds on nu_k(N), plus the pair-count estimate when pair_max is given.

    Raises:
        DomainError: If N is outside [1, ell]
    """
    _check_k(params, k)
    if not 1 <= N <= traj.ell:
        raise DomainError(f"N must lie in [1, ell] = [1, {traj.ell}], got {N}")
    p, r = params.p, params.r
    ln_n, ln_p = math.log(N), math.log(p)
    reports = [_trivial_report("nu_k(N)", nu_k, N, k, p)]

    for table in (VALUE_THEOREM, VALUE_COROLLARY):
        _, label, e2, ep = _by_bit_ratio(k, r, table)
        value = _power(ln_n / 2 + float(e2) * k * LN2 + float(ep) * ln_p)
        reports.append(_report("nu_k(N)", nu_k, value, _marked(f"N^(1/2) * {label}"), "lower"))

    _, label, en, e2, ep = _by_size(N, p, VALUE_THEOREM_2)
    value = _power(float(en) * ln_n + float(e2) * k * LN2 + float(ep) * ln_p)
    reports.append(_report("nu_k(N)", nu_k, value, _marked(label), "lower"))

    if pair_max is not None:
        estimate = p * 2.0 ** (-2 * k) + math.sqrt(p) * ln_p**2
        reports.append(_report(
            "max pair count", pair_max, estimate,
            _marked("O(p 2^(-2k) + p^(1/2) (log p)^2), implied constant := 1"), "upper",
        ))
    return reports


def freq_bounds(params: ExpMapParams, table: bitseq.FreqTable, U: int) -> list[BoundReport]:
    """Upper bounds on #Omega_k(U) and on the largest frequency max V_k."""
    k = table.k
    _check_k(params, k)
    p, r = params.p, params.r
    _, label, e2, ep = _by_bit_ratio(k, r, FREQ_THEOREM)
    base = _power(float(e2) * k * LN2 + float(ep) * math.log(p))

    strings = len(bitseq.omega(table, U))
    return [
        _report("#Omega_k(U)", strings, base / U, _marked(f"U^(-1) * {label}"), "upper"),
        _report("max V_k", table.max_count(), base, _marked(label), "upper"),
    ]


def trajectory_sumset_report(params: ExpMapParams, traj: Trajectory, N: int, k: int, nu_k: int) -> list[BoundReport]:
    """Sum-product counts of the first N trajectory values against their bounds.

    With A = {u_0, ..., u_{N-1}} and A' = {u_1, ..., u_N} = g^A, both #(2A) and
    #(A'^2) are at most nu_k(N)^2 2^(r-k+1); max(#2A, #A^2) is compared with
    the sum-product estimate at #A = N.
    """
    _check_k(params, k)
    if not 1 <= N <= traj.ell:
        raise DomainError(f"N must lie in [1, ell] = [1, {traj.ell}], got {N}")
    p, r = params.p, params.r
    values = list(iterate(params, traj.u0, N + 1))
    sums, products = sumprod_cards(p, values[:N])
    _, shifted_products = sumprod_cards(p, values[1:])

    counting = nu_k**2 * 2 ** (r - k + 1)
    lemma = sumprod_bound(p, N)
    return [
        _report("#(2A)", sums, float(counting), "counting: nu_k(N)^2 2^(r-k+1)", "upper"),
        _report("#((g^A)^2)", shifted_products, float(counting), "counting: nu_k(N)^2 2^(r-k+1)", "upper"),
        _report("max(#2A, #A^2)", max(sums, products), lemma.value, lemma.regime, "lower"),
    ]


########################################
###### Consistency report #############
########################################

def consistency_report(params: ExpMapParams, traj: Trajectory, k: int, U: int = 1) -> dict:
    """Every observed quantity for one (p, g, u0, k) next to every bound.

    Raises:
        BoundViolationError: If an asserted bound fails
    """
    _check_k(params, k)
    tau_k = bitseq.tau(params, traj, k)
    nu_k = bitseq.nu(params, traj, k, traj.ell)
    observed = {"t": traj.t, "tau_k": tau_k, "nu_k": nu_k}
    metadata = {"o(1) factors": "set to 1 in every non-asserted bound", "value_corollary": VALUE_COROLLARY_NOTE}

    pair_max = None
    table = None
    if k <= bitseq.MAX_FREQ_BITS and traj.ell <= settings.STEP_BUDGET:
        table = bitseq.freq(params, traj, k)
        pair_max = bitseq.pair_frequency_max(params, traj, k)
        observed["max_V_k"] = table.max_count()
        observed["pair_max"] = pair_max
    else:
        metadata["freq"] = "skipped: k > 32 or trajectory over the step budget"

    reports = period_bounds(params, traj.t, k, tau_k)
    reports += value_bounds(params, traj, traj.ell, k, nu_k, pair_max)
    if table is not None:
        reports += freq_bounds(params, table, U)
    if traj.ell**2 <= settings.PAIR_BUDGET:
        reports += trajectory_sumset_report(params, traj, traj.ell, k, nu_k)
    else:
        metadata["sumset"] = "skipped: ell^2 over the pair budget"

    logger.debug(f"Consistency report p={params.p} g={params.g} u0={traj.u0} k={k}: {len(reports)} bounds")
    return {
        "params": params.to_dict(),
        "trajectory": traj.to_dict(),
        "k": k,
        "threshold": U,
        "observed": observed,
        "bounds": [rep.to_dict() for rep in reports],
        "asserted_passed": all(rep.passed for rep in reports if rep.asserted),
        "metadata": metadata,
    }
