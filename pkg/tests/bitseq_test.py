from collections import Counter
from unittest.mock import Mock

import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from config import settings
from core.bitseq import (
    FreqTable,
    bit_stats,
    extract_bits,
    freq,
    nu,
    omega,
    pair_frequency_max,
    tau,
    tau_profile,
)
from core.errors import BudgetExceededError, DomainError
from core.expmap import Trajectory, trajectory
from core.numtheory import find_primitive_root, make_params, primes_up_to


def materialize(p: int, g: int, u0: int, image: list[int] | None = None) -> tuple[list[int], int]:
    """The trajectory values and the tail length, by scanning for the first repeat."""
    if image is None:
        image = [pow(g, u, p) for u in range(p)]
    values, index = [], {}
    u = u0
    while u not in index:
        index[u] = len(values)
        values.append(u)
        u = image[u]
    return values, index[u]


def naive_period(cycle: list[int]) -> int:
    t = len(cycle)
    for d in range(1, t + 1):
        if t % d == 0 and cycle[d:] + cycle[:d] == cycle:
            return d
    return t


def check_against_oracle(p: int, g: int) -> None:
    params = make_params(p, g)
    image = [pow(g, u, p) for u in range(p)]
    for u0 in range(1, p):
        values, s = materialize(p, g, u0, image)
        traj = trajectory(params, u0)
        assert (traj.s, traj.ell) == (s, len(values))
        for k in range(1, params.r + 1):
            bits = [u & ((1 << k) - 1) for u in values]
            assert tau(params, traj, k) == naive_period(bits[s:])
            for N in {1, len(values) // 2 or 1, len(values)}:
                assert nu(params, traj, k, N) == len(set(bits[:N]))
            assert freq(params, traj, k).counts == dict(Counter(bits))


@pytest.fixture
def cycle_11():
    params = make_params(11, 2)
    return params, trajectory(params, 1)


class TestExtractBits:

    def test_values(self):
        assert extract_bits(6, 1) == 0
        assert extract_bits(6, 2) == 2

    def test_identity_when_k_covers_u(self):
        assert extract_bits(1000, 10) == 1000

    def test_invalid_k_raises(self):
        with pytest.raises(DomainError):
            extract_bits(6, 0)
        with pytest.raises(DomainError):
            extract_bits(6, 64)


class TestTau:
    """Test suite for periods of truncated outputs."""

    def test_examples(self):
        params = make_params(7, 3)
        assert tau(params, trajectory(params, 1), 1) == 3
        assert tau(params, trajectory(params, 2), 1) == 1

    def test_full_width_returns_cycle_length(self, cycle_11):
        params, traj = cycle_11
        assert tau(params, traj, 4) == 5

    def test_matches_naive_period_mod_13(self):
        params = make_params(13, 6)
        traj = trajectory(params, 2)
        values, s = materialize(13, 6, 2)
        bits = [u & 1 for u in values[s:]]
        assert tau(params, traj, 1) == naive_period(bits)

    @hyp_settings(max_examples=100, deadline=None)
    @given(st.sampled_from(primes_up_to(3000)[1:]), st.data())
    def test_wide_window_is_full_period(self, p, data):
        """Test that tau_k = t once 2^k >= p."""
        g = data.draw(st.integers(1, p - 1))
        params = make_params(p, g)
        traj = trajectory(params, data.draw(st.integers(1, p - 1)))
        k = data.draw(st.integers(params.r, 63))
        assert tau(params, traj, k) == traj.t

    def test_bit_stats(self):
        params = make_params(7, 3)
        stats = bit_stats(params, trajectory(params, 1), 1)
        assert stats.tau_k == 3
        assert stats.to_dict()["t"] == 3

    def test_profile_divisibility(self):
        """Test that tau_k divides t and tau_{k+1}."""
        for p in (101, 257, 1009):
            for g in (2, 3, 5):
                params = make_params(p, g)
                traj = trajectory(params, 1)
                profile = tau_profile(params, traj)
                assert sorted(profile) == list(range(1, params.r + 1))
                for k, value in profile.items():
                    assert traj.t % value == 0
                    if k + 1 in profile:
                        assert profile[k + 1] % value == 0
                assert profile[params.r] == traj.t


class TestNu:
    """Test suite for distinct value counts."""

    @hyp_settings(max_examples=100, deadline=None)
    @given(st.sampled_from(primes_up_to(3000)[1:]), st.data())
    def test_wide_window_sees_every_value(self, p, data):
        """Test that nu_k(N) = N once 2^k >= p."""
        g = data.draw(st.integers(1, p - 1))
        params = make_params(p, g)
        traj = trajectory(params, data.draw(st.integers(1, p - 1)))
        k = data.draw(st.integers(params.r, 63))
        N = data.draw(st.integers(1, traj.ell))
        assert nu(params, traj, k, N) == N

    def test_examples(self, cycle_11):
        params, traj = cycle_11
        assert nu(params, traj, 1, 5) == 2
        assert nu(params, traj, 4, 5) == 5
        assert nu(params, traj, 3, 1) == 1

    @pytest.mark.parametrize("N", [0, 6])
    def test_n_outside_trajectory_raises(self, cycle_11, N):
        params, traj = cycle_11
        with pytest.raises(DomainError):
            nu(params, traj, 1, N)

    def test_monotone_in_n(self):
        params = make_params(1009, 11)
        traj = trajectory(params, 3)
        counts = [nu(params, traj, 5, N) for N in range(1, traj.ell + 1)]
        assert counts == sorted(counts)
        assert counts[-1] <= 2**5


class TestFreq:
    """Test suite for frequency tables and frequent strings."""

    def test_examples(self, cycle_11):
        params, traj = cycle_11
        assert freq(params, traj, 1).counts == {0: 3, 1: 2}
        fixed = make_params(7, 3)
        assert freq(fixed, trajectory(fixed, 2), 2).counts == {2: 1}

    def test_counts_sum_to_ell(self):
        params = make_params(1009, 11)
        traj = trajectory(params, 3)
        table = freq(params, traj, 4)
        assert sum(table.counts.values()) == traj.ell
        assert table.ell == traj.ell

    def test_k_above_32_raises(self, cycle_11):
        params, traj = cycle_11
        with pytest.raises(DomainError):
            freq(params, traj, 33)

    def test_step_budget(self, cycle_11, monkeypatch):
        params, traj = cycle_11
        monkeypatch.setattr(settings, "STEP_BUDGET", 3)
        with pytest.raises(BudgetExceededError):
            freq(params, traj, 1)

    def test_omega(self):
        table = FreqTable(k=1, counts={0: 3, 1: 2}, ell=5)
        assert omega(table, 3) == {0}
        assert omega(table, 1) == {0, 1}
        assert omega(table, 4) == frozenset()

    @hyp_settings(max_examples=50, deadline=None)
    @given(st.sampled_from(primes_up_to(3000)[1:]), st.data())
    def test_omega_shrinks_with_threshold(self, p, data):
        g = data.draw(st.integers(1, p - 1))
        params = make_params(p, g)
        table = freq(params, trajectory(params, data.draw(st.integers(1, p - 1))), data.draw(st.integers(1, 8)))
        for U in range(2, table.max_count() + 2):
            assert omega(table, U) <= omega(table, U - 1)

    def test_omega_threshold_below_one_raises(self):
        with pytest.raises(DomainError):
            omega(FreqTable(k=1, counts={0: 1}, ell=1), 0)

    def test_to_dict_uses_string_keys(self):
        table = FreqTable(k=1, counts={1: 2, 0: 3}, ell=5)
        assert table.to_dict() == {"k": 1, "ell": 5, "counts": {"0": 3, "1": 2}}

    def test_pair_frequency_max(self, cycle_11):
        params, traj = cycle_11
        # bits 1, 0, 0, 1, 0 followed by the wrap-around value 1
        assert pair_frequency_max(params, traj, 1) == 2


class TestValuePaths:
    """Test suite for array-backed statistics against the exponentiation walk."""

    @pytest.fixture
    def long_cycle(self):
        params = make_params(10007, find_primitive_root(10007))
        return params, trajectory(params, 1)

    @staticmethod
    def statistics(params, traj):
        return (
            [tau(params, traj, k) for k in range(1, params.r + 1)],
            [nu(params, traj, k, N) for k in (1, 5, 13) for N in (1, traj.ell // 3 or 1, traj.ell)],
            [freq(params, traj, k).counts for k in (1, 4, 9)],
            [pair_frequency_max(params, traj, k) for k in (1, 4, 9)],
        )

    def test_pow_walk_agrees(self, long_cycle, monkeypatch):
        params, traj = long_cycle
        expected = self.statistics(params, traj)
        monkeypatch.setattr(settings, "MEM_BUDGET", 1)
        assert self.statistics(params, traj) == expected

    def test_unique_counting_agrees(self, long_cycle, monkeypatch):
        params, traj = long_cycle
        expected = self.statistics(params, traj)
        monkeypatch.setattr("core.bitseq.SMALL_SCAN", 1)
        assert self.statistics(params, traj) == expected

    def test_tail_trajectory(self, monkeypatch):
        params = make_params(1009, 11)
        traj = trajectory(params, 3)
        expected = self.statistics(params, traj)
        monkeypatch.setattr(settings, "MEM_BUDGET", 1)
        assert self.statistics(params, traj) == expected

    def test_short_prefix_skips_bitset(self, monkeypatch):
        """Test that nu over a single value does not allocate a 2^32-bit set."""
        p = 4_294_967_311
        params = make_params(p, 3)
        monkeypatch.setattr(settings, "MEM_BUDGET", 1)
        monkeypatch.setattr("core.bitseq.VisitedBitset", Mock(side_effect=AssertionError("bitset built")))
        traj = Trajectory(u0=5, s=0, t=1, ell=1, cycle_entry=5)
        assert nu(params, traj, 32, 1) == 1


class TestOracle:
    """Exact agreement with a materialize-and-scan oracle."""

    def test_small_primes(self):
        for p in primes_up_to(40)[1:]:
            for g in range(1, p):
                check_against_oracle(p, g)

    @hyp_settings(max_examples=100, deadline=None)
    @given(st.sampled_from(primes_up_to(2000)[1:]), st.data())
    def test_random_configurations(self, p, data):
        g = data.draw(st.integers(1, p - 1))
        params = make_params(p, g)
        u0 = data.draw(st.integers(1, p - 1))
        k = data.draw(st.integers(1, params.r))
        values, s = materialize(p, g, u0)
        traj = trajectory(params, u0)
        bits = [u % 2**k for u in values]
        assert tau(params, traj, k) == naive_period(bits[s:])
        assert nu(params, traj, k, traj.ell) == len(set(bits))

    @pytest.mark.slow
    def test_all_primes_up_to_200(self):
        for p in primes_up_to(200)[1:]:
            for g in range(1, p):
                check_against_oracle(p, g)
