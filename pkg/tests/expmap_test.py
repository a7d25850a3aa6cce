import math
import random
import tracemalloc
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from config import settings
from config.constants import KNOWN_DECOMPOSITIONS
from core.errors import BudgetExceededError, DomainError
from core.expmap import (
    VisitedBitset,
    decompose,
    fixed_point_bound,
    fixed_point_bytes,
    fixed_point_count,
    iterate,
    n3_bound,
    power_table,
    step,
    table_bytes,
    trajectory,
    trajectory_values,
)
from core.numtheory import find_primitive_root, is_primitive_root, make_params, primes_up_to
from core.survey import artin_sums


def naive_trajectory(p: int, g: int, u0: int) -> tuple[int, int]:
    """(s, t) by materializing the sequence until the first repeat."""
    first_seen = {}
    u, n = u0, 0
    while u not in first_seen:
        first_seen[u] = n
        u = pow(g, u, p)
        n += 1
    s = first_seen[u]
    return s, n - s


def naive_cycle_lengths(p: int, g: int) -> list[int]:
    seen = set()
    lengths = []
    for start in range(1, p):
        if start in seen:
            continue
        x, length = start, 0
        while x not in seen:
            seen.add(x)
            x = pow(g, x, p)
            length += 1
        lengths.append(length)
    return sorted(lengths, reverse=True)


class TestStep:
    """Test suite for single map applications and iteration."""

    def test_step_values(self):
        assert step(make_params(7, 3), 2) == 2
        assert step(make_params(7, 3), 1) == 3
        assert step(make_params(11, 2), 5) == 10

    @pytest.mark.parametrize("u", [0, 7, -1])
    def test_step_out_of_range_raises(self, u):
        with pytest.raises(DomainError):
            step(make_params(7, 3), u)

    def test_iterate_prefix(self):
        assert list(iterate(make_params(7, 2), 3, 6)) == [3, 1, 2, 4, 2, 4]

    def test_iterate_validates_eagerly(self):
        """Test that the seed is checked before the first value is requested."""
        with pytest.raises(DomainError):
            iterate(make_params(7, 2), 0, 3)


class TestTrajectory:
    """Test suite for cycle detection."""

    def test_pure_cycle(self):
        traj = trajectory(make_params(7, 3), 1)
        assert (traj.s, traj.t, traj.ell) == (0, 3, 3)
        assert traj.cycle_entry == 1

    def test_tail_then_cycle(self):
        traj = trajectory(make_params(7, 2), 3)
        assert (traj.s, traj.t) == (2, 2)
        assert traj.cycle_entry == 2

    def test_fixed_point(self):
        traj = trajectory(make_params(7, 3), 2)
        assert (traj.s, traj.t) == (0, 1)

    def test_g_one_is_immediate_fixed_point(self):
        """Test that g = 1 sends every u to 1."""
        traj = trajectory(make_params(11, 1), 5)
        assert (traj.s, traj.t, traj.cycle_entry) == (1, 1, 1)

    def test_matches_oracle_small_primes(self):
        for p in primes_up_to(60)[1:]:
            for g in range(1, p):
                params = make_params(p, g)
                for u0 in range(1, p):
                    traj = trajectory(params, u0)
                    assert (traj.s, traj.t) == naive_trajectory(p, g, u0)

    @hyp_settings(max_examples=200)
    @given(st.sampled_from(primes_up_to(5000)[1:]), st.data())
    def test_cycle_property(self, p, data):
        """Test that u_s = u_{s+t} and that no smaller tail or cycle exists."""
        g = data.draw(st.integers(1, p - 1))
        u0 = data.draw(st.integers(1, p - 1))
        params = make_params(p, g)
        traj = trajectory(params, u0)
        assert (traj.s, traj.t) == naive_trajectory(p, g, u0)
        assert traj.t <= params.T
        assert traj.ell <= params.T

    def test_table_walk_matches_pow_walk(self, monkeypatch):
        params = make_params(10007, find_primitive_root(10007))
        walked = [trajectory(params, u0) for u0 in (1, 2, 5000, 10006)]
        monkeypatch.setattr(settings, "MEM_BUDGET", 1)
        assert [trajectory(params, u0) for u0 in (1, 2, 5000, 10006)] == walked

    def test_primitive_root_orbits_have_no_tail(self):
        rng = random.Random(7)
        primes = [p for p in primes_up_to(5000) if p > 500]
        for _ in range(20):
            p = rng.choice(primes)
            g = rng.randrange(2, p)
            while not is_primitive_root(g, p):
                g = rng.randrange(2, p)
            params = make_params(p, g)
            for _ in range(50):
                traj = trajectory(params, rng.randrange(1, p))
                assert traj.s == 0
                assert traj.cycle_entry == traj.u0

    @pytest.mark.parametrize("p", [101, 1009])
    def test_orbits_match_decomposition(self, p):
        """Test that every u0 lies on a cycle whose length appears in the decomposition."""
        params = make_params(p, find_primitive_root(p))
        lengths = Counter(decompose(params).cycle_lengths)
        on_cycles = Counter()
        for u0 in range(1, p):
            traj = trajectory(params, u0)
            assert traj.s == 0
            on_cycles[traj.t] += 1
        assert on_cycles == {c: c * n for c, n in lengths.items()}

    def test_values_match_iterate(self):
        params = make_params(1009, 11)
        traj = trajectory(params, 3)
        values = trajectory_values(params, traj)
        assert values.tolist() == list(iterate(params, 3, traj.ell))
        assert not values.flags.writeable

    def test_to_dict(self):
        assert trajectory(make_params(7, 3), 1).to_dict() == {"u0": 1, "s": 0, "t": 3, "ell": 3, "cycle_entry": 1}


class TestVisitedBitset:

    def test_test_and_set(self):
        bits = VisitedBitset(20)
        assert not bits.test_and_set(13)
        assert bits.test_and_set(13)
        assert 13 in bits
        assert 12 not in bits
        assert bits.count == 1


class TestPowerTable:

    def test_matches_pow(self):
        params = make_params(1009, 11)
        table = power_table(params)
        assert table.dtype == np.int64
        assert len(table) == 1009
        assert table.tolist() == [pow(11, x, 1009) for x in range(1009)]

    def test_million_scale_prime(self):
        params = make_params(1_000_003, 7)
        table = power_table(params)
        for x in (0, 1, 1000, 1001, 999_999, 1_000_002):
            assert int(table[x]) == pow(7, x, 1_000_003)

    def test_table_bytes_covers_p_entries(self):
        for p in (3, 101, 65537):
            assert table_bytes(p) >= 8 * p


class TestDecompose:
    """Test suite for permutation cycle decompositions."""

    @pytest.mark.parametrize("pair,lengths", sorted(KNOWN_DECOMPOSITIONS.items()))
    def test_known_decompositions(self, pair, lengths):
        assert decompose(make_params(*pair)).cycle_lengths == lengths

    def test_cycle_count(self):
        assert decompose(make_params(7, 3)).num_cycles == 4

    def test_non_primitive_root_raises(self):
        with pytest.raises(DomainError):
            decompose(make_params(7, 2))

    def test_pow_mode_matches_table_mode(self):
        """Test that a budget too small for the table falls back to exponentiation."""
        params = make_params(10007, find_primitive_root(10007))
        assert table_bytes(10007) > 4096
        assert decompose(params, mem_budget=4096).cycle_lengths == decompose(params).cycle_lengths

    def test_budget_below_bitset_raises(self):
        with pytest.raises(BudgetExceededError):
            decompose(make_params(10007, find_primitive_root(10007)), mem_budget=100)

    def test_matches_oracle(self):
        for p in primes_up_to(300)[1:]:
            for g in range(1, p):
                if is_primitive_root(g, p):
                    decomposition = decompose(make_params(p, g))
                    assert decomposition.cycle_lengths == naive_cycle_lengths(p, g)
                    assert sum(decomposition.cycle_lengths) == p - 1


class TestFixedPoints:
    """Test suite for fixed point counts of the iterated map."""

    def test_known_counts(self):
        assert fixed_point_count(make_params(7, 3), 1) == 3
        assert fixed_point_count(make_params(11, 2), 1) == 1
        assert fixed_point_count(make_params(11, 2), 2) == 5

    def test_pow_mode_matches_table_mode(self):
        params = make_params(1009, 11)
        for k in (1, 2, 3):
            assert fixed_point_count(params, k, mem_budget=16) == fixed_point_count(params, k)

    def test_chunked_composition(self, monkeypatch):
        params = make_params(1009, 11)
        expected = [fixed_point_count(params, k) for k in (1, 2, 3)]
        monkeypatch.setattr("core.expmap.FIXED_POINT_CHUNK", 7)
        assert [fixed_point_count(params, k) for k in (1, 2, 3)] == expected

    def test_table_mode_stays_within_budget(self, monkeypatch):
        params = make_params(1_000_003, 7)
        budget = fixed_point_bytes(params.p)
        built = []

        def spy(arg):
            built.append(arg)
            return power_table(arg)

        monkeypatch.setattr("core.expmap.power_table", spy)
        tracemalloc.start()
        try:
            fixed_point_count(params, 3, mem_budget=budget)
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        assert built == [params]
        assert peak <= budget + 2**20

    def test_counts_match_cycle_type(self):
        """Test that N(k) is the total length of the cycles whose length divides k."""
        for p in primes_up_to(300)[1:]:
            for g in range(2, p):
                if not is_primitive_root(g, p):
                    continue
                params = make_params(p, g)
                lengths = decompose(params).cycle_lengths
                for k in (1, 2, 3):
                    assert fixed_point_count(params, k) == sum(c for c in lengths if k % c == 0)

    @pytest.mark.slow
    def test_counts_match_cycle_type_up_to_10000(self):
        for p in primes_up_to(10_000)[1:]:
            params = make_params(p, find_primitive_root(p))
            lengths = decompose(params).cycle_lengths
            for k in (1, 2, 3):
                assert fixed_point_count(params, k) == sum(c for c in lengths if k % c == 0)

    def test_non_primitive_g_counts(self):
        """Test g = 1: only u = 1 is fixed."""
        assert fixed_point_count(make_params(13, 1), 1) == 1

    def test_large_k_requires_flag(self):
        params = make_params(11, 2)
        with pytest.raises(DomainError):
            fixed_point_count(params, 4)
        # 4-cycles are absent, so only the points on cycles of length 1 and 2
        assert fixed_point_count(params, 4, allow_large_k=True) == 5

    def test_k_zero_raises(self):
        with pytest.raises(DomainError):
            fixed_point_count(make_params(11, 2), 0)

    def test_bounds(self):
        assert fixed_point_bound(7) == pytest.approx(math.sqrt(14) + 0.5)
        assert n3_bound(7, 3) == pytest.approx(0.75 * 7 + (3**7 + 3 + 1) / 4)
        assert n3_bound(101, 21) is None

    def test_fixed_point_bound_small_primes(self):
        for p in primes_up_to(200)[1:]:
            bound = fixed_point_bound(p)
            for g in range(1, p):
                assert fixed_point_count(make_params(p, g), 1) <= bound

    @pytest.mark.slow
    def test_fixed_point_bound_up_to_5000(self):
        """Test the bound for every g through the per-prime maximum of the discrete-log scan."""
        for p in primes_up_to(5000)[1:]:
            assert artin_sums(p)["max_fixed"] <= fixed_point_bound(p)
