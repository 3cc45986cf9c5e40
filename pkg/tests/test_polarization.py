import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bhattacharyya_bruteforce
from securepolar.polarization import (
    ErasureProfile,
    Partition,
    PartitionConfig,
    ReliabilityProfile,
    StrongPartition,
    ZeroSecrecyError,
    bit_reversal,
    evolve_bec,
    n_additional,
    partition_block,
    read_partition_csv,
    set_labels,
    split_strong,
    stabilize_b,
    write_partition_csv,
)


def profile(z):
    z = np.asarray(z, dtype=float)
    return ReliabilityProfile(z, 1.0 - z)


def test_bit_reversal_small():
    assert bit_reversal(8).tolist() == [0, 4, 2, 6, 1, 5, 3, 7]
    assert bit_reversal(1).tolist() == [0]


class TestErasureProfile:
    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            ErasureProfile([0.1, 0.2, 0.3])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ErasureProfile([0.1, 1.2])

    def test_stationary(self):
        p = ErasureProfile.stationary(0.3, 8)
        assert p.N == 8 and p.is_stationary

    def test_immutable(self):
        p = ErasureProfile.stationary(0.3, 4)
        with pytest.raises(ValueError):
            p.eps[0] = 0.5


class TestEvolve:
    def test_single_channel(self):
        assert evolve_bec([0.5]).z.tolist() == [0.5]

    def test_pair(self):
        np.testing.assert_allclose(evolve_bec([0.5, 0.5]).z, [0.75, 0.25])

    def test_heterogeneous_pair(self):
        np.testing.assert_allclose(evolve_bec([0.4, 0.5]).z, [0.7, 0.2])

    def test_pair_matches_oracle(self):
        np.testing.assert_allclose(bhattacharyya_bruteforce([0.4, 0.5]), [0.7, 0.2])

    def test_n4_values(self):
        np.testing.assert_allclose(
            evolve_bec(ErasureProfile.stationary(0.01, 4)).z,
            [0.039403990, 0.000396010, 0.000199990, 1e-8],
            rtol=1e-6,
        )
        np.testing.assert_allclose(
            evolve_bec(ErasureProfile.stationary(0.7, 4)).z,
            [0.9919, 0.8281, 0.7399, 0.2401],
            rtol=1e-12,
        )

    @pytest.mark.parametrize("N", [2, 4, 8])
    def test_oracle_equivalence(self, N):
        rng = np.random.default_rng(N)
        for k in range(30):
            eps = rng.random(N) if k % 2 else np.full(N, rng.random())
            np.testing.assert_allclose(
                evolve_bec(eps).z, bhattacharyya_bruteforce(eps), atol=1e-12
            )

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10), st.data())
    def test_conservation(self, n, data):
        N = 2**n
        eps = np.array(data.draw(st.lists(st.floats(0, 1), min_size=N, max_size=N)))
        r = evolve_bec(eps)
        assert abs(r.z.mean() - eps.mean()) < 1e-9
        assert np.all((r.z >= 0) & (r.z <= 1))
        np.testing.assert_allclose(r.z + r.zc, 1.0, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 9), st.floats(0, 1), st.floats(0, 1))
    def test_degradation_monotone(self, n, a, b):
        lo, hi = sorted((a, b))
        za = evolve_bec(ErasureProfile.stationary(lo, 2**n)).z
        zb = evolve_bec(ErasureProfile.stationary(hi, 2**n)).z
        assert np.all(za <= zb + 1e-15)

    def test_complement_accurate_near_one(self):
        # zc keeps precision where 1 - z would round to zero
        r = evolve_bec(ErasureProfile.stationary(0.5, 2**8))
        assert r.zc.min() > 0.0
        assert np.sum(r.zc < 1e-20) > 0

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            evolve_bec([0.1, 0.2, 0.3])


class TestPartition:
    def test_delta(self):
        cfg = PartitionConfig(0.25, 2**16)
        assert cfg.delta_N == 2.0**-16
        with pytest.raises(ValueError):
            PartitionConfig(0.5, 16)
        with pytest.raises(ValueError):
            PartitionConfig(0.2, 12)

    def test_perfect_channels(self):
        N = 8
        cfg = PartitionConfig(0.25, N)
        p = partition_block(profile(np.zeros(N)), profile(np.ones(N)), cfg)
        assert p.I.all() and not (p.F | p.R | p.B).any()
        p = partition_block(profile(np.ones(N)), profile(np.ones(N)), cfg)
        assert p.F.all() and not (p.I | p.R | p.B).any()

    def test_n4_fixed_delta(self):
        main = evolve_bec(ErasureProfile.stationary(0.01, 4))
        wire = evolve_bec(ErasureProfile.stationary(0.7, 4))
        p = partition_block(main, wire, PartitionConfig(0.25, 4, delta=0.05))
        assert p.L_main.all()
        assert np.flatnonzero(p.H_wire).tolist() == [0]
        assert np.flatnonzero(p.I).tolist() == [0]
        assert np.flatnonzero(p.R).tolist() == [1, 2, 3]
        assert not p.F.any() and not p.B.any()
        # the same sets from the brute-force profiles
        pb = partition_block(
            profile(bhattacharyya_bruteforce([0.01] * 4)),
            profile(bhattacharyya_bruteforce([0.7] * 4)),
            PartitionConfig(0.25, 4, delta=0.05),
        )
        assert np.array_equal(pb.I, p.I) and np.array_equal(pb.R, p.R)

    def test_borderline_wire_not_secure(self):
        cfg = PartitionConfig(0.25, 4, delta=0.05)
        p = partition_block(profile([0, 0, 1, 1]), profile([0.5, 0.96, 0.5, 0.96]), cfg)
        assert np.flatnonzero(p.I).tolist() == [1]
        assert np.flatnonzero(p.R).tolist() == [0]
        assert np.flatnonzero(p.B).tolist() == [2]
        assert np.flatnonzero(p.F).tolist() == [3]

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 10), st.floats(0, 1), st.floats(0, 1), st.floats(0.05, 0.45))
    def test_exactness(self, n, em, ew, beta):
        N = 2**n
        p = partition_block(
            evolve_bec(ErasureProfile.stationary(em, N)),
            evolve_bec(ErasureProfile.stationary(ew, N)),
            PartitionConfig(beta, N),
        )
        stack = np.stack([p.I, p.F, p.R, p.B]).astype(int)
        assert np.all(stack.sum(axis=0) == 1)
        assert np.array_equal(p.I | p.R, p.L_main)
        assert np.array_equal(p.F | p.B, ~p.L_main)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            partition_block(profile(np.zeros(4)), profile(np.zeros(8)), PartitionConfig(0.2, 4))

    def test_masks_read_only(self):
        p = partition_block(profile(np.zeros(4)), profile(np.ones(4)), PartitionConfig(0.2, 4))
        with pytest.raises(ValueError):
            p.L_main[0] = False

    def test_degraded_B_vanishes(self):
        def frac(N):
            p = partition_block(
                evolve_bec(ErasureProfile.stationary(0.1, N)),
                evolve_bec(ErasureProfile.stationary(0.4, N)),
                PartitionConfig(0.22, N),
            )
            return p.B.sum() / N

        assert frac(2**16) < 0.01
        assert frac(2**16) <= frac(2**10)

    def test_degraded_wire_reliable_inside_main(self):
        N = 2**12
        cfg = PartitionConfig(0.25, N)
        p = partition_block(
            evolve_bec(ErasureProfile.stationary(0.1, N)),
            evolve_bec(ErasureProfile.stationary(0.4, N)),
            cfg,
        )
        assert not np.any(p.L_wire & ~p.L_main)

    def test_rate_convergence(self):
        N = 2**20
        p = partition_block(
            evolve_bec(ErasureProfile.stationary(0.1, N)),
            evolve_bec(ErasureProfile.stationary(0.4, N)),
            PartitionConfig(0.18, N),
        )
        assert abs(p.I.sum() / N - 0.3) < 0.05


def toy_partition(N, I, B, z=None):
    """A partition with the given I and B and everything else in R."""
    L = np.ones(N, dtype=bool)
    L[list(B)] = False
    H = np.zeros(N, dtype=bool)
    H[list(I)] = True
    z = np.zeros(N) if z is None else np.asarray(z, float)
    return Partition(L, np.zeros(N, bool), H, np.zeros(N, bool), main=profile(z),
                     wire=profile(np.where(H, 1.0, 0.5)))


class TestSplitStrong:
    def test_empty_B(self):
        p = toy_partition(8, I=[1, 2], B=[])
        s = split_strong(p)
        assert not s.B_prime.any() and np.array_equal(s.I_prime, p.I)

    def test_tie_break(self):
        p = toy_partition(12, I=[3, 5, 7], B=[9])
        s = split_strong(p)
        assert np.flatnonzero(s.B_prime).tolist() == [3]
        assert np.flatnonzero(s.I_prime).tolist() == [5, 7]

    def test_smallest_z(self):
        z = np.zeros(12)
        z[[3, 5, 7]] = [0.3, 0.1, 0.2]
        s = split_strong(toy_partition(12, I=[3, 5, 7], B=[9, 10], z=z))
        assert np.flatnonzero(s.B_prime).tolist() == [5, 7]

    def test_zero_capacity(self):
        with pytest.raises(ZeroSecrecyError):
            split_strong(toy_partition(8, I=[0, 1], B=[4, 5]))

    def test_delegation(self):
        s = split_strong(toy_partition(8, I=[1, 2], B=[5]))
        assert isinstance(s, StrongPartition)
        assert s.N == 8 and s.B.sum() == 1 and s.B_prime.sum() == 1


class TestStabilize:
    def test_n_additional(self):
        assert n_additional(0.05, 64) == 4
        assert n_additional(0.05, 4096) == 205
        assert n_additional(0.0, 4096) == 0

    def test_zero_rate_unchanged(self):
        N = 2**10
        main = evolve_bec(ErasureProfile.stationary(0.1, N))
        cfg = PartitionConfig(0.25, N)
        parts = [partition_block(main, evolve_bec(ErasureProfile.stationary(e, N)), cfg)
                 for e in (0.4, 0.5)]
        out = stabilize_b(parts, 0.0)
        for p, s in zip(parts, out):
            assert np.array_equal(s.B, p.B) and np.array_equal(s.L_main, p.L_main)

    def test_lowest_common_R(self):
        N = 64
        base = np.zeros(N, dtype=bool)
        parts = []
        for extra in ([1, 3], [2, 3], [1, 2]):
            R = base.copy()
            R[[4, 6, 8, 10, 12] + extra] = True
            H = ~R
            parts.append(Partition(np.ones(N, bool), base, H, base,
                                   main=profile(np.zeros(N)), wire=profile(np.where(H, 1.0, 0.5))))
        out = stabilize_b(parts, 0.05)
        assert np.flatnonzero(out[0].B_add).tolist() == [4, 6, 8, 10]
        for s in out:
            assert np.flatnonzero(s.B).tolist() == [4, 6, 8, 10]
            assert not np.any(s.L_main[[4, 6, 8, 10]])
            assert s.B_prime.sum() == 4

    def test_too_small(self):
        N = 64
        R = np.zeros(N, bool)
        R[:2] = True
        p = Partition(np.ones(N, bool), np.zeros(N, bool), ~R, np.zeros(N, bool),
                      main=profile(np.zeros(N)))
        with pytest.raises(ValueError):
            stabilize_b([p], 0.05)

    def test_reference_setup_size(self):
        from securepolar.channels import UncertaintySet

        N = 2**12
        uset = UncertaintySet((0.4, 0.5), 0.1, mixed_blocks=1)
        main = evolve_bec(uset.main_profile(N))
        cfg = PartitionConfig(0.25, N)
        parts = [partition_block(main, evolve_bec(p), cfg) for p in uset.block_menu(N)]
        out = stabilize_b(parts, 0.05)
        B_add = out[0].B_add
        assert B_add.sum() == 205
        for p, s in zip(parts, out):
            assert not np.any(B_add & ~p.R)
            assert np.array_equal(s.B, p.B | B_add)
            assert np.array_equal(s.R, p.R & ~B_add)
            assert np.array_equal(s.B_prime | s.I_prime, s.I)
            assert s.B_prime.sum() == s.B.sum()


def test_csv_round_trip(tmp_path):
    N = 16
    p = partition_block(
        evolve_bec(ErasureProfile.stationary(0.1, N)),
        evolve_bec(ErasureProfile.stationary(0.5, N)),
        PartitionConfig(0.3, N),
    )
    path = tmp_path / "p.csv"
    write_partition_csv(path, p)
    back = read_partition_csv(path)
    assert back["index"].tolist() == list(range(N))
    np.testing.assert_array_equal(back["z_main"], p.main.z)
    np.testing.assert_array_equal(back["z_wire"], p.wire.z)
    assert back["set_label"].tolist() == set_labels(p).tolist()
    assert set(back["set_label"]) <= {"I", "F", "R", "B"}


def test_labels_strong():
    s = split_strong(toy_partition(12, I=[3, 5, 7], B=[9]))
    labels = set_labels(s)
    assert labels[3] == "Bprime" and labels[5] == "Iprime" and labels[9] == "B"


def test_delta_never_underflows():
    # largest configured grid: N = 2^24, beta = 0.30
    assert PartitionConfig(0.30, 2**24).delta_N > 0.0
    assert math.log2(PartitionConfig(0.30, 2**24).delta_N) >= -150
