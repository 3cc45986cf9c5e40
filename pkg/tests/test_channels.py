import numpy as np
import pytest

from securepolar.channels import (
    AdversaryPolicy,
    CSIDelayError,
    DelayedCSI,
    PolicyKind,
    SequenceExhausted,
    StateKind,
    UncertaintySet,
    WiretapState,
    reveal_csi,
    sample_state,
    sweep_size,
    transmit,
)
from securepolar.codec import ERASED

USET = UncertaintySet((0.4, 0.5), 0.1)


class TestTransmit:
    def test_no_erasures(self):
        x = np.random.default_rng(0).integers(0, 2, 64, dtype=np.uint8)
        assert np.array_equal(transmit(x, np.zeros(64), 1), x)

    def test_all_erased(self):
        assert np.all(transmit(np.zeros(64, np.uint8), np.ones(64), 1) == ERASED)

    def test_erasure_fraction(self):
        N = 2**14
        y = transmit(np.zeros(N, np.uint8), np.full(N, 0.3), 7)
        assert abs(np.mean(y == ERASED) - 0.3) <= 0.012

    def test_non_stationary_profile(self):
        N = 2**14
        eps = np.where(np.arange(N) % 2 == 0, 0.1, 0.9)
        erased = transmit(np.zeros(N, np.uint8), eps, 3) == ERASED
        assert abs(erased[::2].mean() - 0.1) < 0.02
        assert abs(erased[1::2].mean() - 0.9) < 0.02

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            transmit(np.zeros(8, np.uint8), np.zeros(4), 0)

    def test_memoryless(self):
        # 2x2 contingency of neighbouring erasure events; chi-square with 1 dof
        N = 2**16
        e = transmit(np.zeros(N, np.uint8), np.full(N, 0.3), 12) == ERASED
        a, b = e[:-1:2], e[1::2]
        table = np.array([[np.sum(a & b), np.sum(a & ~b)], [np.sum(~a & b), np.sum(~a & ~b)]])
        expected = np.outer(table.sum(1), table.sum(0)) / table.sum()
        chi2 = ((table - expected) ** 2 / expected).sum()
        assert chi2 < 10.83  # p = 0.001


class TestUncertaintySet:
    def test_empty(self):
        with pytest.raises(ValueError, match="states"):
            UncertaintySet((), 0.1)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            UncertaintySet((0.4, 1.5), 0.1)

    def test_menu(self):
        u = UncertaintySet((0.4, 0.5), 0.1, mixed_blocks=1, menu_seed=3)
        menu = u.block_menu(256)
        assert len(menu) == 3 == u.n_choices(StateKind.BLOCK)
        assert menu[0].is_stationary and menu[1].is_stationary
        assert set(np.unique(menu[2].eps)) == {0.4, 0.5}
        assert np.array_equal(menu[2].eps, u.block_menu(256)[2].eps)


class TestSampleState:
    def test_fixed_sequence(self):
        pol = AdversaryPolicy(PolicyKind.FIXED_SEQUENCE, sequence=(0, 1, 0))
        assert sample_state(pol, USET, 2, StateKind.BLOCK).block_state == 0
        assert sample_state(pol, USET, 1, StateKind.BLOCK).block_state == 1

    def test_fixed_sequence_exhausted(self):
        pol = AdversaryPolicy(PolicyKind.FIXED_SEQUENCE, sequence=(0, 1, 0))
        with pytest.raises(SequenceExhausted):
            sample_state(pol, USET, 3, StateKind.BLOCK)

    def test_fixed_sequence_arbitrary(self):
        seq = (0, 1, 1, 0, 1, 1, 1, 1)
        pol = AdversaryPolicy(PolicyKind.FIXED_SEQUENCE, sequence=seq)
        s = sample_state(pol, USET, 1, StateKind.ARBITRARY, 4)
        assert s.symbol_states.tolist() == [1, 1, 1, 1]

    def test_uniform_frequencies(self):
        pol = AdversaryPolicy(PolicyKind.UNIFORM_IID, seed=1)
        draws = np.array(
            [sample_state(pol, USET, t, StateKind.BLOCK).block_state for t in range(10**5)]
        )
        assert abs(np.mean(draws == 0) - 0.5) <= 0.005

    def test_arbitrary_mean(self):
        N = 2**12
        pol = AdversaryPolicy(PolicyKind.UNIFORM_IID, seed=2)
        s = sample_state(pol, USET, 0, StateKind.ARBITRARY, N)
        mean = s.profile(USET, N).eps.mean()
        assert abs(mean - 0.45) <= 3 * 0.05 / np.sqrt(N)

    def test_draw_keyed_by_block(self):
        pol = AdversaryPolicy(PolicyKind.UNIFORM_IID, seed=4)
        a = [sample_state(pol, USET, t, StateKind.BLOCK).block_state for t in range(20)]
        b = sample_state(pol, USET, 13, StateKind.BLOCK).block_state
        assert a[13] == b

    def test_sweep_enumerates_everything(self):
        T = 2
        n = sweep_size(USET, StateKind.BLOCK, T)
        assert n == 8
        seqs = {
            tuple(
                sample_state(AdversaryPolicy(PolicyKind.WORST_CASE_SWEEP, sweep_index=i),
                             USET, t, StateKind.BLOCK).block_state
                for t in range(T + 1)
            )
            for i in range(n)
        }
        assert len(seqs) == 8

    def test_for_trial(self):
        pol = AdversaryPolicy(PolicyKind.UNIFORM_IID, seed=4)
        assert pol.for_trial(0).seed != pol.for_trial(1).seed
        assert pol.for_trial(1) == pol.for_trial(1)
        sweep = AdversaryPolicy(PolicyKind.WORST_CASE_SWEEP, sweep_index=2)
        assert sweep.for_trial(3).sweep_index == 5


class TestDelayedCSI:
    def test_premature_reveal(self):
        h = DelayedCSI()
        h.commit(0, WiretapState(StateKind.BLOCK, block_state=1))
        with pytest.raises(CSIDelayError):
            reveal_csi(0, h)
        assert h.premature_accesses == 1

    def test_reveal_after_completion(self):
        h = DelayedCSI()
        s = WiretapState(StateKind.BLOCK, block_state=1)
        h.commit(0, s)
        h.complete(0)
        assert reveal_csi(0, h) is s
        assert h.access_log[-1].granted and h.premature_accesses == 0

    def test_double_commit(self):
        h = DelayedCSI()
        h.commit(0, WiretapState(StateKind.BLOCK, block_state=0))
        with pytest.raises(ValueError):
            h.commit(0, WiretapState(StateKind.BLOCK, block_state=0))

    def test_unknown_block(self):
        with pytest.raises(CSIDelayError):
            DelayedCSI().reveal(5)
