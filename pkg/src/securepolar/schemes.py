"""Multi-block secure polar coding over a wiretap channel with delayed CSI.

Two chained schemes share one skeleton:

* ``WEAK``: the secure-and-reliable bits ``u^{I_t}`` of block ``t`` pad the
  message of block ``t+1``; the unreliable set carries public zeros.
* ``STRONG``: ``I_t`` is split into ``I'_t`` (pad) and ``B'_t``; the bits of
  ``F_t`` and ``B'_t`` are re-sent on the next block's unreliable set, so that
  set never carries values Eve knows in advance.  Block 0's unreliable set is a
  pre-shared secret.

Runs are vectorised over independent trials.  Every random draw is keyed by
``(seed, stream, trial, block)``, so a trial's transcript does not depend on
which other trials share its batch.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import (
    AdversaryPolicy,
    DelayedCSI,
    StateKind,
    UncertaintySet,
    WiretapState,
    reveal_csi,
    sample_state,
    transmit,
)
from .codec import FrozenMap, encode, sc_decode
from .polarization import (
    ErasureProfile,
    Partition,
    PartitionConfig,
    ReliabilityProfile,
    StrongPartition,
    evolve_bec,
    is_power_of_two,
    partition_block,
    split_strong,
    stabilize_b,
)

log = logging.getLogger(__name__)


class SchemeKind(enum.Enum):
    WEAK = "weak"
    STRONG = "strong"


# stream ids, see module docstring
STREAM_MESSAGE = 10
STREAM_ALICE = 11
STREAM_PRESHARED = 12
STREAM_MAIN = 13
STREAM_WIRE = 14
STREAM_BOB = 15
STREAM_EVE = 16


@dataclass(frozen=True)
class SchemeConfig:
    N: int
    T: int
    beta: float
    uset: UncertaintySet
    scheme: SchemeKind = SchemeKind.WEAK
    kind: StateKind = StateKind.BLOCK
    policy: AdversaryPolicy = field(default_factory=AdversaryPolicy)
    seed: int = 0
    r_add: float = 0.0
    payload: bytes | None = None

    def __post_init__(self):
        if not is_power_of_two(self.N):
            raise ValueError(f"N: must be a power of two, got {self.N}")
        if self.T < 1:
            raise ValueError(f"T: must be at least 1, got {self.T}")
        if not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta: must lie in (0, 1/2), got {self.beta}")
        if not 0.0 <= self.r_add < 1.0:
            raise ValueError(f"r_add: must lie in [0, 1), got {self.r_add}")
        if self.r_add > 0 and self.scheme is SchemeKind.WEAK:
            raise ValueError("r_add: only meaningful for the strong scheme")
        if self.r_add > 0 and self.kind is StateKind.ARBITRARY:
            raise ValueError("r_add: stabilization needs a finite block menu (kind=block)")

    @property
    def partition_config(self) -> PartitionConfig:
        return PartitionConfig(self.beta, self.N)


class Construction:
    """Code construction shared by Alice, Bob and Eve for one ``(N, beta)``.

    The main-channel sets are fixed.  Wiretap partitions for the block menu
    are prepared up front (they depend on the uncertainty set, not on which
    state Eve picks); a run looks one up only after the state is disclosed.
    """

    def __init__(
        self,
        N: int,
        beta: float,
        uset: UncertaintySet,
        scheme: SchemeKind = SchemeKind.WEAK,
        kind: StateKind = StateKind.BLOCK,
        r_add: float = 0.0,
        profiles: tuple[ReliabilityProfile, Sequence[ReliabilityProfile]] | None = None,
    ):
        """``profiles`` optionally supplies the evolved main profile and the
        evolved block-menu profiles, which do not depend on ``beta``."""
        self.pcfg = PartitionConfig(beta, N)
        self.uset = uset
        self.scheme = scheme
        self.kind = kind
        self.r_add = r_add
        if profiles is None:
            self.main: ReliabilityProfile = evolve_bec(uset.main_profile(N))
        else:
            self.main = profiles[0]
        self.menu: list[ErasureProfile] | None = None
        self.menu_partitions: list[Partition | StrongPartition] | None = None
        reliable = self.main.z <= self.pcfg.delta_N
        if kind is StateKind.BLOCK:
            self.menu = uset.block_menu(N)
            wires = profiles[1] if profiles is not None else [evolve_bec(p) for p in self.menu]
            if len(wires) != len(self.menu):
                raise ValueError("need one evolved profile per block type")
            parts = [
                partition_block(self.main, w, self.pcfg, state_tag=f"block{j}")
                for j, w in enumerate(wires)
            ]
            if scheme is SchemeKind.STRONG:
                parts = stabilize_b(parts, r_add)
                reliable = parts[0].L_main
            self.menu_partitions = parts
        self.reliable = reliable
        self.reliable.setflags(write=False)

    @property
    def N(self) -> int:
        return self.pcfg.N

    @property
    def delta_N(self) -> float:
        return self.pcfg.delta_N

    def wire_profile(self, state: WiretapState) -> ErasureProfile:
        return state.profile(self.uset, self.N, self.menu)

    def partition_for(self, state: WiretapState) -> Partition | StrongPartition:
        if state.kind is StateKind.BLOCK:
            return self.menu_partitions[state.block_state]
        p = partition_block(
            self.main, evolve_bec(self.wire_profile(state)), self.pcfg, state.tag
        )
        if self.scheme is SchemeKind.STRONG:
            return split_strong(p)
        return p

    def key_set(self, p) -> np.ndarray:
        return p.I_prime if self.scheme is SchemeKind.STRONG else p.I


@dataclass(eq=False)
class BlockTranscript:
    """Everything that happened in one block of one trial.

    ``partition`` is this block's own (later disclosed) partition;
    ``used_partition`` is the previous block's, which shaped the encoding.
    """

    t: int
    trial: int
    state: WiretapState
    partition: Partition | StrongPartition
    used_partition: Partition | StrongPartition | None
    partition_source: int | None
    u: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    u_hat: np.ndarray
    bob_guessed: np.ndarray
    message: np.ndarray | None = None
    ciphertext: np.ndarray | None = None
    decrypted: np.ndarray | None = None
    carry_sent: np.ndarray | None = None
    carry_used: np.ndarray | None = None
    eve_u_hat: np.ndarray | None = None
    eve_guessed: np.ndarray | None = None
    eve_message: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.u.size


@dataclass
class ChainState:
    """What one party carries from block ``t-1`` into block ``t``."""

    t: int
    key_stream: np.ndarray
    carry_bits: np.ndarray | None = None
    preshared_seed: np.ndarray | None = None


def otp(m, k) -> np.ndarray:
    """One-time pad: elementwise XOR of equal-length bit vectors."""
    m = np.asarray(m, dtype=np.uint8)
    k = np.asarray(k, dtype=np.uint8)
    if m.shape != k.shape:
        raise ValueError(f"message length {m.shape} != key length {k.shape}")
    return m ^ k


def _rng(seed: int, stream: int, trial: int, t: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream, trial, t])


def _bits_from_bytes(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")


def recover_payload(transcripts: Sequence[BlockTranscript], nbytes: int) -> bytes:
    """Reassemble a file payload from Bob's decrypted messages."""
    bits = [tr.decrypted for tr in transcripts if tr.decrypted is not None]
    flat = np.concatenate(bits) if bits else np.zeros(0, dtype=np.uint8)
    flat = flat[: nbytes * 8]
    if flat.size < nbytes * 8:
        raise ValueError("transcripts carry fewer bits than requested")
    return np.packbits(flat, bitorder="little").tobytes()


def carry_bits(bits: np.ndarray, p: StrongPartition) -> np.ndarray:
    """Bits of ``F`` (ascending) followed by bits of ``B'`` (ascending)."""
    return np.concatenate([bits[p.F], bits[p.B_prime]])


def run_trials(
    cfg: SchemeConfig,
    trials: Sequence[int] | int = 1,
    construction: Construction | None = None,
) -> tuple[list[list[BlockTranscript]], list[DelayedCSI]]:
    """Run ``T + 1`` chained blocks for each trial; return transcripts and CSI logs."""
    if isinstance(trials, int):
        trials = list(range(trials))
    trials = list(trials)
    cons = construction or Construction(
        cfg.N, cfg.beta, cfg.uset, cfg.scheme, cfg.kind, cfg.r_add
    )
    strong = cfg.scheme is SchemeKind.STRONG
    N, B = cfg.N, len(trials)
    reliable = cons.reliable
    unreliable = ~reliable
    n_unrel = int(unreliable.sum())
    main_eps = cfg.uset.main_profile(N)

    csi = [DelayedCSI() for _ in trials]
    policies = [cfg.policy.for_trial(k) for k in trials]
    runs: list[list[BlockTranscript]] = [[] for _ in trials]
    payload_bits = _bits_from_bytes(cfg.payload) if cfg.payload is not None else None
    payload_pos = [0] * B

    alice: list[ChainState | None] = [None] * B
    bob: list[ChainState | None] = [None] * B
    prev_part: list[Partition | StrongPartition | None] = [None] * B

    for t in range(cfg.T + 1):
        states = []
        for b, k in enumerate(trials):
            s = sample_state(policies[b], cfg.uset, t, cfg.kind, N)
            csi[b].commit(t, s)
            states.append(s)

        u = np.zeros((B, N), dtype=np.uint8)
        bob_frozen_vals = np.zeros((B, N), dtype=np.uint8)
        messages, ciphertexts, carries = [None] * B, [None] * B, [None] * B
        for b, k in enumerate(trials):
            fresh = _rng(cfg.seed, STREAM_ALICE, k, t).integers(0, 2, N, dtype=np.uint8)
            u[b, reliable] = fresh[reliable]
            if t == 0:
                if strong:
                    pre = _rng(cfg.seed, STREAM_PRESHARED, k, 0).integers(
                        0, 2, n_unrel, dtype=np.uint8
                    )
                    u[b, unreliable] = pre
                    bob_frozen_vals[b, unreliable] = pre
                    alice[b] = ChainState(0, np.zeros(0, np.uint8), preshared_seed=pre)
                    bob[b] = ChainState(0, np.zeros(0, np.uint8), preshared_seed=pre)
                continue
            p = prev_part[b]
            key_pos = cons.key_set(p)
            n_msg = int(key_pos.sum())
            if n_msg == 0:
                log.info("trial %d block %d: empty key set, no message", k, t)
            if payload_bits is not None:
                chunk = payload_bits[payload_pos[b]:payload_pos[b] + n_msg]
                payload_pos[b] += chunk.size
                m = np.zeros(n_msg, dtype=np.uint8)
                m[: chunk.size] = chunk
            else:
                m = _rng(cfg.seed, STREAM_MESSAGE, k, t).integers(0, 2, n_msg, dtype=np.uint8)
            e = otp(m, alice[b].key_stream)
            u[b, key_pos] = e
            messages[b], ciphertexts[b] = m, e
            if strong:
                carry = alice[b].carry_bits
                if carry.size != n_unrel:
                    raise AssertionError("carried bits do not fill the unreliable set")
                u[b, unreliable] = carry
                bob_frozen_vals[b, unreliable] = bob[b].carry_bits
                carries[b] = carry

        x = encode(u)
        y = transmit(x, main_eps, [_rng(cfg.seed, STREAM_MAIN, k, t) for k in trials])
        wire_eps = np.stack([cons.wire_profile(s).eps for s in states])
        z = transmit(x, wire_eps, [_rng(cfg.seed, STREAM_WIRE, k, t) for k in trials])
        u_hat, guessed = sc_decode(
            y,
            FrozenMap(unreliable, bob_frozen_vals),
            [_rng(cfg.seed, STREAM_BOB, k, t) for k in trials],
            return_guessed=True,
        )

        for b, k in enumerate(trials):
            decrypted = None
            if t > 0:
                key_pos = cons.key_set(prev_part[b])
                decrypted = otp(u_hat[b, key_pos], bob[b].key_stream)
            csi[b].complete(t)
            part = cons.partition_for(reveal_csi(t, csi[b]))
            key_pos = cons.key_set(part)
            if strong:
                alice[b] = ChainState(t + 1, u[b, key_pos], carry_bits(u[b], part))
                bob[b] = ChainState(t + 1, u_hat[b, key_pos], carry_bits(u_hat[b], part))
            else:
                alice[b] = ChainState(t + 1, u[b, key_pos])
                bob[b] = ChainState(t + 1, u_hat[b, key_pos])
            runs[b].append(
                BlockTranscript(
                    t=t,
                    trial=k,
                    state=states[b],
                    partition=part,
                    used_partition=prev_part[b],
                    partition_source=t - 1 if t > 0 else None,
                    u=u[b],
                    x=x[b],
                    y=y[b],
                    z=z[b],
                    u_hat=u_hat[b],
                    bob_guessed=guessed[b],
                    message=messages[b],
                    ciphertext=ciphertexts[b],
                    decrypted=decrypted,
                    carry_sent=carries[b],
                    carry_used=bob_frozen_vals[b, unreliable] if strong and t > 0 else None,
                )
            )
            prev_part[b] = part
    return runs, csi


def weak_run(cfg: SchemeConfig, trial: int = 0) -> list[BlockTranscript]:
    """One trial of the OTP-chain scheme (``cfg.scheme`` must be ``WEAK``)."""
    if cfg.scheme is not SchemeKind.WEAK:
        raise ValueError("weak_run needs scheme=WEAK")
    return run_trials(cfg, [trial])[0][0]


def strong_run(cfg: SchemeConfig, trial: int = 0) -> list[BlockTranscript]:
    """One trial of the modified multi-block chaining scheme."""
    if cfg.scheme is not SchemeKind.STRONG:
        raise ValueError("strong_run needs scheme=STRONG")
    return run_trials(cfg, [trial])[0][0]


def eve_attack(
    runs: Sequence[Sequence[BlockTranscript]],
    scheme: SchemeKind,
    seed: int = 0,
) -> np.ndarray:
    """Genie-aided SC attack; returns Eve's bit error rate per message block.

    Eve knows the construction and every block's partition.  Against the
    weak scheme she also knows the public zeros on the unreliable set.
    Against the strong scheme she freezes an unreliable position of block
    ``t`` only when her own decode of block ``t-1`` resolved the bit carried
    there; everything else is decoded from her received word, with erased
    decisions filled at random.  Her estimates are written into the
    transcripts.

    Returns
    -------
    ndarray, shape (T,)
        Pooled error rate over trials for blocks ``1..T``.
    """
    runs = [list(r) for r in runs]
    if not runs:
        return np.zeros(0)
    T = len(runs[0]) - 1
    N = runs[0][0].N
    B = len(runs)
    strong = scheme is SchemeKind.STRONG
    prev_est = [None] * B
    prev_res = [None] * B
    errors = np.zeros(T)
    counts = np.zeros(T)
    for t in range(T + 1):
        blocks = [r[t] for r in runs]
        z = np.stack([tr.z for tr in blocks])
        unreliable = np.stack([~tr.partition.L_main for tr in blocks])
        mask = np.zeros((B, N), dtype=bool)
        vals = np.zeros((B, N), dtype=np.uint8)
        if not strong:
            mask = unreliable
        elif t > 0:
            for b, tr in enumerate(blocks):
                pp = tr.used_partition
                est = carry_bits(prev_est[b], pp)
                res = carry_bits(prev_res[b], pp).astype(bool)
                pos = np.flatnonzero(unreliable[b])
                mask[b, pos[res]] = True
                vals[b, pos] = est
        est, guessed = sc_decode(
            z,
            FrozenMap(mask, vals),
            [_rng(seed, STREAM_EVE, tr.trial, t) for tr in blocks],
            return_guessed=True,
        )
        for b, tr in enumerate(blocks):
            tr.eve_u_hat = est[b]
            tr.eve_guessed = guessed[b]
            if t > 0:
                key_pos = tr.used_partition.I_prime if strong else tr.used_partition.I
                tr.eve_message = est[b, key_pos] ^ prev_est[b][key_pos]
                errors[t - 1] += np.count_nonzero(tr.eve_message != tr.message)
                counts[t - 1] += tr.message.size
            prev_est[b] = est[b]
            prev_res[b] = ~guessed[b]
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, errors / np.maximum(counts, 1), np.nan)
