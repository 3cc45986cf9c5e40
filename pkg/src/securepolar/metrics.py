"""Finite-N reliability, leakage and secrecy-rate bounds, and experimental BER.

The bound functions take the per-block partitions of blocks ``0..T`` (a list
of length ``T + 1``).  Long runs repeat a handful of partition objects, so
per-partition sums are memoised by object identity within a call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .polarization import Partition, ReliabilityProfile, StrongPartition
from .schemes import BlockTranscript, SchemeKind


def binary_entropy(p: float) -> float:
    """``h(p)`` in bits, with ``h(0) = h(1) = 0``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


class _Memo(dict):
    """Cache keyed by ``id`` of partitions that stay alive for the whole call."""

    def get_or(self, obj, fn):
        key = id(obj)
        if key not in self:
            self[key] = fn(obj)
        return self[key]


def _z_sum(z_main: ReliabilityProfile, mask: np.ndarray) -> float:
    return float(z_main.z[mask].sum())


def pe_bound(
    partitions: Sequence[Partition | StrongPartition],
    z_main: ReliabilityProfile,
    scheme: SchemeKind,
) -> float:
    """Union bound on Bob's chained decoding error over ``T + 1`` blocks.

    Weak: each ``I_t`` (``t < T``) is decoded twice, once carrying the key and
    once carrying the next ciphertext.  Strong: the same with ``I'_t``, plus
    the ``B'_t`` bits that feed the next block's unreliable set.
    """
    T = len(partitions) - 1
    memo = _Memo()
    total = 0.0
    for p in partitions[:T]:
        if scheme is SchemeKind.STRONG:
            total += memo.get_or(
                p, lambda q: 2 * _z_sum(z_main, q.I_prime) + _z_sum(z_main, q.B_prime)
            )
        else:
            total += memo.get_or(p, lambda q: 2 * _z_sum(z_main, q.I))
    return total


def decoded_set_error_bound(z_main: ReliabilityProfile, info: np.ndarray) -> float:
    """SC block error bound ``sum of Z`` over an information set."""
    return _z_sum(z_main, np.asarray(info, dtype=bool))


def message_ber_bound(z_main: ReliabilityProfile, reliable: np.ndarray) -> float:
    """Per-bit bound on Bob's message error rate.

    A decrypted bit is wrong only if block ``t`` or block ``t-1`` was decoded
    with an error somewhere in the reliable set, each bounded by the sum of Z
    over that set.
    """
    return min(1.0, 2.0 * decoded_set_error_bound(z_main, reliable))


def leakage_bound_weak(p: Partition, delta_N: float) -> float:
    """Per-block leakage bound ``|B| + h(delta_N) + |R| delta_N`` of the weak scheme."""
    return int(p.B.sum()) + binary_entropy(delta_N) + int(p.R.sum()) * delta_N


def leakage_bound_weak_total(partitions: Sequence[Partition], delta_N: float) -> float:
    """Sum of the per-block bound over the key-carrying blocks ``0..T-1``."""
    memo = _Memo()
    return sum(
        memo.get_or(p, lambda q: leakage_bound_weak(q, delta_N)) for p in partitions[:-1]
    )


def _strong_block_leakage(p: StrongPartition, wire: ReliabilityProfile) -> float:
    counted = p.I_prime | p.B_prime | p.F
    if np.any(counted & ~p.H_wire):
        raise ValueError(
            f"state {p.state_tag!r}: I' + B' + F is not inside the wiretap high-entropy set"
        )
    c = wire.zc[counted]
    # 1 - z^2 = (1 - z)(1 + z), exact when z is within machine epsilon of 1
    return float((c * (2.0 - c)).sum())


def leakage_bound_strong(
    partitions: Sequence[StrongPartition],
    wire_profiles: Sequence[ReliabilityProfile] | None = None,
) -> float:
    """Total leakage bound ``sum_t sum_{I' + B' + F} (1 - Z_wire^2)`` over blocks ``0..T``."""
    if wire_profiles is None:
        wire_profiles = [p.wire for p in partitions]
    if len(wire_profiles) != len(partitions):
        raise ValueError("need one wiretap profile per block")
    memo = _Memo()
    total = 0.0
    for p, w in zip(partitions, wire_profiles):
        if w is p.wire:
            total += memo.get_or(p, lambda q: _strong_block_leakage(q, q.wire))
        else:
            total += _strong_block_leakage(p, w)
    return total


def secrecy_rate(
    partitions: Sequence[Partition | StrongPartition],
    scheme: SchemeKind,
    N: int,
    T: int | None = None,
) -> float:
    """Message bits per channel use over ``T + 1`` blocks.

    Block ``t`` carries ``|I_{t-1}|`` (weak) or ``|I'_{t-1}|`` (strong) message bits.
    """
    T = len(partitions) - 1 if T is None else T
    if len(partitions) < T + 1:
        raise ValueError(f"need partitions for blocks 0..{T}")
    memo = _Memo()
    attr = "I_prime" if scheme is SchemeKind.STRONG else "I"
    bits = sum(memo.get_or(p, lambda q: int(getattr(q, attr).sum())) for p in partitions[:T])
    return bits / (N * (T + 1))


def bec_secrecy_capacity(main_eps: float, wire_eps: float) -> float:
    """Secrecy capacity of a BEC wiretap pair: ``max(0, eps_wire - eps_main)``."""
    return max(0.0, wire_eps - main_eps)


def average_secrecy_capacity(main_eps: float, wire_profile) -> float:
    """Per-use perfect-CSI capacity of a (possibly non-stationary) wiretap block."""
    eps = np.asarray(getattr(wire_profile, "eps", wire_profile), dtype=float)
    return float(np.mean(np.maximum(0.0, eps - main_eps)))


@dataclass(frozen=True)
class RateComparison:
    """Chaining on the whole unreliable set versus on ``B'`` only, for one state."""

    capacity: float
    rate_F: float
    naive_rate: float
    modified_rate: float


def rate_sacrifice(p: Partition) -> RateComparison:
    """Compare chaining over all of ``L_main^c`` with the ``B'`` split.

    Reserving ``|L_main^c| = |F| + |B|`` bits of ``I`` leaves
    ``|I| - |F| - |B|``; reserving only ``|B|`` leaves ``|I| - |B|``.  The
    first falls short of the second by the rate of ``F``.
    """
    N = p.N
    nI, nF, nB, nR = (int(getattr(p, k).sum()) for k in ("I", "F", "B", "R"))
    # finite-N stand-in for I(U;Y) - I(U;Z): |I u R| - |B u R|
    capacity = (nI + nR - (nB + nR)) / N
    return RateComparison(
        capacity=capacity,
        rate_F=nF / N,
        naive_rate=max(0, nI - nF - nB) / N,
        modified_rate=max(0, nI - nB) / N,
    )


@dataclass(frozen=True)
class BoundReport:
    N: int
    T: int
    beta: float
    pe_upper: float
    leakage_upper: float
    leakage_rate_upper: float
    secrecy_rate: float

    def __post_init__(self):
        for name in ("pe_upper", "leakage_upper", "leakage_rate_upper", "secrecy_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class BlockTerms:
    """One block's contributions to the multi-block bounds."""

    pe: float
    leakage: float
    key_bits: int


def block_terms(
    p: Partition | StrongPartition,
    z_main: ReliabilityProfile,
    scheme: SchemeKind,
    delta_N: float,
) -> BlockTerms:
    if scheme is SchemeKind.STRONG:
        return BlockTerms(
            pe=2 * _z_sum(z_main, p.I_prime) + _z_sum(z_main, p.B_prime),
            leakage=_strong_block_leakage(p, p.wire),
            key_bits=int(p.I_prime.sum()),
        )
    return BlockTerms(
        pe=2 * _z_sum(z_main, p.I),
        leakage=leakage_bound_weak(p, delta_N),
        key_bits=int(p.I.sum()),
    )


def bound_report_from_terms(
    terms: Sequence[BlockTerms], scheme: SchemeKind, N: int, beta: float
) -> BoundReport:
    """Aggregate per-block terms of blocks ``0..T`` like the list-based bounds do.

    Key material and its ciphertext use blocks ``0..T-1``; the strong-scheme
    leakage also counts block ``T``.
    """
    T = len(terms) - 1
    head = terms[:T]
    if scheme is SchemeKind.STRONG:
        leak = sum(t.leakage for t in terms)
    else:
        leak = sum(t.leakage for t in head)
    return BoundReport(
        N=N,
        T=T,
        beta=beta,
        pe_upper=sum(t.pe for t in head),
        leakage_upper=leak,
        leakage_rate_upper=leak / (N * (T + 1)),
        secrecy_rate=sum(t.key_bits for t in head) / (N * (T + 1)),
    )


def bound_report(
    partitions: Sequence[Partition | StrongPartition],
    z_main: ReliabilityProfile,
    scheme: SchemeKind,
    N: int,
    beta: float,
    delta_N: float,
) -> BoundReport:
    """All bounds for one run of ``T + 1`` blocks."""
    memo = _Memo()
    terms = [
        memo.get_or(p, lambda q: block_terms(q, z_main, scheme, delta_N)) for p in partitions
    ]
    return bound_report_from_terms(terms, scheme, N, beta)


def worst_case(reports: Sequence[BoundReport]) -> dict[str, float]:
    """Maximum of each criterion over enumerated state realizations.

    The secrecy rate is reported as its minimum, the achievable rate that
    holds for every realization.
    """
    if not reports:
        raise ValueError("no reports to aggregate")
    return {
        "pe_upper": max(r.pe_upper for r in reports),
        "leakage_upper": max(r.leakage_upper for r in reports),
        "leakage_rate_upper": max(r.leakage_rate_upper for r in reports),
        "secrecy_rate": min(r.secrecy_rate for r in reports),
    }


@dataclass(frozen=True)
class BerResult:
    per_block: np.ndarray
    errors: np.ndarray
    bits: np.ndarray

    @property
    def pooled(self) -> float:
        total = self.bits.sum()
        return float(self.errors.sum() / total) if total else float("nan")

    @property
    def standard_error(self) -> float:
        p, n = self.pooled, self.bits.sum()
        return math.sqrt(p * (1 - p) / n) if n else float("nan")


def experimental_ber(
    runs: Sequence[Sequence[BlockTranscript]] | Sequence[BlockTranscript],
    party: str = "bob",
) -> BerResult:
    """Hamming error fraction of Bob's (``"bob"``) or Eve's (``"eve"``) message estimates.

    Accepts one run or a list of runs; blocks without a message are skipped.
    """
    if party not in ("bob", "eve"):
        raise ValueError(f"party must be 'bob' or 'eve', got {party!r}")
    if runs and isinstance(runs[0], BlockTranscript):
        runs = [runs]
    T = max(len(r) for r in runs) - 1
    errors = np.zeros(T)
    bits = np.zeros(T)
    for r in runs:
        for tr in r[1:]:
            est = tr.decrypted if party == "bob" else tr.eve_message
            if est is None:
                raise ValueError(f"block {tr.t} has no {party} estimate; run eve_attack first")
            errors[tr.t - 1] += np.count_nonzero(est != tr.message)
            bits[tr.t - 1] += tr.message.size
    with np.errstate(invalid="ignore", divide="ignore"):
        per_block = np.where(bits > 0, errors / np.maximum(bits, 1), np.nan)
    return BerResult(per_block, errors, bits)
