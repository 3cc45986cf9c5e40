"""Bhattacharyya profiles of erasure blocks and the polarized index partitions.

All index sets are boolean masks over ``0..N-1`` in the natural order of the
polar encoder input, i.e. mask position ``i`` refers to ``U^i`` (0-based).

Erasure channels are evolved exactly.  Each profile keeps both ``z`` and its
complement ``1 - z`` evolved side by side, so thresholds of the form
``z >= 1 - delta`` remain meaningful when ``delta`` is far below machine
epsilon (``2**-64`` at ``N = 2**20, beta = 0.30``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class ZeroSecrecyError(ValueError):
    """Raised when a state leaves no room for the ``B'`` split (``|B| >= |I|``)."""


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def bit_reversal(N: int) -> np.ndarray:
    """Return the bit-reversal permutation of ``range(N)``."""
    if not is_power_of_two(N):
        raise ValueError(f"N must be a power of two, got {N}")
    n = N.bit_length() - 1
    idx = np.arange(N, dtype=np.int64)
    rev = np.zeros(N, dtype=np.int64)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return rev


@dataclass(frozen=True, eq=False)
class ErasureProfile:
    """Per-channel-use erasure probabilities of one N-length BEC block."""

    eps: np.ndarray

    def __post_init__(self):
        eps = np.array(self.eps, dtype=np.float64).reshape(-1)
        if not is_power_of_two(eps.size):
            raise ValueError(f"block length must be a power of two, got {eps.size}")
        if np.any(~np.isfinite(eps)) or np.any(eps < 0.0) or np.any(eps > 1.0):
            raise ValueError("erasure probabilities must lie in [0, 1]")
        eps.setflags(write=False)
        object.__setattr__(self, "eps", eps)

    @classmethod
    def stationary(cls, eps: float, N: int) -> "ErasureProfile":
        return cls(np.full(N, float(eps)))

    @property
    def N(self) -> int:
        return self.eps.size

    @property
    def is_stationary(self) -> bool:
        return bool(np.all(self.eps == self.eps[0]))


@dataclass(frozen=True, eq=False)
class ReliabilityProfile:
    """Bhattacharyya parameters of the N synthetic channels.

    ``zc`` is ``1 - z`` evolved independently, accurate where ``z`` is close to 1.
    """

    z: np.ndarray
    zc: np.ndarray

    @property
    def N(self) -> int:
        return self.z.size


def evolve_bec(profile: ErasureProfile | Sequence[float]) -> ReliabilityProfile:
    """Exact Bhattacharyya parameters of every synthetic channel of a BEC block.

    The block may be non-stationary: channel ``j`` erases with probability
    ``profile.eps[j]``.  A pair of erasure channels ``(a, b)`` combined by one
    kernel yields ``a + b - ab`` on the degraded branch and ``ab`` on the
    upgraded branch; the pairing follows the encoder of :func:`codec.encode`,
    so entry ``i`` of the result is ``Z(U^i | U^{0:i-1}, output)``.

    Parameters
    ----------
    profile : ErasureProfile or sequence of float
        Erasure probability per channel use; length must be a power of two.

    Returns
    -------
    ReliabilityProfile
    """
    if not isinstance(profile, ErasureProfile):
        profile = ErasureProfile(profile)
    N = profile.N
    # the encoder output is bit-reversed, so channel j feeds butterfly input rev(j)
    z = profile.eps[bit_reversal(N)].copy()
    zc = 1.0 - z
    h = N // 2
    while h >= 1:
        z = z.reshape(-1, 2, h)
        zc = zc.reshape(-1, 2, h)
        za, zb = z[:, 0, :], z[:, 1, :]
        ca, cb = zc[:, 0, :], zc[:, 1, :]
        # all-positive forms keep relative accuracy at both ends of [0, 1]
        z = np.stack([za + zb * ca, za * zb], axis=1).reshape(-1)
        zc = np.stack([ca * cb, ca + cb * za], axis=1).reshape(-1)
        h //= 2
    z = np.clip(z, 0.0, 1.0)
    zc = np.clip(zc, 0.0, 1.0)
    z.setflags(write=False)
    zc.setflags(write=False)
    return ReliabilityProfile(z, zc)


@dataclass(frozen=True)
class PartitionConfig:
    """Threshold configuration; ``delta`` overrides ``2**-(N**beta)`` when given."""

    beta: float
    N: int
    delta: float | None = None

    def __post_init__(self):
        if not is_power_of_two(self.N):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if self.delta is None and not 0.0 < self.beta < 0.5:
            raise ValueError(f"beta must lie in (0, 1/2), got {self.beta}")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def delta_N(self) -> float:
        if self.delta is not None:
            return float(self.delta)
        return 2.0 ** (-(self.N ** self.beta))


def _frozen_mask(mask) -> np.ndarray:
    m = np.asarray(mask, dtype=bool).copy()
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class Partition:
    """Polarized sets of one CSI realization.

    ``L_main`` is the set Bob treats as reliable.  After stabilization it is
    the reduced set ``L_main \\ B_add``; ``B`` and ``R`` are adjusted the same way.
    """

    L_main: np.ndarray
    H_main: np.ndarray
    H_wire: np.ndarray
    L_wire: np.ndarray
    state_tag: str = ""
    main: ReliabilityProfile | None = field(default=None, repr=False)
    wire: ReliabilityProfile | None = field(default=None, repr=False)
    B_add: np.ndarray | None = None

    def __post_init__(self):
        for name in ("L_main", "H_main", "H_wire", "L_wire"):
            object.__setattr__(self, name, _frozen_mask(getattr(self, name)))
        if self.B_add is None:
            object.__setattr__(self, "B_add", _frozen_mask(np.zeros(self.N, dtype=bool)))
        else:
            object.__setattr__(self, "B_add", _frozen_mask(self.B_add))

    @property
    def N(self) -> int:
        return self.L_main.size

    @property
    def I(self) -> np.ndarray:
        return self.L_main & self.H_wire

    @property
    def F(self) -> np.ndarray:
        return ~self.L_main & self.H_wire

    @property
    def R(self) -> np.ndarray:
        return self.L_main & ~self.H_wire

    @property
    def B(self) -> np.ndarray:
        return ~self.L_main & ~self.H_wire

    @property
    def unreliable(self) -> np.ndarray:
        return ~self.L_main

    def sizes(self) -> dict[str, int]:
        return {k: int(getattr(self, k).sum()) for k in ("I", "F", "R", "B")}


@dataclass(frozen=True, eq=False)
class StrongPartition:
    """A partition whose ``I`` is split into the key part ``I'`` and ``B'``."""

    base: Partition
    I_prime: np.ndarray
    B_prime: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "I_prime", _frozen_mask(self.I_prime))
        object.__setattr__(self, "B_prime", _frozen_mask(self.B_prime))

    def __getattr__(self, name):
        # fall through to the base partition for the shared sets
        if name in ("base", "I_prime", "B_prime"):
            raise AttributeError(name)
        return getattr(self.base, name)

    @property
    def N(self) -> int:
        return self.base.N


def partition_block(
    z_main: ReliabilityProfile,
    z_wire: ReliabilityProfile,
    cfg: PartitionConfig,
    state_tag: str = "",
) -> Partition:
    """Threshold both profiles at ``delta_N`` and form the ``I/F/R/B`` split.

    Wiretap indices strictly between the two thresholds are not counted as
    secure, so they land in ``R`` or ``B``.
    """
    if z_main.N != cfg.N or z_wire.N != cfg.N:
        raise ValueError(
            f"profile lengths {z_main.N}, {z_wire.N} do not match N={cfg.N}"
        )
    d = cfg.delta_N
    return Partition(
        L_main=z_main.z <= d,
        H_main=z_main.zc <= d,
        H_wire=z_wire.zc <= d,
        L_wire=z_wire.z <= d,
        state_tag=state_tag,
        main=z_main,
        wire=z_wire,
    )


def split_strong(p: Partition, z_main: ReliabilityProfile | None = None) -> StrongPartition:
    """Carve ``B'`` out of ``I``: the ``|B|`` indices of ``I`` with the smallest main Z.

    Ties are broken by ascending index, so both legitimate parties derive the
    same split from the same disclosed state.
    """
    z_main = z_main if z_main is not None else p.main
    if z_main is None:
        raise ValueError("split_strong needs the main-channel profile")
    I_idx = np.flatnonzero(p.I)
    n_b = int(p.B.sum())
    if n_b >= I_idx.size:
        raise ZeroSecrecyError(
            f"|B|={n_b} >= |I|={I_idx.size} for state {p.state_tag!r}: "
            "secrecy capacity of this state is zero"
        )
    order = np.lexsort((I_idx, z_main.z[I_idx]))
    B_prime = np.zeros(p.N, dtype=bool)
    B_prime[I_idx[order[:n_b]]] = True
    return StrongPartition(p, I_prime=p.I & ~B_prime, B_prime=B_prime)


def n_additional(r_add: float, N: int) -> int:
    # rounding guards against 0.05 * N landing a hair above an integer
    return math.ceil(round(r_add * N, 9))


def stabilize_b(partitions: Sequence[Partition], r_add: float) -> list[StrongPartition]:
    """Move a common block ``B_add`` of reliable-but-insecure indices into ``B``.

    ``B_add`` is the ``ceil(r_add * N)`` lowest indices of the intersection of
    all ``R`` sets.  Every partition gets ``B~ = B + B_add``, ``R~ = R - B_add``,
    ``L~ = L - B_add`` and is then split with :func:`split_strong`.
    """
    if not partitions:
        raise ValueError("need at least one partition")
    if not 0.0 <= r_add < 1.0:
        raise ValueError(f"r_add must lie in [0, 1), got {r_add}")
    N = partitions[0].N
    k = n_additional(r_add, N)
    common = np.logical_and.reduce([p.R for p in partitions])
    candidates = np.flatnonzero(common)
    if k > candidates.size:
        raise ValueError(
            f"r_add={r_add} needs {k} indices but the R sets share only {candidates.size}"
        )
    B_add = np.zeros(N, dtype=bool)
    B_add[candidates[:k]] = True
    out = []
    for p in partitions:
        adjusted = Partition(
            L_main=p.L_main & ~B_add,
            H_main=p.H_main,
            H_wire=p.H_wire,
            L_wire=p.L_wire,
            state_tag=p.state_tag,
            main=p.main,
            wire=p.wire,
            B_add=B_add,
        )
        out.append(split_strong(adjusted))
    return out


def set_labels(p: Partition | StrongPartition) -> np.ndarray:
    """One label per index from ``{I, F, R, B, Iprime, Bprime, Badd}``."""
    labels = np.empty(p.N, dtype=object)
    labels[p.F] = "F"
    labels[p.R] = "R"
    labels[p.B] = "B"
    labels[p.B_add] = "Badd"
    if isinstance(p, StrongPartition):
        labels[p.I_prime] = "Iprime"
        labels[p.B_prime] = "Bprime"
    else:
        labels[p.I] = "I"
    return labels


def write_partition_csv(path: str | Path, p: Partition | StrongPartition) -> None:
    """Write ``index, z_main, z_wire, set_label`` rows (0-based index)."""
    if p.main is None or p.wire is None:
        raise ValueError("partition carries no profiles to export")
    labels = set_labels(p)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "z_main", "z_wire", "set_label"])
        for i in range(p.N):
            w.writerow([i, repr(float(p.main.z[i])), repr(float(p.wire.z[i])), labels[i]])


def read_partition_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Read back a partition CSV into arrays keyed by column name."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {
        "index": np.array([int(r["index"]) for r in rows]),
        "z_main": np.array([float(r["z_main"]) for r in rows]),
        "z_wire": np.array([float(r["z_wire"]) for r in rows]),
        "set_label": np.array([r["set_label"] for r in rows], dtype=object),
    }
