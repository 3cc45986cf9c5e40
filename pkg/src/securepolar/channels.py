"""Main and wiretap erasure channels, adversary state choice, and delayed CSI."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .codec import ERASED
from .polarization import ErasureProfile


class StateKind(enum.Enum):
    BLOCK = "block"
    ARBITRARY = "arbitrary"


class PolicyKind(enum.Enum):
    UNIFORM_IID = "uniform_iid"
    FIXED_SEQUENCE = "fixed_sequence"
    WORST_CASE_SWEEP = "worst_case_sweep"


class CSIDelayError(RuntimeError):
    """A block's wiretap state was requested before that block finished."""


class SequenceExhausted(IndexError):
    pass


# stream ids for np.random.default_rng([seed, stream, ...])
STREAM_ADVERSARY = 1
STREAM_MENU = 2


@dataclass(frozen=True)
class UncertaintySet:
    """The wiretap erasure probabilities the eavesdropper may pick from.

    ``mixed_blocks`` appends that many fixed non-stationary block types to the
    block menu, each symbol drawn uniformly from ``states`` once per ``N``
    (seeded by ``menu_seed``).
    """

    states: tuple[float, ...]
    main_eps: float
    mixed_blocks: int = 0
    menu_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(float(s) for s in self.states))
        if not self.states:
            raise ValueError("states: the uncertainty set must not be empty")
        for s in self.states + (self.main_eps,):
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"states: erasure probability {s} outside [0, 1]")
        if self.mixed_blocks < 0:
            raise ValueError("mixed_blocks must be non-negative")

    def n_choices(self, kind: StateKind) -> int:
        if kind is StateKind.BLOCK:
            return len(self.states) + self.mixed_blocks
        return len(self.states)

    def main_profile(self, N: int) -> ErasureProfile:
        return ErasureProfile.stationary(self.main_eps, N)

    def block_menu(self, N: int) -> list[ErasureProfile]:
        """Stationary block per state, then the fixed mixed blocks."""
        menu = [ErasureProfile.stationary(s, N) for s in self.states]
        states = np.array(self.states)
        for j in range(self.mixed_blocks):
            rng = np.random.default_rng([self.menu_seed, STREAM_MENU, N, j])
            menu.append(ErasureProfile(states[rng.integers(0, len(states), N)]))
        return menu


@dataclass(frozen=True, eq=False)
class WiretapState:
    kind: StateKind
    block_state: int | None = None
    symbol_states: np.ndarray | None = None

    def profile(self, uset: UncertaintySet, N: int, menu=None) -> ErasureProfile:
        if self.kind is StateKind.BLOCK:
            menu = menu if menu is not None else uset.block_menu(N)
            return menu[self.block_state]
        return ErasureProfile(np.asarray(uset.states)[self.symbol_states])

    @property
    def tag(self) -> str:
        if self.kind is StateKind.BLOCK:
            return f"block{self.block_state}"
        return "arbitrary"


@dataclass(frozen=True)
class AdversaryPolicy:
    """How Eve picks states.  ``sweep_index`` selects one sequence of a sweep."""

    kind: PolicyKind = PolicyKind.UNIFORM_IID
    seed: int = 0
    sequence: tuple[int, ...] | None = None
    sweep_index: int = 0

    def for_trial(self, trial: int) -> "AdversaryPolicy":
        """The policy used by one independent trial of a Monte Carlo batch."""
        if self.kind is PolicyKind.UNIFORM_IID:
            seed = int(np.random.SeedSequence([self.seed, trial]).generate_state(1)[0])
            return AdversaryPolicy(self.kind, seed, self.sequence, self.sweep_index)
        if self.kind is PolicyKind.WORST_CASE_SWEEP:
            return AdversaryPolicy(self.kind, self.seed, self.sequence, self.sweep_index + trial)
        return self


def sweep_size(uset: UncertaintySet, kind: StateKind, T: int, N: int = 1) -> int:
    """Number of distinct state sequences over blocks ``0..T``."""
    length = T + 1 if kind is StateKind.BLOCK else (T + 1) * N
    return uset.n_choices(kind) ** length


def _sweep_digits(index: int, base: int, start: int, count: int) -> np.ndarray:
    index //= base ** start
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        index, out[i] = divmod(index, base)
    return out


def sample_state(
    policy: AdversaryPolicy,
    uset: UncertaintySet,
    t: int,
    kind: StateKind,
    N: int = 1,
) -> WiretapState:
    """Eve's wiretap state for block ``t``.

    ``UNIFORM_IID`` draws per block (``BLOCK``) or per symbol (``ARBITRARY``)
    from a stream keyed by ``(policy.seed, t)``, so the draw does not depend
    on how many other blocks were sampled.  ``WORST_CASE_SWEEP`` reads the
    ``policy.sweep_index``-th sequence of the lexicographic enumeration.
    """
    base = uset.n_choices(kind)
    count = 1 if kind is StateKind.BLOCK else N
    if policy.kind is PolicyKind.UNIFORM_IID:
        rng = np.random.default_rng([policy.seed, STREAM_ADVERSARY, t])
        draw = rng.integers(0, base, count)
    elif policy.kind is PolicyKind.FIXED_SEQUENCE:
        seq = policy.sequence or ()
        if (t + 1) * count > len(seq):
            raise SequenceExhausted(
                f"fixed state sequence of length {len(seq)} has no entry for block {t}"
            )
        draw = np.asarray(seq[t * count:(t + 1) * count], dtype=np.int64)
        if np.any(draw < 0) or np.any(draw >= base):
            raise ValueError(f"sequence: state index out of range 0..{base - 1}")
    else:
        draw = _sweep_digits(policy.sweep_index, base, t * count, count)
    if kind is StateKind.BLOCK:
        return WiretapState(kind, block_state=int(draw[0]))
    return WiretapState(kind, symbol_states=draw)


def transmit(x, eps_profile, rng=None) -> np.ndarray:
    """Pass ``x`` through independent erasures; erased symbols become ``ERASED``.

    ``eps_profile`` is an :class:`ErasureProfile`, an array of shape ``(N,)``
    or a per-frame array ``(B, N)``.  ``rng`` is a seed, a ``Generator`` or a
    list with one ``Generator`` per frame.
    """
    x = np.asarray(x, dtype=np.uint8)
    eps = eps_profile.eps if isinstance(eps_profile, ErasureProfile) else np.asarray(eps_profile)
    if eps.shape[-1] != x.shape[-1]:
        raise ValueError(f"profile length {eps.shape[-1]} != frame length {x.shape[-1]}")
    if isinstance(rng, (list, tuple)):
        draws = np.stack([g.random(x.shape[-1]) for g in rng]).reshape(x.shape)
    else:
        draws = np.random.default_rng(rng).random(x.shape)
    return np.where(draws < eps, ERASED, x).astype(np.uint8)


@dataclass
class CSIAccess:
    block: int
    in_progress: int | None
    granted: bool


@dataclass
class DelayedCSI:
    """Holds realized wiretap states and releases each only after its block ends.

    The channel simulator commits a state with :meth:`commit` before
    transmission and calls :meth:`complete` afterwards.  Legitimate parties
    see states only through :meth:`reveal`; every call is logged.
    """

    _states: dict[int, WiretapState] = field(default_factory=dict)
    _completed: set[int] = field(default_factory=set)
    in_progress: int | None = None
    access_log: list[CSIAccess] = field(default_factory=list)

    def commit(self, t: int, state: WiretapState) -> None:
        if t in self._states:
            raise ValueError(f"state for block {t} already committed")
        self._states[t] = state
        self.in_progress = t

    def channel_state(self, t: int) -> WiretapState:
        """State used by the wiretap channel itself (not a CSI disclosure)."""
        return self._states[t]

    def complete(self, t: int) -> None:
        if t not in self._states:
            raise ValueError(f"block {t} was never started")
        self._completed.add(t)
        if self.in_progress == t:
            self.in_progress = None

    def reveal(self, t: int) -> WiretapState:
        granted = t in self._completed
        self.access_log.append(CSIAccess(t, self.in_progress, granted))
        if not granted:
            raise CSIDelayError(
                f"CSI of block {t} requested before the block completed"
            )
        return self._states[t]

    @property
    def premature_accesses(self) -> int:
        return sum(not a.granted for a in self.access_log)


def reveal_csi(t: int, history: DelayedCSI) -> WiretapState:
    """Disclose block ``t``'s realized state; raises :class:`CSIDelayError` if early."""
    return history.reveal(t)
