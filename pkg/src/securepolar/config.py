"""Plain-text ``key = value`` experiment configuration.

Example::

    # degraded BEC setup, weak scheme
    scheme = weak
    N = 2^10, 2^12
    beta = 0.18, 0.30
    main_eps = 0.1
    states = 0.4, 0.5
    T = 3
    trials = 200
    seed = 1

Lists are comma separated; block lengths may be written as ``2^k``.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .channels import AdversaryPolicy, PolicyKind, StateKind, UncertaintySet
from .polarization import is_power_of_two
from .schemes import SchemeConfig, SchemeKind

# N above this is opt-in (profiles of 2^24 doubles take ~128 MB each)
DEFAULT_MAX_N = 2**20


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: SchemeKind = SchemeKind.WEAK
    N: tuple[int, ...] = (2**10,)
    beta: tuple[float, ...] = (0.25,)
    T: int = 3
    bounds_T: int = 1000
    main_eps: float = 0.1
    states: tuple[float, ...] = (0.4, 0.5)
    kind: StateKind = StateKind.BLOCK
    mixed_blocks: int = 0
    menu_seed: int = 0
    policy: PolicyKind = PolicyKind.UNIFORM_IID
    sequence: tuple[int, ...] | None = None
    r_add: float = 0.0
    seed: int = 0
    seeds: tuple[int, ...] | None = None
    trials: int = 1
    threads: int = 1
    allow_large_N: bool = False
    payload: str | None = None
    dump_transcripts: bool = False
    out: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.N:
            raise ConfigError("N", "at least one block length is required")
        for n in self.N:
            if not is_power_of_two(n):
                raise ConfigError("N", f"{n} is not a power of two")
            if n > DEFAULT_MAX_N and not self.allow_large_N:
                raise ConfigError("N", f"{n} exceeds 2^20; set allow_large_N = true")
        if not self.beta:
            raise ConfigError("beta", "at least one beta is required")
        for b in self.beta:
            if not 0.0 < b < 0.5:
                raise ConfigError("beta", f"{b} outside (0, 1/2)")
        if self.T < 1:
            raise ConfigError("T", "must be at least 1")
        if self.bounds_T < 1:
            raise ConfigError("bounds_T", "must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials", "must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads", "must be at least 1")
        if not self.states:
            raise ConfigError("states", "the uncertainty set must not be empty")
        for s in self.states:
            if not 0.0 <= s <= 1.0:
                raise ConfigError("states", f"erasure probability {s} outside [0, 1]")
        if not 0.0 <= self.main_eps <= 1.0:
            raise ConfigError("main_eps", f"{self.main_eps} outside [0, 1]")
        if self.mixed_blocks < 0:
            raise ConfigError("mixed_blocks", "must be non-negative")
        if not 0.0 <= self.r_add < 1.0:
            raise ConfigError("r_add", f"{self.r_add} outside [0, 1)")
        if self.r_add > 0 and self.scheme is SchemeKind.WEAK:
            raise ConfigError("r_add", "only used by the strong scheme")
        if self.r_add > 0 and self.kind is StateKind.ARBITRARY:
            raise ConfigError("r_add", "stabilization needs kind = block")
        for sd in self.seed_list:
            if not 0 <= sd < 2**64:
                raise ConfigError("seed", f"{sd} is not an unsigned 64-bit integer")
        if self.policy is PolicyKind.FIXED_SEQUENCE and not self.sequence:
            raise ConfigError("sequence", "fixed_sequence policy needs a sequence")

    @property
    def seed_list(self) -> tuple[int, ...]:
        return self.seeds if self.seeds else (self.seed,)

    @property
    def uset(self) -> UncertaintySet:
        return UncertaintySet(self.states, self.main_eps, self.mixed_blocks, self.menu_seed)

    def adversary(self, seed: int | None = None) -> AdversaryPolicy:
        return AdversaryPolicy(self.policy, self.seed if seed is None else seed, self.sequence)

    def scheme_config(
        self, N: int, beta: float, T: int | None = None, seed: int | None = None
    ) -> SchemeConfig:
        seed = self.seed if seed is None else seed
        payload = Path(self.payload).read_bytes() if self.payload else None
        return SchemeConfig(
            N=N,
            T=self.T if T is None else T,
            beta=beta,
            uset=self.uset,
            scheme=self.scheme,
            kind=self.kind,
            policy=self.adversary(seed),
            seed=seed,
            r_add=self.r_add,
            payload=payload,
        )

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def weak_setup(**overrides) -> ExperimentConfig:
    """Degraded BEC setup: main 0.1, wiretap states {0.4, 0.5}, weak scheme."""
    return ExperimentConfig(**overrides)


def strong_setup(**overrides) -> ExperimentConfig:
    """Three wiretap block types (0.4, 0.5, fixed mixture) with 5% stabilizing rate."""
    base = dict(scheme=SchemeKind.STRONG, mixed_blocks=1, r_add=0.05)
    base.update(overrides)
    return ExperimentConfig(**base)


def _parse_int(text: str) -> int:
    text = text.strip()
    if "^" in text:
        base, exp = text.split("^", 1)
        return int(base) ** int(exp)
    if "**" in text:
        base, exp = text.split("**", 1)
        return int(base) ** int(exp)
    return int(text)


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_PARSERS = {
    "scheme": lambda v: SchemeKind(v.strip().lower()),
    "N": lambda v: tuple(_parse_int(t) for t in _split(v)),
    "beta": lambda v: tuple(float(t) for t in _split(v)),
    "T": _parse_int,
    "bounds_T": _parse_int,
    "main_eps": float,
    "states": lambda v: tuple(float(t) for t in _split(v)),
    "kind": lambda v: StateKind(v.strip().lower()),
    "mixed_blocks": int,
    "menu_seed": int,
    "policy": lambda v: PolicyKind(v.strip().lower()),
    "sequence": lambda v: tuple(int(t) for t in _split(v)),
    "r_add": float,
    "seed": int,
    "seeds": lambda v: tuple(int(t) for t in _split(v)),
    "trials": int,
    "threads": int,
    "allow_large_N": _bool,
    "payload": lambda v: v.strip() or None,
    "dump_transcripts": _bool,
    "out": str.strip,
}


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse key-value text; ``overrides`` (e.g. from CLI flags) win."""
    cp = configparser.ConfigParser(
        delimiters=("=",),
        comment_prefixes=("#",),
        inline_comment_prefixes=("#",),
        interpolation=None,
    )
    cp.optionxform = str
    try:
        cp.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc)) from exc
    values = {}
    for key, raw in cp["experiment"].items():
        if key not in _PARSERS:
            raise ConfigError(key, "unknown configuration key")
        try:
            values[key] = _PARSERS[key](raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(key, f"cannot parse {raw!r} ({exc})") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text, **overrides)
