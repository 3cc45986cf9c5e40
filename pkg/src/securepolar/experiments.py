"""Experiment runners behind the command-line subcommands.

Each runner takes an :class:`ExperimentConfig` and an output directory and
returns the paths it wrote.  Grid points run on a thread pool; rows are
sorted by ``(scheme, N, beta, seed)`` before writing, so files do not depend
on completion order.
"""

from __future__ import annotations

import csv
import functools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import (
    AdversaryPolicy,
    PolicyKind,
    StateKind,
    UncertaintySet,
    sample_state,
    sweep_size,
)
from .config import ExperimentConfig
from .metrics import (
    BlockTerms,
    BoundReport,
    bec_secrecy_capacity,
    block_terms,
    bound_report,
    bound_report_from_terms,
    experimental_ber,
    rate_sacrifice,
    worst_case,
)
from .polarization import (
    ReliabilityProfile,
    evolve_bec,
    set_labels,
    write_partition_csv,
)
from .schemes import Construction, SchemeKind, eve_attack, run_trials
from .transcripts import write_transcript

log = logging.getLogger(__name__)

SWEEP_FIELDS = (
    "scheme",
    "N",
    "beta",
    "T",
    "pe_bound",
    "leakage_upper",
    "leakage_rate",
    "secrecy_rate",
    "bob_ber",
    "eve_ber",
    "seed",
)
BLOCK_FIELDS = (
    "scheme",
    "N",
    "beta",
    "seed",
    "block",
    "bob_errors",
    "eve_errors",
    "bits",
    "bob_ber",
    "eve_ber",
)
RATE_FIELDS = (
    "N",
    "beta",
    "state",
    "size_I",
    "size_F",
    "size_R",
    "size_B",
    "capacity",
    "rate_F",
    "naive_rate",
    "modified_rate",
)

PLOT_RECIPE = """\
# plot recipe for {csv_name}
# one line per figure: x column, y column, series column, axis scales
reliability bound:  x=N  y=pe_bound      series=beta  xscale=log2  yscale=log10
leakage bound:      x=N  y=leakage_upper series=beta  xscale=log2  yscale=log10
leakage per use:    x=N  y=leakage_rate  series=beta  xscale=log2  yscale=log10
secrecy rate:       x=N  y=secrecy_rate  series=beta  xscale=log2  yscale=linear
# reference line for the secrecy rate panel: y={capacity:.4f} (average perfect-CSI capacity)
# all values are upper bounds computed from exact erasure-channel profiles, not simulations
"""


def _fmt(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, fields, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r.get(f)) for f in fields])
    return path


def _tag(N: int, beta: float) -> str:
    return f"N{N}_beta{beta:g}"


@functools.lru_cache(maxsize=16)
def evolved_profiles(
    uset: UncertaintySet, N: int
) -> tuple[ReliabilityProfile, tuple[ReliabilityProfile, ...]]:
    """Main profile and block-menu profiles for ``N``; shared across ``beta``."""
    return evolve_bec(uset.main_profile(N)), tuple(evolve_bec(p) for p in uset.block_menu(N))


def construction(cfg: ExperimentConfig, N: int, beta: float) -> Construction:
    profiles = evolved_profiles(cfg.uset, N)
    if cfg.kind is StateKind.ARBITRARY:
        profiles = (profiles[0], ())
    return Construction(N, beta, cfg.uset, cfg.scheme, cfg.kind, cfg.r_add, profiles=profiles)


def _grid(cfg: ExperimentConfig) -> list[tuple[int, float, int]]:
    return sorted((N, b, s) for N in cfg.N for b in cfg.beta for s in cfg.seed_list)


def _pool_map(cfg: ExperimentConfig, fn, items):
    if cfg.threads == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
        return list(ex.map(fn, items))


def _sort_rows(rows: list[dict]) -> list[dict]:
    return sorted(rows, key=lambda r: (r["scheme"], r["N"], r["beta"], r["seed"]))


# --------------------------------------------------------------------- construct


def cmd_construct(cfg: ExperimentConfig, out: str | Path) -> list[Path]:
    """Write one partition CSV per block type (or per state) and grid point.

    The strong scheme also gets a listing of the stabilizing set ``B_add``.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    block_cfg = cfg if cfg.kind is StateKind.BLOCK else cfg.replace(kind=StateKind.BLOCK)
    written: list[Path] = []
    for N in sorted(cfg.N):
        for beta in sorted(cfg.beta):
            cons = construction(block_cfg, N, beta)
            for j, p in enumerate(cons.menu_partitions):
                path = out / f"partition_{cfg.scheme.value}_{_tag(N, beta)}_block{j}.csv"
                write_partition_csv(path, p)
                written.append(path)
            if cfg.scheme is SchemeKind.STRONG:
                b_add = cons.menu_partitions[0].B_add
                idx = np.flatnonzero(b_add) if b_add is not None else np.zeros(0, int)
                path = out / f"badd_{_tag(N, beta)}.csv"
                write_csv(path, ("index",), [{"index": int(i)} for i in idx])
                written.append(path)
            log.info("constructed N=%d beta=%g: %s", N, beta,
                     [dict(zip(*np.unique(set_labels(p), return_counts=True)))
                      for p in cons.menu_partitions])
    return written


# ------------------------------------------------------------------------ bounds


def menu_block_terms(cons: Construction, cfg: ExperimentConfig) -> list[BlockTerms]:
    return [block_terms(p, cons.main, cfg.scheme, cons.delta_N) for p in cons.menu_partitions]


def sweep_worst_case(terms: list[BlockTerms], scheme: SchemeKind, N: int, beta: float,
                     T: int) -> dict[str, float]:
    """Maximum of each criterion over every block-state sequence of length ``T + 1``.

    Every criterion is a sum of per-block terms, so the maximum is reached by
    picking the worst block type independently for each position.
    """
    worst_pe = max(t.pe for t in terms)
    worst_leak = max(t.leakage for t in terms)
    min_key = min(t.key_bits for t in terms)
    leak_blocks = T + 1 if scheme is SchemeKind.STRONG else T
    leak = worst_leak * leak_blocks
    return {
        "pe_upper": worst_pe * T,
        "leakage_upper": leak,
        "leakage_rate_upper": leak / (N * (T + 1)),
        "secrecy_rate": min_key * T / (N * (T + 1)),
    }


def enumerate_worst_case(cons: Construction, cfg: ExperimentConfig, T: int) -> dict[str, float]:
    """Brute-force :func:`sweep_worst_case` by enumerating all state sequences."""
    n = sweep_size(cfg.uset, StateKind.BLOCK, T)
    reports = []
    for idx in range(n):
        pol = AdversaryPolicy(PolicyKind.WORST_CASE_SWEEP, sweep_index=idx)
        parts = [
            cons.partition_for(sample_state(pol, cfg.uset, t, StateKind.BLOCK))
            for t in range(T + 1)
        ]
        reports.append(
            bound_report(parts, cons.main, cfg.scheme, cons.N, cons.pcfg.beta, cons.delta_N)
        )
    return worst_case(reports)


def bounds_point(cfg: ExperimentConfig, N: int, beta: float, seed: int) -> dict:
    """Bounds for one grid point over ``bounds_T`` message blocks, no transmission."""
    T = cfg.bounds_T
    cons = construction(cfg, N, beta)
    policy = cfg.adversary(seed)
    if cfg.kind is StateKind.BLOCK:
        menu_terms = menu_block_terms(cons, cfg)
        if cfg.policy is PolicyKind.WORST_CASE_SWEEP:
            w = sweep_worst_case(menu_terms, cfg.scheme, N, beta, T)
            report = BoundReport(N, T, beta, w["pe_upper"], w["leakage_upper"],
                                 w["leakage_rate_upper"], w["secrecy_rate"])
        else:
            terms = [
                menu_terms[sample_state(policy, cfg.uset, t, cfg.kind).block_state]
                for t in range(T + 1)
            ]
            report = bound_report_from_terms(terms, cfg.scheme, N, beta)
    else:
        if cfg.policy is PolicyKind.WORST_CASE_SWEEP:
            raise ValueError("worst-case sweep over per-symbol states is not enumerable")
        terms = []
        for t in range(T + 1):
            p = cons.partition_for(sample_state(policy, cfg.uset, t, cfg.kind, N))
            terms.append(block_terms(p, cons.main, cfg.scheme, cons.delta_N))
        report = bound_report_from_terms(terms, cfg.scheme, N, beta)
    return {
        "scheme": cfg.scheme.value,
        "N": N,
        "beta": beta,
        "T": T,
        "pe_bound": report.pe_upper,
        "leakage_upper": report.leakage_upper,
        "leakage_rate": report.leakage_rate_upper,
        "secrecy_rate": report.secrecy_rate,
        "bob_ber": None,
        "eve_ber": None,
        "seed": seed,
    }


def cmd_bounds(cfg: ExperimentConfig, out: str | Path) -> list[Path]:
    """Sweep the ``(N, beta)`` grid; write ``bounds.csv`` and a plot recipe."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rows = _pool_map(cfg, lambda g: bounds_point(cfg, *g), _grid(cfg))
    csv_path = write_csv(out / f"bounds_{cfg.scheme.value}.csv", SWEEP_FIELDS, _sort_rows(rows))
    capacity = float(np.mean([bec_secrecy_capacity(cfg.main_eps, s) for s in cfg.states]))
    recipe = out / f"bounds_{cfg.scheme.value}_plot.txt"
    recipe.write_text(PLOT_RECIPE.format(csv_name=csv_path.name, capacity=capacity))
    return [csv_path, recipe]


# ---------------------------------------------------------------------- simulate


@dataclass
class SimulationResult:
    row: dict
    block_rows: list[dict]
    runs: list
    csi: list


def simulate_point(cfg: ExperimentConfig, N: int, beta: float, seed: int) -> SimulationResult:
    """Monte Carlo run of ``trials`` chained transmissions plus Eve's attack."""
    scfg = cfg.scheme_config(N, beta, seed=seed)
    cons = construction(cfg, N, beta)
    runs, csi = run_trials(scfg, cfg.trials, construction=cons)
    eve_attack(runs, cfg.scheme, seed=seed)
    bob = experimental_ber(runs, "bob")
    eve = experimental_ber(runs, "eve")
    reports = [
        bound_report([tr.partition for tr in r], cons.main, cfg.scheme, N, beta, cons.delta_N)
        for r in runs
    ]
    w = worst_case(reports)
    row = {
        "scheme": cfg.scheme.value,
        "N": N,
        "beta": beta,
        "T": cfg.T,
        "pe_bound": w["pe_upper"],
        "leakage_upper": w["leakage_upper"],
        "leakage_rate": w["leakage_rate_upper"],
        "secrecy_rate": w["secrecy_rate"],
        "bob_ber": bob.pooled,
        "eve_ber": eve.pooled,
        "seed": seed,
    }
    block_rows = [
        {
            "scheme": cfg.scheme.value,
            "N": N,
            "beta": beta,
            "seed": seed,
            "block": t + 1,
            "bob_errors": int(bob.errors[t]),
            "eve_errors": int(eve.errors[t]),
            "bits": int(bob.bits[t]),
            "bob_ber": float(bob.per_block[t]),
            "eve_ber": float(eve.per_block[t]),
        }
        for t in range(cfg.T)
    ]
    return SimulationResult(row, block_rows, runs, csi)


def cmd_simulate(cfg: ExperimentConfig, out: str | Path) -> list[Path]:
    """Write ``simulate.csv`` (one row per grid point), per-block BER and optional dumps."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    grid = _grid(cfg)
    results = _pool_map(cfg, lambda g: simulate_point(cfg, *g), grid)
    premature = sum(c.premature_accesses for r in results for c in r.csi)
    if premature:
        raise RuntimeError(f"{premature} premature CSI accesses")
    name = cfg.scheme.value
    written = [
        write_csv(out / f"simulate_{name}.csv", SWEEP_FIELDS, _sort_rows([r.row for r in results])),
        write_csv(
            out / f"simulate_{name}_blocks.csv",
            BLOCK_FIELDS,
            sorted(
                (b for r in results for b in r.block_rows),
                key=lambda b: (b["scheme"], b["N"], b["beta"], b["seed"], b["block"]),
            ),
        ),
    ]
    if cfg.dump_transcripts:
        tdir = out / "transcripts"
        tdir.mkdir(exist_ok=True)
        for (N, beta, seed), res in zip(grid, results):
            for run in res.runs:
                path = tdir / f"{name}_{_tag(N, beta)}_seed{seed}_trial{run[0].trial}.bin"
                write_transcript(path, run)
                written.append(path)
    return written


# --------------------------------------------------------------------- rate-calc


def rate_rows(cfg: ExperimentConfig, N: int, beta: float) -> list[dict]:
    block_cfg = cfg.replace(kind=StateKind.BLOCK, scheme=SchemeKind.WEAK, r_add=0.0)
    cons = construction(block_cfg, N, beta)
    rows = []
    for j, p in enumerate(cons.menu_partitions):
        rc = rate_sacrifice(p)
        sizes = p.sizes()
        rows.append(
            {
                "N": N,
                "beta": beta,
                "state": f"block{j}",
                "size_I": sizes["I"],
                "size_F": sizes["F"],
                "size_R": sizes["R"],
                "size_B": sizes["B"],
                "capacity": rc.capacity,
                "rate_F": rc.rate_F,
                "naive_rate": rc.naive_rate,
                "modified_rate": rc.modified_rate,
            }
        )
    return rows


def cmd_rate_calc(cfg: ExperimentConfig, out: str | Path) -> list[Path]:
    """Rate lost by chaining over all unreliable indices versus only ``B'``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    points = sorted((N, b) for N in cfg.N for b in cfg.beta)
    rows = [r for rs in _pool_map(cfg, lambda g: rate_rows(cfg, *g), points) for r in rs]
    return [write_csv(out / "rate_calc.csv", RATE_FIELDS, rows)]


COMMANDS = {
    "construct": cmd_construct,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "rate-calc": cmd_rate_calc,
}
