"""Transcript dump format: one binary file per run.

Layout::

    b"SPTR1\\n"
    uint32 little-endian header length, then a UTF-8 JSON header
    per block, in order: packed u, packed x, raw y, raw z, packed u_hat,
    packed eve_u_hat (all zeros when Eve did not attack)

Packed vectors use little-endian bit order (``N / 8`` bytes); raw received
words use one byte per symbol with ``0xFF`` for an erasure.  The header holds
``N``, ``T``, the trial index and the per-block CSV records.  The byte
stream is a pure function of the transcripts, so dumps of seeded runs are
reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .codec import pack_bits, unpack_bits
from .schemes import BlockTranscript

MAGIC = b"SPTR1\n"
RECORD_FIELDS = (
    "trial",
    "block",
    "state",
    "key_bits",
    "message_bits",
    "bob_errors",
    "eve_errors",
    "bob_guessed",
    "eve_guessed",
    "main_erasures",
    "wire_erasures",
)


def _errors(est, msg) -> int | str:
    if est is None or msg is None:
        return ""
    return int(np.count_nonzero(est != msg))


def block_record(tr: BlockTranscript) -> dict:
    return {
        "trial": tr.trial,
        "block": tr.t,
        "state": tr.state.tag,
        "key_bits": int(tr.partition.I_prime.sum() if hasattr(tr.partition, "I_prime")
                        else tr.partition.I.sum()),
        "message_bits": 0 if tr.message is None else int(tr.message.size),
        "bob_errors": _errors(tr.decrypted, tr.message),
        "eve_errors": _errors(tr.eve_message, tr.message),
        "bob_guessed": int(tr.bob_guessed.sum()),
        "eve_guessed": "" if tr.eve_guessed is None else int(tr.eve_guessed.sum()),
        "main_erasures": int(np.count_nonzero(tr.y == 0xFF)),
        "wire_erasures": int(np.count_nonzero(tr.z == 0xFF)),
    }


def records_csv(run: Sequence[BlockTranscript]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n")
    w.writeheader()
    for tr in run:
        w.writerow(block_record(tr))
    return buf.getvalue()


def write_transcript(path: str | Path, run: Sequence[BlockTranscript]) -> None:
    """Dump one run (all blocks of one trial)."""
    if not run:
        raise ValueError("empty run")
    N = run[0].N
    header = json.dumps(
        {"N": N, "T": len(run) - 1, "trial": run[0].trial, "records": records_csv(run)},
        sort_keys=True,
    ).encode()
    zeros = np.zeros(N, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for tr in run:
            fh.write(pack_bits(tr.u))
            fh.write(pack_bits(tr.x))
            fh.write(np.asarray(tr.y, dtype=np.uint8).tobytes())
            fh.write(np.asarray(tr.z, dtype=np.uint8).tobytes())
            fh.write(pack_bits(tr.u_hat))
            fh.write(pack_bits(zeros if tr.eve_u_hat is None else tr.eve_u_hat))


@dataclass(frozen=True)
class StoredBlock:
    u: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    u_hat: np.ndarray
    eve_u_hat: np.ndarray


@dataclass(frozen=True)
class StoredRun:
    N: int
    T: int
    trial: int
    records: list[dict]
    blocks: list[StoredBlock]


def read_transcript(path: str | Path) -> StoredRun:
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise ValueError(f"{path}: not a transcript dump")
    pos = len(MAGIC)
    (hlen,) = struct.unpack_from("<I", data, pos)
    pos += 4
    header = json.loads(data[pos:pos + hlen])
    pos += hlen
    N, T = header["N"], header["T"]
    nb = N // 8 if N >= 8 else 1

    def take(n):
        nonlocal pos
        if pos + n > len(data):
            raise ValueError(f"{path}: truncated at byte {pos}")
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    blocks = []
    for _ in range(T + 1):
        u = unpack_bits(take(nb), N)
        x = unpack_bits(take(nb), N)
        y = np.frombuffer(take(N), dtype=np.uint8).copy()
        z = np.frombuffer(take(N), dtype=np.uint8).copy()
        u_hat = unpack_bits(take(nb), N)
        eve = unpack_bits(take(nb), N)
        blocks.append(StoredBlock(u, x, y, z, u_hat, eve))
    records = list(csv.DictReader(io.StringIO(header["records"])))
    return StoredRun(N, T, header["trial"], records, blocks)
