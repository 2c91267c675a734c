"""Timestamp stream interchange formats.

Binary layout (all little-endian):

    bytes 0..7   magic ``QCSTMP01``
    bytes 8..11  u32 header length H
    bytes 12..   H bytes of UTF-8 JSON header:
                 {"seed", "duration_s", "config_hash",
                  "nominal_one_way_delay_ps", "n_records"}
    then three back-to-back columns of n_records each:
                 u8 detector id, i64 time_ps, u64 pair id

The CSV form is two columns, ``detector,time_ps``, with detector names
IdlerA / SignalB / ReturnA; ground-truth pair ids are deliberately absent
so CSV exports are safe estimator inputs.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import ConfigurationError
from .simulation import DETECTOR_IDS_BY_NAME, DETECTOR_NAMES, TimestampStream

__all__ = ["write_stream", "read_stream", "write_stream_csv", "read_stream_csv"]

_MAGIC = b"QCSTMP01"


def write_stream(stream, path):
    """Serialize a stream to the columnar binary format."""
    header = {
        "seed": stream.seed,
        "duration_s": stream.duration_s,
        "config_hash": stream.config_hash,
        "nominal_one_way_delay_ps": stream.nominal_one_way_delay_ps,
        "n_records": len(stream),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(stream.detector_ids.astype("<u1").tobytes())
        fh.write(stream.times_ps.astype("<i8").tobytes())
        fh.write(stream.pair_ids.astype("<u8").tobytes())


def read_stream(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ConfigurationError(f"not a timestamp stream file: magic {magic!r}")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        n = int(header["n_records"])
        det = np.frombuffer(fh.read(n), dtype="<u1")
        times = np.frombuffer(fh.read(8 * n), dtype="<i8")
        pairs = np.frombuffer(fh.read(8 * n), dtype="<u8").astype(np.int64)
    return TimestampStream(
        detector_ids=det.copy(),
        times_ps=times.copy(),
        pair_ids=pairs,
        duration_s=float(header["duration_s"]),
        seed=int(header["seed"]),
        config_hash=header.get("config_hash"),
        nominal_one_way_delay_ps=header.get("nominal_one_way_delay_ps"),
    )


def write_stream_csv(stream, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("detector,time_ps\n")
        names = {int(k): v for k, v in DETECTOR_NAMES.items()}
        for d, t in zip(stream.detector_ids, stream.times_ps):
            fh.write(f"{names[int(d)]},{int(t)}\n")


def read_stream_csv(path, duration_s=None, seed=0):
    """Parse the two-column CSV back into a stream (pair ids lost)."""
    dets, times = [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "detector,time_ps":
            raise ConfigurationError(f"unexpected stream CSV header: {header!r}")
        for line in fh:
            name, t = line.rstrip("\n").split(",")
            if name not in DETECTOR_IDS_BY_NAME:
                raise ConfigurationError(f"unknown detector name: {name!r}")
            dets.append(int(DETECTOR_IDS_BY_NAME[name]))
            times.append(int(t))
    times_arr = np.asarray(times, dtype=np.int64)
    if duration_s is None:
        duration_s = float(times_arr.max() + 1) * 1e-12 if times_arr.size else 0.0
    return TimestampStream(
        detector_ids=np.asarray(dets, dtype=np.uint8),
        times_ps=times_arr,
        pair_ids=np.full(times_arr.size, -1, dtype=np.int64),
        duration_s=duration_s,
        seed=seed,
    )
