"""Per-frame CTC label probabilities and their file formats.

Binary ``FLGT`` layout (little-endian): magic, u32 T, u32 V, T*V float32
row-major probabilities, then V symbols as u32 length + UTF-8 bytes.
JSON alternative: ``{"symbols": [...], "frames": [[...], ...]}``.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError

log = logging.getLogger(__name__)

MAGIC = b"FLGT"
ROW_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class LogitMatrix:
    frames: np.ndarray
    symbols: tuple[str, ...]

    def __post_init__(self):
        frames = np.array(self.frames, dtype=np.float64)
        if frames.ndim != 2:
            raise InputError("frames must be a T x V matrix")
        T, V = frames.shape
        if T < 1:
            raise InputError("logit matrix has no frames")
        if V < 2:
            raise InputError("need at least two labels per frame")
        if len(self.symbols) != V:
            raise InputError(f"{len(self.symbols)} symbols for {V} columns")
        if len(set(self.symbols)) != V:
            raise InputError("duplicate symbols in logit matrix")
        if (not np.all(np.isfinite(frames)) or frames.min() < 0 or frames.max() > 1 + ROW_TOL):
            raise InputError("probabilities must lie in [0, 1]")
        sums = frames.sum(axis=1)
        if np.any(sums <= 0):
            raise InputError("a frame has zero total probability")
        off = np.abs(sums - 1.0) > ROW_TOL
        if np.any(off):
            log.warning("renormalizing %d of %d frames", int(off.sum()), T)
            frames[off] /= sums[off, None]
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "symbols", tuple(self.symbols))

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_labels(self) -> int:
        return self.frames.shape[1]

    def argmax_labels(self) -> list[str]:
        return [self.symbols[i] for i in self.frames.argmax(axis=1)]

    def to_json(self) -> dict:
        return {"symbols": list(self.symbols), "frames": self.frames.tolist()}

    def to_bytes(self) -> bytes:
        T, V = self.frames.shape
        parts = [MAGIC, struct.pack("<II", T, V), self.frames.astype("<f4").tobytes()]
        for s in self.symbols:
            b = s.encode("utf-8")
            parts.append(struct.pack("<I", len(b)))
            parts.append(b)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "LogitMatrix":
        if data[:4] != MAGIC:
            raise InputError("not an FLGT file")
        try:
            T, V = struct.unpack_from("<II", data, 4)
            off = 12
            frames = np.frombuffer(data, dtype="<f4", count=T * V, offset=off).reshape(T, V)
            off += 4 * T * V
            symbols = []
            for _ in range(V):
                (n,) = struct.unpack_from("<I", data, off)
                off += 4
                symbols.append(data[off:off + n].decode("utf-8"))
                off += n
        except (struct.error, ValueError) as exc:
            raise InputError(f"truncated FLGT data: {exc}") from None
        return cls(frames, tuple(symbols))

    def save(self, path) -> None:
        path = Path(path)
        if path.suffix == ".json":
            path.write_text(json.dumps(self.to_json()), encoding="utf-8")
        else:
            path.write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "LogitMatrix":
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}") from None
        if data[:4] == MAGIC:
            return cls.from_bytes(data)
        try:
            doc = json.loads(data.decode("utf-8"))
            return cls(np.asarray(doc["frames"], dtype=np.float64), tuple(doc["symbols"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{path}: not a logit file ({exc})") from None
