"""TensorFile reading and writing.

JSON layout::

    {"header": {"format_version": 1, "m": 2, "dim": 8, "kind": "model",
                "convention": "ricci-positive", "layout": "row-major"},
     "metadata": {...},
     "payload": [...],            # dim**4 values, or 3*dim**2 for kind "structure"
     "structure": [...]}          # optional I, J, K (3*dim**2 values)

Binary layout: a 64-byte little-endian header followed by float64 values
(payload, then structure if present).
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .qstruct import QuaternionicStructure

FORMAT_VERSION = 1
CONVENTION = "ricci-positive"
KINDS = ("curvature", "structure", "decomposition", "model")
MAGIC = b"QKT1"
# magic, version, m, dim, kind, flags, payload length, kappa, name
_HEADER = struct.Struct("<4sIIIIIQd16s")
HEADER_SIZE = 64
_FLAG_STRUCTURE = 1
_FLAG_R1 = 2


class TensorFileError(ValueError):
    pass


@dataclass
class TensorFile:
    m: int
    kind: str
    payload: np.ndarray
    structure: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return 4 * self.m

    def header(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "m": self.m,
            "dim": self.dim,
            "kind": self.kind,
            "convention": CONVENTION,
            "layout": "row-major",
        }

    def tensor(self) -> np.ndarray:
        d = self.dim
        return self.payload.reshape(d, d, d, d)

    def quaternionic_structure(self) -> QuaternionicStructure | None:
        src = self.payload if self.kind == "structure" else self.structure
        if src is None:
            return None
        d = self.dim
        I, J, K = src.reshape(3, d, d)
        return QuaternionicStructure(self.m, I.copy(), J.copy(), K.copy())

    def validate(self) -> "TensorFile":
        if self.kind not in KINDS:
            raise TensorFileError(f"unknown kind {self.kind!r}")
        if self.m < 1:
            raise TensorFileError("m must be positive")
        d = self.dim
        expected = 3 * d * d if self.kind == "structure" else d**4
        if self.payload.ndim != 1 or self.payload.size != expected:
            raise TensorFileError(f"payload length {self.payload.size} does not match {expected} for kind {self.kind!r}")
        if not np.all(np.isfinite(self.payload)):
            raise TensorFileError("payload contains non-finite values")
        if self.structure is not None:
            if self.structure.size != 3 * d * d:
                raise TensorFileError(f"structure length {self.structure.size} does not match {3 * d * d}")
            if not np.all(np.isfinite(self.structure)):
                raise TensorFileError("structure contains non-finite values")
        if self.kind == "model" and self.structure is None:
            raise TensorFileError("model files must carry a structure block")
        return self


def from_model(model) -> TensorFile:
    return TensorFile(
        model.m,
        "model",
        model.R.ravel().copy(),
        np.stack(model.Q.ops).ravel().copy(),
        {"name": model.name, "m": model.m, "kappa": model.kappa, "convention": CONVENTION},
    ).validate()


def to_json(tf: TensorFile) -> str:
    doc = {"header": tf.header(), "metadata": tf.metadata, "payload": tf.payload.tolist()}
    if tf.structure is not None:
        doc["structure"] = tf.structure.tolist()
    # float repr is shortest round-trip, so reading back is bit-exact
    return json.dumps(doc, sort_keys=True)


def from_json(text: str) -> TensorFile:
    try:
        doc = json.loads(text)
        h = doc["header"]
        if h.get("format_version") != FORMAT_VERSION:
            raise TensorFileError(f"unsupported format_version {h.get('format_version')!r}")
        if h.get("convention", CONVENTION) != CONVENTION:
            raise TensorFileError(f"unsupported convention {h.get('convention')!r}")
        m = int(h["m"])
        if int(h["dim"]) != 4 * m:
            raise TensorFileError("dim must equal 4m")
        structure = doc.get("structure")
        tf = TensorFile(
            m,
            h["kind"],
            np.asarray(doc["payload"], dtype=float),
            None if structure is None else np.asarray(structure, dtype=float),
            doc.get("metadata", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, TensorFileError):
            raise
        raise TensorFileError(f"malformed tensor file: {exc}") from exc
    return tf.validate()


def to_bytes(tf: TensorFile) -> bytes:
    flags = (_FLAG_STRUCTURE if tf.structure is not None else 0) | (_FLAG_R1 if tf.metadata.get("role") == "r1" else 0)
    name = str(tf.metadata.get("name", "")).encode("ascii", errors="replace")[:16]
    head = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        tf.m,
        tf.dim,
        KINDS.index(tf.kind),
        flags,
        tf.payload.size,
        float(tf.metadata.get("kappa", 0.0)),
        name,
    )
    head = head.ljust(HEADER_SIZE, b"\0")
    body = tf.payload.astype("<f8").tobytes()
    if tf.structure is not None:
        body += tf.structure.astype("<f8").tobytes()
    return head + body


def from_bytes(data: bytes) -> TensorFile:
    if len(data) < HEADER_SIZE:
        raise TensorFileError("truncated header")
    magic, version, m, dim, kind, flags, count, kappa, name = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise TensorFileError("bad magic")
    if version != FORMAT_VERSION:
        raise TensorFileError(f"unsupported format_version {version}")
    if dim != 4 * m or kind >= len(KINDS):
        raise TensorFileError("inconsistent header")
    if (len(data) - HEADER_SIZE) % 8:
        raise TensorFileError("body is not a whole number of float64 values")
    body = np.frombuffer(data, dtype="<f8", offset=HEADER_SIZE)
    extra = 3 * dim * dim if flags & _FLAG_STRUCTURE else 0
    if body.size != count + extra:
        raise TensorFileError(f"body has {body.size} values, expected {count + extra}")
    metadata = {"name": name.rstrip(b"\0").decode("ascii", errors="replace"), "m": m, "kappa": kappa, "convention": CONVENTION}
    if flags & _FLAG_R1:
        metadata["role"] = "r1"
    structure = body[count:].astype(float) if extra else None
    return TensorFile(m, KINDS[kind], body[:count].astype(float), structure, metadata).validate()


def write(tf: TensorFile, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("bin" if path.suffix == ".bin" else "json")
    if fmt == "json":
        path.write_text(to_json(tf))
    elif fmt == "bin":
        path.write_bytes(to_bytes(tf))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read(path) -> TensorFile:
    data = Path(path).read_bytes()
    if data[:4] == MAGIC:
        return from_bytes(data)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TensorFileError("neither a JSON nor a binary tensor file") from exc
    return from_json(text)
