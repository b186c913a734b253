"""Dataset I/O: image decoding, manifests, feature files, model files.

Supported image inputs are 8-bit RGB rasters only (PNG or binary PPM).
Grayscale, palette, alpha, and 16-bit material is rejected rather than
converted so the [0, 1] intensity contract stays exact.  Odd image
dimensions are handled by deterministically cropping the last row and
column, never by padding.

Floating-point values in the text formats are serialized with 17
significant digits, which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .classify import Standardizer, SVMModel

MANIFEST_LABELS = ("cover", "stego")
MANIFEST_ROLES = ("train", "eval", "unsplit")

FEATURE_CSV_HEADER = ("path", "label", "mu1", "mu2", "sigma1", "sigma2", "gamma1", "gamma2", "kappa1", "kappa2")

MODEL_FORMAT_TAG = "stegbss-svm v1"

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _fmt(value: float) -> str:
    return f"{value:.17g}"


# ---------------------------------------------------------------------------
# images

def _validate_png_header(path: Path, head: bytes) -> None:
    # IHDR layout: width(4) height(4) bitdepth(1) colortype(1) ...
    if len(head) < 26:
        raise ValueError(f"{path}: truncated PNG header")
    bit_depth = head[24]
    color_type = head[25]
    if color_type in (0, 4):
        raise ValueError(f"{path}: grayscale PNG rejected, 8-bit RGB required")
    if color_type != 2:
        raise ValueError(f"{path}: unsupported PNG color type {color_type}, 8-bit RGB required")
    if bit_depth != 8:
        raise ValueError(f"{path}: unsupported PNG bit depth {bit_depth}, 8-bit RGB required")


def _validate_ppm_header(path: Path, head: bytes) -> None:
    # P6 header: magic, width, height, maxval as whitespace/comment separated tokens
    tokens = []
    i = 2
    while len(tokens) < 3 and i < len(head):
        while i < len(head) and head[i : i + 1].isspace():
            i += 1
        if i < len(head) and head[i : i + 1] == b"#":
            while i < len(head) and head[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(head) and not head[i : i + 1].isspace():
            i += 1
        if i > start:
            tokens.append(head[start:i])
    if len(tokens) < 3:
        raise ValueError(f"{path}: truncated PPM header")
    try:
        maxval = int(tokens[2])
    except ValueError:
        raise ValueError(f"{path}: malformed PPM header") from None
    if maxval != 255:
        raise ValueError(f"{path}: unsupported PPM maxval {maxval}, 8-bit RGB required")


def load_image(path: str | Path) -> np.ndarray:
    """Decode an 8-bit RGB PNG or binary PPM into an (H, W, 3) array in [0, 1].

    Intensities are the 8-bit samples divided by 255.  Odd dimensions
    are cropped (last row/column dropped).  Repeated loads of the same
    file are bit-identical.
    """
    path = Path(path)
    head = path.read_bytes()[:64]
    if head.startswith(_PNG_SIGNATURE):
        _validate_png_header(path, head)
    elif head.startswith(b"P6"):
        _validate_ppm_header(path, head)
    elif head.startswith((b"P1", b"P2", b"P3", b"P4", b"P5")):
        raise ValueError(f"{path}: only binary RGB PPM (P6) is supported")
    else:
        raise ValueError(f"{path}: unsupported file format, expected PNG or binary PPM")

    try:
        with PILImage.open(path) as img:
            if img.mode in ("L", "LA", "1", "I", "I;16", "I;16B", "I;16L", "F"):
                raise ValueError(f"{path}: grayscale input rejected, 8-bit RGB required")
            if img.mode != "RGB":
                raise ValueError(f"{path}: unsupported pixel mode {img.mode!r}, 8-bit RGB required")
            arr = np.asarray(img, dtype=np.uint8)
    except UnidentifiedImageError:
        raise ValueError(f"{path}: unreadable image file") from None

    height, width = arr.shape[:2]
    arr = arr[: height - height % 2, : width - width % 2]
    if arr.shape[0] < 2 or arr.shape[1] < 2:
        raise ValueError(f"{path}: image too small ({height}x{width}) after even-dimension crop")
    return arr.astype(np.float64) / 255.0


def save_image_png(image: np.ndarray, path: str | Path) -> None:
    """Write an in-range raster as an 8-bit RGB PNG (deterministic bytes)."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) raster, got shape {arr.shape}")
    data = np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    PILImage.fromarray(data, "RGB").save(Path(path), format="PNG")


def write_pgm(values: np.ndarray, path: str | Path) -> None:
    """Dump a 2-D array as an 8-bit binary PGM, min-max scaled."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("PGM dump expects a 2-D array")
    lo, hi = values.min(), values.max()
    scaled = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
    data = np.round(scaled * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{values.shape[1]} {values.shape[0]}\n255\n".encode())
        fh.write(data.tobytes())


# ---------------------------------------------------------------------------
# manifests

@dataclass
class ManifestEntry:
    path: str
    label: str
    scheme: str | None = None
    role: str = "unsplit"


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def label_counts(self) -> dict[str, int]:
        counts = {label: 0 for label in MANIFEST_LABELS}
        for entry in self.entries:
            counts[entry.label] += 1
        return counts


def _validate_entry(entry: ManifestEntry, seen: set[str]) -> None:
    if entry.label not in MANIFEST_LABELS:
        raise ValueError(f"unknown label {entry.label!r}; expected one of {MANIFEST_LABELS}")
    if entry.role not in MANIFEST_ROLES:
        raise ValueError(f"unknown role {entry.role!r}; expected one of {MANIFEST_ROLES}")
    if entry.path in seen:
        raise ValueError(f"duplicate path in manifest: {entry.path}")
    seen.add(entry.path)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """One JSON object per line; keys path, label, role, optional scheme."""
    seen: set[str] = set()
    lines = []
    for entry in manifest.entries:
        _validate_entry(entry, seen)
        record = {"path": entry.path, "label": entry.label, "role": entry.role}
        if entry.scheme is not None:
            record["scheme"] = entry.scheme
        lines.append(json.dumps(record, sort_keys=True))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_manifest(path: str | Path) -> DatasetManifest:
    entries = []
    seen: set[str] = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{lineno}: malformed manifest line: {exc}") from None
        if "path" not in record or "label" not in record:
            raise ValueError(f"{path}:{lineno}: manifest line needs 'path' and 'label' keys")
        entry = ManifestEntry(
            path=str(record["path"]),
            label=str(record["label"]),
            scheme=record.get("scheme"),
            role=str(record.get("role", "unsplit")),
        )
        try:
            _validate_entry(entry, seen)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        entries.append(entry)
    return DatasetManifest(entries)


# ---------------------------------------------------------------------------
# feature files

@dataclass
class FeatureRecord:
    path: str
    label: int                 # 0 = cover, 1 = stego
    features: np.ndarray       # 8 values in FEATURE_CSV_HEADER[2:] order

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FeatureRecord)
            and self.path == other.path
            and self.label == other.label
            and np.array_equal(self.features, other.features)
        )


def write_features(records: list[FeatureRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEATURE_CSV_HEADER)
        for record in records:
            values = np.asarray(record.features, dtype=np.float64)
            if values.shape != (8,):
                raise ValueError(f"{record.path}: expected 8 feature values, got shape {values.shape}")
            if not np.all(np.isfinite(values)):
                raise ValueError(f"{record.path}: non-finite feature value")
            if record.label not in (0, 1):
                raise ValueError(f"{record.path}: label must be 0 or 1, got {record.label}")
            writer.writerow([record.path, record.label] + [_fmt(v) for v in values])


def read_features(path: str | Path) -> list[FeatureRecord]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise ValueError(f"{path}: empty feature file") from None
        if header != FEATURE_CSV_HEADER:
            missing = [col for col in FEATURE_CSV_HEADER if col not in header]
            if missing:
                raise ValueError(f"{path}: feature file missing column(s): {', '.join(missing)}")
            raise ValueError(f"{path}: unexpected feature header {header}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(FEATURE_CSV_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(FEATURE_CSV_HEADER)} fields, got {len(row)}")
            label = int(row[1])
            if label not in (0, 1):
                raise ValueError(f"{path}:{lineno}: label must be 0 or 1, got {label}")
            records.append(FeatureRecord(row[0], label, np.array([float(v) for v in row[2:]])))
    return records


def records_to_arrays(records: list[FeatureRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Stack records into an (n, 8) feature matrix and an (n,) label vector."""
    if not records:
        raise ValueError("no feature records")
    features = np.vstack([r.features for r in records])
    labels = np.array([r.label for r in records], dtype=int)
    return features, labels


# ---------------------------------------------------------------------------
# model files

def save_model(model: SVMModel, path: str | Path) -> None:
    """Versioned text serialization; exact decimal round-trip for doubles."""
    if model.support_vectors.shape[0] == 0:
        raise ValueError("refusing to save a model with 0 support vectors")
    sv = np.asarray(model.support_vectors, dtype=np.float64)
    dual = np.asarray(model.dual_coefs, dtype=np.float64)
    lines = [
        MODEL_FORMAT_TAG,
        f"C {_fmt(model.C)}",
        f"gamma_k {_fmt(model.gamma_k)}",
        f"bias {_fmt(model.bias)}",
        f"n_features {sv.shape[1]}",
        "mean " + " ".join(_fmt(v) for v in model.standardizer.mean),
        "scale " + " ".join(_fmt(v) for v in model.standardizer.scale),
        f"n_support {sv.shape[0]}",
    ]
    for coef, vec in zip(dual, sv):
        lines.append(_fmt(coef) + " " + " ".join(_fmt(v) for v in vec))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def _expect_field(line: str, key: str, path: Path) -> list[str]:
    parts = line.split()
    if not parts or parts[0] != key:
        raise ValueError(f"{path}: expected '{key} ...' line, got {line!r}")
    return parts[1:]


def load_model(path: str | Path) -> SVMModel:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != MODEL_FORMAT_TAG:
        found = lines[0] if lines else "<empty file>"
        raise ValueError(f"{path}: unknown model format tag {found!r}, expected {MODEL_FORMAT_TAG!r}")
    try:
        c_val = float(_expect_field(lines[1], "C", path)[0])
        gamma_k = float(_expect_field(lines[2], "gamma_k", path)[0])
        bias = float(_expect_field(lines[3], "bias", path)[0])
        n_features = int(_expect_field(lines[4], "n_features", path)[0])
        mean = np.array([float(v) for v in _expect_field(lines[5], "mean", path)])
        scale = np.array([float(v) for v in _expect_field(lines[6], "scale", path)])
        n_support = int(_expect_field(lines[7], "n_support", path)[0])
        if mean.shape != (n_features,) or scale.shape != (n_features,):
            raise ValueError(f"{path}: standardizer length does not match n_features")
        if n_support < 1:
            raise ValueError(f"{path}: model must have at least one support vector")
        sv_lines = lines[8 : 8 + n_support]
        if len(sv_lines) < n_support:
            raise ValueError(f"{path}: truncated model file, expected {n_support} support vectors")
        dual = np.empty(n_support)
        sv = np.empty((n_support, n_features))
        for i, line in enumerate(sv_lines):
            values = [float(v) for v in line.split()]
            if len(values) != n_features + 1:
                raise ValueError(f"{path}: support vector line {i} has {len(values)} fields")
            dual[i] = values[0]
            sv[i] = values[1:]
    except IndexError:
        raise ValueError(f"{path}: truncated model file") from None
    return SVMModel(sv, dual, bias, gamma_k, c_val, Standardizer(mean, scale))
