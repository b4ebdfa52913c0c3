"""File ingestion and the on-disk model archive.

Ingestion accepts three formats: dense numeric CSV, labeled CSV (last
column an integer label), and a multi-view JSON manifest pointing at
per-view CSVs.  Parse failures name the file and 1-based line number.

A fitted model serializes to a directory: a JSON manifest plus plain-text
matrices written with 17 significant digits, so save -> load -> save is
byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .anchors import AnchorSet
from .core import ClusterModel, Dataset, DenseMatrix, SolverConfig, ViewCollection
from .spectral import BipartiteAffinity, SpectralEmbedding

FORMAT_VERSION = 1
INGEST_FORMATS = ("dense-csv", "labeled-csv", "multi-view-manifest")


class ParseError(ValueError):
    """Raised when an input file cannot be parsed; message carries file:line."""


def _parse_numeric_csv(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"{path}: file not found")
    rows = []
    width = None
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            fields = [f.strip() for f in text.split(",")]
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ParseError(
                    f"{path}:{lineno}: expected {width} columns, found {len(fields)}"
                )
            try:
                rows.append([float(f) for f in fields])
            except ValueError:
                bad = next(f for f in fields if not _is_number(f))
                raise ParseError(
                    f"{path}:{lineno}: could not parse {bad!r} as a number"
                ) from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        bad_row = int(np.argwhere(~np.isfinite(arr))[0][0])
        raise ParseError(f"{path}: non-finite value in data row {bad_row + 1}")
    return arr


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def load_dense_csv(path) -> Dataset:
    """Numeric CSV, one sample per row, no labels."""
    return Dataset(features=DenseMatrix(_parse_numeric_csv(path)))


def load_labeled_csv(path) -> Dataset:
    """Numeric CSV whose last column is an integer class label."""
    arr = _parse_numeric_csv(path)
    if arr.shape[1] < 2:
        raise ParseError(f"{path}: labeled CSV needs at least 2 columns")
    labels = arr[:, -1]
    if not np.all(labels == np.round(labels)):
        bad = int(np.flatnonzero(labels != np.round(labels))[0])
        raise ParseError(
            f"{path}: label column value {labels[bad]} in data row {bad + 1} "
            "is not an integer"
        )
    return Dataset(
        features=DenseMatrix(arr[:, :-1]),
        labels=labels.astype(np.int64),
    )


def load_multiview_manifest(path) -> ViewCollection:
    """JSON manifest: {"views": [csv, ...], "labels": csv?}.

    Relative paths resolve against the manifest's directory.  The optional
    labels file is a single-column integer CSV.
    """
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"{path}: file not found")
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}: invalid JSON ({e.msg})") from None
    if not isinstance(spec, dict) or "views" not in spec:
        raise ParseError(f"{path}: manifest must be a JSON object with a 'views' list")
    view_paths = spec["views"]
    if not isinstance(view_paths, list) or len(view_paths) < 2:
        raise ParseError(f"{path}: 'views' must list at least 2 CSV paths")
    base = path.parent
    views = [load_dense_csv(base / p) for p in view_paths]
    labels = None
    if spec.get("labels"):
        lab_ds = _parse_numeric_csv(base / spec["labels"])
        if lab_ds.shape[1] != 1:
            raise ParseError(f"{base / spec['labels']}: labels file must have 1 column")
        col = lab_ds[:, 0]
        if not np.all(col == np.round(col)):
            raise ParseError(f"{base / spec['labels']}: labels must be integers")
        labels = col.astype(np.int64)
    return ViewCollection(views=tuple(views), labels=labels)


def ingest(path, fmt: str):
    """Dispatch on format name; returns Dataset or ViewCollection."""
    if fmt == "dense-csv":
        return load_dense_csv(path)
    if fmt == "labeled-csv":
        return load_labeled_csv(path)
    if fmt == "multi-view-manifest":
        return load_multiview_manifest(path)
    raise ValueError(f"unknown input format {fmt!r}; expected one of {INGEST_FORMATS}")


# --- model archive ---------------------------------------------------------

_FLOAT_FMT = "%.17g"  # round-trips float64 exactly


def _write_matrix(path: Path, arr: np.ndarray, fmt: str = _FLOAT_FMT):
    np.savetxt(path, np.atleast_2d(arr), fmt=fmt, delimiter=",")


def _read_matrix(path: Path, shape: tuple) -> np.ndarray:
    if not path.is_file():
        raise ParseError(f"{path}: archive file missing")
    arr = np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))
    if tuple(arr.shape) != tuple(shape):
        raise ParseError(
            f"{path}: shape {tuple(arr.shape)} does not match manifest {tuple(shape)}"
        )
    return arr


def save_model(model: ClusterModel, path) -> None:
    """Write a model archive directory (manifest.json + plain-text matrices)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "view_count": model.view_count,
        "view_weights": [float(w) for w in model.view_weights],
        "metrics": model.metrics,
        "anchor_stats": [
            {
                "within_cluster_sse": a.within_cluster_sse,
                "iterations_used": a.iterations_used,
            }
            for a in model.anchors
        ],
        "shapes": {
            "z": list(model.affinity.z.data.shape),
            "u": list(model.embedding.u_block.data.shape),
            "v": list(model.embedding.v_block.data.shape),
            "anchors": [list(a.centers.data.shape) for a in model.anchors],
        },
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    _write_matrix(root / "z.txt", model.affinity.z.data)
    _write_matrix(root / "u.txt", model.embedding.u_block.data)
    _write_matrix(root / "v.txt", model.embedding.v_block.data)
    _write_matrix(root / "singular_values.txt", model.embedding.singular_values)
    for i, a in enumerate(model.anchors):
        _write_matrix(root / f"anchors_{i}.txt", a.centers.data)
    _write_matrix(root / "sample_labels.txt", model.sample_labels, fmt="%d")
    _write_matrix(root / "anchor_labels.txt", model.anchor_labels, fmt="%d")
    _write_matrix(root / "view_weights.txt", model.view_weights)
    _write_matrix(root / "objective_trace.txt", model.objective_trace)


def load_model(path) -> ClusterModel:
    """Read a model archive; validates version, shapes, and all invariants."""
    root = Path(path)
    mpath = root / "manifest.json"
    if not mpath.is_file():
        raise ParseError(f"{mpath}: archive manifest missing")
    try:
        manifest = json.loads(mpath.read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"{mpath}:{e.lineno}: invalid JSON ({e.msg})") from None
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise ParseError(
            f"{mpath}: unsupported archive format_version {version!r} "
            f"(this build reads version {FORMAT_VERSION})"
        )
    config = SolverConfig.from_dict(manifest["config"])
    shapes = manifest["shapes"]
    c = int(manifest["view_count"])
    stats = manifest["anchor_stats"]
    if len(stats) != c or len(shapes["anchors"]) != c:
        raise ParseError(f"{mpath}: anchor metadata does not match view_count {c}")
    z = _read_matrix(root / "z.txt", shapes["z"])
    u = _read_matrix(root / "u.txt", shapes["u"])
    v = _read_matrix(root / "v.txt", shapes["v"])
    k = shapes["u"][1]
    sv = _read_matrix(root / "singular_values.txt", (1, k))[0]
    anchors = tuple(
        AnchorSet(
            centers=DenseMatrix(_read_matrix(root / f"anchors_{i}.txt", shapes["anchors"][i])),
            within_cluster_sse=stats[i]["within_cluster_sse"],
            iterations_used=stats[i]["iterations_used"],
        )
        for i in range(c)
    )
    n = shapes["z"][0]
    m = shapes["z"][1]
    sample_labels = _read_matrix(root / "sample_labels.txt", (1, n), )[0].astype(np.int64)
    anchor_labels = _read_matrix(root / "anchor_labels.txt", (1, m))[0].astype(np.int64)
    view_weights = _read_matrix(root / "view_weights.txt", (1, c))[0]
    trace = np.loadtxt(root / "objective_trace.txt", delimiter=",", ndmin=2)[0]
    return ClusterModel(
        anchors=anchors,
        affinity=BipartiteAffinity(DenseMatrix(z)),
        embedding=SpectralEmbedding(
            u_block=DenseMatrix(u), v_block=DenseMatrix(v), singular_values=sv),
        sample_labels=sample_labels,
        anchor_labels=anchor_labels,
        view_weights=view_weights,
        objective_trace=trace,
        config=config,
        metrics=manifest.get("metrics"),
    )
