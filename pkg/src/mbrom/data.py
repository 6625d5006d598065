"""Grids, snapshot sets, domain masks and dataset file I/O.

Datasets live on a fixed spatial grid.  A snapshot is the full nodal field at
one time instance; nodes covered by a moving body or cavity at that instance
are flagged by a per-snapshot mask.  Matrices are stored as headerless CSV
(one row per snapshot), tied together by a small JSON manifest.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "SpatialGrid",
    "DomainMask",
    "SnapshotSet",
    "BoundaryTrack",
    "inner_product",
    "fill_occluded",
    "load_snapshots",
    "save_dataset",
]


@dataclass(frozen=True)
class SpatialGrid:
    """Node coordinates plus per-node quadrature weights (cell measures).

    ``coords`` has shape (N, dim) with dim 1 or 2.  Discrete integrals over
    the domain are plain weighted sums, so every identity downstream holds
    for any positive weights.
    """

    dim: int
    coords: np.ndarray
    quad_weights: np.ndarray

    def __post_init__(self):
        coords = np.atleast_2d(np.asarray(self.coords, dtype=float))
        if coords.shape[0] == 1 and coords.shape[1] > 2:
            coords = coords.T
        w = np.asarray(self.quad_weights, dtype=float).ravel()
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "quad_weights", w)
        if self.dim not in (1, 2):
            raise ValueError(f"grid dim must be 1 or 2, got {self.dim}")
        if coords.shape[1] != self.dim:
            raise ValueError(
                f"coords have {coords.shape[1]} columns, expected dim={self.dim}"
            )
        if coords.shape[0] < 2:
            raise ValueError("grid needs at least 2 nodes")
        if w.shape[0] != coords.shape[0]:
            raise ValueError("quad_weights length does not match node count")
        if not np.all(w > 0):
            raise ValueError("all quadrature weights must be positive")
        # duplicate nodes make interpolation ill-posed
        order = np.lexsort(coords.T)
        diffs = np.diff(coords[order], axis=0)
        if diffs.size and np.min(np.max(np.abs(diffs), axis=1)) < 1e-12:
            raise ValueError("duplicate grid nodes (within 1e-12)")

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    def spacing(self) -> float:
        """Typical node spacing, used to seed interpolation radii."""
        if self.dim == 1:
            xs = np.sort(self.coords[:, 0])
            return float(np.median(np.diff(xs)))
        return float(np.sqrt(np.median(self.quad_weights)))

    @classmethod
    def uniform_1d(cls, a: float, b: float, n: int) -> "SpatialGrid":
        """Uniform 1D grid on [a, b] with cell-size weights."""
        if n < 2:
            raise ValueError("need at least 2 nodes")
        x = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        return cls(dim=1, coords=x[:, None], quad_weights=np.full(n, h))


@dataclass(frozen=True)
class DomainMask:
    """Per-node fluid flag: True where the node carries real field data."""

    fluid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "fluid", np.asarray(self.fluid, dtype=bool).ravel())

    def check(self, n_nodes: int) -> None:
        if self.fluid.shape[0] != n_nodes:
            raise ValueError(
                f"mask length {self.fluid.shape[0]} != node count {n_nodes}"
            )


@dataclass(frozen=True)
class BoundaryTrack:
    """Time series of the scalar parameters that characterize a moving boundary."""

    names: list[str]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_2d(np.asarray(self.values, dtype=float)))
        if self.values.shape[1] != len(self.names):
            raise ValueError("boundary values column count != number of names")

    @property
    def n_params(self) -> int:
        return len(self.names)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]


class SnapshotSet:
    """Snapshots of one scalar field plus the temporal mean/fluctuation split.

    The mean over snapshots is removed once at construction; ``fluct`` holds
    the remainder, so ``mean + fluct`` reproduces ``fields`` exactly.
    """

    def __init__(
        self,
        grid: SpatialGrid,
        times: np.ndarray,
        fields: np.ndarray,
        masks: list[DomainMask] | None = None,
        boundary: BoundaryTrack | None = None,
        field_name: str = "u",
    ):
        self.grid = grid
        self.times = np.asarray(times, dtype=float).ravel()
        self.fields = np.atleast_2d(np.asarray(fields, dtype=float))
        self.field_name = field_name
        M, N = self.fields.shape
        if M < 2:
            raise ValueError("need at least 2 snapshots")
        if self.times.shape[0] != M:
            raise ValueError(f"{self.times.shape[0]} times for {M} field rows")
        if N != grid.n_nodes:
            raise ValueError(f"fields have {N} columns, grid has {grid.n_nodes} nodes")
        dt = np.diff(self.times)
        if np.any(dt <= 0):
            row = int(np.argmax(dt <= 0)) + 2
            raise ValueError(f"non-increasing times at row {row}")
        if masks is None:
            masks = [DomainMask(np.ones(N, dtype=bool)) for _ in range(M)]
        if len(masks) != M:
            raise ValueError(f"{len(masks)} masks for {M} snapshots")
        for m in masks:
            m.check(N)
        self.masks = masks
        if boundary is not None and boundary.values.shape[0] != M:
            raise ValueError(
                f"boundary track has {boundary.values.shape[0]} rows, expected {M}"
            )
        self.boundary = boundary
        self.mean = self.fields.mean(axis=0)
        self.fluct = self.fields - self.mean

    @property
    def n_snapshots(self) -> int:
        return self.fields.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.fields.shape[1]

    def all_fluid(self) -> bool:
        return all(m.fluid.all() for m in self.masks)

    def fluid_throughout(self) -> np.ndarray:
        """Nodes that sit in the fluid domain in every snapshot."""
        out = np.ones(self.n_nodes, dtype=bool)
        for m in self.masks:
            out &= m.fluid
        return out

    def occluded_union(self) -> np.ndarray:
        """Nodes occluded in at least one snapshot (swept-over region)."""
        return ~self.fluid_throughout()


def inner_product(f: np.ndarray, g: np.ndarray, grid: SpatialGrid) -> float:
    """Discrete L2 inner product sum_j f_j g_j w_j on the grid."""
    f = np.asarray(f, dtype=float).ravel()
    g = np.asarray(g, dtype=float).ravel()
    if f.shape[0] != grid.n_nodes or g.shape[0] != grid.n_nodes:
        raise ValueError(
            f"vector lengths {f.shape[0]}, {g.shape[0]} != grid size {grid.n_nodes}"
        )
    return float(np.sum(f * g * grid.quad_weights))


def _poly_terms(dim: int, order: int) -> list[tuple[int, ...]]:
    """Monomial exponent tuples of total degree <= order."""
    if dim == 1:
        return [(p,) for p in range(order + 1)]
    return [(a, b) for a in range(order + 1) for b in range(order + 1 - a)]


def _poly_matrix(pts: np.ndarray, terms: list[tuple[int, ...]]) -> np.ndarray:
    cols = [np.prod([pts[:, d] ** e[d] for d in range(pts.shape[1])], axis=0) for e in terms]
    return np.column_stack(cols)


def _ls_extrapolate(grid: SpatialGrid, values: np.ndarray, fluid: np.ndarray, order: int) -> np.ndarray:
    """One-sided least-squares polynomial extension into the occluded nodes."""
    out = values.copy()
    occ = np.flatnonzero(~fluid)
    if occ.size == 0:
        return out
    flu = np.flatnonzero(fluid)
    terms = _poly_terms(grid.dim, order)
    k = 3 * len(terms)
    if flu.size < len(terms):
        raise ValueError(
            f"occluded node with only {flu.size} fluid neighbors, "
            f"need at least {len(terms)} for order {order}"
        )
    coords = grid.coords
    for j in occ:
        d2 = np.sum((coords[flu] - coords[j]) ** 2, axis=1)
        sel = flu[np.argsort(d2)[:k]]
        centered = coords[sel] - coords[j]
        scale = np.max(np.abs(centered))
        scale = scale if scale > 0 else 1.0
        A = _poly_matrix(centered / scale, terms)
        c, *_ = np.linalg.lstsq(A, values[sel], rcond=None)
        out[j] = c[0]
    return out


def fill_occluded(
    s: SnapshotSet,
    strategy: str = "ls_extrapolation",
    order: int = 1,
    body_values: np.ndarray | float | None = None,
) -> SnapshotSet:
    """Assign values to occluded nodes so POD can run on the full domain.

    ``ls_extrapolation`` fits a least-squares polynomial of the given order
    over the nearest fluid nodes of each snapshot and evaluates it at the
    occluded node.  ``rigid_motion`` stamps the body's own value (per
    snapshot, from ``body_values``) onto the occluded nodes.  Masks are kept
    so later stages still know which nodes carried real data.
    """
    if strategy not in ("ls_extrapolation", "rigid_motion"):
        raise ValueError(f"unknown fill strategy {strategy!r}")
    if s.all_fluid():
        return s
    M = s.n_snapshots
    filled = s.fields.copy()
    if strategy == "rigid_motion":
        if body_values is None:
            raise ValueError("rigid_motion fill needs body_values (per-snapshot)")
        bv = np.broadcast_to(np.asarray(body_values, dtype=float).ravel(), (M,)) \
            if np.ndim(body_values) else np.full(M, float(body_values))
        for i in range(M):
            filled[i, ~s.masks[i].fluid] = bv[i]
    else:
        if order < 0:
            raise ValueError("polynomial order must be >= 0")
        for i in range(M):
            filled[i] = _ls_extrapolate(s.grid, s.fields[i], s.masks[i].fluid, order)
    return SnapshotSet(
        grid=s.grid,
        times=s.times,
        fields=filled,
        masks=s.masks,
        boundary=s.boundary,
        field_name=s.field_name,
    )


# ---------------------------------------------------------------------------
# file I/O
#
# Manifest keys: grid, fields, times, masks (optional), boundary (optional),
# field_name.  Matrix CSVs are headerless; the boundary CSV has a header row
# with the parameter names.


def _read_matrix(path: Path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ValueError(f"{path.name}: non-numeric entry at row {i}") from exc
            if len(rows) > 1 and len(rows[-1]) != len(rows[0]):
                raise ValueError(f"{path.name}: ragged row at row {i}")
    if not rows:
        raise ValueError(f"{path.name}: empty matrix file")
    return np.asarray(rows, dtype=float)


def load_snapshots(manifest_path: str | Path) -> SnapshotSet:
    """Load a dataset directory via its JSON manifest."""
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    base = manifest_path.parent
    with open(manifest_path) as fh:
        meta = json.load(fh)
    for key in ("grid", "fields", "times"):
        if key not in meta:
            raise ValueError(f"manifest missing required key {key!r}")

    gmat = _read_matrix(base / meta["grid"])
    dim = gmat.shape[1] - 1
    grid = SpatialGrid(dim=dim, coords=gmat[:, :dim], quad_weights=gmat[:, dim])

    fields = _read_matrix(base / meta["fields"])
    times = _read_matrix(base / meta["times"]).ravel()
    if fields.shape[0] != times.shape[0]:
        raise ValueError(
            f"{meta['fields']} has {fields.shape[0]} rows but "
            f"{meta['times']} lists {times.shape[0]} times"
        )
    if fields.shape[1] != grid.n_nodes:
        raise ValueError(
            f"{meta['fields']} has {fields.shape[1]} columns but "
            f"{meta['grid']} defines {grid.n_nodes} nodes"
        )

    masks = None
    if meta.get("masks"):
        mmat = _read_matrix(base / meta["masks"])
        if mmat.shape != fields.shape:
            raise ValueError(f"{meta['masks']} shape {mmat.shape} != fields shape")
        masks = [DomainMask(row > 0.5) for row in mmat]

    boundary = None
    if meta.get("boundary"):
        bpath = base / meta["boundary"]
        with open(bpath, newline="") as fh:
            reader = csv.reader(fh)
            names = [h.strip() for h in next(reader)]
            vals = []
            for i, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    vals.append([float(v) for v in row])
                except ValueError as exc:
                    raise ValueError(f"{bpath.name}: non-numeric entry at row {i}") from exc
        boundary = BoundaryTrack(names=names, values=np.asarray(vals))

    return SnapshotSet(
        grid=grid,
        times=times,
        fields=fields,
        masks=masks,
        boundary=boundary,
        field_name=meta.get("field_name", "u"),
    )


FMT = "%.17g"


def save_dataset(s: SnapshotSet, out_dir: str | Path) -> Path:
    """Write a SnapshotSet as manifest + CSVs; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gmat = np.column_stack([s.grid.coords, s.grid.quad_weights])
    np.savetxt(out / "grid.csv", gmat, fmt=FMT, delimiter=",")
    np.savetxt(out / "fields.csv", s.fields, fmt=FMT, delimiter=",")
    np.savetxt(out / "times.csv", s.times[:, None], fmt=FMT, delimiter=",")
    meta = {
        "grid": "grid.csv",
        "fields": "fields.csv",
        "times": "times.csv",
        "field_name": s.field_name,
    }
    if not s.all_fluid():
        mmat = np.array([m.fluid.astype(int) for m in s.masks])
        np.savetxt(out / "masks.csv", mmat, fmt="%d", delimiter=",")
        meta["masks"] = "masks.csv"
    if s.boundary is not None:
        with open(out / "boundary.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(s.boundary.names)
            for row in s.boundary.values:
                writer.writerow([FMT % v for v in row])
        meta["boundary"] = "boundary.csv"
    mpath = out / "manifest.json"
    with open(mpath, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return mpath
