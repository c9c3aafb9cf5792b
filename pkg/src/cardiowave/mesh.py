"""Interval and structured-triangular meshes with per-element fiber frames.

Meshes are immutable after construction (arrays are locked) and carry the
node coordinates, element connectivity, and boundary node set used by the
assembly routines.  2D grids are triangulated with a configurable diagonal
orientation so that alignment effects between fibers and element edges can
be studied on axis-aligned domains.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _lock(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SimplicialMesh:
    """Simplicial mesh of dimension 1 (segments) or 2 (triangles).

    nodes has shape (n_nodes, dim); elements holds node-index tuples with
    positive length/area and consistent (counterclockwise) orientation.
    """

    dim: int
    nodes: np.ndarray
    elements: np.ndarray
    boundary_nodes: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only 1D and 2D meshes are supported")
        if self.elements.min(initial=0) < 0 or \
                self.elements.max(initial=-1) >= len(self.nodes):
            raise ValueError("element references a nonexistent node")
        if np.any(self.measures() <= 0.0):
            bad = int(np.argmin(self.measures()))
            raise ValueError(f"element {bad} has non-positive measure")
        _lock(self.nodes)
        _lock(self.elements)
        _lock(self.boundary_nodes)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    def measures(self) -> np.ndarray:
        """Element lengths (1D) or signed areas (2D)."""
        pts = self.nodes[self.elements]
        if self.dim == 1:
            return pts[:, 1, 0] - pts[:, 0, 0]
        d1 = pts[:, 1] - pts[:, 0]
        d2 = pts[:, 2] - pts[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def min_edge_length(self) -> float:
        pts = self.nodes[self.elements]
        if self.dim == 1:
            return float(np.min(pts[:, 1, 0] - pts[:, 0, 0]))
        e01 = np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)
        e12 = np.linalg.norm(pts[:, 2] - pts[:, 1], axis=1)
        e20 = np.linalg.norm(pts[:, 0] - pts[:, 2], axis=1)
        return float(min(e01.min(), e12.min(), e20.min()))


@dataclass(frozen=True)
class FiberFrame:
    """Per-element orthonormal directions: f0 along fibers, s0 across sheets."""

    f0: np.ndarray
    s0: np.ndarray | None = None

    def __post_init__(self):
        _lock(self.f0)
        if self.s0 is not None:
            _lock(self.s0)


@dataclass(frozen=True)
class DiffusionSpec:
    """Conductivity coefficients along the fiber frame and the membrane ratio chi."""

    sigma_f: float
    sigma_s: float = 1.0
    sigma_n: float = 1.0
    chi: float = 1.0

    def __post_init__(self):
        if min(self.sigma_f, self.sigma_s, self.sigma_n) <= 0.0:
            raise ValueError("conductivity coefficients must be positive")
        if self.chi <= 0.0:
            raise ValueError("chi must be positive")


def line_mesh(length: float, n_elements: int, origin: float = 0.0) -> SimplicialMesh:
    """Uniform interval mesh on [origin, origin + length] with n_elements segments."""
    if length <= 0.0:
        raise ValueError("length must be positive")
    if n_elements < 1:
        raise ValueError("n_elements must be at least 1")
    x = origin + np.linspace(0.0, length, n_elements + 1)
    elements = np.column_stack([np.arange(n_elements), np.arange(1, n_elements + 1)])
    return SimplicialMesh(
        dim=1,
        nodes=x[:, None].copy(),
        elements=elements.astype(np.int64),
        boundary_nodes=np.array([0, n_elements], dtype=np.int64),
    )


def rect_tri_mesh(lx: float, ly: float, nx: int, ny: int,
                  diagonal: str = "right",
                  origin: tuple = (0.0, 0.0)) -> SimplicialMesh:
    """Structured triangulation of an lx-by-ly rectangle with 2*nx*ny triangles.

    Node (i, j) sits at origin + (i*lx/nx, j*ly/ny), numbered row-major by
    (j, i).  ``diagonal`` selects how each cell is split: "right" cuts along
    the (+1, +1) direction, "left" along (-1, +1), and "alternating" flips
    the cut with the parity of i + j.
    """
    if lx <= 0.0 or ly <= 0.0:
        raise ValueError("domain dimensions must be positive")
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be at least 1")
    if diagonal not in ("right", "left", "alternating"):
        raise ValueError(f"unknown diagonal orientation {diagonal!r}")

    xs = origin[0] + np.linspace(0.0, lx, nx + 1)
    ys = origin[1] + np.linspace(0.0, ly, ny + 1)
    X, Y = np.meshgrid(xs, ys)           # row-major by (j, i)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    jj, ii = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    n00 = (jj * (nx + 1) + ii).ravel()
    n10 = n00 + 1
    n01 = n00 + (nx + 1)
    n11 = n01 + 1

    if diagonal == "alternating":
        right = ((ii + jj) % 2 == 0).ravel()
    else:
        right = np.full(n00.shape, diagonal == "right")

    # both splits are counterclockwise
    tri1 = np.where(right[:, None],
                    np.column_stack([n00, n10, n11]),
                    np.column_stack([n00, n10, n01]))
    tri2 = np.where(right[:, None],
                    np.column_stack([n00, n11, n01]),
                    np.column_stack([n10, n11, n01]))
    elements = np.empty((2 * len(n00), 3), dtype=np.int64)
    elements[0::2] = tri1
    elements[1::2] = tri2

    I, J = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="ij")
    on_bnd = (I == 0) | (I == nx) | (J == 0) | (J == ny)
    boundary = np.flatnonzero(on_bnd.T.ravel())

    return SimplicialMesh(dim=2, nodes=nodes, elements=elements,
                          boundary_nodes=boundary.astype(np.int64))


def uniform_fiber_frame(mesh: SimplicialMesh, angle: float = 0.0) -> FiberFrame:
    """Constant fiber frame at the given angle from the x-axis (radians)."""
    m = mesh.n_elements
    if mesh.dim == 1:
        return FiberFrame(f0=np.ones((m, 1)))
    c, s = np.cos(angle), np.sin(angle)
    f0 = np.tile([c, s], (m, 1))
    s0 = np.tile([-s, c], (m, 1))
    return FiberFrame(f0=f0, s0=s0)
