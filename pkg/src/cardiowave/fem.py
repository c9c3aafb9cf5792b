"""P1 operator assembly (mass, lumped mass, anisotropic stiffness) and CG.

Element integrals use the exact formulas for linear simplicial elements,
so no numerical quadrature enters the discretization.  Matrices are
returned in CSR form.  The conjugate-gradient solver supports Jacobi and
symmetric-SOR preconditioning, warm starts, and zero-mean deflation for
pure-Neumann (singular) operators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .mesh import DiffusionSpec, FiberFrame, SimplicialMesh


class AssemblyError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, report: "CgReport"):
        super().__init__(message)
        self.report = report


@dataclass
class CgReport:
    iterations: int
    final_relative_residual: float
    converged: bool = True


def _element_data(mesh: SimplicialMesh):
    meas = mesh.measures()
    if np.any(meas <= 0.0):
        bad = int(np.argmin(meas))
        raise AssemblyError(f"degenerate element {bad} (measure {meas[bad]:g})")
    return meas


def assemble_mass(mesh: SimplicialMesh) -> sp.csr_matrix:
    """Consistent P1 mass matrix (N_a, N_b) over the mesh."""
    meas = _element_data(mesh)
    k = mesh.dim + 1
    if mesh.dim == 1:
        local = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    else:
        local = (np.ones((3, 3)) + np.eye(3)) / 12.0
    vals = meas[:, None, None] * local[None, :, :]
    rows = np.repeat(mesh.elements, k, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, k)).ravel()
    M = sp.coo_matrix((vals.ravel(), (rows, cols)),
                      shape=(mesh.n_nodes, mesh.n_nodes))
    return M.tocsr()


def lump_mass(M: sp.spmatrix) -> np.ndarray:
    """Row-sum lumping; returns the positive diagonal as a vector."""
    diag = np.asarray(M.sum(axis=1)).ravel()
    if np.any(diag <= 0.0):
        raise AssemblyError("lumped mass has non-positive entries")
    return diag


def element_tensors(fibers: FiberFrame, spec: DiffusionSpec, dim: int) -> np.ndarray:
    """Per-element diffusion tensors D = (sigma_f f0@f0 + sigma_s s0@s0)/chi."""
    if dim == 1:
        return (spec.sigma_f / spec.chi) * np.ones((fibers.f0.shape[0], 1, 1))
    f0, s0 = fibers.f0, fibers.s0
    D = (spec.sigma_f * np.einsum("ei,ej->eij", f0, f0)
         + spec.sigma_s * np.einsum("ei,ej->eij", s0, s0)) / spec.chi
    return D


def assemble_stiffness(mesh: SimplicialMesh, fibers: FiberFrame,
                       spec: DiffusionSpec) -> sp.csr_matrix:
    """Anisotropic P1 stiffness (grad N_a, D grad N_b); pure-Neumann form.

    The result is symmetric positive semidefinite with the constants in
    its nullspace (rows sum to zero).
    """
    meas = _element_data(mesh)
    D = element_tensors(fibers, spec, mesh.dim)
    pts = mesh.nodes[mesh.elements]
    if mesh.dim == 1:
        # grad N = (-1, +1)/h
        g = np.stack([-1.0 / meas, 1.0 / meas], axis=1)[:, :, None]
    else:
        # grad N_i = (y_j - y_k, x_k - x_j) / (2A), cyclic (i, j, k)
        x, y = pts[:, :, 0], pts[:, :, 1]
        two_a = 2.0 * meas
        b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
        c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
        g = np.stack([b, c], axis=2) / two_a[:, None, None]
    k = mesh.dim + 1
    Dg = np.einsum("eij,eaj->eai", D, g)
    local = np.einsum("eai,ebi->eab", Dg, g) * meas[:, None, None]
    rows = np.repeat(mesh.elements, k, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, k)).ravel()
    K = sp.coo_matrix((local.ravel(), (rows, cols)),
                      shape=(mesh.n_nodes, mesh.n_nodes))
    return K.tocsr()


class SsorPreconditioner:
    """Symmetric SOR: z = (D/w + U)^-1 D/w (D/w + L)^-1 r, scaled by w(2-w)."""

    def __init__(self, A: sp.csr_matrix, omega: float = 1.0):
        if not 0.0 < omega < 2.0:
            raise ValueError("SSOR relaxation factor must lie in (0, 2)")
        diag = A.diagonal()
        if np.any(diag <= 0.0):
            raise ValueError("SSOR requires positive diagonal")
        Dw = sp.diags(diag / omega)
        lower = (sp.tril(A, k=-1) + Dw).tocsc()
        upper = (sp.triu(A, k=1) + Dw).tocsc()
        # already triangular: LU with natural ordering has no fill
        self._lo = splu(lower, permc_spec="NATURAL")
        self._up = splu(upper, permc_spec="NATURAL")
        self._dscale = (diag / omega) * (2.0 - omega)

    def apply(self, r: np.ndarray) -> np.ndarray:
        y = self._lo.solve(r)
        return self._up.solve(self._dscale * y)


def cg_solve(A: sp.spmatrix, b: np.ndarray, x0: np.ndarray | None = None,
             rel_tol: float = 1e-8, max_iter: int | None = None,
             precond: str = "jacobi", omega: float = 1.0,
             deflate: bool = False) -> tuple[np.ndarray, CgReport]:
    """Preconditioned CG for SPD systems; returns (x, CgReport).

    With ``deflate=True`` the right-hand side, the initial guess, and every
    iterate are projected onto the zero-mean subspace, which makes singular
    pure-Neumann operators solvable (solution defined up to a constant).
    Raises ConvergenceError if the relative residual does not reach
    ``rel_tol`` within ``max_iter`` iterations (default 10*n).
    """
    n = A.shape[0]
    if max_iter is None:
        max_iter = 10 * n

    if precond == "jacobi":
        inv_diag = 1.0 / A.diagonal()
        apply_m = lambda r: inv_diag * r
    elif precond == "ssor":
        ssor = SsorPreconditioner(A.tocsr(), omega)
        apply_m = ssor.apply
    elif precond == "none":
        apply_m = lambda r: r
    else:
        raise ValueError(f"unknown preconditioner {precond!r}")

    def project(v):
        return v - v.mean() if deflate else v

    b = project(np.asarray(b, dtype=float))
    x = np.zeros(n) if x0 is None else project(np.array(x0, dtype=float))
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(n), CgReport(0, 0.0)

    r = b - A @ x
    r = project(r)
    res = float(np.linalg.norm(r)) / b_norm
    if res <= rel_tol:
        return x, CgReport(0, res)

    z = project(apply_m(r))
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, max_iter + 1):
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        r = project(r)
        res = float(np.linalg.norm(r)) / b_norm
        if res <= rel_tol:
            return x, CgReport(it, res)
        z = project(apply_m(r))
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"CG did not converge in {max_iter} iterations "
        f"(relative residual {res:.3e})",
        CgReport(max_iter, res, converged=False),
    )


class LinearSolver:
    """Repeated solves against one SPD matrix: CG (warm-started) or direct LU.

    Tracks per-solve iteration counts so experiments can report the
    maximum over a run.
    """

    def __init__(self, A: sp.csr_matrix, method: str = "cg",
                 rel_tol: float = 1e-8, precond: str = "jacobi",
                 warm_start: bool = True, deflate: bool = False):
        self.A = A.tocsr()
        self.method = method
        self.rel_tol = rel_tol
        self.precond = precond
        self.warm_start = warm_start
        self.deflate = deflate
        self.max_iterations = 0
        self.total_iterations = 0
        self.n_solves = 0
        self._last = None
        if method == "direct":
            if deflate:
                # singular pure-Neumann operator: pin one unknown, re-center after
                self._lu = splu(self.A[1:, 1:].tocsc())
            else:
                self._lu = splu(self.A.tocsc())
        elif method != "cg":
            raise ValueError(f"unknown linear solver {method!r}")

    def solve(self, b: np.ndarray) -> np.ndarray:
        self.n_solves += 1
        if self.method == "direct":
            if self.deflate:
                b = b - b.mean()
                x = np.empty_like(b)
                x[0] = 0.0
                x[1:] = self._lu.solve(b[1:])
                return x - x.mean()
            return self._lu.solve(b)
        x0 = self._last if (self.warm_start and self._last is not None) else None
        x, report = cg_solve(self.A, b, x0=x0, rel_tol=self.rel_tol,
                             precond=self.precond, deflate=self.deflate)
        self.max_iterations = max(self.max_iterations, report.iterations)
        self.total_iterations += report.iterations
        if self.warm_start:
            self._last = x.copy()
        return x
