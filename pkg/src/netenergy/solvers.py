"""Grounded linear solves on networks: kernels, monopoles, projections.

Every solve here reduces to one symmetric positive-definite system: the
graph Laplacian with one pinned vertex deleted.  On a wired truncation the
pinned vertex is the ground (held at potential zero); on a plain finite
network it is the origin, and the right-hand side must sum to zero for the
full system to be consistent.

The reduced system is factored once per network (sparse LU) and reused for
every right-hand side; above ``DIRECT_LIMIT`` unknowns a Jacobi
preconditioned conjugate-gradient iteration is used instead.

Solvers return :class:`~netenergy.energy.EnergyVector` classes where the
result is an energy-space element (dipoles, projections); raw potentials
keep their grounded gauge where the pointwise values matter (monopole
reports record w(x) with w(ground) = 0, which equals the monopole energy).
"""

from __future__ import annotations

import csv
import weakref
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import EnergyVector, energy_form, energy_pairings, to_energy_vector
from .generators import Exhaustion, GraphGenerator
from .network import Network, NetworkError

#: Largest reduced system handed to the direct sparse factorization.
DIRECT_LIMIT = 10_000

#: Default absolute tolerance on successive monopole energies.
MONOPOLE_TOL = 1e-6

#: Default number of exhaustion levels.
K_MAX = 30


class SolverError(RuntimeError):
    """A linear solve failed or was handed an inconsistent system."""


_solver_cache: "weakref.WeakKeyDictionary[Network, tuple]" = weakref.WeakKeyDictionary()


def _pinned_index(net: Network) -> int:
    gi = net.ground_index
    return net.origin_index if gi is None else gi


def _reduced_solver(net: Network):
    """(keep, solve) for the Laplacian with the pinned row/column deleted."""
    cached = _solver_cache.get(net)
    if cached is not None:
        return cached
    pinned = _pinned_index(net)
    keep = np.array([i for i in range(net.n) if i != pinned], dtype=np.int64)
    lap = net.laplacian_matrix.tocsc()
    red = lap[keep, :][:, keep]
    if keep.size == 0:
        def solve(b):
            return np.zeros_like(b)
    elif keep.size <= DIRECT_LIMIT:
        try:
            lu = spla.splu(red)
        except RuntimeError as exc:
            raise SolverError(f"reduced system is singular: {exc}") from exc
        solve = lu.solve
    else:
        diag = red.diagonal()
        precond = sp.diags(1.0 / diag)

        def solve(b):
            def one(col):
                x, info = spla.cg(red, col, M=precond, rtol=1e-12, atol=0.0)
                if info != 0:
                    raise SolverError(f"conjugate gradient did not converge (info={info})")
                return x

            if b.ndim == 1:
                return one(b)
            return np.column_stack([one(b[:, j]) for j in range(b.shape[1])])

    _solver_cache[net] = (keep, solve)
    return keep, solve


def solve_grounded(net: Network, rhs) -> np.ndarray:
    """Solve lap(u) = rhs with the pinned vertex held at zero.

    The pinned vertex is the ground when the network has one, else the
    origin; in the latter case ``rhs`` must sum to zero or the full system
    is inconsistent.  ``rhs`` may be a vertex function or a 2-d array whose
    columns are independent right-hand sides.
    """
    if isinstance(rhs, Mapping):
        cols = net.as_array(rhs)[:, None]
        squeeze = True
    else:
        arr = np.asarray(rhs, dtype=float)
        if arr.ndim == 1:
            cols = net.as_array(arr)[:, None]
            squeeze = True
        elif arr.ndim == 2 and arr.shape[0] == net.n:
            cols = arr
            squeeze = False
        else:
            raise NetworkError(
                f"rhs has shape {arr.shape}, expected ({net.n},) or ({net.n}, m)"
            )

    if net.ground_index is None:
        sums = cols.sum(axis=0)
        scale = max(1.0, float(np.abs(cols).max(initial=0.0)))
        if np.any(np.abs(sums) > 1e-9 * scale):
            raise SolverError(
                "rhs must sum to zero on a network without a ground vertex"
            )

    keep, solve = _reduced_solver(net)
    out = np.zeros_like(cols)
    if keep.size:
        out[keep, :] = solve(cols[keep, :]).reshape(keep.size, -1)
    return out[:, 0] if squeeze else out


def solve_dipole(net: Network, x) -> EnergyVector:
    """Energy-kernel element v_x: lap(v_x) = delta_x - delta_o, v_x(o) = 0.

    Pairing any u against v_x in energy reproduces u(x) - u(o).  For the
    origin itself the zero class is returned.
    """
    xi = net.index(x)
    o = net.origin_index
    if xi == o:
        return to_energy_vector(net, np.zeros(net.n))
    rhs = np.zeros(net.n)
    rhs[xi] = 1.0
    rhs[o] = -1.0
    return to_energy_vector(net, solve_grounded(net, rhs))


def solve_dipoles(net: Network, xs) -> list[EnergyVector]:
    """Batched :func:`solve_dipole` sharing one factorization."""
    o = net.origin_index
    idxs = [net.index(x) for x in xs]
    rhs = np.zeros((net.n, len(idxs)))
    for j, xi in enumerate(idxs):
        rhs[xi, j] += 1.0
        rhs[o, j] -= 1.0
    sols = solve_grounded(net, rhs)
    return [to_energy_vector(net, sols[:, j]) for j in range(sols.shape[1])]


def effective_resistance(net: Network, x, y) -> float:
    """R(x, y) = v(x) - v(y) where lap(v) = delta_x - delta_y.

    Equals the energy of v.  On a wired truncation this is the wired
    resistance; taking ``y`` to be the ground gives the wired resistance
    to the collapsed exterior.
    """
    xi, yi = net.index(x), net.index(y)
    if xi == yi:
        return 0.0
    rhs = np.zeros(net.n)
    rhs[xi] += 1.0
    rhs[yi] -= 1.0
    u = solve_grounded(net, rhs)
    return float(u[xi] - u[yi])


# -- exhaustion reports ----------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-level record of an exhaustion computation.

    ``levels`` holds ``(k, value, energy)`` rows with strictly increasing
    ``k``; a report with ``converged`` False is still returned in full,
    callers decide what a partial run means.
    """

    levels: tuple
    extrapolated_limit: float
    converged: bool
    tol: float

    def __post_init__(self):
        rows = tuple((int(k), float(v), float(e)) for k, v, e in self.levels)
        ks = [r[0] for r in rows]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("report levels must be strictly increasing in k")
        object.__setattr__(self, "levels", rows)

    @property
    def energies(self) -> np.ndarray:
        return np.array([row[2] for row in self.levels])

    @property
    def values(self) -> np.ndarray:
        return np.array([row[1] for row in self.levels])

    @property
    def ks(self) -> np.ndarray:
        return np.array([row[0] for row in self.levels], dtype=int)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level", "value", "energy"])
            for k, v, e in self.levels:
                writer.writerow([k, repr(v), repr(e)])

    def summary(self) -> dict:
        return {
            "levels": [list(row) for row in self.levels],
            "extrapolated_limit": self.extrapolated_limit,
            "converged": self.converged,
            "tol": self.tol,
        }


def _aitken(seq) -> float:
    """Aitken delta-squared estimate of the limit of a sequence tail."""
    if len(seq) < 3:
        return float(seq[-1])
    e1, e2, e3 = (float(x) for x in seq[-3:])
    denom = e3 - 2.0 * e2 + e1
    if denom == 0.0 or not np.isfinite(denom):
        return e3
    extrap = e3 - (e3 - e2) ** 2 / denom
    return extrap if np.isfinite(extrap) else e3


def _as_exhaustion(source) -> Exhaustion:
    if isinstance(source, Exhaustion):
        return source
    if isinstance(source, GraphGenerator):
        return Exhaustion(source)
    raise NetworkError(f"expected an exhaustion or generator, got {type(source).__name__}")


def solve_monopole(
    source,
    x,
    tol: float = MONOPOLE_TOL,
    k_max: int = K_MAX,
) -> tuple[EnergyVector, ConvergenceReport]:
    """Minimal-energy monopole at ``x``: lap(w) = delta_x, via wired levels.

    Solves the grounded truncation at each level; the reported value is
    w(x) in the grounded gauge, which equals the energy of w.  The run
    converges when successive energies differ by at most ``tol``; on a
    recurrent network the energies grow without bound and the report comes
    back with ``converged`` False.
    """
    ex = _as_exhaustion(source)
    if not ex.generator.unbounded or ex.generator.max_level is not None:
        raise SolverError("monopoles require an unbounded generator")
    if k_max < 1:
        raise NetworkError(f"k_max must be >= 1, got {k_max}")
    first = ex.truncation(1)
    if x not in first:
        raise NetworkError(f"monopole vertex {x!r} must lie in the first level")

    rows = []
    prev_energy = None
    converged = False
    w = None
    trunc = None
    for k in range(1, k_max + 1):
        trunc = ex.truncation(k)
        if trunc.ground is None:
            raise SolverError("generator exhausted; finite networks carry no monopole")
        w = solve_grounded(trunc, trunc.delta(x))
        value = float(w[trunc.index(x)])
        energy = energy_form(trunc, w)
        rows.append((k, value, energy))
        if prev_energy is not None and abs(energy - prev_energy) <= tol:
            converged = True
            break
        prev_energy = energy

    energies = [r[2] for r in rows]
    report = ConvergenceReport(
        levels=tuple(rows),
        extrapolated_limit=_aitken(energies),
        converged=converged,
        tol=tol,
    )
    return to_energy_vector(trunc, w), report


def transience_probe(
    source,
    tol: float = MONOPOLE_TOL,
    k_max: int = K_MAX,
    recurrence_ratio: float = 1e3,
    stride: int = 1,
) -> tuple[str, ConvergenceReport]:
    """Classify a generated network by its wired resistance to the ground.

    Per sampled level the monopole at the origin is solved and the wired
    resistance R_k = w(o) recorded.  Verdicts:

    - "transient" when successive R_k are Cauchy within ``tol``
      (bounded resistance to infinity, monopoles exist),
    - "recurrent" when R_k exceeds ``recurrence_ratio`` times R at the
      first level with non-shrinking increments,
    - "inconclusive" otherwise (raise ``k_max`` or loosen ``tol``).
    """
    ex = _as_exhaustion(source)
    if not ex.generator.unbounded or ex.generator.max_level is not None:
        raise SolverError("transience probe requires an unbounded generator")
    if stride < 1:
        raise NetworkError(f"stride must be >= 1, got {stride}")

    rows = []
    verdict = "inconclusive"
    origin = ex.generator.origin
    for k in range(1, k_max + 1, stride):
        trunc = ex.truncation(k)
        if trunc.ground is None:
            raise SolverError("generator exhausted; probe needs unbounded levels")
        w = solve_grounded(trunc, trunc.delta(origin))
        value = float(w[trunc.origin_index])
        energy = energy_form(trunc, w)
        rows.append((k, value, energy))
        if len(rows) >= 2:
            if abs(rows[-1][2] - rows[-2][2]) <= tol:
                verdict = "transient"
                break
            diffs = np.diff([r[1] for r in rows])
            if (
                len(diffs) >= 2
                and rows[-1][1] > recurrence_ratio * rows[0][1]
                and np.all(diffs > 0)
                and diffs[-1] >= 0.99 * diffs[0]
            ):
                verdict = "recurrent"
                break

    energies = [r[2] for r in rows]
    report = ConvergenceReport(
        levels=tuple(rows),
        extrapolated_limit=_aitken(energies),
        converged=(verdict == "transient"),
        tol=tol,
    )
    return verdict, report


# -- harmonic functions and the Royden split -------------------------------


def harmonic_space(net: Network, boundary) -> list[np.ndarray]:
    """Basis of harmonic-modulo-constants functions for a boundary set.

    Harmonically extends indicator data on ``boundary`` into the interior
    and drops one boundary vertex to kill the constants, so the result has
    dimension ``len(boundary) - 1``.  Every basis function vanishes at the
    origin.  An empty boundary returns an empty list.
    """
    b_idx = []
    seen = set()
    for b in boundary:
        i = net.index(b)
        if i not in seen:
            seen.add(i)
            b_idx.append(i)
    if len(b_idx) <= 1:
        return []

    interior = np.array([i for i in range(net.n) if i not in seen], dtype=np.int64)
    lap = net.laplacian_matrix.tocsc()
    basis = []
    o = net.origin_index
    if interior.size:
        l_ii = lap[interior, :][:, interior]
        l_ib = lap[interior, :][:, b_idx]
        try:
            lu = spla.splu(l_ii)
        except RuntimeError as exc:
            raise SolverError(f"interior system is singular: {exc}") from exc
        # one extension per boundary vertex after the first
        data = np.eye(len(b_idx))[:, 1:]
        rhs = -np.asarray(l_ib @ data)
        sols = lu.solve(rhs)
        for j in range(data.shape[1]):
            u = np.zeros(net.n)
            u[np.array(b_idx)] = data[:, j]
            u[interior] = sols[:, j]
            basis.append(u - u[o])
    else:
        data = np.eye(len(b_idx))[:, 1:]
        for j in range(data.shape[1]):
            u = np.zeros(net.n)
            u[np.array(b_idx)] = data[:, j]
            basis.append(u - u[o])
    return basis


def royden_project(net: Network, u, boundary=None) -> tuple[EnergyVector, EnergyVector]:
    """Split u = fin + harm, harm the energy projection onto harmonics.

    ``boundary`` defaults to the ground vertex when the network has one
    (so a plain finite network decomposes as (u, 0): no nonconstant
    harmonic functions exist there).  The harmonic component solves the
    Gram system of the harmonic basis; an ill-conditioned Gram is refused
    with the condition estimate in the error.
    """
    uvec = u if isinstance(u, EnergyVector) else to_energy_vector(net, u)
    if uvec.net is not net:
        raise NetworkError("energy vector from a different network")
    if boundary is None:
        boundary = [net.ground] if net.ground is not None else []
    basis = harmonic_space(net, boundary)
    if not basis:
        return uvec, to_energy_vector(net, np.zeros(net.n))

    g = energy_pairings(net, basis, basis)
    cond = float(np.linalg.cond(g))
    if not np.isfinite(cond) or cond > 1e12:
        raise SolverError(f"harmonic Gram is ill conditioned (cond ~ {cond:.3e})")
    b = energy_pairings(net, basis, [uvec.values])[:, 0]
    coeffs = np.linalg.solve(g, b)
    harm_vals = np.tensordot(coeffs, np.vstack(basis), axes=1)
    harm = to_energy_vector(net, harm_vals)
    fin = to_energy_vector(net, uvec.values - harm.values)
    return fin, harm
