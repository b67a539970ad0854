"""Discrete Dirichlet problems: harmonic extension of boundary temperatures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .graph import Graph, connected_components, transition_apply

DEFAULT_MAX_DENSE_UNKNOWNS = 10_000


@dataclass(frozen=True)
class DirichletProblem:
    """A graph with a boundary set whose temperatures are pinned.

    The boundary must be a nonempty strict subset of the nodes; interior
    nodes (everything else) take the harmonic extension of the boundary
    values at equilibrium.
    """

    graph: Graph
    boundary: np.ndarray
    boundary_temps: np.ndarray

    def __post_init__(self):
        b = np.ascontiguousarray(self.boundary, dtype=np.int64)
        t = np.ascontiguousarray(self.boundary_temps, dtype=np.float64)
        order = np.argsort(b)
        object.__setattr__(self, "boundary", b[order])
        object.__setattr__(self, "boundary_temps", t[order])
        self._validate()
        self.boundary.setflags(write=False)
        self.boundary_temps.setflags(write=False)

    def _validate(self):
        n = self.graph.n
        b = self.boundary
        if b.size == 0:
            raise ValidationError("boundary set must be nonempty")
        if b.size != self.boundary_temps.size:
            raise ValidationError("each boundary node needs exactly one temperature")
        if b.min() < 0 or b.max() >= n:
            raise ValidationError("boundary node id out of range")
        if np.any(np.diff(b) == 0):
            raise ValidationError("duplicate boundary node")
        if b.size >= n:
            raise ValidationError("boundary must be a strict subset of the nodes")

    @classmethod
    def from_dict(cls, graph: Graph, temps: dict[int, float]) -> "DirichletProblem":
        nodes = np.fromiter(temps.keys(), dtype=np.int64, count=len(temps))
        values = np.fromiter((temps[int(i)] for i in nodes), dtype=np.float64, count=len(temps))
        return cls(graph=graph, boundary=nodes, boundary_temps=values)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.graph.n, dtype=bool)
        mask[self.boundary] = True
        return mask

    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask())

    def pinned_vector(self) -> np.ndarray:
        """Full-length vector with boundary temperatures set, zeros elsewhere."""
        out = np.zeros(self.graph.n)
        out[self.boundary] = self.boundary_temps
        return out


@dataclass(frozen=True)
class SolverOptions:
    """Iteration budget and stopping tolerance for the fixed-point solver."""

    max_iterations: int = 100
    tolerance: float = 1e-9
    mode: str = "iterative"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be at least 1")
        if self.tolerance < 0:
            raise ValidationError("tolerance must be nonnegative")
        if self.mode not in ("iterative", "exact"):
            raise ValidationError(f"unknown solver mode {self.mode!r}")


@dataclass(frozen=True)
class SolveInfo:
    mode: str
    iterations: int
    final_change: float
    stop_reason: str  # "tolerance" | "max_iterations" | "exact"


@dataclass(frozen=True)
class TemperatureField:
    """Dense temperature vector, one value per node."""

    values: np.ndarray
    info: SolveInfo | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=np.float64))
        self.values.setflags(write=False)

    @property
    def mean(self) -> float:
        return float(self.values.mean())


def _check_boundary_cover(problem: DirichletProblem):
    """Every connected component must contain a boundary node, otherwise the
    temperatures on that component are undetermined."""
    mask = problem.boundary_mask()
    for comp in connected_components(problem.graph):
        if not mask[comp].any():
            raise ValidationError(
                f"connected component containing node {comp[0]} "
                f"({comp.size} nodes) has no boundary node"
            )


def jacobi_sweep(g: Graph, boundary_mask: np.ndarray, pinned: np.ndarray, t: np.ndarray) -> np.ndarray:
    """One full-vector relaxation step: interior entries are replaced by the
    weighted average of their neighbors, boundary entries stay pinned."""
    return np.where(boundary_mask, pinned, transition_apply(g, t))


def solve_iterative(problem: DirichletProblem, opts: SolverOptions | None = None) -> TemperatureField:
    """Solve by repeated relaxation sweeps from a cold (all-zero) interior.

    Stops after ``opts.max_iterations`` sweeps or as soon as the sup-norm
    change of one sweep drops below ``opts.tolerance`` (a change of exactly
    zero also stops: the iterate is a fixed point). The returned field
    carries the iteration count, the final change and which rule fired.
    """
    opts = opts or SolverOptions()
    _check_boundary_cover(problem)
    g = problem.graph
    mask = problem.boundary_mask()
    pinned = problem.pinned_vector()

    t = pinned.copy()
    change = np.inf
    iterations = 0
    stop = "max_iterations"
    for _ in range(opts.max_iterations):
        t_next = jacobi_sweep(g, mask, pinned, t)
        # boundary entries agree exactly, so the max runs over interior changes
        change = float(np.abs(t_next - t).max())
        t = t_next
        iterations += 1
        if change < opts.tolerance or change == 0.0:
            stop = "tolerance"
            break
    info = SolveInfo(mode="iterative", iterations=iterations, final_change=change, stop_reason=stop)
    return TemperatureField(values=t, info=info)


def solve_exact(
    problem: DirichletProblem,
    max_dense_unknowns: int = DEFAULT_MAX_DENSE_UNKNOWNS,
) -> TemperatureField:
    """Solve the interior linear system directly (dense LU with partial pivoting).

    Intended for auditing the iterative path when the number of interior
    nodes is modest; guarded by ``max_dense_unknowns`` because the assembled
    system is dense.
    """
    _check_boundary_cover(problem)
    g = problem.graph
    interior = problem.interior()
    k = interior.size
    if k > max_dense_unknowns:
        raise ValidationError(
            f"{k} interior unknowns exceed the dense-solve guard "
            f"({max_dense_unknowns}); use the iterative mode"
        )
    y = problem.pinned_vector()
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[interior] = np.arange(k)

    system = np.eye(k)
    rhs = np.zeros(k)
    for row, node in enumerate(interior):
        cols, ws = g.neighbors(node)
        ws = ws / g.degrees[node]
        local = pos[cols]
        inside = local >= 0
        system[row, local[inside]] -= ws[inside]
        rhs[row] = float(ws[~inside] @ y[cols[~inside]])

    try:
        x = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular interior system: {exc}") from None

    t = y.copy()
    t[interior] = x
    info = SolveInfo(mode="exact", iterations=0, final_change=0.0, stop_reason="exact")
    return TemperatureField(values=t, info=info)


def solve(problem: DirichletProblem, opts: SolverOptions | None = None) -> TemperatureField:
    """Dispatch on ``opts.mode``."""
    opts = opts or SolverOptions()
    if opts.mode == "exact":
        return solve_exact(problem)
    return solve_iterative(problem, opts)


def residual(problem: DirichletProblem, field: TemperatureField) -> float:
    """Harmonicity defect: max over interior nodes of ``|T_i - (PT)_i|``."""
    t = field.values
    if t.shape != (problem.graph.n,):
        raise ValidationError("field length does not match graph")
    pt = transition_apply(problem.graph, t)
    diff = np.abs(t - pt)
    diff[problem.boundary] = 0.0
    return float(diff.max())
