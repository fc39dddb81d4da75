#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Levenberg-Marquardt on the graph manifold with sparse Cholesky normal equations."""

import time
from typing import Literal, Optional

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, Field
from scipy.sparse.linalg import splu

from core.models import BaseConfigModel
from network.edges import Edge, huber_cost, huber_weight
from network.graph import FactorGraph
from utils.logging import WithLogging

try:
    import sksparse.cholmod as cholmod
except ImportError:  # optional cholmod group
    cholmod = None

DIAGONAL_FLOOR = 1e-9
MAX_DAMPING = 1e16


class SolverError(RuntimeError):
    """The damped normal equations could not be factorized."""


class SolverConfig(BaseConfigModel):
    """Stopping rules and damping of the solver."""

    max_iter: int = Field(default=50, ge=1)
    lm_lambda0: float = Field(default=1e-4, gt=0.0)
    robust_kernel: Literal["huber", "none"] = "huber"
    relative_tolerance: float = Field(default=1e-8, gt=0.0)
    gradient_tolerance: float = Field(default=1e-10, gt=0.0)
    max_failures: int = Field(default=20, ge=1)
    use_cholmod: bool = True


class SolveReport(BaseModel):
    """Summary of one solve, serialised next to the adjusted trajectory."""

    iterations: int
    initial_cost: float
    final_cost: float
    converged: bool
    termination: str
    gradient_norm: float
    damping: float
    cost_trace: list[float]
    chi2_initial: dict[str, float]
    chi2_final: dict[str, float]
    node_counts: dict[str, int]
    edge_counts: dict[str, int]
    boresight: Optional[tuple[float, float, float]] = None
    factorization: str
    elapsed: float = Field(default=0.0, exclude=True)


class LevenbergMarquardt(WithLogging):
    """Damped Gauss-Newton with Marquardt scaling and Nielsen's damping update."""

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self.backend = "cholmod" if cholmod is not None and self.config.use_cholmod else "splu"

    def _kernel(self, edge: Edge) -> Optional[float]:
        return edge.robust if self.config.robust_kernel == "huber" else None

    def cost(self, graph: FactorGraph) -> float:
        """Total cost under the configured kernel."""
        total = 0.0
        for edge in graph.edges:
            total += huber_cost(float(np.linalg.norm(edge.residual())), self._kernel(edge))
        return total

    def linearize(self, graph: FactorGraph, dimension: int) -> tuple[sp.csc_matrix, np.ndarray]:
        """Gauss-Newton matrix J^T J and gradient J^T r at the current values."""
        rows, cols, vals, residuals = [], [], [], []
        row = 0
        for edge in graph.edges:
            r, blocks = edge.evaluate()
            weight = np.sqrt(huber_weight(float(np.linalg.norm(r)), self._kernel(edge)))
            residuals.append(weight * r)
            for node, jac in blocks:
                if node.fixed:
                    continue
                m, n = jac.shape
                rr, cc = np.meshgrid(
                    np.arange(row, row + m), np.arange(node.offset, node.offset + n), indexing="ij"
                )
                rows.append(rr.ravel())
                cols.append(cc.ravel())
                vals.append((weight * jac).ravel())
            row += len(r)
        residual = np.concatenate(residuals) if residuals else np.zeros(0)
        if vals:
            jac = sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(row, dimension),
            )
        else:
            jac = sp.csr_matrix((row, dimension))
        return (jac.T @ jac).tocsc(), jac.T @ residual

    def _factor_solve(self, matrix: sp.csc_matrix, rhs: np.ndarray) -> np.ndarray:
        if self.backend == "cholmod":
            factor = cholmod.cholesky(matrix)
            return factor.solve_A(rhs)
        return splu(matrix, permc_spec="COLAMD").solve(rhs)

    def _step(self, hessian, gradient, scaling, damping) -> Optional[np.ndarray]:
        """Damped step, or None when the system could not be factorized."""
        matrix = (hessian + sp.diags(damping * scaling)).tocsc()
        try:
            step = self._factor_solve(matrix, -gradient)
        except (RuntimeError, ValueError, np.linalg.LinAlgError) as e:
            self.logger.debug("Factorization failed at damping %.3g: %s", damping, e)
            return None
        except Exception as e:  # CHOLMOD raises its own error types
            if cholmod is not None and isinstance(e, cholmod.CholmodError):
                self.logger.debug("Factorization failed at damping %.3g: %s", damping, e)
                return None
            raise
        return step if np.all(np.isfinite(step)) else None

    def solve(self, graph: FactorGraph) -> SolveReport:
        """Optimize the graph in place.

        Raises:
            SolverError: the damped system failed to factorize too many times in a row.
        """
        started = time.perf_counter()
        config = self.config
        free = graph.free_nodes()
        dimension = graph.dimension()
        cost = self.cost(graph)
        initial_cost = cost
        chi2_initial = graph.chi2_by_kind()
        trace = [cost]
        damping = config.lm_lambda0
        growth = 2.0
        failures = 0
        iterations = 0
        gradient_norm = 0.0
        termination = "max-iter"
        converged = False

        if dimension == 0:
            termination, converged = "no-free-nodes", True
        relinearize = True
        while not converged and iterations < config.max_iter:
            if relinearize:
                hessian, gradient = self.linearize(graph, dimension)
                scaling = np.maximum(hessian.diagonal(), DIAGONAL_FLOOR)
                gradient_norm = float(np.max(np.abs(gradient))) if dimension else 0.0
                if gradient_norm < config.gradient_tolerance:
                    termination, converged = "gradient", True
                    break
            iterations += 1
            step = self._step(hessian, gradient, scaling, damping)
            if step is None:
                failures += 1
                if failures >= config.max_failures:
                    raise SolverError(f"Normal equations failed to factorize {failures} times")
                damping *= growth
                growth *= 2.0
                relinearize = False
                continue
            failures = 0
            predicted = 0.5 * float(step @ (damping * scaling * step - gradient))
            if predicted <= config.relative_tolerance * max(cost, np.finfo(float).tiny):
                termination, converged = "negligible-step", True
                break

            saved = graph.snapshot()
            for node in free:
                node.retract(step[node.offset : node.offset + node.dim])
            new_cost = self.cost(graph)
            actual = cost - new_cost
            if actual > 0.0:
                rho = actual / predicted
                damping *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
                growth = 2.0
                relative = actual / cost
                cost = new_cost
                trace.append(cost)
                relinearize = True
                self.logger.info(
                    "Iteration %d cost %.9g damping %.3g", iterations, cost, damping
                )
                if relative < config.relative_tolerance:
                    termination, converged = "relative-decrease", True
            else:
                graph.restore(saved)
                damping *= growth
                growth *= 2.0
                relinearize = False
                self.logger.debug("Rejected step %d, damping %.3g", iterations, damping)
                if damping > MAX_DAMPING:
                    termination = "damping"
                    break

        if not converged:
            self.logger.warning(
                "Solver stopped without converging (%s) after %d iterations",
                termination,
                iterations,
            )
        boresight = None
        if graph.boresight is not None and not graph.boresight.fixed:
            boresight = tuple(float(a) for a in graph.boresight.rotation.to_euler())
        return SolveReport(
            iterations=iterations,
            initial_cost=initial_cost,
            final_cost=cost,
            converged=converged,
            termination=termination,
            gradient_norm=gradient_norm,
            damping=damping,
            cost_trace=trace,
            chi2_initial=chi2_initial,
            chi2_final=graph.chi2_by_kind(),
            node_counts=graph.node_counts(),
            edge_counts=graph.edge_counts(),
            boresight=boresight,
            factorization=self.backend,
            elapsed=time.perf_counter() - started,
        )


def solve(graph: FactorGraph, config: Optional[SolverConfig] = None) -> SolveReport:
    """Run Levenberg-Marquardt on a graph and return the report."""
    solver = LevenbergMarquardt(config)
    if cholmod is None and solver.config.use_cholmod:
        solver.logger.warning("CHOLMOD unavailable, using SuperLU with COLAMD ordering")
    return solver.solve(graph)
