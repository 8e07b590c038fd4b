# Description: Reference backend built on scipy.optimize, used as the oracle for the ADMM solver
# Date: 07-03-2024

import time

import numpy as np
from scipy.optimize import linprog, minimize

from .backends import SolverBackend
from .program import ConicProgram, SolverConfig, SolverSolution, SolverStatus

SLSQP_MAXITER = 5000
SLSQP_FTOL = 1e-12
FEAS_TOL = 1e-6
HIGHS_TOL = 1e-10


def _row_sets(program):
    lower = np.isfinite(program.l)
    upper = np.isfinite(program.u)
    eq = lower & upper & (program.l == program.u)
    return eq, lower & ~eq, upper & ~eq


class ReferenceBackend(SolverBackend):
    """HiGHS linprog for linear programs, SLSQP for everything else.

    Slow and dense. Meant for small programs where an independent answer is
    worth more than speed.
    """

    @staticmethod
    def name() -> str:
        return 'reference'

    def solve(self, program: ConicProgram, config: SolverConfig) -> SolverSolution:
        start = time.time()
        if program.p.nnz == 0 and not program.ball_blocks:
            z, status, iterations = self._solve_lp(program)
        else:
            z, status, iterations = self._solve_nlp(program)

        if status == SolverStatus.OPTIMAL:
            objective = program.objective(z)
        elif status == SolverStatus.PRIMAL_INFEASIBLE:
            objective = np.inf
        elif status == SolverStatus.DUAL_INFEASIBLE:
            objective = -np.inf
        else:
            objective = program.objective(z)
        viol = program.constraint_violation(z) if np.all(np.isfinite(z)) else np.inf
        return SolverSolution(z=z, objective=objective, status=status, iterations=iterations,
                              primal_residual=viol, dual_residual=0.0, runtime=time.time() - start,
                              backend=self.name())

    def _solve_lp(self, program):
        eq, low, upp = _row_sets(program)
        a = program.a.tocsr()
        a_ub = None
        b_ub = None
        if np.any(low) or np.any(upp):
            from scipy.sparse import vstack
            a_ub = vstack([a[upp], -a[low]], format='csr')
            b_ub = np.concatenate([program.u[upp], -program.l[low]])
        a_eq = a[eq] if np.any(eq) else None
        b_eq = program.l[eq] if np.any(eq) else None
        result = linprog(program.q, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                         bounds=[(None, None)] * program.num_vars, method='highs',
                         options={'primal_feasibility_tolerance': HIGHS_TOL, 'dual_feasibility_tolerance': HIGHS_TOL})
        statuses = {0: SolverStatus.OPTIMAL, 1: SolverStatus.MAX_ITERATIONS,
                    2: SolverStatus.PRIMAL_INFEASIBLE, 3: SolverStatus.DUAL_INFEASIBLE}
        status = statuses.get(result.status, SolverStatus.MAX_ITERATIONS)
        z = result.x if result.x is not None else np.full(program.num_vars, np.nan)
        return np.asarray(z, dtype=float), status, int(getattr(result, 'nit', 0))

    def _solve_nlp(self, program):
        eq, low, upp = _row_sets(program)
        a = program.a.tocsr()
        p = program.p.toarray()
        q = program.q

        constraints = []
        if np.any(eq):
            a_eq, b_eq = a[eq].toarray(), program.l[eq]
            constraints.append({'type': 'eq', 'fun': lambda z: a_eq @ z - b_eq, 'jac': lambda z: a_eq})
        if np.any(low):
            a_lo, b_lo = a[low].toarray(), program.l[low]
            constraints.append({'type': 'ineq', 'fun': lambda z: a_lo @ z - b_lo, 'jac': lambda z: a_lo})
        if np.any(upp):
            a_up, b_up = a[upp].toarray(), program.u[upp]
            constraints.append({'type': 'ineq', 'fun': lambda z: b_up - a_up @ z, 'jac': lambda z: -a_up})
        for ball in program.ball_blocks:
            constraints.append(_ball_constraint(ball, program.num_vars))

        result = minimize(lambda z: 0.5 * z @ p @ z + q @ z, np.zeros(program.num_vars),
                          jac=lambda z: p @ z + q, constraints=constraints, method='SLSQP',
                          options={'ftol': SLSQP_FTOL, 'maxiter': SLSQP_MAXITER})
        z = np.asarray(result.x, dtype=float)
        if result.status == 0:
            status = SolverStatus.OPTIMAL
        elif result.status == 4 and program.constraint_violation(z) > FEAS_TOL:
            status = SolverStatus.PRIMAL_INFEASIBLE
        elif result.status == 9:
            status = SolverStatus.MAX_ITERATIONS
        elif program.constraint_violation(z) <= FEAS_TOL:
            # SLSQP sometimes stops on a line search at the optimum
            status = SolverStatus.OPTIMAL
        else:
            status = SolverStatus.MAX_ITERATIONS
        return z, status, int(result.nit)


def _ball_constraint(ball, nvar):
    idx, radius = ball.indices, ball.radius

    def fun(z):
        return np.array([radius**2 - z[idx] @ z[idx]])

    def jac(z):
        grad = np.zeros((1, nvar))
        grad[0, idx] = -2.0 * z[idx]
        return grad

    return {'type': 'ineq', 'fun': fun, 'jac': jac}
