# Description: Operator splitting (ADMM) solver for conic programs with box rows and norm balls
# Date: 06-03-2024

import sys
import time

import numpy as np
import scipy.linalg as sla
import scipy.sparse as spspa
import scipy.sparse.linalg as spla

from .program import ConicProgram, SolverConfig, SolverSolution, SolverStatus
from .projections import project_ball, project_box

INFTY = 1e20
MIN_SCALING = 1e-4
MAX_SCALING = 1e4
RHO_MIN = 1e-6
RHO_MAX = 1e6
RHO_EQ_FACTOR = 1e3
RHO_ADAPT_TOL = 5.0
DIVISION_TOL = 1e-20
DENSE_MAX_VARS = 3000
POLISH_START = 1e4
BALL_ACTIVE_TOL = 1e-8


def _inf_norm(v):
    return float(np.max(np.abs(v))) if len(v) else 0.0

def _limit_scaling(v):
    v = np.asarray(v, dtype=float).copy()
    v[v < MIN_SCALING] = 1.0
    return np.minimum(v, MAX_SCALING)

def _col_inf_norm(mat):
    if mat.shape[0] == 0 or mat.nnz == 0:
        return np.zeros(mat.shape[1])
    return abs(mat).max(axis=0).toarray().ravel()

def _row_inf_norm(mat):
    if mat.shape[1] == 0 or mat.nnz == 0:
        return np.zeros(mat.shape[0])
    return abs(mat).max(axis=1).toarray().ravel()


class AdmmSolver():
    """ADMM iteration on

        minimize 1/2 x'Px + q'x   subject to   Ax = z,  z in C

    where C is the box [l, u] on the linear rows times one Euclidean ball per
    ball block (selector rows stacked below A). Data are Ruiz equilibrated and
    rho is adapted from the residual ratio. Once the residuals are within
    POLISH_START of the tolerances the iterate is polished on the guessed
    active set every polish_interval iterations. A point is reported optimal
    only if it also meets every constraint to eps_abs in absolute terms.
    """

    def __init__(self, program: ConicProgram, config: SolverConfig = None) -> None:
        self.program = program
        self.config = config if config is not None else SolverConfig()
        self._setup()

    ### Setup

    def _setup(self):
        prog = self.program
        n = prog.num_vars
        self.n = n
        self.m_lin = prog.num_rows

        selectors, self.ball_rows, radii = [], [], []
        row = self.m_lin
        for ball in prog.ball_blocks:
            k = len(ball.indices)
            selectors.append(spspa.csc_matrix((np.ones(k), (np.arange(k), ball.indices)), shape=(k, n)))
            self.ball_rows.append(slice(row, row + k))
            radii.append(ball.radius)
            row += k
        self.m = row

        A = spspa.vstack([prog.a] + selectors, format='csc') if selectors else prog.a.copy()
        l = np.concatenate([prog.l, np.full(self.m - self.m_lin, -np.inf)])
        u = np.concatenate([prog.u, np.full(self.m - self.m_lin, np.inf)])
        l[l <= -INFTY] = -np.inf
        u[u >= INFTY] = np.inf

        P, q, A, D, E, c = self._equilibrate(prog.p.copy(), prog.q.copy(), A)
        self.P, self.q, self.A = P, q, A
        self.D, self.E, self.c = D, E, c
        self.Dinv, self.Einv = 1.0 / D, 1.0 / E
        self.l = E[:self.m_lin] * l[:self.m_lin]
        self.u = E[:self.m_lin] * u[:self.m_lin]
        self.radii = np.array([E[rows][0] * r for rows, r in zip(self.ball_rows, radii)])

        self.finite_l = np.isfinite(self.l)
        self.finite_u = np.isfinite(self.u)
        self.equality = self.finite_l & self.finite_u & (np.abs(self.u - self.l) < 1e-4 * np.maximum(1.0, np.abs(self.u)))
        self.free = ~self.finite_l & ~self.finite_u

        self.A_lin = self.A[:self.m_lin].tocsr()
        self.dense = n <= DENSE_MAX_VARS
        self._polish_cache = None
        self.rho_base = self.config.step_rho
        self._set_rho(self.rho_base)

    def _equilibrate(self, P, q, A):
        """Modified Ruiz equilibration; ball rows share one row scale so balls stay balls."""
        n, m = P.shape[0], A.shape[0]
        D, E, c = np.ones(n), np.ones(m), 1.0
        for _ in range(self.config.scaling_iter):
            d_tmp = 1.0 / np.sqrt(_limit_scaling(np.maximum(_col_inf_norm(P), _col_inf_norm(A))))
            e_tmp = 1.0 / np.sqrt(_limit_scaling(_row_inf_norm(A))) if m else np.ones(0)
            for rows in self.ball_rows:
                e_tmp[rows] = np.mean(e_tmp[rows])
            Dm = spspa.diags(d_tmp)
            P = (Dm @ P @ Dm).tocsc()
            A = (spspa.diags(e_tmp) @ A @ Dm).tocsc() if m else (A @ Dm).tocsc()
            q = d_tmp * q
            D, E = D * d_tmp, E * e_tmp

            cost = max(np.mean(_col_inf_norm(P)) if n else 0.0, _inf_norm(q))
            c_tmp = 1.0 / _limit_scaling([cost])[0]
            P, q, c = c_tmp * P, c_tmp * q, c * c_tmp
        return P, q, A, D, E, c

    def _set_rho(self, rho):
        rho = float(np.clip(rho, RHO_MIN, RHO_MAX))
        self.rho_base = rho
        vec = np.full(self.m, rho)
        lin = vec[:self.m_lin]
        lin[self.equality] = min(RHO_EQ_FACTOR * rho, RHO_MAX)
        lin[self.free] = RHO_MIN
        self.rho = vec
        self._factorize()

    def _factorize(self):
        """Factor the x-update system. Small programs use the dense reduced
        matrix P + sigma I + A' diag(rho) A, larger ones the sparse KKT matrix."""
        n, sigma = self.n, self.config.sigma
        top = self.P + sigma * spspa.eye(n, format='csc')
        if self.dense:
            reduced = top + self.A.T @ spspa.diags(self.rho) @ self.A if self.m else top
            reduced = reduced.toarray()
            try:
                self._factor = ('cholesky', sla.cho_factor(reduced, lower=True, check_finite=False))
            except sla.LinAlgError:
                self._factor = ('lu', sla.lu_factor(reduced, check_finite=False))
        elif self.m == 0:
            self._factor = ('sparse', spla.splu(top.tocsc()))
        else:
            kkt = spspa.bmat([[top, self.A.T], [self.A, -spspa.diags(1.0 / self.rho)]], format='csc')
            self._factor = ('kkt', spla.splu(kkt))

    def _solve_reduced(self, rhs):
        kind, factor = self._factor
        if kind == 'cholesky':
            return sla.cho_solve(factor, rhs, check_finite=False)
        if kind == 'lu':
            return sla.lu_solve(factor, rhs, check_finite=False)
        return factor.solve(rhs)

    ### Iteration pieces

    def _project(self, v):
        out = np.empty_like(v)
        out[:self.m_lin] = project_box(v[:self.m_lin], self.l, self.u)
        for rows, radius in zip(self.ball_rows, self.radii):
            out[rows] = project_ball(v[rows], radius)
        return out

    def _admm_step(self, x, z, y):
        cfg = self.config
        alpha, sigma = cfg.over_relaxation, cfg.sigma
        if self.m == 0:
            x_tilde = self._solve_reduced(sigma * x - self.q)
            return alpha * x_tilde + (1 - alpha) * x, z, y
        kind, factor = self._factor
        if kind == 'kkt':
            sol = factor.solve(np.concatenate([sigma * x - self.q, z - y / self.rho]))
            x_tilde = sol[:self.n]
            z_tilde = z + (sol[self.n:] - y) / self.rho
        else:
            x_tilde = self._solve_reduced(sigma * x - self.q + self.A.T @ (self.rho * z - y))
            z_tilde = self.A @ x_tilde
        x_new = alpha * x_tilde + (1 - alpha) * x
        z_relax = alpha * z_tilde + (1 - alpha) * z
        z_new = self._project(z_relax + y / self.rho)
        y_new = y + self.rho * (z_relax - z_new)
        return x_new, z_new, y_new

    def _feasible(self, x):
        """Absolute feasibility of the unscaled point, whatever the relative tolerances allow."""
        return self.program.constraint_violation(self.D * x) <= self.config.eps_abs

    def _residuals(self, x, z, y):
        """Unscaled primal/dual residuals and the matching stopping tolerances."""
        cfg = self.config
        Ax = self.A @ x
        Px = self.P @ x
        Aty = self.A.T @ y
        prim = _inf_norm(self.Einv * (Ax - z))
        dual = _inf_norm(self.Dinv * (Px + self.q + Aty)) / self.c
        eps_prim = cfg.eps_abs + cfg.eps_rel * max(_inf_norm(self.Einv * Ax), _inf_norm(self.Einv * z))
        eps_dual = cfg.eps_abs + cfg.eps_rel * max(_inf_norm(self.Dinv * Px), _inf_norm(self.Dinv * Aty),
                                                   _inf_norm(self.Dinv * self.q)) / self.c
        return prim, dual, eps_prim, eps_dual

    def _is_primal_infeasible(self, delta_y):
        eps = self.config.eps_prim_inf
        dy = delta_y.copy()
        lin = dy[:self.m_lin]
        lin[~self.finite_u & (lin > 0)] = 0.0
        lin[~self.finite_l & (lin < 0)] = 0.0
        norm = _inf_norm(self.E * dy)
        if norm <= eps:
            return False
        support = np.sum(np.where(lin > 0, np.where(self.finite_u, self.u, 0.0) * lin, 0.0)) \
            + np.sum(np.where(lin < 0, np.where(self.finite_l, self.l, 0.0) * lin, 0.0))
        for rows, radius in zip(self.ball_rows, self.radii):
            support += radius * np.linalg.norm(dy[rows])
        if support >= -eps * norm:
            return False
        return _inf_norm(self.Dinv * (self.A.T @ dy)) < eps * norm

    def _is_dual_infeasible(self, delta_x):
        eps = self.config.eps_dual_inf
        norm = _inf_norm(self.D * delta_x)
        if norm <= eps:
            return False
        if self.q @ delta_x >= -self.c * eps * norm:
            return False
        if _inf_norm(self.Dinv * (self.P @ delta_x)) >= self.c * eps * norm:
            return False
        Adx = self.Einv * (self.A @ delta_x)
        lin = Adx[:self.m_lin]
        if np.any(self.finite_u & (lin > eps * norm)) or np.any(self.finite_l & (lin < -eps * norm)):
            return False
        for rows in self.ball_rows:
            if _inf_norm(Adx[rows]) > eps * norm:
                return False
        return True

    def _adapt_rho(self, x, z, y):
        Ax, Px, Aty = self.A @ x, self.P @ x, self.A.T @ y
        prim = _inf_norm(Ax - z) / max(_inf_norm(Ax), _inf_norm(z), DIVISION_TOL)
        dual = _inf_norm(Px + self.q + Aty) / max(_inf_norm(Px), _inf_norm(Aty), _inf_norm(self.q), DIVISION_TOL)
        new_rho = np.clip(self.rho_base * np.sqrt(prim / max(dual, DIVISION_TOL)), RHO_MIN, RHO_MAX)
        if new_rho > RHO_ADAPT_TOL * self.rho_base or new_rho < self.rho_base / RHO_ADAPT_TOL:
            self._set_rho(new_rho)

    ### Polishing

    def _active_set(self, z, y):
        zl, yl = z[:self.m_lin], y[:self.m_lin]
        # equality rows always stay in the active set
        low = np.nonzero((zl - self.l < -yl) | (self.equality & (yl <= 0)))[0]
        upp = np.nonzero(self.u - zl < yl)[0]
        return low, upp

    def _polish_system(self, low, upp):
        """Reduced KKT matrix of the active set and its regularized factor, reused while the set is unchanged."""
        key = (low.tobytes(), upp.tobytes())
        if self._polish_cache is not None and self._polish_cache[0] == key:
            return self._polish_cache[1:]
        n, k = self.n, len(low) + len(upp)
        if k:
            A_red = self.A_lin[np.concatenate([low, upp])]
            kkt = spspa.bmat([[self.P, A_red.T], [A_red, None]], format='csc')
        else:
            A_red, kkt = None, self.P.tocsc()
        reg = spspa.diags(np.concatenate([np.full(n, self.config.delta), np.full(k, -self.config.delta)]))
        try:
            factor = spla.splu((kkt + reg).tocsc())
        except RuntimeError:
            factor = None
        self._polish_cache = (key, A_red, kkt, factor)
        return A_red, kkt, factor

    def _polish(self, x, z, y):
        """Equality constrained QP on the guessed active set of the linear rows.

        Refinement starts from the current iterate, so multipliers of redundant
        active rows keep their ADMM values. Returns (x, z, y, prim, dual,
        eps_prim, eps_dual) when the polished point passes the stopping test
        outright, else None.
        """
        cfg = self.config
        for rows, radius in zip(self.ball_rows, self.radii):
            if np.linalg.norm(z[rows]) >= radius * (1.0 - BALL_ACTIVE_TOL):
                return None
        low, upp = self._active_set(z, y)
        active = np.concatenate([low, upp])
        A_red, kkt, factor = self._polish_system(low, upp)
        if factor is None:
            return None
        n = self.n
        rhs = np.concatenate([-self.q, self.l[low], self.u[upp]])
        sol = np.concatenate([x, y[active]])
        for _ in range(cfg.polish_refine_iter):
            sol = sol + factor.solve(rhs - kkt @ sol)
        if not np.all(np.isfinite(sol)):
            return None

        x_pol = sol[:n]
        if len(active) and _inf_norm(self.Einv[active] * (A_red @ x_pol - rhs[n:])) > cfg.eps_abs:
            return None
        y_pol = np.zeros(self.m)
        y_pol[active] = sol[n:]
        lower_only = np.zeros(self.m, dtype=bool)
        lower_only[low] = ~self.equality[low]
        upper_only = np.zeros(self.m, dtype=bool)
        upper_only[upp] = ~self.equality[upp]
        y_pol[lower_only] = np.minimum(y_pol[lower_only], 0.0)
        y_pol[upper_only] = np.maximum(y_pol[upper_only], 0.0)

        z_pol = self._project(self.A @ x_pol)
        prim, dual, eps_prim, eps_dual = self._residuals(x_pol, z_pol, y_pol)
        if prim <= eps_prim and dual <= eps_dual and self._feasible(x_pol):
            return x_pol, z_pol, y_pol, prim, dual, eps_prim, eps_dual
        return None

    ### Main loop

    def solve(self) -> SolverSolution:
        cfg = self.config
        start = time.time()
        x, z, y = np.zeros(self.n), np.zeros(self.m), np.zeros(self.m)
        status = SolverStatus.MAX_ITERATIONS
        prim = dual = np.inf
        eps_prim = eps_dual = 0.0
        polished = False
        last_polish = -cfg.polish_interval

        if cfg.verbose:
            print("csvr admm: variables n = %d, constraints m = %d, balls = %d, %s x-update" % (
                self.n, self.m, len(self.ball_rows), 'dense' if self.dense else 'sparse'), file=sys.stderr)
            print("iter      objective     pri res     dua res        rho", file=sys.stderr)

        iteration = 0
        for iteration in range(1, cfg.max_iter + 1):
            x_new, z_new, y_new = self._admm_step(x, z, y)
            delta_x, delta_y = x_new - x, y_new - y
            x, z, y = x_new, z_new, y_new

            if iteration % cfg.check_interval == 0 or iteration == cfg.max_iter:
                prim, dual, eps_prim, eps_dual = self._residuals(x, z, y)
                if cfg.verbose and iteration % cfg.print_interval == 0:
                    print("%5d %14.6e %11.3e %11.3e %10.2e" % (iteration, self._objective(x), prim, dual, self.rho_base), file=sys.stderr)
                if prim <= eps_prim and dual <= eps_dual and self._feasible(x):
                    status = SolverStatus.OPTIMAL
                    break
                if self.m and self._is_primal_infeasible(delta_y):
                    status = SolverStatus.PRIMAL_INFEASIBLE
                    break
                if self._is_dual_infeasible(delta_x):
                    status = SolverStatus.DUAL_INFEASIBLE
                    break
                if cfg.polish and iteration - last_polish >= cfg.polish_interval \
                        and prim <= POLISH_START * eps_prim and dual <= POLISH_START * eps_dual:
                    last_polish = iteration
                    result = self._polish(x, z, y)
                    if result is not None:
                        x, z, y, prim, dual, eps_prim, eps_dual = result
                        status, polished = SolverStatus.OPTIMAL, True
                        break

            if cfg.adaptive_rho and self.m and iteration % cfg.adaptive_rho_interval == 0:
                self._adapt_rho(x, z, y)

        if cfg.polish and not polished and status in (SolverStatus.OPTIMAL, SolverStatus.MAX_ITERATIONS):
            result = self._polish(x, z, y)
            if result is not None:
                x, z, y, prim, dual, eps_prim, eps_dual = result
                status, polished = SolverStatus.OPTIMAL, True

        z_out = self.D * x
        y_out = self.E * y / self.c
        objective = self.program.objective(z_out)
        if status == SolverStatus.PRIMAL_INFEASIBLE:
            objective = np.inf
        elif status == SolverStatus.DUAL_INFEASIBLE:
            objective = -np.inf

        if cfg.verbose:
            print("csvr admm: %s after %d iterations%s, objective %.6e" % (status.value, iteration, ' (polished)' if polished else '', objective), file=sys.stderr)

        return SolverSolution(z=z_out, objective=objective, status=status, iterations=iteration,
                              primal_residual=prim, dual_residual=dual, eps_primal=eps_prim, eps_dual=eps_dual,
                              y=y_out[:self.m_lin], polished=polished, runtime=time.time() - start, backend='admm')

    def _objective(self, x):
        return float(0.5 * x @ (self.P @ x) + self.q @ x) / self.c
