# Description: Pluggable solver backends and the solve() entry point
# Date: 07-03-2024

import sys
from abc import ABC, abstractmethod
from dataclasses import replace

from ..core import InvalidArgumentError
from .program import ConicProgram, SolverConfig, SolverSolution, SolverStatus

FALLBACK_MAX_VARS = 200


class SolverBackend(ABC):
    """
    A solver backend turns a ConicProgram into a SolverSolution. Infeasible
    and unbounded programs are reported through the status, never raised.
    """

    @staticmethod
    @abstractmethod
    def name() -> str:
        """keyword used to select the backend"""
        pass

    @abstractmethod
    def solve(self, program: ConicProgram, config: SolverConfig) -> SolverSolution:
        pass


class AdmmBackend(SolverBackend):
    @staticmethod
    def name() -> str:
        return 'admm'

    def solve(self, program, config):
        from .admm import AdmmSolver
        solution = AdmmSolver(program, config).solve()
        if solution.status == SolverStatus.MAX_ITERATIONS and config.fallback and _has_fallback(program):
            from .reference import ReferenceBackend
            backup = ReferenceBackend().solve(program, config)
            if backup.is_optimal and program.constraint_violation(backup.z) <= config.eps_abs:
                if config.verbose:
                    print(f"csvr: admm stopped at {solution.iterations} iterations, reference backend answered", file=sys.stderr)
                return replace(backup, iterations=solution.iterations + backup.iterations,
                               runtime=solution.runtime + backup.runtime, backend='admm+reference')
        return solution


def _has_fallback(program):
    """Linear programs go to HiGHS at any size, small programs to SLSQP."""
    return (program.p.nnz == 0 and not program.ball_blocks) or program.num_vars <= FALLBACK_MAX_VARS


def _registry():
    from .reference import ReferenceBackend
    return {AdmmBackend.name(): AdmmBackend, ReferenceBackend.name(): ReferenceBackend}

def get_backend(backend=None) -> SolverBackend:
    """Backend instance from a name, an instance, or None (ADMM)."""
    if backend is None:
        return AdmmBackend()
    if isinstance(backend, SolverBackend):
        return backend
    backends = _registry()
    if backend not in backends:
        raise InvalidArgumentError(f"unknown solver backend '{backend}', expected one of {sorted(backends)}")
    return backends[backend]()

def solve(program: ConicProgram, config: SolverConfig = None, backend=None) -> SolverSolution:
    """Solve the program with the chosen backend (ADMM by default)."""
    if not isinstance(program, ConicProgram):
        raise InvalidArgumentError("solve expects a ConicProgram")
    if config is None:
        config = SolverConfig()
    return get_backend(backend).solve(program, config)
