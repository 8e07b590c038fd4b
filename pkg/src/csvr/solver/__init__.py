from .program import BallBlock, ConicProgram, SolverConfig, SolverSolution, SolverStatus
from .projections import project_ball, project_box
from .backends import AdmmBackend, SolverBackend, get_backend, solve
from .reference import ReferenceBackend
from .dump import dump_program, load_program
