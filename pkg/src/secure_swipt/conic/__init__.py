"""Dense conic interior-point solver used by the beamforming designs."""
from .cones import ConeDims, smat, svec
from .ipm import ConeProgram, ConeSolution, SolverOptions, solve_cone_program
from .kernels import BACKEND

__all__ = ["BACKEND", "ConeDims", "ConeProgram", "ConeSolution", "SolverOptions", "smat", "solve_cone_program", "svec"]
