"""Range-restricted GMRES with NR-SSOR right preconditioning."""

from .errors import (
    ContractError,
    DegenerateInputError,
    ParseError,
    PreconditionerError,
    RRKrylovError,
    StructuralError,
)
from .kernels import BACKEND
from .krylov import Method, SolveOutcome, SolverOptions, Status, ab_solve, extract_hessenberg, gmres, rrgmres
from .precond import Kind, RightPreconditioner
from .sparse import (
    SparseMatrixCSR,
    compact,
    from_coordinates,
    from_dense,
    matvec,
    matvec_transpose,
    read_matrix_market,
    write_matrix_market,
)

__version__ = "0.1.0"
