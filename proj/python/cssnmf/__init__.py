"""Convex smooth-separable NMF (CSSNMF) bindings.

Matrices are float64 numpy arrays; index lists are 0-based.
"""

from ._core import (
    DataError,
    InvalidArgument,
    NumericalError,
    accuracy,
    aggregate,
    certificate,
    cssnmf,
    fgm_solve,
    fgnsr,
    gen_dirichlet,
    gen_midpoints,
    gen_outliers,
    gradient,
    kappa,
    nnls,
    objective,
    project_omega,
    rel_approx_error,
    rel_w_error,
    select_rows,
    spa,
    spectral_cluster,
    sspa,
)

__all__ = [
    "DataError",
    "InvalidArgument",
    "NumericalError",
    "accuracy",
    "aggregate",
    "certificate",
    "cssnmf",
    "fgm_solve",
    "fgnsr",
    "gen_dirichlet",
    "gen_midpoints",
    "gen_outliers",
    "gradient",
    "kappa",
    "nnls",
    "objective",
    "project_omega",
    "rel_approx_error",
    "rel_w_error",
    "select_rows",
    "spa",
    "spectral_cluster",
    "sspa",
]
__version__ = "0.1.0"
