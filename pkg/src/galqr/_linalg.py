from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

JITTER = 1e-10


def draw_mvn_precision(prec, rhs, rng):
    """Draw from N(prec^-1 rhs, prec^-1).

    Returns ``(draw, jittered)``; a ``JITTER`` ridge is added to the diagonal
    when the Cholesky factorization fails.
    """
    jittered = False
    try:
        chol = cholesky(prec, lower=True, check_finite=False)
    except LinAlgError:
        jittered = True
        chol = cholesky(prec + JITTER * np.eye(prec.shape[0]), lower=True, check_finite=False)
    mean = cho_solve((chol, True), rhs, check_finite=False)
    z = rng.standard_normal(rhs.shape[0])
    return mean + solve_triangular(chol.T, z, lower=False, check_finite=False), jittered


def conditional_mean(prec, rhs):
    chol = cholesky(prec, lower=True, check_finite=False)
    return cho_solve((chol, True), rhs, check_finite=False)
