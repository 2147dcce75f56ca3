"""Small numerical kernel used by the test statistics and the simulator.

Moments and covariances in unbiased and maximum-likelihood flavors,
Kronecker products, symmetric-matrix inverse and inverse square root,
chi-squared and standard-normal distribution functions, midranks, and
deterministic per-task random streams.
"""

import numpy as np
from scipy import special, stats

from .errors import DegenerateDataError, SingularMatrixError

__all__ = [
    "rng_stream",
    "column_mean",
    "column_var",
    "cov_matrix",
    "kronecker",
    "inverse",
    "inv_sqrt",
    "chi2_sf",
    "chi2_quantile",
    "normal_cdf",
    "normal_quantile",
    "ranks",
]


def rng_stream(master_seed: int, *labels: int) -> np.random.Generator:
    """Deterministic random generator for one logical task.

    The stream is a pure function of ``(master_seed, labels)``: the same
    arguments give the same sequence on every platform and regardless of
    how many other streams are drawn from concurrently.  Labels must be
    non-negative integers (e.g. scenario hash, replication index,
    purpose tag).
    """
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(labels))
    return np.random.Generator(np.random.Philox(seq))


def _check_mode(mode: str) -> int:
    if mode == "unbiased":
        return 1
    if mode == "ml":
        return 0
    raise ValueError(f"mode must be 'unbiased' or 'ml', got {mode!r}")


def column_mean(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 1:
        raise DegenerateDataError("mean requires at least one value")
    return float(x.mean())


def column_var(x, mode: str = "unbiased") -> float:
    """Sample variance; divides by n-1 ("unbiased") or n ("ml")."""
    ddof = _check_mode(mode)
    x = np.asarray(x, dtype=float)
    if x.size < 1 + ddof:
        raise DegenerateDataError(f"variance ({mode}) requires n >= {1 + ddof}")
    return float(x.var(ddof=ddof))


def cov_matrix(columns, mode: str = "unbiased") -> np.ndarray:
    """Covariance matrix of column variables.

    Parameters
    ----------
    columns : array-like, shape (n, m)
        Observations in rows, variables in columns.
    mode : {"unbiased", "ml"}
        Divisor n-1 or n.

    Returns
    -------
    (m, m) ndarray, symmetric.
    """
    ddof = _check_mode(mode)
    a = np.asarray(columns, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    n = a.shape[0]
    if n < 2:
        raise DegenerateDataError("covariance requires n >= 2")
    c = np.cov(a, rowvar=False, ddof=ddof)
    return np.atleast_2d(c)


def kronecker(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two symmetric matrices.

    (A (x) B)[(u-1)k2+v, (u'-1)k2+v'] = A[u,u'] * B[v,v'].
    """
    a = np.atleast_2d(np.asarray(a, float))
    b = np.atleast_2d(np.asarray(b, float))
    _require_symmetric(a)
    _require_symmetric(b)
    return np.kron(a, b)


# Positive-definiteness threshold: scale-aware, floored so near-zero
# matrices are still flagged.
def _pd_threshold(eigenvalues: np.ndarray) -> float:
    return 1e-10 * max(float(eigenvalues.max(initial=0.0)), 1.0)


def _require_symmetric(a: np.ndarray, rtol: float = 1e-12) -> None:
    scale = max(float(np.abs(a).max(initial=0.0)), 1.0)
    if a.shape[0] != a.shape[1] or np.abs(a - a.T).max(initial=0.0) > rtol * scale:
        raise ValueError("matrix is not symmetric")


def spd_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric positive-definite matrix.

    Returns (eigenvalues, eigenvectors).  Raises SingularMatrixError if
    any eigenvalue falls at or below the scale-aware threshold; degenerate
    data (a constant column, a response indicator without variation, or
    perfectly correlated columns) surfaces here.
    """
    a = np.atleast_2d(np.asarray(a, float))
    _require_symmetric(a)
    w, v = np.linalg.eigh(a)
    if w.min() <= _pd_threshold(w):
        raise SingularMatrixError(
            f"matrix is singular or not positive definite "
            f"(smallest eigenvalue {w.min():.3e})",
            eigenvalue=float(w.min()),
        )
    return w, v


def inverse(a: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive-definite matrix."""
    w, v = spd_eigh(a)
    return (v / w) @ v.T


def inv_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric inverse square root: inv_sqrt(A) @ inv_sqrt(A) @ A = I."""
    w, v = spd_eigh(a)
    return (v / np.sqrt(w)) @ v.T


def chi2_sf(x, df: int):
    """Chi-squared survival function via the regularized upper incomplete gamma."""
    if df < 1 or int(df) != df:
        raise ValueError(f"df must be a positive integer, got {df}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("chi2_sf requires x >= 0")
    out = special.gammaincc(df / 2.0, x / 2.0)
    return float(out) if out.ndim == 0 else out


def chi2_quantile(p, df: int):
    """Inverse of the chi-squared CDF."""
    if df < 1 or int(df) != df:
        raise ValueError(f"df must be a positive integer, got {df}")
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("chi2_quantile requires p in (0, 1)")
    out = 2.0 * special.gammainccinv(df / 2.0, 1.0 - p)
    return float(out) if out.ndim == 0 else out


def normal_cdf(x):
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def normal_quantile(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("normal_quantile requires p in (0, 1)")
    out = special.ndtri(p)
    return float(out) if out.ndim == 0 else out


def ranks(x) -> np.ndarray:
    """Midranks in [1, n]; ties receive the average of the ranks they cover."""
    x = np.asarray(x, dtype=float)
    if x.size < 1:
        raise DegenerateDataError("ranks require at least one value")
    return stats.rankdata(x, method="average")
