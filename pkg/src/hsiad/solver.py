"""Joint collaborative representation solvers with per-pixel simplex constraints.

Every pixel is approximated as a dictionary combination whose coefficients
are nonnegative and sum to one:

    min_A ||X - D A||_F^2 + (lam/2) ||A||_F^2
    s.t.  A^T 1_K = 1_N,  A >= 0.

An extended ADMM handles the constraints with a nonnegative slack copy omega
of A (multiplier Delta) and one multiplier eta per column for the sum
constraint.  The kernel variant runs the same iteration on Gram matrices;
with the linear kernel it reproduces the direct solver exactly because both
go through one shared core.  Residual scoring reconstructs pixels from the
background atoms only, so anomalies score high.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh

from .core import PixelMatrix, ScoreMap, _freeze
from .dictionary import UnionDictionary
from .errors import NumericError

__all__ = [
    "SolverConfig",
    "CoefficientMatrix",
    "AdmmState",
    "KernelCache",
    "SolveResult",
    "cr_closed_form",
    "rbf_gram",
    "kernel_cache",
    "solve_njcr",
    "solve_knjcr",
    "score_njcr",
    "score_knjcr",
]

_KERNELS = ("linear", "rbf")


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters; ``sigma`` only matters for the rbf kernel."""

    lam: float = 0.5
    rho: float = 1.0
    epsilon: float = 1e-4
    max_iter: int = 1000
    kernel: str = "linear"
    sigma: float = 4.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.kernel not in _KERNELS:
            raise ValueError(f"kernel must be one of {_KERNELS}, got {self.kernel!r}")
        if self.kernel == "rbf" and not self.sigma > 0:
            raise ValueError(f"sigma must be positive for rbf, got {self.sigma}")


@dataclass(frozen=True)
class CoefficientMatrix:
    """K x N representation coefficients, one column per pixel."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 2:
            raise ValueError("coefficients must form a 2-D matrix")
        if not np.all(np.isfinite(d)):
            raise ValueError("coefficients must be finite")
        _freeze(self, "data", d.copy())

    @property
    def k_total(self) -> int:
        return self.data.shape[0]

    @property
    def column_sums(self) -> np.ndarray:
        return self.data.sum(axis=0)


@dataclass(frozen=True)
class AdmmState:
    """Snapshot of the solver variables at termination.

    When a constraint is disabled its block is identically zero: omega and
    Delta for a run without the nonnegativity slack, eta for a run without
    the sum constraint.
    """

    A: np.ndarray
    omega: np.ndarray
    Delta: np.ndarray
    eta: np.ndarray
    iter: int
    primal_residual_norm: float
    dual_residual_norm: float

    def __post_init__(self):
        a = np.asarray(self.A, dtype=np.float64)
        om = np.asarray(self.omega, dtype=np.float64)
        de = np.asarray(self.Delta, dtype=np.float64)
        et = np.asarray(self.eta, dtype=np.float64)
        if a.ndim != 2 or om.shape != a.shape or de.shape != a.shape:
            raise ValueError("A, omega, Delta must share one K x N shape")
        if et.shape != (a.shape[1],):
            raise ValueError("eta must hold one multiplier per column")
        if (om < 0).any():
            raise ValueError("omega must be nonnegative")
        if self.iter < 0:
            raise ValueError("iteration count must be nonnegative")
        _freeze(self, "A", a)
        _freeze(self, "omega", om)
        _freeze(self, "Delta", de)
        _freeze(self, "eta", et)


@dataclass(frozen=True)
class KernelCache:
    """Gram matrices of one (dictionary, scene) pair under one kernel."""

    kind: str
    k_background: int
    K_DD: np.ndarray
    K_DX: np.ndarray
    k_diag_x: np.ndarray

    def __post_init__(self):
        if self.kind not in _KERNELS:
            raise ValueError(f"kernel must be one of {_KERNELS}, got {self.kind!r}")
        g = np.asarray(self.K_DD, dtype=np.float64)
        c = np.asarray(self.K_DX, dtype=np.float64)
        d = np.asarray(self.k_diag_x, dtype=np.float64)
        k = g.shape[0]
        if g.shape != (k, k):
            raise ValueError("K_DD must be square")
        if c.ndim != 2 or c.shape[0] != k:
            raise ValueError("K_DX must have one row per dictionary atom")
        if d.shape != (c.shape[1],):
            raise ValueError("k_diag_x must hold one entry per pixel")
        if not 0 <= self.k_background <= k:
            raise ValueError("k_background out of range")
        if not np.allclose(g, g.T, rtol=1e-10, atol=1e-12):
            raise ValueError("K_DD must be symmetric")
        eigs = eigvalsh(g)
        if eigs[0] < -1e-10 * max(1.0, abs(float(eigs[-1]))):
            raise ValueError("K_DD must be positive semidefinite")
        if self.kind == "rbf" and not np.allclose(np.diag(g), 1.0, atol=1e-10):
            raise ValueError("rbf Gram diagonal must be 1")
        _freeze(self, "K_DD", g)
        _freeze(self, "K_DX", c)
        _freeze(self, "k_diag_x", d)

    @property
    def k_total(self) -> int:
        return self.K_DD.shape[0]

    @property
    def K_BB(self) -> np.ndarray:
        return self.K_DD[: self.k_background, : self.k_background]

    @property
    def K_BX(self) -> np.ndarray:
        return self.K_DX[: self.k_background]


@dataclass(frozen=True)
class SolveResult:
    """Final coefficients plus the convergence record."""

    coefficients: CoefficientMatrix
    state: AdmmState
    converged: bool
    primal_history: np.ndarray
    dual_history: np.ndarray

    def __post_init__(self):
        ph = np.asarray(self.primal_history, dtype=np.float64)
        dh = np.asarray(self.dual_history, dtype=np.float64)
        if ph.shape != dh.shape or ph.ndim != 1:
            raise ValueError("residual histories must be 1-D and equally long")
        _freeze(self, "primal_history", ph)
        _freeze(self, "dual_history", dh)

    @property
    def iterations(self) -> int:
        return self.state.iter


def cr_closed_form(x: np.ndarray, D: np.ndarray, lam: float) -> np.ndarray:
    """Unconstrained ridge representation (D^T D + lam I)^-1 D^T x.

    Serves as reference solution and as the constraint-free model variant.
    ``x`` may be a single spectrum or a matrix of column spectra.
    """
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    d = np.asarray(D, dtype=np.float64)
    if d.ndim != 2:
        raise ValueError("D must be an (L, K) matrix")
    v = np.asarray(x, dtype=np.float64)
    gram = d.T @ d
    gram = 0.5 * (gram + gram.T)
    try:
        factor = cho_factor(gram + lam * np.eye(d.shape[1]), lower=True)
    except LinAlgError as exc:
        raise NumericError(
            "normal equations are singular; lam=0 needs full column rank"
        ) from exc
    return cho_solve(factor, d.T @ v)


def rbf_gram(P: np.ndarray, Q: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian kernel matrix exp(-||p_i - q_j||^2 / (2 sigma^2)).

    Passing the same array object for both sides yields an exactly symmetric
    matrix with unit diagonal.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    p = np.asarray(P, dtype=np.float64)
    q = np.asarray(Q, dtype=np.float64)
    if p.ndim != 2 or q.ndim != 2 or p.shape[0] != q.shape[0]:
        raise ValueError("P and Q must be 2-D with matching row counts")
    sp = np.sum(p * p, axis=0)
    sq = np.sum(q * q, axis=0)
    d2 = sp[:, None] + sq[None, :] - 2.0 * (p.T @ q)
    np.maximum(d2, 0.0, out=d2)
    if p is q:
        np.fill_diagonal(d2, 0.0)
    out = np.exp(-d2 / (2.0 * sigma * sigma))
    if p is q:
        out = 0.5 * (out + out.T)
        np.fill_diagonal(out, 1.0)
    return out


def kernel_cache(
    D: UnionDictionary,
    X: PixelMatrix,
    kernel: str = "linear",
    sigma: float | None = None,
) -> KernelCache:
    """Precompute the Gram matrices one solve and one scoring pass need."""
    if D.atoms.shape[0] != X.bands:
        raise ValueError(
            f"dictionary has {D.atoms.shape[0]} bands but pixels have {X.bands}"
        )
    if kernel == "linear":
        g = D.atoms.T @ D.atoms
        g = 0.5 * (g + g.T)
        c = D.atoms.T @ X.data
        diag = np.einsum("ij,ij->j", X.data, X.data)
    elif kernel == "rbf":
        if sigma is None or not sigma > 0:
            raise ValueError(f"rbf kernel needs positive sigma, got {sigma}")
        g = rbf_gram(D.atoms, D.atoms, sigma)
        c = rbf_gram(D.atoms, X.data, sigma)
        diag = np.ones(X.cols)
    else:
        raise ValueError(f"kernel must be one of {_KERNELS}, got {kernel!r}")
    return KernelCache(kernel, D.k_background, g, c, diag)


def _admm_core(G, C, cfg: SolverConfig, nonneg: bool, sum_to_one: bool):
    """Shared iteration on Gram inputs; returns the final state and histories.

    Update order per iteration: coefficients A, slack omega (projection onto
    the nonnegative orthant), multiplier Delta, multiplier eta.  Stops when
    both residual norms drop to epsilon.  Disabled constraints drop their
    blocks from the updates and the residuals; with neither constraint the
    ridge solution is returned in closed form.
    """
    k, n = C.shape
    lam, rho = cfg.lam, cfg.rho

    ridge = lam + (rho if nonneg else 0.0)
    system = 2.0 * G + ridge * np.eye(k)
    try:
        factor = cho_factor(system, lower=True)
    except LinAlgError as exc:
        raise NumericError(
            "system matrix is not positive definite; "
            "lam or rho must be positive (or G full rank)"
        ) from exc

    if sum_to_one:
        ones = np.ones(k)
        u = cho_solve(factor, ones)
        denom = 1.0 + rho * float(u.sum())

    def solve_system(rhs):
        # (system + rho 1 1^T)^-1 rhs via the cached factor and one
        # rank-one correction.
        z = cho_solve(factor, rhs)
        if sum_to_one:
            z -= np.outer(u, (rho / denom) * z.sum(axis=0))
        return z

    if not nonneg and not sum_to_one:
        A = solve_system(2.0 * C)
        zero = np.zeros_like(A)
        return A, zero, zero, np.zeros(n), 1, 0.0, 0.0, [0.0], [0.0], True

    A = np.zeros((k, n))
    omega = np.zeros((k, n))
    Delta = np.zeros((k, n))
    eta = np.zeros(n)
    primal_hist: list[float] = []
    dual_hist: list[float] = []
    r_norm = np.inf
    s_norm = np.inf
    it = 0
    converged = False
    while it < cfg.max_iter:
        it += 1
        rhs = 2.0 * C
        if nonneg:
            rhs = rhs - rho * (Delta - omega)
        if sum_to_one:
            rhs = rhs - rho * (eta[None, :] - 1.0)
        A_new = solve_system(rhs)

        primal_sq = 0.0
        dual_sq = 0.0
        if nonneg:
            omega_new = np.maximum(A_new + Delta, 0.0)
            Delta = Delta + A_new - omega_new
            diff = A_new - omega_new
            primal_sq += float(np.vdot(diff, diff))
            step = omega_new - omega
            dual_sq += rho * rho * float(np.vdot(step, step))
            omega = omega_new
        else:
            # No slack block: track stationarity through the iterate change.
            step = A_new - A
            dual_sq += rho * rho * float(np.vdot(step, step))
        if sum_to_one:
            col = A_new.sum(axis=0) - 1.0
            eta = eta + col
            primal_sq += float(np.vdot(col, col))
        A = A_new
        r_norm = float(np.sqrt(primal_sq))
        s_norm = float(np.sqrt(dual_sq))
        primal_hist.append(r_norm)
        dual_hist.append(s_norm)
        if r_norm <= cfg.epsilon and s_norm <= cfg.epsilon:
            converged = True
            break

    return A, omega, Delta, eta, it, r_norm, s_norm, primal_hist, dual_hist, converged


def _solve_from_cache(
    cache: KernelCache, cfg: SolverConfig, nonneg: bool, sum_to_one: bool
) -> SolveResult:
    A, omega, Delta, eta, it, r, s, ph, dh, ok = _admm_core(
        cache.K_DD, cache.K_DX, cfg, nonneg, sum_to_one
    )
    state = AdmmState(A, omega, Delta, eta, it, r, s)
    return SolveResult(CoefficientMatrix(A), state, ok, np.array(ph), np.array(dh))


def solve_njcr(
    X: PixelMatrix,
    D: UnionDictionary,
    cfg: SolverConfig,
    *,
    nonneg: bool = True,
    sum_to_one: bool = True,
) -> SolveResult:
    """Solve the joint model on raw spectra.

    The kernel fields of ``cfg`` are ignored here; this is the inner-product
    form.  The constraint switches exist for ablation runs.
    """
    cache = kernel_cache(D, X, "linear")
    return _solve_from_cache(cache, cfg, nonneg, sum_to_one)


def solve_knjcr(
    X: PixelMatrix,
    D: UnionDictionary,
    cfg: SolverConfig,
    *,
    nonneg: bool = True,
    sum_to_one: bool = True,
    cache: KernelCache | None = None,
) -> SolveResult:
    """Solve the kernelized model; cfg.kernel selects the Gram computation.

    With kernel="linear" this reproduces solve_njcr exactly (identical code
    path on identical Gram inputs).  A prebuilt matching cache may be passed
    to avoid recomputing Gram matrices.
    """
    if cache is None:
        cache = kernel_cache(D, X, cfg.kernel, cfg.sigma)
    else:
        if cache.kind != cfg.kernel:
            raise ValueError(
                f"cache was built for kernel {cache.kind!r}, config says {cfg.kernel!r}"
            )
        if cache.k_total != D.k_total or cache.K_DX.shape[1] != X.cols:
            raise ValueError("cache dimensions do not match dictionary and scene")
    return _solve_from_cache(cache, cfg, nonneg, sum_to_one)


def _coefficient_array(A, k_total: int, n: int) -> np.ndarray:
    data = A.data if isinstance(A, CoefficientMatrix) else np.asarray(A, dtype=np.float64)
    if data.shape != (k_total, n):
        raise ValueError(
            f"coefficients are {data.shape}, expected ({k_total}, {n})"
        )
    return data


def score_njcr(X: PixelMatrix, D: UnionDictionary, A) -> ScoreMap:
    """Residual against the background atoms only: ||x - D_B a_B||_2.

    Anomaly-atom coefficients are excluded from the reconstruction, so a
    pixel explained by anomaly atoms keeps a large background residual.
    """
    if D.atoms.shape[0] != X.bands:
        raise ValueError(
            f"dictionary has {D.atoms.shape[0]} bands but pixels have {X.bands}"
        )
    data = _coefficient_array(A, D.k_total, X.cols)
    resid = X.data - D.background_atoms @ data[: D.k_background]
    scores = np.sqrt(np.einsum("ij,ij->j", resid, resid))
    return ScoreMap(X.width, X.height, scores.reshape(X.height, X.width))


def score_knjcr(
    X: PixelMatrix,
    D: UnionDictionary,
    A_phi,
    cfg: SolverConfig,
    *,
    cache: KernelCache | None = None,
) -> ScoreMap:
    """Feature-space background residual via the Gram expansion.

    score^2 = k(x,x) - 2 k_Bx^T a_B + a_B^T K_BB a_B, clamped at zero
    before the square root to absorb roundoff.
    """
    if cache is None:
        cache = kernel_cache(D, X, cfg.kernel, cfg.sigma)
    data = _coefficient_array(A_phi, cache.k_total, X.cols)
    a_b = data[: cache.k_background]
    s2 = (
        cache.k_diag_x
        - 2.0 * np.einsum("ij,ij->j", cache.K_BX, a_b)
        + np.einsum("ij,ij->j", a_b, cache.K_BB @ a_b)
    )
    np.maximum(s2, 0.0, out=s2)
    return ScoreMap(X.width, X.height, np.sqrt(s2).reshape(X.height, X.width))
