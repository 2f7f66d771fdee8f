"""Online error estimates, coercivity bounds, and effectivity statistics.

Certified estimates multiply the primal residual dual norm by the
worst-case dual-residual factor and divide by a coercivity lower bound
alpha(xi); for generated symmetric coercive problems alpha comes from the
min-theta bound.  The saddle variant replaces the residual at the primal
projection by the minimum of the residual over the enriched space (spd
form) or by the residual at the corrected point (general form), and the
dual factor by the minimized one, which tightens the estimate.

When alpha is out of reach, surrogate estimates drop the 1/alpha factor
and optionally precondition the primal residual with an interpolated
operator inverse; these are not certified and are tagged as such.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from ._linalg import eig_extreme
from .exceptions import UnsupportedModelError
from .projectors import ReducedCache

__all__ = [
    "EstimateRecord",
    "EffectivityReport",
    "alpha_min_theta",
    "estimate_primal_dual",
    "estimate_saddle",
    "estimate_preconditioned",
    "select_output_direction",
    "effectivity_report",
]


@dataclass
class EstimateRecord:
    """One online error estimate and its factors."""

    xi: np.ndarray
    delta: float
    primal_factor: float
    dual_factor: float
    alpha: float | None
    method: str
    certified: bool


@dataclass
class EffectivityReport:
    """Statistics of the effectivity index eta = estimate / true error."""

    mean: float
    maxmin_ratio: float
    nstd: float
    n_included: int
    n_excluded: int
    hist_edges: np.ndarray
    hist_counts: np.ndarray


def alpha_min_theta(model, xi):
    """Min-theta coercivity lower bound: min_k theta_k(xi) / theta_k(xi_ref).

    Valid when the model declares ``coercive_affine`` (positive operator
    coefficients, SPSD terms) and R_V0 equals A(xi_ref); both are checked.
    """
    if not model.coercive_affine:
        raise UnsupportedModelError(
            "min-theta needs a coercive-affine model; supply alpha "
            "explicitly or use a surrogate estimate"
        )
    Aref = model.A(model.xi_ref)
    diff = Aref - model.gram_v0
    num = sp.linalg.norm(diff) if sp.issparse(diff) else np.linalg.norm(diff)
    den = sp.linalg.norm(Aref) if sp.issparse(Aref) else np.linalg.norm(Aref)
    if num > 1e-10 * den:
        raise UnsupportedModelError(
            "min-theta needs gram_v0 = A(xi_ref); this model deviates by "
            f"{num / den:.2e} relative"
        )
    t_xi = model.A.coefficients_at(xi)
    t_ref = model.A.coefficients_at(model.xi_ref)
    if np.any(t_ref <= 0.0) or np.any(t_xi <= 0.0):
        raise UnsupportedModelError("min-theta needs positive coefficients")
    return float(np.min(t_xi / t_ref))


def _dual_sup(model, matrix):
    """sqrt of the largest eigenvalue of an output-space Gram against R_Z'."""
    lam, _, _ = eig_extreme(matrix, la.inv(model.gram_z), largest=True)
    return float(np.sqrt(max(float(lam), 0.0)))


def estimate_primal_dual(model, xi, cache, sol, alpha):
    """Certified estimate: primal residual x dual operator norm / alpha."""
    if alpha is None:
        raise UnsupportedModelError(
            "alpha is unavailable; use estimate_preconditioned for the "
            "surrogate without the 1/alpha factor"
        )
    pf = cache.primal_residual_norm(xi, sol.primal_coeffs)
    df = _dual_sup(model, cache.pd_dual_matrix(xi))
    return EstimateRecord(
        xi=np.asarray(xi, float), delta=pf * df / alpha,
        primal_factor=pf, dual_factor=df, alpha=float(alpha),
        method="primal-dual", certified=True,
    )


def estimate_saddle(model, xi, cache, sol, alpha):
    """Certified saddle estimate with minimized primal and dual factors."""
    if alpha is None:
        raise UnsupportedModelError(
            "alpha is unavailable; use estimate_preconditioned for the "
            "surrogate without the 1/alpha factor"
        )
    if model.symmetry == "spd":
        pf = cache.min_residual_over_T(xi)
        df = _dual_sup(model, cache.dual_schur(xi, "T"))
    else:
        t = cache.saddle_corrected_point(xi, sol)
        resid = model.rhs_at(xi) - model.operator_at(xi) @ t
        pf = model.v0_dual_norm(resid)
        schur = (cache.dual_schur_dynamic(xi, sol) if sol.aux
                 else cache.dual_schur(xi, "T"))
        df = _dual_sup(model, schur)
    return EstimateRecord(
        xi=np.asarray(xi, float), delta=pf * df / alpha,
        primal_factor=pf, dual_factor=df, alpha=float(alpha),
        method="saddle", certified=True,
    )


def estimate_preconditioned(model, xi, cache, sol, method, precond=None):
    """Surrogate estimate with a preconditioned primal residual, no alpha.

    With ``precond=None`` (or no stored points) the preconditioner falls
    back to R_V0^{-1}, so the primal factor is the plain residual dual
    norm; the record is tagged non-certified either way.
    """
    if method == "primal-dual":
        resid = cache.residual_vector(xi, sol.primal_coeffs)
        df = _dual_sup(model, cache.pd_dual_matrix(xi))
    elif method == "saddle":
        t = cache.saddle_corrected_point(xi, sol) if model.symmetry != "spd" \
            else _spd_saddle_point(cache, sol)
        resid = np.asarray(model.rhs_at(xi) - model.operator_at(xi) @ t)
        schur = (cache.dual_schur_dynamic(xi, sol) if sol.aux
                 else cache.dual_schur(xi, "T"))
        df = _dual_sup(model, schur)
    else:
        raise ValueError(f"unknown method {method!r}")
    x = precond.apply(xi, resid) if precond is not None else model.riesz_v0(resid)
    pf = model.v0_norm(x)
    m = precond.m if precond is not None else 0
    return EstimateRecord(
        xi=np.asarray(xi, float), delta=pf * df,
        primal_factor=pf, dual_factor=df, alpha=None,
        method=f"{method}-surrogate[m={m}]", certified=False,
    )


def _spd_saddle_point(cache, sol):
    if cache._T is None:
        raise ValueError("cache was built without saddle blocks")
    return cache._T.columns @ sol.t_coeffs if sol.t_coeffs.size \
        else np.zeros(cache.model.n)


def select_output_direction(model, xi, dual_space, method="saddle"):
    """Worst output direction z' for partial dual enrichment.

    ``dual_space`` is a :class:`ReducedCache` (block path) or a basis /
    column matrix (direct path).  The primal-dual variant maximizes the
    dual residual of the current projected dual operator; the saddle
    variant maximizes the minimized dual residual.  Returns z' with unit
    output dual norm; top-eigenspace ties break deterministically to the
    lexicographically largest sign-fixed eigenvector.
    """
    if isinstance(dual_space, ReducedCache):
        cache = dual_space
        M = cache.pd_dual_matrix(xi) if method == "primal-dual" \
            else cache.dual_schur(xi, "WQ")
    else:
        M = _direct_objective(model, xi, dual_space, method)
    _, _, (w, vecs) = eig_extreme(M, la.inv(model.gram_z), largest=True)
    lam_max = w[-1]
    tol = max(1e-10 * abs(lam_max), 1e-300)
    candidates = [vecs[:, i] for i in range(len(w)) if w[i] >= lam_max - tol]
    fixed = [_sign_fix(v) for v in candidates]
    z = max(fixed, key=tuple)
    nrm = model.z_dual_norm(z)
    return z / nrm if nrm > 0 else z


def _sign_fix(v):
    scale = np.max(np.abs(v))
    if scale == 0.0:
        return v
    for x in v:
        if abs(x) > 1e-12 * scale:
            return v if x > 0 else -v
    return v


def _direct_objective(model, xi, dual_space, method):
    from ._linalg import as_columns
    from ._linalg import solve_checked, solve_spd_min

    Sc = as_columns(dual_space)
    A = model.operator_at(xi)
    Lt = model.output_at(xi)
    Lt = (Lt.toarray() if sp.issparse(Lt) else np.asarray(Lt)).T
    zL = model.riesz_v0(Lt)
    G = Lt.T @ zL
    if Sc.shape[1] == 0:
        return G
    AtS = A.T @ Sc
    K = AtS.T @ model.riesz_v0(AtS)
    C = AtS.T @ zL
    if method == "saddle":
        return G - C.T @ solve_spd_min(K, C)
    if model.symmetry == "spd":
        qhat = solve_checked(Sc.T @ (A @ Sc), Sc.T @ Lt, "dual minimizer system")
    else:
        qhat = solve_spd_min(K, C)
    return G - C.T @ qhat - qhat.T @ C + qhat.T @ (K @ qhat)


def effectivity_report(deltas, errors, s_norms=None, bins=20):
    """Histogram and summary statistics of eta = delta / error.

    Pairs whose true error falls below 1e-14 times the output norm are
    excluded (eta is undefined at exact points) and counted, as are
    non-finite or non-positive ratios.
    """
    deltas = np.asarray(deltas, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if deltas.shape != errors.shape or deltas.ndim != 1:
        raise ValueError("deltas and errors must be 1-d arrays of equal length")
    if deltas.size == 0:
        raise ValueError("empty sample")
    floor = 1e-14 * (np.asarray(s_norms, dtype=float) if s_norms is not None
                     else np.ones_like(errors))
    keep = errors > floor
    eta = np.full_like(deltas, np.nan)
    eta[keep] = deltas[keep] / errors[keep]
    keep &= np.isfinite(eta) & (eta > 0.0)
    eta = eta[keep]
    if eta.size == 0:
        raise ValueError("no usable effectivity samples after exclusions")
    counts, edges = np.histogram(eta, bins=bins)
    mean = float(np.mean(eta))
    return EffectivityReport(
        mean=mean,
        maxmin_ratio=float(np.max(eta) / np.min(eta)),
        nstd=float(np.std(eta) / mean),
        n_included=int(eta.size),
        n_excluded=int(deltas.size - eta.size),
        hist_edges=edges,
        hist_counts=counts,
    )
