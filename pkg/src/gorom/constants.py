"""Quasi-optimality and goal-oriented constants.

All three quantities reduce to small dense symmetric (generalized)
eigenproblems after projecting onto the given bases:

* ``delta_VW``: how far a projection with test space S can be from the
  best approximation in V; value in [0, 1], zero iff the test space is
  ideal for V.
* ``delta_L``: worst-case dual-residual distance of the output map to
  the image of the test space under the adjoint operator.
* ``infsup_alpha``: the discrete inf-sup constant under the
  residual-induced test norm, tied to delta by alpha^2 + delta^2 = 1.

Each delta is evaluated from explicit residual vectors (the Gram of
``v - P v`` against the V-Gram), not from ``1 - lambda_min`` of the
projected pencil: the residual form stays accurate down to machine scale
when the constant approaches zero, where the quality statements live.
alpha is taken from the complementary pencil directly, which is the
well-conditioned side for small alpha.

These are diagnostic tools: with the energy-norm convention of spd models
they factorize A(xi) per evaluation and are therefore excluded from the
online cost accounting.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from ._linalg import as_columns, clip_unit, eig_extreme
from .exceptions import DegenerateTestSpaceError

__all__ = ["ConstantsReport", "delta_VW", "delta_L", "infsup_alpha",
           "compute_constants", "continuity_beta"]


@dataclass
class ConstantsReport:
    xi: np.ndarray
    delta_vw: float
    delta_l: float
    alpha: float


def _spd_chol(M, what):
    try:
        return la.cho_factor(0.5 * (M + M.T), check_finite=False)
    except la.LinAlgError as exc:
        raise DegenerateTestSpaceError(
            f"{what}: test space degenerate under the adjoint operator ({exc})"
        ) from exc


def _delta_alpha(model, xi, V, S, gram):
    Vc = as_columns(V)
    Sc = as_columns(S)
    r, m = Vc.shape[1], Sc.shape[1]
    if r == 0:
        return 0.0, 1.0
    if m == 0:
        return 1.0, 0.0
    A = model.operator_at(xi)
    AV = np.asarray(A @ Vc)
    B = Sc.T @ AV
    energy = gram == "model" and model.symmetry == "spd"
    if energy:
        # R_V = A(xi): the supremizer map R_V^{-1} A^T S is S itself
        Z = Sc
        H = Sc.T @ np.asarray(A @ Sc)
        G_V = Vc.T @ AV
    else:
        AtS = np.asarray(A.T @ Sc)
        Z = model.riesz_v0(AtS)
        H = AtS.T @ Z
        G_V = Vc.T @ (model.gram_v0 @ Vc)
    cho = _spd_chol(H, "delta_VW")
    X = la.cho_solve(cho, B, check_finite=False)
    resid = Vc - Z @ X
    Gresid = np.asarray(A @ resid) if energy else model.gram_v0 @ resid
    D = resid.T @ Gresid
    lam_d, _, _ = eig_extreme(D, G_V, largest=True)
    delta = np.sqrt(clip_unit(float(lam_d)))
    lam_a, _, _ = eig_extreme(B.T @ X, G_V, largest=False)
    alpha = np.sqrt(clip_unit(float(lam_a)))
    return float(delta), float(alpha)


def delta_VW(model, xi, V, S, gram="model"):
    """Quasi-optimality constant of the projection on V with test space S.

    The square is the largest eigenvalue, against the V-Gram of the state
    norm, of the Gram of the residuals v_i - R_V^{-1} A^T S H^{-1} S^T A v_i
    over a basis of V.  ``gram`` switches between the model norm ("model",
    the energy norm for spd models) and the fixed R_V0 ("v0").
    """
    return _delta_alpha(model, xi, V, S, gram)[0]


def infsup_alpha(model, xi, V, S, gram="model"):
    """Discrete inf-sup constant under the residual-induced test norm,
    sqrt(lambda_min(B^T H^{-1} B, G_V)); satisfies alpha^2 + delta^2 = 1."""
    return _delta_alpha(model, xi, V, S, gram)[1]


def delta_L(model, xi, S, gram="model"):
    """Goal-oriented constant: sup over unit output functionals of the
    distance of L^* z' to A^* S, in the dual state norm.

    Evaluated as the largest eigenvalue, against the output dual Gram, of
    the Gram of the explicit dual residual columns L^T - A^T S K^{-1} C.
    """
    Sc = as_columns(S)
    m = Sc.shape[1]
    A = model.operator_at(xi)
    Lt = model.output_at(xi)
    Lt = (Lt.toarray() if sp.issparse(Lt) else np.asarray(Lt)).T
    energy = gram == "model" and model.symmetry == "spd"
    if m:
        AtS = np.asarray(A.T @ Sc)
        if energy:
            K = Sc.T @ np.asarray(A @ Sc)
            C = Sc.T @ Lt
        else:
            K = AtS.T @ model.riesz_v0(AtS)
            C = AtS.T @ model.riesz_v0(Lt)
        cho = _spd_chol(K, "delta_L")
        Dres = Lt - AtS @ la.cho_solve(cho, C, check_finite=False)
    else:
        Dres = Lt
    if energy:
        fact = model.factorize_operator(xi)
        G = Dres.T @ fact.solve(Dres)
    else:
        G = Dres.T @ model.riesz_v0(Dres)
    lam, _, _ = eig_extreme(G, la.inv(model.gram_z), largest=True)
    return float(np.sqrt(max(float(lam), 0.0)))


def compute_constants(model, xi, V, S, gram="model"):
    delta, alpha = _delta_alpha(model, xi, V, S, gram)
    return ConstantsReport(
        xi=np.asarray(xi, dtype=float),
        delta_vw=delta,
        delta_l=delta_L(model, xi, S, gram=gram),
        alpha=alpha,
    )


def continuity_beta(model, xi, iters=100, tol=1e-10, seed=0):
    """Power-iteration diagnostic for the continuity constant
    sup_v ||A(xi) v||_{V0'} / ||v||_{V0}.

    Purely informational: no estimator consumes it.  Iterates the operator
    R_V0^{-1} A^T R_V0^{-1} A, which is self-adjoint in the R_V0 inner
    product, and returns the square root of its Rayleigh quotient.
    """
    A = model.operator_at(xi)
    x = np.random.default_rng(seed).standard_normal(model.n)
    x /= model.v0_norm(x)
    rho = 0.0
    for _ in range(iters):
        Ax = A @ x
        rho_new = float(Ax @ model.riesz_v0(Ax))
        y = model.riesz_v0(A.T @ model.riesz_v0(Ax))
        nrm = model.v0_norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
        if rho_new > 0 and abs(rho_new - rho) <= tol * rho_new:
            rho = rho_new
            break
        rho = rho_new
    return float(np.sqrt(max(rho, 0.0)))
