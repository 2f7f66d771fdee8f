"""Projections of the state and estimators of the variable of interest.

Five approximation routes are implemented:

* :func:`orthogonal_project`: best approximation in the state norm
  (an oracle: it consumes the truth solution);
* :func:`petrov_galerkin_solve`: primal-only projection with a test space;
* :func:`dual_only_solve`: output from a projected dual variable alone;
* :func:`primal_dual_solve`: primal projection plus a dual residual
  correction computed without ever forming the dual operator;
* :func:`saddle_spd_solve` / :func:`saddle_general_solve`: the coupled
  projection with an auxiliary variable over the enriched space
  T = (test space) + (dual space).

Direct functions take explicit bases and assemble reduced systems from the
full-order operator at the evaluation point (never factorizing it).  The
:class:`ReducedCache` precomputes parameter-independent reduced blocks per
affine term (and per term pair through R_V0^{-1}) so that, for fixed
spaces, online assembly is polynomial in the reduced dimensions.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from ._linalg import as_columns, clip_nonneg, solve_checked, solve_spd_min
from .exceptions import ReducedSolveError
from .problems import truth_solve
from .spaces import union_basis

__all__ = [
    "OutputEstimate",
    "orthogonal_project",
    "petrov_galerkin_solve",
    "dual_only_solve",
    "primal_dual_solve",
    "saddle_spd_solve",
    "saddle_general_solve",
    "build_test_space",
    "ReducedCache",
]


@dataclass
class OutputEstimate:
    """An output estimate with the reduced solution pieces that produced it."""

    s_tilde: np.ndarray
    method: str
    primal_coeffs: np.ndarray | None = None
    dual_coeffs: np.ndarray | None = None
    t_coeffs: np.ndarray | None = None
    aux: dict = field(default_factory=dict)


def _output_dense(model, xi):
    L = model.output_at(xi)
    return L.toarray() if sp.issparse(L) else np.asarray(L)


# ---------------------------------------------------------------------------
# direct operations (explicit bases)
# ---------------------------------------------------------------------------

def orthogonal_project(model, xi, V, u=None, gram="model"):
    """Coefficients of the orthogonal projection of u on span(V).

    ``gram`` selects the inner product: "model" uses the model's state norm
    (energy norm for spd models), "v0" always uses R_V0.  When ``u`` is not
    given the truth solution at ``xi`` is computed (oracle usage).
    """
    Vc = as_columns(V)
    if u is None:
        u, _ = truth_solve(model, xi)
    if Vc.shape[1] == 0:
        return np.zeros(0)
    G = model.v_gram_at(xi) if gram == "model" else model.gram_v0
    GV = G @ Vc
    M = Vc.T @ GV
    rhs = GV.T @ u
    return solve_checked(M, rhs, "orthogonal projection Gram system")


def petrov_galerkin_solve(model, xi, V, W=None):
    """Primal-only projection: W^T A(xi) V U = W^T b(xi), s = L V U.

    ``W=None`` selects the standard Galerkin test space W = V.
    """
    Vc = as_columns(V)
    Wc = Vc if W is None else as_columns(W)
    A = model.operator_at(xi)
    M = Wc.T @ (A @ Vc)
    rhs = Wc.T @ model.rhs_at(xi)
    U = solve_checked(M, rhs, "Petrov-Galerkin reduced system")
    s = _output_dense(model, xi) @ (Vc @ U) if Vc.shape[1] else np.zeros(model.l)
    return OutputEstimate(np.asarray(s), "primal", primal_coeffs=U)


def dual_only_solve(model, xi, WQ):
    """Output estimate from the dual space alone (zero primal approximation)."""
    Wc = as_columns(WQ)
    A = model.operator_at(xi)
    bvec = model.rhs_at(xi)
    Ld = _output_dense(model, xi)
    if Wc.shape[1] == 0:
        return OutputEstimate(np.zeros(model.l), "dual", dual_coeffs=np.zeros(0))
    if model.symmetry == "spd":
        M = Wc.T @ (A @ Wc)
        Y = solve_checked(M, Wc.T @ bvec, "dual-only reduced system")
        s = Ld @ (Wc @ Y)
    else:
        AtW = A.T @ Wc
        X = model.riesz_v0(AtW)
        M = AtW.T @ X
        Y = solve_checked(M, Wc.T @ bvec, "dual-only reduced system")
        s = Ld @ (X @ Y)
    return OutputEstimate(np.asarray(s), "dual", dual_coeffs=Y)


def primal_dual_solve(model, xi, V, WQ, W=None):
    """Primal projection plus dual correction of the output.

    The correction solves the small system induced by the dual space and
    the residual, then evaluates L R_V^{-1} A^* applied to it; the dual
    operator itself is never assembled.
    """
    primal = petrov_galerkin_solve(model, xi, V, W)
    Vc = as_columns(V)
    Wc = as_columns(WQ)
    A = model.operator_at(xi)
    bvec = model.rhs_at(xi)
    Ld = _output_dense(model, xi)
    resid = bvec - (A @ (Vc @ primal.primal_coeffs) if Vc.shape[1] else 0.0)
    if Wc.shape[1] == 0:
        return OutputEstimate(primal.s_tilde, "primal-dual",
                              primal_coeffs=primal.primal_coeffs,
                              dual_coeffs=np.zeros(0))
    if model.symmetry == "spd":
        M = Wc.T @ (A @ Wc)
        Y = solve_checked(M, Wc.T @ resid, "primal-dual correction system")
        corr = Ld @ (Wc @ Y)
    else:
        AtW = A.T @ Wc
        X = model.riesz_v0(AtW)
        M = AtW.T @ X
        Y = solve_checked(M, Wc.T @ resid, "primal-dual correction system")
        corr = Ld @ (X @ Y)
    return OutputEstimate(primal.s_tilde + corr, "primal-dual",
                          primal_coeffs=primal.primal_coeffs, dual_coeffs=Y)


def saddle_spd_solve(model, xi, T):
    """Saddle projection, symmetric coercive form: one SPD system over T."""
    if model.symmetry != "spd":
        raise ReducedSolveError("saddle_spd_solve requires an spd model")
    Tc = as_columns(T)
    if Tc.shape[1] == 0:
        return OutputEstimate(np.zeros(model.l), "saddle", t_coeffs=np.zeros(0))
    A = model.operator_at(xi)
    M = Tc.T @ (A @ Tc)
    try:
        cho = la.cho_factor(0.5 * (M + M.T), check_finite=False)
    except la.LinAlgError as exc:
        raise ReducedSolveError(
            f"saddle reduced matrix is not SPD ({exc}); model misuse?"
        ) from exc
    Y = la.cho_solve(cho, Tc.T @ model.rhs_at(xi), check_finite=False)
    s = _output_dense(model, xi) @ (Tc @ Y)
    return OutputEstimate(np.asarray(s), "saddle", t_coeffs=Y)


def saddle_general_solve(model, xi, V, T):
    """Saddle projection in block form, valid for any model (R_V0 norm).

    Solves for (y, u) in T x V the coupled system with the residual-induced
    Gram A R_V0^{-1} A^T on T, and returns the output estimate
    s = L V u + L R_V0^{-1} A^T T y.
    """
    Vc = as_columns(V)
    Tc = as_columns(T)
    p, r = Tc.shape[1], Vc.shape[1]
    Ld = _output_dense(model, xi)
    if p == 0 and r > 0:
        raise ReducedSolveError(
            "saddle space is empty while the primal space is not: "
            "discrete inf-sup constant is zero"
        )
    if p == 0:
        return OutputEstimate(np.zeros(model.l), "saddle",
                              primal_coeffs=np.zeros(0), dual_coeffs=np.zeros(0))
    A = model.operator_at(xi)
    AtT = A.T @ Tc
    X = model.riesz_v0(AtT)
    K = AtT.T @ X
    B = Tc.T @ (A @ Vc) if r else np.zeros((p, 0))
    big = np.block([[K, B], [B.T, np.zeros((r, r))]])
    rhs = np.concatenate([Tc.T @ model.rhs_at(xi), np.zeros(r)])
    sol = solve_checked(big, rhs, "saddle block system")
    Y, U = sol[:p], sol[p:]
    s = (Ld @ (Vc @ U) if r else np.zeros(model.l)) + Ld @ (X @ Y)
    return OutputEstimate(np.asarray(s), "saddle",
                          primal_coeffs=U, dual_coeffs=Y,
                          aux={"T": Tc, "X": X, "K": K})


def build_test_space(model, V, precond, xi):
    """Test-space columns P_m(xi)^* R_V0 V; with no points this is V itself."""
    cols = as_columns(V)
    if precond is None or precond.m == 0:
        return cols.copy()
    return precond.apply_adjoint(xi, model.gram_v0 @ cols)


# ---------------------------------------------------------------------------
# parameter-independent reduced blocks
# ---------------------------------------------------------------------------

class _AffineBlocks:
    """sum_k theta_k(xi) * B_k for one list of coefficient functions."""

    def __init__(self, coeffs, blocks):
        self.coeffs = coeffs
        self.blocks = blocks

    def at(self, xi):
        acc = self.coeffs[0](xi) * self.blocks[0]
        for coeff, block in zip(self.coeffs[1:], self.blocks[1:]):
            acc = acc + coeff(xi) * block
        return acc


class _PairBlocks:
    """sum_{j,k} a_j(xi) b_k(xi) * B[j][k] (Riesz-paired term products)."""

    def __init__(self, coeffs_a, coeffs_b, blocks):
        self.coeffs_a = coeffs_a
        self.coeffs_b = coeffs_b
        self.blocks = blocks

    def at(self, xi):
        ta = np.array([c(xi) for c in self.coeffs_a])
        tb = np.array([c(xi) for c in self.coeffs_b])
        acc = np.zeros_like(self.blocks[0][0])
        for j, aj in enumerate(ta):
            for k, bk in enumerate(tb):
                acc = acc + (aj * bk) * self.blocks[j][k]
        return acc


def _term_family(form, X=None, transpose=False):
    """Dense images [term_k @ X] (or term_k^T @ X; or the terms themselves)."""
    out = []
    for _, term in form.terms:
        if X is None:
            t = term.toarray() if sp.issparse(term) else np.asarray(term)
            t = t.T if transpose else t
            if t.ndim == 1:
                t = t[:, None]
            out.append(np.asarray(t, dtype=float))
        else:
            M = term.T @ X if transpose else term @ X
            out.append(np.asarray(M, dtype=float))
    return out


class ReducedCache:
    """Precomputed reduced blocks for one model and one space configuration.

    Parameters
    ----------
    model : FullOrderModel
    V : Basis or array, optional
        Primal approximation space.
    WQ : Basis or array, optional
        Dual approximation space.
    precond : InverseInterpolant, optional
        Drives the parameter-dependent test space of general models; ignored
        as a test space for spd models (Galerkin is optimal there).
    saddle : bool
        Also precompute the blocks of the saddle route over T = W + WQ.

    The cache is immutable; rebuild it after every enrichment.
    """

    def __init__(self, model, V=None, WQ=None, precond=None, saddle=False,
                 tol_rank=1e-10):
        self.model = model
        n = model.n
        self.Vc = as_columns(V) if V is not None else np.zeros((n, 0))
        self.WQc = as_columns(WQ) if WQ is not None else np.zeros((n, 0))
        self.precond = precond
        self.saddle = bool(saddle)
        self.tol_rank = float(tol_rank)
        spd = model.symmetry == "spd"
        self._spd = spd
        ca = [c for c, _ in model.A.terms]
        cb = [c for c, _ in model.b.terms]
        cl = [c for c, _ in model.L.terms]
        self._ca, self._cb, self._cl = ca, cb, cl

        # term families (kept for residual-vector evaluation)
        self._FA_V = _term_family(model.A, self.Vc)
        self._Fb = _term_family(model.b)
        self._FL = _term_family(model.L, transpose=True)

        riesz = model.riesz_v0

        def pair(fam_a, coeffs_a, fam_b, coeffs_b, z_b=None):
            zb = [riesz(F) for F in fam_b] if z_b is None else z_b
            blocks = [[Fa.T @ Zb for Zb in zb] for Fa in fam_a]
            return _PairBlocks(coeffs_a, coeffs_b, blocks), zb

        # primal route -------------------------------------------------
        self._w_mode = "fixed"
        if not spd and precond is not None and precond.m > 0:
            self._w_mode = "precond"
            gv = model.gram_v0 @ self.Vc
            self._Ys = [f.solve(gv, transpose=True) for f in precond.factorizations]
            self._YAV = [[Y.T @ FA for FA in self._FA_V] for Y in self._Ys]
            self._Yb = [[Y.T @ Fb for Fb in self._Fb] for Y in self._Ys]
        else:
            self._PAV = _AffineBlocks(ca, [self.Vc.T @ F for F in self._FA_V])
            self._Pb = _AffineBlocks(cb, [self.Vc.T @ F for F in self._Fb])
        self._LV = _AffineBlocks(cl, [F.T @ self.Vc for F in self._FL])

        # primal residual in the R_V0 dual norm
        self._RAA, _ = pair(self._FA_V, ca, self._FA_V, ca)
        self._Rbb, zb = pair(self._Fb, cb, self._Fb, cb)
        self._RAb, _ = pair(self._FA_V, ca, self._Fb, cb, z_b=zb)

        # dual route ---------------------------------------------------
        self._FAt_WQ = _term_family(model.A, self.WQc, transpose=True)
        self._KQ, _ = pair(self._FAt_WQ, ca, self._FAt_WQ, ca)
        self._zL = [riesz(F) for F in self._FL]
        self._CQ, _ = pair(self._FAt_WQ, ca, self._FL, cl, z_b=self._zL)
        self._GLL, _ = pair(self._FL, cl, self._FL, cl, z_b=self._zL)
        self._QAV = _AffineBlocks(ca, [self.WQc.T @ F for F in self._FA_V])
        self._Qb = _AffineBlocks(cb, [self.WQc.T @ F for F in self._Fb])
        if spd:
            FA_WQ = _term_family(model.A, self.WQc)
            self._QAQ = _AffineBlocks(ca, [self.WQc.T @ F for F in FA_WQ])
            self._QLt = _AffineBlocks(cl, [self.WQc.T @ F for F in self._FL])
            self._LWQ = _AffineBlocks(cl, [F.T @ self.WQc for F in self._FL])
        else:
            # L R_V0^{-1} A^T WQ per (L-term, A-term): reuse CQ blocks
            blocks = [[self._CQ.blocks[k][j].T for k in range(len(ca))]
                      for j in range(len(cl))]
            self._LXQ = _PairBlocks(cl, ca, blocks)

        # saddle route ---------------------------------------------------
        self._T = None
        self._t_dynamic = False
        if self.saddle:
            if self._w_mode == "precond":
                self._t_dynamic = True
            else:
                self._T = union_basis(
                    [self.Vc, self.WQc], gram=model.gram_v0,
                    tol_rank=self.tol_rank, name="T",
                )
                Tc = self._T.columns
                FA_T = _term_family(model.A, Tc)
                FAt_T = _term_family(model.A, Tc, transpose=True)
                self._zAt_T = [riesz(F) for F in FAt_T]
                self._KT, _ = pair(FAt_T, ca, FAt_T, ca, z_b=self._zAt_T)
                self._CT, _ = pair(FAt_T, ca, self._FL, cl, z_b=self._zL)
                self._Tb = _AffineBlocks(cb, [Tc.T @ F for F in self._Fb])
                self._RTT, _ = pair(FA_T, ca, FA_T, ca)
                self._RTb, _ = pair(FA_T, ca, self._Fb, cb, z_b=zb)
                if spd:
                    self._TAT = _AffineBlocks(ca, [Tc.T @ F for F in FA_T])
                    self._LT = _AffineBlocks(cl, [F.T @ Tc for F in self._FL])
                else:
                    self._TAV = _AffineBlocks(ca, [Tc.T @ F for F in self._FA_V])
                    blocks = [[self._CT.blocks[k][j].T for k in range(len(ca))]
                              for j in range(len(cl))]
                    self._LXT = _PairBlocks(cl, ca, blocks)

    # -- dims ------------------------------------------------------------

    @property
    def r(self):
        return self.Vc.shape[1]

    @property
    def k(self):
        return self.WQc.shape[1]

    @property
    def p(self):
        if self._T is not None:
            return self._T.dim
        return self.r + self.k

    # -- online solves ----------------------------------------------------

    def _primal_system(self, xi):
        if self.r == 0:
            return np.zeros((0, 0)), np.zeros(0)
        if self._w_mode == "fixed":
            return self._PAV.at(xi), self._Pb.at(xi).ravel()
        lam = self.precond.coefficients(xi)
        ta = np.array([c(xi) for c in self._ca])
        tb = np.array([c(xi) for c in self._cb])
        M = np.zeros((self.r, self.r))
        rhs = np.zeros(self.r)
        for i, li in enumerate(lam):
            if li == 0.0:
                continue
            for k, t in enumerate(ta):
                M += (li * t) * self._YAV[i][k]
            for j, t in enumerate(tb):
                rhs += (li * t) * self._Yb[i][j].ravel()
        return M, rhs

    def solve_primal(self, xi):
        M, rhs = self._primal_system(xi)
        U = solve_checked(M, rhs, "Petrov-Galerkin reduced system")
        s = self._LV.at(xi) @ U if self.r else np.zeros(self.model.l)
        return OutputEstimate(np.asarray(s), "primal", primal_coeffs=U)

    def _dual_correction(self, xi, rhs):
        if self.k == 0:
            return np.zeros(0), np.zeros(self.model.l)
        M = self._QAQ.at(xi) if self._spd else self._KQ.at(xi)
        Y = solve_checked(M, rhs, "dual reduced system")
        if self._spd:
            corr = self._LWQ.at(xi) @ Y
        else:
            corr = self._LXQ.at(xi) @ Y
        return Y, np.asarray(corr)

    def solve_dual_only(self, xi):
        Y, s = self._dual_correction(xi, self._Qb.at(xi).ravel() if self.k else np.zeros(0))
        return OutputEstimate(s, "dual", dual_coeffs=Y)

    def solve_primal_dual(self, xi):
        primal = self.solve_primal(xi)
        rhs = (self._Qb.at(xi).ravel() - self._QAV.at(xi) @ primal.primal_coeffs
               if self.k else np.zeros(0))
        Y, corr = self._dual_correction(xi, rhs)
        return OutputEstimate(primal.s_tilde + corr, "primal-dual",
                              primal_coeffs=primal.primal_coeffs, dual_coeffs=Y)

    def solve_saddle(self, xi):
        if not self.saddle:
            raise ValueError("cache was built without saddle blocks")
        if self._t_dynamic:
            return self._solve_saddle_dynamic(xi)
        if self._spd:
            if self.p == 0:
                return OutputEstimate(np.zeros(self.model.l), "saddle",
                                      t_coeffs=np.zeros(0))
            M = self._TAT.at(xi)
            try:
                cho = la.cho_factor(0.5 * (M + M.T), check_finite=False)
            except la.LinAlgError as exc:
                raise ReducedSolveError(
                    f"saddle reduced matrix is not SPD ({exc}); model misuse?"
                ) from exc
            Y = la.cho_solve(cho, self._Tb.at(xi).ravel(), check_finite=False)
            s = self._LT.at(xi) @ Y
            return OutputEstimate(np.asarray(s), "saddle", t_coeffs=Y)
        p, r = self.p, self.r
        if p == 0 and r > 0:
            raise ReducedSolveError(
                "saddle space is empty while the primal space is not"
            )
        if p == 0:
            return OutputEstimate(np.zeros(self.model.l), "saddle",
                                  primal_coeffs=np.zeros(0), dual_coeffs=np.zeros(0))
        K = self._KT.at(xi)
        B = self._TAV.at(xi)
        big = np.block([[K, B], [B.T, np.zeros((r, r))]])
        rhs = np.concatenate([self._Tb.at(xi).ravel(), np.zeros(r)])
        sol = solve_checked(big, rhs, "saddle block system")
        Y, U = sol[:p], sol[p:]
        s = (self._LV.at(xi) @ U) + self._LXT.at(xi) @ Y
        return OutputEstimate(np.asarray(s), "saddle",
                              primal_coeffs=U, dual_coeffs=Y)

    def _solve_saddle_dynamic(self, xi):
        # parameter-dependent T(xi) = (W_r(xi), WQ): assembled at full order,
        # using only the stored factorizations and the cached R_V0 factor
        lam = self.precond.coefficients(xi)
        W = sum(li * Y for li, Y in zip(lam, self._Ys)) if self.r else np.zeros((self.model.n, 0))
        T = union_basis([W, self.WQc], gram=self.model.gram_v0,
                        tol_rank=self.tol_rank, name="T")
        est = saddle_general_solve(self.model, xi, self.Vc, T)
        return est

    def solve(self, xi, method):
        if method == "primal":
            return self.solve_primal(xi)
        if method == "dual":
            return self.solve_dual_only(xi)
        if method == "primal-dual":
            return self.solve_primal_dual(xi)
        if method == "saddle":
            return self.solve_saddle(xi)
        raise ValueError(f"unknown method {method!r}")

    # -- estimator primitives ----------------------------------------------

    def primal_residual_norm(self, xi, U):
        """|| b(xi) - A(xi) V U || in the R_V0 dual norm, via cached blocks."""
        s0 = float(self._Rbb.at(xi).item())
        if self.r == 0 or U is None or U.size == 0:
            return np.sqrt(max(s0, 0.0))
        P = self._RAA.at(xi)
        q = self._RAb.at(xi).ravel()
        val = float(U @ (P @ U) - 2.0 * (q @ U) + s0)
        return np.sqrt(max(clip_nonneg(val, 1e-10), 0.0))

    def residual_vector(self, xi, U):
        """b(xi) - A(xi) V U as a full-order vector (from cached term images)."""
        tb = np.array([c(xi) for c in self._cb])
        r = sum(t * F.ravel() for t, F in zip(tb, self._Fb))
        if self.r and U is not None and U.size:
            ta = np.array([c(xi) for c in self._ca])
            r = r - sum(t * (F @ U) for t, F in zip(ta, self._FA_V))
        return np.asarray(r)

    def min_residual_over_T(self, xi):
        """min over t in T of || A(xi) t - b(xi) || in the R_V0 dual norm."""
        s0 = float(self._Rbb.at(xi).item())
        if self._T is None or self._T.dim == 0:
            return np.sqrt(max(s0, 0.0))
        P = self._RTT.at(xi)
        q = self._RTb.at(xi).ravel()
        copt = solve_spd_min(P, q)
        val = s0 - float(q @ copt)
        return np.sqrt(max(clip_nonneg(val, 1e-10), 0.0))

    def saddle_corrected_point(self, xi, est):
        """t = V u + R_V0^{-1} A(xi)^T T y for a general saddle solution."""
        if est.aux:
            X = est.aux["X"]
            t = X @ est.dual_coeffs
        else:
            ta = np.array([c(xi) for c in self._ca])
            X = sum(t * Z for t, Z in zip(ta, self._zAt_T))
            t = X @ est.dual_coeffs if est.dual_coeffs.size else np.zeros(self.model.n)
        if self.r and est.primal_coeffs is not None and est.primal_coeffs.size:
            t = t + self.Vc @ est.primal_coeffs
        return t

    def _dual_blocks(self, xi, space):
        if space == "WQ":
            K = self._KQ.at(xi) if self.k else np.zeros((0, 0))
            C = self._CQ.at(xi) if self.k else np.zeros((0, self.model.l))
        elif space == "T":
            dim = 0 if self._T is None else self._T.dim
            K = self._KT.at(xi) if dim else np.zeros((0, 0))
            C = self._CT.at(xi) if dim else np.zeros((0, self.model.l))
        else:
            raise ValueError(f"unknown space {space!r}")
        return K, C, self._GLL.at(xi)

    def dual_schur(self, xi, space="WQ"):
        """G_LL - C^T K^{-1} C: the Gram of the dual-residual minimization."""
        K, C, G = self._dual_blocks(xi, space)
        if K.shape[0] == 0:
            return G
        return G - C.T @ solve_spd_min(K, C)

    def dual_schur_dynamic(self, xi, est):
        """Dual Schur complement over a parameter-dependent T carried by est."""
        X = est.aux["X"]
        K = est.aux["K"]
        tl = np.array([c(xi) for c in self._cl])
        Lt = sum(t * F for t, F in zip(tl, self._FL))
        C = X.T @ Lt
        G = self._GLL.at(xi)
        return G - C.T @ solve_spd_min(K, C)

    def pd_dual_matrix(self, xi):
        """(L^* - A^* Q_k)-Gram in the R_V0 dual norm, as an l x l matrix."""
        K, C, G = self._dual_blocks(xi, "WQ")
        if K.shape[0] == 0:
            return G
        if not self._spd:
            return G - C.T @ solve_spd_min(K, C)
        qhat = solve_checked(self._QAQ.at(xi), self._QLt.at(xi),
                             "dual minimizer system")
        return G - C.T @ qhat - qhat.T @ C + qhat.T @ (K @ qhat)
