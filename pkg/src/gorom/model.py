"""Full-order models: operator/rhs/output triples with Gram machinery.

A full-order model holds the affine forms A(xi), b(xi), L(xi), a
parameter-independent SPD Gram matrix R_V0 on the state space, an SPD Gram
R_Z on the output space, the parameter domain, and a symmetry flag.

Norm convention (selected once here, consumed everywhere downstream):
for ``spd`` models the parameter-dependent state norm is the energy norm
induced by A(xi); for ``general`` models it is the fixed R_V0 norm.
"""

import warnings

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .affine import AffineForm, assemble
from .exceptions import FactorizationError

__all__ = ["Factorization", "factorize", "dual_norm_sq", "FullOrderModel"]


def _dense(M):
    return M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)


class Factorization:
    """Dense factorization of a square matrix with direct/adjoint solves.

    Wraps either a Cholesky factor (symmetric positive definite input) or a
    partial-pivoting LU.  Desk-scale by design: matrices are densified.
    """

    def __init__(self, M, spd=False):
        A = _dense(M)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("factorization needs a square matrix")
        self.n = A.shape[0]
        self.spd = bool(spd)
        try:
            if spd:
                self._cho = la.cho_factor(A, check_finite=False)
            else:
                with warnings.catch_warnings():
                    # exact-zero pivots are caught below by the pivot check
                    warnings.simplefilter("ignore", la.LinAlgWarning)
                    self._lu = la.lu_factor(A, check_finite=False)
                pivots = np.abs(np.diag(self._lu[0]))
                pmax = pivots.max() if pivots.size else 0.0
                if pmax == 0.0 or pivots.min() <= 1e-12 * pmax:
                    raise FactorizationError("LU pivot below threshold")
        except la.LinAlgError as exc:
            raise FactorizationError(str(exc)) from exc

    def solve(self, B, transpose=False):
        """Solve M x = B, or M^T x = B when ``transpose``."""
        B = np.asarray(B, dtype=float)
        if self.spd:
            return la.cho_solve(self._cho, B, check_finite=False)
        return la.lu_solve(self._lu, B, trans=1 if transpose else 0, check_finite=False)

    @property
    def nbytes(self):
        f = self._cho[0] if self.spd else self._lu[0]
        return f.nbytes


def factorize(M, spd=False):
    """Factorize a (sparse or dense) square matrix; raises on failure."""
    return Factorization(M, spd=spd)


def dual_norm_sq(r, gram):
    """Squared dual norm ``r^T G^{-1} r`` of a dual vector w.r.t. an SPD Gram.

    ``gram`` may be a matrix (factorized here via Cholesky) or an existing
    SPD :class:`Factorization`.  The result is clamped at zero to absorb
    roundoff; it vanishes iff ``r`` does.
    """
    r = np.asarray(r, dtype=float)
    factor = gram if isinstance(gram, Factorization) else factorize(gram, spd=True)
    val = float(r @ factor.solve(r))
    return max(val, 0.0)


class FullOrderModel:
    """The triple (A, b, L) with Gram matrices and a parameter domain.

    Parameters
    ----------
    A : AffineForm, shape (n, n)
    b : AffineForm, shape (n,)
    L : AffineForm, shape (l, n)
    gram_v0 : SPD matrix, shape (n, n)
        Parameter-independent state-space Gram (residuals are measured in
        its dual norm).
    gram_z : SPD matrix, shape (l, l)
        Output-space Gram; identity is the canonical choice.
    domain : ParameterDomain
    symmetry : {"spd", "general"}
    xi_ref : array_like, shape (d,)
        Reference parameter (used by the min-theta coercivity bound when
        ``gram_v0`` equals ``A(xi_ref)``).
    coercive_affine : bool
        Declares that every operator coefficient is positive over the whole
        domain and every operator term is symmetric positive semidefinite,
        the precondition of the min-theta bound.
    validate : bool
        Run the SPD/symmetry spot checks at construction (default True).

    Instances are immutable after construction and safe for shared
    read-only concurrent use; assembly allocates per-call state.
    """

    def __init__(self, A, b, L, gram_v0, gram_z, domain, symmetry, xi_ref,
                 coercive_affine=False, validate=True):
        if symmetry not in ("spd", "general"):
            raise ValueError("symmetry must be 'spd' or 'general'")
        for form, ndim, name in ((A, 2, "A"), (b, 1, "b"), (L, 2, "L")):
            if not isinstance(form, AffineForm) or len(form.shape) != ndim:
                raise ValueError(f"{name} must be an AffineForm of rank {ndim}")
        n = A.shape[0]
        if A.shape != (n, n) or b.shape != (n,) or L.shape[1] != n:
            raise ValueError("inconsistent shapes between A, b, L")
        self.A = A
        self.b = b
        self.L = L
        self.gram_v0 = gram_v0.tocsr() if sp.issparse(gram_v0) else np.asarray(gram_v0, float)
        self.gram_z = _dense(gram_z)
        self.domain = domain
        self.symmetry = symmetry
        self.xi_ref = np.asarray(xi_ref, dtype=float)
        self.coercive_affine = bool(coercive_affine)
        if self.xi_ref.shape != (domain.dim,):
            raise ValueError("xi_ref must have one entry per parameter component")
        self._v0_factor = None
        self._z_factor = None
        if validate:
            self._validate()

    # -- shape helpers -------------------------------------------------

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def l(self):
        return self.L.shape[0]

    @property
    def d(self):
        return self.domain.dim

    def _validate(self):
        # SPD checks by attempted Cholesky
        try:
            factorize(self.gram_v0, spd=True)
        except FactorizationError as exc:
            raise FactorizationError(f"gram_v0 is not SPD: {exc}") from exc
        try:
            factorize(self.gram_z, spd=True)
        except FactorizationError as exc:
            raise FactorizationError(f"gram_z is not SPD: {exc}") from exc
        if self.symmetry == "spd":
            rng = np.random.default_rng(0)
            for xi in self.domain.sample(5, rng):
                M = self.operator_at(xi)
                asym = (M - M.T)
                num = la.norm(asym.toarray() if sp.issparse(asym) else asym)
                den = la.norm(M.toarray() if sp.issparse(M) else M)
                if num > 1e-12 * den:
                    raise ValueError(
                        "model flagged spd but A(xi) is not symmetric "
                        f"(rel asymmetry {num / den:.2e})"
                    )

    # -- assembly ------------------------------------------------------

    def operator_at(self, xi):
        return assemble(self.A, xi, self.domain)

    def rhs_at(self, xi):
        return assemble(self.b, xi, self.domain)

    def output_at(self, xi):
        return assemble(self.L, xi, self.domain)

    def factorize_operator(self, xi):
        """Factorize A(xi); this is the offline cost unit."""
        return factorize(self.operator_at(xi), spd=(self.symmetry == "spd"))

    # -- Gram / Riesz machinery ----------------------------------------

    @property
    def v0_factor(self):
        if self._v0_factor is None:
            self._v0_factor = factorize(self.gram_v0, spd=True)
        return self._v0_factor

    @property
    def z_factor(self):
        if self._z_factor is None:
            self._z_factor = factorize(self.gram_z, spd=True)
        return self._z_factor

    def riesz_v0(self, X):
        """Apply R_V0^{-1} to a dual vector or a matrix of dual columns."""
        return self.v0_factor.solve(np.asarray(X, dtype=float))

    def v0_norm(self, x):
        return float(np.sqrt(max(x @ (self.gram_v0 @ x), 0.0)))

    def v0_dual_norm(self, r):
        return float(np.sqrt(dual_norm_sq(r, self.v0_factor)))

    def z_norm(self, s):
        s = np.asarray(s, dtype=float)
        return float(np.sqrt(max(s @ (self.gram_z @ s), 0.0)))

    def z_dual_norm(self, zp):
        return float(np.sqrt(dual_norm_sq(zp, self.z_factor)))

    def v_gram_at(self, xi):
        """Gram of the parameter-dependent state norm: A(xi) if spd, else R_V0."""
        if self.symmetry == "spd":
            return self.operator_at(xi)
        return self.gram_v0

    def v_norm(self, xi, x):
        G = self.v_gram_at(xi)
        return float(np.sqrt(max(x @ (G @ x), 0.0)))

    def __repr__(self):
        return (
            f"FullOrderModel(n={self.n}, l={self.l}, d={self.d}, "
            f"symmetry={self.symmetry!r}, terms={self.A.nterms})"
        )
