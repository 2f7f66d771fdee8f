"""Interpolated approximate inverses of the parameter-dependent operator.

P_m(xi) = sum_i lambda_i(xi) A(xi_i)^{-1} interpolates the operator inverse
from factorizations stored at m parameter points.  The coefficients are
fitted per evaluation point by minimizing the sketched Frobenius residual

    || sum_i lambda_i A(xi_i)^{-1} A(xi) Omega - Omega ||_F,

with Omega a seeded Gaussian sketch of s columns, optionally under the
constraint lambda >= 0 (Lawson-Hanson NNLS).  The per-point images
A(xi_i)^{-1} A^(k) Omega are precomputed once per point, so a coefficient
fit costs one m x m solve.

With no points, P_0 = R_V0^{-1} by convention, which turns the derived
test space back into the trial space (standard Galerkin) and the
preconditioned residual norm into the plain R_V0 dual norm.
"""

import numpy as np
import scipy.linalg as la
from scipy.optimize import nnls

__all__ = ["InverseInterpolant"]


class InverseInterpolant:
    """Growable interpolation of A(xi)^{-1} with in-memory factorizations."""

    def __init__(self, model, sketch_size=400, seed=13, positivity=True):
        self.model = model
        self.s = int(min(sketch_size, model.n))
        self.seed = int(seed)
        self.positivity = bool(positivity)
        rng = np.random.default_rng(self.seed)
        self.omega = rng.standard_normal((model.n, self.s))
        self.points = []
        self.factorizations = []
        # blocks[i][k] = A(xi_i)^{-1} A^(k) Omega
        self._blocks = []
        self._sketch_images = _term_images(model, self.omega)
        self._riesz_images = None

    @property
    def m(self):
        return len(self.points)

    @property
    def memory_bytes(self):
        """Rough footprint of stored factorizations and sketch blocks."""
        total = self.omega.nbytes
        total += sum(f.nbytes for f in self.factorizations)
        total += sum(b.nbytes for blocks in self._blocks for b in blocks)
        return total

    def add_point(self, xi, factorization=None):
        """Store a new interpolation point; returns False for duplicates."""
        xi = np.asarray(xi, dtype=float)
        for known in self.points:
            if np.all(np.abs(known - xi) <= 1e-12):
                return False
        fact = factorization if factorization is not None \
            else self.model.factorize_operator(xi)
        self.points.append(xi)
        self.factorizations.append(fact)
        self._blocks.append([fact.solve(img) for img in self._sketch_images])
        return True

    def _sketched_images_at(self, xi):
        """M_i = P_i A(xi) Omega for every stored point, from cached blocks."""
        thetas = self.model.A.coefficients_at(xi)
        return [
            sum(t * blk for t, blk in zip(thetas, blocks))
            for blocks in self._blocks
        ]

    def coefficients(self, xi):
        """Fitted interpolation weights at xi (empty array when m = 0)."""
        if self.m == 0:
            return np.zeros(0)
        images = self._sketched_images_at(xi)
        G = np.empty((self.m, self.m))
        h = np.empty(self.m)
        for i, Mi in enumerate(images):
            h[i] = np.vdot(Mi, self.omega)
            for j in range(i, self.m):
                G[i, j] = G[j, i] = np.vdot(Mi, images[j])
        if not self.positivity:
            try:
                return la.cho_solve(la.cho_factor(G), h)
            except la.LinAlgError:
                sol, *_ = la.lstsq(G, h)
                return sol
        # NNLS on the Cholesky square root of the normal equations
        jitter = 1e-14 * max(np.trace(G), 1.0)
        shift, R = 0.0, None
        while R is None:
            try:
                R = la.cholesky(G + shift * np.eye(self.m))
            except la.LinAlgError:
                shift = jitter if shift == 0.0 else shift * 100.0
                if shift > 1e-4 * max(np.trace(G), 1.0):
                    raise
        y = la.solve_triangular(R, h, trans="T")
        lam, _ = nnls(R, y)
        return lam

    def sketched_objective(self, xi, lam=None):
        """Frobenius norm of the sketched residual at the given weights."""
        if lam is None:
            lam = self.coefficients(xi)
        if self.m == 0:
            return float(np.linalg.norm(self.omega))
        images = self._sketched_images_at(xi)
        acc = sum(li * Mi for li, Mi in zip(lam, images)) - self.omega
        return float(np.linalg.norm(acc))

    def residual_objective(self, xi):
        """Sketched norm of (P_m(xi) A(xi) - I) Omega at the fitted weights.

        With no points yet, P_0 = R_V0^{-1} per the convention, so the
        objective is || R_V0^{-1} A(xi) Omega - Omega ||_F.
        """
        if self.m > 0:
            return self.sketched_objective(xi)
        if self._riesz_images is None:
            self._riesz_images = [self.model.riesz_v0(img)
                                  for img in self._sketch_images]
        thetas = self.model.A.coefficients_at(xi)
        M = sum(t * img for t, img in zip(thetas, self._riesz_images))
        return float(np.linalg.norm(M - self.omega))

    def add_greedy_points(self, candidates, count):
        """Grow the interpolant where its sketched residual is largest.

        At each of ``count`` rounds the candidate maximizing
        :meth:`residual_objective` is factorized and added (nested point
        sets; deterministic given the candidate order).  Returns the
        points actually added.
        """
        candidates = np.asarray(candidates, dtype=float)
        added = []
        for _ in range(count):
            vals = [self.residual_objective(xi) for xi in candidates]
            xi = candidates[int(np.argmax(vals))]
            if not self.add_point(xi):
                break
            added.append(xi)
        return added

    def apply(self, xi, X):
        """P_m(xi) applied to dual vectors X; m = 0 gives R_V0^{-1} X."""
        X = np.asarray(X, dtype=float)
        if self.m == 0:
            return self.model.riesz_v0(X)
        lam = self.coefficients(xi)
        return sum(li * f.solve(X) for li, f in zip(lam, self.factorizations))

    def apply_adjoint(self, xi, X):
        """P_m(xi)^* applied to dual vectors X; m = 0 gives R_V0^{-1} X."""
        X = np.asarray(X, dtype=float)
        if self.m == 0:
            return self.model.riesz_v0(X)
        lam = self.coefficients(xi)
        return sum(li * f.solve(X, transpose=True)
                   for li, f in zip(lam, self.factorizations))

    def to_dict(self):
        return {
            "sketch_size": self.s,
            "seed": self.seed,
            "positivity": self.positivity,
            "points": [p.tolist() for p in self.points],
        }

    @classmethod
    def from_dict(cls, model, d):
        """Rebuild from metadata, re-factorizing at the stored points."""
        P = cls(model, d["sketch_size"], d["seed"], d["positivity"])
        for p in d["points"]:
            P.add_point(np.asarray(p, dtype=float))
        return P


def _term_images(model, omega):
    return [np.asarray(term @ omega) for _, term in model.A.terms]
