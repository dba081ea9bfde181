"""Minimum-snap polynomial spline with linear-complexity construction.

An N-piece, degree-7 spline with fixed boundary derivatives up to jerk is
the unique minimizer of the integrated squared snap among all C^4 curves
interpolating the intermediate points.  Construction solves one banded
linear system per axis; cost gradients with respect to the coefficients
and piece durations are pulled back to the intermediate points, the total
duration, and the terminal boundary state through the same factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.linalg import lapack

DEGREE = 7
NCOEF = DEGREE + 1
# Snap order: the controlled derivative whose squared norm is integrated.
S_ORDER = 4
# Basis derivative order used in the energy quadratic form.  The consistent
# choice for a snap cost is S_ORDER; kept as a module constant for ablation.
ENERGY_BASIS_ORDER = S_ORDER

_BAND_L = 11
_BAND_U = 7
# LAPACK general-band storage has kl extra fill-in rows on top.
_AB_ROWS = 2 * _BAND_L + _BAND_U + 1

# FAC[k, i] = i! / (i-k)! (zero where i < k): derivative-order prefactors.
_FAC = np.zeros((NCOEF, NCOEF))
for _k in range(NCOEF):
    for _i in range(_k, NCOEF):
        _FAC[_k, _i] = factorial(_i) / factorial(_i - _k)
_POW = np.maximum(np.arange(NCOEF)[None, :] - np.arange(NCOEF)[:, None], 0)


def basis_row(t, order, n=NCOEF):
    """Row of the natural polynomial basis derivative at time t."""
    row = np.zeros(n)
    for i in range(order, n):
        row[i] = _FAC[order, i] * t ** (i - order)
    return row


def _deriv_matrix(t):
    """(8, 8) matrix of basis derivative rows, orders 0..7, at time t."""
    return _FAC * float(t) ** _POW


@dataclass
class BoundaryState:
    """Position through jerk at one end of the spline."""

    p: np.ndarray
    v: np.ndarray
    a: np.ndarray
    j: np.ndarray

    def __post_init__(self):
        for name in ("p", "v", "a", "j"):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != (3,) or not np.all(np.isfinite(value)):
                raise ValueError(f"BoundaryState.{name} must be a finite 3-vector")
            setattr(self, name, value)

    def as_matrix(self):
        """Stack to a (4, 3) array ordered p, v, a, j."""
        return np.stack([self.p, self.v, self.a, self.j])


def _build_structure(N):
    """Static scatter pattern of the banded system for an N-piece spline.

    Returns index arrays that place the duration-dependent derivative
    matrix into band storage, plus the constant entries.
    """
    dim = 8 * N
    band_idx, src_idx = [], []
    const_band, const_val = [], []

    def flat(r, c):
        return (_BAND_L + _BAND_U + r - c) * dim + c

    def put_const(r, c, v):
        const_band.append(flat(r, c))
        const_val.append(v)

    def put_rt(r, c, order, i):
        band_idx.append(flat(r, c))
        src_idx.append(order * NCOEF + i)

    # Initial boundary: derivatives 0..3 of piece 1 at local t=0.
    for k in range(4):
        put_const(k, k, factorial(k))

    # Interior knots: left piece pinned to q_i, then continuity of
    # derivatives 0..6 across the knot.
    knot_rows = []
    for i in range(1, N):
        rb = 4 + 8 * (i - 1)
        c_left = 8 * (i - 1)
        knot_rows.append(rb)
        for ci in range(NCOEF):
            put_rt(rb, c_left + ci, 0, ci)
        for k in range(DEGREE):
            r = rb + 1 + k
            for ci in range(k, NCOEF):
                put_rt(r, c_left + ci, k, ci)
            put_const(r, 8 * i + k, -factorial(k))

    # Terminal boundary: derivatives 0..3 of piece N at local t=T_piece.
    for k in range(4):
        r = dim - 4 + k
        for ci in range(k, NCOEF):
            put_rt(r, 8 * (N - 1) + ci, k, ci)

    return {
        "band_idx": np.array(band_idx),
        "src_idx": np.array(src_idx),
        "const_band": np.array(const_band),
        "const_val": np.array(const_val),
        "knot_rows": np.array(knot_rows),
    }


_STRUCT_CACHE = {}


def _structure(N):
    if N not in _STRUCT_CACHE:
        _STRUCT_CACHE[N] = _build_structure(N)
    return _STRUCT_CACHE[N]


# Precomputed coefficient/exponent tables of the energy Gram matrix.
_EG_COEF = np.zeros((NCOEF, NCOEF))
_EG_EXP = np.zeros((NCOEF, NCOEF))
for _a in range(ENERGY_BASIS_ORDER, NCOEF):
    for _b in range(ENERGY_BASIS_ORDER, NCOEF):
        _ex = _a + _b - 2 * ENERGY_BASIS_ORDER + 1
        _EG_COEF[_a, _b] = _FAC[ENERGY_BASIS_ORDER, _a] * _FAC[ENERGY_BASIS_ORDER, _b] / _ex
        _EG_EXP[_a, _b] = _ex


def _energy_gram(T):
    """Gram matrix of the energy basis derivative over one piece of duration T."""
    return _EG_COEF * float(T) ** _EG_EXP


class PerchSpline:
    """Immutable N-piece degree-7 spline with equal piece durations.

    Attributes:
        N: piece count.
        T_piece: duration of each piece (equal by construction).
        coeffs: (N, 8, 3) coefficient array, ascending powers of local time.
        q: (N-1, 3) intermediate points.
    """

    def __init__(self, N, T_piece, coeffs, q, lu, ipiv, knot_rows):
        self.N = N
        self.T_piece = float(T_piece)
        self.T_total = self.T_piece * N
        self.coeffs = coeffs
        self.q = q
        self._lu = lu
        self._ipiv = ipiv
        self._knot_rows = knot_rows

    # -- construction ------------------------------------------------------

    @staticmethod
    def build(bc0: BoundaryState, bcT: BoundaryState, q, T_total):
        """Build the minimum-snap spline through q with the given boundaries.

        q is an (N-1, 3) array of intermediate points; piece durations are
        all T_total / N.
        """
        q = np.atleast_2d(np.asarray(q, dtype=float))
        if q.shape[1] != 3:
            raise ValueError("q must be (N-1, 3)")
        N = q.shape[0] + 1
        if not (np.isfinite(T_total) and T_total > 0):
            raise ValueError("T_total must be positive")
        Ti = float(T_total) / N
        dim = 8 * N

        st = _structure(N)
        rt = _deriv_matrix(Ti)
        band = np.zeros(_AB_ROWS * dim)
        band[st["band_idx"]] = rt.ravel()[st["src_idx"]]
        band[st["const_band"]] = st["const_val"]
        band = band.reshape(_AB_ROWS, dim)

        rhs = np.zeros((dim, 3))
        rhs[0:4] = bc0.as_matrix()
        rhs[st["knot_rows"]] = q
        rhs[-4:] = bcT.as_matrix()

        lu, ipiv, info = lapack.dgbtrf(band, _BAND_L, _BAND_U)
        if info != 0:
            raise ValueError("singular spline system")
        sol, info = lapack.dgbtrs(lu, _BAND_L, _BAND_U, rhs, ipiv)
        if info != 0 or not np.all(np.isfinite(sol)):
            raise ValueError("singular spline system")
        coeffs = sol.reshape(N, 8, 3)
        return PerchSpline(N, Ti, coeffs, q.copy(), lu, ipiv, st["knot_rows"])

    # -- evaluation --------------------------------------------------------

    def piece_index(self, t):
        """Index of the piece owning absolute time t, with its local time."""
        if t < -1e-9 or t > self.T_total + 1e-9:
            raise ValueError(f"t={t} outside [0, {self.T_total}]")
        t = min(max(t, 0.0), self.T_total)
        i = min(int(t / self.T_piece), self.N - 1)
        return i, t - i * self.T_piece

    def eval(self, t, max_order=4):
        """Evaluate position and derivatives up to max_order at absolute time t.

        Returns a (max_order+1, 3) array.
        """
        i, tl = self.piece_index(t)
        return _deriv_matrix(tl)[: max_order + 1] @ self.coeffs[i]

    def sample(self, times, max_order=4):
        """Vectorized eval over an array of times: (len, max_order+1, 3)."""
        times = np.asarray(times, dtype=float).ravel()
        if times.size and (times.min() < -1e-9 or times.max() > self.T_total + 1e-9):
            raise ValueError("sample times outside trajectory span")
        tc = np.clip(times, 0.0, self.T_total)
        idx = np.minimum((tc / self.T_piece).astype(int), self.N - 1)
        tl = tc - idx * self.T_piece
        # basis[m, k, i] = FAC[k,i] * tl[m]^(i-k)
        basis = _FAC[None, : max_order + 1, :] * tl[:, None, None] ** _POW[None, : max_order + 1, :]
        return np.einsum("mki,mid->mkd", basis, self.coeffs[idx])

    # -- cost and gradients ------------------------------------------------

    def energy_cost(self):
        """Integrated squared snap with analytic gradients.

        Returns (cost, dE_dc (N,8,3), dE_dT (N,)) where dE_dT are partials
        with respect to the individual piece durations at fixed coefficients.
        """
        Q = _energy_gram(self.T_piece)
        Qc = np.einsum("ab,nbd->nad", Q, self.coeffs)
        cost = float(np.sum(self.coeffs * Qc))
        dE_dc = 2.0 * Qc
        end_snap = np.einsum("b,nbd->nd", basis_row(self.T_piece, ENERGY_BASIS_ORDER), self.coeffs)
        dE_dT = np.einsum("nd,nd->n", end_snap, end_snap)
        return cost, dE_dc, dE_dT

    def propagate_gradient(self, dF_dc, dF_dT):
        """Pull back (dF/dc, dF/dT_i) to the spline's free parameters.

        Returns (dJ_dq (N-1,3), dJ_dT_total scalar, dJ_dbcT (4,3)).  The
        terminal boundary state is a differentiable input; the initial
        boundary is fixed.
        """
        N = self.N
        dF_dc = np.asarray(dF_dc, dtype=float).reshape(8 * N, 3)
        G, info = lapack.dgbtrs(self._lu, _BAND_L, _BAND_U, dF_dc, self._ipiv, trans=1)
        if info != 0:
            raise ValueError("singular spline system")
        dJ_dq = G[self._knot_rows].copy()
        dJ_dbcT = G[-4:].copy()

        # dJ/dT_i = dF/dT_i - G^T (dM/dT_i) c: rows evaluated at the local
        # end time shift one derivative order up when differentiated.
        D = np.einsum("ki,nid->nkd", _deriv_matrix(self.T_piece), self.coeffs)
        dJ_dT = np.asarray(dF_dT, dtype=float).copy()
        if N > 1:
            Gblock = G[4 : 4 + 8 * (N - 1)].reshape(N - 1, 8, 3)
            Dmod = D[: N - 1].copy()
            Dmod[:, 0] = D[: N - 1, 1]
            dJ_dT[: N - 1] -= np.einsum("nmd,nmd->n", Gblock, Dmod)
        dJ_dT[N - 1] -= float(np.sum(G[-4:] * D[N - 1, 1:5]))

        dJ_dT_total = float(np.sum(dJ_dT)) / N
        return dJ_dq, dJ_dT_total, dJ_dbcT


def solve_boundary_polynomial(bc0: BoundaryState, bcT: BoundaryState, T):
    """Single degree-7 polynomial matching both boundary states over [0, T].

    Used for the initial-guess boundary value problem.  Returns an (8, 3)
    coefficient array in ascending powers.
    """
    A = np.zeros((8, 8))
    A[0:4] = _deriv_matrix(0.0)[0:4]
    A[4:8] = _deriv_matrix(float(T))[0:4]
    rhs = np.concatenate([bc0.as_matrix(), bcT.as_matrix()])
    return np.linalg.solve(A, rhs)
