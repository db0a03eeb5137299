"""Tensor B-spline least-squares approximation and C^l rate studies.

Uniform clamped knot vectors with K spans per axis give K + degree basis
functions per axis; fits are exact least squares through per-axis thin QR
factorizations of the collocation matrices.  ``rate_study`` measures the
sup-norm C^l error on a dense evaluation grid over a list of K values and
fits the log-log decay exponent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import BSpline
from scipy.linalg import solve_triangular

from .errors import RankDeficient

DEFAULT_DEGREE = 3


def uniform_knots(K: int, degree: int) -> np.ndarray:
    """Clamped knot vector on [0, 1] with K spans."""
    if K < 2:
        raise ValueError("need at least two knot spans")
    interior = np.arange(1, K) / K
    return np.concatenate(
        [np.zeros(degree + 1), interior, np.ones(degree + 1)]
    )


def basis_matrix(x: np.ndarray, knots: np.ndarray, degree: int) -> np.ndarray:
    """Dense collocation matrix of the B-spline basis at points x."""
    return BSpline.design_matrix(np.asarray(x, dtype=float), knots, degree).toarray()


def basis_derivative_matrix(x: np.ndarray, knots: np.ndarray, degree: int) -> np.ndarray:
    """First-derivative collocation matrix.

    Uses the derivative spline of degree ``degree - 1`` over the inner knot
    vector ``knots[1:-1]`` with the usual coefficient difference map, which
    stays well defined at both interval endpoints.
    """
    x = np.asarray(x, dtype=float)
    lower = BSpline.design_matrix(x, knots[1:-1], degree - 1).toarray()
    nb = len(knots) - degree - 1
    diff = np.zeros((nb - 1, nb))
    for i in range(nb - 1):
        span = knots[i + degree + 1] - knots[i + 1]
        diff[i, i] = -degree / span
        diff[i, i + 1] = degree / span
    return lower @ diff


@dataclass(frozen=True)
class SplineApproximant:
    degree: int
    knots_per_axis: int
    knots: np.ndarray
    coefficients: np.ndarray   # (*basis-per-axis, dim_out)
    dim_in: int
    dim_out: int
    fit_residual: float

    @property
    def basis_size(self) -> int:
        return self.knots_per_axis + self.degree


def fit_spline(axes, values, K: int, degree: int = DEFAULT_DEGREE) -> SplineApproximant:
    """Least-squares tensor spline fit of a tabulated field.

    Parameters
    ----------
    axes : list of 1D sample coordinate arrays in [0, 1], one per input axis
    values : ndarray shaped (*axis lengths,) or (*axis lengths, dim_out)
    K : knot spans per axis
    degree : spline degree (evaluation is C^{degree-1})

    Raises
    ------
    RankDeficient
        Fewer than 2 (K + degree) samples on some axis, or a numerically
        rank-deficient collocation matrix.
    """
    axes = [np.asarray(a, dtype=float) for a in axes]
    m = len(axes)
    if m not in (1, 2):
        raise ValueError("tensor fits support 1 or 2 input axes")
    vals = np.asarray(values, dtype=float)
    grid_shape = tuple(len(a) for a in axes)
    if vals.shape == grid_shape:
        vals = vals[..., None]
    if vals.shape[:-1] != grid_shape:
        raise ValueError("values do not match the sample axes")
    dim_out = vals.shape[-1]

    knots = uniform_knots(K, degree)
    nb = K + degree
    needed = 2 * nb
    qs, rs = [], []
    for a in axes:
        if len(a) < needed:
            raise RankDeficient(
                f"axis with {len(a)} samples cannot determine {nb} basis "
                f"functions; need at least {needed}"
            )
        A = basis_matrix(a, knots, degree)
        q, r = np.linalg.qr(A)
        if np.abs(np.diag(r)).min() < 1e-10:
            raise RankDeficient("collocation matrix is numerically rank deficient")
        qs.append(q)
        rs.append(r)

    if m == 1:
        w = qs[0].T @ vals.reshape(grid_shape[0], dim_out)
        coef = solve_triangular(rs[0], w)
        coef = coef.reshape(nb, dim_out)
        fitted = basis_matrix(axes[0], knots, degree) @ coef
        resid = float(np.abs(fitted - vals.reshape(-1, dim_out)).max())
    else:
        coef = np.empty((nb, nb, dim_out))
        A1 = basis_matrix(axes[0], knots, degree)
        A2 = basis_matrix(axes[1], knots, degree)
        for o in range(dim_out):
            w = qs[0].T @ vals[..., o] @ qs[1]
            c = solve_triangular(rs[0], w)
            c = solve_triangular(rs[1], c.T).T
            coef[..., o] = c
        fitted = np.einsum("ia,jb,abo->ijo", A1, A2, coef)
        resid = float(np.abs(fitted - vals).max())

    return SplineApproximant(
        degree=degree,
        knots_per_axis=K,
        knots=knots,
        coefficients=coef,
        dim_in=m,
        dim_out=dim_out,
        fit_residual=resid,
    )


def _eval_many(s: SplineApproximant, pts: np.ndarray, deriv_axis: int | None):
    rows = []
    for a in range(s.dim_in):
        if deriv_axis == a:
            rows.append(basis_derivative_matrix(pts[:, a], s.knots, s.degree))
        else:
            rows.append(basis_matrix(pts[:, a], s.knots, s.degree))
    if s.dim_in == 1:
        return rows[0] @ s.coefficients
    return np.einsum("na,nb,abo->no", rows[0], rows[1], s.coefficients)


def eval_spline(s: SplineApproximant, point, deriv_order: int = 0) -> np.ndarray:
    """Value (dim_out,) or first-derivative tensor (dim_out, dim_in) at a point."""
    if deriv_order not in (0, 1):
        raise ValueError("deriv_order must be 0 or 1")
    if deriv_order >= s.degree:
        raise ValueError("derivative order must stay below the degree")
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    if pts.shape[1] != s.dim_in:
        raise ValueError(f"points must have {s.dim_in} coordinates")
    if pts.min() < 0.0 or pts.max() > 1.0:
        raise ValueError("evaluation points must lie in the unit box")
    single = np.asarray(point).ndim == 1
    if deriv_order == 0:
        out = _eval_many(s, pts, None)
        return out[0] if single else out
    jac = np.stack(
        [_eval_many(s, pts, a) for a in range(s.dim_in)], axis=-1
    )  # (N, dim_out, dim_in)
    return jac[0] if single else jac


@dataclass(frozen=True)
class RateStudy:
    Ks: tuple[int, ...]
    errors: tuple[float, ...]
    slope: float
    ell: int


def rate_study(
    target: Callable[[np.ndarray], np.ndarray],
    dim_in: int,
    Ks,
    ell: int,
    degree: int = DEFAULT_DEGREE,
    target_jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
    train_per_axis: int | None = None,
    eval_per_axis: int | None = None,
) -> RateStudy:
    """Sup-norm C^ell spline error against K, with the fitted log-log slope.

    ``target`` maps (N, dim_in) points to (N,) or (N, dim_out) values; for
    ell = 1 a ``target_jacobian`` mapping points to (N, dim_out, dim_in) must
    be supplied.  The tabulation and the evaluation grid are uniform and
    shared across all K.
    """
    Ks = tuple(int(k) for k in Ks)
    if len(Ks) < 4:
        raise ValueError("need at least four K values for a slope fit")
    if ell not in (0, 1):
        raise ValueError("ell must be 0 or 1")
    if ell == 1 and target_jacobian is None:
        raise ValueError("ell = 1 needs the target jacobian")

    ntrain = train_per_axis or max(2 * (max(Ks) + degree), 64)
    neval = eval_per_axis or (257 if dim_in == 1 else 65)
    train_ax = np.linspace(0.0, 1.0, ntrain)
    eval_ax = np.linspace(0.0, 1.0, neval)

    if dim_in == 1:
        train_pts = train_ax[:, None]
        eval_pts = eval_ax[:, None]
        axes = [train_ax]
        tab_shape = (ntrain,)
    else:
        tx, ty = np.meshgrid(train_ax, train_ax, indexing="ij")
        train_pts = np.stack([tx.ravel(), ty.ravel()], axis=-1)
        ex, ey = np.meshgrid(eval_ax, eval_ax, indexing="ij")
        eval_pts = np.stack([ex.ravel(), ey.ravel()], axis=-1)
        axes = [train_ax, train_ax]
        tab_shape = (ntrain, ntrain)

    tvals = np.asarray(target(train_pts), dtype=float)
    if tvals.ndim == 1:
        tvals = tvals[:, None]
    dim_out = tvals.shape[1]
    tab = tvals.reshape(tab_shape + (dim_out,))

    ref = np.asarray(target(eval_pts), dtype=float)
    if ref.ndim == 1:
        ref = ref[:, None]
    ref_jac = None
    if ell == 1:
        ref_jac = np.asarray(target_jacobian(eval_pts), dtype=float)
        if ref_jac.ndim == 2:
            ref_jac = ref_jac[:, None, :]

    errors = []
    for K in Ks:
        s = fit_spline(axes, tab, K, degree=degree)
        if ell == 0:
            err = float(np.abs(eval_spline(s, eval_pts) - ref).max())
        else:
            jac = eval_spline(s, eval_pts, deriv_order=1)
            err = float(np.abs(jac - ref_jac).max())
        errors.append(err)

    slope = float(np.polyfit(np.log(Ks), np.log(errors), 1)[0])
    return RateStudy(Ks=Ks, errors=tuple(errors), slope=slope, ell=ell)
